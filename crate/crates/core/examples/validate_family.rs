//! Runs the condition checks on the built-in norm families and shows where
//! controlled nuclearity of the double-exponential family breaks down.
//!
//! cargo run --release --example validate_family

use weighted_dvr::norm_family::{check_conditions, NormFamily, Verdict};

fn main() -> weighted_dvr::Result<()> {
    let families = [
        NormFamily::factorial(),
        NormFamily::power_factorial(1.5)?,
        NormFamily::power_polynomial(1, 2.0)?,
        NormFamily::power_exponential(1, 2.0)?,
        NormFamily::exp_factorial(1.0)?,
        NormFamily::double_exp_factorial(2.0)?,
    ];
    for family in &families {
        let s = family.level_bound();
        let (h, k) = (0.5 * s, 0.9 * s);
        let report = check_conditions(family, h, k, 200)?;
        println!("{family}  h={h} k={k}");
        for c in &report.checks {
            let witness = c.witness.map(|w| w.to_string()).unwrap_or_default();
            println!(
                "  {:<24} {:<12} {:<10} slack={:e}",
                c.id.to_string(),
                c.verdict.to_string(),
                witness,
                c.slack
            );
        }
    }

    // The double-exponential family keeps K bounded only when k >= γh.
    let ex5 = NormFamily::double_exp_factorial(2.0)?;
    println!("\n{ex5}: controlled nuclearity against k = 0.9");
    for h in [0.30, 0.40, 0.45, 0.46, 0.50] {
        let report = check_conditions(&ex5, h, 0.9, 200)?;
        let c = report.get(weighted_dvr::norm_family::ConditionId::ControlledNuclearity);
        let mark = if c.verdict == Verdict::Pass { "bounded" } else { "grows" };
        println!("  h={h:<5} k/h={:<6.3} {} ({mark})", 0.9 / h, c.verdict);
    }

    let broken = check_conditions(&NormFamily::factorial(), 2.0, 3.0, 10)?;
    let norm = broken.get(weighted_dvr::norm_family::ConditionId::Normalization);
    println!(
        "\nfactorial at h=2: normalization {} at {}",
        norm.verdict,
        norm.witness.unwrap()
    );
    Ok(())
}
