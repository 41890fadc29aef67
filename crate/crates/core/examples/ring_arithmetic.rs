//! Truncated series arithmetic with norm tracking: products, Neumann
//! inversion, division by `t` with its norm certificate, and the ℓ¹/ℓ²
//! embedding check.
//!
//! cargo run --release --example ring_arithmetic

use num_complex::Complex64;
use weighted_dvr::norm_family::NormFamily;
use weighted_dvr::series::{check_embeddings, TruncatedSeries};

fn main() -> weighted_dvr::Result<()> {
    let family = NormFamily::factorial();
    let h = 0.5;

    let a = TruncatedSeries::from_real(&[1.0, 2.0, 0.0, -1.0]);
    let b = TruncatedSeries::from_real(&[0.5, 0.0, 3.0, 1.0]);
    let ab = a.multiply(&b);
    println!("a·b = {:?}", ab.coeffs().iter().map(|c| c.re).collect::<Vec<_>>());
    println!(
        "‖ab‖ = {:.6} <= ‖a‖‖b‖ = {:.6}",
        ab.norm(&family, h)?,
        a.norm(&family, h)? * b.norm(&family, h)?
    );

    let unit = TruncatedSeries::from_real(&[2.0, 1.0, 0.5, 0.25, 0.125]);
    let inv = unit.invert(&family, h, 1e-15)?;
    let residual = (&unit.multiply(&inv) - &TruncatedSeries::one(4)).norm(&family, h)?;
    println!("inverse residual ‖s·s⁻¹ − 1‖ = {residual:e}");

    let s = TruncatedSeries::new(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, -2.0),
    ]);
    let div = s.t_divide(&family, 0.9, h)?;
    let c = div.certificate;
    println!(
        "s/t = {:?}; ‖s/t‖_l = {:.4} <= K‖s‖_k = {:.4} (K = {:.4}, scan {})",
        div.quotient.coeffs(),
        c.quotient_norm,
        c.bound,
        c.constant,
        c.scan_verdict
    );

    let rep = check_embeddings(1000, &family, 0.4, 1, 50, 7)?;
    println!(
        "embedding check over {} samples: K_emb = {:.4}, violations {}/{}/{}",
        rep.samples,
        rep.certificate.embedding_constant,
        rep.upper_violations,
        rep.lower_violations,
        rep.embedding_violations
    );
    Ok(())
}
