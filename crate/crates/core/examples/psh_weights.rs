//! The level criterion for several level functions and the
//! plurisubharmonicity of the resulting weights `W_j`.
//!
//! cargo run --release --example psh_weights

use weighted_dvr::grid::GridBlock;
use weighted_dvr::level::{check_h_condition, check_psh, radial_grid, LevelFunction, DEFAULT_PSH_TOL};
use weighted_dvr::norm_family::NormFamily;

fn main() -> weighted_dvr::Result<()> {
    let grid = radial_grid(4.0, 400);
    let levels = [
        LevelFunction::exp_decay(),
        LevelFunction::gaussian(),
        LevelFunction::reciprocal(),
        LevelFunction::from_id("linear-rate:1,0.5")?,
        LevelFunction::from_rate("wavy-rate", |r| 1.0 + 0.5 * (3.0 * r).sin(), 4.0, 1e-3)?,
    ];
    for level in &levels {
        let rep = check_h_condition(level, &grid);
        println!(
            "{:<20} {:<6} min slack {:+.3e} at r={:.3}  rate agrees: {}",
            level.to_string(),
            rep.verdict.to_string(),
            rep.min_slack,
            rep.argmin_r,
            rep.mismatches.is_empty()
        );
    }

    let block = GridBlock::square(1.0, 64)?;
    let family = NormFamily::factorial();
    for level in &levels[..3] {
        let worst = (0..=50)
            .map(|j| check_psh(&family, level, j, &block, DEFAULT_PSH_TOL))
            .collect::<weighted_dvr::Result<Vec<_>>>()?
            .into_iter()
            .min_by(|a, b| {
                a.radial_min_slack
                    .min(a.laplacian_min_slack)
                    .total_cmp(&b.radial_min_slack.min(b.laplacian_min_slack))
            })
            .unwrap();
        println!(
            "psh {family} / {level}: worst j={} radial {:+.3e} laplacian {:+.3e} ({}, discrepancy {})",
            worst.j, worst.radial_min_slack, worst.laplacian_min_slack, worst.verdict, worst.discrepancy
        );
    }
    Ok(())
}
