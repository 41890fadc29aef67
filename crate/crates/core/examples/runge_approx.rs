//! Tail cut and polynomial approximation of series-valued functions on
//! nested squares.
//!
//! cargo run --release --example runge_approx

use num_complex::Complex64;
use weighted_dvr::approximation::{approximate_section, NestedBlocks, Section};
use weighted_dvr::level::LevelFunction;
use weighted_dvr::norm_family::NormFamily;
use weighted_dvr::series::TruncatedSeries;

fn main() -> weighted_dvr::Result<()> {
    let family = NormFamily::factorial();
    let level = LevelFunction::exp_decay().scaled(0.5)?;
    let blocks = NestedBlocks::exhaustion(2, 0.5, 48)?;

    // a_j(z) = e^{jz}/2^j: every coefficient needs its own fit.
    let f = |z: Complex64| TruncatedSeries::new((0..12).map(|j| (z * j as f64).exp() / 2f64.powi(j)).collect());
    let (g, rep) = approximate_section(&Section::Closure(&f), &family, &level, 1, 1e-3, &blocks)?;
    println!("tail index l = {}, degrees {:?}", rep.l, rep.degrees);
    println!(
        "tail sums {:?}",
        rep.tail_sums.iter().map(|t| format!("{t:.2e}")).collect::<Vec<_>>()
    );
    for b in &rep.blocks {
        println!(
            "block |Re z|,|Im z| <= {}: tail {:.2e} fit {:.2e} total {:.2e}",
            b.half_width, b.tail, b.fit, b.total
        );
    }
    let z = Complex64::new(1.4, -1.2);
    println!("g on the next block at {z}: {:.4}", g.eval(z, 2).coeff(1));
    Ok(())
}
