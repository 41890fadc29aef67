//! Weierstrass division `f = q·g + r` in one and two base variables,
//! including a divisor that first needs a regularizing coordinate change.
//!
//! cargo run --release --example weierstrass_division

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weighted_dvr::norm_family::NormFamily;
use weighted_dvr::weierstrass::{
    coordinate_change, hat_tilde_split, random_instance, t_regularize, weierstrass_divide, PolySeries,
    DEFAULT_MAGNITUDE, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

fn term(alpha: usize, i: usize, c: f64) -> (Vec<usize>, usize, Complex64) {
    (vec![alpha], i, Complex64::new(c, 0.0))
}

fn main() -> weighted_dvr::Result<()> {
    let family = NormFamily::factorial();
    let h = 0.5;

    // g = t − x, f = t²: q = t + x, r = x².
    let g = PolySeries::from_terms(1, 3, 3, &[term(0, 1, 1.0), term(1, 0, -1.0)])?;
    let f = PolySeries::from_terms(1, 3, 3, &[term(0, 2, 1.0)])?;
    let d = weierstrass_divide(&f, &g, &family, h, &[0.25], DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!(
        "q:\n{}r:\n{}residual {:e}, ε = {:.4}",
        d.q.to_text(),
        d.r.to_text(),
        d.residual,
        d.certified_epsilon
    );

    let split = hat_tilde_split(&f, 1, &family, &[0.25], 0.4, h)?;
    println!(
        "split of f at b=1: hat slack {:.3}, tilde slack {:.3}",
        split.estimate.hat_slack, split.estimate.tilde_slack
    );

    // g = x is not t-regular; x = w − c·t makes it so.
    let g = PolySeries::from_terms(1, 2, 2, &[term(1, 0, 1.0)])?;
    let reg = t_regularize(&g, 16, DEFAULT_MAGNITUDE, 3)?;
    println!("regularized x with c = {:.4}, order {}", reg.c[0], reg.order);
    let f = coordinate_change(
        &PolySeries::from_terms(1, 2, reg.series.t_cap(), &[term(2, 0, 1.0)])?,
        &reg.c,
    )?
    .series;
    let d = weierstrass_divide(&f, &reg.series, &family, h, &[0.25], DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!(
        "x² in the new coordinates: residual {:e} after {} steps",
        d.residual, d.iterations
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, b) in [(1, 2), (2, 3)] {
        let (f, g) = random_instance(&mut rng, n, b, 3, 6, 0.3);
        let d = weierstrass_divide(&f, &g, &family, h, &vec![0.5; n], DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        println!(
            "random n={n} b={b}: residual {:e}, contraction {:.4} <= ε {:.4}, {} halvings",
            d.residual, d.contraction, d.certified_epsilon, d.shrinks
        );
    }
    Ok(())
}
