use num_complex::Complex64;
use proptest::prelude::*;
use weighted_dvr::dbar::DbarOperator;
use weighted_dvr::grid::{GridBlock, GridSeriesField};
use weighted_dvr::norm_family::NormFamily;
use weighted_dvr::series::TruncatedSeries;
use weighted_dvr::weierstrass::{coordinate_change, hat_tilde_split, PolySeries};

type C = Complex64;

fn complex() -> impl Strategy<Value = C> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C::new(re, im))
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(complex(), len)
}

fn family() -> impl Strategy<Value = NormFamily> {
    prop_oneof![
        Just(NormFamily::factorial()),
        Just(NormFamily::power_factorial(1.5).unwrap()),
        Just(NormFamily::exp_factorial(1.0).unwrap()),
    ]
}

fn poly(n: usize, x_cap: usize, t_cap: usize) -> impl Strategy<Value = PolySeries> {
    let len = (x_cap + 1).pow(n as u32) * (t_cap + 1);
    coeffs(len).prop_map(move |cs| {
        let mut terms = Vec::new();
        let mut k = 0;
        let x_blocks = (x_cap + 1).pow(n as u32);
        for x in 0..x_blocks {
            let mut alpha = vec![0; n];
            let mut rest = x;
            for a in alpha.iter_mut().rev() {
                *a = rest % (x_cap + 1);
                rest /= x_cap + 1;
            }
            for i in 0..=t_cap {
                terms.push((alpha.clone(), i, cs[k]));
                k += 1;
            }
        }
        PolySeries::from_terms(n, x_cap, t_cap, &terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_submultiplicative(fam in family(), a in coeffs(21), b in coeffs(21), h in 0.1f64..0.9) {
        let (a, b) = (TruncatedSeries::new(a), TruncatedSeries::new(b));
        let lhs = a.multiply(&b).norm(&fam, h).unwrap();
        let rhs = a.norm(&fam, h).unwrap() * b.norm(&fam, h).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn invert_round_trips(tail in coeffs(20), a0 in 0.8f64..1.2) {
        let fam = NormFamily::factorial();
        let mut cs = vec![C::new(a0, 0.0)];
        cs.extend(tail.into_iter().map(|v| v * 0.2));
        let s = TruncatedSeries::new(cs);
        let inv = s.invert(&fam, 0.5, 1e-15).unwrap();
        let mut prod = s.multiply(&inv).into_coeffs();
        prod[0] -= 1.0;
        let defect = TruncatedSeries::new(prod).norm(&fam, 0.5).unwrap();
        prop_assert!(defect <= 1e-12, "defect {defect:e}");
    }

    #[test]
    fn t_divide_times_t_is_exact(fam in family(), tail in coeffs(20)) {
        let mut cs = vec![C::new(0.0, 0.0)];
        cs.extend(tail);
        let s = TruncatedSeries::new(cs);
        let q = s.t_divide(&fam, 0.9, 0.5).unwrap().quotient;
        prop_assert_eq!(q.with_trunc(20).multiply(&TruncatedSeries::monomial(1, 20)), s);
    }

    #[test]
    fn hat_tilde_reconstructs_and_bounds(f in poly(1, 2, 5), b in 1usize..4) {
        let fam = NormFamily::factorial();
        let split = hat_tilde_split(&f, b, &fam, &[0.5], 0.4, 0.6).unwrap();
        let rebuilt = split.hat.add(&split.tilde.shift_t(b)).unwrap();
        prop_assert!(rebuilt.sub(&f).unwrap().max_abs() == 0.0);
        prop_assert!(split.hat.terms().iter().all(|(_, i, _)| *i < b));
        prop_assert!(split.estimate.hat_slack >= -1e-12);
        prop_assert!(split.estimate.tilde_slack >= -1e-12);
    }

    #[test]
    fn coordinate_change_inverts(f in poly(2, 2, 12), c0 in complex(), c1 in complex()) {
        // t-degree 4 plus x-degree 2 + 2 stays within the t cap of 12
        let low = f.with_caps(2, 4).with_caps(2, 12);
        let fwd = coordinate_change(&low, &[c0, c1]).unwrap();
        prop_assert_eq!(fwd.overflow, 0);
        let back = coordinate_change(&fwd.series, &[-c0, -c1]).unwrap();
        prop_assert!(back.series.sub(&low).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn spectral_eps_is_monotone(fam in family(), h in 0.1f64..0.9) {
        let eps: Vec<f64> = (1..=60).map(|n| fam.spectral_eps(h, n).unwrap()).collect();
        prop_assert!(eps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn l2_norm_is_below_l1(fam in family(), a in coeffs(31), h in 0.1f64..0.9) {
        let n = TruncatedSeries::new(a).norms(&fam, h).unwrap();
        prop_assert!(n.l2 <= n.l1 * (1.0 + 1e-12));
    }

    #[test]
    fn dbar_adjoint_matches(u in coeffs(64), v in coeffs(64)) {
        let block = GridBlock::square(1.0, 8).unwrap();
        let op = DbarOperator::new(&block);
        let au = op.apply(&u);
        let ahv = op.apply_adjoint(&v);
        let lhs: C = au.iter().zip(&v).map(|(a, b)| a * b.conj()).sum();
        let rhs: C = u.iter().zip(&ahv).map(|(a, b)| a * b.conj()).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn grid_field_io_round_trips(data in coeffs(64 * 3)) {
        let block = GridBlock::new(-1.0, 0.5, -0.25, 2.0, 8).unwrap();
        let field = GridSeriesField::from_data(block, 2, data).unwrap();
        let text = GridSeriesField::from_text(&field.to_text(), block, 2).unwrap();
        let bytes = GridSeriesField::from_bytes(&field.to_bytes(), block, 2).unwrap();
        prop_assert_eq!(&text, &field);
        prop_assert_eq!(&bytes, &field);
    }
}
