use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use wormszego::multipliers::{block_symbol_line, model_symbol_ma};
use wormszego::norms::{fit_power_law, gagliardo_seminorm, growth_fit, inner_product, lp_norm, Verdict};
use wormszego::szego::apply_szego;
use wormszego::transforms::{cayley, cayley_inverse, line_energy, mf_forward, mf_inverse};
use wormszego::{BoundaryField, LogGrid, Sheet, SheetField, WormParams};

#[derive(Clone, Debug)]
struct Bump {
    x0: f64,
    width: f64,
    k: f64,
    j: i64,
    c: (f64, f64),
}

fn bump() -> impl Strategy<Value = Bump> {
    (-3.0f64..3.0, 0.6f64..2.0, -4.0f64..4.0, -3i64..=3, -1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(x0, width, k, j, a, b)| Bump { x0, width, k, j, c: (a, b) })
}

fn line_field(grid: LogGrid, bumps: &[Bump]) -> SheetField {
    SheetField::from_fn(grid, |x, t| {
        bumps
            .iter()
            .map(|b| {
                Complex64::new(b.c.0, b.c.1)
                    * (-((x - b.x0) / b.width).powi(2)).exp()
                    * Complex64::from_polar(1.0, b.k * x + b.j as f64 * t)
            })
            .sum()
    })
}

fn grid() -> LogGrid {
    LogGrid::new(-24.0, 24.0, 1 << 11, 8).unwrap()
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let d: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (n / d).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip_and_plancherel(bumps in prop::collection::vec(bump(), 1..4)) {
        let f = line_field(grid(), &bumps);
        prop_assume!(f.max_abs() > 1e-3);
        let s = mf_forward(&f);
        prop_assert!(!s.truncation_warning);
        prop_assert!(rel(&mf_inverse(&s).data, &f.data) < 1e-12);
        prop_assert!((s.energy() / line_energy(&f) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cayley_round_trip(bumps in prop::collection::vec(bump(), 1..3), p in 1.0f64..6.0) {
        let f = line_field(grid(), &bumps);
        let back = cayley(p, &cayley_inverse(p, &f).unwrap()).unwrap();
        prop_assert!(rel(&back.data, &f.data) < 1e-14 || f.max_abs() == 0.0);
    }

    #[test]
    fn block_symbols_positive_and_bounded(
        beta in 1.05 * PI..5.0 * PI,
        k in 1usize..=4,
        l in 1usize..=4,
        xi in -300.0f64..300.0,
        j in -200i64..=200,
    ) {
        let p = WormParams::new(beta).unwrap();
        let m = block_symbol_line(k, l, xi, j, &p).unwrap();
        prop_assert!(m.is_finite() && m >= 0.0);
        prop_assert!(m <= (p.b() / 4.0).exp() * (1.0 + 1e-12));
    }

    #[test]
    fn model_symbol_in_unit_interval(a in PI..20.0, u in -1.0f64..1.0) {
        // Beyond |aξ| ≈ 18 the value rounds to 0 or 1 in double precision.
        let xi = 15.0 * u / a;
        let m = model_symbol_ma(a, xi).unwrap();
        prop_assert!(m > 0.0 && m < 1.0);
        prop_assert!(model_symbol_ma(a, xi + 0.01).unwrap() >= m);
    }

    #[test]
    fn lp_norm_triangle_inequality(
        a in prop::collection::vec(bump(), 1..3),
        b in prop::collection::vec(bump(), 1..3),
        p in 1.0f64..5.0,
    ) {
        let params = WormParams::new(2.0 * PI).unwrap();
        let g = grid();
        let fa = BoundaryField::from_sheet(Sheet::E2, line_field(g, &a));
        let fb = BoundaryField::from_sheet(Sheet::E2, line_field(g, &b));
        let neg_b = BoundaryField::zeros(g).sub(&fb).unwrap();
        let sum = fa.sub(&neg_b).unwrap();
        let lhs = lp_norm(&sum, p, &params).unwrap().value;
        let rhs = lp_norm(&fa, p, &params).unwrap().value + lp_norm(&fb, p, &params).unwrap().value;
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn gagliardo_is_p_homogeneous(c in 0.1f64..10.0, s in 0.05f64..0.95, p in 1.2f64..4.0) {
        let t: Vec<f64> = (0..200).map(|i| -5.0 + 0.05 * i as f64).collect();
        let f: Vec<Complex64> = t.iter().map(|&x| Complex64::new((-x * x).exp(), 0.3 * x.sin())).collect();
        let cf: Vec<Complex64> = f.iter().map(|v| v * c).collect();
        let a = gagliardo_seminorm(&t, &f, s, p).unwrap().value;
        let b = gagliardo_seminorm(&t, &cf, s, p).unwrap().value;
        prop_assert!((b / (a * c.powf(p)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn power_fit_recovers_exponents(e in -3.0f64..3.0, c in 0.01f64..100.0) {
        let x: Vec<f64> = (0..8).map(|k| 3f64.powi(k)).collect();
        let y: Vec<f64> = x.iter().map(|v| c * v.powf(e)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        prop_assert!((f.exponent - e).abs() < 1e-10);
        prop_assert!((f.prefactor / c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn growth_verdicts_follow_the_rule(gamma in -0.3f64..1.0) {
        // I(R) = Σ increments R_k^γ on a geometric ladder.
        let levels: Vec<f64> = (0..9).map(|k| (16.0 + 2.0 * k as f64).exp()).collect();
        let mut values = Vec::new();
        let mut acc = 1.0;
        for (i, r) in levels.iter().enumerate() {
            if i > 0 {
                acc += r.powf(gamma);
            }
            values.push(acc);
        }
        let g = growth_fit(&levels, &values).unwrap();
        let want = if gamma.abs() <= 0.02 {
            Verdict::Marginal
        } else if gamma > 0.0 {
            Verdict::Divergent
        } else {
            Verdict::Convergent
        };
        prop_assert!((g.exponent.unwrap() - gamma).abs() < 1e-6);
        prop_assert_eq!(g.verdict, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn projection_is_an_orthogonal_projection(
        a in prop::collection::vec(bump(), 1..3),
        b in prop::collection::vec(bump(), 1..3),
        ka in 1usize..=4,
        kb in 1usize..=4,
        beta in prop_oneof![Just(1.5 * PI), Just(2.0 * PI)],
    ) {
        let params = WormParams::new(beta).unwrap();
        let g = LogGrid::new(-48.0, 48.0, 1 << 12, 8).unwrap();
        let f = BoundaryField::from_sheet(Sheet::from_index(ka).unwrap(), cayley_inverse(2.0, &line_field(g, &a)).unwrap());
        let h = BoundaryField::from_sheet(Sheet::from_index(kb).unwrap(), cayley_inverse(2.0, &line_field(g, &b)).unwrap());
        let pf = apply_szego(&f, &params).unwrap();
        let ph = apply_szego(&h, &params).unwrap();
        let ppf = apply_szego(&pf, &params).unwrap();
        let npf = lp_norm(&pf, 2.0, &params).unwrap().value;
        prop_assume!(npf > 1e-8);
        prop_assert!(lp_norm(&ppf.sub(&pf).unwrap(), 2.0, &params).unwrap().value / npf < 1e-6);
        let nf = lp_norm(&f, 2.0, &params).unwrap().value;
        let nh = lp_norm(&h, 2.0, &params).unwrap().value;
        let d = inner_product(&pf, &h, &params).unwrap() - inner_product(&f, &ph, &params).unwrap();
        prop_assert!(d.norm() < 1e-6 * nf * nh);
        // ‖𝒫f‖ ≤ ‖f‖.
        prop_assert!(npf <= nf * (1.0 + 1e-9));
    }
}
