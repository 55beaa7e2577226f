use std::f64::consts::PI;

use approx::assert_relative_eq;
use wormszego::experiments::{
    analytic_g_spectrum, counterexample_projection, decay_constants, decay_experiment, decay_grid, default_log_r,
    isometry_check, lp_sweep, make_g, p11_oracle, rescale_ln, sobolev_lp_sweep, sobolev_sweep, verify_kernels,
    DecayConfig, OracleForm, SweepKind, SweepReport, SCHEMA,
};
use wormszego::norms::{lp_norm, Verdict};
use wormszego::transforms::{cayley, mf_forward};
use wormszego::{LogGrid, Sheet, WormParams};

fn params(beta: f64) -> WormParams {
    WormParams::new(beta).unwrap()
}

// Quadrature anchors of the printed-form oracle at ρ = 1.
const ORACLE_AT_ONE: [(f64, f64); 3] =
    [(1.5, 0.13926140361193476), (2.0, 0.22284443979789957), (3.0, 0.6842779167672784)];
// (β/π, A, B).
const DECAY_CONSTANTS: [(f64, f64, f64); 3] = [
    (1.5, 9.143075686775429, 31.99526042700325),
    (2.0, 10.00600049052406, 25.898231138549463),
    (3.0, 10.64515071533688, 23.47816827586420),
];

#[test]
fn g_is_in_every_lp() {
    let p = params(2.0 * PI);
    let g = LogGrid::new(-20.0, 20.0, 1 << 12, 2).unwrap();
    let f = make_g(&p, g);
    for q in [1.2, 2.0, 4.0] {
        let v = lp_norm(&f, q, &p).unwrap().value;
        assert!(v.is_finite() && v > 0.0);
    }
    for s in [Sheet::E2, Sheet::E3, Sheet::E4] {
        assert_eq!(f.sheet(s).max_abs(), 0.0);
    }
    assert_eq!(rescale_ln(&p), 16.0 * PI * PI);
}

#[test]
fn g_spectrum_matches_the_closed_form() {
    let p = params(2.0 * PI);
    let g = LogGrid::experiment_default();
    let s = mf_forward(&cayley(2.0, &make_g(&p, g).sheet(Sheet::E1)).unwrap());
    let peak = 2.0 * PI * analytic_g_spectrum(&p, 4.0 * p.beta);
    assert_relative_eq!(analytic_g_spectrum(&p, 4.0 * p.beta), PI.sqrt());
    let mut worst = 0.0f64;
    for q in 0..g.n {
        let xi = g.xi(q);
        if (xi - 4.0 * p.beta).abs() <= 10.0 {
            // The θ-integral contributes 2π on j = 0.
            let exact = 2.0 * PI * analytic_g_spectrum(&p, xi);
            worst = worst.max((s.get(q, 0).unwrap() - exact).norm() / peak);
        }
        for j in [-3, 1, 5] {
            assert!(s.get(q, j).unwrap().norm() < 1e-12 * peak);
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn oracle_anchors_and_positivity() {
    for (b, anchor) in ORACLE_AT_ONE {
        let v = p11_oracle(&[1.0], &params(b * PI), OracleForm::AsPrinted).unwrap()[0];
        assert_relative_eq!(v.re, anchor, max_relative = 1e-8);
        assert_eq!(v.im, 0.0);
    }
    let rhos: Vec<f64> = (-12..=12).map(|k| (k as f64).exp()).collect();
    let p = params(2.0 * PI);
    let o = p11_oracle(&rhos, &p, OracleForm::AsPrinted).unwrap();
    assert!(o.iter().all(|v| v.re > 0.0));
    // √ρ · oracle decreases in the tail.
    let tail: Vec<f64> = rhos.iter().zip(&o).skip(16).map(|(r, v)| r.sqrt() * v.re).collect();
    assert!(tail.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn pipeline_matches_the_shifted_symbol_oracle() {
    let p = params(2.0 * PI);
    let g = decay_grid();
    let field = counterexample_projection(&p, g).unwrap();
    let nodes: Vec<usize> = (0..=40).map(|i| g.node_of(-5.0 + 0.25 * i as f64).unwrap()).collect();
    let rhos: Vec<f64> = nodes.iter().map(|&k| g.rho(k)).collect();
    let o = p11_oracle(&rhos, &p, OracleForm::ExactSymbol).unwrap();
    for (i, &k) in nodes.iter().enumerate() {
        let d = (field.get(k, 0) - o[i]).norm() / o[i].norm();
        assert!(d < 1e-5, "rho={}: {d}", rhos[i]);
    }
}

#[test]
fn decay_constants_are_ordered_and_stable() {
    for (b, a, bb) in DECAY_CONSTANTS {
        let c = decay_constants(&params(b * PI)).unwrap();
        assert_relative_eq!(c.a, a, max_relative = 1e-8);
        assert_relative_eq!(c.b, bb, max_relative = 1e-8);
        assert!(c.b >= c.a);
        assert!(c.a_refinement_change < 1e-3);
    }
}

#[test]
fn decay_slopes_three_halves_pi() {
    let r = decay_experiment(&params(1.5 * PI), decay_grid(), &DecayConfig { with_oracle: false, ..Default::default() })
        .unwrap();
    assert_eq!(r.schema, SCHEMA);
    assert!((r.infinity.exponent + 0.75).abs() < 0.02);
    assert!((r.zero.exponent + 0.25).abs() < 0.02);
    assert!(r.pass);
    assert!(r.oracle.is_none());
}

#[test]
fn lp_sweep_three_halves_pi() {
    let p = params(1.5 * PI);
    let r = lp_sweep(&p, decay_grid(), &[1.2, 2.0, 5.0], &default_log_r()).unwrap();
    assert_eq!(r.kind, SweepKind::Lp);
    assert_eq!(r.verdicts, [Verdict::Divergent, Verdict::Convergent, Verdict::Divergent]);
    assert!(r.all_match);
    for pt in &r.points {
        if let Some(e) = pt.exponent_error {
            assert!(e < 0.05, "p={}: {e}", pt.p);
        }
    }
}

#[test]
fn sobolev_sweep_three_halves_pi() {
    let p = params(1.5 * PI);
    let r = sobolev_sweep(&p, decay_grid(), &[0.1, 0.4], &default_log_r()).unwrap();
    assert_eq!(r.verdicts, [Verdict::Convergent, Verdict::Divergent]);
    let pt = &r.points[1];
    assert!((pt.growth.exponent.unwrap() - pt.predicted_exponent).abs() < 0.05);
}

#[test]
fn sobolev_lp_sweep_window() {
    let p = params(1.5 * PI);
    // s + ½ − 1/p: 0.1 + 0.25 = 0.35 > ¼; 0.1 − 0.25 = −0.15 inside.
    let r = sobolev_lp_sweep(&p, decay_grid(), &[(0.1, 4.0), (0.1, 1.6)], &default_log_r()).unwrap();
    assert_eq!(r.kind, SweepKind::SobolevLp);
    assert_eq!(r.verdicts, [Verdict::Divergent, Verdict::Convergent]);
}

#[test]
fn short_ladders_are_refined_and_long_ones_rejected() {
    let p = params(2.0 * PI);
    let r = lp_sweep(&p, decay_grid(), &[2.0], &[16.0, 24.0, 32.0]).unwrap();
    assert!(r.ladder_refined);
    assert_eq!(r.log_r.len(), 9);
    assert!(lp_sweep(&p, decay_grid(), &[2.0], &[20.0, 25.0, 30.0, 35.0, 40.0, 45.0]).is_err());
}

#[test]
fn sweep_report_serializes() {
    let p = params(2.0 * PI);
    let r = sobolev_sweep(&p, decay_grid(), &[0.1], &default_log_r()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["verdicts"][0], "convergent");
    assert_eq!(v["grid"]["M"], 2);
    let back: SweepReport = serde_json::from_value(v).unwrap();
    assert_eq!(back, r);
}

#[test]
fn kernel_pairs_and_pv_structure() {
    let r = verify_kernels(&params(2.0 * PI)).unwrap();
    assert_eq!(r.pairs.len(), 4);
    for c in &r.pairs {
        assert!(c.pass, "{}: {}", c.name, c.max_abs_error);
    }
    // The truncation error is first order in ε; the window term accounts for it.
    assert!((r.pv.eps_order - 1.0).abs() < 0.05);
    assert!(r.pv.corrected_residual < 1e-6);
    assert!(r.pv.max_error_opposite_sign > 1.0);
    assert_eq!(r.verdicts.len(), 5);
}

#[test]
fn isometry_holds_for_both_betas() {
    for b in [1.5, 2.0] {
        let r = isometry_check(&params(b * PI), &[1.5, 2.0, 3.0]).unwrap();
        assert_eq!(r.rows.len(), 9);
        assert!(r.pass);
        assert!(r.verdicts.iter().all(|&v| v));
    }
}
