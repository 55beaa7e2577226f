use std::f64::consts::PI;

use wormszego_demo::{block_symbol_curve, decay_profile, thresholds};

#[test]
fn thresholds_at_two_pi() {
    let t = thresholds(2.0 * PI).unwrap();
    let want = [1.0 / 3.0, 1.5, 3.0, 1.0 / 6.0, -2.0 / 3.0, -1.0 / 3.0];
    for (a, b) in t.iter().zip(want) {
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
    assert!(thresholds(3.0).is_err());
}

#[test]
fn block_curve_is_positive_and_bounded() {
    let beta = 2.0 * PI;
    let bound = ((2.0 * beta - PI) / 4.0).exp() * (1.0 + 1e-12);
    for (k, l) in [(1, 1), (2, 3), (4, 1)] {
        for j in [-2, 0, 3] {
            let c = block_symbol_curve(beta, k, l, j, -6.0, 6.0, 121).unwrap();
            assert_eq!(c.len(), 121);
            assert!(c.iter().all(|v| *v > 0.0 && *v <= bound));
        }
    }
    assert!(block_symbol_curve(beta, 5, 1, 0, -1.0, 1.0, 10).is_err());
    assert!(block_symbol_curve(beta, 1, 1, 0, 1.0, -1.0, 10).is_err());
}

#[test]
fn decay_profile_tail_slopes() {
    let beta = 1.5 * PI;
    let d = decay_profile(beta, 14, 4000).unwrap();
    assert!(d.len() % 2 == 0 && d.len() <= 8000);
    let at = |x0: f64| {
        let i = (0..d.len() / 2).min_by(|&a, &b| (d[2 * a] - x0).abs().total_cmp(&(d[2 * b] - x0).abs())).unwrap();
        (d[2 * i], d[2 * i + 1] * 10f64.ln())
    };
    let slope = |a: f64, b: f64| {
        let (xa, ya) = at(a);
        let (xb, yb) = at(b);
        (yb - ya) / (xb - xa)
    };
    assert!((slope(12.0, 20.0) + 0.75).abs() < 0.02, "{}", slope(12.0, 20.0));
    assert!((slope(-20.0, -12.0) + 0.25).abs() < 0.02, "{}", slope(-20.0, -12.0));
    assert!(decay_profile(beta, 9, 100).is_err());
}
