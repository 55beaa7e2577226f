//! The invariant suite behind `wormszego selftest`.
//!
//! The fixed-window principal-value check is left to `verify-kernels`; here
//! the truncated transform is checked for first-order convergence in `ε` and
//! for the window-corrected residual.

use wormszego::experiments::{decay_experiment, decay_grid, default_log_r, isometry_check, lp_sweep, verify_kernels, DecayConfig};
use wormszego::multipliers::MultiplierTable;
use wormszego::norms::{inner_product, lp_norm, Verdict};
use wormszego::szego::{apply_szego, compose_multipliers};
use wormszego::transforms::{cayley, cayley_inverse, line_energy, mf_forward, mf_inverse};
use wormszego::{BoundaryField, Complex64, LogGrid, Result, Sheet, SheetField, WormParams};

use crate::Check;

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn bumps(grid: LogGrid, shift: f64, j: i64) -> SheetField {
    SheetField::from_fn(grid, |x, t| {
        (-(x - shift).powi(2) / 2.0).exp() * Complex64::from_polar(1.0, j as f64 * t)
            + Complex64::new(0.3, -0.2) * (-(x + shift).powi(2)).exp()
    })
}

pub fn run(params: &WormParams) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let grid = LogGrid::new(-20.0, 20.0, 1 << 12, 8)?;

    let f = bumps(grid, 1.0, 3);
    let s = mf_forward(&f);
    out.push(Check::below("mellin-fourier round trip", rel_diff(&mf_inverse(&s).data, &f.data), 1e-10));
    out.push(Check::below("plancherel", (s.energy() / line_energy(&f) - 1.0).abs(), 1e-10));
    let c = cayley_inverse(2.0, &cayley(2.0, &f)?)?;
    out.push(Check::below("cayley round trip", rel_diff(&c.data, &f.data), 1e-10));

    let mut a = BoundaryField::zeros(grid);
    let mut b = BoundaryField::zeros(grid);
    for (i, sh) in Sheet::ALL.into_iter().enumerate() {
        a.set_sheet(sh, &cayley_inverse(2.0, &bumps(grid, 0.5 * i as f64 - 1.0, i as i64 - 1))?)?;
        b.set_sheet(sh, &cayley_inverse(2.0, &bumps(grid, 1.0 - i as f64, 1 - i as i64))?)?;
    }
    let pa = apply_szego(&a, params)?;
    let ppa = apply_szego(&pa, params)?;
    let pb = apply_szego(&b, params)?;
    let idem = lp_norm(&ppa.sub(&pa)?, 2.0, params)?.value / lp_norm(&pa, 2.0, params)?.value;
    out.push(Check::below("projection idempotent", idem, 1e-6));
    let adj = (inner_product(&pa, &b, params)? - inner_product(&a, &pb, params)?).norm()
        / (lp_norm(&a, 2.0, params)?.value * lp_norm(&b, 2.0, params)?.value);
    out.push(Check::below("projection self-adjoint", adj, 1e-6));

    let f1 = cayley_inverse(2.0, &f)?;
    let mut comp = 0.0f64;
    for (x, y) in [((1, 1), (2, 3)), ((4, 2), (1, 3))] {
        let ma = MultiplierTable::block(x.0, x.1, params, grid)?;
        let mb = MultiplierTable::block(y.0, y.1, params, grid)?;
        let (two, one) = compose_multipliers(&ma, &mb, &f1)?;
        comp = comp.max(rel_diff(&two.data, &one.data));
    }
    out.push(Check::below("block composition", comp, 1e-9));

    let iso = isometry_check(params, &[1.5, 2.0, 3.0])?;
    let worst = iso.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    out.push(Check::below("isometry", worst, iso.tolerance));

    let k = verify_kernels(params)?;
    for pair in &k.pairs {
        out.push(Check::below(format!("pair {}", pair.name), pair.max_abs_error, pair.tolerance));
    }
    out.push(Check::below("pv order in eps", (k.pv.eps_order - 1.0).abs(), 0.05));
    out.push(Check::below("pv corrected residual", k.pv.corrected_residual, 1e-6));

    let d = decay_experiment(params, decay_grid(), &DecayConfig::default())?;
    out.push(Check::below("slope at infinity", d.infinity.deviation.abs(), 0.02));
    out.push(Check::below("slope at zero", d.zero.deviation.abs(), 0.02));
    if let Some(o) = &d.oracle {
        out.push(Check::below("shifted-symbol oracle", o.exact_max_rel_dev, o.exact_tolerance));
    }

    let sweep = lp_sweep(params, decay_grid(), &[2.0], &default_log_r())?;
    out.push(Check::label(
        "L2 truncation converges",
        format!("{:?}", Verdict::Convergent),
        format!("{:?}", sweep.points[0].growth.verdict),
    ));
    Ok(out)
}
