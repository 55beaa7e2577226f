//! Browser bindings for `www/index.html`: block-symbol curves, the decay
//! profile of the projected counterexample, and the threshold table.
//!
//! Every entry point returns a flat `Vec<f64>` (a `Float64Array` in JS).

use wasm_bindgen::prelude::*;
use wormszego::experiments::counterexample_projection;
use wormszego::multipliers::block_symbol_line;
use wormszego::{LogGrid, WormParams};

fn params(beta: f64) -> Result<WormParams, String> {
    WormParams::new(beta).map_err(|e| e.to_string())
}

/// `[ν, 2/(1+ν), 2/(1−ν), ν/2, slope at ∞, slope at 0]`.
#[wasm_bindgen]
pub fn thresholds(beta: f64) -> Result<Vec<f64>, String> {
    let p = params(beta)?;
    Ok(vec![p.nu, p.lp_lower, p.lp_upper, p.sobolev_l2_sup, p.decay_exponent_infinity(), p.decay_exponent_zero()])
}

/// `m̃_{k,ℓ}(ξ, j)` at `points` equispaced `ξ` in `[xi_min, xi_max]`.
#[wasm_bindgen]
pub fn block_symbol_curve(
    beta: f64,
    k: usize,
    l: usize,
    j: i32,
    xi_min: f64,
    xi_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let p = params(beta)?;
    if points < 2 || !(xi_min < xi_max) {
        return Err("need at least two points on a nonempty interval".into());
    }
    let step = (xi_max - xi_min) / (points - 1) as f64;
    (0..points)
        .map(|i| block_symbol_line(k, l, xi_min + i as f64 * step, j as i64, &p).map_err(|e| e.to_string()))
        .collect()
}

/// `[log ρ, log₁₀|𝒫₁,₁g|]` pairs for `|log ρ| ≤ 20`, at most `max_points` of
/// them, on `x ∈ [−48, 48)` with `n = 2^log2_n` nodes.
#[wasm_bindgen]
pub fn decay_profile(beta: f64, log2_n: u32, max_points: usize) -> Result<Vec<f64>, String> {
    let p = params(beta)?;
    if !(10..=16).contains(&log2_n) {
        return Err("log2_n must lie in 10..=16".into());
    }
    let grid = LogGrid::new(-48.0, 48.0, 1 << log2_n, 2).map_err(|e| e.to_string())?;
    let field = counterexample_projection(&p, grid).map_err(|e| e.to_string())?;
    let inside: Vec<usize> = (0..grid.n).filter(|&k| grid.x(k).abs() <= 20.0).collect();
    let stride = inside.len().div_ceil(max_points.max(2));
    let mut out = Vec::new();
    for &k in inside.iter().step_by(stride) {
        let v = field.get(k, 0).norm();
        if v > 0.0 && v.is_finite() {
            out.push(grid.x(k));
            out.push(v.log10());
        }
    }
    Ok(out)
}
