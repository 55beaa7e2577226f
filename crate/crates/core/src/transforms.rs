//! `C_p` conjugation and the Mellin–Fourier transform on `ℝ⁺ × 𝕋`.
//!
//! Conventions: `F(ξ, j) = ∫∫ f(x, θ) e^{−i(xξ + jθ)} dx dθ` with `θ` of
//! period `2π`, inverse density `1/(2π)²`. Discretely
//! `F(ξ_q, j) = dx · (2π/M) · e^{−i x_min ξ_q} · DFT₂[f]`, which makes
//! `mf_inverse ∘ mf_forward` the identity to rounding and the discrete
//! Plancherel identity exact.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{LogGrid, SheetField};
use crate::par;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Edge samples above this fraction of the peak mark a spectrum as affected
/// by truncation of the log line.
pub const EDGE_TOLERANCE: f64 = 1e-12;

/// `ℱ(C₂f)(ξ_q, j)` stored as `data[j_slot * n + q]` in FFT ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: LogGrid,
    pub data: Vec<Complex64>,
    /// Set when the transformed field did not decay at the grid edges.
    pub truncation_warning: bool,
}

impl Spectrum {
    pub fn zeros(grid: LogGrid) -> Self {
        Self { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()], truncation_warning: false }
    }

    /// Samples a closed-form spectrum `F(ξ, j)`.
    pub fn from_fn(grid: LogGrid, f: impl Fn(f64, i64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for js in 0..grid.m {
            let j = grid.mode(js);
            for q in 0..grid.n {
                data.push(f(grid.xi(q), j));
            }
        }
        Self { grid, data, truncation_warning: false }
    }

    pub fn get(&self, q: usize, j: i64) -> Option<Complex64> {
        self.grid.mode_index(j).map(|js| self.data[js * self.grid.n + q])
    }

    pub fn mode_line(&self, j: i64) -> Option<&[Complex64]> {
        let n = self.grid.n;
        self.grid.mode_index(j).map(|js| &self.data[js * n..(js + 1) * n])
    }

    /// Pointwise multiplication by a symbol `m(ξ, j)`.
    pub fn multiply(&mut self, m: impl Fn(f64, i64) -> Complex64) {
        let g = self.grid;
        for js in 0..g.m {
            let j = g.mode(js);
            for q in 0..g.n {
                self.data[js * g.n + q] *= m(g.xi(q), j);
            }
        }
    }

    /// `(1/(2π)²) Σ_j Σ_q |F|² dξ`, the Plancherel side of `∫∫|f|² dx dθ`.
    pub fn energy(&self) -> f64 {
        let dxi = self.grid.dxi();
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * dxi / (4.0 * std::f64::consts::PI.powi(2))
    }
}

/// `(C_p φ)(x, θ) = e^{x/p} φ(eˣ, θ)`.
pub fn cayley(p: f64, field: &SheetField) -> Result<SheetField> {
    scale_radial(p, field, 1.0)
}

/// `φ(ρ, θ) = ρ^{−1/p} g(log ρ, θ)`.
pub fn cayley_inverse(p: f64, field: &SheetField) -> Result<SheetField> {
    scale_radial(p, field, -1.0)
}

fn scale_radial(p: f64, field: &SheetField, sign: f64) -> Result<SheetField> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let g = field.grid;
    let w: Vec<f64> = (0..g.n).map(|k| (sign * g.x(k) / p).exp()).collect();
    let mut out = field.clone();
    for m in 0..g.m {
        let line = &mut out.data[m * g.n..(m + 1) * g.n];
        line.iter_mut().zip(w.iter()).for_each(|(v, s)| *v *= s);
    }
    Ok(out)
}

/// `∫∫ |f|² dx dθ` by the rectangle rule on the periodic grid.
pub fn line_energy(field: &SheetField) -> f64 {
    let g = field.grid;
    field.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dx() * g.dtheta()
}

fn edge_ratio(field: &SheetField) -> f64 {
    let g = field.grid;
    let peak = field.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0f64;
    for m in 0..g.m {
        edge = edge.max(field.get(0, m).norm()).max(field.get(g.n - 1, m).norm());
    }
    edge / peak
}

/// Angular DFT across the `M` nodes of every radial position. Output keeps
/// the mode-major layout.
fn angular(data: &[Complex64], g: &LogGrid, direction: FftDirection) -> Vec<Complex64> {
    let (n, m) = (g.n, g.m);
    let mut t = vec![Complex64::new(0.0, 0.0); n * m];
    for mi in 0..m {
        for k in 0..n {
            t[k * m + mi] = data[mi * n + k];
        }
    }
    let fft = plan(m, direction);
    par::for_each_chunk(&mut t, m * 1024, |_, chunk| fft.process(chunk));
    let mut out = vec![Complex64::new(0.0, 0.0); n * m];
    for k in 0..n {
        for mi in 0..m {
            out[mi * n + k] = t[k * m + mi];
        }
    }
    out
}

pub fn mf_forward(field: &SheetField) -> Spectrum {
    let g = field.grid;
    let truncation_warning = edge_ratio(field) > EDGE_TOLERANCE;
    let mut data = angular(&field.data, &g, FftDirection::Forward);
    let fft = plan(g.n, FftDirection::Forward);
    let scale = g.dx() * g.dtheta();
    let phase: Vec<Complex64> =
        (0..g.n).map(|q| Complex64::from_polar(scale, -g.x_min * g.xi(q))).collect();
    par::for_each_chunk(&mut data, g.n, |_, line| {
        fft.process(line);
        line.iter_mut().zip(phase.iter()).for_each(|(v, ph)| *v *= ph);
    });
    Spectrum { grid: g, data, truncation_warning }
}

pub fn mf_inverse(spectrum: &Spectrum) -> SheetField {
    let g = spectrum.grid;
    let fft = plan(g.n, FftDirection::Inverse);
    let scale = 1.0 / (g.n as f64 * g.dx() * 2.0 * std::f64::consts::PI);
    let phase: Vec<Complex64> =
        (0..g.n).map(|q| Complex64::from_polar(scale, g.x_min * g.xi(q))).collect();
    let mut data = spectrum.data.clone();
    par::for_each_chunk(&mut data, g.n, |_, line| {
        line.iter_mut().zip(phase.iter()).for_each(|(v, ph)| *v *= ph);
        fft.process(line);
    });
    let data = angular(&data, &g, FftDirection::Inverse);
    SheetField { grid: g, data }
}

/// Signum with `sgn(0) = 0`.
pub fn sgn0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Hilbert transform in the first variable: multiplier `−i sgn(ξ)`.
pub fn hilbert1(field: &SheetField) -> SheetField {
    let mut s = mf_forward(field);
    s.multiply(|xi, _| Complex64::new(0.0, -sgn0(xi)));
    mf_inverse(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_grid() -> LogGrid {
        LogGrid::new(-20.0, 20.0, 1 << 12, 8).unwrap()
    }

    #[test]
    fn gaussian_spectrum() {
        let g = small_grid();
        let f = SheetField::from_fn(g, |x, _| Complex64::new((-x * x).exp(), 0.0));
        let s = mf_forward(&f);
        assert!(!s.truncation_warning);
        for q in 0..g.n {
            let xi = g.xi(q);
            if xi.abs() > 10.0 {
                continue;
            }
            let exact = 2.0 * PI * PI.sqrt() * (-xi * xi / 4.0).exp();
            let got = s.get(q, 0).unwrap();
            assert!((got - exact).norm() <= 1e-8 * exact.abs().max(1e-300) + 1e-14, "xi={xi}");
            for j in [-4, -1, 1, 3] {
                assert!(s.get(q, j).unwrap().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_mode_stays_single() {
        let g = small_grid();
        let f = SheetField::from_fn(g, |x, t| Complex64::from_polar((-x * x).exp(), 3.0 * t));
        let s = mf_forward(&f);
        for js in 0..g.m {
            let j = g.mode(js);
            let e: f64 = s.mode_line(j).unwrap().iter().map(|v| v.norm()).fold(0.0, f64::max);
            if j == 3 {
                assert!(e > 1.0);
            } else {
                assert!(e < 1e-12, "mode {j} leaked {e}");
            }
        }
    }

    #[test]
    fn hilbert_of_cosine_packet() {
        let g = LogGrid::new(-256.0, 256.0, 1 << 14, 2).unwrap();
        let env = |x: f64| (-(x / 40.0).powi(2)).exp();
        let f = SheetField::from_fn(g, |x, _| Complex64::new(x.cos() * env(x), 0.0));
        let h = hilbert1(&f);
        let mut err = 0.0f64;
        for k in 0..g.n {
            let x = g.x(k);
            err = err.max((h.get(k, 0) - Complex64::new(x.sin() * env(x), 0.0)).norm());
        }
        assert!(err < 1e-3, "sup error {err}");
    }

    #[test]
    fn truncation_flag_for_non_decaying_field() {
        let g = small_grid();
        let f = SheetField::from_fn(g, |_, _| Complex64::new(1.0, 0.0));
        assert!(mf_forward(&f).truncation_warning);
    }
}
