//! Sampled fields on `ℝ⁺ × 𝕋` (one sheet) and on the four-sheet boundary.
//!
//! Samples are stored mode-major: `data[m * n + k]` is the value at the
//! radial node `x_k = x_min + k·dx` (`ρ_k = e^{x_k}`) and the angular node
//! `θ_m = 2πm/M`, so every angular node owns a contiguous radial line.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Sheet;

/// Uniform grid in `x = log ρ` (periodic, `x_max` excluded) times `M`
/// equispaced angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize, m: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidParameter(format!(
                "grid range [{x_min}, {x_max}) is empty"
            )));
        }
        if n < 8 {
            return Err(Error::InvalidParameter(format!("n = {n} < 8")));
        }
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "angular count M = {m} must be even and >= 2"
            )));
        }
        Ok(Self { x_min, x_max, n, m })
    }

    /// `x ∈ [−30, 30)`, `n = 2¹⁶`, `M = 16`.
    pub fn experiment_default() -> Self {
        Self { x_min: -30.0, x_max: 30.0, n: 1 << 16, m: 16 }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx()
    }

    pub fn rho(&self, k: usize) -> f64 {
        self.x(k).exp()
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn theta(&self, m: usize) -> f64 {
        m as f64 * self.dtheta()
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed frequency of FFT bin `q`; the Nyquist bin is taken negative.
    pub fn xi(&self, q: usize) -> f64 {
        let n = self.n as isize;
        let q = q as isize;
        let signed = if q < n / 2 { q } else { q - n };
        2.0 * PI * signed as f64 / (self.n as f64 * self.dx())
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.dx())
    }

    /// Integer angular frequency of mode slot `idx` (FFT ordering).
    pub fn mode(&self, idx: usize) -> i64 {
        let m = self.m as i64;
        let idx = idx as i64;
        if idx < m / 2 {
            idx
        } else {
            idx - m
        }
    }

    pub fn mode_index(&self, j: i64) -> Option<usize> {
        let half = self.m as i64 / 2;
        if j < -half || j >= half {
            return None;
        }
        Some(if j >= 0 { j as usize } else { (j + self.m as i64) as usize })
    }

    /// Index of the node equal to `x` when `x` lies exactly on the grid.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.x_min) / self.dx();
        let k = t.round();
        if (t - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < self.n {
            Some(k as usize)
        } else {
            None
        }
    }

    pub(crate) fn check_same(&self, other: &LogGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Samples on a single copy of `ℝ⁺ × 𝕋` (or `ℝ × 𝕋` after conjugation).
#[derive(Clone, Debug, PartialEq)]
pub struct SheetField {
    pub grid: LogGrid,
    pub data: Vec<Complex64>,
}

impl SheetField {
    pub fn zeros(grid: LogGrid) -> Self {
        Self { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f(x, θ)` at every node, with `x` the log-radial coordinate.
    pub fn from_fn(grid: LogGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for m in 0..grid.m {
            let theta = grid.theta(m);
            for k in 0..grid.n {
                data.push(f(grid.x(k), theta));
            }
        }
        Self { grid, data }
    }

    pub fn from_data(grid: LogGrid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn get(&self, k: usize, m: usize) -> Complex64 {
        self.data[m * self.grid.n + k]
    }

    pub fn line(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.grid.n..(m + 1) * self.grid.n]
    }

    pub fn scale(&mut self, c: Complex64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Samples on the four sheets `E₁ … E₄`, sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    pub grid: LogGrid,
    pub sheets: [Vec<Complex64>; 4],
}

impl BoundaryField {
    pub fn zeros(grid: LogGrid) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, sheets: [z.clone(), z.clone(), z.clone(), z] }
    }

    pub fn from_sheet(sheet: Sheet, field: SheetField) -> Self {
        let mut out = Self::zeros(field.grid);
        out.sheets[sheet.slot()] = field.data;
        out
    }

    pub fn sheet(&self, sheet: Sheet) -> SheetField {
        SheetField { grid: self.grid, data: self.sheets[sheet.slot()].clone() }
    }

    pub fn set_sheet(&mut self, sheet: Sheet, field: &SheetField) -> Result<()> {
        self.grid.check_same(&field.grid)?;
        self.sheets[sheet.slot()] = field.data.clone();
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.sheets
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Discrete Euclidean norm of all samples (no quadrature weights).
    pub fn euclid(&self) -> f64 {
        self.sheets
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &BoundaryField) -> Result<BoundaryField> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for (a, b) in out.sheets.iter_mut().zip(other.sheets.iter()) {
            a.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= y);
        }
        Ok(out)
    }
}
