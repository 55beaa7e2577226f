//! Closed-form symbols and their sampled tables.
//!
//! Block symbols, for sheets `k, ℓ ∈ {1..4}`:
//!
//! ```text
//! m_{k,ℓ}(z, j) = e^{iμ(z−½)} e^{iη(z−½+ij/2)} / D(z, j)
//! D(z, j)       = 4 cosh[iπ(z−½)] cosh[i(2β−π)(z−½+i(j/2+¼))]
//! m̃_{k,ℓ}(ξ, j) = m_{k,ℓ}(½ − iξ, j)
//!              = e^{μξ} e^{η(ξ−j/2)} / (4 cosh(πξ) cosh((2β−π)(ξ−j/2−¼)))
//! ```
//!
//! All real-line symbols are positive, so they are evaluated through their
//! logarithms; the ratio stays bounded where numerator and denominator
//! overflow.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::LogGrid;
use crate::geometry::WormParams;
use crate::transforms::Spectrum;

/// `ln cosh y` without overflow.
pub fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Principal-branch-free `ln cosh w` for complex `w`; only `exp` of the
/// result is meaningful.
fn ln_cosh_c(w: Complex64) -> Complex64 {
    let s = if w.re >= 0.0 { 1.0 } else { -1.0 };
    let e = (-2.0 * s * w).exp();
    s * w + (Complex64::new(1.0, 0.0) + e).ln() - LN_2
}

/// Numerically safe `tanh` for complex arguments.
pub fn tanh_c(z: Complex64) -> Complex64 {
    if z.re.abs() <= 1.0 {
        return z.tanh();
    }
    let s = z.re.signum();
    let w = (-2.0 * s * z).exp();
    s * (Complex64::new(1.0, 0.0) - w) / (Complex64::new(1.0, 0.0) + w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEta {
    pub mu: f64,
    pub eta: f64,
}

// σ_k and τ_k reproduce the nine-case table: μ = (σ_k+σ_ℓ)π/2,
// η = (τ_k+τ_ℓ)(2β−π)/2.
const SIGMA: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const TAU: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

fn check_sheet(k: usize) -> Result<usize> {
    if (1..=4).contains(&k) {
        Ok(k - 1)
    } else {
        Err(Error::InvalidParameter(format!("sheet index {k} not in 1..=4")))
    }
}

pub fn mu_eta(k: usize, l: usize, params: &WormParams) -> Result<MuEta> {
    let (a, b) = (check_sheet(k)?, check_sheet(l)?);
    Ok(MuEta {
        mu: (SIGMA[a] + SIGMA[b]) * PI / 2.0,
        eta: (TAU[a] + TAU[b]) * params.b() / 2.0,
    })
}

pub fn d_factor(z: Complex64, j: i64, params: &WormParams) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let c = j as f64 / 2.0 + 0.25;
    4.0 * (i * PI * (z - half)).cosh() * (i * params.b() * (z - half + i * c)).cosh()
}

/// `ln m̃_{k,ℓ}(ξ, j)`.
pub fn block_symbol_ln(k: usize, l: usize, xi: f64, j: i64, params: &WormParams) -> Result<f64> {
    let me = mu_eta(k, l, params)?;
    let v = xi - j as f64 / 2.0;
    Ok(me.mu * xi + me.eta * v - 2.0 * LN_2 - ln_cosh(PI * xi) - ln_cosh(params.b() * (v - 0.25)))
}

/// `m̃_{k,ℓ}(ξ, j)` on the line `Re z = ½`.
pub fn block_symbol_line(k: usize, l: usize, xi: f64, j: i64, params: &WormParams) -> Result<f64> {
    block_symbol_ln(k, l, xi, j, params).map(f64::exp)
}

/// `m_μ(ξ) = e^{μξ} / (2 cosh πξ)`.
pub fn m_mu(mu: f64, xi: f64) -> f64 {
    (mu * xi - LN_2 - ln_cosh(PI * xi)).exp()
}

/// `m_η(ξ, j) = e^{η(ξ−j/2)} / (2 cosh((2β−π)(ξ−j/2−¼)))`.
pub fn m_eta(eta: f64, xi: f64, j: i64, params: &WormParams) -> f64 {
    let v = xi - j as f64 / 2.0;
    (eta * v - LN_2 - ln_cosh(params.b() * (v - 0.25))).exp()
}

/// `m_{k,ℓ}(z, j)` for `z` in the open strip `((1−ν)/2, (1+ν)/2)`.
pub fn block_symbol_complex(
    k: usize,
    l: usize,
    z: Complex64,
    j: i64,
    params: &WormParams,
) -> Result<Complex64> {
    let (lower, upper) = params.strip();
    if !(z.re > lower && z.re < upper) {
        return Err(Error::OutOfStrip { c: z.re, lower, upper });
    }
    let me = mu_eta(k, l, params)?;
    let i = Complex64::new(0.0, 1.0);
    let w = z - 0.5;
    let c = j as f64 / 2.0 + 0.25;
    let ln_num = i * me.mu * w + i * me.eta * (w + i * (j as f64 / 2.0));
    let ln_den = Complex64::new(2.0 * LN_2, 0.0)
        + ln_cosh_c(i * PI * w)
        + ln_cosh_c(i * params.b() * (w + i * c));
    Ok((ln_num - ln_den).exp())
}

fn check_a(a: f64) -> Result<()> {
    if !(a.is_finite() && a.abs() >= PI) {
        return Err(Error::InvalidParameter(format!("|a| = {} < pi", a.abs())));
    }
    Ok(())
}

/// `m_a(ξ) = e^{aξ} / (2 cosh aξ) = ½(1 + tanh aξ)`.
pub fn model_symbol_ma(a: f64, xi: f64) -> Result<f64> {
    check_a(a)?;
    Ok(0.5 * (1.0 + (a * xi).tanh()))
}

/// `M_a(ξ, j) = e^{a/4} m_a(ξ − j/2 − ¼)`.
pub fn model_symbol_big_ma(a: f64, xi: f64, j: i64) -> Result<f64> {
    Ok((a / 4.0).exp() * model_symbol_ma(a, xi - j as f64 / 2.0 - 0.25)?)
}

/// Fourier transform of `U_{a,κ}: g ↦ ∫ e^{−κt} g(t) / sinh(πt/(2a)) dt`
/// under the `e^{−iξt}` convention: `−2|a| i tanh(a(ξ − iκ))`.
pub fn tanh_symbol(a: f64, kappa: f64, xi: f64) -> Result<Complex64> {
    check_a(a)?;
    if !(kappa >= 0.0 && kappa < PI / (2.0 * a.abs())) {
        return Err(Error::InvalidParameter(format!(
            "kappa = {kappa} outside [0, pi/(2|a|))"
        )));
    }
    let t = tanh_c(Complex64::new(a * xi, -a * kappa));
    Ok(Complex64::new(0.0, -2.0 * a.abs()) * t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Block { k: usize, l: usize },
    ModelMa { a: f64 },
    ModelBigMa { a: f64 },
    Tanh { a: f64, kappa: f64 },
    Product(Box<Provenance>, Box<Provenance>),
    Identity,
    Zero,
    Sampled,
}

/// Symbol values on the `(ξ_q, j)` lattice of a grid, `values[j_slot*n + q]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierTable {
    pub grid: LogGrid,
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
    pub sup_norm: f64,
}

impl MultiplierTable {
    pub fn from_fn(
        grid: LogGrid,
        provenance: Provenance,
        f: impl Fn(f64, i64) -> Result<Complex64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for js in 0..grid.m {
            let j = grid.mode(js);
            for q in 0..grid.n {
                let v = f(grid.xi(q), j)?;
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "symbol not finite at xi = {}, j = {j}",
                        grid.xi(q)
                    )));
                }
                values.push(v);
            }
        }
        let sup_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self { grid, values, provenance, sup_norm })
    }

    pub fn block(k: usize, l: usize, params: &WormParams, grid: LogGrid) -> Result<Self> {
        Self::from_fn(grid, Provenance::Block { k, l }, |xi, j| {
            Ok(Complex64::new(block_symbol_line(k, l, xi, j, params)?, 0.0))
        })
    }

    pub fn model_ma(a: f64, grid: LogGrid) -> Result<Self> {
        Self::from_fn(grid, Provenance::ModelMa { a }, |xi, _| {
            Ok(Complex64::new(model_symbol_ma(a, xi)?, 0.0))
        })
    }

    pub fn model_big_ma(a: f64, grid: LogGrid) -> Result<Self> {
        Self::from_fn(grid, Provenance::ModelBigMa { a }, |xi, j| {
            Ok(Complex64::new(model_symbol_big_ma(a, xi, j)?, 0.0))
        })
    }

    pub fn tanh(a: f64, kappa: f64, grid: LogGrid) -> Result<Self> {
        Self::from_fn(grid, Provenance::Tanh { a, kappa }, |xi, _| tanh_symbol(a, kappa, xi))
    }

    pub fn identity(grid: LogGrid) -> Self {
        Self::constant(grid, Complex64::new(1.0, 0.0), Provenance::Identity)
    }

    pub fn zero(grid: LogGrid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0), Provenance::Zero)
    }

    fn constant(grid: LogGrid, c: Complex64, provenance: Provenance) -> Self {
        Self { grid, values: vec![c; grid.len()], provenance, sup_norm: c.norm() }
    }

    pub fn product(&self, other: &MultiplierTable) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values: Vec<Complex64> =
            self.values.iter().zip(other.values.iter()).map(|(a, b)| a * b).collect();
        let sup_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self {
            grid: self.grid,
            values,
            provenance: Provenance::Product(
                Box::new(self.provenance.clone()),
                Box::new(other.provenance.clone()),
            ),
            sup_norm,
        })
    }

    pub fn apply(&self, spectrum: &Spectrum) -> Result<Spectrum> {
        self.grid.check_same(&spectrum.grid)?;
        let mut out = spectrum.clone();
        out.data.iter_mut().zip(self.values.iter()).for_each(|(v, m)| *v *= m);
        Ok(out)
    }
}

/// Gaussian in `log ρ` on one angular mode:
/// `φ(ρ, θ) = exp(−((log ρ − x0)/width)²) e^{ijθ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianLogField {
    pub x0: f64,
    pub width: f64,
    pub j: i64,
}

impl GaussianLogField {
    pub fn radial(&self, x: f64) -> f64 {
        (-((x - self.x0) / self.width).powi(2)).exp()
    }

    /// `∫₀^∞ φ(ρ) ρ^{z−1} dρ = width √π e^{z x0 + z² width²/4}`.
    pub fn mellin(&self, z: Complex64) -> Complex64 {
        let w = self.width;
        w * PI.sqrt() * (z * self.x0 + z * z * (w * w / 4.0)).exp()
    }
}

/// `(1/2π) ∫ ρ^{−c−iy} m_{k,ℓ}(c+iy, j) Mφ(c+iy) dy` at each `x = log ρ`,
/// by the trapezoid rule on `n` intervals of `[−Y, Y]`, `Y = 12.6/width`.
pub fn contour_apply(
    k: usize,
    l: usize,
    field: &GaussianLogField,
    c: f64,
    xs: &[f64],
    n: usize,
    params: &WormParams,
) -> Result<Vec<Complex64>> {
    if !(field.width > 0.0) || n < 2 {
        return Err(Error::InvalidParameter("need width > 0 and n >= 2".into()));
    }
    let y_max = 12.6 / field.width;
    let h = 2.0 * y_max / n as f64;
    let mut weights = Vec::with_capacity(n + 1);
    let mut zs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let z = Complex64::new(c, -y_max + i as f64 * h);
        let w = if i == 0 || i == n { 0.5 * h } else { h };
        weights.push(w * block_symbol_complex(k, l, z, field.j, params)? * field.mellin(z));
        zs.push(z);
    }
    Ok(xs
        .iter()
        .map(|&x| {
            let s: Complex64 = zs.iter().zip(weights.iter()).map(|(z, w)| w * (-z * x).exp()).sum();
            s / (2.0 * PI)
        })
        .collect())
}

/// Sup over `xs` of the difference between the contour integral on
/// `Re z = c` and on `Re z = ½`.
pub fn strip_shift_check(
    k: usize,
    l: usize,
    field: &GaussianLogField,
    c: f64,
    xs: &[f64],
    n: usize,
    params: &WormParams,
) -> Result<f64> {
    let shifted = contour_apply(k, l, field, c, xs, n, params)?;
    let centre = contour_apply(k, l, field, 0.5, xs, n, params)?;
    Ok(shifted.iter().zip(centre.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}
