//! Worm parameters and the distinguished boundary.
//!
//! `D_β = { Re(z₁ e^{−i log|z₂|²}) > 0, |log|z₂|²| < β − π/2 }`. Its
//! distinguished boundary is the union of four sheets, each a copy of
//! `ℝ⁺ × 𝕋`:
//!
//! | sheet | z₁          | z₂                   |
//! |-------|-------------|----------------------|
//! | E1    | ρ e^{iβ}    | e^{s*/2} e^{iθ}      |
//! | E2    | −ρ e^{iβ}   | e^{s*/2} e^{iθ}      |
//! | E3    | ρ e^{−iβ}   | e^{−s*/2} e^{iθ}     |
//! | E4    | −ρ e^{−iβ}  | e^{−s*/2} e^{iθ}     |
//!
//! with `s* = β − π/2`. The surface measure is `e^{±s*/2} dρ dθ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::BoundaryField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WormParams {
    pub beta: f64,
    pub nu: f64,
    pub sheet_height: f64,
    pub lp_lower: f64,
    pub lp_upper: f64,
    pub sobolev_l2_sup: f64,
}

impl WormParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= PI {
            return Err(Error::InvalidBeta(beta));
        }
        let nu = PI / (2.0 * beta - PI);
        Ok(Self {
            beta,
            nu,
            sheet_height: beta - FRAC_PI_2,
            lp_lower: 2.0 / (1.0 + nu),
            lp_upper: 2.0 / (1.0 - nu),
            sobolev_l2_sup: nu / 2.0,
        })
    }

    /// `2β − π`, the second hyperbolic scale of the block symbols.
    pub fn b(&self) -> f64 {
        2.0 * self.beta - PI
    }

    /// Strip `((1−ν)/2, (1+ν)/2)` where the complex block symbols are analytic.
    pub fn strip(&self) -> (f64, f64) {
        ((1.0 - self.nu) / 2.0, (1.0 + self.nu) / 2.0)
    }

    pub fn weight(&self, sheet: Sheet) -> f64 {
        measure_weight(sheet, self)
    }

    /// Power-law exponent of `𝒫₁,₁g` as `ρ → ∞`.
    pub fn decay_exponent_infinity(&self) -> f64 {
        -(1.0 + self.nu) / 2.0
    }

    /// Power-law exponent of `𝒫₁,₁g` as `ρ → 0`.
    pub fn decay_exponent_zero(&self) -> f64 {
        (self.nu - 1.0) / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    E1,
    E2,
    E3,
    E4,
}

impl Sheet {
    pub const ALL: [Sheet; 4] = [Sheet::E1, Sheet::E2, Sheet::E3, Sheet::E4];

    /// 1-based label.
    pub fn index(self) -> usize {
        self.slot() + 1
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Sheet::E1 => 0,
            Sheet::E2 => 1,
            Sheet::E3 => 2,
            Sheet::E4 => 3,
        }
    }

    pub fn from_index(k: usize) -> Result<Self> {
        match k {
            1 => Ok(Sheet::E1),
            2 => Ok(Sheet::E2),
            3 => Ok(Sheet::E3),
            4 => Ok(Sheet::E4),
            _ => Err(Error::InvalidParameter(format!("sheet index {k} not in 1..=4"))),
        }
    }

    /// Argument of `z₁` on the sheet.
    pub fn arg_z1(self, params: &WormParams) -> f64 {
        match self {
            Sheet::E1 => params.beta,
            Sheet::E2 => params.beta - PI,
            Sheet::E3 => -params.beta,
            Sheet::E4 => -params.beta + PI,
        }
    }

    /// Value of `log|z₂|²` on the sheet.
    pub fn log_mod_z2_sq(self, params: &WormParams) -> f64 {
        match self {
            Sheet::E1 | Sheet::E2 => params.sheet_height,
            Sheet::E3 | Sheet::E4 => -params.sheet_height,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub sheet: Sheet,
    pub rho: f64,
    pub theta: f64,
}

impl BoundaryPoint {
    pub fn new(sheet: Sheet, rho: f64, theta: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParameter(format!("rho = {rho} must be positive")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("theta not finite".into()));
        }
        Ok(Self { sheet, rho, theta: theta.rem_euclid(2.0 * PI) })
    }
}

pub fn embed(point: &BoundaryPoint, params: &WormParams) -> (Complex64, Complex64) {
    let z1 = Complex64::from_polar(point.rho, point.sheet.arg_z1(params));
    let l = point.sheet.log_mod_z2_sq(params);
    let z2 = Complex64::from_polar((l / 2.0).exp(), point.theta);
    (z1, z2)
}

/// Density of `dσ` against `dρ dθ`.
pub fn measure_weight(sheet: Sheet, params: &WormParams) -> f64 {
    (sheet.log_mod_z2_sq(params) / 2.0).exp()
}

/// `φ(w₁, w₂) = (e^{w₁}, w₂)`, from `D'_β` onto `D_β`.
pub fn map_phi(w1: Complex64, w2: Complex64) -> (Complex64, Complex64) {
    (w1.exp(), w2)
}

/// `φ⁻¹(z₁, z₂) = (Log(z₁ e^{−i log|z₂|²}) + i log|z₂|², z₂)`.
pub fn map_phi_inverse(z1: Complex64, z2: Complex64) -> Result<(Complex64, Complex64)> {
    if z1 == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint("z1 = 0".into()));
    }
    if z2 == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint("z2 = 0".into()));
    }
    let l = z2.norm_sqr().ln();
    let w = z1 * Complex64::from_polar(1.0, -l);
    Ok((w.ln() + Complex64::new(0.0, l), z2))
}

/// `ψ_p(z) = e^{−(i/p) log|z₂|²} (z₁ e^{−i log|z₂|²})^{−1/p}`, principal branch.
pub fn psi_weight(z1: Complex64, z2: Complex64, p: f64) -> Result<Complex64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if z2 == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint("z2 = 0".into()));
    }
    let l = z2.norm_sqr().ln();
    let w = z1 * Complex64::from_polar(1.0, -l);
    if w.norm() == 0.0 {
        return Err(Error::SingularPoint("z1 = 0".into()));
    }
    if w.im == 0.0 && w.re < 0.0 {
        return Err(Error::BranchCut(format!("z1 e^(-i log|z2|^2) = {w}")));
    }
    Ok(Complex64::from_polar(1.0, -l / p) * (-w.ln() / p).exp())
}

/// Membership in `D'_β = { |Im w₁ − log|w₂|²| < π/2, |log|w₂|²| < β − π/2 }`.
pub fn in_d_prime(w1: Complex64, w2: Complex64, params: &WormParams) -> bool {
    let l = w2.norm_sqr().ln();
    (w1.im - l).abs() < FRAC_PI_2 && l.abs() < params.sheet_height
}

/// Membership in `D_β`.
pub fn in_d(z1: Complex64, z2: Complex64, params: &WormParams) -> bool {
    let l = z2.norm_sqr().ln();
    (z1 * Complex64::from_polar(1.0, -l)).re > 0.0 && l.abs() < params.sheet_height
}

fn psi_on_grid(field: &BoundaryField, p: f64, params: &WormParams) -> Result<[Vec<Complex64>; 4]> {
    let g = field.grid;
    let mut out: [Vec<Complex64>; 4] = Default::default();
    for sheet in Sheet::ALL {
        let mut w = Vec::with_capacity(g.len());
        for m in 0..g.m {
            for k in 0..g.n {
                let pt = BoundaryPoint::new(sheet, g.rho(k), g.theta(m))?;
                let (z1, z2) = embed(&pt, params);
                w.push(psi_weight(z1, z2, p)?);
            }
        }
        out[sheet.slot()] = w;
    }
    Ok(out)
}

/// `Λf = ψ_p · (f ∘ φ⁻¹)`.
///
/// The input lives on the sheets `E′ℓ ≅ ℝ × 𝕋` of `d_b(D'_β)` sampled at
/// `x_k`; `φ⁻¹` sends the point `(ρ_k, θ)` of `E_ℓ` to `(x_k, θ)` of `E′ℓ`,
/// so the composition is a relabelling and only the weight is applied.
pub fn lambda_isometry(field: &BoundaryField, p: f64, params: &WormParams) -> Result<BoundaryField> {
    let psi = psi_on_grid(field, p, params)?;
    let mut out = field.clone();
    for (s, w) in out.sheets.iter_mut().zip(psi.iter()) {
        s.iter_mut().zip(w.iter()).for_each(|(v, c)| *v *= c);
    }
    Ok(out)
}

/// `Λ⁻¹f = (f / ψ_p) ∘ φ`.
pub fn lambda_inverse(field: &BoundaryField, p: f64, params: &WormParams) -> Result<BoundaryField> {
    let psi = psi_on_grid(field, p, params)?;
    let mut out = field.clone();
    for (s, w) in out.sheets.iter_mut().zip(psi.iter()) {
        s.iter_mut().zip(w.iter()).for_each(|(v, c)| *v /= c);
    }
    Ok(out)
}
