//! Boundary `L^p` norms with the worm surface measure, Bessel-potential and
//! Gagliardo Sobolev quantities, weighted `L²`, and power-law fits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BoundaryField, SheetField};
use crate::geometry::{Sheet, WormParams};
use crate::par;
use crate::transforms::{mf_forward, mf_inverse};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Lp,
    BesselSobolev,
    Gagliardo,
    WeightedL2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub weight_exponent: Option<f64>,
    /// Interval actually integrated, in the integration variable.
    pub range: (f64, f64),
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// `(Σ_ℓ w_ℓ ∫∫ |f|^p dρ dθ)^{1/p}` with `dρ = eˣ dx` on the log grid.
pub fn lp_norm(field: &BoundaryField, p: f64, params: &WormParams) -> Result<NormReport> {
    check_p(p)?;
    let g = field.grid;
    let mut total = 0.0;
    for sheet in Sheet::ALL {
        let s = &field.sheets[sheet.slot()];
        let mut acc = 0.0;
        for m in 0..g.m {
            for k in 0..g.n {
                acc += s[m * g.n + k].norm().powf(p) * g.rho(k);
            }
        }
        total += params.weight(sheet) * acc;
    }
    let value = (total * g.dx() * g.dtheta()).powf(1.0 / p);
    Ok(NormReport {
        kind: NormKind::Lp,
        value,
        p: Some(p),
        s: None,
        weight_exponent: None,
        range: (g.x_min.exp(), g.x_max.exp()),
    })
}

/// Same weights, Lebesgue measure `dx dθ` on the line sheets of `d_b(D'_β)`.
pub fn lp_norm_line(field: &BoundaryField, p: f64, params: &WormParams) -> Result<NormReport> {
    check_p(p)?;
    let g = field.grid;
    let mut total = 0.0;
    for sheet in Sheet::ALL {
        let acc: f64 = field.sheets[sheet.slot()].iter().map(|v| v.norm().powf(p)).sum();
        total += params.weight(sheet) * acc;
    }
    Ok(NormReport {
        kind: NormKind::Lp,
        value: (total * g.dx() * g.dtheta()).powf(1.0 / p),
        p: Some(p),
        s: None,
        weight_exponent: None,
        range: (g.x_min, g.x_max),
    })
}

/// `∫∫ |f|^p dρ dθ` of one sheet restricted to `x ∈ [x_lo, x_hi]`.
pub fn sheet_lp_power(field: &SheetField, p: f64, x_lo: f64, x_hi: f64) -> Result<f64> {
    check_p(p)?;
    let g = field.grid;
    let mut acc = 0.0;
    for m in 0..g.m {
        for k in 0..g.n {
            let x = g.x(k);
            if x >= x_lo && x <= x_hi {
                acc += field.get(k, m).norm().powf(p) * x.exp();
            }
        }
    }
    Ok(acc * g.dx() * g.dtheta())
}

/// `⟨f, h⟩ = Σ_ℓ w_ℓ ∫∫ conj(f) h dρ dθ`.
pub fn inner_product(f: &BoundaryField, h: &BoundaryField, params: &WormParams) -> Result<Complex64> {
    f.grid.check_same(&h.grid)?;
    let g = f.grid;
    let mut total = Complex64::new(0.0, 0.0);
    for sheet in Sheet::ALL {
        let (a, b) = (&f.sheets[sheet.slot()], &h.sheets[sheet.slot()]);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..g.m {
            for k in 0..g.n {
                let i = m * g.n + k;
                acc += a[i].conj() * b[i] * g.rho(k);
            }
        }
        total += acc * params.weight(sheet);
    }
    Ok(total * g.dx() * g.dtheta())
}

/// `‖ℱ⁻¹[(1+ξ²+j²)^{s/2} ℱf]‖_{L^p(dx dθ)}` for a line field.
pub fn bessel_sobolev_norm(field: &SheetField, s: f64, p: f64) -> Result<NormReport> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s = {s} must be >= 0")));
    }
    check_p(p)?;
    let g = field.grid;
    let h = if s == 0.0 {
        field.clone()
    } else {
        let mut sp = mf_forward(field);
        sp.multiply(|xi, j| Complex64::new((1.0 + xi * xi + (j * j) as f64).powf(s / 2.0), 0.0));
        mf_inverse(&sp)
    };
    let acc: f64 = h.data.iter().map(|v| v.norm().powf(p)).sum();
    Ok(NormReport {
        kind: NormKind::BesselSobolev,
        value: (acc * g.dx() * g.dtheta()).powf(1.0 / p),
        p: Some(p),
        s: Some(s),
        weight_exponent: None,
        range: (g.x_min, g.x_max),
    })
}

/// `(∫ |g(ξ)|² |ξ|^{2s} dξ)^{1/2}` by the rectangle rule on a uniform grid
/// `ξ_i = xi_min + i·dxi`.
pub fn weighted_l2_norm(values: &[Complex64], xi_min: f64, dxi: f64, two_s: f64) -> Result<NormReport> {
    if !(0.0..1.0).contains(&two_s) {
        return Err(Error::InvalidParameter(format!("weight exponent {two_s} not in [0, 1)")));
    }
    let acc: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let xi = xi_min + i as f64 * dxi;
            let w = if two_s == 0.0 { 1.0 } else { xi.abs().powf(two_s) };
            v.norm_sqr() * w
        })
        .sum();
    Ok(NormReport {
        kind: NormKind::WeightedL2,
        value: (acc * dxi).sqrt(),
        p: Some(2.0),
        s: Some(two_s / 2.0),
        weight_exponent: Some(two_s),
        range: (xi_min, xi_min + (values.len().saturating_sub(1)) as f64 * dxi),
    })
}

/// `F` with `F'' = r^{−α}`: `r^{2−α}/((1−α)(2−α))`, or `−ln r` at `α = 2`.
fn kernel_antiderivative(r: f64, alpha: f64) -> f64 {
    if (alpha - 2.0).abs() < 1e-12 {
        -r.ln()
    } else {
        r.powf(2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha))
    }
}

/// `∫_{[a,b]×[c,d]} (y−x)^{−α}`, `b ≤ c`.
fn cell_pair_kernel(a: f64, b: f64, c: f64, d: f64, alpha: f64) -> f64 {
    let f = |r: f64| kernel_antiderivative(r, alpha);
    f(d - a) - f(d - b) - f(c - a) + f(c - b)
}

/// Beyond this index distance the cell-pair kernel uses the midpoint rule.
const EXACT_PAIR_RANGE: usize = 64;

/// Gagliardo double integral `∫∫ |f(x)−f(y)|^p / |x−y|^{1+sp}` over the
/// cells of sorted nodes `t`, with contributions binned by `level`.
///
/// Cells are bounded by midpoints between nodes. Pairs of adjacent cells
/// and each diagonal cell use the difference quotient times the exact
/// integral of `|x−y|^{p−1−sp}`; all other pairs use `|f_i−f_j|^p` times the
/// exact cell-pair integral of `|x−y|^{−1−sp}` (midpoint rule when far
/// apart). `level(i)` assigns each node a truncation level, `None` to drop
/// it; a pair lands in the larger of its two levels. Returns the sum for
/// each level in `0..levels`.
pub fn gagliardo_levels(
    t: &[f64],
    f: &[Complex64],
    s: f64,
    p: f64,
    levels: usize,
    level: impl Fn(usize) -> Option<usize> + Sync,
) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} not in (0, 1)")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let n = t.len();
    if n < 3 || f.len() != n {
        return Err(Error::InvalidParameter("need >= 3 nodes with matching values".into()));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
    }
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(t[0] - 0.5 * (t[1] - t[0]));
    for i in 0..n - 1 {
        edges.push(0.5 * (t[i] + t[i + 1]));
    }
    edges.push(t[n - 1] + 0.5 * (t[n - 1] - t[n - 2]));
    let alpha = 1.0 + s * p;
    let alpha_near = alpha - p;
    let lv: Vec<Option<usize>> = (0..n).map(&level).collect();
    let deriv = |i: usize| -> Complex64 {
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        (f[b] - f[a]) / (t[b] - t[a])
    };
    let rows: Vec<Vec<f64>> = par::map_collect(n, |i| {
        let mut acc = vec![0.0; levels];
        let Some(li) = lv[i] else { return acc };
        if li >= levels {
            return acc;
        }
        let w = edges[i + 1] - edges[i];
        let diag = deriv(i).norm().powf(p) * 2.0 * w.powf(2.0 - alpha_near)
            / ((1.0 - alpha_near) * (2.0 - alpha_near));
        acc[li] += diag;
        for j in i + 1..n {
            let Some(lj) = lv[j] else { continue };
            let l = li.max(lj);
            if l >= levels {
                continue;
            }
            let contrib = if j == i + 1 {
                let q = ((f[j] - f[i]) / (t[j] - t[i])).norm().powf(p);
                q * cell_pair_kernel(edges[i], edges[i + 1], edges[j], edges[j + 1], alpha_near)
            } else {
                let d = (f[j] - f[i]).norm().powf(p);
                if d == 0.0 {
                    continue;
                }
                let k = if j - i <= EXACT_PAIR_RANGE {
                    cell_pair_kernel(edges[i], edges[i + 1], edges[j], edges[j + 1], alpha)
                } else {
                    let wj = edges[j + 1] - edges[j];
                    w * wj * (t[j] - t[i]).powf(-alpha)
                };
                d * k
            };
            acc[l] += 2.0 * contrib;
        }
        acc
    });
    let mut out = vec![0.0; levels];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    Ok(out)
}

/// Gagliardo double integral of samples `f` at sorted nodes `t`.
pub fn gagliardo_seminorm(t: &[f64], f: &[Complex64], s: f64, p: f64) -> Result<NormReport> {
    let v = gagliardo_levels(t, f, s, p, 1, |_| Some(0))?;
    Ok(NormReport {
        kind: NormKind::Gagliardo,
        value: v[0],
        p: Some(p),
        s: Some(s),
        weight_exponent: None,
        range: (t[0], t[t.len() - 1]),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("x and y lengths differ".into()));
    }
    if x.len() < 5 {
        return Err(Error::InsufficientSamples { needed: 5, got: x.len() });
    }
    for (i, (&a, &b)) in x.iter().zip(y.iter()).enumerate() {
        if !(b > 0.0) {
            return Err(Error::NonPositiveSample { index: i, value: b });
        }
        if !(a > 0.0) {
            return Err(Error::NonPositiveSample { index: i, value: a });
        }
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(ly.iter()).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(ly.iter())
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerFit { exponent: slope, prefactor: intercept.exp(), r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Marginal,
}

/// Growth exponents above this count as divergence (with a good fit).
pub const GROWTH_THRESHOLD: f64 = 0.02;
/// Minimum `r²` for a divergence verdict.
pub const GROWTH_R2: f64 = 0.9;

pub fn classify(exponent: f64, r2: f64) -> Verdict {
    if exponent > GROWTH_THRESHOLD && r2 > GROWTH_R2 {
        Verdict::Divergent
    } else if exponent.abs() <= GROWTH_THRESHOLD {
        Verdict::Marginal
    } else {
        Verdict::Convergent
    }
}

/// Growth of a truncated quantity `I(R_k)` along a ladder `R_0 < R_1 < …`,
/// fitted on the increments `I(R_{k+1}) − I(R_k)` against `R_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    pub exponent: Option<f64>,
    pub r2: Option<f64>,
    pub verdict: Verdict,
}

pub fn growth_fit(levels: &[f64], values: &[f64]) -> Result<GrowthFit> {
    if levels.len() != values.len() || levels.len() < 6 {
        return Err(Error::InsufficientSamples { needed: 6, got: levels.len().min(values.len()) });
    }
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-14 * scale;
    if increments.iter().any(|&d| d <= floor) {
        // Increments at rounding level: the truncated quantity has converged.
        return Ok(GrowthFit {
            levels: levels.to_vec(),
            values: values.to_vec(),
            increments,
            exponent: None,
            r2: None,
            verdict: Verdict::Convergent,
        });
    }
    let fit = fit_power_law(&levels[1..], &increments)?;
    Ok(GrowthFit {
        levels: levels.to_vec(),
        values: values.to_vec(),
        increments,
        exponent: Some(fit.exponent),
        r2: Some(fit.r2),
        verdict: classify(fit.exponent, fit.r2),
    })
}

/// `‖χ₊f‖_{W^{s,2}} / ‖f‖_{W^{s,2}}` on a line field, `χ₊` cutting `x < 0`.
pub fn chi_plus_ratio(field: &SheetField, s: f64) -> Result<f64> {
    let g = field.grid;
    let mut cut = field.clone();
    for m in 0..g.m {
        for k in 0..g.n {
            let x = g.x(k);
            let w = if x > 0.0 {
                1.0
            } else if x == 0.0 {
                0.5
            } else {
                0.0
            };
            cut.data[m * g.n + k] *= w;
        }
    }
    Ok(bessel_sobolev_norm(&cut, s, 2.0)?.value / bessel_sobolev_norm(field, s, 2.0)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_fit() {
        let x: Vec<f64> = (2..9).map(|k| (k as f64).exp()).collect();
        let y: Vec<f64> = x.iter().map(|v| v.powf(-2.0 / 3.0)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.exponent + 2.0 / 3.0).abs() < 1e-13);
        assert!((f.r2 - 1.0).abs() < 1e-13);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(1.0 / 3.0)).collect();
        assert!((fit_power_law(&x, &y).unwrap().exponent - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn fit_rejects_bad_samples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            fit_power_law(&x, &[1.0, 2.0, 0.0, 1.0, 1.0]),
            Err(Error::NonPositiveSample { index: 2, .. })
        ));
        assert!(fit_power_law(&x[..4], &[1.0; 4]).is_err());
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(classify(0.3, 0.99), Verdict::Divergent);
        assert_eq!(classify(0.3, 0.5), Verdict::Convergent);
        assert_eq!(classify(0.01, 0.2), Verdict::Marginal);
        assert_eq!(classify(-0.2, 0.99), Verdict::Convergent);
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let f = vec![Complex64::new(2.0, -1.0); 50];
        assert_eq!(gagliardo_seminorm(&t, &f, 0.4, 2.0).unwrap().value, 0.0);
    }
}
