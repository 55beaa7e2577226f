//! Operator assembly: the sixteen blocks of the Szegő projection, the
//! truncated sinh-kernel operators and the model operators `P_a`, `Q_a`.
//!
//! The orthogonal projection of `L²(dσ)` onto the Hardy boundary values is
//! `𝒫_{k,ℓ} = C₂⁻¹ T_{m̃_{k,ℓ}} C₂ · w_ℓ`, where `w_ℓ` is the surface weight
//! of the source sheet. The symbol matrix is rank one, `m̃ = a aᵀ / D` with
//! `Σ_k w_k a_k² = D`, so the weight is what makes `𝒫² = 𝒫` and `𝒫* = 𝒫`
//! in the `dσ` inner product.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::field::{BoundaryField, SheetField};
use crate::geometry::{Sheet, WormParams};
use crate::multipliers::{block_symbol_ln, model_symbol_big_ma, model_symbol_ma, tanh_symbol, MultiplierTable};
use crate::par;
use crate::transforms::{cayley, cayley_inverse, mf_forward, mf_inverse, plan, Spectrum};

/// `C₂⁻¹ T_m C₂` for a symbol given as a closure.
pub fn apply_symbol(field: &SheetField, m: impl Fn(f64, i64) -> Complex64) -> Result<SheetField> {
    let mut s = mf_forward(&cayley(2.0, field)?);
    s.multiply(m);
    cayley_inverse(2.0, &mf_inverse(&s))
}

/// `C₂⁻¹ T_m C₂` for a sampled table.
pub fn apply_multiplier(table: &MultiplierTable, field: &SheetField) -> Result<SheetField> {
    table.grid.check_same(&field.grid)?;
    let s = table.apply(&mf_forward(&cayley(2.0, field)?))?;
    cayley_inverse(2.0, &mf_inverse(&s))
}

/// Applies `𝒯_{mA} ∘ 𝒯_{mB}` and `𝒯_{mA·mB}`; returns both.
pub fn compose_multipliers(
    ma: &MultiplierTable,
    mb: &MultiplierTable,
    field: &SheetField,
) -> Result<(SheetField, SheetField)> {
    let two_step = apply_multiplier(ma, &apply_multiplier(mb, field)?)?;
    let one_step = apply_multiplier(&ma.product(mb)?, field)?;
    Ok((two_step, one_step))
}

fn source_spectrum(field: &BoundaryField, sheet: Sheet, params: &WormParams) -> Result<Spectrum> {
    let mut f = field.sheet(sheet);
    f.scale(Complex64::new(params.weight(sheet), 0.0));
    Ok(mf_forward(&cayley(2.0, &f)?))
}

/// One block `𝒫_{k,ℓ}`: reads sheet `ℓ`, writes sheet `k`, zero elsewhere.
pub fn apply_block(k: usize, l: usize, field: &BoundaryField, params: &WormParams) -> Result<BoundaryField> {
    let (tk, sl) = (Sheet::from_index(k)?, Sheet::from_index(l)?);
    let mut s = source_spectrum(field, sl, params)?;
    let g = s.grid;
    for js in 0..g.m {
        let j = g.mode(js);
        for q in 0..g.n {
            s.data[js * g.n + q] *= block_symbol_ln(k, l, g.xi(q), j, params)?.exp();
        }
    }
    let out = cayley_inverse(2.0, &mf_inverse(&s))?;
    Ok(BoundaryField::from_sheet(tk, out))
}

/// `𝒫f = Σ_{k,ℓ} 𝒫_{k,ℓ} f`, each target summed over `ℓ = 1..4` in order.
pub fn apply_szego(field: &BoundaryField, params: &WormParams) -> Result<BoundaryField> {
    let g = field.grid;
    let sources: Vec<Spectrum> = Sheet::ALL
        .iter()
        .map(|&s| source_spectrum(field, s, params))
        .collect::<Result<_>>()?;
    let targets: Vec<Result<Vec<Complex64>>> = par::map_collect(4, |t| {
        let k = t + 1;
        let mut acc = Spectrum::zeros(g);
        for js in 0..g.m {
            let j = g.mode(js);
            for q in 0..g.n {
                let xi = g.xi(q);
                let idx = js * g.n + q;
                let mut v = Complex64::new(0.0, 0.0);
                for (l, src) in sources.iter().enumerate() {
                    v += src.data[idx] * block_symbol_ln(k, l + 1, xi, j, params)?.exp();
                }
                acc.data[idx] = v;
            }
        }
        Ok(cayley_inverse(2.0, &mf_inverse(&acc))?.data)
    });
    let mut out = BoundaryField::zeros(g);
    for (slot, t) in targets.into_iter().enumerate() {
        out.sheets[slot] = t?;
    }
    Ok(out)
}

/// Truncation window `ε < |πt/(2a)| < R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationWindow {
    pub eps: f64,
    pub r: f64,
}

impl TruncationWindow {
    pub fn new(eps: f64, r: f64) -> Result<Self> {
        if !(eps > 0.0 && r > eps && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("window ({eps}, {r}) invalid")));
        }
        Ok(Self { eps, r })
    }
}

/// Antisymmetric convolution taps `c_d`, `d = 1..=K`, of the trapezoid
/// quadrature of `∫_{t_min}^{t_max} [g(x−t) − g(x+t)] / sinh(πt/(2a)) dt`
/// on nodes `t = d·dx`: `T g(x_i) = Σ_d c_d (g_{i−d} − g_{i+d})`.
pub fn cz_taps(a: f64, window: TruncationWindow, dx: f64) -> Result<Vec<f64>> {
    if !(a.is_finite() && a.abs() >= PI) {
        return Err(Error::InvalidParameter(format!("|a| = {} < pi", a.abs())));
    }
    if !(dx > 0.0) {
        return Err(Error::InvalidParameter("dx must be positive".into()));
    }
    let t_min = 2.0 * a.abs() * window.eps / PI;
    let t_max = 2.0 * a.abs() * window.r / PI;
    let kernel = |t: f64| 1.0 / (PI * t / (2.0 * a)).sinh();
    let k_first = ((t_min / dx).floor() as usize + 1).max(1);
    let k_last = (t_max / dx).floor() as usize;
    if k_last <= k_first {
        return Err(Error::InvalidParameter("window narrower than two grid cells".into()));
    }
    let mut taps = vec![0.0; k_last + 2];
    // Value of the paired integrand at t = s·dx, as taps, times weight w.
    let add_at = |taps: &mut Vec<f64>, s: f64, w: f64| {
        let k = s.floor() as usize;
        let f = s - k as f64;
        let c = w * kernel(s * dx);
        taps[k] += c * (1.0 - f);
        if f > 0.0 {
            taps[k + 1] += c * f;
        }
    };
    // Trapezoid on the grid nodes inside the window.
    for k in k_first..=k_last {
        let w = if k == k_first || k == k_last { 0.5 * dx } else { dx };
        add_at(&mut taps, k as f64, w);
    }
    // Head segment [t_min, t_first].
    let head = k_first as f64 * dx - t_min;
    taps[k_first] += 0.5 * head * kernel(k_first as f64 * dx);
    if t_min < dx {
        // t → 0⁺ limit of the paired integrand, −(4a/π) g′(x), with a
        // central difference g′ ≈ (g_{i+1} − g_{i−1}) / (2dx).
        taps[1] += 0.5 * head * (4.0 * a / PI) / (2.0 * dx);
    } else {
        add_at(&mut taps, t_min / dx, 0.5 * head);
    }
    // Tail segment [t_last, t_max].
    let tail = t_max - k_last as f64 * dx;
    if tail > 0.0 {
        taps[k_last] += 0.5 * tail * kernel(k_last as f64 * dx);
        add_at(&mut taps, t_max / dx, 0.5 * tail);
    }
    taps[0] = 0.0;
    while taps.len() > 1 && *taps.last().unwrap() == 0.0 {
        taps.pop();
    }
    Ok(taps)
}

/// Truncated operator `T_{a,0,(ε,R)}` on a uniformly sampled line, zero
/// outside the samples.
pub fn truncated_cz(a: f64, window: TruncationWindow, line: &[Complex64], dx: f64) -> Result<Vec<Complex64>> {
    let taps = cz_taps(a, window, dx)?;
    let n = line.len();
    let kmax = taps.len() - 1;
    if (n as f64) * (kmax as f64) <= 5e7 {
        Ok(cz_direct(&taps, line))
    } else {
        Ok(cz_fft(&taps, line))
    }
}

fn cz_direct(taps: &[f64], g: &[Complex64]) -> Vec<Complex64> {
    let n = g.len() as isize;
    let at = |i: isize| if i >= 0 && i < n { g[i as usize] } else { Complex64::new(0.0, 0.0) };
    (0..n)
        .map(|i| {
            let mut s = Complex64::new(0.0, 0.0);
            for (d, c) in taps.iter().enumerate().skip(1) {
                let d = d as isize;
                s += (at(i - d) - at(i + d)) * c;
            }
            s
        })
        .collect()
}

fn cz_fft(taps: &[f64], g: &[Complex64]) -> Vec<Complex64> {
    let n = g.len();
    let k = taps.len() - 1;
    let len = (n + 2 * k + 1).next_power_of_two();
    let mut h = vec![Complex64::new(0.0, 0.0); len];
    for (d, &c) in taps.iter().enumerate().skip(1) {
        h[d] += c;
        h[len - d] -= c;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); len];
    x[..n].copy_from_slice(g);
    let fwd = plan(len, FftDirection::Forward);
    let inv = plan(len, FftDirection::Inverse);
    fwd.process(&mut h);
    fwd.process(&mut x);
    x.iter_mut().zip(h.iter()).for_each(|(a, b)| *a *= b);
    inv.process(&mut x);
    let scale = 1.0 / len as f64;
    x[..n].iter().map(|v| v * scale).collect()
}

/// L² norm of the discretized truncated operator on `dx·ℤ`: the supremum of
/// its symbol `−2i Σ_d c_d sin(ξ d dx)`, sampled on `oversample·2K` points.
pub fn cz_operator_norm(a: f64, window: TruncationWindow, dx: f64) -> Result<f64> {
    let taps = cz_taps(a, window, dx)?;
    let k = taps.len() - 1;
    let len = (8 * (2 * k + 1)).next_power_of_two();
    let mut h = vec![Complex64::new(0.0, 0.0); len];
    for (d, &c) in taps.iter().enumerate().skip(1) {
        h[d] += c;
        h[len - d] -= c;
    }
    plan(len, FftDirection::Forward).process(&mut h);
    Ok(h.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// `Λ₊ = χ₊`: the identity on half-line samples.
pub fn lambda_plus(field: &SheetField) -> SheetField {
    field.clone()
}

/// `Λ_a = χ₊ C₂⁻¹ T_{a,0} C₂ χ₊` via the symbol of the limit operator.
pub fn lambda_a(a: f64, field: &SheetField) -> Result<SheetField> {
    tanh_symbol(a, 0.0, 0.0)?;
    apply_symbol(field, |xi, _| tanh_symbol(a, 0.0, xi).expect("checked"))
}

/// `Λ_a` with the truncated quadrature in place of the limit.
pub fn lambda_a_truncated(a: f64, window: TruncationWindow, field: &SheetField) -> Result<SheetField> {
    let g = field.grid;
    let line = cayley(2.0, field)?;
    let mut out = SheetField::zeros(g);
    for m in 0..g.m {
        let t = truncated_cz(a, window, line.line(m), g.dx())?;
        out.data[m * g.n..(m + 1) * g.n].copy_from_slice(&t);
    }
    cayley_inverse(2.0, &out)
}

/// `P_a = ½Λ₊ − (1/(4|a|i)) Λ_a`, with `Λ_a` built on the literal kernel
/// `1/sinh(πt/(2a))` whose symbol is `−2|a| i tanh(aξ)`; the symbol is then
/// `½(1 + tanh aξ) = m_a(ξ)`.
pub fn p_a(a: f64, field: &SheetField) -> Result<SheetField> {
    let la = lambda_a(a, field)?;
    let c = Complex64::new(0.0, 4.0 * a.abs()).inv();
    let mut out = lambda_plus(field);
    out.data.iter_mut().zip(la.data.iter()).for_each(|(v, w)| *v = 0.5 * *v - c * w);
    Ok(out)
}

/// `P_a = χ₊ C₂⁻¹ T_{m_a} C₂ χ₊`.
pub fn p_a_direct(a: f64, field: &SheetField) -> Result<SheetField> {
    model_symbol_ma(a, 0.0)?;
    apply_symbol(field, |xi, _| Complex64::new(model_symbol_ma(a, xi).expect("checked"), 0.0))
}

/// `Q_a = χ₊ C₂⁻¹ T_{M_a} C₂ χ₊`.
pub fn q_a(a: f64, field: &SheetField) -> Result<SheetField> {
    model_symbol_ma(a, 0.0)?;
    apply_symbol(field, |xi, j| Complex64::new(model_symbol_big_ma(a, xi, j).expect("checked"), 0.0))
}

/// `Q_a` mode by mode through `g_j = ρ^{−i(j/2+¼)} χ₊ f`: the shift in
/// `M_a(ξ, j) = e^{a/4} m_a(ξ − j/2 − ¼)` becomes a modulation, so every
/// mode uses the unshifted `m_a`.
pub fn q_a_shifted(a: f64, field: &SheetField) -> Result<SheetField> {
    model_symbol_ma(a, 0.0)?;
    let g = field.grid;
    let scale = (a / 4.0).exp();
    let mut out = SheetField::zeros(g);
    for js in 0..g.m {
        let j = g.mode(js);
        let c = j as f64 / 2.0 + 0.25;
        let mut gj = field.clone();
        for m in 0..g.m {
            for k in 0..g.n {
                gj.data[m * g.n + k] *= Complex64::from_polar(1.0, -c * g.x(k));
            }
        }
        let full = mf_forward(&cayley(2.0, &gj)?);
        let mut s = Spectrum::zeros(g);
        for q in 0..g.n {
            let idx = js * g.n + q;
            s.data[idx] = full.data[idx] * scale * model_symbol_ma(a, g.xi(q))?;
        }
        let back = cayley_inverse(2.0, &mf_inverse(&s))?;
        for m in 0..g.m {
            for k in 0..g.n {
                let idx = m * g.n + k;
                out.data[idx] += back.data[idx] * Complex64::from_polar(1.0, c * g.x(k));
            }
        }
    }
    Ok(out)
}
