//! Adaptive Gauss–Kronrod (7/15) quadrature, real or complex valued.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

fn gk15<T: Scalar>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod = kronrod + s * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + s * WG[i / 2];
        }
    }
    let k = kronrod * h;
    let g = gauss * h;
    (k, (k - g).magnitude())
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_pieces: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-12, max_pieces: 20_000 }
    }
}

/// `∫_a^b f` over the union of `[breaks[i], breaks[i+1]]`, refining the
/// piece with the largest error estimate first.
pub fn integrate<T: Scalar>(f: impl Fn(f64) -> T, breaks: &[f64], tol: Tolerance) -> Result<T> {
    if breaks.len() < 2 {
        return Err(Error::Quadrature("need at least two break points".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut running = T::zero();
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, e) = gk15(&f, w[0], w[1]);
            running = running + value;
            err += e;
            heap.push(Piece { a: w[0], b: w[1], value, err: e });
        }
    }
    loop {
        if err <= tol.abs.max(tol.rel * running.magnitude()) {
            // Sum by position so the result does not depend on refinement order.
            let mut pieces: Vec<Piece<T>> = heap.into_vec();
            pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
            return Ok(pieces.iter().fold(T::zero(), |acc, p| acc + p.value));
        }
        if heap.len() >= tol.max_pieces {
            return Err(Error::Quadrature(format!(
                "error estimate {err:.3e} after {} pieces",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature("interval collapsed".into()));
        }
        running = running - worst.value;
        err -= worst.err;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, e) = gk15(&f, a, b);
            running = running + value;
            err += e;
            heap.push(Piece { a, b, value, err: e });
        }
        err = err.max(0.0);
    }
}

/// Uniform trapezoid rule on `n` intervals.
pub fn trapezoid<T: Scalar>(f: impl Fn(f64) -> T, a: f64, b: f64, n: usize) -> T {
    let h = (b - a) / n as f64;
    let mut s = (f(a) + f(b)) * 0.5;
    for i in 1..n {
        s = s + f(a + i as f64 * h);
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_integral() {
        let v = integrate(|x: f64| (-x * x).exp(), &[-10.0, 0.0, 10.0], Tolerance::default()).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let v = integrate(
            |x: f64| Complex64::from_polar((-x * x).exp(), 3.0 * x),
            &[-10.0, 10.0],
            Tolerance::default(),
        )
        .unwrap();
        let exact = PI.sqrt() * (-9.0f64 / 4.0).exp();
        assert!((v - Complex64::new(exact, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn sech_integral() {
        let v = integrate(|x: f64| 1.0 / x.cosh(), &[-60.0, 0.0, 60.0], Tolerance::default()).unwrap();
        assert!((v - PI).abs() < 1e-12);
    }
}
