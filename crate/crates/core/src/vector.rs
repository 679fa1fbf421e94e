//! Dense complex vector helpers.
//!
//! Vectors are plain `[C64]` slices; the inner product is conjugate-linear in
//! its first argument, `<x, y> = x^H y`.

use crate::C64;

pub fn zeros(n: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); n]
}

pub fn from_real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&a| C64::new(a, 0.0)).collect()
}

/// `<x, y> = sum conj(x_i) y_i`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Unconjugated bilinear form `x^T y`.
pub fn dotu(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    // Scaled to survive tiny/huge entries.
    let amax = x.iter().map(|a| a.re.abs().max(a.im.abs())).fold(0.0, f64::max);
    if amax == 0.0 || !amax.is_finite() {
        return amax;
    }
    let s: f64 = x.iter().map(|a| (a / amax).norm_sqr()).sum();
    amax * s.sqrt()
}

pub fn conj(x: &[C64]) -> Vec<C64> {
    x.iter().map(|a| a.conj()).collect()
}

pub fn conj_in_place(x: &mut [C64]) {
    for a in x {
        *a = a.conj();
    }
}

pub fn scale(a: C64, x: &[C64]) -> Vec<C64> {
    x.iter().map(|v| a * v).collect()
}

pub fn scale_in_place(a: C64, x: &mut [C64]) {
    for v in x {
        *v *= a;
    }
}

/// `y += a x`
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn add(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn is_finite(x: &[C64]) -> bool {
    x.iter().all(|a| a.re.is_finite() && a.im.is_finite())
}

/// `||x - y|| / ||y||`, or the absolute distance when `y = 0`.
pub fn rel_err(x: &[C64], y: &[C64]) -> f64 {
    let d = norm(&sub(x, y));
    let n = norm(y);
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

/// Conjugates when `flag` is set, otherwise returns a copy.
pub(crate) fn conj_if(flag: bool, x: &[C64]) -> Vec<C64> {
    if flag {
        conj(x)
    } else {
        x.to_vec()
    }
}
