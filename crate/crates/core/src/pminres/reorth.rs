//! Reorthogonalization buffer `Y_t = sum_i (z_i/β_i)(w_i/β_i)^H` (`^T` on the
//! complex-symmetric path).

use crate::vector::{axpy, dot, dotu};
use crate::C64;

#[derive(Debug, Clone)]
pub struct ReorthBuffer {
    conj: bool,
    pairs: Vec<(Vec<C64>, Vec<C64>)>,
}

impl ReorthBuffer {
    /// `complex_symmetric` selects the transpose form.
    pub fn new(complex_symmetric: bool) -> Self {
        Self { conj: complex_symmetric, pairs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stores `(z/β, w/β)`.
    pub fn push(&mut self, z_normalized: Vec<C64>, w_normalized: Vec<C64>) {
        self.pairs.push((z_normalized, w_normalized));
    }

    fn form(&self, a: &[C64], b: &[C64]) -> C64 {
        if self.conj {
            dotu(a, b)
        } else {
            dot(a, b)
        }
    }

    /// `Y v`
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (z, w) in &self.pairs {
            axpy(self.form(w, v), z, &mut out);
        }
        out
    }

    /// `Y^H v` (`Y^T v` on the complex-symmetric path).
    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (z, w) in &self.pairs {
            axpy(self.form(z, v), w, &mut out);
        }
        out
    }

    /// `z <- z - Y z`, in place, pair by pair.
    pub fn project_z(&self, z: &mut [C64]) {
        for (zi, wi) in &self.pairs {
            let h = self.form(wi, z);
            axpy(-h, zi, z);
        }
    }

    /// `z <- z - Y z`, `w <- w - Y^H w`.
    pub fn reorthogonalize(&self, z: &mut [C64], w: &mut [C64]) {
        let yz = self.apply(z);
        let yw = self.apply_adjoint(w);
        for (a, b) in z.iter_mut().zip(&yz) {
            *a -= b;
        }
        for (a, b) in w.iter_mut().zip(&yw) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_buffer_is_noop() {
        let buf = ReorthBuffer::new(false);
        let mut z = vec![C64::new(1.0, 2.0), C64::new(0.5, 0.0)];
        let mut w = vec![C64::new(-1.0, 0.0), C64::new(0.0, 3.0)];
        let (z0, w0) = (z.clone(), w.clone());
        buf.reorthogonalize(&mut z, &mut w);
        assert_eq!(z, z0);
        assert_eq!(w, w0);
    }

    #[test]
    fn apply_matches_sum() {
        let mut buf = ReorthBuffer::new(false);
        let z = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let w = vec![C64::new(0.5, 0.5), C64::new(2.0, 0.0)];
        buf.push(z.clone(), w.clone());
        let v = vec![C64::new(0.3, -0.2), C64::new(1.0, 1.0)];
        let h = dot(&w, &v);
        let want: Vec<C64> = z.iter().map(|zi| zi * h).collect();
        assert_eq!(buf.apply(&v), want);
    }
}
