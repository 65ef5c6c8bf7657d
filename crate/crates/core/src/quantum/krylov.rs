//! Lanczos propagation `e^{−iHt}ψ` with step-doubling error control, and a
//! Lanczos ground-state solver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::SparseSym;
use crate::error::{Error, Result};
use crate::math::splitmix64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub dim: usize,
    /// Accepted local error per step, measured between one full step and two
    /// half steps.
    pub tol: f64,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig { dim: 30, tol: 1e-10 }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

struct KrylovSpace {
    basis: Vec<Vec<Complex64>>,
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    scale: f64,
}

impl KrylovSpace {
    fn build(h: &SparseSym, psi: &[Complex64], m: usize) -> Self {
        let scale = norm(psi);
        let dim = h.dim();
        let m = m.min(dim).max(1);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        basis.push(psi.iter().map(|c| c / scale).collect());
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![Complex64::default(); dim];
        for j in 0..m {
            h.apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            if j + 1 == m {
                break;
            }
            let b = norm(&w);
            if b < 1e-12 * (a.abs() + 1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|c| c / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        basis.truncate(k);
        KrylovSpace { basis, eig: SymmetricEigen::new(t), scale }
    }

    fn propagate(&self, dt: f64, out: &mut [Complex64]) {
        let k = self.basis.len();
        let q = &self.eig.eigenvectors;
        let mut coeff = vec![Complex64::default(); k];
        for (l, &lam) in self.eig.eigenvalues.iter().enumerate() {
            let ph = Complex64::from_polar(q[(0, l)], -lam * dt);
            for (i, c) in coeff.iter_mut().enumerate() {
                *c += ph * q[(i, l)];
            }
        }
        out.iter_mut().for_each(|c| *c = Complex64::default());
        for (c, v) in coeff.iter().zip(&self.basis) {
            let c = c * self.scale;
            for (o, vi) in out.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
    }
}

/// Propagate `psi` by `t` under `h`, adapting the internal step.
pub fn evolve(h: &SparseSym, psi: &mut [Complex64], t: f64, cfg: &KrylovConfig) -> Result<()> {
    if t == 0.0 {
        return Ok(());
    }
    let bound = h.norm_bound().max(1e-300);
    let mut dt = (0.5 * cfg.dim as f64 / bound).min(t.abs()) * t.signum();
    let mut done = 0.0;
    let dim = h.dim();
    let mut full = vec![Complex64::default(); dim];
    let mut half = vec![Complex64::default(); dim];
    let mut two = vec![Complex64::default(); dim];
    let mut rejections = 0;
    while (t - done).abs() > 1e-14 * t.abs() {
        if (dt.abs()) > (t - done).abs() {
            dt = t - done;
        }
        let space = KrylovSpace::build(h, psi, cfg.dim);
        let exact = space.basis.len() < cfg.dim || space.basis.len() == dim;
        space.propagate(dt, &mut full);
        if exact {
            psi.copy_from_slice(&full);
            done += dt;
            continue;
        }
        space.propagate(0.5 * dt, &mut half);
        KrylovSpace::build(h, &half, cfg.dim).propagate(0.5 * dt, &mut two);
        let err: f64 = full.iter().zip(&two).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if err <= cfg.tol {
            psi.copy_from_slice(&two);
            done += dt;
            rejections = 0;
            if err < 0.01 * cfg.tol {
                dt *= 1.5;
            }
        } else {
            dt *= 0.5;
            rejections += 1;
            if rejections > 60 {
                return Err(Error::Krylov(format!("step collapsed to {dt:.3e} at t = {done}")));
            }
        }
    }
    Ok(())
}

/// Lowest eigenvalue of `h` by Lanczos with full reorthogonalization.
pub fn ground_state_energy(h: &SparseSym, max_iter: usize) -> Result<f64> {
    let dim = h.dim();
    if dim == 0 {
        return Err(Error::Krylov("empty sector".into()));
    }
    let mut v: Vec<f64> = (0..dim)
        .map(|i| (splitmix64(i as u64 + 0x5eed) >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect();
    let n0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n0);
    let mut basis = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut last = f64::INFINITY;
    let mut stable = 0;
    for j in 0..max_iter.min(dim) {
        h.apply_real(&basis[j], &mut w);
        let a: f64 = basis[j].iter().zip(&w).map(|(x, y)| x * y).sum();
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let e0 = t.symmetric_eigenvalues().min();
        if (e0 - last).abs() <= 1e-13 * e0.abs().max(1.0) {
            stable += 1;
            if stable >= 3 {
                return Ok(e0);
            }
        } else {
            stable = 0;
        }
        last = e0;
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if b < 1e-12 * (a.abs() + 1.0) {
            return Ok(e0);
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    if dim <= max_iter {
        return Ok(last);
    }
    Err(Error::Krylov(format!("ground state not converged in {max_iter} iterations")))
}
