//! Dense tensor-product quantum mechanics for small chains.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use squeeze::model::{build_couplings, LatticeSpec};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli() -> [CMat; 3] {
    let z = c(0.0, 0.0);
    [
        CMat::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
        CMat::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
    ]
}

/// `σ^a` on site `i` of `n`, built as an explicit Kronecker chain.
pub fn site_op(op: &CMat, i: usize, n: usize) -> CMat {
    let id = CMat::identity(2, 2);
    let mut out = CMat::identity(1, 1);
    for k in 0..n {
        out = out.kronecker(if k == i { op } else { &id });
    }
    out
}

pub fn dense_xxz(spec: &LatticeSpec) -> CMat {
    let n = spec.n_sites();
    let w = build_couplings(spec).unwrap();
    let p = pauli();
    let ops: Vec<[CMat; 3]> = (0..n).map(|i| p.clone().map(|s| site_op(&s, i, n))).collect();
    let dim = 1 << n;
    let mut h = CMat::zeros(dim, dim);
    for i in 0..n {
        for j in i + 1..n {
            let wij = w.get(i, j);
            let pair = (&ops[i][0] * &ops[j][0] + &ops[i][1] * &ops[j][1]) * c(spec.j_perp, 0.0)
                + &ops[i][2] * &ops[j][2] * c(spec.j_z, 0.0);
            h -= pair * c(wij, 0.0);
        }
    }
    h
}

pub fn collective(axis: usize, n: usize) -> CMat {
    let p = pauli();
    let mut out = CMat::zeros(1 << n, 1 << n);
    for i in 0..n {
        out += site_op(&p[axis], i, n) * c(0.5, 0.0);
    }
    out
}

/// `|x⟩^{⊗n}` in the same tensor ordering.
pub fn css_x(n: usize) -> DVector<Complex64> {
    DVector::from_element(1 << n, c(0.5f64.powf(n as f64 / 2.0), 0.0))
}

pub fn expectation(op: &CMat, psi: &DVector<Complex64>) -> Complex64 {
    (psi.adjoint() * op * psi)[(0, 0)]
}
