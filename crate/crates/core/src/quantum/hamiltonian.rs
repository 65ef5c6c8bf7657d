//! Sector-restricted Hamiltonians as real symmetric sparse matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::Sector;
use crate::error::{invalid, Result};
use crate::model::{build_couplings, LatticeSpec};

/// Hamiltonians that conserve collective `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantumHamiltonian {
    /// `−Σ_{i<j} w_ij [J⊥(σˣσˣ + σʸσʸ) + J_z σᶻσᶻ]`.
    Xxz(LatticeSpec),
    /// `χ Z²/N` with collective `Z = Σσᶻ/2`.
    OneAxisTwisting { n_sites: usize, chi: f64 },
}

impl QuantumHamiltonian {
    pub fn n_sites(&self) -> usize {
        match self {
            QuantumHamiltonian::Xxz(spec) => spec.n_sites(),
            QuantumHamiltonian::OneAxisTwisting { n_sites, .. } => *n_sites,
        }
    }

    pub fn sector_matrix(&self, sector: &Sector) -> Result<SparseSym> {
        match self {
            QuantumHamiltonian::Xxz(spec) => xxz_matrix(spec, sector),
            QuantumHamiltonian::OneAxisTwisting { n_sites, chi } => {
                if *n_sites != sector.n_sites() {
                    return Err(invalid("n_sites", "sector does not match the Hamiltonian"));
                }
                let m = sector.magnetization();
                let e = chi * m * m / *n_sites as f64;
                Ok(SparseSym {
                    diag: vec![e; sector.dim()],
                    row_ptr: vec![0; sector.dim() + 1],
                    cols: Vec::new(),
                    vals: Vec::new(),
                })
            }
        }
    }
}

/// Diagonal plus CSR off-diagonal part of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SparseSym {
    pub diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim() {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.dim() {
            let mut acc = x[i] * self.diag[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            y[i] = acc;
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                self.diag[i].abs()
                    + self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k] as usize)] = self.vals[k];
            }
        }
        m
    }
}

fn xxz_matrix(spec: &LatticeSpec, sector: &Sector) -> Result<SparseSym> {
    let n = spec.n_sites();
    if n != sector.n_sites() {
        return Err(invalid("n_sites", "sector does not match the lattice"));
    }
    let pairs = build_couplings(spec)?.pairs();
    let dim = sector.dim();
    let mut diag = vec![0.0; dim];
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for (idx, &s) in sector.states().iter().enumerate() {
        let mut zz = 0.0;
        for &(i, j, w) in &pairs {
            let (bi, bj) = ((s >> i) & 1, (s >> j) & 1);
            if bi == bj {
                zz += w;
            } else {
                zz -= w;
                let flipped = s ^ ((1 << i) | (1 << j));
                cols.push(sector.rank(flipped) as u32);
                vals.push(-2.0 * spec.j_perp * w);
            }
        }
        diag[idx] = -spec.j_z * zz;
        row_ptr.push(cols.len());
    }
    Ok(SparseSym { diag, row_ptr, cols, vals })
}

/// Collective raising operator `S⁺ = Σ σ⁺` from `from` into the sector with
/// one more up spin.
pub fn raise(from: &Sector, to: &Sector, psi: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(from.n_up() + 1, to.n_up());
    out.iter_mut().for_each(|c| *c = Complex64::default());
    let n = from.n_sites();
    for (idx, &s) in from.states().iter().enumerate() {
        let a = psi[idx];
        if a == Complex64::default() {
            continue;
        }
        for i in 0..n {
            if (s >> i) & 1 == 0 {
                out[to.rank(s | (1 << i))] += a;
            }
        }
    }
}

/// Collective lowering operator `S⁻ = Σ σ⁻`.
pub fn lower(from: &Sector, to: &Sector, psi: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(from.n_up(), to.n_up() + 1);
    out.iter_mut().for_each(|c| *c = Complex64::default());
    let n = from.n_sites();
    for (idx, &s) in from.states().iter().enumerate() {
        let a = psi[idx];
        if a == Complex64::default() {
            continue;
        }
        for i in 0..n {
            if (s >> i) & 1 == 1 {
                out[to.rank(s & !(1 << i))] += a;
            }
        }
    }
}
