//! Lattices, pair couplings and momentum-space lattice sums for the
//! power-law XXZ model
//!
//! ```text
//! H = -Σ_{i<j} [J⊥ (σˣᵢσˣⱼ + σʸᵢσʸⱼ) + J_z σᶻᵢσᶻⱼ] / r_ij^α
//! ```
//!
//! on a periodic hypercubic lattice of `L^d` sites. Couplings are used
//! unrescaled (no Kac factor), which is only meaningful for `α > d`; all
//! timescales and the effective twisting strength depend on this choice.
//! Distances use the minimum-image convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interaction {
    PowerLaw,
    NearestNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Operator normalization of a spin bilinear: Pauli matrices `σ` or spin
/// operators `S = σ/2`. A bilinear differs by a factor 4 between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Pauli,
    Spin,
}

impl Convention {
    pub fn bilinear_scale(self) -> f64 {
        match self {
            Convention::Pauli => 1.0,
            Convention::Spin => 0.25,
        }
    }
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: u32,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_one")]
    pub j_perp: f64,
    #[serde(default)]
    pub j_z: f64,
    pub interaction: Interaction,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_alpha() -> f64 {
    f64::INFINITY
}

impl LatticeSpec {
    pub fn power_law(d: u32, l: usize, alpha: f64, j_z: f64) -> Self {
        LatticeSpec {
            d,
            l,
            alpha,
            j_perp: 1.0,
            j_z,
            interaction: Interaction::PowerLaw,
            boundary: Boundary::Periodic,
        }
    }

    pub fn nearest_neighbor(d: u32, l: usize, j_z: f64) -> Self {
        LatticeSpec {
            d,
            l,
            alpha: f64::INFINITY,
            j_perp: 1.0,
            j_z,
            interaction: Interaction::NearestNeighbor,
            boundary: Boundary::Periodic,
        }
    }

    pub fn with_couplings(mut self, j_perp: f64, j_z: f64) -> Self {
        self.j_perp = j_perp;
        self.j_z = j_z;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(Error::InvalidLattice(format!(
                "dimension must be 1, 2 or 3 (got {})",
                self.d
            )));
        }
        if self.l < 2 {
            return Err(Error::InvalidLattice(format!(
                "linear size must be at least 2 (got {})",
                self.l
            )));
        }
        if self.interaction == Interaction::PowerLaw && !(self.alpha > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "power-law exponent must be positive (got {})",
                self.alpha
            )));
        }
        if !self.j_perp.is_finite() || !self.j_z.is_finite() {
            return Err(Error::InvalidLattice("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.l.pow(self.d)
    }

    /// Lattice coordinates of site `i` (axis 0 varies fastest).
    pub fn coords(&self, mut i: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.d as usize) {
            *slot = i % self.l;
            i /= self.l;
        }
        c
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        let mut i = 0;
        for a in (0..self.d as usize).rev() {
            i = i * self.l + c[a] % self.l;
        }
        i
    }

    /// Minimum-image displacement vector encoded by the displacement index
    /// `r` (same encoding as a site index).
    pub fn min_image(&self, r: usize) -> [i64; 3] {
        let c = self.coords(r);
        let l = self.l as i64;
        let mut out = [0i64; 3];
        for a in 0..self.d as usize {
            let mut x = c[a] as i64;
            if x > l / 2 {
                x -= l;
            }
            out[a] = x;
        }
        out
    }

    /// Index of the displacement `j - i` modulo the lattice.
    pub fn displacement(&self, i: usize, j: usize) -> usize {
        let ci = self.coords(i);
        let cj = self.coords(j);
        let mut c = [0; 3];
        for a in 0..self.d as usize {
            c[a] = (cj[a] + self.l - ci[a]) % self.l;
        }
        self.index(c)
    }

    fn pair_weight(&self, r: [i64; 3]) -> f64 {
        let dist2: i64 = r.iter().map(|x| x * x).sum();
        if dist2 == 0 {
            return 0.0;
        }
        match self.interaction {
            Interaction::NearestNeighbor => {
                if dist2 == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Interaction::PowerLaw => (dist2 as f64).sqrt().powf(-self.alpha),
        }
    }

    /// Pair weight `w(r)` for every displacement index `r`; `w(0) = 0`.
    pub fn kernel(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok((0..self.n_sites())
            .map(|r| self.pair_weight(self.min_image(r)))
            .collect())
    }

    /// Reciprocal lattice `q = 2π n / L` for `n ∈ {0, …, L-1}^d`.
    pub fn momentum_grid(&self) -> Vec<[f64; 3]> {
        let two_pi_over_l = 2.0 * std::f64::consts::PI / self.l as f64;
        (0..self.n_sites())
            .map(|i| {
                let c = self.coords(i);
                let mut q = [0.0; 3];
                for a in 0..self.d as usize {
                    q[a] = two_pi_over_l * c[a] as f64;
                }
                q
            })
            .collect()
    }
}

/// Dense symmetric matrix of pair weights `w_ij`, unscaled by `J⊥` and `J_z`.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// Pairs `(i, j, w_ij)` with `i < j` and `w_ij ≠ 0`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let w = self.get(i, j);
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }
}

pub fn build_couplings(spec: &LatticeSpec) -> Result<CouplingMatrix> {
    let kernel = spec.kernel()?;
    let n = spec.n_sites();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = kernel[spec.displacement(i, j)];
        }
    }
    Ok(CouplingMatrix { n, data })
}

/// `η(q) = Σ_{r≠0} w(r) e^{iq·r}` over minimum-image displacements.
///
/// Fails when the imaginary part does not cancel, which happens only for
/// momenta off the reciprocal lattice.
pub fn eta(spec: &LatticeSpec, q: [f64; 3]) -> Result<f64> {
    let kernel = spec.kernel()?;
    eta_with_kernel(spec, &kernel, q)
}

pub fn eta_with_kernel(spec: &LatticeSpec, kernel: &[f64], q: [f64; 3]) -> Result<f64> {
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    let mut scale = 0.0;
    for (r, &w) in kernel.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let v = spec.min_image(r);
        let phase: f64 = (0..spec.d as usize).map(|a| q[a] * v[a] as f64).sum();
        re.add(w * phase.cos());
        im.add(w * phase.sin());
        scale += w.abs();
    }
    let residue = im.total().abs();
    if residue > 1e-12 * scale.max(1.0) {
        return Err(Error::IncommensurateMomentum {
            q: q[..spec.d as usize].to_vec(),
            residue,
        });
    }
    Ok(re.total())
}

pub fn eta_zero(spec: &LatticeSpec) -> Result<f64> {
    let kernel = spec.kernel()?;
    let mut s = NeumaierSum::default();
    for &w in &kernel {
        s.add(w);
    }
    Ok(s.total())
}

/// Spin-wave kernel `ω(q) = η(0) − η(q)` on the full reciprocal lattice, in
/// the order of [`LatticeSpec::momentum_grid`]. Uses one FFT of the kernel.
pub fn dispersion(spec: &LatticeSpec) -> Result<Vec<f64>> {
    let kernel = spec.kernel()?;
    let mut eta0 = NeumaierSum::default();
    for &w in &kernel {
        eta0.add(w);
    }
    let eta0 = eta0.total();
    let eta_q = crate::dtwa::field::real_spectrum(&kernel, spec.l, spec.d as usize);
    Ok(eta_q.into_iter().map(|e| (eta0 - e).max(0.0)).collect())
}

/// Mean energy of the coherent state polarized along +x.
///
/// Only the transverse term survives: `⟨σʸσʸ⟩ = ⟨σᶻσᶻ⟩ = 0` on distinct
/// sites, so `E = −J⊥ N η(0)/2` (Pauli) or `−J⊥ N η(0)/8` (spin operators).
pub fn css_energy(spec: &LatticeSpec, convention: Convention) -> Result<f64> {
    let n = spec.n_sites() as f64;
    Ok(-0.5 * spec.j_perp * n * eta_zero(spec)? * convention.bilinear_scale())
}

/// Mean energy of an arbitrary product state with unit Bloch vectors
/// `directions[i]`; includes the `J_z` contribution.
pub fn product_state_energy(
    spec: &LatticeSpec,
    directions: &[[f64; 3]],
    convention: Convention,
) -> Result<f64> {
    let w = build_couplings(spec)?;
    if directions.len() != w.n() {
        return Err(Error::InvalidLattice(format!(
            "{} directions for {} sites",
            directions.len(),
            w.n()
        )));
    }
    let mut e = NeumaierSum::default();
    for (i, j, wij) in w.pairs() {
        let (a, b) = (directions[i], directions[j]);
        e.add(-wij * (spec.j_perp * (a[0] * b[0] + a[1] * b[1]) + spec.j_z * a[2] * b[2]));
    }
    Ok(e.total() * convention.bilinear_scale())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_image_distance_in_ring() {
        let spec = LatticeSpec::power_law(1, 5, 1.5, 0.0);
        let w = build_couplings(&spec).unwrap();
        assert_eq!(w.get(0, 3), 2f64.powf(-1.5));
        assert_eq!(w.get(0, 1), 1.0);
        assert_eq!(w.get(2, 2), 0.0);
    }

    #[test]
    fn large_alpha_approaches_nearest_neighbor() {
        let spec = LatticeSpec::power_law(1, 4, 60.0, 0.0);
        let w = build_couplings(&spec).unwrap();
        let nn = build_couplings(&LatticeSpec::nearest_neighbor(1, 4, 0.0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((w.get(i, j) - nn.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn nearest_neighbor_weights_are_binary() {
        let spec = LatticeSpec::nearest_neighbor(3, 4, -1.0);
        let w = build_couplings(&spec).unwrap();
        for i in 0..w.n() {
            assert!(w.row(i).iter().all(|&x| x == 0.0 || x == 1.0));
            assert_eq!(w.row_sum(i), 6.0);
        }
    }

    #[test]
    fn row_sums_match_direct_pair_sum() {
        let spec = LatticeSpec::power_law(2, 3, 3.0, 0.0);
        let w = build_couplings(&spec).unwrap();
        // direct pair sum over all site pairs with explicit periodic images
        let n = spec.n_sites();
        for i in 0..n {
            let ci = spec.coords(i);
            let mut s = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let cj = spec.coords(j);
                let mut d2 = 0.0;
                for a in 0..2 {
                    let raw = (cj[a] as f64 - ci[a] as f64).abs();
                    let m = raw.min(3.0 - raw);
                    d2 += m * m;
                }
                s += d2.sqrt().powf(-3.0);
            }
            assert!((w.row_sum(i) - s).abs() < 1e-14);
            assert!((w.row_sum(i) - w.row_sum(0)).abs() < 1e-14);
        }
    }

    #[test]
    fn two_site_ring() {
        let spec = LatticeSpec::power_law(1, 2, 1.5, 0.0);
        assert_eq!(eta_zero(&spec).unwrap(), 1.0);
        let e = css_energy(&spec, Convention::Spin).unwrap();
        assert!((e + 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_lattices() {
        assert!(build_couplings(&LatticeSpec::power_law(1, 1, 1.5, 0.0)).is_err());
        assert!(build_couplings(&LatticeSpec::power_law(1, 8, 0.0, 0.0)).is_err());
        assert!(build_couplings(&LatticeSpec::power_law(1, 8, -1.0, 0.0)).is_err());
        assert!(build_couplings(&LatticeSpec::power_law(4, 3, 1.0, 0.0)).is_err());
    }

    #[test]
    fn incommensurate_momentum_is_rejected() {
        let spec = LatticeSpec::power_law(1, 8, 1.5, 0.0);
        assert!(eta(&spec, [0.3, 0.0, 0.0]).is_err());
        let q = 2.0 * std::f64::consts::PI * 3.0 / 8.0;
        assert!(eta(&spec, [q, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn dispersion_is_non_negative_and_vanishes_at_zero() {
        let spec = LatticeSpec::power_law(2, 6, 3.0, 0.0);
        let om = dispersion(&spec).unwrap();
        assert!(om[0].abs() < 1e-14);
        assert!(om.iter().all(|&x| x >= -1e-14));
        let eta0 = eta_zero(&spec).unwrap();
        for (q, w) in spec.momentum_grid().into_iter().zip(&om) {
            assert!((eta0 - eta(&spec, q).unwrap() - w).abs() < 1e-12);
        }
    }

    #[test]
    fn config_keys() {
        let spec = LatticeSpec::power_law(1, 64, 1.5, -2.0);
        let s = serde_json::to_string(&spec).unwrap();
        for key in ["\"d\"", "\"L\"", "\"alpha\"", "\"j_perp\"", "\"j_z\"", "\"interaction\"", "\"boundary\""] {
            assert!(s.contains(key), "{s}");
        }
        assert!(s.contains("power-law"));
        let back: LatticeSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }
}
