//! Bose-gas picture of the low-energy XXZ thermodynamics near the Heisenberg
//! point: condensation temperature, effective temperature of the coherent
//! state, and the resulting `J_c(α)` boundary.
//!
//! All energies are in the spin-operator convention (`S = σ/2`, `J⊥ = 1`).
//! The single-particle dispersion in the sector `M = SN` is
//! `ε(q) = (S − (M−1)/(2N)) ω(q) ≃ (S/2) ω(q)`, whose small-`q` form
//! `ε ≈ A q^{α−d}` gives the closed forms below.

pub mod special;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{bisect, line_fit, NeumaierSum};
use crate::model::{css_energy, dispersion, Convention, LatticeSpec};
use special::{gamma, zeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinWaveResult {
    pub alpha: f64,
    pub d: u32,
    pub s: f64,
    pub j_z: Option<f64>,
    pub t_c: f64,
    pub t_0: Option<f64>,
    /// Excitation energy per site of the coherent state.
    pub energy_density: Option<f64>,
    pub j_c: Option<f64>,
}

fn check_regime(alpha: f64, d: u32) -> Result<()> {
    match d {
        1 if alpha >= 2.0 => Err(Error::NoFiniteTemperatureOrder(format!(
            "d = 1 requires α < 2 (got {alpha}); rigorous bounds exclude order"
        ))),
        2 if alpha >= 4.0 => Err(Error::NoFiniteTemperatureOrder(format!(
            "d = 2 requires α < 4 (got {alpha}); rigorous bounds exclude order"
        ))),
        1 if alpha <= 1.0 => Err(invalid("alpha", format!("d = 1 needs 1 < α < 2 (got {alpha})"))),
        2 if alpha <= 2.0 => Err(invalid("alpha", format!("d = 2 needs 2 < α < 4 (got {alpha})"))),
        1 | 2 => Ok(()),
        _ => Err(invalid("d", format!("spin-wave closed forms exist for d = 1, 2 (got {d})"))),
    }
}

/// Coefficient `A` of the small-momentum dispersion `ε(q) ≈ A |q|^{α−d}`.
pub fn dispersion_prefactor(alpha: f64, d: u32, s: f64) -> Result<f64> {
    check_regime(alpha, d)?;
    Ok(if d == 1 {
        -PI * s / (2.0 * gamma(alpha) * (PI * alpha / 2.0).cos())
    } else {
        -(2f64.powf(1.0 - alpha)) * PI * PI * s
            / (gamma(alpha / 2.0).powi(2) * (PI * alpha / 2.0).sin())
    })
}

/// Leading-order condensation temperature.
pub fn critical_temperature(alpha: f64, d: u32, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid("s", "spin length must be positive"));
    }
    let a = dispersion_prefactor(alpha, d, s)?;
    Ok(if d == 1 {
        let x = 1.0 / (alpha - 1.0);
        a * (PI * s * (alpha - 1.0) / (gamma(x) * zeta(x))).powf(alpha - 1.0)
    } else {
        let x = 2.0 / (alpha - 2.0);
        a * (2.0 * PI * s * (alpha - 2.0) / (gamma(x) * zeta(x))).powf((alpha - 2.0) / 2.0)
    })
}

/// Effective temperature of the coherent state with excitation energy
/// density `energy` above the ground state.
pub fn css_temperature(alpha: f64, d: u32, s: f64, energy: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(invalid("energy", format!("excitation energy must be non-negative (got {energy})")));
    }
    let a = dispersion_prefactor(alpha, d, s)?;
    Ok(if d == 1 {
        let x = alpha / (alpha - 1.0);
        a.powf(1.0 / alpha)
            * (PI * (alpha - 1.0) * energy / (gamma(x) * zeta(x))).powf((alpha - 1.0) / alpha)
    } else {
        let x = alpha / (alpha - 2.0);
        a.powf(2.0 / alpha)
            * (2.0 * PI * (alpha - 2.0) * energy / (gamma(x) * zeta(x))).powf((alpha - 2.0) / alpha)
    })
}

/// `ε(q)` on every nonzero lattice momentum, for `M = SN` excitations.
pub fn mode_energies(spec: &LatticeSpec, s: f64) -> Result<Vec<f64>> {
    let n = spec.n_sites() as f64;
    let m = s * n;
    let factor = s - (m - 1.0) / (2.0 * n);
    let omega = dispersion(spec)?;
    Ok(omega.into_iter().skip(1).map(|w| factor * w).collect())
}

fn occupation(e: f64, mu: f64, t: f64) -> f64 {
    1.0 / ((e - mu) / t).exp_m1()
}

fn total_occupation(energies: &[f64], mu: f64, t: f64) -> f64 {
    let mut acc = NeumaierSum::default();
    for &e in energies {
        acc.add(occupation(e, mu, t));
    }
    acc.total()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoseSolution {
    /// `μ < 0` carries all `M` particles in excited modes.
    Disordered { mu: f64 },
    /// Even `μ → 0⁻` cannot hold `M` particles: `T < T_c`.
    Condensed { excited: f64 },
}

/// Solve `M = Σ_{q≠0} 1/(e^{(ε−μ)/T} − 1)` for the chemical potential.
pub fn bose_selfconsistency(energies: &[f64], m: f64, t: f64) -> Result<BoseSolution> {
    if energies.is_empty() || energies.iter().any(|&e| !(e > 0.0)) {
        return Err(invalid("energies", "need strictly positive excited-mode energies"));
    }
    if !(t > 0.0) || !(m > 0.0) {
        return Err(invalid("t", "temperature and particle number must be positive"));
    }
    let at_zero = total_occupation(energies, 0.0, t);
    if at_zero <= m {
        return Ok(BoseSolution::Condensed { excited: at_zero });
    }
    let mut lo = -t;
    while total_occupation(energies, lo, t) > m {
        lo *= 2.0;
        if lo < -1e300 {
            return Err(Error::Bisection { lo, hi: 0.0, reason: "cannot bracket μ".into() });
        }
    }
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let mu = bisect(
        |mu| Ok(total_occupation(energies, mu, t) - m),
        lo,
        0.0,
        1e-13 * lo.abs().max(e_min),
    )?;
    Ok(BoseSolution::Disordered { mu })
}

fn increasing_root<F: Fn(f64) -> f64>(f: F, target: f64, guess: f64) -> Result<f64> {
    let (mut lo, mut hi) = (guess, guess);
    while f(lo) > target {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Bisection { lo, hi, reason: "no lower bracket".into() });
        }
    }
    while f(hi) < target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Bisection { lo, hi, reason: "no upper bracket".into() });
        }
    }
    bisect(|x| Ok(f(x) - target), lo, hi, 1e-13 * hi)
}

/// Temperature at which `μ = 0` holds exactly `m` excited particles.
pub fn lattice_critical_temperature(energies: &[f64], m: f64) -> Result<f64> {
    if energies.iter().any(|&e| !(e > 0.0)) {
        return Err(invalid("energies", "need strictly positive excited-mode energies"));
    }
    let guess = energies.iter().sum::<f64>() / energies.len().max(1) as f64;
    increasing_root(|t| total_occupation(energies, 0.0, t), m, guess)
}

/// Temperature at which the excited modes at `μ = 0` carry total energy
/// `energy`.
pub fn lattice_css_temperature(energies: &[f64], energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return if energy == 0.0 { Ok(0.0) } else { Err(invalid("energy", "must be non-negative")) };
    }
    let guess = energies.iter().sum::<f64>() / energies.len().max(1) as f64;
    increasing_root(
        |t| {
            let mut acc = NeumaierSum::default();
            for &e in energies {
                acc.add(e * occupation(e, 0.0, t));
            }
            acc.total()
        },
        energy,
        guess,
    )
}

/// Source of the coherent-state excitation energy density `ℰ(α, J_z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyModel {
    /// Tabulated `(J_z, ℰ)` pairs at a fixed `α`; linearly interpolated.
    Table { alpha: f64, points: Vec<(f64, f64)> },
    /// Exact ground states on small periodic lattices of linear sizes
    /// `lengths`, extrapolated linearly in `1/N`. Lower fidelity than a
    /// large-scale variational calculation.
    ExactDiag { lengths: Vec<usize> },
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel::ExactDiag { lengths: vec![8, 10, 12, 14, 16] }
    }
}

impl EnergyModel {
    pub fn energy_density(&self, alpha: f64, d: u32, j_z: f64) -> Result<f64> {
        match self {
            EnergyModel::Table { alpha: a, points } => {
                if (a - alpha).abs() > 1e-12 {
                    return Err(invalid("alpha", format!("table is for α = {a}, asked for {alpha}")));
                }
                interpolate(points, j_z)
            }
            EnergyModel::ExactDiag { lengths } => {
                if lengths.len() < 2 {
                    return Err(Error::InsufficientData("need at least two lattice sizes".into()));
                }
                let mut inv_n = Vec::new();
                let mut e = Vec::new();
                for &l in lengths {
                    let spec = LatticeSpec::power_law(d, l, alpha, j_z);
                    let n = spec.n_sites() as f64;
                    let e_css = css_energy(&spec, Convention::Spin)? / n;
                    let e0 = crate::quantum::ground_state_energy(&spec)?
                        * Convention::Spin.bilinear_scale()
                        / n;
                    inv_n.push(1.0 / n);
                    e.push(e_css - e0);
                }
                Ok(line_fit(&inv_n, &e, None)?.intercept)
            }
        }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Result<f64> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    if p.len() < 2 || x < p[0].0 || x > p[p.len() - 1].0 {
        return Err(invalid("j_z", format!("{x} lies outside the tabulated range")));
    }
    let i = p.partition_point(|q| q.0 <= x).clamp(1, p.len() - 1);
    let (x0, y0) = p[i - 1];
    let (x1, y1) = p[i];
    Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

pub const JC_BRACKET: (f64, f64) = (-6.0, 1.0);

/// `J_z` at which the coherent state's effective temperature reaches `T_c`.
pub fn solve_jc(alpha: f64, d: u32, s: f64, model: &EnergyModel) -> Result<SpinWaveResult> {
    let t_c = critical_temperature(alpha, d, s)?;
    let (lo, hi) = JC_BRACKET;
    let excess = |j_z: f64| -> Result<f64> {
        let e = model.energy_density(alpha, d, j_z)?.max(0.0);
        Ok(css_temperature(alpha, d, s, e)? - t_c)
    };
    let j_c = match bisect(excess, lo, hi, 1e-3) {
        Ok(j) => j,
        Err(Error::Bisection { .. }) => return Err(Error::NoBoundary { lo, hi }),
        Err(e) => return Err(e),
    };
    let energy = model.energy_density(alpha, d, j_c)?.max(0.0);
    Ok(SpinWaveResult {
        alpha,
        d,
        s,
        j_z: Some(j_c),
        t_c,
        t_0: Some(css_temperature(alpha, d, s, energy)?),
        energy_density: Some(energy),
        j_c: Some(j_c),
    })
}
