//! Linearized stochastic hydrodynamics of the in-plane phase `φ` and the
//! magnetization density `m`, one Fourier mode at a time:
//!
//! ```text
//! dφ_k/dt = 2gχ m_k − Γ K_k φ_k + η_φ
//! dm_k/dt = −g K_k φ_k − k² (2Λχ m_k + η_m)
//! ```
//!
//! with white noises `⟨|η_φ|²⟩ = 2ΓT/N`, `⟨|η_m|²⟩ = 2ΛT/N` and
//! `K_k = K̃ |k|^κ`. The `k = 0` mode has `K_0 = 0` and `m_0 = Z/N`, so the
//! collective phase precesses at `2χZ/N` and random-walks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtwa::trajectory_rng;
use crate::error::{invalid, Error, Result};
use crate::math::{line_fit, LineFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroParams {
    /// System size `N` setting the noise strength.
    pub n: f64,
    pub g: f64,
    /// Inverse susceptibility in the free energy (not the twisting strength).
    pub chi: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub temperature: f64,
    pub k_tilde: f64,
    /// Exponent `κ` of `K_k`; `α − d` for power-law couplings.
    pub k_exponent: f64,
    /// Number of lattice modes `L`, momenta `2πn/L`.
    pub n_modes: usize,
    pub dt: f64,
    pub realizations: usize,
    /// Conserved collective `Z` feeding the zero mode.
    pub z: f64,
}

impl HydroParams {
    pub fn new(n: f64, gamma: f64, temperature: f64) -> Self {
        HydroParams {
            n,
            g: 1.0,
            chi: 1.0,
            gamma,
            lambda: 0.5,
            temperature,
            k_tilde: 1.0,
            k_exponent: 0.5,
            n_modes: 32,
            dt: 1e-2,
            realizations: 1000,
            z: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n", self.n),
            ("chi", self.chi),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("k_tilde", self.k_tilde),
            ("dt", self.dt),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive (got {v})")));
            }
        }
        if !(self.temperature >= 0.0) {
            return Err(invalid("temperature", "must be non-negative"));
        }
        if self.n_modes < 2 {
            return Err(invalid("n_modes", "need at least two modes"));
        }
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be positive"));
        }
        Ok(())
    }

    /// Momentum of mode index `j ∈ 0..=L/2`.
    pub fn momentum(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n_modes as f64
    }

    pub fn stiffness(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.k_tilde * self.momentum(j).powf(self.k_exponent)
        }
    }

    /// Undamped spin-wave frequency `(2g²χK_k)^{1/2}`.
    pub fn spin_wave_frequency(&self, j: usize) -> f64 {
        (2.0 * self.g * self.g * self.chi * self.stiffness(j)).sqrt()
    }

    pub fn damping_sum(&self, j: usize) -> f64 {
        let k = self.momentum(j);
        self.gamma * self.stiffness(j) + 2.0 * self.lambda * self.chi * k * k
    }

    /// Largest admissible step, `0.1 / max_k(ω_k, ΓK_k, 2Λχk²)`.
    pub fn stability_bound(&self) -> f64 {
        let fastest = (0..=self.n_modes / 2)
            .map(|j| {
                let k = self.momentum(j);
                self.spin_wave_frequency(j)
                    .max(self.gamma * self.stiffness(j))
                    .max(2.0 * self.lambda * self.chi * k * k)
            })
            .fold(0.0, f64::max);
        0.1 / fastest.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialModes {
    /// Every mode starts at rest; the zero mode at `φ_0 = 0`.
    Quiet,
    /// Every `k ≠ 0` mode starts at `(φ, m)`.
    Uniform { phi: f64, m: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub times: Vec<f64>,
    /// Momenta of the independent modes `j = 0..=L/2`.
    pub momenta: Vec<f64>,
    /// `phi[r][t][j]`.
    pub phi: Vec<Vec<Vec<Complex64>>>,
    pub m: Vec<Vec<Vec<Complex64>>>,
}

impl ModeTrajectory {
    /// Mode `j` at momentum `−k_j`, from the reality constraint.
    pub fn phi_negative(&self, r: usize, t: usize, j: usize) -> Complex64 {
        self.phi[r][t][j].conj()
    }
}

fn complex_noise<R: Rng>(rng: &mut R, variance: f64, real: bool) -> Complex64 {
    if real {
        Complex64::new(variance.sqrt() * rng.sample::<f64, _>(StandardNormal), 0.0)
    } else {
        let s = (0.5 * variance).sqrt();
        Complex64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
    }
}

/// Euler–Maruyama integration of all independent modes up to `t_max`,
/// recording every `stride` steps.
pub fn integrate_modes(
    params: &HydroParams,
    init: InitialModes,
    noise: bool,
    t_max: f64,
    stride: usize,
    seed: u64,
) -> Result<ModeTrajectory> {
    params.validate()?;
    let bound = params.stability_bound();
    if params.dt > bound {
        return Err(Error::Stability { dt: params.dt, bound });
    }
    let p = *params;
    let stride = stride.max(1);
    let steps = (t_max / p.dt).round() as usize;
    let n_rec = steps / stride + 1;
    let n_ind = p.n_modes / 2 + 1;
    let nyquist = p.n_modes % 2 == 0;
    let k: Vec<f64> = (0..n_ind).map(|j| p.momentum(j)).collect();
    let kk: Vec<f64> = (0..n_ind).map(|j| p.stiffness(j)).collect();
    let times: Vec<f64> = (0..n_rec).map(|i| (i * stride) as f64 * p.dt).collect();
    let var_phi = 2.0 * p.gamma * p.temperature / p.n * p.dt;
    let var_m = 2.0 * p.lambda * p.temperature / p.n * p.dt;
    let runs: Vec<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = trajectory_rng(seed, r as u64);
            let mut phi = vec![Complex64::default(); n_ind];
            let mut m = vec![Complex64::default(); n_ind];
            m[0] = Complex64::new(p.z / p.n, 0.0);
            if let InitialModes::Uniform { phi: a, m: b } = init {
                for j in 1..n_ind {
                    phi[j] = Complex64::new(a, 0.0);
                    m[j] = Complex64::new(b, 0.0);
                }
            }
            let mut rec_phi = Vec::with_capacity(n_rec);
            let mut rec_m = Vec::with_capacity(n_rec);
            rec_phi.push(phi.clone());
            rec_m.push(m.clone());
            for step in 1..=steps {
                for j in 0..n_ind {
                    let real = j == 0 || (nyquist && j == n_ind - 1);
                    let dphi = (m[j] * (2.0 * p.g * p.chi) - phi[j] * (p.gamma * kk[j])) * p.dt;
                    let dm = (phi[j] * (-p.g * kk[j]) - m[j] * (2.0 * p.lambda * p.chi * k[j] * k[j])) * p.dt;
                    phi[j] += dphi;
                    m[j] += dm;
                    if noise {
                        phi[j] += complex_noise(&mut rng, var_phi, real);
                        if j > 0 {
                            m[j] -= complex_noise(&mut rng, var_m, real) * (k[j] * k[j]);
                        }
                    }
                }
                if step % stride == 0 {
                    rec_phi.push(phi.clone());
                    rec_m.push(m.clone());
                }
            }
            (rec_phi, rec_m)
        })
        .collect();
    let (phi, m) = runs.into_iter().unzip();
    Ok(ModeTrajectory { times, momenta: k, phi, m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroModeVariance {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub fit: LineFit,
    /// Bootstrap standard error of the slope.
    pub slope_err: f64,
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Collective-phase random walk `dΦ = 2χZ/N dt + η_φ` at fixed `Z`;
/// sample variance across realizations and its linear growth rate.
pub fn zero_mode_variance(params: &HydroParams, t_max: f64, n_points: usize, seed: u64) -> Result<ZeroModeVariance> {
    params.validate()?;
    if n_points < 3 {
        return Err(invalid("n_points", "need at least three output times"));
    }
    let p = *params;
    let steps = (t_max / p.dt).round() as usize;
    let stride = (steps / (n_points - 1)).max(1);
    let n_rec = steps / stride + 1;
    let drift = 2.0 * p.g * p.chi * p.z / p.n * p.dt;
    let sd = (2.0 * p.gamma * p.temperature / p.n * p.dt).sqrt();
    let paths: Vec<Vec<f64>> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = trajectory_rng(seed, r as u64);
            let mut phi = 0.0;
            let mut rec = Vec::with_capacity(n_rec);
            rec.push(phi);
            for step in 1..=steps {
                phi += drift + sd * rng.sample::<f64, _>(StandardNormal);
                if step % stride == 0 {
                    rec.push(phi);
                }
            }
            rec
        })
        .collect();
    let times: Vec<f64> = (0..n_rec).map(|i| (i * stride) as f64 * p.dt).collect();
    let stats = |idx: &[usize]| -> (Vec<f64>, Vec<f64>) {
        let r = idx.len() as f64;
        let mut mean = vec![0.0; n_rec];
        let mut var = vec![0.0; n_rec];
        for t in 0..n_rec {
            let mu = idx.iter().map(|&i| paths[i][t]).sum::<f64>() / r;
            mean[t] = mu;
            var[t] = idx.iter().map(|&i| (paths[i][t] - mu).powi(2)).sum::<f64>() / (r - 1.0).max(1.0);
        }
        (mean, var)
    };
    let all: Vec<usize> = (0..p.realizations).collect();
    let (mean, variance) = stats(&all);
    let fit = line_fit(&times, &variance, None)?;
    let mut rng = trajectory_rng(seed ^ 0xb007_57a9, u64::MAX);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut idx = vec![0usize; p.realizations];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..p.realizations));
        let (_, v) = stats(&idx);
        slopes.push(line_fit(&times, &v, None)?.slope);
    }
    let sm = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let slope_err = (slopes.iter().map(|s| (s - sm).powi(2)).sum::<f64>() / (slopes.len() - 1) as f64).sqrt();
    Ok(ZeroModeVariance { times, mean, variance, fit, slope_err })
}

/// `Var[Y|Z] = N² m_xy² Var[Φ|Z]`.
pub fn conditional_to_y_variance(var_phi: f64, m_xy: f64, n: f64) -> f64 {
    n * n * m_xy * m_xy * var_phi
}

/// Frequency and decay rate of `x(t) ≈ A e^{−γt} cos(ωt + ϕ)` from the zero
/// crossings and the successive extrema of `|x|`.
pub fn fit_damped_oscillation(times: &[f64], x: &[f64]) -> Result<(f64, f64)> {
    let mut crossings = Vec::new();
    for i in 1..x.len() {
        if x[i - 1] == 0.0 || x[i - 1].signum() != x[i].signum() {
            let f = x[i - 1] / (x[i - 1] - x[i]);
            crossings.push(times[i - 1] + f * (times[i] - times[i - 1]));
        }
    }
    if crossings.len() < 3 {
        return Err(Error::InsufficientData("fewer than three zero crossings".into()));
    }
    let half_period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    let omega = std::f64::consts::PI / half_period;
    let mut tp = Vec::new();
    let mut lp = Vec::new();
    for i in 1..x.len() - 1 {
        let (a, b, c) = (x[i - 1].abs(), x[i].abs(), x[i + 1].abs());
        if b >= a && b > c {
            // parabolic refinement of the peak height in log space
            let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
            let denom = la - 2.0 * lb + lc;
            let off = if denom != 0.0 { 0.5 * (la - lc) / denom } else { 0.0 };
            let h = times[i + 1] - times[i];
            tp.push(times[i] + off * h);
            lp.push(lb - 0.25 * (la - lc) * off);
        }
    }
    if tp.len() < 2 {
        return Err(Error::InsufficientData("fewer than two extrema".into()));
    }
    let decay = -line_fit(&tp, &lp, None)?.slope;
    Ok((omega, decay))
}
