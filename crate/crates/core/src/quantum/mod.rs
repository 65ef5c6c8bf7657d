//! Exact small-`N` dynamics of the coherent state `|x⟩`, sector by sector.
//!
//! Both Hamiltonians conserve collective `Z`, so `|x⟩ = Σ_m |m⟩` evolves
//! block-diagonally. Cross-sector observables are assembled from the
//! collective raising and lowering operators.

pub mod basis;
pub mod hamiltonian;
pub mod krylov;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

pub use basis::{Sector, MAX_SITES};
pub use hamiltonian::{lower, raise, QuantumHamiltonian, SparseSym};
pub use krylov::KrylovConfig;

use crate::error::{invalid, Error, Result};
use crate::math::{golden_section_min, line_fit, LineFit};
use crate::model::LatticeSpec;

pub const MAX_ECHO_SITES: usize = 20;

#[derive(Debug, Clone)]
pub struct SectorState {
    pub sector: Sector,
    pub amplitudes: Vec<Complex64>,
}

impl SectorState {
    pub fn magnetization(&self) -> f64 {
        self.sector.magnetization()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Projections of `|x⟩ = ⊗(|↑⟩+|↓⟩)/√2` onto every sector with
/// `|m| ≤ m_max`; sector `m` carries weight `C(N, N/2+m)/2^N`.
pub fn decompose_css_truncated(n: usize, m_max: f64) -> Result<Vec<SectorState>> {
    if n == 0 || n > MAX_ECHO_SITES {
        return Err(invalid("n", format!("must lie in 1..={MAX_ECHO_SITES} (got {n})")));
    }
    let amp = Complex64::new(0.5f64.powf(n as f64 / 2.0), 0.0);
    let mut out = Vec::new();
    for k in 0..=n {
        let m = k as f64 - n as f64 / 2.0;
        if m.abs() > m_max + 1e-12 {
            continue;
        }
        let sector = Sector::new(n, k)?;
        let amplitudes = vec![amp; sector.dim()];
        out.push(SectorState { sector, amplitudes });
    }
    Ok(out)
}

pub fn decompose_css(n: usize) -> Result<Vec<SectorState>> {
    decompose_css_truncated(n, f64::INFINITY)
}

/// Default truncation `|m| ≤ 5√N/2`.
pub fn default_m_max(n: usize) -> f64 {
    2.5 * (n as f64).sqrt()
}

pub fn krylov_evolve(
    state: &SectorState,
    h: &QuantumHamiltonian,
    t: f64,
    cfg: &KrylovConfig,
) -> Result<SectorState> {
    let mat = h.sector_matrix(&state.sector)?;
    let mut out = state.clone();
    krylov::evolve(&mat, &mut out.amplitudes, t, cfg)?;
    Ok(out)
}

/// Lowest energy (Pauli convention) over the sectors adjacent to `Z = 0`.
pub fn ground_state_energy(spec: &LatticeSpec) -> Result<f64> {
    let n = spec.n_sites();
    if n > MAX_ECHO_SITES {
        return Err(invalid("n", format!("exact ground states need N ≤ {MAX_ECHO_SITES}")));
    }
    let h = QuantumHamiltonian::Xxz(spec.clone());
    let lo = (n / 2).saturating_sub(1);
    let hi = (n.div_ceil(2) + 1).min(n);
    let mut best = f64::INFINITY;
    for k in lo..=hi {
        let mat = h.sector_matrix(&Sector::new(n, k)?)?;
        best = best.min(krylov::ground_state_energy(&mat, 400)?);
    }
    Ok(best)
}

/// Sector blocks of a Hamiltonian, evolved jointly on a time grid.
struct Propagator {
    mats: Vec<SparseSym>,
    states: Vec<SectorState>,
    cfg: KrylovConfig,
}

impl Propagator {
    fn new(h: &QuantumHamiltonian, states: Vec<SectorState>, cfg: KrylovConfig) -> Result<Self> {
        let mats = states
            .iter()
            .map(|s| h.sector_matrix(&s.sector))
            .collect::<Result<Vec<_>>>()?;
        Ok(Propagator { mats, states, cfg })
    }

    fn advance(&mut self, dt: f64) -> Result<()> {
        let cfg = self.cfg;
        self.states
            .par_iter_mut()
            .zip(self.mats.par_iter())
            .map(|(s, m)| krylov::evolve(m, &mut s.amplitudes, dt, &cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(())
    }
}

/// `⟨a|S⁺|b⟩` with `a` one sector above `b`.
fn raising_element(a: &SectorState, b: &SectorState, buf: &mut Vec<Complex64>) -> Complex64 {
    buf.resize(a.sector.dim(), Complex64::default());
    raise(&b.sector, &a.sector, &b.amplitudes, buf);
    a.amplitudes.iter().zip(buf.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    /// Lower sector of the adjacent pair.
    pub m: f64,
    pub delta_e: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiExtraction {
    pub chi: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub splittings: Vec<Splitting>,
    pub monotone: bool,
    /// Set when `R² < 0.99` or the splittings are not increasing in `m`.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_times: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        (0..self.n_times)
            .map(|i| self.t_max * i as f64 / (self.n_times - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || self.n_times < 8 {
            return Err(invalid("time_grid", "need t_max > 0 and at least 8 points"));
        }
        Ok(())
    }
}

/// Frequency `ω` of `c(t) ≈ A e^{iωt}` on a uniform grid: FFT peak, then
/// maximization of `|Σ c_k e^{−iωt_k}|²` around it.
pub fn dominant_frequency(samples: &[Complex64], dt: f64) -> (f64, f64) {
    let n = samples.len();
    let pad = (8 * n).next_power_of_two();
    let mut buf = vec![Complex64::default(); pad];
    buf[..n].copy_from_slice(samples);
    FftPlanner::new().plan_fft_forward(pad).process(&mut buf);
    let (j, _) = buf
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .unwrap();
    let step = 2.0 * std::f64::consts::PI / (pad as f64 * dt);
    let j = if j > pad / 2 { j as f64 - pad as f64 } else { j as f64 };
    let power = |w: f64| -> f64 {
        let s: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, -w * k as f64 * dt))
            .sum();
        -s.norm_sqr()
    };
    let (w, p) = golden_section_min(power, (j - 1.0) * step, (j + 1.0) * step, 1e-15);
    (w, (-p).sqrt() / n as f64)
}

/// Effective twisting strength from the splittings of the adjacent sector
/// pairs `(m, m+1)`, fitted as `ΔE = χ (2m+1)/N`.
pub fn extract_chi(
    h: &QuantumHamiltonian,
    lower_m: &[f64],
    grid: TimeGrid,
    cfg: &KrylovConfig,
) -> Result<ChiExtraction> {
    grid.validate()?;
    let n = h.n_sites();
    if lower_m.len() < 2 {
        return Err(Error::InsufficientData("need at least two sector pairs".into()));
    }
    let mut needed: Vec<f64> = lower_m.iter().flat_map(|&m| [m, m + 1.0]).collect();
    needed.sort_by(|a, b| a.total_cmp(b));
    needed.dedup();
    let amp = Complex64::new(0.5f64.powf(n as f64 / 2.0), 0.0);
    let states = needed
        .iter()
        .map(|&m| {
            let sector = Sector::with_magnetization(n, m)?;
            let amplitudes = vec![amp; sector.dim()];
            Ok(SectorState { sector, amplitudes })
        })
        .collect::<Result<Vec<_>>>()?;
    let index = |m: f64| needed.iter().position(|&x| (x - m).abs() < 1e-9).unwrap();
    let mut prop = Propagator::new(h, states, *cfg)?;
    let times = grid.times();
    let dt = times[1] - times[0];
    let mut signals = vec![Vec::with_capacity(times.len()); lower_m.len()];
    let mut buf = Vec::new();
    for step in 0..times.len() {
        if step > 0 {
            prop.advance(dt)?;
        }
        for (p, &m) in lower_m.iter().enumerate() {
            let (lo, hi) = (index(m), index(m + 1.0));
            signals[p].push(raising_element(&prop.states[hi], &prop.states[lo], &mut buf));
        }
    }
    let mut splittings = Vec::new();
    for (p, &m) in lower_m.iter().enumerate() {
        let (w, a) = dominant_frequency(&signals[p], dt);
        splittings.push(Splitting { m, delta_e: w, amplitude: a });
    }
    let x: Vec<f64> = splittings.iter().map(|s| (2.0 * s.m + 1.0) / n as f64).collect();
    let y: Vec<f64> = splittings.iter().map(|s| s.delta_e).collect();
    let fit: LineFit = line_fit(&x, &y, None)?;
    let mut order = splittings.clone();
    order.sort_by(|a, b| a.m.total_cmp(&b.m));
    let monotone = order.windows(2).all(|w| w[1].delta_e > w[0].delta_e);
    Ok(ChiExtraction {
        chi: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        flagged: fit.r_squared < 0.99 || !monotone,
        monotone,
        splittings,
    })
}

/// Lower members of the adjacent pairs nearest `Z = 0`.
pub fn default_chi_pairs(n: usize) -> Vec<f64> {
    let c = -(n as f64 / 2.0).fract();
    (-2..=1).map(|k| k as f64 + c).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoConfig {
    pub hamiltonian: QuantumHamiltonian,
    /// Counter-rotation strength; extracted on `chi_grid` when absent.
    pub chi: Option<f64>,
    pub grid: TimeGrid,
    pub chi_grid: TimeGrid,
    #[serde(default)]
    pub krylov: KrylovConfig,
}

impl EchoConfig {
    pub fn xxz(spec: LatticeSpec, t_max: f64, n_times: usize) -> Self {
        EchoConfig {
            hamiltonian: QuantumHamiltonian::Xxz(spec),
            chi: None,
            grid: TimeGrid { t_max, n_times },
            chi_grid: TimeGrid { t_max: 60.0, n_times: 600 },
            krylov: KrylovConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoSeries {
    pub n_sites: usize,
    pub chi: f64,
    pub times: Vec<f64>,
    pub var_q: Vec<f64>,
    /// CSS weight of the sectors left out by the truncation.
    pub dropped_weight: f64,
}

/// `⟨x|e^{it(H−χZ²/N)} Y² e^{−it(H−χZ²/N)}|x⟩` on the configured grid.
pub fn var_q_conditional(cfg: &EchoConfig) -> Result<EchoSeries> {
    cfg.grid.validate()?;
    let h = &cfg.hamiltonian;
    let n = h.n_sites();
    let chi = match cfg.chi {
        Some(c) => c,
        None => extract_chi(h, &default_chi_pairs(n), cfg.chi_grid, &cfg.krylov)?.chi,
    };
    let states = decompose_css_truncated(n, default_m_max(n))?;
    let kept: f64 = states.iter().map(|s| s.norm_sqr()).sum();
    let mut prop = Propagator::new(h, states, cfg.krylov)?;
    let times = cfg.grid.times();
    let mut var_q = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    let mut scratch = Vec::new();
    for &t in &times {
        prop.advance(t - prev)?;
        prev = t;
        let echoed: Vec<SectorState> = prop
            .states
            .iter()
            .map(|s| {
                let m = s.magnetization();
                let ph = Complex64::from_polar(1.0, chi * m * m * t / n as f64);
                SectorState {
                    sector: s.sector.clone(),
                    amplitudes: s.amplitudes.iter().map(|a| a * ph).collect(),
                }
            })
            .collect();
        var_q.push(y_squared(&echoed, &mut scratch));
    }
    Ok(EchoSeries {
        n_sites: n,
        chi,
        times,
        var_q,
        dropped_weight: (1.0 - kept).max(0.0),
    })
}

/// `‖Yψ‖²` for a state given by consecutive sector blocks.
fn y_squared(states: &[SectorState], buf: &mut Vec<Complex64>) -> f64 {
    let mut total = 0.0;
    let find = |k: usize| states.iter().position(|s| s.sector.n_up() == k);
    let n = states[0].sector.n_sites();
    let kmin = states.iter().map(|s| s.sector.n_up()).min().unwrap_or(0);
    let kmax = states.iter().map(|s| s.sector.n_up()).max().unwrap_or(0);
    for k in kmin.saturating_sub(1)..=(kmax + 1).min(n) {
        let target = Sector::new(n, k).expect("valid sector");
        let mut acc = vec![Complex64::default(); target.dim()];
        if k >= 1 {
            if let Some(i) = find(k - 1) {
                buf.resize(target.dim(), Complex64::default());
                raise(&states[i].sector, &target, &states[i].amplitudes, buf);
                acc.iter_mut().zip(buf.iter()).for_each(|(a, b)| *a += b);
            }
        }
        if let Some(i) = find(k + 1) {
            buf.resize(target.dim(), Complex64::default());
            lower(&states[i].sector, &target, &states[i].amplitudes, buf);
            acc.iter_mut().zip(buf.iter()).for_each(|(a, b)| *a -= b);
        }
        // Y = (S⁺ − S⁻)/(2i)
        total += 0.25 * acc.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense_evolve(h: &SparseSym, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let eig = h.to_dense().symmetric_eigen();
        let q: DMatrix<f64> = eig.eigenvectors;
        let n = psi.len();
        let mut out = vec![Complex64::default(); n];
        for l in 0..n {
            let overlap: Complex64 = (0..n).map(|i| psi[i] * q[(i, l)]).sum();
            let ph = overlap * Complex64::from_polar(1.0, -eig.eigenvalues[l] * t);
            for i in 0..n {
                out[i] += ph * q[(i, l)];
            }
        }
        out
    }

    #[test]
    fn css_weights_are_binomial() {
        let states = decompose_css(2).unwrap();
        let w: Vec<f64> = states.iter().map(|s| s.norm_sqr()).collect();
        assert!((w[0] - 0.25).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15 && (w[2] - 0.25).abs() < 1e-15);
        for n in [5, 10, 16] {
            let states = decompose_css(n).unwrap();
            let total: f64 = states.iter().map(|s| s.norm_sqr()).sum();
            let var: f64 = states.iter().map(|s| s.norm_sqr() * s.magnetization().powi(2)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((var - n as f64 / 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn krylov_matches_dense_exponential() {
        let spec = LatticeSpec::power_law(1, 10, 1.5, -0.6);
        let h = QuantumHamiltonian::Xxz(spec);
        for state in decompose_css(10).unwrap().into_iter().filter(|s| s.sector.dim() > 1) {
            let mat = h.sector_matrix(&state.sector).unwrap();
            let want = dense_evolve(&mat, &state.amplitudes, 3.7);
            let got = krylov_evolve(&state, &h, 3.7, &KrylovConfig::default()).unwrap();
            let err: f64 = want.iter().zip(&got.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-8, "m = {}: {err}", state.magnetization());
            assert!((got.norm_sqr() - state.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let s = &decompose_css(8).unwrap()[4];
        let h = QuantumHamiltonian::Xxz(LatticeSpec::power_law(1, 8, 1.5, 0.0));
        let out = krylov_evolve(s, &h, 0.0, &KrylovConfig::default()).unwrap();
        assert_eq!(out.amplitudes, s.amplitudes);
    }

    #[test]
    fn planted_twisting_strength_is_recovered() {
        let chi0 = 1.7;
        let h = QuantumHamiltonian::OneAxisTwisting { n_sites: 12, chi: chi0 };
        let ex = extract_chi(&h, &default_chi_pairs(12), TimeGrid { t_max: 40.0, n_times: 400 }, &KrylovConfig::default())
            .unwrap();
        assert!((ex.chi - chi0).abs() < 1e-6 * chi0, "{ex:?}");
        assert!(ex.monotone);
    }

    #[test]
    fn echo_of_pure_twisting_is_frozen() {
        let h = QuantumHamiltonian::OneAxisTwisting { n_sites: 10, chi: 2.0 };
        let cfg = EchoConfig {
            hamiltonian: h,
            chi: Some(2.0),
            grid: TimeGrid { t_max: 5.0, n_times: 11 },
            chi_grid: TimeGrid { t_max: 1.0, n_times: 8 },
            krylov: KrylovConfig::default(),
        };
        let series = var_q_conditional(&cfg).unwrap();
        for v in &series.var_q {
            assert!((v - 2.5).abs() < 1e-10, "{v}");
        }
    }
}
