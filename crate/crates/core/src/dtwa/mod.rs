//! Discrete truncated Wigner sampling and classical mean-field evolution.
//!
//! Each spin is a classical vector whose components start at `±1/2` (the
//! discrete Wigner phase-space points of a qubit). The classical energy is
//! the Hamiltonian with `σ_i → 2 s_i`, and each trajectory obeys
//! `ds_i/dt = s_i × B_i` with `B_i = −∂H_cl/∂s_i`. Ensemble averages of
//! collective moments estimate symmetrically ordered quantum expectations.
//!
//! Trajectory `k` draws from ChaCha8 stream `k` keyed by the master seed, and
//! results are reduced in trajectory order, so outputs do not depend on the
//! number of workers.

pub(crate) mod field;

pub use field::{FieldEvaluator, FieldMethod, FieldScratch};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::NeumaierSum;
use crate::model::{eta_zero, LatticeSpec};

/// Maximum fraction of aborted trajectories tolerated by [`evolve`].
pub const MAX_ABORT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct SpinEnsemble {
    n_sites: usize,
    n_traj: usize,
    spins: Vec<[f64; 3]>,
    pub master_seed: u64,
    pub polarization: f64,
    pub z_constrained: bool,
}

impl SpinEnsemble {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_traj(&self) -> usize {
        self.n_traj
    }

    pub fn trajectory(&self, k: usize) -> &[[f64; 3]] {
        &self.spins[k * self.n_sites..(k + 1) * self.n_sites]
    }

    pub fn collective(&self, k: usize) -> [f64; 3] {
        collective(self.trajectory(k))
    }

    /// Build an ensemble from explicit configurations (one `Vec` per trajectory).
    pub fn from_configurations(configs: Vec<Vec<[f64; 3]>>, master_seed: u64) -> Result<Self> {
        let n_traj = configs.len();
        let n_sites = configs.first().map_or(0, |c| c.len());
        if n_traj == 0 || n_sites == 0 || configs.iter().any(|c| c.len() != n_sites) {
            return Err(invalid("configs", "need equal-length, non-empty configurations"));
        }
        Ok(SpinEnsemble {
            n_sites,
            n_traj,
            spins: configs.into_iter().flatten().collect(),
            master_seed,
            polarization: f64::NAN,
            z_constrained: false,
        })
    }
}

pub fn collective(spins: &[[f64; 3]]) -> [f64; 3] {
    let mut s = [NeumaierSum::default(); 3];
    for v in spins {
        for c in 0..3 {
            s[c].add(v[c]);
        }
    }
    [s[0].total(), s[1].total(), s[2].total()]
}

pub fn trajectory_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Discrete Wigner sampling of the x-polarized product state with
/// polarization `p`: `sˣ = +1/2` with probability `(1+p)/2`, `sʸ` and `sᶻ`
/// fair `±1/2`. With `z_constrained`, the `sᶻ` components are a random
/// permutation of exactly `N/2` up and `N/2` down values.
pub fn sample_initial(
    spec: &LatticeSpec,
    polarization: f64,
    n_traj: usize,
    seed: u64,
    z_constrained: bool,
) -> Result<SpinEnsemble> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&polarization) {
        return Err(invalid("polarization", format!("must lie in [0, 1] (got {polarization})")));
    }
    if n_traj == 0 {
        return Err(invalid("trajectories", "need at least one trajectory"));
    }
    let n = spec.n_sites();
    if z_constrained && n % 2 == 1 {
        return Err(invalid("z_constrained", format!("Z = 0 needs an even number of sites (got {n})")));
    }
    let p_up = 0.5 * (1.0 + polarization);
    let mut spins = Vec::with_capacity(n * n_traj);
    let mut zs: Vec<f64> = (0..n).map(|i| if i < n / 2 { 0.5 } else { -0.5 }).collect();
    for k in 0..n_traj {
        let mut rng = trajectory_rng(seed, k as u64);
        let start = spins.len();
        for _ in 0..n {
            let x = if rng.random_bool(p_up) { 0.5 } else { -0.5 };
            let y = if rng.random_bool(0.5) { 0.5 } else { -0.5 };
            let z = if z_constrained {
                0.0
            } else if rng.random_bool(0.5) {
                0.5
            } else {
                -0.5
            };
            spins.push([x, y, z]);
        }
        if z_constrained {
            zs.shuffle(&mut rng);
            for (s, &z) in spins[start..].iter_mut().zip(&zs) {
                s[2] = z;
            }
        }
    }
    Ok(SpinEnsemble {
        n_sites: n,
        n_traj,
        spins,
        master_seed: seed,
        polarization,
        z_constrained,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Record observables every `stride` steps.
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub field: FieldMethod,
}

fn default_stride() -> usize {
    10
}

impl IntegratorConfig {
    /// Step `0.1 / (J_max η(0))`, where `J_max = max(|J⊥|, |J_z|)` sets the
    /// local precession scale.
    pub fn default_dt(spec: &LatticeSpec) -> Result<f64> {
        let scale = spec.j_perp.abs().max(spec.j_z.abs()) * eta_zero(spec)?;
        Ok(0.1 / scale.max(f64::MIN_POSITIVE))
    }

    pub fn for_spec(spec: &LatticeSpec, t_max: f64, n_outputs: usize) -> Result<Self> {
        let dt0 = Self::default_dt(spec)?;
        let n_outputs = n_outputs.max(1);
        let steps = (t_max / dt0).ceil().max(1.0) as usize;
        let stride = steps.div_ceil(n_outputs).max(1);
        let total = stride * n_outputs;
        Ok(IntegratorConfig {
            dt: t_max / total as f64,
            t_max,
            stride,
            field: FieldMethod::Auto,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be positive (got {})", self.dt)));
        }
        if !(self.t_max >= self.dt) {
            return Err(invalid("t_max", format!("must be at least dt (got {})", self.t_max)));
        }
        if self.stride == 0 {
            return Err(invalid("stride", "must be positive"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn output_times(&self) -> Vec<f64> {
        let steps = self.n_steps();
        (0..=steps / self.stride)
            .map(|k| (k * self.stride) as f64 * self.dt)
            .collect()
    }
}

/// Classical energy `H_cl = −(1/2) Σ_i s_i · B_i`.
pub fn classical_energy(field: &FieldEvaluator, spins: &[[f64; 3]]) -> f64 {
    let mut b = vec![[0.0; 3]; spins.len()];
    field.apply(spins, &mut b, &mut FieldScratch::default());
    let mut e = NeumaierSum::default();
    for (s, f) in spins.iter().zip(&b) {
        e.add(-0.5 * (s[0] * f[0] + s[1] * f[1] + s[2] * f[2]));
    }
    e.total()
}

/// `ds_i/dt = s_i × B_i`.
pub fn derivative(
    field: &FieldEvaluator,
    spins: &[[f64; 3]],
    out: &mut [[f64; 3]],
    scratch: &mut FieldScratch,
) {
    field.apply(spins, out, scratch);
    for (o, s) in out.iter_mut().zip(spins) {
        let b = *o;
        *o = [
            s[1] * b[2] - s[2] * b[1],
            s[2] * b[0] - s[0] * b[2],
            s[0] * b[1] - s[1] * b[0],
        ];
    }
}

/// Reusable RK4 stepper for one trajectory.
pub struct Rk4 {
    k1: Vec<[f64; 3]>,
    k2: Vec<[f64; 3]>,
    k3: Vec<[f64; 3]>,
    k4: Vec<[f64; 3]>,
    tmp: Vec<[f64; 3]>,
    scratch: FieldScratch,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        let z = vec![[0.0; 3]; n];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
            scratch: FieldScratch::default(),
        }
    }

    pub fn step(&mut self, field: &FieldEvaluator, s: &mut [[f64; 3]], dt: f64) {
        let h = 0.5 * dt;
        derivative(field, s, &mut self.k1, &mut self.scratch);
        axpy(&mut self.tmp, s, &self.k1, h);
        derivative(field, &self.tmp, &mut self.k2, &mut self.scratch);
        axpy(&mut self.tmp, s, &self.k2, h);
        derivative(field, &self.tmp, &mut self.k3, &mut self.scratch);
        axpy(&mut self.tmp, s, &self.k3, dt);
        derivative(field, &self.tmp, &mut self.k4, &mut self.scratch);
        let c = dt / 6.0;
        for i in 0..s.len() {
            for a in 0..3 {
                s[i][a] += c
                    * (self.k1[i][a] + 2.0 * self.k2[i][a] + 2.0 * self.k3[i][a] + self.k4[i][a]);
            }
        }
    }
}

fn axpy(out: &mut [[f64; 3]], x: &[[f64; 3]], k: &[[f64; 3]], h: f64) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(k) {
        *o = [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    }
}

/// Integrates one configuration in place, calling `observe(step_index, t,
/// spins)` at `t = 0` and every `stride` steps. Returns `false` when the
/// state became non-finite and the trajectory was abandoned.
pub fn integrate_trajectory<F>(
    field: &FieldEvaluator,
    cfg: &IntegratorConfig,
    spins: &mut [[f64; 3]],
    mut observe: F,
) -> bool
where
    F: FnMut(usize, f64, &[[f64; 3]]),
{
    let mut rk = Rk4::new(spins.len());
    observe(0, 0.0, spins);
    let steps = cfg.n_steps();
    for step in 1..=steps {
        rk.step(field, spins, cfg.dt);
        if step % cfg.stride == 0 {
            if !spins.iter().all(|s| s.iter().all(|x| x.is_finite())) {
                return false;
            }
            observe(step, step as f64 * cfg.dt, spins);
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbortedTrajectory {
    pub master_seed: u64,
    pub stream: u64,
}

/// Collective spin `(X, Y, Z)` of every surviving trajectory at every output
/// time; the sufficient statistic for all ensemble observables.
#[derive(Debug, Clone)]
pub struct EnsembleRecord {
    pub times: Vec<f64>,
    pub n_sites: usize,
    pub z_constrained: bool,
    /// `samples[k][t]` for trajectory `k` and output time index `t`.
    pub samples: Vec<Vec<[f64; 3]>>,
    pub aborted: Vec<AbortedTrajectory>,
}

impl EnsembleRecord {
    pub fn n_traj(&self) -> usize {
        self.samples.len()
    }

    /// Collective spins of all trajectories at output index `t`.
    pub fn at(&self, t: usize) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| s[t]).collect()
    }
}

/// Evolves every trajectory of `ensemble` on `workers` threads (0 = all
/// available cores).
pub fn evolve(
    ensemble: &SpinEnsemble,
    spec: &LatticeSpec,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<EnsembleRecord> {
    cfg.validate()?;
    if ensemble.n_sites() != spec.n_sites() {
        return Err(invalid(
            "ensemble",
            format!("{} sites sampled for a {}-site lattice", ensemble.n_sites(), spec.n_sites()),
        ));
    }
    let field = FieldEvaluator::new(spec, cfg.field)?;
    let times = cfg.output_times();
    let run_one = |k: usize| -> Option<Vec<[f64; 3]>> {
        let mut spins = ensemble.trajectory(k).to_vec();
        let mut out = Vec::with_capacity(times.len());
        let ok = integrate_trajectory(&field, cfg, &mut spins, |_, _, s| out.push(collective(s)));
        ok.then_some(out)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    let results: Vec<Option<Vec<[f64; 3]>>> =
        pool.install(|| (0..ensemble.n_traj()).into_par_iter().map(run_one).collect());

    let mut samples = Vec::with_capacity(results.len());
    let mut aborted = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Some(s) => samples.push(s),
            None => aborted.push(AbortedTrajectory {
                master_seed: ensemble.master_seed,
                stream: k as u64,
            }),
        }
    }
    if aborted.len() as f64 > MAX_ABORT_FRACTION * ensemble.n_traj() as f64 {
        return Err(Error::TooManyAborts {
            aborted: aborted.len(),
            total: ensemble.n_traj(),
            first_stream: aborted[0].stream,
        });
    }
    Ok(EnsembleRecord {
        times,
        n_sites: ensemble.n_sites(),
        z_constrained: ensemble.z_constrained,
        samples,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_polarized_sampling() {
        let spec = LatticeSpec::power_law(1, 16, 1.5, 0.0);
        let e = sample_initial(&spec, 1.0, 50, 3, false).unwrap();
        for k in 0..e.n_traj() {
            assert!(e.trajectory(k).iter().all(|s| s[0] == 0.5));
            assert_eq!(e.collective(k)[0], 8.0);
            assert!(e.trajectory(k).iter().all(|s| s[1].abs() == 0.5 && s[2].abs() == 0.5));
        }
    }

    #[test]
    fn constrained_sampling_balances_z() {
        let spec = LatticeSpec::power_law(1, 10, 1.5, 0.0);
        let e = sample_initial(&spec, 0.8, 30, 11, true).unwrap();
        for k in 0..e.n_traj() {
            assert_eq!(e.collective(k)[2], 0.0);
        }
        let odd = LatticeSpec::power_law(1, 9, 1.5, 0.0);
        assert!(sample_initial(&odd, 1.0, 3, 1, true).is_err());
    }

    #[test]
    fn rejects_bad_sampling_parameters() {
        let spec = LatticeSpec::power_law(1, 8, 1.5, 0.0);
        assert!(sample_initial(&spec, 1.2, 3, 1, false).is_err());
        assert!(sample_initial(&spec, 0.5, 0, 1, false).is_err());
    }

    #[test]
    fn output_grid() {
        let cfg = IntegratorConfig {
            dt: 0.1,
            t_max: 1.0,
            stride: 5,
            field: FieldMethod::Dense,
        };
        assert_eq!(cfg.n_steps(), 10);
        let t = cfg.output_times();
        assert_eq!(t.len(), 3);
        assert!((t[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_state_aborts_trajectory() {
        let spec = LatticeSpec::power_law(1, 4, 1.5, 0.0);
        let field = FieldEvaluator::new(&spec, FieldMethod::Dense).unwrap();
        let cfg = IntegratorConfig { dt: 0.01, t_max: 0.1, stride: 1, field: FieldMethod::Dense };
        let mut s = vec![[0.5, 0.5, 0.5]; 4];
        s[2][1] = f64::NAN;
        assert!(!integrate_trajectory(&field, &cfg, &mut s, |_, _, _| {}));
    }
}
