//! Squeezing, XY magnetization, conditional variance and Fisher-information
//! diagnostics.
//!
//! Collective spins are `X = Σ sˣ_i` etc. (equivalently `Σ σˣ_i / 2`). Raw
//! `m_xy` of a discrete Wigner ensemble carries an `O(1/N)` floor from the
//! transverse noise of each spin; it is reported as is.

use serde::{Deserialize, Serialize};

use crate::dtwa::EnsembleRecord;
use crate::error::{Error, Result};
use crate::math::{jackknife, median, NeumaierSum};

/// Collective first and second moments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub n_sites: f64,
    pub mean: [f64; 3],
    /// Symmetrized raw second moments `⟨(S_a S_b + S_b S_a)/2⟩`.
    pub second: [[f64; 3]; 3],
}

impl Moments {
    pub fn from_samples(n_sites: usize, samples: &[[f64; 3]]) -> Self {
        let mut m = [NeumaierSum::default(); 3];
        let mut s = [[NeumaierSum::default(); 3]; 3];
        for v in samples {
            for a in 0..3 {
                m[a].add(v[a]);
                for b in a..3 {
                    s[a][b].add(v[a] * v[b]);
                }
            }
        }
        let inv = 1.0 / samples.len() as f64;
        let mut out = Moments {
            n_sites: n_sites as f64,
            ..Default::default()
        };
        for a in 0..3 {
            out.mean[a] = m[a].total() * inv;
            for b in a..3 {
                out.second[a][b] = s[a][b].total() * inv;
                out.second[b][a] = out.second[a][b];
            }
        }
        out
    }

    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        self.second[a][b] - self.mean[a] * self.mean[b]
    }

    pub fn var_y(&self) -> f64 {
        self.covariance(1, 1)
    }

    pub fn var_z(&self) -> f64 {
        self.covariance(2, 2)
    }

    pub fn cov_zy(&self) -> f64 {
        self.covariance(1, 2)
    }
}

/// Smaller eigenvalue of the `(Z, Y)` covariance matrix.
pub fn min_transverse_variance(m: &Moments) -> f64 {
    let (a, c, b) = (m.var_z(), m.var_y(), m.cov_zy());
    let half_sum = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    half_sum - (half_diff * half_diff + b * b).sqrt()
}

/// Floor on `⟨X⟩²/N²` below which the state counts as depolarized.
pub const DEPOLARIZED_FLOOR: f64 = 1e-12;

/// `ξ² = N λ_min / ⟨X⟩²`; `None` when the state is depolarized.
pub fn squeezing(m: &Moments) -> Option<f64> {
    let x2 = m.mean[0] * m.mean[0];
    if x2 < DEPOLARIZED_FLOOR * m.n_sites * m.n_sites {
        return None;
    }
    Some(m.n_sites * min_transverse_variance(m) / x2)
}

/// `m_xy = [⟨X² + Y²⟩ / N²]^{1/2}`.
pub fn xy_magnetization(m: &Moments) -> f64 {
    ((m.second[0][0] + m.second[1][1]).max(0.0)).sqrt() / m.n_sites
}

/// Pure-state QFI `4 Var(n̂·S)` for a (not necessarily normalized) direction.
pub fn qfi(m: &Moments, direction: [f64; 3]) -> f64 {
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n = direction.map(|x| x / norm);
    let mut v = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            v += n[a] * n[b] * m.covariance(a, b);
        }
    }
    4.0 * v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionalMode {
    /// Group trajectories by their conserved `Z` into unit-width bins.
    ZBinned,
    /// Plain `Var(Y)` of an ensemble sampled at `Z = 0`.
    ZConstrained,
}

/// Minimum trajectories per `Z` bin.
pub const MIN_BIN_POPULATION: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalVariance {
    pub value: f64,
    /// `(Z, population)` of bins dropped for holding fewer than
    /// [`MIN_BIN_POPULATION`] trajectories.
    pub dropped_bins: Vec<(f64, usize)>,
}

/// `Var[Y|Z]` from collective samples.
///
/// In binned mode the bin key is the trajectory's initial `Z` (conserved by
/// the dynamics); the result is the population-weighted mean of the
/// within-bin variances.
pub fn conditional_variance(
    z_keys: &[f64],
    samples: &[[f64; 3]],
    mode: ConditionalMode,
) -> Result<ConditionalVariance> {
    match mode {
        ConditionalMode::ZConstrained => {
            if z_keys.iter().any(|z| z.abs() > 1e-6) {
                return Err(Error::InvalidParameter {
                    name: "mode",
                    reason: "z-constrained mode requires a Z = 0 ensemble".into(),
                });
            }
            Ok(ConditionalVariance {
                value: population_variance(samples.iter().map(|s| s[1])),
                dropped_bins: Vec::new(),
            })
        }
        ConditionalMode::ZBinned => {
            let mut bins: std::collections::BTreeMap<i64, Vec<f64>> = Default::default();
            for (z, s) in z_keys.iter().zip(samples) {
                bins.entry((z * 2.0).round() as i64).or_default().push(s[1]);
            }
            let mut weighted = NeumaierSum::default();
            let mut kept = 0usize;
            let mut dropped = Vec::new();
            for (key, ys) in &bins {
                if ys.len() < MIN_BIN_POPULATION {
                    dropped.push((*key as f64 / 2.0, ys.len()));
                    continue;
                }
                weighted.add(ys.len() as f64 * population_variance(ys.iter().copied()));
                kept += ys.len();
            }
            if kept == 0 {
                return Err(Error::InsufficientData(
                    "every Z bin holds fewer than 10 trajectories".into(),
                ));
            }
            Ok(ConditionalVariance {
                value: weighted.total() / kept as f64,
                dropped_bins: dropped,
            })
        }
    }
}

fn population_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut n = 0usize;
    let mut s = NeumaierSum::default();
    for v in values.clone() {
        s.add(v);
        n += 1;
    }
    let mean = s.total() / n as f64;
    let mut q = NeumaierSum::default();
    for v in values {
        q.add((v - mean) * (v - mean));
    }
    q.total() / n as f64
}

/// One output time of an ensemble or quantum run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub t: f64,
    pub moments: Moments,
    pub xi2: Option<f64>,
    pub m_xy: f64,
    pub var_y_given_z: Option<f64>,
    pub n_traj: usize,
    pub err_xi2: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub n_sites: usize,
    pub rows: Vec<ObservableRow>,
}

/// Number of jackknife blocks used for error bars.
pub const JACKKNIFE_BLOCKS: usize = 20;

impl ObservableSeries {
    /// Reduces an ensemble record. The conditional variance is computed in
    /// `conditional` mode when given.
    pub fn from_record(record: &EnsembleRecord, conditional: Option<ConditionalMode>) -> Result<Self> {
        let n = record.n_sites;
        let z_keys: Vec<f64> = record.samples.iter().map(|s| s[0][2]).collect();
        let rows = record
            .times
            .iter()
            .enumerate()
            .map(|(ti, &t)| {
                let samples = record.at(ti);
                let moments = Moments::from_samples(n, &samples);
                let xi2 = squeezing(&moments);
                let err_xi2 = if xi2.is_some() {
                    jackknife(&samples, JACKKNIFE_BLOCKS, |s| {
                        squeezing(&Moments::from_samples(n, s)).unwrap_or(f64::NAN)
                    })
                    .1
                } else {
                    f64::NAN
                };
                let var_y_given_z = match conditional {
                    Some(mode) => Some(conditional_variance(&z_keys, &samples, mode)?.value),
                    None => None,
                };
                Ok(ObservableRow {
                    t,
                    moments,
                    xi2,
                    m_xy: xy_magnetization(&moments),
                    var_y_given_z,
                    n_traj: samples.len(),
                    err_xi2,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ObservableSeries { n_sites: n, rows })
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn xi2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.xi2.unwrap_or(f64::NAN)).collect()
    }

    pub fn m_xy(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.m_xy).collect()
    }

    /// Median of `m_xy(t)` over `t ∈ [t_a, t_b]`; defaults to the last third
    /// of the run.
    pub fn m_xy_plateau(&self, window: Option<(f64, f64)>) -> f64 {
        let (ta, tb) = window.unwrap_or_else(|| {
            let t_end = self.rows.last().map_or(0.0, |r| r.t);
            (2.0 * t_end / 3.0, t_end)
        });
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.t >= ta && r.t <= tb)
            .map(|r| r.m_xy)
            .collect();
        median(&vals)
    }
}

/// Two-point correlation decay classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationDecay {
    Exponential { length: f64 },
    Power { p: f64 },
}

/// QFI grows as `N^qfi`, phase sensitivity falls as `N^-sensitivity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiScaling {
    pub qfi: f64,
    pub sensitivity: f64,
}

/// Order → metrology dictionary for pure states.
pub fn classify_qfi_scaling(decay: CorrelationDecay, d: u32) -> Result<QfiScaling> {
    let d_f = d as f64;
    let qfi = match decay {
        CorrelationDecay::Exponential { .. } => 1.0,
        CorrelationDecay::Power { p } => {
            if p == d_f || p == d_f - 1.0 {
                return Err(Error::MarginalCase { p, d });
            }
            if p > d_f {
                1.0
            } else if p > d_f - 1.0 {
                1.0 + p - d_f
            } else {
                2.0
            }
        }
    };
    Ok(QfiScaling {
        qfi,
        sensitivity: qfi / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn css_moments(n: f64) -> Moments {
        Moments {
            n_sites: n,
            mean: [n / 2.0, 0.0, 0.0],
            second: [[n * n / 4.0, 0.0, 0.0], [0.0, n / 4.0, 0.0], [0.0, 0.0, n / 4.0]],
        }
    }

    #[test]
    fn coherent_state_is_at_standard_quantum_limit() {
        assert!((squeezing(&css_moments(100.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!((qfi(&css_moments(100.0), [0.0, 0.0, 1.0]) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn depolarized_sentinel() {
        let mut m = css_moments(10.0);
        m.mean[0] = 0.0;
        assert_eq!(squeezing(&m), None);
    }

    #[test]
    fn eigenvalue_matches_angle_scan() {
        let mut m = css_moments(50.0);
        m.second[2][2] = 9.0;
        m.second[1][1] = 31.0;
        m.second[1][2] = -7.5;
        m.second[2][1] = -7.5;
        let lam = min_transverse_variance(&m);
        let scan = (0..10_000)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 10_000.0;
                let (c, s) = (th.cos(), th.sin());
                c * c * m.var_z() + s * s * m.var_y() + 2.0 * c * s * m.cov_zy()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(lam <= scan + 1e-12);
        // the scan grid brackets the optimum to O(Δθ²)
        assert!(scan - lam < 1e-5);
    }

    #[test]
    fn polarized_xy_magnetization() {
        // p = 1: X = N/2 in every sample, transverse noise only in ⟨Y²⟩ = N/4
        let n = 400.0;
        let v = xy_magnetization(&css_moments(n));
        let expected = ((n * n / 4.0 + n / 4.0) / (n * n)).sqrt();
        assert!((v - expected).abs() < 1e-14);
        assert!((v - 0.5).abs() < 1e-3);
    }

    #[test]
    fn table_rows() {
        let row = |decay, d| classify_qfi_scaling(decay, d).unwrap();
        assert_eq!(row(CorrelationDecay::Exponential { length: 3.0 }, 2), QfiScaling { qfi: 1.0, sensitivity: 0.5 });
        assert_eq!(row(CorrelationDecay::Power { p: 2.5 }, 2), QfiScaling { qfi: 1.0, sensitivity: 0.5 });
        assert_eq!(row(CorrelationDecay::Power { p: 1.5 }, 2), QfiScaling { qfi: 0.5, sensitivity: 0.25 });
        assert_eq!(row(CorrelationDecay::Power { p: 0.5 }, 2), QfiScaling { qfi: 2.0, sensitivity: 1.0 });
        assert!(matches!(
            classify_qfi_scaling(CorrelationDecay::Power { p: 2.0 }, 2),
            Err(Error::MarginalCase { .. })
        ));
        assert!(classify_qfi_scaling(CorrelationDecay::Power { p: 1.0 }, 2).is_err());
    }

    #[test]
    fn binned_mode_drops_sparse_bins() {
        let mut z = vec![0.0; 20];
        let mut s: Vec<[f64; 3]> = (0..20).map(|i| [0.0, i as f64, 0.0]).collect();
        z.push(3.0);
        s.push([0.0, 100.0, 3.0]);
        let cv = conditional_variance(&z, &s, ConditionalMode::ZBinned).unwrap();
        assert_eq!(cv.dropped_bins, vec![(3.0, 1)]);
        assert!((cv.value - (20.0 * 20.0 - 1.0) / 12.0).abs() < 1e-12);
    }
}
