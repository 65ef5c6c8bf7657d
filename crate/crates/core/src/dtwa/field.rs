//! Mean-field local fields `B_i = 4 Σ_j w_ij (J⊥ sˣ_j, J⊥ sʸ_j, J_z sᶻ_j)`.
//!
//! Two routes: a dense matrix-vector product and a circular convolution
//! through the d-dimensional FFT (the minimum-image kernel depends only on the
//! displacement modulo the lattice, so it is a convolution in every `d`).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::model::{build_couplings, LatticeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldMethod {
    /// Dense below 64 sites, convolution above.
    #[default]
    Auto,
    Dense,
    Convolution,
}

#[derive(Clone)]
enum Kind {
    Dense {
        w: Vec<f64>,
    },
    Convolution {
        kernel_hat: Vec<f64>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
}

#[derive(Clone)]
pub struct FieldEvaluator {
    n: usize,
    l: usize,
    d: usize,
    j_perp: f64,
    j_z: f64,
    kind: Kind,
}

/// Per-worker scratch buffers for [`FieldEvaluator::apply`].
#[derive(Default)]
pub struct FieldScratch {
    transverse: Vec<Complex64>,
    longitudinal: Vec<Complex64>,
    line: Vec<Complex64>,
    fft: Vec<Complex64>,
}

impl FieldEvaluator {
    pub fn new(spec: &LatticeSpec, method: FieldMethod) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_sites();
        let method = match method {
            FieldMethod::Auto if n < 64 => FieldMethod::Dense,
            FieldMethod::Auto => FieldMethod::Convolution,
            m => m,
        };
        let kind = match method {
            FieldMethod::Dense => {
                let w = build_couplings(spec)?;
                let mut data = Vec::with_capacity(n * n);
                for i in 0..n {
                    data.extend_from_slice(w.row(i));
                }
                Kind::Dense { w: data }
            }
            _ => {
                let mut planner = FftPlanner::new();
                let forward = planner.plan_fft_forward(spec.l);
                let inverse = planner.plan_fft_inverse(spec.l);
                let mut buf: Vec<Complex64> = spec
                    .kernel()?
                    .into_iter()
                    .map(|w| Complex64::new(w, 0.0))
                    .collect();
                let mut scratch = FieldScratch::default();
                fft_nd(&mut buf, spec.l, spec.d as usize, &forward, &mut scratch);
                let scale = 1.0 / n as f64;
                Kind::Convolution {
                    kernel_hat: buf.iter().map(|c| c.re * scale).collect(),
                    forward,
                    inverse,
                }
            }
        };
        Ok(FieldEvaluator {
            n,
            l: spec.l,
            d: spec.d as usize,
            j_perp: spec.j_perp,
            j_z: spec.j_z,
            kind,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, Kind::Dense { .. })
    }

    pub fn apply(&self, spins: &[[f64; 3]], out: &mut [[f64; 3]], scratch: &mut FieldScratch) {
        debug_assert_eq!(spins.len(), self.n);
        let (cp, cz) = (4.0 * self.j_perp, 4.0 * self.j_z);
        match &self.kind {
            Kind::Dense { w } => {
                for (i, b) in out.iter_mut().enumerate() {
                    let row = &w[i * self.n..(i + 1) * self.n];
                    let (mut bx, mut by, mut bz) = (0.0, 0.0, 0.0);
                    for (wij, s) in row.iter().zip(spins) {
                        bx += wij * s[0];
                        by += wij * s[1];
                        bz += wij * s[2];
                    }
                    *b = [cp * bx, cp * by, cz * bz];
                }
            }
            Kind::Convolution {
                kernel_hat,
                forward,
                inverse,
            } => {
                let mut t = std::mem::take(&mut scratch.transverse);
                let mut z = std::mem::take(&mut scratch.longitudinal);
                t.clear();
                z.clear();
                t.extend(spins.iter().map(|s| Complex64::new(s[0], s[1])));
                z.extend(spins.iter().map(|s| Complex64::new(s[2], 0.0)));
                fft_nd(&mut t, self.l, self.d, forward, scratch);
                fft_nd(&mut z, self.l, self.d, forward, scratch);
                for ((a, b), k) in t.iter_mut().zip(z.iter_mut()).zip(kernel_hat) {
                    *a *= *k;
                    *b *= *k;
                }
                fft_nd(&mut t, self.l, self.d, inverse, scratch);
                fft_nd(&mut z, self.l, self.d, inverse, scratch);
                for ((b, a), c) in out.iter_mut().zip(&t).zip(&z) {
                    *b = [cp * a.re, cp * a.im, cz * c.re];
                }
                scratch.transverse = t;
                scratch.longitudinal = z;
            }
        }
    }
}

/// Forward d-dimensional DFT of a real array laid out like the lattice
/// (axis 0 fastest); returns the real part.
pub(crate) fn real_spectrum(values: &[f64], l: usize, d: usize) -> Vec<f64> {
    let forward = FftPlanner::new().plan_fft_forward(l);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, l, d, &forward, &mut FieldScratch::default());
    buf.into_iter().map(|c| c.re).collect()
}

fn fft_nd(
    buf: &mut [Complex64],
    l: usize,
    d: usize,
    fft: &Arc<dyn Fft<f64>>,
    scratch: &mut FieldScratch,
) {
    let need = fft.get_inplace_scratch_len();
    if scratch.fft.len() < need {
        scratch.fft.resize(need, Complex64::default());
    }
    // axis 0 is contiguous
    fft.process_with_scratch(buf, &mut scratch.fft[..need]);
    if d == 1 {
        return;
    }
    scratch.line.resize(l, Complex64::default());
    let n = buf.len();
    for axis in 1..d {
        let stride = l.pow(axis as u32);
        let block = stride * l;
        for base in (0..n).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for k in 0..l {
                    scratch.line[k] = buf[start + k * stride];
                }
                fft.process_with_scratch(&mut scratch.line, &mut scratch.fft[..need]);
                for k in 0..l {
                    buf[start + k * stride] = scratch.line[k];
                }
            }
        }
    }
}
