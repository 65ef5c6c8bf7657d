//! Browser bindings: one-axis-twisting curves, a small single-threaded
//! DTWA run, and the spin-wave ordering temperature versus `α`.
//!
//! Every export returns a flat `Float64Array` of interleaved columns; the
//! [`demo`] module holds the same functions with Rust error types so they
//! can be exercised natively.

use wasm_bindgen::prelude::*;

pub mod demo {
    use squeeze::dtwa::{collective, integrate_trajectory, sample_initial, FieldEvaluator, IntegratorConfig};
    use squeeze::model::LatticeSpec;
    use squeeze::oat::{optimize, xi2_exact, SemiclassicalParams, Xi2Form};
    use squeeze::observables::{squeezing, xy_magnetization, Moments};
    use squeeze::spinwave::critical_temperature;

    pub const MAX_SITES: usize = 512;
    pub const MAX_TRAJECTORIES: usize = 2000;

    fn params(n: f64, gamma: f64, c: f64) -> SemiclassicalParams {
        SemiclassicalParams { n, m_xy: 0.5, chi: 1.0, v0: n / 4.0, c, gamma }
    }

    /// `[t, ξ²]` pairs on `points` log-spaced times in `[0.05, √N]` for
    /// `Var[Y|Z] = N/4 + c·N·t^γ` at `χ = 1`, followed by the optimum.
    pub fn oat_curve(n: f64, gamma: f64, c: f64, points: usize) -> Result<Vec<f64>, String> {
        let p = params(n, gamma, c);
        let best = optimize(&p, Xi2Form::Exact).map_err(|e| e.to_string())?;
        let points = points.clamp(2, 2000);
        let (lo, hi) = (0.05f64.ln(), n.sqrt().ln());
        let mut out = Vec::with_capacity(2 * points + 2);
        for k in 0..points {
            let t = (lo + (hi - lo) * k as f64 / (points - 1) as f64).exp();
            out.extend([t, xi2_exact(&p, t)]);
        }
        out.extend([best.t_opt, best.xi2_opt]);
        Ok(out)
    }

    /// `[t, ξ², m_xy]` triples of a d = 1 DTWA run from the x-polarized state.
    pub fn dtwa_run(
        l: usize,
        alpha: f64,
        j_z: f64,
        trajectories: usize,
        t_max: f64,
        seed: u64,
    ) -> Result<Vec<f64>, String> {
        if l > MAX_SITES || trajectories > MAX_TRAJECTORIES {
            return Err(format!("demo limits: L ≤ {MAX_SITES}, trajectories ≤ {MAX_TRAJECTORIES}"));
        }
        let spec = LatticeSpec::power_law(1, l, alpha, j_z);
        let cfg = IntegratorConfig::for_spec(&spec, t_max, 100).map_err(|e| e.to_string())?;
        let field = FieldEvaluator::new(&spec, cfg.field).map_err(|e| e.to_string())?;
        let ens = sample_initial(&spec, 1.0, trajectories, seed, false).map_err(|e| e.to_string())?;
        let times = cfg.output_times();
        let mut samples = vec![Vec::with_capacity(trajectories); times.len()];
        for k in 0..trajectories {
            let mut spins = ens.trajectory(k).to_vec();
            let mut row = 0;
            let ok = integrate_trajectory(&field, &cfg, &mut spins, |_, _, s| {
                samples[row].push(collective(s));
                row += 1;
            });
            if !ok {
                return Err(format!("trajectory {k} diverged"));
            }
        }
        let mut out = Vec::with_capacity(3 * times.len());
        for (t, s) in times.iter().zip(&samples) {
            let m = Moments::from_samples(l, s);
            out.extend([*t, squeezing(&m).unwrap_or(f64::NAN), xy_magnetization(&m)]);
        }
        Ok(out)
    }

    /// `[α, T_c]` pairs; `T_c` is NaN where no finite-temperature order exists.
    pub fn critical_temperature_curve(d: u32, s: f64, alpha_lo: f64, alpha_hi: f64, points: usize) -> Vec<f64> {
        let points = points.clamp(2, 2000);
        let mut out = Vec::with_capacity(2 * points);
        for k in 0..points {
            let a = alpha_lo + (alpha_hi - alpha_lo) * k as f64 / (points - 1) as f64;
            out.extend([a, critical_temperature(a, d, s).unwrap_or(f64::NAN)]);
        }
        out
    }
}

#[wasm_bindgen(js_name = oatCurve)]
pub fn oat_curve(n: f64, gamma: f64, c: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::oat_curve(n, gamma, c, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = dtwaRun)]
pub fn dtwa_run(l: usize, alpha: f64, j_z: f64, trajectories: usize, t_max: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    demo::dtwa_run(l, alpha, j_z, trajectories, t_max, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = criticalTemperatureCurve)]
pub fn critical_temperature_curve(d: u32, s: f64, alpha_lo: f64, alpha_hi: f64, points: usize) -> Vec<f64> {
    demo::critical_temperature_curve(d, s, alpha_lo, alpha_hi, points)
}
