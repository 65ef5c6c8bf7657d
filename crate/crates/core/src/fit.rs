//! Post-processing: the characteristic squeezing `ξ²_opt` of a time series,
//! the finite-size exponent `ν` of `ξ²_opt ∼ N^{−ν}`, and the critical
//! coupling from a floor–ramp–ceiling fit of `ν(J_z)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{line_fit, median};
use crate::observables::ObservableSeries;

pub const DEFAULT_WINDOW: usize = 7;
pub const DEFAULT_THERM_TOL: f64 = 0.05;

/// Local quadratic least squares over a sliding window of `window` points
/// (shifted inwards at the edges): smoothed values and first derivatives.
/// Windows touching a non-finite value yield NaN.
pub fn savitzky_golay(t: &[f64], y: &[f64], window: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t.len();
    if y.len() != n {
        return Err(invalid("y", "length differs from the time axis"));
    }
    if window < 3 || window % 2 == 0 {
        return Err(invalid("window", format!("must be odd and at least 3 (got {window})")));
    }
    if n < window {
        return Err(Error::InsufficientData(format!("{n} points for a {window}-point window")));
    }
    let half = window / 2;
    let mut smooth = vec![f64::NAN; n];
    let mut deriv = vec![f64::NAN; n];
    for i in 0..n {
        let lo = i.saturating_sub(half).min(n - window);
        let idx = lo..lo + window;
        if y[idx.clone()].iter().any(|v| !v.is_finite()) {
            continue;
        }
        // normal equations in the centred variable u = t − t_i, scaled by h
        let h = (t[lo + window - 1] - t[lo]).max(f64::MIN_POSITIVE);
        let mut a = [[0.0f64; 3]; 3];
        let mut b = [0.0f64; 3];
        for j in idx {
            let u = (t[j] - t[i]) / h;
            let basis = [1.0, u, u * u];
            for r in 0..3 {
                b[r] += basis[r] * y[j];
                for c in 0..3 {
                    a[r][c] += basis[r] * basis[c];
                }
            }
        }
        let coef = solve3(a, b);
        smooth[i] = coef[0];
        deriv[i] = coef[1] / h;
    }
    Ok((smooth, deriv))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// First time `m_xy(t)` comes within `tol` (relative) of its plateau, the
/// median over the last third of the series.
pub fn thermalization_time(series: &ObservableSeries, tol: f64) -> f64 {
    thermalization_time_from(&series.times(), &series.m_xy(), tol)
}

/// [`thermalization_time`] on bare columns.
pub fn thermalization_time_from(times: &[f64], m_xy: &[f64], tol: f64) -> f64 {
    let t_end = times.last().copied().unwrap_or(0.0);
    let late: Vec<f64> = times
        .iter()
        .zip(m_xy)
        .filter(|(t, _)| **t >= 2.0 * t_end / 3.0)
        .map(|(_, v)| *v)
        .collect();
    let plateau = median(&late);
    for (t, v) in times.iter().zip(m_xy) {
        if (v - plateau).abs() <= tol * plateau.abs() {
            return *t;
        }
    }
    t_end
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingOptimum {
    pub xi2_opt: f64,
    pub t_opt: f64,
    /// Monte Carlo error of `ξ²` at `t_opt`.
    pub err: f64,
    /// No stationarity candidate was found after `t_therm`.
    pub no_derivative_minimum: bool,
}

/// Smallest smoothed `ξ²` among the stationarity candidates after
/// `t_therm`: points where `dξ²/dt` turns from negative to non-negative, and
/// local minima of `|dξ²/dt|` while it is still negative (shoulders).
/// Candidates must sit in a squeezed neighbourhood (`0 < ξ² < 1` for the
/// point and its neighbours, raw and smoothed); depolarized stretches with
/// `⟨X⟩ ≈ 0` only produce noise there. Without any candidate the global
/// minimum of the raw series is returned, flagged.
pub fn optimal_squeezing(series: &ObservableSeries, t_therm: f64, window: usize) -> Result<SqueezingOptimum> {
    let errs: Vec<f64> = series.rows.iter().map(|r| r.err_xi2).collect();
    optimal_squeezing_from(&series.times(), &series.xi2(), &errs, t_therm, window)
}

/// [`optimal_squeezing`] on bare columns; non-finite `ξ²` marks a
/// depolarized sample.
pub fn optimal_squeezing_from(
    t: &[f64],
    raw: &[f64],
    errs: &[f64],
    t_therm: f64,
    window: usize,
) -> Result<SqueezingOptimum> {
    if errs.len() != t.len() {
        return Err(invalid("errs", "length differs from the time axis"));
    }
    let (smooth, d) = savitzky_golay(t, raw, window)?;
    let mut best: Option<usize> = None;
    for i in 1..t.len().saturating_sub(1) {
        if t[i] <= t_therm || !d[i].is_finite() || !smooth[i].is_finite() {
            continue;
        }
        let turning = d[i - 1] < 0.0 && d[i] >= 0.0;
        let shoulder = d[i] < 0.0
            && d[i - 1].is_finite()
            && d[i + 1].is_finite()
            && d[i].abs() < d[i - 1].abs()
            && d[i].abs() <= d[i + 1].abs()
            && d[i + 1] < 0.0;
        let squeezed = |k: usize| raw[k] > 0.0 && raw[k] < 1.0 && smooth[k] > 0.0 && smooth[k] < 1.0;
        if !(turning || shoulder) || !(squeezed(i - 1) && squeezed(i) && squeezed(i + 1)) {
            continue;
        }
        // a turning point sits between i−1 and i; take the lower of the two
        let j = if turning && smooth[i - 1] < smooth[i] { i - 1 } else { i };
        if best.is_none_or(|b| smooth[j] < smooth[b]) {
            best = Some(j);
        }
    }
    if let Some(b) = best {
        return Ok(SqueezingOptimum {
            xi2_opt: smooth[b],
            t_opt: t[b],
            err: errs[b],
            no_derivative_minimum: false,
        });
    }
    let (i, v) = raw
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InsufficientData("no finite squeezing values".into()))?;
    Ok(SqueezingOptimum { xi2_opt: *v, t_opt: t[i], err: errs[i], no_derivative_minimum: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub n: f64,
    pub xi2_opt: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuFit {
    pub nu: f64,
    pub nu_err: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    pub chi2: f64,
}

/// Weighted least squares of `ln ξ²_opt` against `ln N`; `ν` is minus the
/// slope. Needs at least four sizes spanning a decade.
pub fn fit_nu(points: &[SizePoint]) -> Result<NuFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!("ν fit needs ≥ 4 sizes (got {})", points.len())));
    }
    let n_min = points.iter().map(|p| p.n).fold(f64::INFINITY, f64::min);
    let n_max = points.iter().map(|p| p.n).fold(0.0, f64::max);
    if n_max < 10.0 * n_min {
        return Err(Error::InsufficientData(format!("sizes {n_min}..{n_max} span less than a decade")));
    }
    if points.iter().any(|p| !(p.xi2_opt > 0.0)) {
        return Err(invalid("xi2_opt", "must be positive"));
    }
    let x: Vec<f64> = points.iter().map(|p| p.n.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.xi2_opt.ln()).collect();
    let weighted = points.iter().all(|p| p.err.is_finite() && p.err > 0.0);
    let w: Vec<f64> = points.iter().map(|p| (p.xi2_opt / p.err).powi(2)).collect();
    let fit = line_fit(&x, &y, weighted.then_some(w.as_slice()))?;
    Ok(NuFit {
        nu: -fit.slope,
        nu_err: fit.slope_err,
        log_prefactor: fit.intercept,
        r_squared: fit.r_squared,
        chi2: fit.chi2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampFit {
    pub floor: f64,
    pub ceiling: f64,
    pub ramp_start: f64,
    pub ramp_end: f64,
    pub residual: f64,
    /// Residual of a single straight line through the same data.
    pub line_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcEstimate {
    pub j_c: f64,
    pub err: f64,
    /// Bracket of the largest jump (discontinuous case) or the ramp.
    pub bracket: (f64, f64),
    pub ramp: Option<RampFit>,
}

fn ramp_levels(x: &[f64], y: &[f64], a: f64, b: f64) -> (f64, f64, f64) {
    let r = |xi: f64| -> f64 {
        if b <= a {
            if xi < a { 0.0 } else { 1.0 }
        } else {
            ((xi - a) / (b - a)).clamp(0.0, 1.0)
        }
    };
    let (mut s00, mut s01, mut s11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (f0, f1) = (1.0 - r(xi), r(xi));
        s00 += f0 * f0;
        s01 += f0 * f1;
        s11 += f1 * f1;
        b0 += f0 * yi;
        b1 += f1 * yi;
    }
    let det = s00 * s11 - s01 * s01;
    let (lo, hi) = if det.abs() < 1e-14 {
        let m = y.iter().sum::<f64>() / y.len() as f64;
        (m, m)
    } else {
        ((b0 * s11 - b1 * s01) / det, (b1 * s00 - b0 * s01) / det)
    };
    let res = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - lo * (1.0 - r(xi)) - hi * r(xi)).powi(2))
        .sum();
    (lo, hi, res)
}

pub const RAMP_GRID: usize = 201;

/// Floor–ramp–ceiling fit by grid search over the ramp endpoints (levels by
/// linear least squares). Equal residuals resolve to the widest ramp.
pub fn fit_ramp(points: &[(f64, f64)]) -> Result<RampFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData("ramp fit needs at least four points".into()));
    }
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x: Vec<f64> = p.iter().map(|q| q.0).collect();
    let y: Vec<f64> = p.iter().map(|q| q.1).collect();
    let (x0, x1) = (x[0], x[x.len() - 1]);
    let grid: Vec<f64> = (0..RAMP_GRID).map(|i| x0 + (x1 - x0) * i as f64 / (RAMP_GRID - 1) as f64).collect();
    let mut best: Option<(f64, f64, f64, f64, f64)> = None;
    for (ia, &a) in grid.iter().enumerate() {
        for &b in &grid[ia..] {
            let (lo, hi, res) = ramp_levels(&x, &y, a, b);
            let better = match best {
                None => true,
                Some((_, _, ba, bb, bres)) => {
                    let tol = 1e-12 * (1.0 + bres);
                    res < bres - tol || ((res - bres).abs() <= tol && b - a > bb - ba)
                }
            };
            if better {
                best = Some((lo, hi, a, b, res));
            }
        }
    }
    let (floor, ceiling, ramp_start, ramp_end, residual) = best.unwrap();
    let line = line_fit(&x, &y, None)?;
    let line_residual = x
        .iter()
        .zip(&y)
        .map(|(&xi, &yi)| (yi - line.intercept - line.slope * xi).powi(2))
        .sum();
    Ok(RampFit { floor, ceiling, ramp_start, ramp_end, residual, line_residual })
}

/// Critical coupling from `ν(J_z)`: ramp centre in `d = 1`, ramp onset in
/// `d = 2` (error = ramp width, at least the sampling spacing), and the
/// interval of the largest jump in `d = 3`.
pub fn locate_jc(points: &[(f64, f64)], d: u32) -> Result<JcEstimate> {
    if points.len() < 6 {
        return Err(Error::InsufficientData(format!("need ν at ≥ 6 couplings (got {})", points.len())));
    }
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    let spacing = median(&p.windows(2).map(|w| w[1].0 - w[0].0).collect::<Vec<_>>());
    match d {
        1 | 2 => {
            let ramp = fit_ramp(&p)?;
            let width = ramp.ramp_end - ramp.ramp_start;
            let j_c = if d == 1 { 0.5 * (ramp.ramp_start + ramp.ramp_end) } else { ramp.ramp_start };
            Ok(JcEstimate {
                j_c,
                err: width.max(spacing),
                bracket: (ramp.ramp_start, ramp.ramp_end),
                ramp: Some(ramp),
            })
        }
        3 => {
            let (i, _) = p
                .windows(2)
                .enumerate()
                .max_by(|a, b| (a.1[1].1 - a.1[0].1).abs().total_cmp(&(b.1[1].1 - b.1[0].1).abs()))
                .unwrap();
            let (lo, hi) = (p[i].0, p[i + 1].0);
            Ok(JcEstimate { j_c: 0.5 * (lo + hi), err: 0.5 * (hi - lo), bracket: (lo, hi), ramp: None })
        }
        _ => Err(invalid("d", format!("must be 1, 2 or 3 (got {d})"))),
    }
}
