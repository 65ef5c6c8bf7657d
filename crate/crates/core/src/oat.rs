//! Semiclassical one-axis-twisting analytics.
//!
//! Each conserved `Z` slice of a Gaussian `P(Z) = √(2/πN) e^{−2Z²/N}` rotates
//! rigidly about `z` at angular velocity `2Zχ/N` on a sphere of radius
//! `N m_xy`, on top of a conditional variance `Var[Y|Z](t)`. Averaging over
//! slices gives closed forms for `⟨X⟩, ⟨Z²⟩, ⟨ZY⟩, ⟨Y²⟩`, the minimal
//! transverse variance, and the large-`χt`, small-`χt/√N` approximation
//!
//! ```text
//! ξ²(t) ≈ Var[Y|Z]/(4 N m_xy⁴ (χt)²) + (χt)⁴/(24 m_xy² N²).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::math::golden_section_min;

/// Inputs of the slice-rotation picture with
/// `Var[Y|Z](t) = v0 + c·N·(χt)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalParams {
    pub n: f64,
    pub m_xy: f64,
    pub chi: f64,
    pub v0: f64,
    pub c: f64,
    pub gamma: f64,
}

impl SemiclassicalParams {
    /// Pure twisting from a coherent state: `m_xy = 1/2`, `Var[Y|Z] = N/4`.
    pub fn one_axis_twisting(n: f64, chi: f64) -> Self {
        SemiclassicalParams {
            n,
            m_xy: 0.5,
            chi,
            v0: n / 4.0,
            c: 0.0,
            gamma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0) {
            return Err(invalid("n", "must be positive"));
        }
        if !(self.m_xy > 0.0 && self.m_xy <= 0.5) {
            return Err(invalid("m_xy", format!("must lie in (0, 1/2] (got {})", self.m_xy)));
        }
        if !(self.chi > 0.0) {
            return Err(invalid("chi", "must be positive"));
        }
        if self.c < 0.0 {
            return Err(invalid("c", "must be non-negative"));
        }
        if !(0.0..2.0).contains(&self.gamma) {
            return Err(invalid("gamma", format!("must lie in [0, 2) (got {})", self.gamma)));
        }
        Ok(())
    }

    pub fn conditional_variance(&self, t: f64) -> f64 {
        let tau = self.chi * t;
        let growth = if self.c == 0.0 { 0.0 } else { self.c * self.n * tau.powf(self.gamma) };
        self.v0 + growth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OatMoments {
    pub x: f64,
    pub z2: f64,
    pub zy: f64,
    pub y2: f64,
}

pub fn exact_moments(p: &SemiclassicalParams, t: f64) -> OatMoments {
    let n = p.n;
    let tau = p.chi * t;
    let damp = (-(tau * tau) / (2.0 * n)).exp();
    OatMoments {
        x: n * p.m_xy * damp,
        z2: n / 4.0,
        zy: 0.5 * n * p.m_xy * tau * damp,
        y2: p.conditional_variance(t)
            + 0.5 * n * n * p.m_xy * p.m_xy * (1.0 - (-2.0 * tau * tau / n).exp()),
    }
}

/// Minimal variance in the y–z plane, evaluated from the un-expanded closed
/// form.
pub fn exact_min_variance(p: &SemiclassicalParams, t: f64) -> f64 {
    let n = p.n;
    let tau = p.chi * t;
    let v = p.conditional_variance(t);
    let rot = 0.5 * n * n * p.m_xy * p.m_xy * (-(-2.0 * tau * tau / n).exp_m1());
    let a = v + n / 4.0 + rot;
    let b = v - n / 4.0 + rot;
    let cross = n * n * p.m_xy * p.m_xy * tau * tau * (-(tau * tau) / n).exp();
    0.5 * a - 0.5 * (b * b + cross).sqrt()
}

pub fn xi2_exact(p: &SemiclassicalParams, t: f64) -> f64 {
    let x = exact_moments(p, t).x;
    p.n * exact_min_variance(p, t) / (x * x)
}

/// Two-term approximation; valid for `χt ≫ 1` and `χt ≪ √N` (not enforced).
pub fn xi2_approx(p: &SemiclassicalParams, t: f64) -> f64 {
    let tau = p.chi * t;
    let m2 = p.m_xy * p.m_xy;
    p.conditional_variance(t) / (p.n * 4.0 * m2 * m2 * tau * tau)
        + tau.powi(4) / (24.0 * m2 * p.n * p.n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Xi2Form {
    Approx,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub t_opt: f64,
    pub xi2_opt: f64,
}

/// Golden-section search over `log t` in `[1/χ, √N/χ]`.
pub fn optimize(p: &SemiclassicalParams, form: Xi2Form) -> Result<Optimum> {
    p.validate()?;
    let f = |log_t: f64| {
        let t = log_t.exp();
        match form {
            Xi2Form::Approx => xi2_approx(p, t),
            Xi2Form::Exact => xi2_exact(p, t),
        }
    };
    let lo = (1.0 / p.chi).ln();
    let hi = (p.n.sqrt() / p.chi).ln();
    let (log_t, xi2) = golden_section_min(f, lo, hi, 1e-9);
    Ok(Optimum {
        t_opt: log_t.exp(),
        xi2_opt: xi2,
    })
}

/// Power-law exponents of the optimum, `X_opt ∝ N^exponent`, for
/// `Var[Y|Z] ∝ N (χt)^γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingExponents {
    /// `−2 + 8/(6−γ)`: `−2/3` for γ = 0 and `−2/5` for γ = 1.
    pub xi2: f64,
    /// Half of [`Self::xi2`], for the unsquared parameter.
    pub xi: f64,
    /// `2/(6−γ)`.
    pub t: f64,
}

pub fn scaling_exponents(gamma: f64) -> Result<ScalingExponents> {
    if !(0.0..2.0).contains(&gamma) {
        return Err(invalid("gamma", format!("must lie in [0, 2) (got {gamma})")));
    }
    let xi2 = -2.0 + 8.0 / (6.0 - gamma);
    Ok(ScalingExponents {
        xi2,
        xi: 0.5 * xi2,
        t: 2.0 / (6.0 - gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_at_time_zero() {
        let p = SemiclassicalParams { n: 200.0, m_xy: 0.4, chi: 1.3, v0: 50.0, c: 0.1, gamma: 1.0 };
        let m = exact_moments(&p, 0.0);
        assert_eq!(m.x, 200.0 * 0.4);
        assert_eq!(m.zy, 0.0);
        assert_eq!(m.y2, 50.0);
        assert_eq!(m.z2, 50.0);
    }

    #[test]
    fn spin_length_at_root_n() {
        let p = SemiclassicalParams::one_axis_twisting(400.0, 2.0);
        let m = exact_moments(&p, 20.0 / 2.0);
        assert!((m.x - 400.0 * 0.5 * (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn isotropic_start() {
        let p = SemiclassicalParams::one_axis_twisting(1000.0, 1.0);
        assert!((exact_min_variance(&p, 0.0) - 250.0).abs() < 1e-12);
        assert!((xi2_exact(&p, 0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponents() {
        let e0 = scaling_exponents(0.0).unwrap();
        assert!((e0.xi + 1.0 / 3.0).abs() < 1e-15);
        assert!((e0.xi2 + 2.0 / 3.0).abs() < 1e-15);
        assert!((e0.t - 1.0 / 3.0).abs() < 1e-15);
        let e1 = scaling_exponents(1.0).unwrap();
        assert!((e1.xi2 + 0.4).abs() < 1e-15);
        assert!((e1.t - 0.4).abs() < 1e-15);
        assert!((scaling_exponents(1.999_999).unwrap().t - 0.5).abs() < 1e-6);
        assert!(scaling_exponents(2.0).is_err());
    }

    #[test]
    fn oat_squeezes() {
        let p = SemiclassicalParams::one_axis_twisting(1e4, 1.0);
        let opt = optimize(&p, Xi2Form::Exact).unwrap();
        assert!(opt.xi2_opt < 0.1);
    }
}
