//! Gaussian objects attached to `(B_t, J_t)`: the joint density, fractional
//! inverse moments `E|m + σZ|^{-β}`, and pathwise estimators of
//! `∫|J_t|^{-β} dt` near the origin and `∫|h(x₀) + y₀t + J_t|^{-β} dt` on long horizons.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::pathint;
use crate::paths::BrownianPath;
use crate::quad::{self, QuadError, Tolerance};
use crate::timechange::PowerMap;

/// Grid grading used for `∫₀^δ |J|^{-β}` paths.
pub const LEMMA2_GRADING: f64 = 3.0;
/// Per-refinement growth above which the origin integral is flagged divergent.
pub const DIVERGENCE_GROWTH: f64 = 0.10;
/// Subdivision factor of the origin cell per refinement (six doublings).
pub const HEAD_REFINEMENT: usize = 64;

const REFINE_TAG: u64 = 0x1E33_A200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("beta = {0} outside its admissible range")]
    InvalidBeta(f64),
    #[error("sigma must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("time must be positive, got {0}")]
    InvalidTime(f64),
    #[error("lambda must be positive, got {0}")]
    InvalidLambda(f64),
    #[error("the long-horizon integral needs (x0, y0) != (0, 0)")]
    OriginStart,
    #[error("noise horizon {noise} shorter than requested {requested}")]
    HorizonTooShort { noise: f64, requested: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Parameters of `E|m + σZ|^{-β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub m: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl MomentSpec {
    pub fn new(m: f64, sigma: f64, beta: f64) -> Result<Self, MomentError> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(MomentError::InvalidBeta(beta));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(MomentError::InvalidSigma(sigma));
        }
        if !m.is_finite() {
            return Err(MomentError::InvalidBeta(beta));
        }
        Ok(Self { m, sigma, beta })
    }
}

/// Law of `(B_t, J_t)`: centered, covariance `[[t, t²/2], [t²/2, t³/3]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPair {
    t: f64,
}

impl GaussPair {
    pub fn new(t: f64) -> Result<Self, MomentError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(MomentError::InvalidTime(t));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn cov(&self) -> [[f64; 2]; 2] {
        let t = self.t;
        [[t, t * t / 2.0], [t * t / 2.0, t * t * t / 3.0]]
    }

    pub fn det(&self) -> f64 {
        let c = self.cov();
        c[0][0] * c[1][1] - c[0][1] * c[1][0]
    }
}

/// Exact bivariate normal density of `(B_t, J_t)` at `(x, y)`.
pub fn joint_density(pair: &GaussPair, x: f64, y: f64) -> f64 {
    let c = pair.cov();
    let det = pair.t.powi(4) / 12.0;
    // M⁻¹ = adj(M)/det
    let q = (c[1][1] * x * x - 2.0 * c[0][1] * x * y + c[0][0] * y * y) / det;
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

/// `E|Z|^{-β} = 2^{-β/2} Γ((1-β)/2) / √π` for standard normal `Z`.
pub fn abs_normal_inverse_moment(beta: f64) -> Result<f64, MomentError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(MomentError::InvalidBeta(beta));
    }
    Ok(2f64.powf(-beta / 2.0) * gamma((1.0 - beta) / 2.0) / PI.sqrt())
}

/// `E|m + σZ|^{-β}` from its one-dimensional kernel representation
/// `(2σ²)^{-β/2}/Γ(β/2) ∫₀¹ e^{-m²u/(2σ²)} u^{β/2-1} (1-u)^{-β/2-1/2} du`.
///
/// The interval is split at 1/2; `u = w^{2/β}` on the left and
/// `1 - u = w^{2/(1-β)}` on the right absorb the endpoint powers exactly, so
/// both halves have bounded integrands.
pub fn frac_inv_moment_quad(spec: &MomentSpec) -> Result<f64, MomentError> {
    let MomentSpec { m, sigma, beta } = *spec;
    let two_var = 2.0 * sigma * sigma;
    let c = m * m / two_var;
    let a = beta / 2.0; // power at u = 0 is a - 1
    let b = beta / 2.0 + 0.5; // power at u = 1 is -b
    let tol = Tolerance::default();

    let left = quad::integrate(
        |w: f64| {
            let u = w.powf(1.0 / a);
            (-c * u).exp() * (1.0 - u).powf(-b) / a
        },
        0.0,
        0.5f64.powf(a),
        tol,
    )?;
    let right = quad::integrate(
        |w: f64| {
            let u = 1.0 - w.powf(1.0 / (1.0 - b));
            (-c * u).exp() * u.powf(a - 1.0) / (1.0 - b)
        },
        0.0,
        0.5f64.powf(1.0 - b),
        tol,
    )?;
    Ok(two_var.powf(-a) / gamma(a) * (left.value + right.value))
}

/// `E exp(-λ|m + σZ|²) = exp(-λm²/(1+2λσ²)) / √(1+2λσ²)`.
pub fn laplace_transform_check(m: f64, sigma: f64, lam: f64) -> Result<f64, MomentError> {
    if !(sigma > 0.0) {
        return Err(MomentError::InvalidSigma(sigma));
    }
    if !(lam > 0.0) {
        return Err(MomentError::InvalidLambda(lam));
    }
    let q = 1.0 + 2.0 * lam * sigma * sigma;
    Ok((-lam * m * m / q).exp() / q.sqrt())
}

/// `E|m + σZ|^{-β}` through the Mellin identity
/// `E ξ^{-s} = Γ(s)⁻¹ ∫₀^∞ E e^{-λξ} λ^{s-1} dλ` with `ξ = |m + σZ|²`, `s = β/2`,
/// integrated in `x = ln λ`. Independent of [`frac_inv_moment_quad`] except for
/// the shared quadrature engine.
pub fn frac_inv_moment_mellin(spec: &MomentSpec) -> Result<f64, MomentError> {
    let MomentSpec { m, sigma, beta } = *spec;
    let s = beta / 2.0;
    let ln_two_var = (2.0 * sigma * sigma).ln();
    let shift = m * m / (2.0 * sigma * sigma);
    // log of L(e^x) e^{sx}, stable for large |x|
    let log_integrand = |x: f64| {
        let lq = ln_two_var + x; // ln(2σ²λ)
        let ln1p_q = if lq > 30.0 { lq + (-lq).exp().ln_1p() } else { lq.exp().ln_1p() };
        let damp = shift / (1.0 + (-lq).exp()); // λm²/(1+2λσ²)
        -damp - 0.5 * ln1p_q + s * x
    };
    // tails: e^{sx} on the left, (2σ²)^{-1/2} e^{-(1-β)x/2} on the right
    let cut = 1e-16f64.ln();
    let lo = (cut + s.ln()) / s;
    let hi = ((cut + (0.5 - s).ln() + 0.5 * ln_two_var) / (s - 0.5)).max(lo + 1.0);
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-12,
        max_intervals: 20_000,
    };
    let r = quad::integrate(|x| log_integrand(x).exp(), lo, hi, tol)?;
    Ok(r.value / gamma(s))
}

/// `∫₀^δ |J_t|^{-β} dt` on one path, with the same integral after one and two
/// successive refinements of the grid at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginIntegral {
    pub value: f64,
    pub refined: [f64; 2],
    pub divergent: bool,
}

/// Pathwise `I_β(δ) = ∫₀^δ |J_t|^{-β} dt`, singular power integrated exactly
/// against the piecewise-linear `J`.
///
/// Each refinement subdivides the cell at the origin [`HEAD_REFINEMENT`]-fold
/// on the graded scale, which is where a graded grid doubled that many times
/// changes. The value is flagged divergent when both refinements grow it by more
/// than [`DIVERGENCE_GROWTH`] per doubling. (The innermost cell is heavy-tailed
/// and swamps the growth of a single doubling on about half of all paths.)
pub fn lemma2_integral(beta: f64, delta: f64, noise: &BrownianPath) -> Result<OriginIntegral, MomentError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(MomentError::InvalidBeta(beta));
    }
    if !(delta > 0.0) {
        return Err(MomentError::InvalidTime(delta));
    }
    if noise.horizon() < delta * (1.0 - 1e-12) {
        return Err(MomentError::HorizonTooShort {
            noise: noise.horizon(),
            requested: delta,
        });
    }
    let eval = |p: &BrownianPath| pathint::integral_upto(p.times(), p.j_values(), beta, delta);
    let value = eval(noise);
    let once = noise
        .refine_graded_head(LEMMA2_GRADING, HEAD_REFINEMENT, noise.seed().derive(REFINE_TAG))
        .expect("grading exponent is valid");
    let twice = once
        .refine_graded_head(LEMMA2_GRADING, HEAD_REFINEMENT, noise.seed().derive(REFINE_TAG + 1))
        .expect("grading exponent is valid");
    let refined = [eval(&once), eval(&twice)];
    let factor = (1.0 + DIVERGENCE_GROWTH).powf((HEAD_REFINEMENT as f64).log2());
    let grows = |from: f64, to: f64| to > factor * from;
    Ok(OriginIntegral {
        value,
        refined,
        divergent: grows(value, refined[0]) && grows(refined[0], refined[1]),
    })
}

/// `E I_β(δ) = E|Z|^{-β} 3^{β/2} δ^{1-3β/2} / (1 - 3β/2)`, finite for β < 2/3.
pub fn lemma2_mean(beta: f64, delta: f64) -> Result<f64, MomentError> {
    if !(beta > 0.0 && beta < 2.0 / 3.0) {
        return Err(MomentError::InvalidBeta(beta));
    }
    let e = 1.0 - 1.5 * beta;
    Ok(abs_normal_inverse_moment(beta)? * 3f64.powf(beta / 2.0) * delta.powf(e) / e)
}

/// Pathwise head on `[0, t_max]` and the mean tail bound beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongHorizonIntegral {
    pub estimate: f64,
    pub tail_bound: f64,
}

impl LongHorizonIntegral {
    pub fn total(&self) -> f64 {
        self.estimate + self.tail_bound
    }
}

/// `∫₀^∞ |h(x₀) + y₀t + J_t|^{-β} dt` for 2/3 < β < 1, where `h` belongs to the
/// exponent `α = β / (2(1-β))` that produces this `β`. The head on `[0, t_max]` is
/// pathwise; the tail uses `E|J_t|^{-β} = (t³/3)^{-β/2} E|Z|^{-β}`.
pub fn lemma4_integral(
    beta: f64,
    x0: f64,
    y0: f64,
    noise: &BrownianPath,
    t_max: f64,
) -> Result<LongHorizonIntegral, MomentError> {
    if !(beta > 2.0 / 3.0 && beta < 1.0) {
        return Err(MomentError::InvalidBeta(beta));
    }
    if x0 == 0.0 && y0 == 0.0 {
        return Err(MomentError::OriginStart);
    }
    if !(t_max > 0.0) {
        return Err(MomentError::InvalidTime(t_max));
    }
    if noise.horizon() < t_max * (1.0 - 1e-12) {
        return Err(MomentError::HorizonTooShort {
            noise: noise.horizon(),
            requested: t_max,
        });
    }
    let h0 = PowerMap::new(alpha_for_exponent(beta)).h(x0);
    let v: Vec<f64> = noise
        .times()
        .iter()
        .zip(noise.j_values())
        .map(|(&t, &j)| h0 + y0 * t + j)
        .collect();
    let estimate = pathint::integral_upto(noise.times(), &v, beta, t_max);
    let e = 1.5 * beta - 1.0;
    let tail_bound = 3f64.powf(beta / 2.0) * abs_normal_inverse_moment(beta)? * t_max.powf(-e) / e;
    Ok(LongHorizonIntegral { estimate, tail_bound })
}

/// Inverse of `α ↦ 2α/(2α+1)`.
pub fn alpha_for_exponent(beta: f64) -> f64 {
    beta / (2.0 * (1.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    #[test]
    fn covariance_and_density() {
        let p = GaussPair::new(1.0).unwrap();
        assert!((p.det() - 1.0 / 12.0).abs() < 1e-15);
        let d0 = joint_density(&p, 0.0, 0.0);
        assert!((d0 - 12f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
        assert!((d0 - 0.551_328_895).abs() < 1e-9);
        assert_eq!(joint_density(&p, 0.3, -0.2), joint_density(&p, -0.3, 0.2));
        assert!(GaussPair::new(0.0).is_err());
        assert!(GaussPair::new(-1.0).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        let p = GaussPair::new(2.0).unwrap();
        let (hx, hy) = (0.02, 0.02);
        let mut total = 0.0;
        for i in -600..600 {
            for j in -600..600 {
                total += joint_density(&p, (i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy) * hx * hy;
            }
        }
        // covers about ±8.5σ in B and ±5σ in J
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn laplace_values() {
        assert!((laplace_transform_check(0.0, 1.0, 1.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((laplace_transform_check(2.0, 0.5, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(laplace_transform_check(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn moment_spec_validation() {
        assert!(MomentSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(MomentSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(MomentSpec::new(0.0, 0.0, 0.5).is_err());
        assert!(matches!(abs_normal_inverse_moment(1.2), Err(MomentError::InvalidBeta(_))));
    }

    #[test]
    fn quadrature_matches_mellin_route() {
        for &(m, s, b) in &[(1.0, 1.0, 0.8), (0.3, 2.0, 0.3), (-2.0, 0.7, 0.55), (0.0, 1.0, 0.9)] {
            let spec = MomentSpec::new(m, s, b).unwrap();
            let q = frac_inv_moment_quad(&spec).unwrap();
            let l = frac_inv_moment_mellin(&spec).unwrap();
            assert!((q / l - 1.0).abs() < 1e-9, "{m} {s} {b}: {q} vs {l}");
        }
    }

    #[test]
    fn concentrated_mean_limit() {
        let spec = MomentSpec::new(10.0, 0.01, 0.8).unwrap();
        let q = frac_inv_moment_quad(&spec).unwrap();
        assert!((q / 10f64.powf(-0.8) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn constant_integrand_gives_delta() {
        let times = [0.0, 0.1, 0.4, 1.0];
        assert_eq!(pathint::integral_upto(&times, &[1.0; 4], 0.5, 1.0), 1.0);
    }

    #[test]
    fn lemma4_preconditions() {
        let noise = BrownianPath::generate(SeedSpec::new(1, 1), 10.0, 100).unwrap();
        assert_eq!(lemma4_integral(0.8, 0.0, 0.0, &noise, 5.0), Err(MomentError::OriginStart));
        assert!(matches!(lemma4_integral(0.5, 1.0, 0.0, &noise, 5.0), Err(MomentError::InvalidBeta(_))));
        assert!(matches!(
            lemma4_integral(0.8, 1.0, 0.0, &noise, 50.0),
            Err(MomentError::HorizonTooShort { .. })
        ));
        let r = lemma4_integral(0.8, 0.0, 1.0, &noise, 10.0).unwrap();
        assert!(r.estimate.is_finite() && r.tail_bound > 0.0);
    }

    #[test]
    fn alpha_exponent_roundtrip() {
        for &a in &[0.25, 0.5, 0.99, 1.5] {
            let b = PowerMap::new(a).clock_exponent();
            assert!((alpha_for_exponent(b) - a).abs() < 1e-14);
        }
    }
}
