//! Random time change for the degenerate system.
//!
//! With `T(s) = ∫₀ˢ |X_r|^{2α} dr` and `h(x) = |x|^{2α+1} sgn(x) / (2α+1)`, the
//! time-changed pair `Ṽ = h(X ∘ T⁻¹)`, `Ỹ = Y ∘ T⁻¹` solves
//! `dṼ = Ỹ dt`, `dỸ = dB̃`. Running this backwards from a Brownian path `B̃`
//! gives `Ṽ_t = h(x₀) + y₀ t + ∫₀ᵗ B̃`, and the original clock is recovered from
//! `T⁻¹(t) = ∫₀ᵗ |X̃_s|^{-2α} ds = C ∫₀ᵗ |Ṽ_s|^{-β} ds` with
//! `β = 2α/(2α+1)` and `C = (2α+1)^{-β}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::{interpolate, BrownianPath};
use crate::pathint;
use crate::sde::{StopReason, SystemParams, Trajectory};

/// Grading exponent for tilde-clock grids started at the origin.
pub const CLOCK_GRADING: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeChangeError {
    #[error("t = {t} lies outside the map's range [0, {max}]")]
    OutOfRange { t: f64, max: f64 },
    #[error("clock horizon {0} must be positive and within the noise horizon")]
    InvalidHorizon(f64),
    #[error("clock integrand is not integrable: the tilde path vanishes on a whole cell")]
    IntegrandSingular,
    #[error("inverse clock overflowed")]
    Nonfinite,
}

/// `h` and its inverse for a fixed `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMap {
    alpha: f64,
}

impl PowerMap {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        Self { alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn power(&self) -> f64 {
        2.0 * self.alpha + 1.0
    }

    pub fn h(&self, x: f64) -> f64 {
        let p = self.power();
        x.signum() * x.abs().powf(p) / p
    }

    pub fn h_inv(&self, v: f64) -> f64 {
        let p = self.power();
        v.signum() * (p * v.abs()).powf(1.0 / p)
    }

    /// Clock exponent `β = 2α/(2α+1)`.
    pub fn clock_exponent(&self) -> f64 {
        2.0 * self.alpha / self.power()
    }

    /// `C` in `|h⁻¹(v)|^{-2α} = C |v|^{-β}`.
    pub fn clock_constant(&self) -> f64 {
        self.power().powf(-self.clock_exponent())
    }
}

pub fn h_eval(map: &PowerMap, x: f64) -> f64 {
    map.h(x)
}

pub fn h_inv_eval(map: &PowerMap, v: f64) -> f64 {
    map.h_inv(v)
}

/// Sampled nondecreasing clock `s ↦ T(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeChangeMap {
    pub s_grid: Vec<f64>,
    pub t_values: Vec<f64>,
}

impl TimeChangeMap {
    pub fn max_value(&self) -> f64 {
        *self.t_values.last().unwrap()
    }

    pub fn eval(&self, s: f64) -> f64 {
        interpolate(&self.s_grid, &self.t_values, s)
    }
}

/// `T(s) = ∫₀ˢ |X_r|^{2α} dr` by the trapezoid rule on the trajectory grid.
pub fn build_t(traj: &Trajectory, alpha: f64) -> TimeChangeMap {
    let w: Vec<f64> = traj
        .xs
        .iter()
        .map(|&x| if x == 0.0 { 0.0 } else { x.abs().powf(2.0 * alpha) })
        .collect();
    let mut t_values = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    t_values.push(0.0);
    for k in 1..w.len() {
        acc += 0.5 * (traj.times[k] - traj.times[k - 1]) * (w[k] + w[k - 1]);
        t_values.push(acc);
    }
    TimeChangeMap {
        s_grid: traj.times.clone(),
        t_values,
    }
}

/// Right-continuous generalized inverse `inf{s ≥ 0 : T(s) > t}`, linear on
/// increasing segments. On a flat segment at level `t` the right end is returned.
pub fn invert_t(map: &TimeChangeMap, t: f64) -> Result<f64, TimeChangeError> {
    let max = map.max_value();
    if !(t >= 0.0 && t <= max) {
        return Err(TimeChangeError::OutOfRange { t, max });
    }
    let k = map.t_values.partition_point(|&v| v <= t);
    if k >= map.t_values.len() {
        return Ok(*map.s_grid.last().unwrap());
    }
    // t_values[k - 1] <= t < t_values[k]
    let (t0, t1) = (map.t_values[k - 1], map.t_values[k]);
    let (s0, s1) = (map.s_grid[k - 1], map.s_grid[k]);
    Ok(s0 + (t - t0) / (t1 - t0) * (s1 - s0))
}

/// Tilde-clock samples and the original clock they map to.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedSolution {
    /// Original-clock path `(S(t_k), X̃_{t_k}, Ỹ_{t_k})`.
    pub trajectory: Trajectory,
    pub tilde_times: Vec<f64>,
    pub v_values: Vec<f64>,
    /// Tilde cells on which `Ṽ` changes sign.
    pub crossings: usize,
}

/// Builds the time-changed solution started at `(x₀, y₀)` from a Brownian path
/// on the tilde clock, returned on the original clock.
pub fn construct_weak_solution(
    noise: &BrownianPath,
    params: &SystemParams,
    clock_horizon: f64,
) -> Result<Trajectory, TimeChangeError> {
    Ok(construct_with_diagnostics(noise, params, clock_horizon)?.trajectory)
}

pub fn construct_with_diagnostics(
    noise: &BrownianPath,
    params: &SystemParams,
    clock_horizon: f64,
) -> Result<ConstructedSolution, TimeChangeError> {
    if !(clock_horizon > 0.0 && clock_horizon <= noise.horizon() * (1.0 + 1e-12)) {
        return Err(TimeChangeError::InvalidHorizon(clock_horizon));
    }
    let map = PowerMap::new(params.alpha);
    let (times, bs, js) = restrict(noise, clock_horizon);
    let h0 = map.h(params.x0);
    let v: Vec<f64> = times
        .iter()
        .zip(&js)
        .map(|(&t, &j)| h0 + params.y0 * t + j)
        .collect();

    let beta = map.clock_exponent();
    let c = map.clock_constant();
    let clock: Vec<f64> = pathint::cumulative(&times, &v, beta)
        .into_iter()
        .map(|s| c * s)
        .collect();
    if clock.iter().any(|s| s.is_infinite()) {
        // only a tilde cell with Ṽ ≡ 0 makes the clock integrand non-integrable
        return Err(if v.windows(2).any(|w| w[0] == 0.0 && w[1] == 0.0) {
            TimeChangeError::IntegrandSingular
        } else {
            TimeChangeError::Nonfinite
        });
    }
    if clock.iter().any(|s| !s.is_finite()) {
        return Err(TimeChangeError::Nonfinite);
    }

    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        xs: Vec::with_capacity(times.len()),
        ys: Vec::with_capacity(times.len()),
        increments: Vec::new(),
        stop_reason: StopReason::Horizon,
        stop_time: 0.0,
    };
    for k in 0..times.len() {
        let (s, x, y) = (clock[k], map.h_inv(v[k]), params.y0 + bs[k]);
        if k > 0 && s <= *traj.times.last().unwrap() {
            // clock increment lost to rounding; keep the newest state
            let n = traj.times.len() - 1;
            traj.xs[n] = x;
            traj.ys[n] = y;
            continue;
        }
        traj.times.push(s);
        traj.xs.push(x);
        traj.ys.push(y);
    }
    traj.stop_time = *traj.times.last().unwrap();
    Ok(ConstructedSolution {
        crossings: pathint::sign_changes(&v),
        trajectory: traj,
        tilde_times: times,
        v_values: v,
    })
}

fn restrict(noise: &BrownianPath, upto: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = noise.times().partition_point(|&t| t <= upto);
    let mut times = noise.times()[..n].to_vec();
    let mut bs = noise.values()[..n].to_vec();
    let mut js = noise.j_values()[..n].to_vec();
    if *times.last().unwrap() < upto * (1.0 - 1e-12) {
        bs.push(interpolate(noise.times(), noise.values(), upto));
        js.push(interpolate(noise.times(), noise.j_values(), upto));
        times.push(upto);
    }
    (times, bs, js)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    #[test]
    fn h_closed_form_values() {
        let m = PowerMap::new(1.0);
        assert!((m.h(2.0) - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.h(0.0), 0.0);
        assert_eq!(m.h_inv(0.0), 0.0);
        assert!((m.h_inv(1.0 / 3.0) - 1.0).abs() < 1e-15);
        assert_eq!(m.h(-2.0), -m.h(2.0));
    }

    #[test]
    fn clock_constant_matches_h_inverse() {
        for &alpha in &[0.3, 0.5, 0.75, 1.5] {
            let m = PowerMap::new(alpha);
            for &v in &[1e-3, 0.4, 7.0] {
                let lhs = m.h_inv(v).abs().powf(-2.0 * alpha);
                let rhs = m.clock_constant() * v.powf(-m.clock_exponent());
                assert!((lhs / rhs - 1.0).abs() < 1e-12);
            }
        }
    }

    fn traj_from(times: Vec<f64>, xs: Vec<f64>) -> Trajectory {
        let n = times.len();
        Trajectory {
            stop_time: times[n - 1],
            times,
            xs,
            ys: vec![0.0; n],
            increments: vec![],
            stop_reason: StopReason::Horizon,
        }
    }

    #[test]
    fn build_t_constant_and_zero() {
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.02).collect();
        let c: f64 = 1.7;
        let map = build_t(&traj_from(times.clone(), vec![c; 51]), 0.75);
        for (s, t) in map.s_grid.iter().zip(&map.t_values) {
            assert!((t - c.powf(1.5) * s).abs() <= 1e-13 * (1.0 + t));
        }
        let zero = build_t(&traj_from(times, vec![0.0; 51]), 0.75);
        assert!(zero.t_values.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn build_t_quadratic_integrand() {
        // X_t = t, α = 1: T(s) = s³/3 up to the trapezoid error s·Δt²/6.
        let dt = 1e-3;
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * dt).collect();
        let map = build_t(&traj_from(times.clone(), times.clone()), 1.0);
        for (s, t) in map.s_grid.iter().zip(&map.t_values) {
            assert!((t - s.powi(3) / 3.0).abs() <= s * dt * dt / 6.0 + 1e-15);
        }
    }

    #[test]
    fn invert_linear_and_flat() {
        let lin = TimeChangeMap {
            s_grid: vec![0.0, 1.0, 2.0],
            t_values: vec![0.0, 2.0, 4.0],
        };
        assert_eq!(invert_t(&lin, 1.0).unwrap(), 0.5);
        let flat = TimeChangeMap {
            s_grid: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            t_values: vec![0.0, 0.5, 1.0, 1.0, 2.0],
        };
        assert_eq!(invert_t(&flat, 1.0).unwrap(), 3.0);
        assert!(matches!(invert_t(&flat, 2.5), Err(TimeChangeError::OutOfRange { .. })));
        assert!(invert_t(&flat, -0.1).is_err());
    }

    #[test]
    fn zero_noise_clock_is_closed_form() {
        let (alpha, x0, y0) = (0.75, 0.6, 3.0);
        let params = SystemParams::new(alpha, x0, y0).unwrap();
        let noise = BrownianPath::zero(2.0, 400).unwrap();
        let sol = construct_with_diagnostics(&noise, &params, 2.0).unwrap();
        let m = PowerMap::new(alpha);
        let (beta, c, h0) = (m.clock_exponent(), m.clock_constant(), m.h(x0));
        for (k, &t) in sol.tilde_times.iter().enumerate() {
            let exact = c * ((h0 + y0 * t).powf(1.0 - beta) - h0.powf(1.0 - beta)) / (y0 * (1.0 - beta));
            assert!((sol.trajectory.times[k] - exact).abs() <= 1e-12 * (1.0 + exact));
            assert!((sol.trajectory.xs[k] - m.h_inv(h0 + y0 * t)).abs() < 1e-12);
            assert_eq!(sol.trajectory.ys[k], y0);
        }
        assert_eq!(sol.crossings, 0);
    }

    #[test]
    fn zero_noise_from_origin_is_singular() {
        let params = SystemParams::new(0.5, 0.0, 0.0).unwrap();
        let noise = BrownianPath::zero(1.0, 10).unwrap();
        assert_eq!(
            construct_weak_solution(&noise, &params, 1.0),
            Err(TimeChangeError::IntegrandSingular)
        );
    }

    #[test]
    fn origin_start_leaves_origin() {
        let params = SystemParams::new(0.5, 0.0, 0.0).unwrap();
        for i in 0..50 {
            let noise = BrownianPath::generate_graded(SeedSpec::new(31, i), 1.0, 400, CLOCK_GRADING).unwrap();
            let tr = construct_weak_solution(&noise, &params, 1.0).unwrap();
            assert!(tr.xs.last().unwrap().abs() > 0.0);
            assert!(tr.stop_time.is_finite() && tr.stop_time > 0.0);
            assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn horizon_validation() {
        let params = SystemParams::new(0.5, 1.0, 0.0).unwrap();
        let noise = BrownianPath::zero(1.0, 10).unwrap();
        assert!(construct_weak_solution(&noise, &params, 2.0).is_err());
        assert!(construct_weak_solution(&noise, &params, 0.0).is_err());
        let mid = construct_weak_solution(&noise, &params, 0.55).unwrap();
        assert_eq!(mid.len(), 7);
    }
}
