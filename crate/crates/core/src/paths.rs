//! Discrete Brownian paths with their running time integral `J_t = ∫₀ᵗ B_s ds`.
//!
//! `J` is stored alongside `B` as the trapezoid cumulative integral on the
//! path's own grid. Paths are immutable once built; refinement produces a new
//! path that agrees with its parent at every parent node.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SeedSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("number of steps must be at least 1")]
    ZeroSteps,
    #[error("refinement factor must be at least 2, got {0}")]
    InvalidFactor(usize),
    #[error("grading exponent must be at least 1, got {0}")]
    InvalidGrading(f64),
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("grid must start at 0 and be strictly increasing")]
    InvalidGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    seed: SeedSpec,
    times: Vec<f64>,
    values: Vec<f64>,
    j_values: Vec<f64>,
}

impl BrownianPath {
    /// Standard Brownian motion on a uniform grid of `steps` cells over `[0, horizon]`.
    pub fn generate(seed: SeedSpec, horizon: f64, steps: usize) -> Result<Self, PathError> {
        check_horizon(horizon)?;
        if steps == 0 {
            return Err(PathError::ZeroSteps);
        }
        let times = uniform_grid(horizon, steps);
        Ok(Self::sample_on_grid(seed, times))
    }

    /// Brownian motion on the graded grid `t_k = (k/steps)^gamma · horizon`,
    /// which clusters nodes near `t = 0`.
    pub fn generate_graded(
        seed: SeedSpec,
        horizon: f64,
        steps: usize,
        gamma: f64,
    ) -> Result<Self, PathError> {
        check_horizon(horizon)?;
        if steps == 0 {
            return Err(PathError::ZeroSteps);
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(PathError::InvalidGrading(gamma));
        }
        let times = (0..=steps)
            .map(|k| {
                if k == steps {
                    horizon
                } else {
                    (k as f64 / steps as f64).powf(gamma) * horizon
                }
            })
            .collect();
        Ok(Self::sample_on_grid(seed, times))
    }

    /// A path with prescribed values, e.g. the zero path. `J` is recomputed.
    pub fn from_values(seed: SeedSpec, times: Vec<f64>, values: Vec<f64>) -> Result<Self, PathError> {
        validate_grid(&times)?;
        if values.len() != times.len() || values[0] != 0.0 {
            return Err(PathError::InvalidGrid);
        }
        let j_values = trapezoid_cumulative(&times, &values);
        Ok(Self {
            seed,
            times,
            values,
            j_values,
        })
    }

    /// The all-zero path on a uniform grid.
    pub fn zero(horizon: f64, steps: usize) -> Result<Self, PathError> {
        check_horizon(horizon)?;
        if steps == 0 {
            return Err(PathError::ZeroSteps);
        }
        let times = uniform_grid(horizon, steps);
        let values = vec![0.0; times.len()];
        Self::from_values(SeedSpec::new(0, 0), times, values)
    }

    fn sample_on_grid(seed: SeedSpec, times: Vec<f64>) -> Self {
        let mut normals = seed.normals();
        let mut values = Vec::with_capacity(times.len());
        values.push(0.0);
        let mut b = 0.0;
        for w in times.windows(2) {
            b += (w[1] - w[0]).sqrt() * normals.next_normal();
            values.push(b);
        }
        let j_values = trapezoid_cumulative(&times, &values);
        Self {
            seed,
            times,
            values,
            j_values,
        }
    }

    /// Splits every cell into `factor` equal sub-cells, filling the new nodes
    /// with Brownian-bridge samples drawn from `seed`.
    pub fn refine(&self, factor: usize, seed: SeedSpec) -> Result<Self, PathError> {
        if factor < 2 {
            return Err(PathError::InvalidFactor(factor));
        }
        Ok(self.insert_bridge_points(seed, |a, b| {
            (1..factor)
                .map(|i| a + (b - a) * i as f64 / factor as f64)
                .collect()
        }))
    }

    /// Inserts one node per cell at the midpoint in `t^{1/gamma}` coordinates.
    /// Applied to a grid from [`generate_graded`](Self::generate_graded) with the
    /// same `gamma`, this yields the graded grid with twice the steps.
    pub fn refine_graded(&self, gamma: f64, seed: SeedSpec) -> Result<Self, PathError> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(PathError::InvalidGrading(gamma));
        }
        let horizon = self.horizon();
        Ok(self.insert_bridge_points(seed, |a, b| {
            let ra = (a / horizon).powf(1.0 / gamma);
            let rb = (b / horizon).powf(1.0 / gamma);
            let m = (0.5 * (ra + rb)).powf(gamma) * horizon;
            if m > a && m < b {
                vec![m]
            } else {
                vec![0.5 * (a + b)]
            }
        }))
    }

    /// Subdivides only the first cell `[0, t₁]`, at `t₁ (i/factor)^gamma`.
    /// On a graded grid this is what a `factor`-fold graded refinement does near
    /// the origin; later nodes keep their `B` values.
    pub fn refine_graded_head(&self, gamma: f64, factor: usize, seed: SeedSpec) -> Result<Self, PathError> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(PathError::InvalidGrading(gamma));
        }
        if factor < 2 {
            return Err(PathError::InvalidFactor(factor));
        }
        let first = self.times[1];
        Ok(self.insert_bridge_points(seed, |a, b| {
            if b != first {
                return Vec::new();
            }
            (1..factor)
                .map(|i| a + (b - a) * (i as f64 / factor as f64).powf(gamma))
                .collect()
        }))
    }

    fn insert_bridge_points<F>(&self, seed: SeedSpec, interior: F) -> Self
    where
        F: Fn(f64, f64) -> Vec<f64>,
    {
        let mut normals = seed.normals();
        let mut times = Vec::with_capacity(2 * self.times.len());
        let mut values = Vec::with_capacity(2 * self.times.len());
        times.push(self.times[0]);
        values.push(self.values[0]);
        for k in 0..self.times.len() - 1 {
            let (a, b) = (self.times[k], self.times[k + 1]);
            let b_end = self.values[k + 1];
            let (mut left_t, mut left_v) = (a, self.values[k]);
            for s in interior(a, b) {
                let mean = left_v + (s - left_t) / (b - left_t) * (b_end - left_v);
                let var = (s - left_t) * (b - s) / (b - left_t);
                let v = mean + var.sqrt() * normals.next_normal();
                times.push(s);
                values.push(v);
                left_t = s;
                left_v = v;
            }
            times.push(b);
            values.push(b_end);
        }
        let j_values = trapezoid_cumulative(&times, &values);
        Self {
            seed,
            times,
            values,
            j_values,
        }
    }

    /// `J_t` by linear interpolation of the stored running integral.
    pub fn integrated_value(&self, t: f64) -> Result<f64, PathError> {
        self.check_time(t)?;
        Ok(interpolate(&self.times, &self.j_values, t))
    }

    /// `B_t` by linear interpolation.
    pub fn value_at(&self, t: f64) -> Result<f64, PathError> {
        self.check_time(t)?;
        Ok(interpolate(&self.times, &self.values, t))
    }

    /// The reflected path `-B`, same grid and seed.
    pub fn mirrored(&self) -> Self {
        Self {
            seed: self.seed,
            times: self.times.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            j_values: self.j_values.iter().map(|v| -v).collect(),
        }
    }

    fn check_time(&self, t: f64) -> Result<(), PathError> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(PathError::TimeOutOfRange { t, horizon });
        }
        Ok(())
    }

    pub fn seed(&self) -> SeedSpec {
        self.seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn j_values(&self) -> &[f64] {
        &self.j_values
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("path has at least one node")
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }
}

/// Streams `(t, B_t, J_t)` over a uniform grid without storing the path.
/// Produces exactly the nodes of [`BrownianPath::generate`] with the same arguments.
#[derive(Debug, Clone)]
pub struct PathWalker {
    normals: crate::rng::NormalStream,
    dt: f64,
    horizon: f64,
    steps: usize,
    k: usize,
    b: f64,
    j: f64,
}

impl PathWalker {
    pub fn new(seed: SeedSpec, horizon: f64, steps: usize) -> Result<Self, PathError> {
        check_horizon(horizon)?;
        if steps == 0 {
            return Err(PathError::ZeroSteps);
        }
        Ok(Self {
            normals: seed.normals(),
            dt: horizon / steps as f64,
            horizon,
            steps,
            k: 0,
            b: 0.0,
            j: 0.0,
        })
    }

    fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt
        }
    }
}

impl Iterator for PathWalker {
    type Item = (f64, f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.k > self.steps {
            return None;
        }
        if self.k > 0 {
            let (t0, t1) = (self.time(self.k - 1), self.time(self.k));
            let b_new = self.b + (t1 - t0).sqrt() * self.normals.next_normal();
            self.j += 0.5 * (t1 - t0) * (self.b + b_new);
            self.b = b_new;
        }
        let item = (self.time(self.k), self.b, self.j);
        self.k += 1;
        Some(item)
    }
}

/// Running trapezoid integral of `values` over `times`, starting at 0.
pub fn trapezoid_cumulative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..times.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        out.push(acc);
    }
    out
}

/// Piecewise-linear interpolation on a sorted grid; clamps outside it.
pub fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return values[last];
    }
    let k = times.partition_point(|&s| s <= t) - 1;
    let w = (t - times[k]) / (times[k + 1] - times[k]);
    values[k] + w * (values[k + 1] - values[k])
}

fn uniform_grid(horizon: f64, steps: usize) -> Vec<f64> {
    let dt = horizon / steps as f64;
    (0..=steps)
        .map(|k| if k == steps { horizon } else { k as f64 * dt })
        .collect()
}

fn check_horizon(horizon: f64) -> Result<(), PathError> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(PathError::InvalidHorizon(horizon))
    }
}

fn validate_grid(times: &[f64]) -> Result<(), PathError> {
    if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PathError::InvalidGrid);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_refinement_touches_first_cell_only() {
        let s = SeedSpec::new(2, 5);
        let p = BrownianPath::generate_graded(s, 1.0, 8, 3.0).unwrap();
        let r = p.refine_graded_head(3.0, 4, s.derive(1)).unwrap();
        assert_eq!(r.steps(), p.steps() + 3);
        let t1 = p.times()[1];
        for i in 1..4 {
            assert!((r.times()[i] - t1 * (i as f64 / 4.0).powi(3)).abs() < 1e-18);
        }
        assert_eq!(&r.times()[4..], &p.times()[1..]);
        assert_eq!(&r.values()[4..], &p.values()[1..]);
        assert_eq!(p.refine_graded_head(3.0, 1, s), Err(PathError::InvalidFactor(1)));
    }

    #[test]
    fn single_step_is_one_trapezoid() {
        let seed = SeedSpec::new(3, 0);
        let p = BrownianPath::generate(seed, 1.0, 1).unwrap();
        let z = seed.normal_at(0);
        assert_eq!(p.values(), &[0.0, z]);
        assert_eq!(p.j_values(), &[0.0, z / 2.0]);
    }

    #[test]
    fn generation_is_deterministic() {
        let s = SeedSpec::new(99, 17);
        let a = BrownianPath::generate(s, 2.0, 500).unwrap();
        let b = BrownianPath::generate(s, 2.0, 500).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = SeedSpec::new(0, 0);
        assert_eq!(BrownianPath::generate(s, 1.0, 0), Err(PathError::ZeroSteps));
        assert!(matches!(
            BrownianPath::generate(s, f64::NAN, 4),
            Err(PathError::InvalidHorizon(_))
        ));
        assert!(matches!(
            BrownianPath::generate(s, f64::INFINITY, 4),
            Err(PathError::InvalidHorizon(_))
        ));
        let p = BrownianPath::generate(s, 1.0, 4).unwrap();
        assert_eq!(p.refine(1, s), Err(PathError::InvalidFactor(1)));
        assert!(p.integrated_value(1.5).is_err());
        assert!(p.integrated_value(-0.1).is_err());
    }

    #[test]
    fn integrated_value_at_nodes() {
        let p = BrownianPath::generate(SeedSpec::new(4, 2), 1.0, 10).unwrap();
        assert_eq!(p.integrated_value(0.0).unwrap(), 0.0);
        for k in 0..=10 {
            assert_eq!(p.integrated_value(p.times()[k]).unwrap(), p.j_values()[k]);
        }
    }

    #[test]
    fn refinement_pins_parent_nodes() {
        let s = SeedSpec::new(8, 1);
        let p = BrownianPath::generate(s, 1.0, 16).unwrap();
        let r = p.refine(4, s.derive(1)).unwrap();
        assert_eq!(r.steps(), 64);
        for k in 0..=16 {
            assert_eq!(r.values()[4 * k], p.values()[k]);
            assert!((r.times()[4 * k] - p.times()[k]).abs() < 1e-15);
        }
        assert_eq!(r.j_values(), trapezoid_cumulative(r.times(), r.values()).as_slice());
    }

    #[test]
    fn graded_refinement_doubles_graded_grid() {
        let s = SeedSpec::new(8, 1);
        let p = BrownianPath::generate_graded(s, 1.0, 50, 3.0).unwrap();
        let r = p.refine_graded(3.0, s.derive(2)).unwrap();
        let q = BrownianPath::generate_graded(s, 1.0, 100, 3.0).unwrap();
        for (a, b) in r.times().iter().zip(q.times()) {
            assert!((a - b).abs() < 1e-14);
        }
        for k in 0..=50 {
            assert_eq!(r.values()[2 * k], p.values()[k]);
        }
    }

    #[test]
    fn walker_matches_stored_path() {
        let s = SeedSpec::new(21, 5);
        let p = BrownianPath::generate(s, 3.0, 300).unwrap();
        let walked: Vec<_> = PathWalker::new(s, 3.0, 300).unwrap().collect();
        assert_eq!(walked.len(), 301);
        for (k, (t, b, j)) in walked.into_iter().enumerate() {
            assert_eq!(t, p.times()[k]);
            assert_eq!(b, p.values()[k]);
            assert_eq!(j, p.j_values()[k]);
        }
    }

    #[test]
    fn bridge_midpoint_law() {
        // Conditional law of B_{1/2} given B_0 = 0, B_1: mean B_1/2, variance 1/4.
        let n = 40_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let s = SeedSpec::new(12, i);
            let p = BrownianPath::generate(s, 1.0, 1).unwrap();
            let r = p.refine(2, s.derive(3)).unwrap();
            let resid = r.values()[1] - 0.5 * p.values()[1];
            s1 += resid;
            s2 += resid * resid;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 * (0.25 / n as f64).sqrt());
        assert!((var - 0.25).abs() < 4.0 * 0.25 * (2.0 / n as f64).sqrt());
    }
}
