//! Strong integration of `dX = Y dt`, `dY = |X|^α dB` driven by a stored Brownian path.
//!
//! Fixed stepping walks the noise grid. Adaptive stepping subdivides noise
//! cells dyadically, filling midpoints with Brownian-bridge samples keyed by
//! `(cell index, dyadic node)`, so the same underlying Brownian motion is seen
//! whatever step sizes the state demands. Stopping events are checked at grid
//! points only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::BrownianPath;

/// Default ℓ∞ radius for declaring an origin hit.
pub const DEFAULT_ORIGIN_EPS: f64 = 1e-6;
/// Adaptive steps below `STEP_UNDERFLOW · horizon` abort with [`StopReason::StepOverflow`].
pub const STEP_UNDERFLOW: f64 = 1e-15;

const ADAPTIVE_TAG: u64 = 0xADA9_7140;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("initial state must be finite")]
    InvalidInitialState,
    #[error("invalid stop policy: {0}")]
    InvalidPolicy(&'static str),
    #[error("noise horizon {noise} is shorter than the policy horizon {policy}")]
    NoiseTooShort { noise: f64, policy: f64 },
    #[error("coupled systems need equal alpha ({0} vs {1})")]
    AlphaMismatch(f64, f64),
    #[error("adaptive growth cap must be positive, got {0}")]
    InvalidGrowth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub alpha: f64,
    pub x0: f64,
    pub y0: f64,
}

impl SystemParams {
    pub fn new(alpha: f64, x0: f64, y0: f64) -> Result<Self, SdeError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SdeError::InvalidAlpha(alpha));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(SdeError::InvalidInitialState);
        }
        Ok(Self { alpha, x0, y0 })
    }

    pub fn starts_at_origin(&self) -> bool {
        self.x0 == 0.0 && self.y0 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopPolicy {
    /// `None` disables origin detection. `Some(0.0)` detects exact zero only.
    pub origin_eps: Option<f64>,
    pub blowup_level: f64,
    pub horizon: f64,
}

impl StopPolicy {
    pub fn new(origin_eps: Option<f64>, blowup_level: f64, horizon: f64) -> Result<Self, SdeError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(SdeError::InvalidPolicy("horizon must be positive and finite"));
        }
        if !(blowup_level > 0.0) {
            return Err(SdeError::InvalidPolicy("blowup level must be positive"));
        }
        if let Some(eps) = origin_eps {
            if !(eps >= 0.0) {
                return Err(SdeError::InvalidPolicy("origin radius must be nonnegative"));
            }
            if eps >= blowup_level {
                return Err(SdeError::InvalidPolicy("origin radius must be below the blowup level"));
            }
        }
        Ok(Self {
            origin_eps,
            blowup_level,
            horizon,
        })
    }

    fn check(&self, x: f64, y: f64) -> Option<StopReason> {
        if !(x.abs() < self.blowup_level) {
            return Some(StopReason::BlowupX);
        }
        if !(y.abs() < self.blowup_level) {
            return Some(StopReason::BlowupY);
        }
        match self.origin_eps {
            Some(eps) if linf(x, y) <= eps => Some(StopReason::Origin),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    Origin,
    BlowupX,
    BlowupY,
    StepOverflow,
}

impl StopReason {
    pub fn is_blowup(self) -> bool {
        matches!(self, StopReason::BlowupX | StopReason::BlowupY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    /// Diffusion `|X|^α` replaced by `|X|^α / (1 + √Δt |X|^α)`.
    TamedEuler,
    /// Taming relative to the state: `|X|^α / (1 + √Δt |X|^α / max(|(X,Y)|∞, 1))`.
    /// Pairs with adaptive control, where the absolute factor would cap `|ΔY|` at
    /// about one per step however large the state grows.
    NormTamedEuler,
}

impl Scheme {
    /// Plain Euler for at most linear growth, tamed Euler above it.
    pub fn default_for(alpha: f64) -> Self {
        if alpha <= 1.0 {
            Scheme::Euler
        } else {
            Scheme::TamedEuler
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepControl {
    Fixed,
    /// Per-step displacement cap `max_growth · max(|(X,Y)|∞, 1)`: steps shrink until
    /// `|Y| Δt` and `|X|^α √Δt` both stay below it.
    Adaptive { max_growth: f64 },
}

/// A sampled `(t, X, Y)` path and how it ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Brownian increments used for each step; empty for paths not produced by a scheme.
    pub increments: Vec<f64>,
    pub stop_reason: StopReason,
    pub stop_time: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> (f64, f64) {
        let n = self.len() - 1;
        (self.xs[n], self.ys[n])
    }

    /// `min_t |(X_t, Y_t)|∞` over the grid.
    pub fn min_linf(&self) -> f64 {
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(&x, &y)| linf(x, y))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Which event [`first_hit`] looks for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HitEvent {
    Origin { eps: f64 },
    LevelX(f64),
    LevelY(f64),
    LevelNorm(f64),
}

pub fn linf(x: f64, y: f64) -> f64 {
    x.abs().max(y.abs())
}

/// `|x|^α` with the value at 0 pinned to exactly 0.
#[inline]
pub fn diffusion(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(alpha)
    }
}

#[inline]
fn step(scheme: Scheme, alpha: f64, x: f64, y: f64, dt: f64, db: f64) -> (f64, f64) {
    let mut sigma = diffusion(x, alpha);
    match scheme {
        Scheme::Euler => {}
        Scheme::TamedEuler => sigma /= 1.0 + dt.sqrt() * sigma,
        Scheme::NormTamedEuler => sigma /= 1.0 + dt.sqrt() * sigma / linf(x, y).max(1.0),
    }
    (x + y * dt, y + sigma * db)
}

struct Recorder<'a> {
    policy: &'a StopPolicy,
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn start(policy: &'a StopPolicy, x0: f64, y0: f64) -> Self {
        Self {
            policy,
            traj: Trajectory {
                times: vec![0.0],
                xs: vec![x0],
                ys: vec![y0],
                increments: Vec::new(),
                stop_reason: StopReason::Horizon,
                stop_time: 0.0,
            },
        }
    }

    fn push(&mut self, t: f64, x: f64, y: f64, db: f64) {
        self.traj.times.push(t);
        self.traj.xs.push(x);
        self.traj.ys.push(y);
        self.traj.increments.push(db);
    }

    /// Stop reason at the newest node, if any.
    fn event(&self) -> Option<StopReason> {
        let n = self.traj.len() - 1;
        if let Some(r) = self.policy.check(self.traj.xs[n], self.traj.ys[n]) {
            return Some(r);
        }
        if self.traj.times[n] >= self.policy.horizon * (1.0 - 1e-12) {
            return Some(StopReason::Horizon);
        }
        None
    }

    fn finish(mut self, reason: StopReason) -> Trajectory {
        self.traj.stop_reason = reason;
        self.traj.stop_time = *self.traj.times.last().unwrap();
        self.traj
    }
}

pub fn integrate(
    params: &SystemParams,
    noise: &BrownianPath,
    policy: &StopPolicy,
    scheme: Scheme,
    control: StepControl,
) -> Result<Trajectory, SdeError> {
    if noise.horizon() < policy.horizon * (1.0 - 1e-12) {
        return Err(SdeError::NoiseTooShort {
            noise: noise.horizon(),
            policy: policy.horizon,
        });
    }
    match control {
        StepControl::Fixed => Ok(integrate_fixed(params, noise, policy, scheme)),
        StepControl::Adaptive { max_growth } => {
            if !(max_growth > 0.0 && max_growth.is_finite()) {
                return Err(SdeError::InvalidGrowth(max_growth));
            }
            Ok(integrate_adaptive(params, noise, policy, scheme, max_growth))
        }
    }
}

fn integrate_fixed(
    params: &SystemParams,
    noise: &BrownianPath,
    policy: &StopPolicy,
    scheme: Scheme,
) -> Trajectory {
    let (times, bs) = (noise.times(), noise.values());
    let mut rec = Recorder::start(policy, params.x0, params.y0);
    if let Some(r) = policy.check(params.x0, params.y0) {
        return rec.finish(r);
    }
    let (mut x, mut y) = (params.x0, params.y0);
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        let db = bs[k + 1] - bs[k];
        (x, y) = step(scheme, params.alpha, x, y, dt, db);
        rec.push(times[k + 1], x, y, db);
        if let Some(r) = rec.event() {
            return rec.finish(r);
        }
    }
    rec.finish(StopReason::Horizon)
}

fn integrate_adaptive(
    params: &SystemParams,
    noise: &BrownianPath,
    policy: &StopPolicy,
    scheme: Scheme,
    max_growth: f64,
) -> Trajectory {
    let (times, bs) = (noise.times(), noise.values());
    let alpha = params.alpha;
    let min_dt = STEP_UNDERFLOW * policy.horizon;
    let bridge_root = noise.seed().derive(ADAPTIVE_TAG);
    let mut rec = Recorder::start(policy, params.x0, params.y0);
    if let Some(r) = policy.check(params.x0, params.y0) {
        return rec.finish(r);
    }
    let (mut x, mut y) = (params.x0, params.y0);
    // (t_left, t_right, B_left, B_right, dyadic node id)
    let mut stack: Vec<(f64, f64, f64, f64, u64)> = Vec::with_capacity(128);
    for k in 0..times.len() - 1 {
        let cell_seed = bridge_root.derive(k as u64);
        stack.push((times[k], times[k + 1], bs[k], bs[k + 1], 1));
        while let Some((a, b, ba, bb, node)) = stack.pop() {
            let width = b - a;
            if width <= allowed_dt(x, y, alpha, max_growth) {
                let db = bb - ba;
                (x, y) = step(scheme, alpha, x, y, width, db);
                rec.push(b, x, y, db);
                if let Some(r) = rec.event() {
                    return rec.finish(r);
                }
                continue;
            }
            if 0.5 * width < min_dt {
                return rec.finish(StopReason::StepOverflow);
            }
            let m = a + 0.5 * width;
            let bm = 0.5 * (ba + bb) + (0.25 * width).sqrt() * cell_seed.normal_at(node);
            stack.push((m, b, bm, bb, 2 * node + 1));
            stack.push((a, m, ba, bm, 2 * node));
        }
    }
    rec.finish(StopReason::Horizon)
}

fn allowed_dt(x: f64, y: f64, alpha: f64, max_growth: f64) -> f64 {
    let cap = max_growth * linf(x, y).max(1.0);
    let mut dt = f64::INFINITY;
    if y != 0.0 {
        dt = cap / y.abs();
    }
    let s = diffusion(x, alpha);
    if s > 0.0 {
        dt = dt.min((cap / s).powi(2));
    }
    dt
}

/// Synchronous coupling: both systems see the same increments on the same grid.
pub fn integrate_pair(
    p1: &SystemParams,
    p2: &SystemParams,
    noise: &BrownianPath,
    policy: &StopPolicy,
) -> Result<(Trajectory, Trajectory), SdeError> {
    integrate_pair_with(p1, p2, noise, policy, Scheme::default_for(p1.alpha), StepControl::Fixed)
}

pub fn integrate_pair_with(
    p1: &SystemParams,
    p2: &SystemParams,
    noise: &BrownianPath,
    policy: &StopPolicy,
    scheme: Scheme,
    control: StepControl,
) -> Result<(Trajectory, Trajectory), SdeError> {
    if p1.alpha != p2.alpha {
        return Err(SdeError::AlphaMismatch(p1.alpha, p2.alpha));
    }
    Ok((
        integrate(p1, noise, policy, scheme, control)?,
        integrate(p2, noise, policy, scheme, control)?,
    ))
}

/// First grid time at which `event` holds.
pub fn first_hit(traj: &Trajectory, event: HitEvent) -> Option<f64> {
    let hit = |x: f64, y: f64| match event {
        HitEvent::Origin { eps } => linf(x, y) <= eps,
        HitEvent::LevelX(l) => x.abs() >= l,
        HitEvent::LevelY(l) => y.abs() >= l,
        HitEvent::LevelNorm(l) => linf(x, y) >= l,
    };
    (0..traj.len())
        .find(|&k| hit(traj.xs[k], traj.ys[k]))
        .map(|k| traj.times[k])
}

/// Re-runs the recorded increments through `scheme` and checks every node bit for bit.
pub fn replay_matches(traj: &Trajectory, params: &SystemParams, scheme: Scheme) -> bool {
    if traj.increments.len() + 1 != traj.len() || traj.xs[0] != params.x0 || traj.ys[0] != params.y0 {
        return false;
    }
    let (mut x, mut y) = (params.x0, params.y0);
    for (k, &db) in traj.increments.iter().enumerate() {
        let dt = traj.times[k + 1] - traj.times[k];
        (x, y) = step(scheme, params.alpha, x, y, dt, db);
        if x.to_bits() != traj.xs[k + 1].to_bits() || y.to_bits() != traj.ys[k + 1].to_bits() {
            return false;
        }
    }
    true
}
