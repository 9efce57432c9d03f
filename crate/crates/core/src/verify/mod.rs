//! Statistical experiments with pass/fail verdicts.
//!
//! Each check fans out over paths with rayon, collects per-path results in path
//! order and reduces them sequentially, so a verdict depends only on its inputs
//! and seed. Path `i` always draws from `seed.with_stream(i)` (or a child of it).

mod lemmas;
pub mod thresholds;

pub use lemmas::{check_cov_bj, check_lemma2, check_lemma4, check_lemma5, check_var_j};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::moments::MomentError;
use crate::paths::{BrownianPath, PathError, PathWalker};
use crate::rng::SeedSpec;
use crate::sde::{
    self, first_hit, HitEvent, Scheme, SdeError, StepControl, StopPolicy, StopReason, SystemParams,
};
use crate::stats::{self, MeanEstimate};
use crate::timechange::{self, TimeChangeError, CLOCK_GRADING};
use thresholds as th;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    TimeChange(#[from] TimeChangeError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

fn precondition(ok: bool, msg: impl Into<String>) -> Result<(), VerifyError> {
    if ok {
        Ok(())
    } else {
        Err(VerifyError::Precondition(msg.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub statistic: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n_paths: usize,
    pub seed: SeedSpec,
}

/// A reported quantity without its own pass criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub seed: SeedSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupCurve {
    pub levels: Vec<f64>,
    pub hit_fractions: Vec<f64>,
    /// Median of `σ_L` over all paths, `+∞` when fewer than half hit `L`.
    pub median_hit_times: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub estimates: Vec<Estimate>,
    pub curve: Option<BlowupCurve>,
    /// Per-path samples for plotting, keyed by series name.
    #[serde(skip)]
    pub samples: Vec<(String, Vec<f64>)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn merge(&mut self, other: Outcome) {
        self.verdicts.extend(other.verdicts);
        self.estimates.extend(other.estimates);
        self.samples.extend(other.samples);
        if other.curve.is_some() {
            self.curve = other.curve;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn verdict_row(&mut self, name: impl Into<String>, stat: f64, ci: (f64, f64), threshold: f64, pass: bool, n: usize, seed: SeedSpec) {
        self.verdicts.push(Verdict {
            name: name.into(),
            statistic: stat,
            ci_low: ci.0,
            ci_high: ci.1,
            threshold,
            pass,
            n_paths: n,
            seed,
        });
    }

    fn estimate_row(&mut self, name: impl Into<String>, value: f64, ci: (f64, f64), n: usize, seed: SeedSpec) {
        self.estimates.push(Estimate {
            name: name.into(),
            value,
            ci_low: ci.0,
            ci_high: ci.1,
            n,
            seed,
        });
    }
}

fn par_paths<T, F>(n: usize, f: F) -> Result<Vec<T>, VerifyError>
where
    T: Send,
    F: Fn(u64) -> Result<T, VerifyError> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

fn steps_for(horizon: f64, dt: f64) -> Result<usize, VerifyError> {
    precondition(dt > 0.0 && dt.is_finite() && dt <= horizon, format!("step {dt} must lie in (0, horizon]"))?;
    Ok((horizon / dt).round().max(1.0) as usize)
}

fn open_policy(horizon: f64) -> Result<StopPolicy, VerifyError> {
    Ok(StopPolicy::new(None, th::RUNAWAY_LEVEL, horizon)?)
}

/// Ratio `a/b` of two paired means with a delta-method interval.
fn ratio_ci(a: &[f64], b: &[f64]) -> (f64, (f64, f64)) {
    let (ma, mb) = (MeanEstimate::from_samples(a), MeanEstimate::from_samples(b));
    let r = ma.mean / mb.mean;
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - r * y).collect();
    let se = MeanEstimate::from_samples(&resid).se / mb.mean.abs();
    (r, (r - stats::Z95 * se, r + stats::Z95 * se))
}

fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}

/// Synchronous-coupling probe of pathwise uniqueness: `D(ε) = E sup_t (X¹ − X²)²`
/// for starts `(x₀, y₀)` and `(x₀ + ε, y₀)` under the same noise.
pub fn check_uniqueness(
    params: &SystemParams,
    eps_list: &[f64],
    n_paths: usize,
    horizon: f64,
    dt: f64,
    seed: SeedSpec,
) -> Result<Outcome, VerifyError> {
    precondition(params.alpha > 0.5, "alpha must exceed 1/2")?;
    precondition(!params.starts_at_origin(), "start must differ from the origin")?;
    precondition(eps_list.iter().all(|e| *e >= 0.0 && e.is_finite()), "offsets must be finite and nonnegative")?;
    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    precondition(eps.iter().filter(|e| **e > 0.0).count() >= 2, "need two distinct positive offsets")?;
    precondition(n_paths >= 2, "need at least two paths")?;
    let steps = steps_for(horizon, dt)?;
    let policy = open_policy(horizon)?;
    let scheme = Scheme::default_for(params.alpha);

    // per path: sup (X¹ − X²)² for each ε, largest ε first
    let per_path = par_paths(n_paths, |i| {
        let noise = BrownianPath::generate(seed.with_stream(i), horizon, steps)?;
        let base = sde::integrate(params, &noise, &policy, scheme, StepControl::Fixed)?;
        eps.iter()
            .map(|&e| {
                let shifted = SystemParams::new(params.alpha, params.x0 + e, params.y0)?;
                let other = sde::integrate(&shifted, &noise, &policy, scheme, StepControl::Fixed)?;
                Ok(sup_sq_gap(&base.xs, &other.xs))
            })
            .collect()
    })?;
    let column = |k: usize| -> Vec<f64> { per_path.iter().map(|row: &Vec<f64>| row[k]).collect() };

    let mut out = Outcome::default();
    let mut means = Vec::with_capacity(eps.len());
    for (k, &e) in eps.iter().enumerate() {
        let m = MeanEstimate::from_samples(&column(k));
        out.estimate_row(format!("D(eps={})", fmt_num(e)), m.mean, m.ci95(), n_paths, seed);
        means.push(m.mean);
    }
    // worst step ratio D(smaller ε) / D(larger ε); ε = 0 gives D = 0 exactly
    let worst = means
        .windows(2)
        .map(|w| if w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max);
    out.verdict_row("nonincreasing", worst, (worst, worst), 1.0, worst <= 1.0, n_paths, seed);

    let positive: Vec<usize> = (0..eps.len()).filter(|&k| eps[k] > 0.0).collect();
    let (kl, ks) = (positive[0], *positive.last().unwrap());
    let (r, ci) = ratio_ci(&column(ks), &column(kl));
    let bound = (eps[ks] / eps[kl]).powi(2) * th::SCALING_SLACK;
    out.verdict_row("quadratic_scaling", r, ci, bound, r <= bound, n_paths, seed);
    Ok(out)
}

fn sup_sq_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).fold(0.0, f64::max)
}

/// Fifth percentile of the path-minimum ℓ∞ distance to the origin on a sequence
/// of nested grids built by refining the same Brownian paths.
pub fn check_origin_avoidance(
    params: &SystemParams,
    n_paths: usize,
    horizon: f64,
    dt_list: &[f64],
    seed: SeedSpec,
) -> Result<Outcome, VerifyError> {
    precondition(params.alpha > 0.5, "alpha must exceed 1/2")?;
    precondition(!params.starts_at_origin(), "start must differ from the origin")?;
    precondition(!dt_list.is_empty(), "need at least one step size")?;
    precondition(n_paths >= 20, "need at least 20 paths for a 5% quantile")?;
    let base_steps = steps_for(horizon, dt_list[0])?;
    let mut factors = Vec::with_capacity(dt_list.len());
    for w in dt_list.windows(2) {
        let f = w[0] / w[1];
        precondition(
            f > 1.5 && (f - f.round()).abs() < 1e-9,
            "step sizes must decrease by integer factors",
        )?;
        factors.push(f.round() as usize);
    }
    let policy = StopPolicy::new(Some(sde::DEFAULT_ORIGIN_EPS), th::RUNAWAY_LEVEL, horizon)?;
    let scheme = Scheme::default_for(params.alpha);

    let per_path = par_paths(n_paths, |i| {
        let s = seed.with_stream(i);
        let mut noise = BrownianPath::generate(s, horizon, base_steps)?;
        let mut mins = Vec::with_capacity(dt_list.len());
        for k in 0..dt_list.len() {
            if k > 0 {
                noise = noise.refine(factors[k - 1], s.derive(th::REFINE_TAG + k as u64))?;
            }
            mins.push(sde::integrate(params, &noise, &policy, scheme, StepControl::Fixed)?.min_linf());
        }
        Ok(mins)
    })?;

    let mut out = Outcome::default();
    let mut qs = Vec::with_capacity(dt_list.len());
    for (k, &dt) in dt_list.iter().enumerate() {
        let col: Vec<f64> = per_path.iter().map(|r| r[k]).collect();
        let sorted = stats::sorted(&col);
        let q = stats::quantile_sorted(&sorted, th::ORIGIN_QUANTILE);
        out.estimate_row(
            format!("q05_min_dist(dt={})", fmt_num(dt)),
            q,
            stats::quantile_ci95(&sorted, th::ORIGIN_QUANTILE),
            n_paths,
            seed,
        );
        out.samples.push((format!("min_dist(dt={})", fmt_num(dt)), col));
        qs.push(q);
    }
    let qmin = qs.iter().copied().fold(f64::INFINITY, f64::min);
    out.verdict_row("quantile_positive", qmin, (qmin, qmin), 0.0, qmin > 0.0, n_paths, seed);
    if qs.len() > 1 {
        let worst = qs.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
        out.verdict_row(
            "refinement_ratio",
            worst,
            (worst, worst),
            th::REFINEMENT_GUARD,
            worst >= th::REFINEMENT_GUARD,
            n_paths,
            seed,
        );
    }
    Ok(out)
}

/// Builds weak solutions from the origin by the time change and checks they
/// leave it, alongside the trivial zero solution driven by the same kind of noise.
pub fn check_nonuniqueness(
    alpha: f64,
    n_paths: usize,
    tilde_horizon: f64,
    steps: usize,
    seed: SeedSpec,
) -> Result<Outcome, VerifyError> {
    precondition(alpha > 0.0 && alpha < 1.0, format!("alpha must lie in (0, 1), got {alpha}"))?;
    precondition(n_paths >= 2 && steps >= 1, "need paths and steps")?;
    let origin = SystemParams::new(alpha, 0.0, 0.0)?;
    let level = th::NONZERO_FACTOR * sde::DEFAULT_ORIGIN_EPS;
    let zero_policy = open_policy(tilde_horizon)?;

    // (left the origin, Ỹ², ∫|X|^{2α} ds, zero solution replays)
    let per_path = par_paths(n_paths, |i| {
        let s = seed.with_stream(i);
        let noise = BrownianPath::generate_graded(s, tilde_horizon, steps, CLOCK_GRADING)?;
        let traj = timechange::construct_weak_solution(&noise, &origin, tilde_horizon)?;
        let (x_end, y_end) = traj.last_state();
        let quad_var = timechange::build_t(&traj, alpha).max_value();

        let flat = BrownianPath::generate(s.derive(th::ZERO_TAG), tilde_horizon, steps)?;
        let zero = sde::integrate(&origin, &flat, &zero_policy, Scheme::Euler, StepControl::Fixed)?;
        let trivial = zero.xs.iter().chain(&zero.ys).all(|v| *v == 0.0)
            && zero.stop_reason == StopReason::Horizon
            && sde::replay_matches(&zero, &origin, Scheme::Euler);
        Ok((x_end.abs() > level, y_end * y_end, quad_var, trivial))
    })?;

    let mut out = Outcome::default();
    let left = per_path.iter().filter(|r| r.0).count();
    let (p, lo, hi) = stats::wilson95(left, n_paths);
    out.verdict_row(
        "left_origin_fraction",
        p,
        (lo, hi),
        th::NONUNIQUE_FRACTION,
        p >= th::NONUNIQUE_FRACTION,
        n_paths,
        seed,
    );

    let replayed = per_path.iter().filter(|r| r.3).count();
    let (p, lo, hi) = stats::wilson95(replayed, n_paths);
    out.verdict_row("zero_solution_replay", p, (lo, hi), 1.0, replayed == n_paths, n_paths, seed);

    // E Ỹ² against E ∫|X|^{2α} ds on the original clock
    let y2: Vec<f64> = per_path.iter().map(|r| r.1).collect();
    let qv: Vec<f64> = per_path.iter().map(|r| r.2).collect();
    let diff: Vec<f64> = y2.iter().zip(&qv).map(|(a, b)| a - b).collect();
    let (m_y, m_q, m_d) = (
        MeanEstimate::from_samples(&y2),
        MeanEstimate::from_samples(&qv),
        MeanEstimate::from_samples(&diff),
    );
    out.verdict_row(
        "ito_isometry",
        m_y.mean,
        m_y.ci95(),
        m_q.mean,
        m_d.within(0.0, th::SE_MULTIPLE),
        n_paths,
        seed,
    );
    Ok(out)
}

/// Fraction of paths whose `max(|B|, |J|)` stays above `max(T^0.4, 1)` on `[T/2, T]`.
pub fn check_transience(n_paths: usize, checkpoints: &[f64], dt: f64, seed: SeedSpec) -> Result<Outcome, VerifyError> {
    precondition(!checkpoints.is_empty(), "need at least one checkpoint")?;
    precondition(
        checkpoints[0] > 0.0 && checkpoints.windows(2).all(|w| w[1] > w[0]),
        "checkpoints must be positive and increasing",
    )?;
    precondition(n_paths >= 1, "need paths")?;
    let horizon = *checkpoints.last().unwrap();
    let steps = steps_for(horizon, dt)?;
    let per_path = par_paths(n_paths, |i| {
        let walker = PathWalker::new(seed.with_stream(i), horizon, steps)?;
        Ok(transience_indicators(walker, checkpoints))
    })?;

    let mut out = Outcome::default();
    let mut rs = Vec::with_capacity(checkpoints.len());
    for (k, &t) in checkpoints.iter().enumerate() {
        let hits = per_path.iter().filter(|r| r[k]).count();
        let (p, lo, hi) = stats::wilson95(hits, n_paths);
        out.estimate_row(format!("r(T={})", fmt_num(t)), p, (lo, hi), n_paths, seed);
        rs.push((p, lo, hi));
    }
    let worst = rs.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min);
    if rs.len() > 1 {
        out.verdict_row("nondecreasing", worst, (worst, worst), 0.0, worst >= 0.0, n_paths, seed);
    }
    let (p, lo, hi) = *rs.last().unwrap();
    out.verdict_row(
        "final_fraction",
        p,
        (lo, hi),
        th::TRANSIENCE_FRACTION,
        p >= th::TRANSIENCE_FRACTION,
        n_paths,
        seed,
    );
    Ok(out)
}

/// Per checkpoint `T`: whether `min_{t∈[T/2,T]} max(|B_t|,|J_t|) > max(T^0.4, 1)`
/// on the grid nodes of one streamed path.
pub fn transience_indicators(nodes: impl Iterator<Item = (f64, f64, f64)>, checkpoints: &[f64]) -> Vec<bool> {
    let mut mins = vec![f64::INFINITY; checkpoints.len()];
    for (t, b, j) in nodes {
        let r = b.abs().max(j.abs());
        for (k, &cp) in checkpoints.iter().enumerate() {
            if t >= 0.5 * cp && t <= cp * (1.0 + 1e-12) {
                mins[k] = mins[k].min(r);
            }
        }
    }
    checkpoints
        .iter()
        .zip(&mins)
        .map(|(&cp, &m)| m > cp.powf(th::TRANSIENCE_EXPONENT).max(1.0))
        .collect()
}

/// Integration settings for the blowup harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupSettings {
    /// Noise grid spacing before adaptive subdivision.
    pub dt: f64,
    pub max_growth: f64,
    pub scheme: Scheme,
}

impl Default for BlowupSettings {
    fn default() -> Self {
        Self {
            dt: 0.01,
            max_growth: 0.1,
            scheme: Scheme::NormTamedEuler,
        }
    }
}

struct BlowupPath {
    /// `σ^X_L` per level.
    hits: Vec<Option<f64>>,
    /// `|Y| ≥ L_max/10` somewhere on `[0, σ_{L_max}]`.
    interleaved: bool,
    overflow: bool,
}

fn blowup_runs(
    params: &SystemParams,
    levels: &[f64],
    horizon: f64,
    n_paths: usize,
    seed: SeedSpec,
    settings: &BlowupSettings,
) -> Result<Vec<BlowupPath>, VerifyError> {
    precondition(!params.starts_at_origin(), "start must differ from the origin")?;
    precondition(
        !levels.is_empty() && levels[0] > 0.0 && levels.windows(2).all(|w| w[1] > w[0]),
        "levels must be positive and increasing",
    )?;
    precondition(n_paths >= 1, "need paths")?;
    let top = *levels.last().unwrap();
    precondition(top.is_finite(), "levels must be finite")?;
    let steps = steps_for(horizon, settings.dt)?;
    // |Y| outruns |X| near explosion; stop far enough above L_max that σ^X_{L_max} is seen
    let policy = StopPolicy::new(Some(sde::DEFAULT_ORIGIN_EPS), top * th::BLOWUP_STOP_FACTOR, horizon)?;
    let control = StepControl::Adaptive {
        max_growth: settings.max_growth,
    };
    par_paths(n_paths, |i| {
        let noise = BrownianPath::generate(seed.with_stream(i), horizon, steps)?;
        let traj = sde::integrate(params, &noise, &policy, settings.scheme, control)?;
        let hits: Vec<Option<f64>> = levels.iter().map(|&l| first_hit(&traj, HitEvent::LevelX(l))).collect();
        let interleaved = match hits.last().unwrap() {
            Some(s) => traj
                .times
                .iter()
                .zip(&traj.ys)
                .any(|(t, y)| t <= s && y.abs() >= top / 10.0),
            None => false,
        };
        Ok(BlowupPath {
            hits,
            interleaved,
            overflow: traj.stop_reason == StopReason::StepOverflow,
        })
    })
}

fn hit_fraction(runs: &[BlowupPath], k: usize) -> (usize, (f64, f64, f64)) {
    let hits = runs.iter().filter(|r| r.hits[k].is_some()).count();
    (hits, stats::wilson95(hits, runs.len()))
}

/// Explosion of `X` in finite time: hit curve over `levels`, stabilisation of the
/// median hitting time and simultaneous growth of `Y`.
pub fn check_blowup(
    params: &SystemParams,
    levels: &[f64],
    horizon: f64,
    n_paths: usize,
    seed: SeedSpec,
    settings: &BlowupSettings,
) -> Result<Outcome, VerifyError> {
    precondition(params.alpha > 1.0, format!("alpha must exceed 1, got {}", params.alpha))?;
    let runs = blowup_runs(params, levels, horizon, n_paths, seed, settings)?;
    let n = runs.len();
    let top = levels.len() - 1;

    let mut curve = BlowupCurve {
        levels: levels.to_vec(),
        hit_fractions: Vec::with_capacity(levels.len()),
        median_hit_times: Vec::with_capacity(levels.len()),
    };
    let mut sorted_times = Vec::with_capacity(levels.len());
    let mut out = Outcome::default();
    for (k, &l) in levels.iter().enumerate() {
        let (_, (p, lo, hi)) = hit_fraction(&runs, k);
        let times: Vec<f64> = runs.iter().map(|r| r.hits[k].unwrap_or(f64::INFINITY)).collect();
        let sorted = stats::sorted(&times);
        let med = stats::quantile_sorted(&sorted, 0.5);
        out.estimate_row(format!("hit_fraction(L={})", fmt_num(l)), p, (lo, hi), n, seed);
        out.estimate_row(
            format!("median_hit_time(L={})", fmt_num(l)),
            med,
            stats::quantile_ci95(&sorted, 0.5),
            n,
            seed,
        );
        out.samples.push((format!("hit_time(L={})", fmt_num(l)), times));
        curve.hit_fractions.push(p);
        curve.median_hit_times.push(med);
        sorted_times.push(sorted);
    }

    let (_, (p, lo, hi)) = hit_fraction(&runs, top);
    out.verdict_row("hit_fraction", p, (lo, hi), th::HIT_FRACTION, p >= th::HIT_FRACTION, n, seed);

    // compare against the level closest to L_max/100
    let target = levels[top] / 100.0;
    let low = (0..top)
        .min_by(|&a, &b| (levels[a] / target).ln().abs().total_cmp(&(levels[b] / target).ln().abs()))
        .unwrap_or(0);
    let (m_top, m_low) = (curve.median_hit_times[top], curve.median_hit_times[low]);
    let ratio = m_top / m_low;
    let (ci_top, ci_low) = (
        stats::quantile_ci95(&sorted_times[top], 0.5),
        stats::quantile_ci95(&sorted_times[low], 0.5),
    );
    out.verdict_row(
        "median_ratio",
        ratio,
        (ci_top.0 / ci_low.1, ci_top.1 / ci_low.0),
        th::MEDIAN_RATIO,
        ratio.is_finite() && ratio <= th::MEDIAN_RATIO,
        n,
        seed,
    );

    let (blown, _) = hit_fraction(&runs, top);
    let both = runs.iter().filter(|r| r.interleaved).count();
    let (p, lo, hi) = stats::wilson95(both, blown);
    out.verdict_row("interleave", p, (lo, hi), th::INTERLEAVE_FRACTION, blown > 0 && p >= th::INTERLEAVE_FRACTION, blown, seed);

    let over = runs.iter().filter(|r| r.overflow).count();
    let (p, lo, hi) = stats::wilson95(over, n);
    out.verdict_row("step_overflow", p, (lo, hi), th::OVERFLOW_FRACTION, p < th::OVERFLOW_FRACTION, n, seed);

    out.curve = Some(curve);
    Ok(out)
}

/// The blowup harness run at growth exponent `α ≤ 1`, where paths must not
/// reach `level`. With `reference` (the hit fraction of an explosive run at the
/// same level) a separation verdict is added.
pub fn check_blowup_control(
    params: &SystemParams,
    level: f64,
    horizon: f64,
    n_paths: usize,
    seed: SeedSpec,
    settings: &BlowupSettings,
    reference: Option<f64>,
) -> Result<Outcome, VerifyError> {
    precondition(params.alpha <= 1.0, format!("control needs alpha at most 1, got {}", params.alpha))?;
    let runs = blowup_runs(params, &[level], horizon, n_paths, seed, settings)?;
    let (_, (p, lo, hi)) = hit_fraction(&runs, 0);
    let mut out = Outcome::default();
    out.verdict_row(
        "control_hit_fraction",
        p,
        (lo, hi),
        th::CONTROL_FRACTION,
        p <= th::CONTROL_FRACTION,
        n_paths,
        seed,
    );
    if let Some(r) = reference {
        let gap = r - p;
        out.verdict_row("separation", gap, (gap, gap), th::SEPARATION, gap >= th::SEPARATION, n_paths, seed);
    }
    Ok(out)
}
