//! Experiments on the Gaussian pair `(B, J)` and the fractional moment integrals.

use super::{par_paths, precondition, steps_for, th, Outcome, VerifyError};
use crate::moments::{self, GaussPair, MomentSpec};
use crate::paths::BrownianPath;
use crate::rng::SeedSpec;
use crate::stats::{self, MeanEstimate};

fn within_se(out: &mut Outcome, name: String, samples: &[f64], target: f64, k: f64, seed: SeedSpec) {
    let m = MeanEstimate::from_samples(samples);
    out.verdict_row(name, m.mean, m.ci95(), target, m.within(target, k), samples.len(), seed);
}

/// `Var J_t` against `t³/3` at each requested time, from one path per sample.
pub fn check_var_j(times: &[f64], n_paths: usize, dt: f64, seed: SeedSpec) -> Result<Outcome, VerifyError> {
    precondition(!times.is_empty() && times.iter().all(|t| *t > 0.0 && t.is_finite()), "times must be positive")?;
    precondition(n_paths >= 2, "need at least two paths")?;
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let steps = steps_for(horizon, dt)?;
    let per_path = par_paths(n_paths, |i| {
        let path = BrownianPath::generate(seed.with_stream(i), horizon, steps)?;
        times.iter().map(|&t| Ok(path.integrated_value(t)?)).collect::<Result<Vec<f64>, VerifyError>>()
    })?;
    let mut out = Outcome::default();
    for (k, &t) in times.iter().enumerate() {
        // the mean is known to be zero
        let sq: Vec<f64> = per_path.iter().map(|r| r[k] * r[k]).collect();
        within_se(&mut out, format!("var_j(t={t})"), &sq, t.powi(3) / 3.0, th::SE_MULTIPLE, seed);
    }
    Ok(out)
}

/// Empirical second moments of `(B_t, J_t)` against the exact covariance, and the
/// `t⁻²` bound on the exact joint density at random probes.
pub fn check_cov_bj(t: f64, n_paths: usize, dt: f64, probes: usize, seed: SeedSpec) -> Result<Outcome, VerifyError> {
    precondition(n_paths >= 2, "need at least two paths")?;
    let steps = steps_for(t, dt)?;
    let pair = GaussPair::new(t)?;
    let per_path = par_paths(n_paths, |i| {
        let path = BrownianPath::generate(seed.with_stream(i), t, steps)?;
        Ok((*path.values().last().unwrap(), *path.j_values().last().unwrap()))
    })?;
    let mut out = Outcome::default();
    let c = pair.cov();
    let col = |f: &dyn Fn(&(f64, f64)) -> f64| per_path.iter().map(f).collect::<Vec<f64>>();
    within_se(&mut out, "cov_bb".into(), &col(&|p| p.0 * p.0), c[0][0], th::SE_MULTIPLE, seed);
    within_se(&mut out, "cov_bj".into(), &col(&|p| p.0 * p.1), c[0][1], th::SE_MULTIPLE, seed);
    within_se(&mut out, "cov_jj".into(), &col(&|p| p.1 * p.1), c[1][1], th::SE_MULTIPLE, seed);

    // probes: log-normal times, points at the scale of (B_s, J_s) and at the mode
    let mut z = seed.derive(th::REFINE_TAG).normals();
    let mut violations = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let s = (1.5 * z.next_normal()).exp();
        let p = GaussPair::new(s)?;
        let (x, y) = (2.0 * s.sqrt() * z.next_normal(), 2.0 * s.powf(1.5) * z.next_normal());
        for (px, py) in [(x, y), (0.0, 0.0)] {
            let scaled = moments::joint_density(&p, px, py) * s * s;
            worst = worst.max(scaled);
            if scaled > 1.0 {
                violations += 1;
            }
        }
    }
    out.estimate_row("max_density_times_t2", worst, (worst, worst), probes, seed);
    let v = violations as f64;
    out.verdict_row("density_bound_violations", v, (v, v), 0.0, violations == 0, probes, seed);
    Ok(out)
}

/// Fractional moment quadrature against the closed form at `m = 0`, and at a
/// general `(m, σ, β)` against Monte Carlo and the Laplace-transform route.
pub fn check_lemma5(
    betas: &[f64],
    general: MomentSpec,
    n_mc: usize,
    seed: SeedSpec,
) -> Result<Outcome, VerifyError> {
    precondition(n_mc >= 2, "need Monte Carlo samples")?;
    let mut out = Outcome::default();
    for &beta in betas {
        let q = moments::frac_inv_moment_quad(&MomentSpec::new(0.0, 1.0, beta)?)?;
        let exact = moments::abs_normal_inverse_moment(beta)?;
        let rel = (q / exact - 1.0).abs();
        out.estimate_row(format!("quad(m=0,s=1,b={beta})"), q, (q, q), 0, seed);
        out.verdict_row(
            format!("closed_form_rel_err(b={beta})"),
            rel,
            (rel, rel),
            th::CLOSED_FORM_REL,
            rel <= th::CLOSED_FORM_REL,
            0,
            seed,
        );
    }

    let q = moments::frac_inv_moment_quad(&general)?;
    let tag = format!("m={},s={},b={}", general.m, general.sigma, general.beta);
    out.estimate_row(format!("quad({tag})"), q, (q, q), 0, seed);
    let samples: Vec<f64> = seed
        .normals()
        .take(n_mc)
        .map(|z| (general.m + general.sigma * z).abs().powf(-general.beta))
        .collect();
    within_se(&mut out, format!("monte_carlo({tag})"), &samples, q, th::HEAVY_SE_MULTIPLE, seed);
    let l = moments::frac_inv_moment_mellin(&general)?;
    let rel = (l / q - 1.0).abs();
    out.estimate_row(format!("mellin({tag})"), l, (l, l), 0, seed);
    out.verdict_row("mellin_rel_err", rel, (rel, rel), th::MELLIN_REL, rel <= th::MELLIN_REL, 0, seed);
    Ok(out)
}

/// Mean of `∫₀^δ |J|^{-β}` below the critical exponent and the divergence flag above it.
pub fn check_lemma2(
    beta_finite: f64,
    beta_divergent: f64,
    delta: f64,
    n_finite: usize,
    n_divergent: usize,
    steps: usize,
    seed: SeedSpec,
) -> Result<Outcome, VerifyError> {
    precondition(beta_finite < 2.0 / 3.0 && beta_divergent > 2.0 / 3.0, "exponents must straddle 2/3")?;
    precondition(n_finite >= 2 && n_divergent >= 1 && steps >= 1, "need paths and steps")?;
    let path = |s: SeedSpec| BrownianPath::generate_graded(s, delta, steps, moments::LEMMA2_GRADING);

    let finite_seed = seed.derive(1);
    let values = par_paths(n_finite, |i| {
        Ok(moments::lemma2_integral(beta_finite, delta, &path(finite_seed.with_stream(i))?)?.value)
    })?;
    let expected = moments::lemma2_mean(beta_finite, delta)?;
    let m = MeanEstimate::from_samples(&values);
    let (lo, hi) = m.ci95();
    let ratio = m.mean / expected;
    let mut out = Outcome::default();
    out.estimate_row(format!("mean_I(b={beta_finite})"), m.mean, (lo, hi), n_finite, finite_seed);
    out.estimate_row(format!("closed_form(b={beta_finite})"), expected, (expected, expected), 0, finite_seed);
    out.verdict_row(
        "mean_ratio",
        ratio,
        (lo / expected, hi / expected),
        1.0 + th::LEMMA2_REL,
        (ratio - 1.0).abs() <= th::LEMMA2_REL,
        n_finite,
        finite_seed,
    );

    let div_seed = seed.derive(2);
    let flags = par_paths(n_divergent, |i| {
        Ok(moments::lemma2_integral(beta_divergent, delta, &path(div_seed.with_stream(i))?)?.divergent)
    })?;
    let hits = flags.iter().filter(|f| **f).count();
    let (p, lo, hi) = stats::wilson95(hits, n_divergent);
    out.verdict_row(
        "divergent_fraction",
        p,
        (lo, hi),
        th::DIVERGENT_FRACTION,
        p >= th::DIVERGENT_FRACTION,
        n_divergent,
        div_seed,
    );
    Ok(out)
}

/// Stability of the mean long-horizon integral (pathwise head plus mean tail
/// bound) when the head horizon doubles.
pub fn check_lemma4(
    beta: f64,
    x0: f64,
    y0: f64,
    t_max: f64,
    n_paths: usize,
    dt: f64,
    seed: SeedSpec,
) -> Result<Outcome, VerifyError> {
    precondition(n_paths >= 2, "need at least two paths")?;
    let long = 2.0 * t_max;
    let steps = steps_for(long, dt)?;
    let per_path = par_paths(n_paths, |i| {
        let noise = BrownianPath::generate(seed.with_stream(i), long, steps)?;
        let a = moments::lemma4_integral(beta, x0, y0, &noise, t_max)?;
        let b = moments::lemma4_integral(beta, x0, y0, &noise, long)?;
        Ok((a, b))
    })?;
    let mut out = Outcome::default();
    let finite = per_path.iter().filter(|(a, b)| a.estimate.is_finite() && b.estimate.is_finite()).count();
    let (p, lo, hi) = stats::wilson95(finite, n_paths);
    out.verdict_row("finite_fraction", p, (lo, hi), 1.0, finite == n_paths, n_paths, seed);

    let short: Vec<f64> = per_path.iter().map(|(a, _)| a.total()).collect();
    let longer: Vec<f64> = per_path.iter().map(|(_, b)| b.total()).collect();
    let (ms, ml) = (MeanEstimate::from_samples(&short), MeanEstimate::from_samples(&longer));
    out.estimate_row(format!("mean_total(t={t_max})"), ms.mean, ms.ci95(), n_paths, seed);
    out.estimate_row(format!("mean_total(t={long})"), ml.mean, ml.ci95(), n_paths, seed);
    let tb = per_path[0].0.tail_bound;
    out.estimate_row(format!("tail_bound(t={t_max})"), tb, (tb, tb), 0, seed);
    let change = (ml.mean / ms.mean - 1.0).abs();
    out.verdict_row("relative_change", change, (change, change), th::LEMMA4_REL, change <= th::LEMMA4_REL, n_paths, seed);
    Ok(out)
}
