//! Experiment registry and config validation.
//!
//! A config is a TOML file with one table per experiment run. The table name is
//! the experiment name unless the table sets `experiment = "<name>"`, which lets
//! one file run the same experiment twice under different labels.

use std::collections::BTreeMap;

use serde_json::json;
use thiserror::Error;
use toml::{Table, Value};

use crate::moments::MomentSpec;
use crate::rng::SeedSpec;
use crate::sde::{Scheme, SystemParams};
use crate::verify::{self, BlowupSettings, Outcome, VerifyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("[{section}]: unknown experiment `{name}`")]
    UnknownExperiment { section: String, name: String },
    #[error("[{section}]: unknown key `{key}`")]
    UnknownKey { section: String, key: String },
    #[error("[{section}]: missing required key `{key}`")]
    MissingKey { section: String, key: String },
    #[error("[{section}]: key `{key}` {problem}")]
    BadValue {
        section: String,
        key: String,
        problem: String,
    },
    #[error("top-level key `{0}` outside any [experiment] table")]
    TopLevel(String),
    #[error("config declares no experiments")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Count,
    Reals,
    RealOrReals,
    Scheme,
    Flag,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::Real => "a number",
            Kind::Count => "a nonnegative integer",
            Kind::Reals => "a list of numbers",
            Kind::RealOrReals => "a number or a list of numbers",
            Kind::Scheme => "one of \"euler\", \"tamed_euler\", \"norm_tamed_euler\"",
            Kind::Flag => "true or false",
        }
    }
}

type Runner = fn(&Params) -> Result<Outcome, VerifyError>;

#[derive(Debug)]
pub struct Experiment {
    pub name: &'static str,
    pub certifies: &'static str,
    pub required: &'static [(&'static str, Kind)],
    /// `(key, kind, default as a TOML value)`.
    pub optional: &'static [(&'static str, Kind, &'static str)],
    run: Runner,
}

impl Experiment {
    pub fn run(&self, params: &Params) -> Result<Outcome, VerifyError> {
        (self.run)(params)
    }

    fn kind_of(&self, key: &str) -> Option<Kind> {
        self.required
            .iter()
            .map(|(k, kind)| (*k, *kind))
            .chain(self.optional.iter().map(|(k, kind, _)| (*k, *kind)))
            .chain([("seed", Kind::Count)])
            .find(|(k, _)| *k == key)
            .map(|(_, kind)| kind)
    }
}

const SEED_DEFAULT: &str = "0";

pub static REGISTRY: &[Experiment] = &[
    Experiment {
        name: "uniqueness",
        certifies: "T1 pathwise uniqueness (coupling divergence)",
        required: &[("alpha", Kind::Real), ("x0", Kind::Real), ("y0", Kind::Real)],
        optional: &[
            ("eps", Kind::Reals, "[1e-2, 1e-3, 1e-4]"),
            ("n_paths", Kind::Count, "1000"),
            ("horizon", Kind::Real, "1.0"),
            ("dt", Kind::Real, "1e-3"),
        ],
        run: run_uniqueness,
    },
    Experiment {
        name: "origin",
        certifies: "T2 origin avoidance",
        required: &[("alpha", Kind::Real), ("x0", Kind::Real), ("y0", Kind::Real)],
        optional: &[
            ("n_paths", Kind::Count, "1000"),
            ("horizon", Kind::Real, "5.0"),
            ("dt", Kind::Reals, "[1e-2, 5e-3, 2.5e-3]"),
        ],
        run: run_origin,
    },
    Experiment {
        name: "nonuniqueness",
        certifies: "T3 nonuniqueness from the origin",
        required: &[("alpha", Kind::RealOrReals)],
        optional: &[
            ("n_paths", Kind::Count, "1000"),
            ("horizon", Kind::Real, "1.0"),
            ("steps", Kind::Count, "1024"),
        ],
        run: run_nonuniqueness,
    },
    Experiment {
        name: "blowup",
        certifies: "T4 finite-time blowup",
        required: &[("alpha", Kind::Real), ("x0", Kind::Real), ("y0", Kind::Real)],
        optional: &[
            ("levels", Kind::Reals, "[1e2, 1e3, 1e4]"),
            ("horizon", Kind::Real, "50.0"),
            ("n_paths", Kind::Count, "1000"),
            ("dt", Kind::Real, "0.01"),
            ("max_growth", Kind::Real, "0.1"),
            ("scheme", Kind::Scheme, "\"norm_tamed_euler\""),
            ("control", Kind::Flag, "true"),
            ("control_alpha", Kind::Real, "0.9"),
        ],
        run: run_blowup,
    },
    Experiment {
        name: "transience",
        certifies: "P1 transience of (B, J)",
        required: &[("checkpoints", Kind::Reals)],
        optional: &[("n_paths", Kind::Count, "1000"), ("dt", Kind::Real, "0.05")],
        run: run_transience,
    },
    Experiment {
        name: "lemma2",
        certifies: "L2 integrability of |J|^-beta at the origin",
        required: &[("beta", Kind::Real)],
        optional: &[
            ("beta_divergent", Kind::Real, "0.9"),
            ("delta", Kind::Real, "1.0"),
            ("n_paths", Kind::Count, "10000"),
            ("n_divergent", Kind::Count, "1000"),
            ("steps", Kind::Count, "256"),
        ],
        run: run_lemma2,
    },
    Experiment {
        name: "lemma4",
        certifies: "L4 finiteness of the long-horizon clock",
        required: &[("beta", Kind::Real), ("x0", Kind::Real), ("y0", Kind::Real)],
        optional: &[
            ("horizon", Kind::Real, "100.0"),
            ("n_paths", Kind::Count, "1000"),
            ("dt", Kind::Real, "0.01"),
        ],
        run: run_lemma4,
    },
    Experiment {
        name: "lemma5",
        certifies: "L5 fractional inverse moments of a normal",
        required: &[("beta", Kind::Real)],
        optional: &[
            ("m", Kind::Real, "1.0"),
            ("sigma", Kind::Real, "1.0"),
            ("betas", Kind::Reals, "[0.3, 0.5, 0.9]"),
            ("n_paths", Kind::Count, "1000000"),
        ],
        run: run_lemma5,
    },
    Experiment {
        name: "var_j",
        certifies: "variance of integrated Brownian motion",
        required: &[("t", Kind::RealOrReals)],
        optional: &[("n_paths", Kind::Count, "100000"), ("dt", Kind::Real, "0.01")],
        run: run_var_j,
    },
    Experiment {
        name: "cov_bj",
        certifies: "covariance and density bound of (B, J)",
        required: &[("t", Kind::Real)],
        optional: &[
            ("n_paths", Kind::Count, "100000"),
            ("dt", Kind::Real, "0.01"),
            ("probes", Kind::Count, "10000"),
        ],
        run: run_cov_bj,
    },
];

pub fn lookup(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Validated keys of one run, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, Value>,
}

impl Params {
    fn get(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("key `{key}` was validated but is absent"))
    }

    pub fn real(&self, key: &str) -> f64 {
        as_real(self.get(key)).expect("validated")
    }

    pub fn count(&self, key: &str) -> usize {
        as_count(self.get(key)).expect("validated") as usize
    }

    pub fn reals(&self, key: &str) -> Vec<f64> {
        match self.get(key) {
            Value::Array(a) => a.iter().map(|v| as_real(v).expect("validated")).collect(),
            v => vec![as_real(v).expect("validated")],
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        self.get(key).as_bool().expect("validated")
    }

    pub fn scheme(&self, key: &str) -> Scheme {
        parse_scheme(self.get(key).as_str().expect("validated")).expect("validated")
    }

    pub fn seed(&self) -> SeedSpec {
        SeedSpec::new(as_count(self.get("seed")).expect("validated"), 0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.values {
            let j = match v {
                Value::Integer(i) => json!(i),
                Value::Float(f) => json!(f),
                Value::Boolean(b) => json!(b),
                Value::String(s) => json!(s),
                Value::Array(a) => json!(a.iter().filter_map(as_real).collect::<Vec<f64>>()),
                other => json!(other.to_string()),
            };
            map.insert(k.clone(), j);
        }
        serde_json::Value::Object(map)
    }
}

fn as_real(v: &Value) -> Option<f64> {
    match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Float(f) if f.is_finite() => Some(*f),
        _ => None,
    }
}

fn as_count(v: &Value) -> Option<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as u64),
        Value::Float(f) if *f >= 0.0 && f.fract() == 0.0 && *f < 1.8e19 => Some(*f as u64),
        _ => None,
    }
}

fn parse_scheme(s: &str) -> Option<Scheme> {
    match s {
        "euler" => Some(Scheme::Euler),
        "tamed_euler" => Some(Scheme::TamedEuler),
        "norm_tamed_euler" => Some(Scheme::NormTamedEuler),
        _ => None,
    }
}

fn conforms(v: &Value, kind: Kind) -> bool {
    match kind {
        Kind::Real => as_real(v).is_some(),
        Kind::Count => as_count(v).is_some(),
        Kind::Reals => matches!(v, Value::Array(a) if !a.is_empty() && a.iter().all(|x| as_real(x).is_some())),
        Kind::RealOrReals => as_real(v).is_some() || conforms(v, Kind::Reals),
        Kind::Scheme => v.as_str().and_then(parse_scheme).is_some(),
        Kind::Flag => v.as_bool().is_some(),
    }
}

/// One validated experiment run.
#[derive(Debug)]
pub struct RunSpec {
    pub label: String,
    pub experiment: &'static Experiment,
    pub params: Params,
}

/// Parses and validates a whole config; nothing runs until every table is valid.
pub fn parse(text: &str) -> Result<Vec<RunSpec>, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.message().to_string()))?;
    let mut runs = Vec::new();
    for (section, body) in &table {
        let Value::Table(body) = body else {
            return Err(ConfigError::TopLevel(section.clone()));
        };
        runs.push(validate(section, body)?);
    }
    if runs.is_empty() {
        return Err(ConfigError::Empty);
    }
    Ok(runs)
}

fn validate(section: &str, body: &Table) -> Result<RunSpec, ConfigError> {
    let name = match body.get("experiment") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => {
            return Err(ConfigError::BadValue {
                section: section.into(),
                key: "experiment".into(),
                problem: "must be a string".into(),
            })
        }
        None => section,
    };
    let exp = lookup(name).ok_or_else(|| ConfigError::UnknownExperiment {
        section: section.into(),
        name: name.into(),
    })?;
    let mut values = BTreeMap::new();
    for (key, v) in body {
        if key == "experiment" {
            continue;
        }
        let kind = exp.kind_of(key).ok_or_else(|| ConfigError::UnknownKey {
            section: section.into(),
            key: key.clone(),
        })?;
        if !conforms(v, kind) {
            return Err(ConfigError::BadValue {
                section: section.into(),
                key: key.clone(),
                problem: format!("must be {}", kind.describe()),
            });
        }
        values.insert(key.clone(), v.clone());
    }
    for (key, _) in exp.required {
        if !values.contains_key(*key) {
            return Err(ConfigError::MissingKey {
                section: section.into(),
                key: (*key).into(),
            });
        }
    }
    let defaults = exp.optional.iter().map(|(k, _, d)| (*k, *d)).chain([("seed", SEED_DEFAULT)]);
    for (key, default) in defaults {
        if !values.contains_key(key) {
            let parsed: Table = format!("v = {default}").parse().expect("registry defaults are valid TOML");
            values.insert(key.into(), parsed["v"].clone());
        }
    }
    Ok(RunSpec {
        label: section.into(),
        experiment: exp,
        params: Params { values },
    })
}

fn system(p: &Params) -> Result<SystemParams, VerifyError> {
    Ok(SystemParams::new(p.real("alpha"), p.real("x0"), p.real("y0"))?)
}

fn run_uniqueness(p: &Params) -> Result<Outcome, VerifyError> {
    verify::check_uniqueness(&system(p)?, &p.reals("eps"), p.count("n_paths"), p.real("horizon"), p.real("dt"), p.seed())
}

fn run_origin(p: &Params) -> Result<Outcome, VerifyError> {
    verify::check_origin_avoidance(&system(p)?, p.count("n_paths"), p.real("horizon"), &p.reals("dt"), p.seed())
}

fn run_nonuniqueness(p: &Params) -> Result<Outcome, VerifyError> {
    let alphas = p.reals("alpha");
    let mut out = Outcome::default();
    for &a in &alphas {
        let mut o = verify::check_nonuniqueness(a, p.count("n_paths"), p.real("horizon"), p.count("steps"), p.seed())?;
        if alphas.len() > 1 {
            for v in &mut o.verdicts {
                v.name = format!("{}(alpha={a})", v.name);
            }
        }
        out.merge(o);
    }
    Ok(out)
}

fn run_blowup(p: &Params) -> Result<Outcome, VerifyError> {
    let settings = BlowupSettings {
        dt: p.real("dt"),
        max_growth: p.real("max_growth"),
        scheme: p.scheme("scheme"),
    };
    let levels = p.reals("levels");
    let (horizon, n, seed) = (p.real("horizon"), p.count("n_paths"), p.seed());
    let mut out = verify::check_blowup(&system(p)?, &levels, horizon, n, seed, &settings)?;
    if p.flag("control") {
        let reference = out.verdict("hit_fraction").map(|v| v.statistic);
        let control = SystemParams::new(p.real("control_alpha"), p.real("x0"), p.real("y0"))?;
        let top = *levels.last().unwrap();
        out.merge(verify::check_blowup_control(&control, top, horizon, n, seed, &settings, reference)?);
    }
    Ok(out)
}

fn run_transience(p: &Params) -> Result<Outcome, VerifyError> {
    verify::check_transience(p.count("n_paths"), &p.reals("checkpoints"), p.real("dt"), p.seed())
}

fn run_lemma2(p: &Params) -> Result<Outcome, VerifyError> {
    verify::check_lemma2(
        p.real("beta"),
        p.real("beta_divergent"),
        p.real("delta"),
        p.count("n_paths"),
        p.count("n_divergent"),
        p.count("steps"),
        p.seed(),
    )
}

fn run_lemma4(p: &Params) -> Result<Outcome, VerifyError> {
    verify::check_lemma4(
        p.real("beta"),
        p.real("x0"),
        p.real("y0"),
        p.real("horizon"),
        p.count("n_paths"),
        p.real("dt"),
        p.seed(),
    )
}

fn run_lemma5(p: &Params) -> Result<Outcome, VerifyError> {
    let spec = MomentSpec::new(p.real("m"), p.real("sigma"), p.real("beta"))?;
    verify::check_lemma5(&p.reals("betas"), spec, p.count("n_paths"), p.seed())
}

fn run_var_j(p: &Params) -> Result<Outcome, VerifyError> {
    verify::check_var_j(&p.reals("t"), p.count("n_paths"), p.real("dt"), p.seed())
}

fn run_cov_bj(p: &Params) -> Result<Outcome, VerifyError> {
    verify::check_cov_bj(p.real("t"), p.count("n_paths"), p.real("dt"), p.count("probes"), p.seed())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let runs = parse("[var_j]\nt = 1\nn_paths = 1e5\n").unwrap();
        assert_eq!(runs.len(), 1);
        let p = &runs[0].params;
        assert_eq!(p.reals("t"), vec![1.0]);
        assert_eq!(p.count("n_paths"), 100_000);
        assert_eq!(p.real("dt"), 0.01);
        assert_eq!(p.seed(), SeedSpec::new(0, 0));
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse("[blowup]\nx0 = 1\ny0 = 0\n").unwrap_err().to_string();
        assert!(e.contains("`alpha`"), "{e}");
        let e = parse("[origin]\nalpha = 0.75\nx0 = 1\ny0 = 0\nbogus = 3\n").unwrap_err().to_string();
        assert!(e.contains("`bogus`"), "{e}");
        let e = parse("[lemma5]\nbeta = \"x\"\n").unwrap_err().to_string();
        assert!(e.contains("`beta`"), "{e}");
        assert!(matches!(parse("[nope]\n"), Err(ConfigError::UnknownExperiment { .. })));
        assert!(matches!(parse("seed = 3\n"), Err(ConfigError::TopLevel(_))));
        assert!(matches!(parse(""), Err(ConfigError::Empty)));
        assert!(matches!(parse("[var_j\n"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn labelled_sections() {
        let runs = parse("[slow]\nexperiment = \"var_j\"\nt = [0.5, 1]\nn_paths = 10\n").unwrap();
        assert_eq!(runs[0].label, "slow");
        assert_eq!(runs[0].experiment.name, "var_j");
        assert!(parse("[slow]\nexperiment = \"nope\"\n").is_err());
    }

    #[test]
    fn registry_defaults_are_valid() {
        for e in REGISTRY {
            for (k, kind, d) in e.optional {
                let t: Table = format!("v = {d}").parse().unwrap();
                assert!(conforms(&t["v"], *kind), "{} {k}", e.name);
            }
        }
    }
}
