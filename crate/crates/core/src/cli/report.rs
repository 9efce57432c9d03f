//! CSV tables and the run manifest.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rng::SeedSpec;
use crate::verify::Outcome;

pub const MANIFEST_SCHEMA: u32 = 1;
pub const REPORT_HEADER: &str = "experiment,name,estimate,ci_low,ci_high,threshold,pass,n,seed";
pub const CURVES_HEADER: &str = "experiment,level,hit_fraction,median_hit_time";

/// `%.12g`-style rendering: 12 significant digits, fixed notation for moderate
/// exponents, trailing zeros dropped.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn seed_cell(s: SeedSpec) -> String {
    format!("{}:{}", s.base_seed, s.stream_index)
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn report_csv(results: &[(String, Outcome)]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for (label, o) in results {
        for e in &o.estimates {
            let _ = writeln!(
                out,
                "{},{},{},{},{},,,{},{}",
                csv_text(label),
                csv_text(&e.name),
                fmt12(e.value),
                fmt12(e.ci_low),
                fmt12(e.ci_high),
                e.n,
                seed_cell(e.seed)
            );
        }
        for v in &o.verdicts {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                csv_text(label),
                csv_text(&v.name),
                fmt12(v.statistic),
                fmt12(v.ci_low),
                fmt12(v.ci_high),
                fmt12(v.threshold),
                v.pass,
                v.n_paths,
                seed_cell(v.seed)
            );
        }
    }
    out
}

/// `None` when no experiment produced a curve.
pub fn curves_csv(results: &[(String, Outcome)]) -> Option<String> {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    let mut any = false;
    for (label, o) in results {
        if let Some(c) = &o.curve {
            any = true;
            for k in 0..c.levels.len() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    csv_text(label),
                    fmt12(c.levels[k]),
                    fmt12(c.hit_fractions[k]),
                    fmt12(c.median_hit_times[k])
                );
            }
        }
    }
    any.then_some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub crate_version: String,
    pub created_unix: u64,
    /// The config exactly as read; `run` accepts this manifest in its place.
    pub config_text: String,
    /// Every run with its parameters after defaults.
    pub runs: serde_json::Value,
    pub all_passed: bool,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digit_format() {
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(2.0), "2");
        assert_eq!(fmt12(-1234.5), "-1234.5");
        assert_eq!(fmt12(1e-8), "1e-8");
        assert_eq!(fmt12(1.5e-300), "1.5e-300");
        assert_eq!(fmt12(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt12(0.0001), "0.0001");
        assert_eq!(fmt12(f64::INFINITY), "inf");
        assert_eq!(fmt12(f64::NAN), "nan");
        assert_eq!(fmt12(9.9999999999999e5), "1000000");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_text("a,b"), "\"a,b\"");
        assert_eq!(csv_text("D(eps=1e-2)"), "D(eps=1e-2)");
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
