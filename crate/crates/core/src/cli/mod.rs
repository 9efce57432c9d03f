//! Command-line front end: `run`, `list`, `version`.

pub mod config;
pub mod plot;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::moments::{self, MomentSpec};
use crate::verify::Outcome;
use config::{RunSpec, REGISTRY};
use report::{OutputFile, RunManifest};

/// Overrides the default output directory of `run`.
pub const OUT_DIR_ENV: &str = "WAVESDE_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "wavesde-out";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wavesde", about = "Monte Carlo experiments for dX = Y dt, dY = |X|^alpha dB")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every experiment in a TOML config (or a previous run's manifest.json).
    Run {
        config: PathBuf,
        /// Output directory [default: $WAVESDE_OUT_DIR or ./wavesde-out]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads [default: all cores]
        #[arg(long)]
        workers: Option<usize>,
        /// Also write SVG charts.
        #[arg(long)]
        plots: bool,
    },
    /// Show the experiment registry.
    List {
        #[arg(long)]
        csv: bool,
    },
    /// Print the version.
    Version,
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            plots,
        } => {
            let out = out
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
            match run(&config, &out, workers, plots, &mut std::io::stdout().lock()) {
                Ok(m) if m.all_passed => EXIT_PASS,
                Ok(_) => EXIT_FAIL,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    EXIT_ERROR
                }
            }
        }
        Command::List { csv } => {
            let _ = std::io::stdout().write_all(list_experiments(csv).as_bytes());
            EXIT_PASS
        }
        Command::Version => {
            println!("wavesde {}", env!("CARGO_PKG_VERSION"));
            EXIT_PASS
        }
    }
}

pub fn list_experiments(csv: bool) -> String {
    let keys = |v: Vec<&str>| v.join(" ");
    let mut out = String::new();
    if csv {
        out.push_str("experiment,certifies,required,optional\n");
        for e in REGISTRY {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.name,
                e.certifies,
                keys(e.required.iter().map(|k| k.0).collect()),
                keys(e.optional.iter().map(|k| k.0).chain(["seed"]).collect())
            ));
        }
    } else {
        out.push_str(&format!("{:<14} {:<48} {}\n", "EXPERIMENT", "CERTIFIES", "REQUIRED KEYS"));
        for e in REGISTRY {
            out.push_str(&format!(
                "{:<14} {:<48} {}\n",
                e.name,
                e.certifies,
                keys(e.required.iter().map(|k| k.0).collect())
            ));
        }
    }
    out
}

/// Reads a config, or the config echoed in a manifest.
fn read_config(path: &Path) -> Result<String, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| format!("{} is not a run manifest: {e}", path.display()))?;
        return Ok(m.config_text);
    }
    Ok(text)
}

/// Runs a config and writes its outputs, logging one line per verdict to `log`.
/// Config and experiment errors leave the output directory untouched.
pub fn run(
    config_path: &Path,
    out: &Path,
    workers: Option<usize>,
    plots: bool,
    log: &mut dyn Write,
) -> Result<RunManifest, String> {
    let text = read_config(config_path)?;
    let runs = config::parse(&text).map_err(|e| e.to_string())?;
    if workers == Some(0) {
        return Err("--workers must be at least 1".into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| e.to_string())?;

    let mut results: Vec<(String, Outcome)> = Vec::with_capacity(runs.len());
    for r in &runs {
        let outcome = pool
            .install(|| r.experiment.run(&r.params))
            .map_err(|e| format!("[{}]: {e}", r.label))?;
        for v in &outcome.verdicts {
            let _ = writeln!(
                log,
                "{} {}/{} statistic={} threshold={}",
                if v.pass { "PASS" } else { "FAIL" },
                r.label,
                v.name,
                report::fmt12(v.statistic),
                report::fmt12(v.threshold)
            );
        }
        results.push((r.label.clone(), outcome));
    }
    let all_passed = results.iter().all(|(_, o)| o.passed());

    let mut files: Vec<(String, Vec<u8>)> = vec![("report.csv".into(), report::report_csv(&results).into_bytes())];
    if let Some(c) = report::curves_csv(&results) {
        files.push(("curves.csv".into(), c.into_bytes()));
    }
    if plots {
        files.extend(render_plots(&runs, &results));
    }

    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let mut outputs = Vec::with_capacity(files.len());
    for (name, bytes) in &files {
        fs::write(out.join(name), bytes).map_err(|e| format!("cannot write {name}: {e}"))?;
        outputs.push(OutputFile {
            file: name.clone(),
            sha256: report::sha256_hex(bytes),
        });
    }
    let manifest = RunManifest {
        schema_version: report::MANIFEST_SCHEMA,
        crate_version: env!("CARGO_PKG_VERSION").into(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        config_text: text,
        runs: json!(runs
            .iter()
            .map(|r| json!({"label": r.label, "experiment": r.experiment.name, "params": r.params.to_json()}))
            .collect::<Vec<_>>()),
        all_passed,
        outputs,
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
    fs::write(out.join("manifest.json"), body + "\n").map_err(|e| format!("cannot write manifest.json: {e}"))?;
    Ok(manifest)
}

fn file_stem(s: &str) -> String {
    let s: String = s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect();
    s.trim_matches('_').to_string()
}

fn render_plots(runs: &[RunSpec], results: &[(String, Outcome)]) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for (spec, (label, o)) in runs.iter().zip(results) {
        if let Some(c) = &o.curve {
            let pts: Vec<(f64, f64)> = c.levels.iter().map(|l| l.log10()).zip(c.hit_fractions.iter().copied()).collect();
            let svg = plot::line_chart(&format!("{label}: paths reaching L"), "log10 L", "hit fraction", &pts);
            files.push((format!("{}_hit_curve.svg", file_stem(label)), svg.into_bytes()));
        }
        for (name, data) in &o.samples {
            let svg = plot::histogram(&format!("{label}: {name}"), name, data, 40);
            files.push((format!("{}_{}.svg", file_stem(label), file_stem(name)), svg.into_bytes()));
        }
        if spec.experiment.name == "lemma5" {
            let (m, sigma) = (spec.params.real("m"), spec.params.real("sigma"));
            let pts: Vec<(f64, f64)> = (1..20)
                .map(|k| 0.05 * k as f64)
                .filter_map(|b| {
                    let spec = MomentSpec::new(m, sigma, b).ok()?;
                    Some((b, moments::frac_inv_moment_quad(&spec).ok()?))
                })
                .collect();
            let svg = plot::line_chart(&format!("{label}: E|m + sZ|^-beta"), "beta", "moment", &pts);
            files.push((format!("{}_moment_vs_beta.svg", file_stem(label)), svg.into_bytes()));
        }
    }
    files
}
