use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::{CliError, CommonArgs, DominanceArgs, Format};
use crate::calibrate::{load_arm_samples, FittedModel};
use crate::design::{crt_weights, successive_rejects_weights, two_batch_weights, BatchWeights, DesignSpec};
use crate::exponent::{bae_exponent_lower_bound, dominance_condition, ExponentReport};
use crate::simulate::{empirical_exponent, monte_carlo, ExponentFit, SimReport};

fn write_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Write {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `content` to `path` through a temporary file in the same directory,
/// so a failed run never leaves a partial file behind.
fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| write_err(path, e))?;
    tmp.write_all(content.as_bytes()).map_err(|e| write_err(path, e))?;
    tmp.persist(path).map_err(|e| write_err(path, e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, content: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, content),
        None => stdout
            .write_all(content.as_bytes())
            .map_err(|e| write_err(Path::new("<stdout>"), e)),
    }
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// CSV output carries its configuration in `<out>.config.json`.
fn emit_config_sidecar(cfg: &RunConfig) -> Result<(), CliError> {
    if let (Format::Csv, Some(out)) = (cfg.format, &cfg.out) {
        write_atomic(&sidecar(out, ".config.json"), &pretty(&cfg.resolved))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ExponentOutput<'a> {
    #[serde(flatten)]
    report: &'a ExponentReport,
    design: crate::design::DesignJson,
    config: &'a Value,
}

fn exponent_summary(design: &DesignSpec, r: &ExponentReport) -> String {
    let mut s = format!("design {} {:?}\n", design.name, design.weights().as_slice());
    s.push_str("   n          w_n        gamma_n    w_n*gamma_n\n");
    for st in &r.stages {
        s.push_str(&format!("{:>4} {:>12.6} {:>12.6} {:>14.8}\n", st.n, st.w, st.gamma, st.product));
    }
    s.push_str(&format!("BAE exponent lower bound {:.8}\n", r.bae_lower_bound));
    s.push_str(&format!("CRT exponent             {:.8}\n", r.crt_exponent));
    s.push_str(&format!(
        "dominance: {} (margin {:.8})\n",
        if r.dominates { "yes" } else { "no" },
        r.dominance_margin
    ));
    s
}

/// Computes the exponent report for the configured instance and design.
///
/// With `out` set, the report goes to the file and the summary to `stdout`;
/// otherwise the report goes to `stdout` and the summary to `stderr`.
pub fn cmd_exponent(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<ExponentReport, CliError> {
    let instance = cfg.require_instance()?;
    let design = match cfg.require_designs()? {
        [d] => d,
        _ => {
            return Err(CliError::Config {
                path: "designs".into(),
                message: "exponent takes exactly one design".into(),
            })
        }
    };
    let report = bae_exponent_lower_bound(instance, &design.weights())?;
    let body = match cfg.format {
        Format::Csv => report.to_csv(),
        Format::Json => pretty(&ExponentOutput {
            report: &report,
            design: design.to_json(),
            config: &cfg.resolved,
        }),
    };
    emit(cfg.out.as_deref(), &body, stdout)?;
    emit_config_sidecar(cfg)?;
    let summary = exponent_summary(design, &report);
    let sink: &mut dyn Write = if cfg.out.is_some() { stdout } else { stderr };
    sink.write_all(summary.as_bytes())
        .map_err(|e| write_err(Path::new("<summary>"), e))?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub dominates: bool,
    pub margin: f64,
}

fn key_values(raw: &[String], flag: &str) -> Result<Vec<(String, String)>, CliError> {
    raw.iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Config {
                    path: flag.into(),
                    message: format!("expected key=value, got {kv:?}"),
                })
        })
        .collect()
}

fn lookup<T: std::str::FromStr>(pairs: &[(String, String)], flag: &str, key: &str) -> Result<T, CliError> {
    let raw = pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| CliError::Config {
            path: format!("{flag} {key}"),
            message: "missing".into(),
        })?;
    raw.parse().map_err(|_| CliError::Config {
        path: format!("{flag} {key}"),
        message: format!("cannot parse {raw:?}"),
    })
}

/// Resolves the design named on the `check-dominance` command line, falling
/// back to the configuration file's single design.
pub(crate) fn dominance_design(args: &DominanceArgs, common: &CommonArgs) -> Result<DesignSpec, CliError> {
    let given = [
        args.two_batch.is_some(),
        args.successive_rejects.is_some(),
        args.crt.is_some(),
        args.weights.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if given > 1 {
        return Err(CliError::Config {
            path: "check-dominance".into(),
            message: "give only one of --two-batch, --successive-rejects, --crt, --weights".into(),
        });
    }
    if let Some(raw) = &args.two_batch {
        let kv = key_values(raw, "--two-batch")?;
        let k = lookup(&kv, "--two-batch", "k")?;
        let s = lookup(&kv, "--two-batch", "s")?;
        let beta: f64 = lookup(&kv, "--two-batch", "beta")?;
        let d = two_batch_weights(k, s, beta)?;
        return Ok(DesignSpec::bae(d.weights, format!("two_batch_s{s}_b{beta}")));
    }
    if let Some(raw) = &args.successive_rejects {
        let kv = key_values(raw, "--successive-rejects")?;
        let k = lookup(&kv, "--successive-rejects", "k")?;
        return Ok(DesignSpec::bae(successive_rejects_weights(k)?, "successive_rejects"));
    }
    if let Some(raw) = &args.crt {
        let kv = key_values(raw, "--crt")?;
        let k = lookup(&kv, "--crt", "k")?;
        crt_weights(k)?;
        return Ok(DesignSpec::crt(k)?);
    }
    if let Some(w) = &args.weights {
        return Ok(DesignSpec::bae(BatchWeights::from_simplex(w.len() + 1, w)?, "bae"));
    }
    let path = common.config.as_ref().ok_or_else(|| CliError::Config {
        path: "check-dominance".into(),
        message: "name a design with a flag or --config".into(),
    })?;
    let cfg = RunConfig::from_file(path, &common.overrides())?;
    match cfg.require_designs()? {
        [d] => Ok(d.clone()),
        _ => Err(CliError::Config {
            path: "designs".into(),
            message: "check-dominance takes exactly one design".into(),
        }),
    }
}

pub fn cmd_check_dominance(design: &DesignSpec, stdout: &mut dyn Write) -> Result<Verdict, CliError> {
    let (dominates, margin) = dominance_condition(&design.weights());
    writeln!(
        stdout,
        "{}: {} (margin {margin})",
        design.name,
        if dominates { "dominates CRT" } else { "not certified to dominate CRT" }
    )
    .map_err(|e| write_err(Path::new("<stdout>"), e))?;
    Ok(Verdict { dominates, margin })
}

fn simulate_rows(cfg: &RunConfig, threads: Option<usize>) -> Result<Vec<SimReport>, CliError> {
    let source = cfg.require_source()?;
    let designs = cfg.require_designs()?;
    let grid = cfg.require_t(source.k())?;
    let model = source.outcome_model();
    let pool = match threads {
        None => None,
        Some(0) => {
            return Err(CliError::Config {
                path: "--threads".into(),
                message: "must be at least 1".into(),
            })
        }
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::simulate::SimError::ThreadPool(e.to_string()))?,
        ),
    };
    let mut rows = Vec::with_capacity(designs.len() * grid.len());
    for design in designs {
        for &t in grid {
            let run = || monte_carlo(design, &model, t, cfg.replications, cfg.seed);
            let row = match &pool {
                Some(p) => p.install(run),
                None => run(),
            }?;
            rows.push(row);
        }
    }
    Ok(rows)
}

fn rows_csv(k: usize, rows: &[SimReport]) -> String {
    let mut s = SimReport::csv_header(k);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Runs every configured (design, T) pair and writes one row each.
pub fn cmd_simulate(cfg: &RunConfig, threads: Option<usize>, stdout: &mut dyn Write) -> Result<Vec<SimReport>, CliError> {
    let rows = simulate_rows(cfg, threads)?;
    let body = match cfg.format {
        Format::Csv => rows_csv(cfg.require_source()?.k(), &rows),
        Format::Json => pretty(&json!({ "config": cfg.resolved, "rows": rows })),
    };
    emit(cfg.out.as_deref(), &body, stdout)?;
    emit_config_sidecar(cfg)?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignSlope {
    pub design: String,
    #[serde(flatten)]
    pub fit: Option<ExponentFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omitted: Option<String>,
}

/// Simulates the T grid for each design and fits `-ln(error)` against `T`.
/// Designs whose error rates hit 0 or 1, or grids with fewer than three
/// sizes, get no slope and a warning on `stderr`. The slope summary goes to
/// `stdout` when rows go to a file, else to `stderr`.
pub fn cmd_sweep(
    cfg: &RunConfig,
    threads: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(Vec<SimReport>, Vec<DesignSlope>), CliError> {
    let rows = simulate_rows(cfg, threads)?;
    let mut slopes = Vec::new();
    for design in &cfg.designs {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.design == design.name)
            .map(|r| (r.t as f64, r.error_rate))
            .collect();
        let entry = match empirical_exponent(&points) {
            Ok(fit) => DesignSlope {
                design: design.name.clone(),
                fit: Some(fit),
                omitted: None,
            },
            Err(e) => {
                writeln!(stderr, "warning: slope omitted for {}: {e}", design.name)
                    .map_err(|e| write_err(Path::new("<stderr>"), e))?;
                DesignSlope {
                    design: design.name.clone(),
                    fit: None,
                    omitted: Some(e.to_string()),
                }
            }
        };
        slopes.push(entry);
    }

    let mut summary = String::from("design,slope,slope_se\n");
    for s in &slopes {
        if let Some(f) = &s.fit {
            summary.push_str(&format!("{},{},{}\n", s.design, f.slope, f.slope_se));
        }
    }
    match cfg.format {
        Format::Csv => {
            emit(cfg.out.as_deref(), &rows_csv(cfg.require_source()?.k(), &rows), stdout)?;
            if let Some(out) = &cfg.out {
                write_atomic(&sidecar(out, ".slopes.csv"), &summary)?;
            }
        }
        Format::Json => {
            let body = pretty(&json!({ "config": cfg.resolved, "rows": rows, "slopes": slopes }));
            emit(cfg.out.as_deref(), &body, stdout)?;
        }
    }
    emit_config_sidecar(cfg)?;
    let sink: &mut dyn Write = if cfg.out.is_some() { stdout } else { stderr };
    sink.write_all(summary.as_bytes())
        .map_err(|e| write_err(Path::new("<summary>"), e))?;
    Ok((rows, slopes))
}

/// Fits every arm in `input` and writes the fitted model JSON.
pub fn cmd_calibrate(input: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<FittedModel, CliError> {
    let samples = load_arm_samples(input)?;
    let fitted = FittedModel::fit(&samples)?;
    emit(out, &pretty(&fitted), stdout)?;
    Ok(fitted)
}
