//! Declarative run configuration (JSON) with precise field paths in errors.
//!
//! ```json
//! {
//!   "design":  {"kind": "two_batch", "k": 4, "s": 1, "beta_first": 0.7},
//!   "designs": [{"kind": "crt", "k": 4}, {"k": 4, "weights": [0.7, 0.3, 0.0], "name": "tb"}],
//!   "instance": {"means": [1, 0, 0, 0], "sigma": 1},
//!   "model": {"kind": "summary", "arms": [{"p_zero": 0.98, "mean": 44, "sd": 42}, …]},
//!   "t": [120, 240], "replications": 10000, "seed": 42,
//!   "out": "rows.csv", "format": "csv"
//! }
//! ```
//!
//! Design kinds: `crt`, `successive_rejects`, `two_batch`, `weights`; an entry
//! without `kind` is read as the design wire form `{k, weights, name}`.
//! Model kinds: `gaussian`, `zero_inflated_lognormal`, `summary`,
//! `empirical`, `fitted` (a file written by `calibrate`).

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use super::{CliError, Format};
use crate::calibrate::{model_from_summary, ArmSummary, FittedModel};
use crate::design::{
    successive_rejects_weights, two_batch_weights, BatchWeights, DesignJson, DesignSpec, Instance,
};
use crate::simulate::{OutcomeModel, ZiLogNormal};

pub const DEFAULT_REPLICATIONS: u64 = 10_000;

#[derive(Debug, Clone)]
pub enum Source {
    Instance(Instance),
    Model(OutcomeModel),
}

impl Source {
    pub fn k(&self) -> usize {
        match self {
            Source::Instance(i) => i.k(),
            Source::Model(m) => m.k(),
        }
    }

    pub fn outcome_model(&self) -> OutcomeModel {
        match self {
            Source::Instance(i) => OutcomeModel::from_instance(i),
            Source::Model(m) => m.clone(),
        }
    }
}

/// A validated configuration. `resolved` is the configuration document after
/// flag overrides, embedded in every report.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub designs: Vec<DesignSpec>,
    pub source: Option<Source>,
    pub t: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub resolved: Value,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn err(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn required<'a>(obj: &'a Map<String, Value>, parent: &str, key: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| err(join(parent, key), "missing"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| err(path, "expected a number"))
}

fn as_u64(v: &Value, path: &str) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| err(path, "expected a nonnegative integer"))
}

fn f64_field(obj: &Map<String, Value>, parent: &str, key: &str) -> Result<f64, CliError> {
    as_f64(required(obj, parent, key)?, &join(parent, key))
}

fn usize_field(obj: &Map<String, Value>, parent: &str, key: &str) -> Result<usize, CliError> {
    Ok(as_u64(required(obj, parent, key)?, &join(parent, key))? as usize)
}

fn f64_array(v: &Value, path: &str) -> Result<Vec<f64>, CliError> {
    v.as_array()
        .ok_or_else(|| err(path, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("{path}[{i}]")))
        .collect()
}

fn reject_unknown(obj: &Map<String, Value>, parent: &str, allowed: &[&str]) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(join(parent, k), "unknown field")),
        None => Ok(()),
    }
}

fn design_error(path: &str, e: impl std::fmt::Display) -> CliError {
    err(path, e.to_string())
}

pub fn parse_design(v: &Value, path: &str) -> Result<DesignSpec, CliError> {
    let obj = object(v, path)?;
    let name = match obj.get("name") {
        Some(n) => Some(
            n.as_str()
                .ok_or_else(|| err(join(path, "name"), "expected a string"))?
                .to_string(),
        ),
        None => None,
    };
    let Some(kind) = obj.get("kind") else {
        reject_unknown(obj, path, &["k", "weights", "name"])?;
        let json = DesignJson {
            k: usize_field(obj, path, "k")?,
            weights: f64_array(required(obj, path, "weights")?, &join(path, "weights"))?,
            name: name.ok_or_else(|| err(join(path, "name"), "missing"))?,
        };
        return DesignSpec::from_json(&json).map_err(|e| design_error(&join(path, "weights"), e));
    };
    let kind = kind
        .as_str()
        .ok_or_else(|| err(join(path, "kind"), "expected a string"))?;
    let k = usize_field(obj, path, "k")?;
    let spec = match kind {
        "crt" => {
            reject_unknown(obj, path, &["kind", "k", "name"])?;
            let mut d = DesignSpec::crt(k).map_err(|e| design_error(&join(path, "k"), e))?;
            if let Some(n) = name {
                d.name = n;
            }
            d
        }
        "successive_rejects" => {
            reject_unknown(obj, path, &["kind", "k", "name"])?;
            let w = successive_rejects_weights(k).map_err(|e| design_error(&join(path, "k"), e))?;
            DesignSpec::bae(w, name.unwrap_or_else(|| "successive_rejects".into()))
        }
        "two_batch" => {
            reject_unknown(obj, path, &["kind", "k", "s", "beta_first", "name"])?;
            let s = usize_field(obj, path, "s")?;
            let beta = f64_field(obj, path, "beta_first")?;
            let d = two_batch_weights(k, s, beta).map_err(|e| design_error(path, e))?;
            DesignSpec::bae(d.weights, name.unwrap_or_else(|| format!("two_batch_s{s}_b{beta}")))
        }
        "weights" => {
            reject_unknown(obj, path, &["kind", "k", "weights", "name"])?;
            let wpath = join(path, "weights");
            let raw = f64_array(required(obj, path, "weights")?, &wpath)?;
            let w = BatchWeights::from_simplex(k, &raw).map_err(|e| design_error(&wpath, e))?;
            DesignSpec::bae(w, name.unwrap_or_else(|| "bae".into()))
        }
        other => return Err(err(join(path, "kind"), format!("unknown design kind {other:?}"))),
    };
    Ok(spec)
}

fn parse_instance(v: &Value) -> Result<Instance, CliError> {
    let obj = object(v, "instance")?;
    reject_unknown(obj, "instance", &["means", "sigma"])?;
    let means = f64_array(required(obj, "instance", "means")?, "instance.means")?;
    let sigma = f64_field(obj, "instance", "sigma")?;
    Instance::new(means, sigma).map_err(|e| {
        let field = if matches!(e, crate::design::DesignError::Sigma(_)) {
            "instance.sigma"
        } else {
            "instance.means"
        };
        design_error(field, e)
    })
}

fn parse_model(v: &Value, base_dir: &Path) -> Result<OutcomeModel, CliError> {
    let obj = object(v, "model")?;
    let kind = required(obj, "model", "kind")?
        .as_str()
        .ok_or_else(|| err("model.kind", "expected a string"))?;
    let arms_of = |obj: &Map<String, Value>| -> Result<Vec<Value>, CliError> {
        Ok(required(obj, "model", "arms")?
            .as_array()
            .ok_or_else(|| err("model.arms", "expected an array"))?
            .clone())
    };
    let model = match kind {
        "gaussian" => {
            reject_unknown(obj, "model", &["kind", "means", "sigma"])?;
            let means = f64_array(required(obj, "model", "means")?, "model.means")?;
            let sigma = f64_field(obj, "model", "sigma")?;
            OutcomeModel::gaussian(means, sigma).map_err(|e| design_error("model", e))?
        }
        "zero_inflated_lognormal" => {
            reject_unknown(obj, "model", &["kind", "arms"])?;
            let mut laws = Vec::new();
            for (i, a) in arms_of(obj)?.iter().enumerate() {
                let p = format!("model.arms[{i}]");
                let o = object(a, &p)?;
                reject_unknown(o, &p, &["p_zero", "meanlog", "sdlog"])?;
                laws.push(ZiLogNormal {
                    p_zero: f64_field(o, &p, "p_zero")?,
                    meanlog: f64_field(o, &p, "meanlog")?,
                    sdlog: f64_field(o, &p, "sdlog")?,
                });
            }
            OutcomeModel::zero_inflated_lognormal(laws).map_err(|e| design_error("model.arms", e))?
        }
        "summary" => {
            reject_unknown(obj, "model", &["kind", "arms"])?;
            let mut summaries = Vec::new();
            for (i, a) in arms_of(obj)?.iter().enumerate() {
                let p = format!("model.arms[{i}]");
                let o = object(a, &p)?;
                reject_unknown(o, &p, &["p_zero", "mean", "sd"])?;
                summaries.push(ArmSummary {
                    p_zero: f64_field(o, &p, "p_zero")?,
                    mean: f64_field(o, &p, "mean")?,
                    sd: f64_field(o, &p, "sd")?,
                });
            }
            model_from_summary(&summaries).map_err(|e| design_error("model.arms", e))?
        }
        "empirical" => {
            reject_unknown(obj, "model", &["kind", "arms"])?;
            let samples = arms_of(obj)?
                .iter()
                .enumerate()
                .map(|(i, a)| f64_array(a, &format!("model.arms[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            OutcomeModel::empirical(samples).map_err(|e| design_error("model.arms", e))?
        }
        "fitted" => {
            reject_unknown(obj, "model", &["kind", "path"])?;
            let rel = required(obj, "model", "path")?
                .as_str()
                .ok_or_else(|| err("model.path", "expected a string"))?;
            let path = base_dir.join(rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| err("model.path", format!("cannot read {}: {e}", path.display())))?;
            let fitted: FittedModel =
                serde_json::from_str(&text).map_err(|e| err("model.path", format!("{}: {e}", path.display())))?;
            fitted.to_model().map_err(|e| design_error("model.path", e))?
        }
        other => return Err(err("model.kind", format!("unknown model kind {other:?}"))),
    };
    Ok(model)
}

impl RunConfig {
    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("--config", format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| err("--config", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_value(value, base, overrides)
    }

    pub fn from_value(mut value: Value, base_dir: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| err("", "configuration must be a JSON object"))?;
        if let Some(seed) = overrides.seed {
            obj.insert("seed".into(), seed.into());
        }
        if let Some(out) = &overrides.out {
            obj.insert("out".into(), out.display().to_string().into());
        }
        if let Some(format) = overrides.format {
            obj.insert("format".into(), format.as_str().into());
        }
        reject_unknown(
            obj,
            "",
            &["design", "designs", "instance", "model", "t", "replications", "seed", "out", "format"],
        )?;

        let mut designs = Vec::new();
        let mut design_paths = Vec::new();
        if let Some(d) = obj.get("design") {
            designs.push(parse_design(d, "design")?);
            design_paths.push("design".to_string());
        }
        if let Some(list) = obj.get("designs") {
            let list = list.as_array().ok_or_else(|| err("designs", "expected an array"))?;
            for (i, d) in list.iter().enumerate() {
                let path = format!("designs[{i}]");
                designs.push(parse_design(d, &path)?);
                design_paths.push(path);
            }
        }

        let source = match (obj.get("instance"), obj.get("model")) {
            (Some(_), Some(_)) => return Err(err("instance", "give either instance or model, not both")),
            (Some(i), None) => Some(Source::Instance(parse_instance(i)?)),
            (None, Some(m)) => Some(Source::Model(parse_model(m, base_dir)?)),
            (None, None) => None,
        };

        let t = match obj.get("t") {
            Some(v) => {
                let arr = v.as_array().ok_or_else(|| err("t", "expected an array"))?;
                let t = arr
                    .iter()
                    .enumerate()
                    .map(|(i, x)| as_u64(x, &format!("t[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(err(format!("t[{}]", i + 1), "sample sizes must be strictly increasing"));
                }
                t
            }
            None => Vec::new(),
        };
        let replications = match obj.get("replications") {
            Some(v) => as_u64(v, "replications")?,
            None => DEFAULT_REPLICATIONS,
        };
        if replications == 0 {
            return Err(err("replications", "must be at least 1"));
        }
        let seed = match obj.get("seed") {
            Some(v) => as_u64(v, "seed")?,
            None => 0,
        };
        let out = match obj.get("out") {
            Some(v) => Some(PathBuf::from(v.as_str().ok_or_else(|| err("out", "expected a string"))?)),
            None => None,
        };
        let format = match obj.get("format") {
            Some(v) => Format::parse(v.as_str().ok_or_else(|| err("format", "expected a string"))?)
                .ok_or_else(|| err("format", "expected \"csv\" or \"json\""))?,
            None => Format::Csv,
        };

        if let Some(src) = &source {
            for (d, path) in designs.iter().zip(&design_paths) {
                if d.k() != src.k() {
                    return Err(err(
                        path.as_str(),
                        format!("design {} has {} arms but the outcome source has {}", d.name, d.k(), src.k()),
                    ));
                }
            }
        }

        let mut resolved = value;
        if let Some(obj) = resolved.as_object_mut() {
            obj.remove("out");
            obj.insert("seed".into(), seed.into());
            obj.insert("replications".into(), replications.into());
            obj.insert(
                "resolved_designs".into(),
                serde_json::to_value(designs.iter().map(DesignSpec::to_json).collect::<Vec<_>>())
                    .expect("designs serialize"),
            );
        }
        Ok(Self {
            designs,
            source,
            t,
            replications,
            seed,
            out,
            format,
            resolved,
        })
    }

    pub fn require_instance(&self) -> Result<&Instance, CliError> {
        match &self.source {
            Some(Source::Instance(i)) => Ok(i),
            Some(Source::Model(_)) => Err(err("instance", "this command needs a Gaussian instance, not a model")),
            None => Err(err("instance", "missing")),
        }
    }

    pub fn require_source(&self) -> Result<&Source, CliError> {
        self.source
            .as_ref()
            .ok_or_else(|| err("instance", "missing (give instance or model)"))
    }

    pub fn require_designs(&self) -> Result<&[DesignSpec], CliError> {
        if self.designs.is_empty() {
            Err(err("design", "missing (give design or designs)"))
        } else {
            Ok(&self.designs)
        }
    }

    /// Checks the sample-size grid for simulation commands.
    pub fn require_t(&self, k: usize) -> Result<&[u64], CliError> {
        if self.t.is_empty() {
            return Err(err("t", "must list at least one sample size"));
        }
        if let Some(i) = self.t.iter().position(|&t| t < k as u64) {
            return Err(err(format!("t[{i}]"), format!("sample size must be at least the arm count {k}")));
        }
        Ok(&self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn parse(v: Value) -> Result<RunConfig, CliError> {
        RunConfig::from_value(v, Path::new("."), &Overrides::default())
    }

    fn path_of(e: CliError) -> String {
        match e {
            CliError::Config { path, .. } => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn missing_sigma_names_field() {
        let e = parse(json!({"instance": {"means": [1, 0]}})).unwrap_err();
        assert_eq!(path_of(e), "instance.sigma");
    }

    #[test]
    fn bad_design_paths() {
        let e = parse(json!({"designs": [{"kind": "crt", "k": 3}, {"kind": "two_batch", "k": 4, "s": 1}]})).unwrap_err();
        assert_eq!(path_of(e), "designs[1].beta_first");
        let e = parse(json!({"design": {"kind": "weights", "k": 3, "weights": [0.5, 0.6]}})).unwrap_err();
        assert_eq!(path_of(e), "design.weights");
        let e = parse(json!({"design": {"kind": "crt", "k": 3, "extra": 1}})).unwrap_err();
        assert_eq!(path_of(e), "design.extra");
    }

    #[test]
    fn grid_validation() {
        assert_eq!(path_of(parse(json!({"t": [10, 10]})).unwrap_err()), "t[1]");
        assert_eq!(path_of(parse(json!({"replications": 0})).unwrap_err()), "replications");
        let cfg = parse(json!({"instance": {"means": [1, 0, 0], "sigma": 1}, "t": []})).unwrap();
        assert!(cfg.require_t(3).is_err());
        let cfg = parse(json!({"instance": {"means": [1, 0, 0], "sigma": 1}, "t": [2]})).unwrap();
        assert_eq!(path_of(cfg.require_t(3).unwrap_err()), "t[0]");
    }

    #[test]
    fn instance_and_model_are_exclusive() {
        let e = parse(json!({
            "instance": {"means": [1, 0], "sigma": 1},
            "model": {"kind": "gaussian", "means": [1, 0], "sigma": 1}
        }))
        .unwrap_err();
        assert_eq!(path_of(e), "instance");
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            seed: Some(9),
            format: Some(Format::Json),
            ..Default::default()
        };
        let cfg = RunConfig::from_value(json!({"seed": 1, "format": "csv"}), Path::new("."), &o).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.resolved["seed"], json!(9));
    }

    #[test]
    fn design_forms() {
        let cfg = parse(json!({"designs": [
            {"kind": "crt", "k": 4},
            {"kind": "successive_rejects", "k": 4},
            {"kind": "two_batch", "k": 4, "s": 1, "beta_first": 0.7, "name": "tb"},
            {"k": 4, "weights": [1, 0, 0], "name": "plain"}
        ]}))
        .unwrap();
        assert_eq!(cfg.designs.len(), 4);
        assert_eq!(cfg.designs[0].weights(), cfg.designs[3].weights());
        assert_eq!(cfg.designs[2].name, "tb");
    }

    #[test]
    fn arm_count_mismatch() {
        let e = parse(json!({"design": {"kind": "crt", "k": 3}, "instance": {"means": [1, 0], "sigma": 1}})).unwrap_err();
        assert_eq!(path_of(e), "design");
    }

    #[test]
    fn summary_model() {
        let cfg = parse(json!({"model": {"kind": "summary", "arms": [
            {"p_zero": 0.98, "mean": 44, "sd": 42},
            {"p_zero": 0.98, "mean": 40, "sd": 42}
        ]}}))
        .unwrap();
        assert_eq!(cfg.require_source().unwrap().k(), 2);
        assert!(cfg.require_instance().is_err());
    }
}
