//! TOML experiment documents.
//!
//! ```toml
//! preset = "pl-sine"          # optional; the rest of the document overrides it
//! seeds = [1, 2, 3]
//! probe_stride = 10
//! output_dir = "out"          # optional
//!
//! [objective]
//! kind = "pl-sine"            # pl-sine | logistic | quadratic
//! sigma = 0.5                 # pl-sine, quadratic
//! a_scheme = "linear"         # pl-sine: linear | gaussian
//! x0 = 5.0
//! seed = 0
//! shared_noise = true
//! # logistic: lambda, samples_per_node, dim, separation, data, positive_class
//! # quadratic: dim, sigma
//!
//! [topology]
//! mode = "cyclic"             # cyclic | static | er-random
//! graph = "ring"              # static only: ring | reversed-ring | complete | er
//! n = 100
//! p = 0.1
//! seed = 7
//!
//! [[algorithms]]
//! variant = "push-asgd"       # push-asgd | push-sgd | gt-sgd | gt-sarah
//! alpha = 0.002               # default 6e-5
//! beta = 0.003                # default 0.015
//! batch = 1
//! iterations = 5000
//! ```
//!
//! The document is merged over its preset (or over the default config when
//! no preset is named): `[[algorithms]]` entries merge over the preset's entry at
//! the same position unless they name a different variant, and an
//! `[objective]` table with a different `kind` replaces the preset's.
//! Overrides are `dotted.path=value` pairs applied after the merge, e.g.
//! `algorithms.0.alpha=0.01`.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;
use toml::{Table, Value};

use crate::algo::Variant;
use crate::oracle::AScheme;
use crate::runner::{
    preset, AlgorithmSpec, ExperimentConfig, GraphKind, ObjectiveKind, ObjectiveSpec,
    RunnerError, TopologyMode, TopologySpec, DEFAULT_ALPHA, DEFAULT_BETA, PRESET_NAMES,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// Dotted field path, or `<document>` for syntax errors.
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.issues.len();
        write!(f, "{n} configuration error{}", if n == 1 { "" } else { "s" })?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl ConfigError {
    fn single(field: &str, message: impl Into<String>) -> Self {
        Self {
            issues: vec![ConfigIssue {
                field: field.to_string(),
                message: message.into(),
                line: None,
            }],
        }
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.issues.iter().any(|i| i.field == field)
    }
}

const TOP_KEYS: &[&str] = &[
    "preset",
    "seeds",
    "probe_stride",
    "output_dir",
    "objective",
    "topology",
    "algorithms",
];
const OBJECTIVE_COMMON: &[&str] = &["kind", "x0", "seed", "shared_noise"];
const PL_SINE_KEYS: &[&str] = &["sigma", "a_scheme"];
const LOGISTIC_KEYS: &[&str] = &[
    "lambda",
    "samples_per_node",
    "dim",
    "separation",
    "data",
    "positive_class",
];
const QUADRATIC_KEYS: &[&str] = &["dim", "sigma"];
const TOPOLOGY_KEYS: &[&str] = &["mode", "graph", "n", "p", "seed"];
const ALGORITHM_KEYS: &[&str] = &["variant", "alpha", "beta", "batch", "iterations"];

/// Parses a document, or a bare preset name.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses a document and applies `dotted.path=value` overrides.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[String],
) -> Result<ExperimentConfig, ConfigError> {
    let trimmed = text.trim();
    let doc = if PRESET_NAMES.contains(&trimmed) {
        let mut t = Table::new();
        t.insert("preset".into(), Value::String(trimmed.into()));
        t
    } else {
        text.parse::<Table>().map_err(|e| syntax_issue(text, &e))?
    };
    let mut merged = resolve_preset(doc)?;
    let mut issues = Vec::new();
    for o in overrides {
        if let Err(issue) = apply_override(&mut merged, o) {
            issues.push(issue);
        }
    }
    let cfg = from_table(&merged, &mut issues);
    if let Err(RunnerError::Invalid(range)) = cfg.validate() {
        for (field, message) in range {
            if !issues.iter().any(|i| i.field == field) {
                issues.push(ConfigIssue {
                    field,
                    message,
                    line: None,
                });
            }
        }
    }
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { issues })
    }
}

/// Reads and parses a document from disk.
pub fn parse_config_file(path: &Path, overrides: &[String]) -> crate::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| crate::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config_with_overrides(&text, overrides)?)
}

fn syntax_issue(text: &str, e: &toml::de::Error) -> ConfigError {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    ConfigError {
        issues: vec![ConfigIssue {
            field: "<document>".into(),
            message: e.message().to_string(),
            line,
        }],
    }
}

/// Merges the document over its preset, or over the default config.
fn resolve_preset(mut doc: Table) -> Result<Table, ConfigError> {
    let base = match doc.remove("preset") {
        None => ExperimentConfig::default(),
        Some(Value::String(name)) => preset(&name).ok_or_else(|| {
            let mut msg = format!("unknown preset {name:?}");
            if let Some(s) = suggest(&name, &PRESET_NAMES) {
                msg.push_str(&format!("; did you mean {s:?}?"));
            }
            ConfigError::single("preset", msg)
        })?,
        Some(_) => return Err(ConfigError::single("preset", "expected a string")),
    };
    let mut base = to_table(&base);
    for (key, value) in doc {
        merge_key(&mut base, key, value);
    }
    Ok(base)
}

fn merge_key(base: &mut Table, key: String, value: Value) {
    match (key.as_str(), base.get_mut(&key), value) {
        ("objective", Some(Value::Table(b)), Value::Table(o)) => {
            if o.get("kind").is_some_and(|k| Some(k) != b.get("kind")) {
                *b = o;
            } else {
                b.extend(o);
            }
        }
        ("topology", Some(Value::Table(b)), Value::Table(o)) => b.extend(o),
        ("algorithms", Some(Value::Array(b)), Value::Array(o)) => {
            let mut out = Vec::with_capacity(o.len());
            for (k, entry) in o.into_iter().enumerate() {
                match (b.get(k), entry) {
                    (Some(Value::Table(prev)), Value::Table(e))
                        if e.get("variant").is_none_or(|v| Some(v) == prev.get("variant")) =>
                    {
                        let mut m = prev.clone();
                        m.extend(e);
                        out.push(Value::Table(m));
                    }
                    (_, e) => out.push(e),
                }
            }
            *b = out;
        }
        (_, _, value) => {
            base.insert(key, value);
        }
    }
}

fn parse_override_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn apply_override(doc: &mut Table, text: &str) -> Result<(), ConfigIssue> {
    let issue = |field: &str, message: String| ConfigIssue {
        field: field.to_string(),
        message,
        line: None,
    };
    let Some((path, raw)) = text.split_once('=') else {
        return Err(issue(text, "override must look like key=value".into()));
    };
    let path = path.trim();
    let value = parse_override_value(raw.trim());
    let parts: Vec<&str> = path.split('.').collect();
    // A missing container becomes a list when the next segment is an index.
    let container = |depth: usize| match parts.get(depth + 1) {
        Some(next) if next.parse::<usize>().is_ok() => Value::Array(Vec::new()),
        _ => Value::Table(Table::new()),
    };
    let mut slot: &mut Value = doc.entry(parts[0].to_string()).or_insert_with(|| container(0));
    for (depth, part) in parts.iter().enumerate().skip(1) {
        let here = parts[..depth].join(".");
        slot = match slot {
            Value::Table(t) => t.entry(part.to_string()).or_insert_with(|| container(depth)),
            Value::Array(a) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| issue(path, format!("{here} is a list; expected an index, got {part:?}")))?;
                if idx == a.len() {
                    a.push(container(depth));
                }
                a.get_mut(idx)
                    .ok_or_else(|| issue(path, format!("{here} has no entry {idx}")))?
            }
            _ => return Err(issue(path, format!("{here} is not a table"))),
        };
    }
    *slot = value;
    Ok(())
}

fn suggest<'a>(key: &str, candidates: &[&'a str]) -> Option<&'a str> {
    candidates
        .iter()
        .map(|c| (strsim::levenshtein(key, c), *c))
        .filter(|(d, c)| *d <= (c.len() / 3).max(2))
        .min()
        .map(|(_, c)| c)
}

/// Field reader that records problems instead of stopping at the first.
struct Reader<'a> {
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn push(&mut self, field: String, message: String) {
        self.issues.push(ConfigIssue {
            field,
            message,
            line: None,
        });
    }

    fn check_keys(&mut self, table: &Table, prefix: &str, allowed: &[&str], known: &[&str]) {
        for key in table.keys() {
            if allowed.contains(&key.as_str()) {
                continue;
            }
            let field = if prefix.is_empty() {
                key.clone()
            } else {
                format!("{prefix}.{key}")
            };
            let mut msg = "unknown key".to_string();
            if known.contains(&key.as_str()) {
                msg = "not used by this kind".to_string();
            } else if let Some(s) = suggest(key, known) {
                msg.push_str(&format!("; did you mean {s:?}?"));
            }
            self.push(field, msg);
        }
    }

    fn float(&mut self, t: &Table, prefix: &str, key: &str, default: f64) -> f64 {
        match t.get(key) {
            None => default,
            Some(Value::Float(v)) => *v,
            Some(Value::Integer(v)) => *v as f64,
            Some(other) => {
                self.push(format!("{prefix}.{key}"), format!("expected a number, got {}", other.type_str()));
                default
            }
        }
    }

    fn uint(&mut self, field: String, value: Option<&Value>, default: u64) -> u64 {
        match value {
            None => default,
            Some(Value::Integer(v)) if *v >= 0 => *v as u64,
            Some(Value::Integer(v)) => {
                self.push(field, format!("must be non-negative, got {v}"));
                default
            }
            Some(other) => {
                self.push(field, format!("expected an integer, got {}", other.type_str()));
                default
            }
        }
    }

    fn int(&mut self, t: &Table, prefix: &str, key: &str, default: u64) -> u64 {
        self.uint(format!("{prefix}.{key}"), t.get(key), default)
    }

    fn boolean(&mut self, t: &Table, prefix: &str, key: &str, default: bool) -> bool {
        match t.get(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.push(format!("{prefix}.{key}"), format!("expected a boolean, got {}", other.type_str()));
                default
            }
        }
    }

    fn choice<T: Copy>(
        &mut self,
        t: &Table,
        prefix: &str,
        key: &str,
        options: &[(&str, T)],
        default: T,
    ) -> T {
        match t.get(key) {
            None => default,
            Some(Value::String(s)) => match options.iter().find(|(name, _)| name == s) {
                Some((_, v)) => *v,
                None => {
                    let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                    let mut msg = format!("unknown value {s:?}; expected one of {}", names.join(", "));
                    if let Some(near) = suggest(s, &names) {
                        msg.push_str(&format!(" (did you mean {near:?}?)"));
                    }
                    self.push(format!("{prefix}.{key}"), msg);
                    default
                }
            },
            Some(other) => {
                self.push(format!("{prefix}.{key}"), format!("expected a string, got {}", other.type_str()));
                default
            }
        }
    }

    fn table<'t>(&mut self, t: &'t Table, key: &str) -> Option<&'t Table> {
        match t.get(key) {
            None => None,
            Some(Value::Table(inner)) => Some(inner),
            Some(other) => {
                self.push(key.to_string(), format!("expected a table, got {}", other.type_str()));
                None
            }
        }
    }
}

const VARIANTS: [(&str, Variant); 4] = [
    ("push-asgd", Variant::PushAsgd),
    ("push-sgd", Variant::PushSgd),
    ("gt-sgd", Variant::GtSgd),
    ("gt-sarah", Variant::GtSarah),
];

fn read_objective(r: &mut Reader<'_>, t: &Table) -> ObjectiveSpec {
    let p = "objective";
    let defaults = ExperimentConfig::default().objective;
    let kind = r.choice(t, p, "kind", &[("pl-sine", 0), ("logistic", 1), ("quadratic", 2)], 0);
    let specific: &[&str] = match kind {
        0 => PL_SINE_KEYS,
        1 => LOGISTIC_KEYS,
        _ => QUADRATIC_KEYS,
    };
    let allowed: Vec<&str> = OBJECTIVE_COMMON.iter().chain(specific).copied().collect();
    let known: Vec<&str> = OBJECTIVE_COMMON
        .iter()
        .chain(PL_SINE_KEYS)
        .chain(LOGISTIC_KEYS)
        .chain(QUADRATIC_KEYS)
        .copied()
        .collect();
    r.check_keys(t, p, &allowed, &known);
    let kind = match kind {
        0 => ObjectiveKind::PlSine {
            sigma: r.float(t, p, "sigma", 0.5),
            a_scheme: r.choice(
                t,
                p,
                "a_scheme",
                &[("linear", AScheme::Linear), ("gaussian", AScheme::Gaussian)],
                AScheme::Linear,
            ),
        },
        1 => ObjectiveKind::Logistic {
            lambda: r.float(t, p, "lambda", 1e-4),
            samples_per_node: r.int(t, p, "samples_per_node", 12) as usize,
            dim: r.int(t, p, "dim", 20) as usize,
            separation: r.float(t, p, "separation", 2.0),
            data: match t.get("data") {
                None => None,
                Some(Value::String(s)) => Some(PathBuf::from(s)),
                Some(other) => {
                    r.push("objective.data".into(), format!("expected a path string, got {}", other.type_str()));
                    None
                }
            },
            positive_class: r.float(t, p, "positive_class", 1.0),
        },
        _ => ObjectiveKind::Quadratic {
            dim: r.int(t, p, "dim", 5) as usize,
            sigma: r.float(t, p, "sigma", 0.5),
        },
    };
    ObjectiveSpec {
        kind,
        x0: r.float(t, p, "x0", defaults.x0),
        seed: r.int(t, p, "seed", defaults.seed),
        shared_noise: r.boolean(t, p, "shared_noise", defaults.shared_noise),
    }
}

fn read_topology(r: &mut Reader<'_>, t: &Table) -> TopologySpec {
    let p = "topology";
    let d = ExperimentConfig::default().topology;
    r.check_keys(t, p, TOPOLOGY_KEYS, TOPOLOGY_KEYS);
    TopologySpec {
        mode: r.choice(
            t,
            p,
            "mode",
            &[
                ("cyclic", TopologyMode::Cyclic),
                ("static", TopologyMode::Static),
                ("er-random", TopologyMode::ErRandom),
            ],
            d.mode,
        ),
        graph: r.choice(
            t,
            p,
            "graph",
            &[
                ("ring", GraphKind::Ring),
                ("reversed-ring", GraphKind::ReversedRing),
                ("complete", GraphKind::Complete),
                ("er", GraphKind::Er),
            ],
            d.graph,
        ),
        n: r.int(t, p, "n", d.n as u64) as usize,
        p: r.float(t, p, "p", d.p),
        seed: r.int(t, p, "seed", d.seed),
    }
}

fn read_algorithm(r: &mut Reader<'_>, t: &Table, k: usize) -> AlgorithmSpec {
    let p = format!("algorithms.{k}");
    r.check_keys(t, &p, ALGORITHM_KEYS, ALGORITHM_KEYS);
    let variant = r.choice(t, &p, "variant", &VARIANTS, Variant::PushAsgd);
    AlgorithmSpec {
        variant,
        alpha: r.float(t, &p, "alpha", DEFAULT_ALPHA),
        beta: r.float(t, &p, "beta", DEFAULT_BETA),
        batch: r.int(t, &p, "batch", 1) as usize,
        iterations: r.int(t, &p, "iterations", 1000) as usize,
    }
}

/// Builds a config from a merged document; problems go to `issues`.
fn from_table(doc: &Table, issues: &mut Vec<ConfigIssue>) -> ExperimentConfig {
    let mut r = Reader { issues };
    let d = ExperimentConfig::default();
    r.check_keys(doc, "", TOP_KEYS, TOP_KEYS);

    let empty = Table::new();
    let objective_table = r.table(doc, "objective").unwrap_or(&empty);
    let objective = read_objective(&mut r, objective_table);
    let topology_table = r.table(doc, "topology").unwrap_or(&empty);
    let topology = read_topology(&mut r, topology_table);
    let algorithms = match doc.get("algorithms") {
        None => d.algorithms,
        Some(Value::Array(entries)) => entries
            .iter()
            .enumerate()
            .filter_map(|(k, e)| match e {
                Value::Table(t) => Some(read_algorithm(&mut r, t, k)),
                other => {
                    r.push(format!("algorithms.{k}"), format!("expected a table, got {}", other.type_str()));
                    None
                }
            })
            .collect(),
        Some(other) => {
            r.push("algorithms".into(), format!("expected an array of tables, got {}", other.type_str()));
            Vec::new()
        }
    };
    let seeds = match doc.get("seeds") {
        None => d.seeds,
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(k, v)| r.uint(format!("seeds.{k}"), Some(v), 0))
            .collect(),
        Some(v @ Value::Integer(_)) => vec![r.uint("seeds".into(), Some(v), 0)],
        Some(other) => {
            r.push("seeds".into(), format!("expected a list of integers, got {}", other.type_str()));
            Vec::new()
        }
    };
    let probe_stride = r.uint("probe_stride".into(), doc.get("probe_stride"), d.probe_stride as u64) as usize;
    let output_dir = match doc.get("output_dir") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => {
            r.push("output_dir".into(), format!("expected a path string, got {}", other.type_str()));
            None
        }
    };
    ExperimentConfig {
        objective,
        topology,
        algorithms,
        seeds,
        probe_stride,
        output_dir,
    }
}

fn float_value(v: f64) -> Value {
    Value::Float(v)
}

fn int_value(v: u64) -> Value {
    Value::Integer(v as i64)
}

/// Document form of a config. Parsing the result yields the same config.
pub fn to_table(cfg: &ExperimentConfig) -> Table {
    let mut obj = Table::new();
    obj.insert("kind".into(), Value::String(cfg.objective.kind.name().into()));
    match &cfg.objective.kind {
        ObjectiveKind::PlSine { sigma, a_scheme } => {
            obj.insert("sigma".into(), float_value(*sigma));
            let scheme = match a_scheme {
                AScheme::Linear => "linear",
                AScheme::Gaussian => "gaussian",
            };
            obj.insert("a_scheme".into(), Value::String(scheme.into()));
        }
        ObjectiveKind::Logistic {
            lambda,
            samples_per_node,
            dim,
            separation,
            data,
            positive_class,
        } => {
            obj.insert("lambda".into(), float_value(*lambda));
            obj.insert("samples_per_node".into(), int_value(*samples_per_node as u64));
            obj.insert("dim".into(), int_value(*dim as u64));
            obj.insert("separation".into(), float_value(*separation));
            if let Some(path) = data {
                obj.insert("data".into(), Value::String(path.display().to_string()));
            }
            obj.insert("positive_class".into(), float_value(*positive_class));
        }
        ObjectiveKind::Quadratic { dim, sigma } => {
            obj.insert("dim".into(), int_value(*dim as u64));
            obj.insert("sigma".into(), float_value(*sigma));
        }
    }
    obj.insert("x0".into(), float_value(cfg.objective.x0));
    obj.insert("seed".into(), int_value(cfg.objective.seed));
    obj.insert("shared_noise".into(), Value::Boolean(cfg.objective.shared_noise));

    let mut topo = Table::new();
    topo.insert("mode".into(), Value::String(cfg.topology.mode.name().into()));
    topo.insert("graph".into(), Value::String(cfg.topology.graph.name().into()));
    topo.insert("n".into(), int_value(cfg.topology.n as u64));
    topo.insert("p".into(), float_value(cfg.topology.p));
    topo.insert("seed".into(), int_value(cfg.topology.seed));

    let algorithms = cfg
        .algorithms
        .iter()
        .map(|a| {
            let mut t = Table::new();
            t.insert("variant".into(), Value::String(a.variant.name().into()));
            t.insert("alpha".into(), float_value(a.alpha));
            t.insert("beta".into(), float_value(a.beta));
            t.insert("batch".into(), int_value(a.batch as u64));
            t.insert("iterations".into(), int_value(a.iterations as u64));
            Value::Table(t)
        })
        .collect();

    let mut doc = Table::new();
    doc.insert(
        "seeds".into(),
        Value::Array(cfg.seeds.iter().map(|s| int_value(*s)).collect()),
    );
    doc.insert("probe_stride".into(), int_value(cfg.probe_stride as u64));
    if let Some(dir) = &cfg.output_dir {
        doc.insert("output_dir".into(), Value::String(dir.display().to_string()));
    }
    doc.insert("objective".into(), Value::Table(obj));
    doc.insert("topology".into(), Value::Table(topo));
    doc.insert("algorithms".into(), Value::Array(algorithms));
    doc
}

pub fn to_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(&to_table(cfg)).expect("plain tables serialize")
}

/// Sorted-key JSON of the document form without `output_dir`; floats use
/// the shortest round-trip representation.
pub fn canonical_json(cfg: &ExperimentConfig) -> String {
    let mut doc = to_table(cfg);
    doc.remove("output_dir");
    let value = serde_json::to_value(&doc).expect("plain tables serialize");
    serde_json::to_string(&value).expect("json values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_by_name_and_by_key() {
        let a = parse_config("pl-sine").unwrap();
        assert_eq!(a, preset("pl-sine").unwrap());
        let b = parse_config("preset = \"pl-sine\"\n").unwrap();
        assert_eq!(a, b);
        let c = parse_config("preset = \"pl-sin\"").unwrap_err();
        assert!(c.issues[0].message.contains("did you mean \"pl-sine\""));
    }

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = parse_config("[[algorithms]]\nvariant = \"push-sgd\"\niterations = 10\n").unwrap();
        assert_eq!(cfg.algorithms[0].alpha, DEFAULT_ALPHA);
        assert_eq!(cfg.algorithms[0].beta, DEFAULT_BETA);
        assert_eq!(cfg.algorithms[0].variant, Variant::PushSgd);
        assert_eq!(cfg.topology, ExperimentConfig::default().topology);
    }

    #[test]
    fn beta_out_of_range_names_field() {
        let err = parse_config("[[algorithms]]\nbeta = 1.5\n").unwrap_err();
        assert!(err.mentions("algorithms.0.beta"), "{err}");
        assert!(err.to_string().contains("algorithms.0.beta"));
    }

    #[test]
    fn all_errors_reported_together() {
        let text = "seedz = [1]\nprobe_stride = 0\n[objective]\nsigmma = 0.5\n[topology]\nn = 1\nmode = \"cyclik\"\n[[algorithms]]\nalpha = \"big\"\n";
        let err = parse_config(text).unwrap_err();
        for field in [
            "seedz",
            "objective.sigmma",
            "topology.n",
            "topology.mode",
            "algorithms.0.alpha",
            "probe_stride",
        ] {
            assert!(err.mentions(field), "missing {field} in {err}");
        }
        let s = err.to_string();
        assert!(s.contains("did you mean \"seeds\""));
        assert!(s.contains("did you mean \"sigma\""));
        assert!(s.contains("did you mean \"cyclic\""));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_config("seeds = [1]\nprobe_stride = = 3\n").unwrap_err();
        assert_eq!(err.issues[0].line, Some(2));
    }

    #[test]
    fn kind_specific_keys() {
        let err = parse_config("[objective]\nkind = \"quadratic\"\nlambda = 0.1\n").unwrap_err();
        assert_eq!(err.issues[0].message, "not used by this kind");
        let cfg = parse_config("[objective]\nkind = \"logistic\"\ndata = \"d.csv\"\n").unwrap();
        assert!(matches!(cfg.objective.kind, ObjectiveKind::Logistic { data: Some(_), .. }));
    }

    #[test]
    fn preset_merge_rules() {
        let cfg = parse_config("preset = \"pl-sine\"\n[[algorithms]]\nalpha = 0.01\n").unwrap();
        assert_eq!(cfg.algorithms.len(), 1);
        assert_eq!(cfg.algorithms[0].alpha, 0.01);
        assert_eq!(cfg.algorithms[0].beta, 3e-3);
        let cfg = parse_config("preset = \"pl-sine\"\n[[algorithms]]\nvariant = \"gt-sgd\"\n").unwrap();
        assert_eq!(cfg.algorithms[0].alpha, DEFAULT_ALPHA);
        let cfg = parse_config("preset = \"pl-sine\"\n[objective]\nkind = \"quadratic\"\n").unwrap();
        assert!(matches!(cfg.objective.kind, ObjectiveKind::Quadratic { dim: 5, .. }));
        let cfg = parse_config("preset = \"pl-sine\"\n[topology]\nn = 12\n").unwrap();
        assert_eq!((cfg.topology.n, cfg.topology.seed), (12, 7));
    }

    #[test]
    fn overrides() {
        let o = |s: &str| s.to_string();
        let cfg = parse_config_with_overrides(
            "pl-sine",
            &[o("algorithms.0.alpha=0.01"), o("topology.n = 10"), o("seeds=[4]"), o("objective.a_scheme=gaussian")],
        )
        .unwrap();
        assert_eq!(cfg.algorithms[0].alpha, 0.01);
        assert_eq!(cfg.topology.n, 10);
        assert_eq!(cfg.seeds, vec![4]);
        assert!(matches!(cfg.objective.kind, ObjectiveKind::PlSine { a_scheme: AScheme::Gaussian, .. }));
        let cfg = parse_config_with_overrides("pl-sine", &[o("algorithms.2.variant=\"gt-sarah\"")]).unwrap();
        assert_eq!(cfg.algorithms[2].variant, Variant::GtSarah);
        let cfg = parse_config_with_overrides("", &[o("algorithms.0.alpha=0.5"), o("algorithms.1.variant=push-sgd")]).unwrap();
        assert_eq!(cfg.algorithms.len(), 2);
        assert_eq!(cfg.algorithms[0].alpha, 0.5);
        assert_eq!(cfg.algorithms[1].alpha, DEFAULT_ALPHA);
        let err = parse_config_with_overrides("", &[o("algorithms.0.bet=2")]).unwrap_err();
        assert!(err.to_string().contains("did you mean \"beta\""), "{err}");
        let err = parse_config_with_overrides("pl-sine", &[o("algorithms.x.alpha=1"), o("nokey")]).unwrap_err();
        assert_eq!(err.issues.len(), 2);
        let err = parse_config_with_overrides("pl-sine", &[o("algorithms.0.beta=1.5")]).unwrap_err();
        assert!(err.mentions("algorithms.0.beta"));
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let text = to_toml(&cfg);
            let back = parse_config(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(to_toml(&back), text);
        }
    }

    #[test]
    fn canonical_form_ignores_key_order_and_output_dir() {
        let a = parse_config("seeds = [1, 2]\nprobe_stride = 5\n[topology]\nn = 6\np = 0.5\n").unwrap();
        let b = parse_config("[topology]\np = 0.5\nn = 6\n[objective]\n\n").unwrap();
        let b = ExperimentConfig {
            seeds: vec![1, 2],
            probe_stride: 5,
            output_dir: Some("x".into()),
            ..b
        };
        assert_eq!(canonical_json(&a), canonical_json(&b));
        assert_eq!(a.fingerprint(), b.fingerprint());
        let json = canonical_json(&a);
        assert!(json.starts_with("{\"algorithms\":"));
        assert!(!json.contains("output_dir"));
    }
}
