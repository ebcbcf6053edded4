//! Simulation configs: a flat JSON object with a fixed set of keys.
//!
//! Validation walks the whole object before failing so a user sees every
//! problem with a config at once.

use std::fmt;
use std::path::{Path, PathBuf};

use qk_core::dynamics::Method;
use qk_core::expr::{ParseError, ScalarField};
use qk_core::structure::{BlockDim, Label};
use serde_json::{Map, Value};
use thiserror::Error;

pub const FIELDS: [&str; 9] = [
    "n",
    "structure",
    "hamiltonian",
    "initial",
    "dt",
    "steps",
    "method",
    "output_prefix",
    "emit_plot",
];

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub dim: BlockDim,
    pub structure: Label,
    pub hamiltonian: ScalarField,
    pub initial: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    pub output_prefix: PathBuf,
    pub emit_plot: bool,
}

/// One schema problem, tied to the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path} is not valid JSON: {source}")]
    Malformed {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("config {path} failed validation:\n{}", list(.issues))]
    Schema { path: PathBuf, issues: Vec<FieldIssue> },
    #[error("config {path}: field \"hamiltonian\" does not parse: {source}")]
    Expression {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
}

fn list(issues: &[FieldIssue]) -> String {
    issues.iter().map(|i| format!("  - {i}")).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    pub fn issues(&self) -> &[FieldIssue] {
        match self {
            ConfigError::Schema { issues, .. } => issues,
            _ => &[],
        }
    }
}

pub fn load_config(path: &Path) -> Result<SimulationConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

/// Parses config text; `origin` only labels error messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<SimulationConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|source| ConfigError::Malformed {
        path: origin.to_path_buf(),
        source,
    })?;
    let schema = |issues| ConfigError::Schema {
        path: origin.to_path_buf(),
        issues,
    };
    let Value::Object(map) = value else {
        return Err(schema(vec![FieldIssue {
            field: "<root>".into(),
            message: "expected a JSON object".into(),
        }]));
    };
    let mut v = Validator {
        map: &map,
        issues: Vec::new(),
    };
    for key in map.keys() {
        if !FIELDS.contains(&key.as_str()) {
            v.issue(key, format!("unknown key (allowed: {})", FIELDS.join(", ")));
        }
    }

    let n = v.positive_int("n");
    let structure = v.string("structure").and_then(|s| match s.parse::<Label>() {
        Ok(l) => Some(l),
        Err(_) => {
            v.issue("structure", format!("\"{s}\" is not one of \"F\", \"G\", \"H\""));
            None
        }
    });
    let hamiltonian = v.string("hamiltonian").map(str::to_owned);
    let initial = v.real_array("initial");
    if let (Some(n), Some(initial)) = (n, &initial) {
        if initial.len() != 4 * n {
            v.issue(
                "initial",
                format!("expected {} entries (4n with n = {n}), found {}", 4 * n, initial.len()),
            );
        }
    }
    let dt = v.real("dt");
    if let Some(dt) = dt {
        if dt <= 0.0 {
            v.issue("dt", format!("must be > 0, got {dt}"));
        }
    }
    let steps = v.positive_int("steps");
    let method = v.string("method").and_then(|s| match s.parse::<Method>() {
        Ok(m) => Some(m),
        Err(_) => {
            v.issue(
                "method",
                format!("\"{s}\" is not one of \"rk4\", \"implicit_midpoint\""),
            );
            None
        }
    });
    let output_prefix = v.string("output_prefix").map(PathBuf::from);
    if output_prefix.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
        v.issue("output_prefix", "must not be empty".into());
    }
    let emit_plot = v.boolean("emit_plot");

    if !v.issues.is_empty() {
        return Err(schema(v.issues));
    }
    let (
        Some(n),
        Some(structure),
        Some(hamiltonian),
        Some(initial),
        Some(dt),
        Some(steps),
        Some(method),
        Some(output_prefix),
        Some(emit_plot),
    ) = (
        n,
        structure,
        hamiltonian,
        initial,
        dt,
        steps,
        method,
        output_prefix,
        emit_plot,
    )
    else {
        unreachable!("every missing field records an issue");
    };
    let dim = BlockDim::new(n).expect("n validated positive");
    let hamiltonian = ScalarField::parse(&hamiltonian, dim).map_err(|source| ConfigError::Expression {
        path: origin.to_path_buf(),
        source,
    })?;
    Ok(SimulationConfig {
        dim,
        structure,
        hamiltonian,
        initial,
        dt,
        steps,
        method,
        output_prefix,
        emit_plot,
    })
}

struct Validator<'a> {
    map: &'a Map<String, Value>,
    issues: Vec<FieldIssue>,
}

impl<'a> Validator<'a> {
    fn issue(&mut self, field: &str, message: String) {
        self.issues.push(FieldIssue {
            field: field.to_owned(),
            message,
        });
    }

    fn get(&mut self, field: &str) -> Option<&'a Value> {
        let found = self.map.get(field);
        if found.is_none() {
            self.issue(field, "missing".into());
        }
        found
    }

    fn positive_int(&mut self, field: &str) -> Option<usize> {
        let value = self.get(field)?;
        match value.as_u64().filter(|&k| k >= 1).and_then(|k| usize::try_from(k).ok()) {
            Some(k) => Some(k),
            None => {
                self.issue(field, format!("expected a positive integer, got {value}"));
                None
            }
        }
    }

    fn real(&mut self, field: &str) -> Option<f64> {
        let value = self.get(field)?;
        match value.as_f64() {
            Some(x) => Some(x),
            None => {
                self.issue(field, format!("expected a number, got {value}"));
                None
            }
        }
    }

    fn string(&mut self, field: &str) -> Option<&'a str> {
        let value = self.get(field)?;
        match value.as_str() {
            Some(s) => Some(s),
            None => {
                self.issue(field, format!("expected a string, got {value}"));
                None
            }
        }
    }

    fn boolean(&mut self, field: &str) -> Option<bool> {
        let value = self.get(field)?;
        match value.as_bool() {
            Some(b) => Some(b),
            None => {
                self.issue(field, format!("expected true or false, got {value}"));
                None
            }
        }
    }

    fn real_array(&mut self, field: &str) -> Option<Vec<f64>> {
        let value = self.get(field)?;
        let parsed = value
            .as_array()
            .and_then(|items| items.iter().map(Value::as_f64).collect::<Option<Vec<_>>>());
        if parsed.is_none() {
            self.issue(field, format!("expected an array of numbers, got {value}"));
        }
        parsed
    }
}
