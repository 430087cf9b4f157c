//! Run configuration: one JSON document with sections `problem`, `scheme`,
//! `grid`, `tolerances`, `oscillation` and `output`.

use std::fmt;
use std::path::{Path, PathBuf};

use asympt_core::criteria::{ProblemInstance, Scheme};
use asympt_core::fixpoint::GridSpec;
use asympt_core::pde_radial::RadialPdeInstance;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub oscillation: OscillationSettings,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Problem {
    Ode(ProblemInstance),
    RadialPde(RadialPdeInstance),
}

/// `"auto"` or a scheme name.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SchemeChoice {
    #[default]
    Auto,
    Explicit(Scheme),
}

impl TryFrom<String> for SchemeChoice {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        if s == "auto" {
            return Ok(SchemeChoice::Auto);
        }
        serde_json::from_value(serde_json::Value::String(s.clone()))
            .map(SchemeChoice::Explicit)
            .map_err(|_| {
                format!(
                    "unknown scheme `{s}`, expected auto, bounded_limit, derivative_space, \
                     linear_like, wronskian_weighted or sandwich_linear"
                )
            })
    }
}

impl From<SchemeChoice> for String {
    fn from(c: SchemeChoice) -> String {
        match c {
            SchemeChoice::Auto => "auto".into(),
            SchemeChoice::Explicit(s) => match serde_json::to_value(s) {
                Ok(serde_json::Value::String(name)) => name,
                _ => unreachable!("schemes serialize as strings"),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// stop once the a-posteriori bound is below this
    pub tol: f64,
    pub max_iter: usize,
    /// RK cross-check tolerance; `null` skips the cross-check
    pub rk_rtol: Option<f64>,
    /// radial samples in PDE output
    pub samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            rk_rtol: Some(1e-10),
            samples: 400,
        }
    }
}

/// Initial data for `oscillate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillationSettings {
    pub t_end: f64,
    pub x0: f64,
    pub v0: f64,
    /// start from the fixed point of the selected scheme instead of `(x0, v0)`
    pub from_solution: bool,
}

impl Default for OscillationSettings {
    fn default() -> Self {
        Self {
            t_end: 50.0,
            x0: 1.0,
            v0: 0.0,
            from_solution: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    /// directory for JSON and CSV files; without it JSON goes to stdout
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    /// dotted path of the offending field
    pub field: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.path {
            write!(f, "{}: ", p.display())?;
        }
        write!(f, "config error")?;
        if !self.field.is_empty() && self.field != "." {
            write!(f, " in field `{}`", self.field)?;
        }
        if self.line > 0 {
            write!(f, " (line {}, column {})", self.line, self.column)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut field = e.path().to_string();
            let inner = e.into_inner();
            let mut message = strip_position(&inner.to_string());
            if field == "problem" {
                if let Some((f, m)) = locate_in_problem(text) {
                    if f != "." {
                        field = format!("problem.{f}");
                    }
                    message = m;
                }
            }
            ConfigError {
                path: None,
                field,
                line: inner.line(),
                column: inner.column(),
                message,
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: Some(path.to_path_buf()),
            field: String::new(),
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| ConfigError {
            path: Some(path.to_path_buf()),
            ..e
        })
    }

    pub fn to_json(&self) -> String {
        asympt_core::io::to_json_string(self).expect("configs serialize")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let fail = |field: &str, message: String| ConfigError {
            path: None,
            field: field.into(),
            line: 0,
            column: 0,
            message,
        };
        match &self.problem {
            Problem::Ode(inst) => inst.validate().map_err(|e| fail("problem", e.to_string()))?,
            Problem::RadialPde(inst) => inst.validate().map_err(|e| fail("problem", e.to_string()))?,
        }
        let t = &self.tolerances;
        if !(t.tol > 0.0) {
            return Err(fail("tolerances.tol", format!("must be positive, got {}", t.tol)));
        }
        if let Some(r) = t.rk_rtol {
            if !(r > 0.0) {
                return Err(fail("tolerances.rk_rtol", format!("must be positive, got {r}")));
            }
        }
        if t.samples < 2 {
            return Err(fail("tolerances.samples", format!("need at least 2, got {}", t.samples)));
        }
        Ok(())
    }
}

/// The tagged `problem` section is buffered before it is decoded, which
/// loses the field path; decoding its body directly recovers it.
fn locate_in_problem(text: &str) -> Option<(String, String)> {
    fn decode<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Option<(String, String)> {
        serde_path_to_error::deserialize::<_, T>(v)
            .err()
            .map(|e| (e.path().to_string(), strip_position(&e.into_inner().to_string())))
    }
    let doc: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut body = doc.get("problem")?.as_object()?.clone();
    let kind = body.remove("type")?;
    let body = serde_json::Value::Object(body);
    match kind.as_str()? {
        "ode" => decode::<ProblemInstance>(body),
        "radial_pde" => decode::<RadialPdeInstance>(body),
        _ => None,
    }
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
