//! INI-style run configuration.
//!
//! Every key lives in a section (`[grid]` then `cells = 64` is the key
//! `grid.cells`). Only keys listed in [`KEYS`] are accepted. Values are kept
//! as text and parsed on access so that diagnostics can name the key.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: {message}")]
    Syntax { origin: String, line: usize, message: String },
    #[error("{origin}:{line}: unknown key `{key}`")]
    UnknownKey { origin: String, line: usize, key: String },
    #[error("invalid value {value:?} for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
}

/// Recognised keys with their defaults.
pub const KEYS: &[(&str, &str)] = &[
    ("run.seed", "0"),
    ("surface.kind", "hyperbolic-paraboloid"),
    ("surface.dim", "2"),
    ("surface.coeffs", "-1,1"),
    ("surface.mode", "analytic"),
    ("bump.amplitude", "0.02"),
    ("bump.center", "0.1"),
    ("bump.radius", "0.8"),
    ("bump.power", "6"),
    ("grid.cells", "64"),
    ("grid.lo", "-1"),
    ("grid.hi", "1"),
    ("solver.det_floor", "1e-10"),
    ("solver.eig_floor", "1e-8"),
    ("solver.cfl_safety", "0.9"),
    ("solver.weight", "1"),
    ("linearize.eps", "1e-2,5e-3,2.5e-3"),
    ("linearize.degree", "4"),
    ("linear.dim", "2"),
    ("linear.cells", "128"),
    ("linear.half_width", "2"),
    ("linear.t_end", "1"),
    ("linear.source", "manufactured"),
    ("linear.weights", "1,2,4,8,16,32,64,128,256"),
    ("nonlinear.cells", "128"),
    ("nonlinear.amplitude", "0.01"),
    ("nonlinear.tol", "1e-13"),
    ("nonlinear.max_iter", "8"),
    ("nonlinear.admissibility", "1"),
    ("nonlinear.mollifier", ""),
    ("instability.delta", "0.005"),
    ("instability.extent", "8"),
    ("instability.extent_bar", "8"),
    ("instability.tol", "0.01"),
    ("instability.resample_h", "0.02"),
    ("instability.csv_stride", "10"),
    ("localization.dim", "3"),
    ("localization.cells", "48"),
    ("localization.source", "tautological"),
    ("localization.eps", "1e-4"),
    ("convergence.check", "conformal-identity"),
    ("convergence.levels", "16,32,64"),
];

#[derive(Clone, Debug)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl Config {
    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        self.load_str(&text, &path.display().to_string())
    }

    pub fn load_str(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    origin: origin.into(),
                    line,
                    message: "unterminated section header".into(),
                })?;
                section = Some(name.trim().to_string());
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin: origin.into(),
                    line,
                    message: format!("expected `key = value`, found {body:?}"),
                });
            };
            let Some(sec) = &section else {
                return Err(ConfigError::Syntax {
                    origin: origin.into(),
                    line,
                    message: format!("key `{}` outside of any section", k.trim()),
                });
            };
            self.insert(&format!("{sec}.{}", k.trim()), v.trim(), origin, line)?;
        }
        Ok(())
    }

    /// Applies `section.key=value`; `index` is the position of the override
    /// on the command line, used in diagnostics.
    pub fn apply_override(&mut self, assignment: &str, index: usize) -> Result<(), ConfigError> {
        let Some((k, v)) = assignment.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin: "--set".into(),
                line: index,
                message: format!("expected `section.key=value`, found {assignment:?}"),
            });
        };
        self.insert(k.trim(), v.trim(), "--set", index)
    }

    fn insert(&mut self, key: &str, value: &str, origin: &str, line: usize) -> Result<(), ConfigError> {
        if !known(key) {
            return Err(ConfigError::UnknownKey { origin: origin.into(), line, key: key.into() });
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Sets a key from a dedicated command-line flag.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(known(key), "{key}");
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("key listed in KEYS")
    }

    fn invalid(&self, key: &str, reason: impl ToString) -> ConfigError {
        ConfigError::InvalidValue { key: key.into(), value: self.str(key).into(), reason: reason.to_string() }
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let x: f64 = self.str(key).parse().map_err(|e| self.invalid(key, e))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.invalid(key, "not finite"))
        }
    }

    pub fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let x = self.f64(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.invalid(key, "must be positive"))
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.str(key).parse().map_err(|e| self.invalid(key, e))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        self.str(key).parse().map_err(|e| self.invalid(key, e))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let s = self.str(key);
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| self.invalid(key, e)))
            .collect()
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        self.str(key)
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| self.invalid(key, e)))
            .collect()
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str]) -> Result<&'a str, ConfigError> {
        let v = self.str(key);
        options
            .iter()
            .find(|o| **o == v)
            .copied()
            .ok_or_else(|| self.invalid(key, format!("expected one of {}", options.join(", "))))
    }

    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}
