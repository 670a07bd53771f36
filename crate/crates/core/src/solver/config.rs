use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the augmented-Lagrangian solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Tolerance on both feasibility and projected stationarity (∞-norms).
    pub outer_tol: f64,
    /// The inner solve stops at `inner_tol_factor · max(‖c‖∞, outer_tol)`.
    pub inner_tol_factor: f64,
    pub rho0: f64,
    pub rho_growth: f64,
    /// The penalty grows unless `‖c‖∞` shrinks by at least this factor.
    pub feas_improvement: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub ls_armijo_c: f64,
    pub ls_backtrack: f64,
    pub levenberg_min: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-6,
            inner_tol_factor: 0.1,
            rho0: 10.0,
            rho_growth: 10.0,
            feas_improvement: 0.25,
            max_outer: 50,
            max_inner: 200,
            ls_armijo_c: 1e-4,
            ls_backtrack: 0.5,
            levenberg_min: 1e-10,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Invalid(format!("config key '{key}': {e}")))
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("outer_tol", self.outer_tol),
            ("inner_tol_factor", self.inner_tol_factor),
            ("rho0", self.rho0),
            ("rho_growth", self.rho_growth),
            ("ls_armijo_c", self.ls_armijo_c),
            ("levenberg_min", self.levenberg_min),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{k} must be positive, got {v}")));
            }
        }
        for (k, v) in [
            ("feas_improvement", self.feas_improvement),
            ("ls_backtrack", self.ls_backtrack),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Invalid(format!("{k} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Invalid("iteration limits must be positive".into()));
        }
        Ok(())
    }

    /// Overrides one field by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "outer_tol" => self.outer_tol = parse(key, value)?,
            "inner_tol_factor" => self.inner_tol_factor = parse(key, value)?,
            "rho0" => self.rho0 = parse(key, value)?,
            "rho_growth" => self.rho_growth = parse(key, value)?,
            "feas_improvement" => self.feas_improvement = parse(key, value)?,
            "max_outer" => self.max_outer = parse(key, value)?,
            "max_inner" => self.max_inner = parse(key, value)?,
            "ls_armijo_c" => self.ls_armijo_c = parse(key, value)?,
            "ls_backtrack" => self.ls_backtrack = parse(key, value)?,
            "levenberg_min" => self.levenberg_min = parse(key, value)?,
            _ => return Err(Error::Invalid(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Reads flat `key = value` lines over the defaults. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Invalid(format!("config line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_key_value_text() {
        let cfg =
            SolverConfig::from_kv_str("# tighter\nouter_tol = 1e-8\n\nmax_outer=80\n").unwrap();
        assert_eq!(cfg.outer_tol, 1e-8);
        assert_eq!(cfg.max_outer, 80);
        assert_eq!(cfg.rho0, 10.0);
        assert!(SolverConfig::from_kv_str("bogus = 1").is_err());
        assert!(SolverConfig::from_kv_str("rho0").is_err());
        assert!(SolverConfig::from_kv_str("ls_backtrack = 1.5").is_err());
        assert!(SolverConfig::from_kv_str("rho0 = -1").is_err());
    }
}
