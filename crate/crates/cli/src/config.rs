//! Flat `key = value` suite configuration with environment and flag overrides.

use std::path::PathBuf;

use derham::QuadratureSpec;
use serde::Serialize;

use crate::error::CliError;

/// Check groups understood by [`crate::suite::run_suite`].
pub const GROUPS: [&str; 7] = ["algebra", "harmonics", "kernels", "potentials", "spaces", "aniso", "cohomology"];

/// Keys accepted in a config file; `DERHAM_<KEY>` (upper case) overrides each.
pub const KEYS: [&str; 19] = [
    "suite", "n", "q", "m", "delta", "lambda", "mu", "T", "R", "eps", "tol", "panels", "order", "angular", "workers",
    "grid_level", "seed", "checks", "out",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite_id: String,
    pub ns: Vec<usize>,
    pub qs: Vec<usize>,
    pub ms: Vec<u32>,
    pub deltas: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub t_max: f64,
    pub spec: QuadratureSpec,
    pub grid_level: u32,
    pub seed: u64,
    /// `None` runs every group; `Some(vec![])` runs nothing.
    pub checks: Option<Vec<String>>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    /// The n = 3 smoke suite.
    fn default() -> Self {
        SuiteConfig {
            suite_id: "smoke-n3".into(),
            ns: vec![3],
            qs: vec![0, 1],
            ms: vec![0, 1],
            deltas: vec![1.5, 2.5],
            lambda: 0.5,
            mu: 0.25,
            t_max: 1.0,
            spec: QuadratureSpec::default(),
            grid_level: 1,
            seed: 2024,
            checks: None,
            out: None,
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::BadValue { key: key.into(), value: v.into() }))
        .collect()
}

fn one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::BadValue { key: key.into(), value: v.into() })
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(CliError::Malformed { line: i + 1, text: raw.into() })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl SuiteConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "suite" => self.suite_id = value.trim().to_string(),
            "n" => self.ns = list(key, value)?,
            "q" => self.qs = list(key, value)?,
            "m" => self.ms = list(key, value)?,
            "delta" => self.deltas = list(key, value)?,
            "lambda" => self.lambda = one(key, value)?,
            "mu" => self.mu = one(key, value)?,
            "T" => self.t_max = one(key, value)?,
            "R" => self.spec.radius = one(key, value)?,
            "eps" => self.spec.shell = one(key, value)?,
            "tol" => self.spec.tol = one(key, value)?,
            "panels" => self.spec.panels = one(key, value)?,
            "order" => self.spec.order = one(key, value)?,
            "angular" => self.spec.angular = one(key, value)?,
            "workers" => self.spec.workers = one(key, value)?,
            "grid_level" => self.grid_level = one(key, value)?,
            "seed" => self.seed = one(key, value)?,
            "checks" => self.checks = Some(list(key, value)?),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(CliError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        pairs.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Defaults, then the file, then `DERHAM_*` variables, then explicit overrides.
    pub fn load(
        file: Option<&str>,
        env: impl IntoIterator<Item = (String, String)>,
        overrides: &[(String, String)],
    ) -> Result<Self, CliError> {
        let mut c = SuiteConfig::default();
        if let Some(text) = file {
            c.apply(&parse_kv(text)?)?;
        }
        let env: Vec<(String, String)> = env
            .into_iter()
            .filter_map(|(k, v)| {
                let key = k.strip_prefix("DERHAM_")?;
                KEYS.iter().find(|c| c.eq_ignore_ascii_case(key)).map(|c| (c.to_string(), v))
            })
            .collect();
        c.apply(&env)?;
        c.apply(overrides)?;
        Ok(c)
    }

    /// Every problem with the configuration, collected before anything runs.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        if self.ns.is_empty() {
            errs.push("n: at least one dimension required".to_string());
        }
        for &n in &self.ns {
            if !(2..=5).contains(&n) {
                errs.push(format!("n = {n}: supported dimensions are 2..=5"));
            }
            for &q in &self.qs {
                if q >= n {
                    errs.push(format!("q = {q}: must be below n = {n}"));
                }
            }
        }
        for &m in &self.ms {
            if m > 3 {
                errs.push(format!("m = {m}: at most 3"));
            }
        }
        for &d in &self.deltas {
            if !d.is_finite() {
                errs.push(format!("delta = {d}: must be finite"));
            }
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            errs.push(format!("lambda = {}: must lie in (0, 1]", self.lambda));
        }
        if !(self.mu >= 0.0 && self.mu <= self.lambda / 2.0) {
            errs.push(format!("mu = {}: must lie in [0, lambda/2]", self.mu));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            errs.push(format!("T = {}: must be positive", self.t_max));
        }
        if self.grid_level > 4 {
            errs.push(format!("grid_level = {}: at most 4", self.grid_level));
        }
        if let Err(e) = self.spec.validate() {
            errs.push(e.to_string());
        }
        for c in self.checks.iter().flatten() {
            if !GROUPS.contains(&c.as_str()) {
                errs.push(format!("checks: unknown group {c:?} (known: {})", GROUPS.join(", ")));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(errs))
        }
    }

    pub fn runs(&self, group: &str) -> bool {
        self.checks.as_ref().is_none_or(|c| c.iter().any(|g| g == group))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_env_override_precedence() {
        let text = "# comment\nn = 2, 3\ndelta = 2.5\nT = 2\n\nchecks = algebra,kernels\n";
        let env = vec![("DERHAM_DELTA".to_string(), "1.5".to_string()), ("HOME".into(), "/".into())];
        let c = SuiteConfig::load(Some(text), env, &[("T".into(), "3".into())]).unwrap();
        assert_eq!(c.ns, vec![2, 3]);
        assert_eq!(c.deltas, vec![1.5]);
        assert_eq!(c.t_max, 3.0);
        assert_eq!(c.checks, Some(vec!["algebra".to_string(), "kernels".to_string()]));
        assert!(c.runs("algebra") && !c.runs("cohomology"));
    }

    #[test]
    fn empty_check_list() {
        let c = SuiteConfig::load(Some("checks ="), Vec::new(), &[]).unwrap();
        assert_eq!(c.checks, Some(vec![]));
        assert!(!c.runs("algebra"));
    }

    #[test]
    fn errors_enumerated() {
        let c = SuiteConfig::load(Some("n = 7\nlambda = 2\nmu = 5\nchecks = nope"), Vec::new(), &[]).unwrap();
        match c.validate() {
            Err(CliError::Validation(e)) => assert!(e.len() >= 4, "{e:?}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_kv("n 3"), Err(CliError::Malformed { line: 1, .. })));
        assert!(matches!(SuiteConfig::load(Some("colour = red"), Vec::new(), &[]), Err(CliError::UnknownKey(_))));
        assert!(matches!(SuiteConfig::load(Some("n = x"), Vec::new(), &[]), Err(CliError::BadValue { .. })));
    }
}
