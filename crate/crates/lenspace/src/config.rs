//! Experiment configuration: JSON files with flat flag and environment
//! overrides (flag > env > file > default), strict about unknown keys, with
//! diagnostics naming the offending key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::WeightSpec;
use crate::geom::Rect;
use crate::solver::StencilOrder;
use crate::tolerances as tols;

/// Environment override prefix: `LENSPACE_H`, `LENSPACE_STENCIL`,
/// `LENSPACE_TOL`, `LENSPACE_SEED`, `LENSPACE_OUT_DIR`, `LENSPACE_THREADS`.
pub const ENV_PREFIX: &str = "LENSPACE_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Distance,
    Geodesic,
    Membership,
    Counterexample,
    Gamma,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Distance => "distance",
            Command::Geodesic => "geodesic",
            Command::Membership => "membership",
            Command::Counterexample => "counterexample",
            Command::Gamma => "gamma",
        }
    }
}

/// How a convergence experiment builds its metric family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaSequence {
    /// Constant family: every entry is the configured weight's solver.
    Constant,
    /// The collapsing-strip profile family over `n_values`.
    Profile,
}

/// The claimed limit a convergence experiment checks against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaLimit {
    /// The configured weight's own solver (degenerate baseline).
    SelfLimit,
    /// Twice the Euclidean distance.
    DoubleEuclid,
    /// The finest resolved profile solver, standing in for the family limit.
    Proxy,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub command: Option<Command>,
    /// Open rectangle `[x1_lo, x1_hi, x2_lo, x2_hi]`.
    #[serde(default = "default_domain")]
    pub domain: [f64; 4],
    #[serde(default = "default_weight")]
    pub weight: WeightSpec,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default = "default_stencil")]
    pub stencil: u32,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_threads")]
    pub threads: usize,
    /// Emit SVG plots next to the reports (never load-bearing).
    #[serde(default = "default_plots")]
    pub plots: bool,
    /// Profile indices for the counterexample and gamma commands.
    #[serde(default)]
    pub n_values: Option<Vec<u32>>,
    /// Query points for the distance and geodesic commands.
    #[serde(default)]
    pub x: Option<[f64; 2]>,
    #[serde(default)]
    pub y: Option<[f64; 2]>,
    /// Sandwich constant for the membership command.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub pair_samples: Option<usize>,
    #[serde(default)]
    pub sequence: Option<GammaSequence>,
    #[serde(default)]
    pub limit: Option<GammaLimit>,
}

fn default_domain() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}

fn default_weight() -> WeightSpec {
    WeightSpec::constant(1.0)
}

fn default_stencil() -> u32 {
    2
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("lenspace-out")
}

fn default_threads() -> usize {
    1
}

fn default_plots() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            domain: default_domain(),
            weight: default_weight(),
            h: None,
            stencil: default_stencil(),
            tol: None,
            seed: 0,
            out_dir: default_out_dir(),
            threads: default_threads(),
            plots: default_plots(),
            n_values: None,
            x: None,
            y: None,
            alpha: None,
            pair_samples: None,
            sequence: None,
            limit: None,
        }
    }
}

/// Flat flag overrides; a set field wins over environment and file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub h: Option<f64>,
    pub stencil: Option<u32>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
    }

    /// Grid step: per-command default when the config does not pin one. The
    /// counterexample experiment defaults to the fine production grid; the
    /// interactive commands to a desk-scale grid.
    pub fn effective_h(&self) -> f64 {
        self.h.unwrap_or(match self.command {
            Some(Command::Counterexample) => tols::COUNTEREXAMPLE_H,
            _ => 1.0 / 256.0,
        })
    }

    /// Verdict tolerance: per-command default when not pinned.
    pub fn effective_tol(&self) -> f64 {
        self.tol.unwrap_or(match self.command {
            Some(Command::Membership) => tols::MEMBERSHIP_REL_TOL,
            Some(Command::Gamma) => 1e-6,
            _ => tols::COUNTEREXAMPLE_BOUND_SLACK,
        })
    }

    pub fn effective_n_values(&self) -> Vec<u32> {
        self.n_values
            .clone()
            .unwrap_or_else(|| tols::COUNTEREXAMPLE_N_VALUES.to_vec())
    }

    pub fn domain_rect(&self) -> Result<Rect> {
        Rect::new(self.domain[0], self.domain[1], self.domain[2], self.domain[3])
            .map_err(|e| Error::config("domain", e.to_string()))
    }

    pub fn stencil_order(&self) -> Result<StencilOrder> {
        StencilOrder::from_order(self.stencil)
            .ok_or_else(|| Error::config("stencil", format!("must be 1 or 2, got {}", self.stencil)))
    }

    /// Apply environment overrides through an injectable lookup (tests pass a
    /// closure; the CLI passes `std::env::var`).
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
            raw.parse::<T>()
                .map_err(|_| Error::config(key, format!("cannot parse {raw:?}")))
        }
        if let Some(raw) = lookup("LENSPACE_H") {
            self.h = Some(parse("LENSPACE_H", &raw)?);
        }
        if let Some(raw) = lookup("LENSPACE_STENCIL") {
            self.stencil = parse("LENSPACE_STENCIL", &raw)?;
        }
        if let Some(raw) = lookup("LENSPACE_TOL") {
            self.tol = Some(parse("LENSPACE_TOL", &raw)?);
        }
        if let Some(raw) = lookup("LENSPACE_SEED") {
            self.seed = parse("LENSPACE_SEED", &raw)?;
        }
        if let Some(raw) = lookup("LENSPACE_OUT_DIR") {
            self.out_dir = PathBuf::from(raw);
        }
        if let Some(raw) = lookup("LENSPACE_THREADS") {
            self.threads = parse("LENSPACE_THREADS", &raw)?;
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(h) = o.h {
            self.h = Some(h);
        }
        if let Some(s) = o.stencil {
            self.stencil = s;
        }
        if let Some(t) = o.tol {
            self.tol = Some(t);
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(ref d) = o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(t) = o.threads {
            self.threads = t;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.command.is_none() {
            return Err(Error::config("command", "missing (set a subcommand or a config key)"));
        }
        self.domain_rect()?;
        self.stencil_order()?;
        if let Some(h) = self.h {
            if h <= 0.0 || !h.is_finite() {
                return Err(Error::config("h", format!("must be positive, got {h}")));
            }
        }
        if let Some(t) = self.tol {
            if t <= 0.0 || !t.is_finite() {
                return Err(Error::config("tol", format!("must be positive, got {t}")));
            }
        }
        if self.threads < 1 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        if let Some(a) = self.alpha {
            if a <= 1.0 || a.is_nan() {
                return Err(Error::config("alpha", format!("must exceed 1, got {a}")));
            }
        }
        if let Some(ns) = &self.n_values {
            if ns.is_empty() {
                return Err(Error::config("n_values", "must be nonempty"));
            }
            if ns.iter().any(|&n| n < 2) {
                return Err(Error::config("n_values", "profile indices start at 2"));
            }
        }
        if matches!(self.command, Some(Command::Distance | Command::Geodesic))
            && (self.x.is_none() || self.y.is_none())
        {
            return Err(Error::config("x/y", "distance and geodesic need both query points"));
        }
        Ok(())
    }
}

/// Assemble the effective config: file (or defaults), then the subcommand,
/// then environment, then flags; validated last.
pub fn parse_config(
    path: Option<&Path>,
    command: Option<Command>,
    env: impl Fn(&str) -> Option<String>,
    overrides: &Overrides,
) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(cmd) = command {
        cfg.command = Some(cmd);
    }
    cfg.apply_env(env)?;
    cfg.apply_overrides(overrides);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn minimal_counterexample_config_uses_documented_defaults() {
        let cfg = parse_config(None, Some(Command::Counterexample), no_env, &Overrides::default())
            .unwrap();
        assert_eq!(cfg.command, Some(Command::Counterexample));
        assert_eq!(cfg.effective_h(), 2f64.powi(-12));
        assert_eq!(cfg.effective_n_values(), vec![2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(cfg.stencil, 2);
    }

    #[test]
    fn missing_command_is_rejected() {
        let err = parse_config(None, None, no_env, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("command"), "{err}");
    }

    #[test]
    fn negative_h_is_rejected_naming_the_key() {
        let o = Overrides { h: Some(-0.5), ..Default::default() };
        let err = parse_config(None, Some(Command::Counterexample), no_env, &o).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("h"), "{msg}");
        assert!(msg.contains("positive"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"command": "distance", "not_a_key": 1}"#).unwrap();
        let err = parse_config(Some(&path), None, no_env, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("not_a_key"), "{err}");
    }

    #[test]
    fn flag_wins_over_env_wins_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"command": "counterexample", "h": 0.25, "seed": 7}"#).unwrap();
        let env = |key: &str| (key == "LENSPACE_H").then(|| "0.125".to_string());
        // env only
        let cfg = parse_config(Some(&path), None, env, &Overrides::default()).unwrap();
        assert_eq!(cfg.h, Some(0.125));
        assert_eq!(cfg.seed, 7);
        // flag beats env
        let o = Overrides { h: Some(0.0625), ..Default::default() };
        let cfg = parse_config(Some(&path), None, env, &o).unwrap();
        assert_eq!(cfg.h, Some(0.0625));
    }

    #[test]
    fn weight_spec_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"command": "membership", "weight": {"kind": "profile", "n": 4}, "alpha": 2.0}"#,
        )
        .unwrap();
        let cfg = parse_config(Some(&path), None, no_env, &Overrides::default()).unwrap();
        assert_eq!(cfg.weight, WeightSpec::profile(4));
        assert_eq!(cfg.alpha, Some(2.0));
    }
}
