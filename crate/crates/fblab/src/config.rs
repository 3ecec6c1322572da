//! Experiment configuration: a single flat TOML file in which every key is
//! mandatory, so each artifact records the full provenance of its run.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// The four canonical experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ExactValidate,
    MonotonicityAudit,
    ThetaSweep,
    CurvatureSweep,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::ExactValidate => "exact-validate",
            Experiment::MonotonicityAudit => "monotonicity-audit",
            Experiment::ThetaSweep => "theta-sweep",
            Experiment::CurvatureSweep => "curvature-sweep",
        })
    }
}

/// Which fields an experiment evaluates: closed-form half-planes, solver
/// output, or both side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Exact,
    Solved,
    Both,
}

impl Source {
    pub fn includes_exact(self) -> bool {
        matches!(self, Source::Exact | Source::Both)
    }

    pub fn includes_solved(self) -> bool {
        matches!(self, Source::Solved | Source::Both)
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Exact => "exact",
            Source::Solved => "solved",
            Source::Both => "both",
        })
    }
}

/// Parsed experiment configuration; all keys mandatory, unknown keys
/// rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub half_width: f64,
    pub nodes_per_axis: usize,
    /// Contact angles, in radians.
    pub theta_list: Vec<f64>,
    /// Evaluation radii, strictly increasing.
    pub radii_list: Vec<f64>,
    /// Base-plane centers for profiles and density evaluations.
    pub centers: Vec<[f64; 2]>,
    /// Width of the regularizing cutoff ramp.
    pub cutoff_eps: f64,
    /// Margin parameter of the density smallness hypothesis check.
    pub eps_hat: f64,
    /// Iteration cap per solver continuation stage.
    pub max_iters: usize,
    /// Projected-gradient tolerance at unit slope; capillary solves scale it.
    pub grad_tol: f64,
    /// Relative tolerance recorded with density validation rows.
    pub density_tol: f64,
    /// Relative tolerance recorded with Weiss validation rows.
    pub weiss_tol: f64,
    /// Near band is `near_band_factor * tan(theta) * half_width`.
    pub near_band_factor: f64,
    /// Radius of the centered observation window for free-boundary and
    /// curvature statistics.
    pub window_radius: f64,
    pub source: Source,
}

impl ExperimentConfig {
    /// Reads and shape-checks a configuration file. All failures here are
    /// configuration errors (exit 2); grid-dependent numeric preconditions
    /// are checked later, when the run starts.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate_shape()?;
        Ok(config)
    }

    fn validate_shape(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.dim == 1 || self.dim == 2) {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if !self.half_width.is_finite() || self.half_width <= 0.0 {
            return bad(format!("half_width must be positive, got {}", self.half_width));
        }
        if self.nodes_per_axis < 8 {
            return bad(format!(
                "nodes_per_axis must be at least 8, got {}",
                self.nodes_per_axis
            ));
        }
        if self.theta_list.is_empty() {
            return bad("theta_list must not be empty".into());
        }
        for &theta in &self.theta_list {
            if !theta.is_finite() || theta <= 0.0 || theta >= PI {
                return bad(format!("theta_list entries must lie in (0, pi), got {theta}"));
            }
        }
        if self.radii_list.is_empty() {
            return bad("radii_list must not be empty".into());
        }
        for &r in &self.radii_list {
            if !r.is_finite() || r <= 0.0 {
                return bad(format!("radii_list entries must be positive, got {r}"));
            }
        }
        for pair in self.radii_list.windows(2) {
            if !(pair[1] > pair[0]) {
                return bad(format!(
                    "radii_list must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                ));
            }
        }
        if self.centers.is_empty() {
            return bad("centers must not be empty".into());
        }
        for c in &self.centers {
            if !c[0].is_finite() || !c[1].is_finite() {
                return bad(format!("centers entries must be finite, got ({}, {})", c[0], c[1]));
            }
        }
        if !self.cutoff_eps.is_finite() || self.cutoff_eps <= 0.0 || self.cutoff_eps >= 0.5 {
            return bad(format!(
                "cutoff_eps must lie in (0, 1/2), got {}",
                self.cutoff_eps
            ));
        }
        if !self.eps_hat.is_finite() || self.eps_hat <= 0.0 {
            return bad(format!("eps_hat must be positive, got {}", self.eps_hat));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        for (key, value) in [
            ("grad_tol", self.grad_tol),
            ("density_tol", self.density_tol),
            ("weiss_tol", self.weiss_tol),
            ("near_band_factor", self.near_band_factor),
            ("window_radius", self.window_radius),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return bad(format!("{key} must be positive, got {value}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    pub(crate) fn sample_toml() -> String {
        r#"
experiment = "exact-validate"
dim = 2
half_width = 1.0
nodes_per_axis = 64
theta_list = [0.1, 1.0471975511965976]
radii_list = [0.2, 0.4, 0.8]
centers = [[0.0, 0.0]]
cutoff_eps = 0.1
eps_hat = 0.05
max_iters = 20000
grad_tol = 0.001
density_tol = 0.01
weiss_tol = 0.015
near_band_factor = 0.35
window_radius = 0.5
source = "exact"
"#
        .to_string()
    }

    fn load_from(text: &str) -> Result<ExperimentConfig, CliError> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        ExperimentConfig::load(file.path())
    }

    #[test]
    fn well_formed_config_parses() {
        let config = load_from(&sample_toml()).unwrap();
        assert_eq!(config.experiment, Experiment::ExactValidate);
        assert_eq!(config.dim, 2);
        assert_eq!(config.nodes_per_axis, 64);
        assert_eq!(config.theta_list.len(), 2);
        assert_eq!(config.source, Source::Exact);
        assert!(config.source.includes_exact());
        assert!(!config.source.includes_solved());
    }

    #[test]
    fn malformed_configs_are_config_errors() {
        // Unknown key.
        let text = format!("{}\nmystery_knob = 3\n", sample_toml());
        assert!(matches!(load_from(&text), Err(CliError::Config(_))));

        // Missing key.
        let text = sample_toml().replace("eps_hat = 0.05\n", "");
        assert!(matches!(load_from(&text), Err(CliError::Config(_))));

        // Unknown experiment and source names.
        let text = sample_toml().replace("exact-validate", "frobnicate");
        assert!(matches!(load_from(&text), Err(CliError::Config(_))));
        let text = sample_toml().replace("source = \"exact\"", "source = \"guess\"");
        assert!(matches!(load_from(&text), Err(CliError::Config(_))));

        // Not TOML at all.
        assert!(matches!(load_from("]["), Err(CliError::Config(_))));
    }

    #[test]
    fn shape_violations_are_config_errors() {
        let cases = [
            ("theta_list = [0.1, 1.0471975511965976]", "theta_list = []"),
            ("theta_list = [0.1, 1.0471975511965976]", "theta_list = [4.0]"),
            ("radii_list = [0.2, 0.4, 0.8]", "radii_list = [0.4, 0.2]"),
            ("radii_list = [0.2, 0.4, 0.8]", "radii_list = [0.2, 0.2]"),
            ("centers = [[0.0, 0.0]]", "centers = []"),
            ("cutoff_eps = 0.1", "cutoff_eps = 0.5"),
            ("dim = 2", "dim = 3"),
            ("max_iters = 20000", "max_iters = 0"),
            ("grad_tol = 0.001", "grad_tol = -1.0"),
            ("window_radius = 0.5", "window_radius = 0.0"),
        ];
        for (from, to) in cases {
            let text = sample_toml().replace(from, to);
            assert!(
                matches!(load_from(&text), Err(CliError::Config(_))),
                "expected config error for {to}"
            );
        }
    }
}
