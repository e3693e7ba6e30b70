//! Experiment configuration files.

use std::fmt;
use std::path::Path;

use netbell::chained::{optimal_settings_in, ChainedGameSpec};
use netbell::quantum::NoisyStateParams;
use netbell::{NetworkGraph, Plane};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, FieldError};

/// A graph given by name (`triangle`, `line3`, `cycle:5`, ...) or explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Named(String),
    Explicit(NetworkGraph),
}

impl GraphSpec {
    pub fn resolve(&self) -> netbell::Result<NetworkGraph> {
        match self {
            Self::Named(name) => name.parse(),
            Self::Explicit(g) => Ok(g.clone()),
        }
    }
}

/// Measurement angles (radians) for one edge, first endpoint `a`, second `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeAngles {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MonteCarlo {
    /// Trials per (edge, input pair); 0 selects exact mode.
    #[serde(default)]
    pub events_per_input: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub k: usize,
    #[serde(default)]
    pub plane: Plane,
    /// One source per graph edge, in edge order.
    pub states: Vec<NoisyStateParams<f64>>,
    /// Per-edge overrides of the optimal chained settings; `null` keeps them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<Option<EdgeAngles>>>,
    #[serde(default)]
    pub monte_carlo: MonteCarlo,
}

/// A configuration that passed validation, with everything resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub graph: NetworkGraph,
    pub k: usize,
    pub states: Vec<NoisyStateParams<f64>>,
    pub settings: Vec<ChainedGameSpec<f64>>,
    pub monte_carlo: MonteCarlo,
}

impl ExperimentConfig {
    /// Same white-noise visibility on every edge of `graph`.
    pub fn homogeneous(graph: &str, k: usize, v: f64) -> Self {
        let n_edges = graph.parse::<NetworkGraph>().map(|g| g.n_edges()).unwrap_or(0);
        Self {
            graph: GraphSpec::Named(graph.to_string()),
            k,
            plane: Plane::XZ,
            states: vec![NoisyStateParams { v, lambda: 0.0 }; n_edges],
            angles: None,
            monte_carlo: MonteCarlo::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<Experiment, CliError> {
        let mut errors = Vec::new();
        let mut push = |field: String, message: String| errors.push(FieldError { field, message });

        let graph = match self.graph.resolve() {
            Ok(g) => Some(g),
            Err(e) => {
                push("graph".into(), e.to_string());
                None
            }
        };
        if self.k < 2 {
            push("k".into(), format!("need at least 2 settings, got {}", self.k));
        }
        if let Some(g) = &graph {
            if self.states.len() != g.n_edges() {
                push(
                    "states".into(),
                    format!("graph has {} edges but {} states were given", g.n_edges(), self.states.len()),
                );
            }
        }
        for (i, s) in self.states.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.v) {
                push(format!("states[{i}].v"), format!("must lie in [0, 1], got {}", s.v));
            }
            if !(0.0..=1.0).contains(&s.lambda) {
                push(format!("states[{i}].lambda"), format!("must lie in [0, 1], got {}", s.lambda));
            }
        }
        if let Some(angles) = &self.angles {
            let n_edges = graph.as_ref().map_or(self.states.len(), NetworkGraph::n_edges);
            if angles.len() != n_edges {
                push("angles".into(), format!("{} entries for {n_edges} edges", angles.len()));
            }
            for (i, entry) in angles.iter().enumerate() {
                let Some(ea) = entry else { continue };
                for (party, list) in [("a", &ea.a), ("b", &ea.b)] {
                    if list.len() != self.k {
                        push(
                            format!("angles[{i}].{party}"),
                            format!("need {} angles, got {}", self.k, list.len()),
                        );
                    }
                    if list.iter().any(|x| !x.is_finite()) {
                        push(format!("angles[{i}].{party}"), "angles must be finite".into());
                    }
                }
            }
        }

        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        let graph = graph.expect("validated");
        let default = optimal_settings_in::<f64>(self.k, self.plane)?;
        let settings = (0..graph.n_edges())
            .map(|i| match self.angles.as_ref().and_then(|a| a[i].as_ref()) {
                Some(ea) => ChainedGameSpec::new(self.plane, ea.a.clone(), ea.b.clone()),
                None => Ok(default.clone()),
            })
            .collect::<netbell::Result<Vec<_>>>()?;
        Ok(Experiment {
            graph,
            k: self.k,
            states: self.states.clone(),
            settings,
            monte_carlo: self.monte_carlo,
        })
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_explicit_graphs_parse() {
        let named = r#"{"graph": "triangle", "k": 3, "states": [{"v": 1, "lambda": 0}, {"v": 1, "lambda": 0}, {"v": 1, "lambda": 0}]}"#;
        let exp = ExperimentConfig::from_json(named).unwrap().validate().unwrap();
        assert_eq!(exp.graph, NetworkGraph::triangle());
        let explicit = r#"{"graph": {"nodes": 3, "edges": [[0, 1], [1, 2]]}, "k": 2,
            "states": [{"v": 0.9, "lambda": 0.1}, {"v": 1, "lambda": 0}],
            "monte_carlo": {"events_per_input": 10, "seed": 4}}"#;
        let exp = ExperimentConfig::from_json(explicit).unwrap().validate().unwrap();
        assert_eq!(exp.graph, NetworkGraph::line3());
        assert_eq!(exp.monte_carlo.events_per_input, 10);
    }

    #[test]
    fn every_bad_field_is_reported() {
        let bad = r#"{"graph": "triangle", "k": 1,
            "states": [{"v": 1.5, "lambda": 0}, {"v": 1, "lambda": -0.1}],
            "angles": [null, {"a": [0, 1, 2], "b": [0, 1]}]}"#;
        let Err(CliError::Config(errs)) = ExperimentConfig::from_json(bad).unwrap().validate() else {
            panic!("expected field errors");
        };
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        for f in ["k", "states", "states[0].v", "states[1].lambda", "angles", "angles[1].a", "angles[1].b"] {
            assert!(fields.contains(&f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn unknown_graph_is_a_field_error() {
        let cfg = ExperimentConfig::homogeneous("pentagram", 2, 1.0);
        let Err(CliError::Config(errs)) = cfg.validate() else { panic!() };
        assert_eq!(errs[0].field, "graph");
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut cfg = ExperimentConfig::homogeneous("line3", 2, 0.9);
        cfg.angles = Some(vec![None, Some(EdgeAngles { a: vec![0.0, 1.0], b: vec![0.5, 2.0] })]);
        cfg.monte_carlo = MonteCarlo { events_per_input: 5, seed: u64::MAX };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        assert!(cfg.validate().is_ok());
    }
}
