//! Transcribed experimental values, loaded from `data/table1.json`.
//!
//! These numbers are reference data only. No computation in this crate takes
//! them as inputs except the explicit consistency checks of `reproduce` and
//! the default observations of `fit`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const RAW: &str = include_str!("../data/table1.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub k: usize,
    pub bound: i64,
    pub svet: f64,
    pub svet_error: f64,
    pub ratio: f64,
    pub ratio_error: f64,
    pub quoted_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshObservation {
    pub edge: [usize; 2],
    pub score: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineVisibility {
    pub graph: String,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcribed {
    pub experiment: Vec<ExperimentRow>,
    pub chsh: Vec<ChshObservation>,
    pub headline_visibilities: Vec<HeadlineVisibility>,
}

pub fn transcribed() -> &'static Transcribed {
    static DATA: OnceLock<Transcribed> = OnceLock::new();
    DATA.get_or_init(|| serde_json::from_str(RAW).expect("embedded reference data is valid JSON"))
}

#[cfg(test)]
mod tests {
    #[test]
    fn data_file_loads() {
        let t = super::transcribed();
        assert_eq!(t.experiment.len(), 4);
        assert_eq!(t.chsh.len(), 3);
        assert_eq!(t.headline_visibilities.len(), 4);
    }
}
