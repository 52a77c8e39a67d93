use serde::Serialize;

use super::config::Cell;

/// Outcome of one seeded trial. Fields an experiment does not measure stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    #[serde(rename = "R")]
    pub big_r: usize,
    pub trial_index: u64,
    pub seed: u64,
    pub success: Option<bool>,
    pub error_l1: Option<f64>,
    pub error_l2: Option<f64>,
    pub t_worst: Option<f64>,
    pub facet_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn new(experiment: &str, cell: Cell, trial_index: u64, seed: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            m: cell.m,
            n: cell.n(),
            r: cell.r,
            big_r: cell.big_r,
            trial_index,
            seed,
            success: None,
            error_l1: None,
            error_l2: None,
            t_worst: None,
            facet_count: None,
            runtime_ms: None,
            error: None,
        }
    }
}

/// One `metric = value` line of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub experiment: String,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    #[serde(rename = "R")]
    pub big_r: usize,
    pub trials: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<MetricRow>,
    pub records: Vec<TrialRecord>,
}

impl SummaryTable {
    pub fn push(&mut self, experiment: &str, cell: Cell, trials: usize, seed: u64, metric: &str, value: f64) {
        self.rows.push(MetricRow {
            experiment: experiment.to_owned(),
            m: cell.m,
            n: cell.n(),
            r: cell.r,
            big_r: cell.big_r,
            trials,
            seed,
            metric: metric.to_owned(),
            value,
        });
    }

    /// The value of `metric` in the cell `(m, r, R)`, if recorded.
    pub fn metric(&self, cell: Cell, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|row| row.m == cell.m && row.r == cell.r && row.big_r == cell.big_r && row.metric == metric)
            .map(|row| row.value)
    }

    pub fn records_in(&self, cell: Cell) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |t| t.m == cell.m && t.r == cell.r && t.big_r == cell.big_r)
    }
}
