use num_rational::Ratio;
use otmatch::RunLog;
use serde::Serialize;

/// One result line: a run of one algorithm on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub instance: String,
    pub algorithm: String,
    pub assigned: usize,
    pub rejected: usize,
    pub reassignments: usize,
    pub opt: usize,
    /// Exact `assigned/opt`, reduced.
    pub ratio: String,
    /// The same ratio with six decimals.
    pub ratio_decimal: String,
}

impl Report {
    pub fn from_log(instance: &str, log: &RunLog, opt: usize) -> Self {
        let (ratio, ratio_decimal) = ratio_fields(log.assigned_count, opt);
        Report {
            instance: instance.to_string(),
            algorithm: log.algorithm.clone(),
            assigned: log.assigned_count,
            rejected: log.rejected_count,
            reassignments: log.total_reassignments,
            opt,
            ratio,
            ratio_decimal,
        }
    }
}

/// Exact and decimal form of `assigned/opt`; "undefined" without jobs.
pub fn ratio_fields(assigned: usize, opt: usize) -> (String, String) {
    match reduced(assigned, opt) {
        Some(r) => (format!("{}/{}", r.numer(), r.denom()), format!("{:.6}", *r.numer() as f64 / *r.denom() as f64)),
        None => ("undefined".into(), "undefined".into()),
    }
}

pub fn reduced(assigned: usize, opt: usize) -> Option<Ratio<u64>> {
    (opt > 0).then(|| Ratio::new(assigned as u64, opt as u64))
}
