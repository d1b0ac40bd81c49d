//! Bound report for a discrete learner read from JSON files.

use std::path::Path;

use genbound::avgjoint::{LearnerJson, LearnerSpec, LossTable};
use genbound::bounds::{discrete_report, BoundReport};
use genbound::measures::Metric;
use serde::de::DeserializeOwned;

use crate::error::{CliError, Result};

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_learner(path: &Path) -> Result<LearnerSpec> {
    let json: LearnerJson = read_json(path)?;
    LearnerSpec::try_from(json).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_loss(path: &Path) -> Result<LossTable> {
    read_json(path)
}

/// Every bound for the learner and loss in the given files. Bounds whose
/// preconditions fail are listed under `refusals`.
pub fn run_discrete(learner: &Path, loss: &Path) -> Result<BoundReport> {
    let learner = load_learner(learner)?;
    let loss = load_loss(loss)?;
    Ok(discrete_report(&learner, &loss, &[], &Metric::Indicator)?)
}
