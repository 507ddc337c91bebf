use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// One measured quantity with the full parameter tuple that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub quantity: String,
    pub params: Map<String, Value>,
    pub measured: f64,
    pub reference: Option<f64>,
    pub std_error: Option<f64>,
    pub residual: Option<f64>,
    pub truncated: Option<usize>,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(experiment: &str, quantity: &str, params: Map<String, Value>, measured: f64) -> Self {
        ResultRecord {
            experiment: experiment.into(),
            quantity: quantity.into(),
            params,
            measured,
            reference: None,
            std_error: None,
            residual: None,
            truncated: None,
            wall_time_s: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

const HEADER: [&str; 9] =
    ["experiment", "quantity", "params", "measured", "reference", "std_error", "residual", "truncated", "wall_time_s"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV with a header row and the parameters as a JSON object column, or a
/// JSON array of records.
pub fn write_records<W: Write>(records: &[ResultRecord], format: Format, w: W) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, records).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(w).map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            let io = |e: csv::Error| CliError::Io(e.to_string());
            out.write_record(HEADER).map_err(io)?;
            for r in records {
                out.write_record([
                    r.experiment.clone(),
                    r.quantity.clone(),
                    Value::Object(r.params.clone()).to_string(),
                    r.measured.to_string(),
                    opt(r.reference),
                    opt(r.std_error),
                    opt(r.residual),
                    opt(r.truncated),
                    r.wall_time_s.to_string(),
                ])
                .map_err(io)?;
            }
            out.flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
