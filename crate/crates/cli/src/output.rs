use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::commands::Report;
use crate::{Cli, Format, Outcome};

/// One CSV line. Columns: quantity,eps,value,model_prediction,error_estimate;
/// absent entries are empty.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub quantity: String,
    pub eps: Option<f64>,
    pub value: f64,
    pub model_prediction: Option<f64>,
    pub error_estimate: Option<f64>,
}

impl Row {
    pub fn scalar(quantity: &str, value: f64, error_estimate: Option<f64>) -> Self {
        Self {
            quantity: quantity.into(),
            eps: None,
            value,
            model_prediction: None,
            error_estimate,
        }
    }
}

pub fn render(format: Format, report: &Report) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if report.rows.is_empty() {
                w.write_record([
                    "quantity",
                    "eps",
                    "value",
                    "model_prediction",
                    "error_estimate",
                ])?;
            }
            for r in &report.rows {
                w.serialize(r)?;
            }
            Ok(String::from_utf8(w.into_inner().context("flushing csv")?)?)
        }
    }
}

/// Prints the document and writes it to `--output` or the output directory.
pub fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    print!("{}", outcome.body);
    let ext = match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let path = match (&cli.output, &cli.output_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            dir.join(format!("{}.{ext}", cli.command.name()))
        }
        (None, None) => return Ok(()),
    };
    fs::write(&path, &outcome.body).with_context(|| format!("writing {}", path.display()))
}
