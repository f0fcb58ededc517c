use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::correlation::CorrelationMatrix;
use crate::coordinator::EvalRecord;
use crate::error::{Error, Result};
use crate::pareto::{ParetoArchive, Scored};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::Config(format!(
                "unknown export format `{s}` (csv or json)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub id: String,
    pub spec: String,
    pub cost: f64,
    pub accuracy: f64,
    /// Nondominated-sort rank, 0 on the front.
    pub rank: usize,
}

/// Every archived record with its rank, sorted by cost.
pub fn front_rows(archive: &ParetoArchive<EvalRecord>) -> Vec<FrontRow> {
    archive
        .ranked()
        .into_iter()
        .map(|(r, rank)| {
            let p = r.point();
            FrontRow {
                id: r.id.clone(),
                spec: r.payload.to_string(),
                cost: p.cost,
                accuracy: p.accuracy,
                rank,
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

pub fn export_front(
    archive: &ParetoArchive<EvalRecord>,
    format: ExportFormat,
    path: &Path,
) -> Result<()> {
    let rows = front_rows(archive);
    let mut out = create(path)?;
    match format {
        ExportFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut out);
            w.write_record(["id", "spec", "cost", "accuracy", "rank"])?;
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        ExportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Square CSV with the factor names as header row and first column;
/// undefined entries are left empty.
pub fn export_correlation<T: Float + std::fmt::Display>(
    m: &CorrelationMatrix<T>,
    path: &Path,
) -> Result<()> {
    let mut out = create(path)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec![String::new()];
        header.extend(m.names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in m.names.iter().zip(&m.values) {
            let mut line = vec![name.clone()];
            line.extend(
                row.iter()
                    .map(|v| v.map_or(String::new(), |x| x.to_string())),
            );
            w.write_record(&line)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
