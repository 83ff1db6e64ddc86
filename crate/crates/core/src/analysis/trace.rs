use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of a chain trace file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: u64,
    pub chain: u32,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub d: f64,
    pub loglik: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub kappa: f64,
}

/// Traced quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    K,
    D,
    Loglik,
    Gamma,
    Alpha,
    Kappa,
    /// `alpha + kappa`.
    Concentration,
}

impl TraceRow {
    pub fn get(&self, stat: Stat) -> f64 {
        match stat {
            Stat::K => self.k as f64,
            Stat::D => self.d,
            Stat::Loglik => self.loglik,
            Stat::Gamma => self.gamma,
            Stat::Alpha => self.alpha,
            Stat::Kappa => self.kappa,
            Stat::Concentration => self.alpha + self.kappa,
        }
    }
}

/// Per-iteration record of one chain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainTrace {
    pub chain: u32,
    pub rows: Vec<TraceRow>,
}

impl ChainTrace {
    pub fn new(chain: u32) -> Self {
        Self {
            chain,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends a row; iterations must increase.
    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.iteration <= last.iteration {
                return Err(Error::InvalidArgument(format!(
                    "trace iteration {} does not follow {}",
                    row.iteration, last.iteration
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn series(&self, stat: Stat) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(stat)).collect()
    }

    /// Rows after discarding the leading `burn_in` fraction, keeping every
    /// `thin`-th one.
    pub fn retained(&self, burn_in: f64, thin: usize) -> Vec<TraceRow> {
        let skip = (self.rows.len() as f64 * burn_in).floor() as usize;
        self.rows[skip.min(self.rows.len())..]
            .iter()
            .step_by(thin.max(1))
            .copied()
            .collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        for row in &self.rows {
            w.serialize(row).map_err(|e| csv_err(path, e))?;
        }
        if self.rows.is_empty() {
            w.write_record(["iteration", "chain", "K", "D", "loglik", "gamma", "alpha", "kappa"])
                .map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let mut out = Self::default();
        for (idx, row) in r.deserialize::<TraceRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 2,
                message: e.to_string(),
            })?;
            out.chain = row.chain;
            out.push(row)?;
        }
        Ok(out)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    }
}
