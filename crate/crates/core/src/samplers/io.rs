//! Sample files: one `#`-prefixed JSON header line, then one comma-separated
//! row of sorted positions per retained configuration.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metropolis::ChainSchedule;
use crate::error::{Error, Result};
use crate::model::ensemble::Configuration;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub n: usize,
    pub beta: f64,
    pub field: String,
    pub interaction: String,
    /// `metropolis`, `mala` or `tridiagonal`.
    pub sampler: String,
    pub seed: u64,
    #[serde(default)]
    pub schedule: Option<ChainSchedule>,
    #[serde(default)]
    pub step_size: Option<f64>,
    #[serde(default)]
    pub acceptance_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub header: SampleHeader,
    pub samples: Vec<Configuration>,
}

impl SampleSet {
    pub fn new(header: SampleHeader, samples: Vec<Configuration>) -> Self {
        Self { header, samples }
    }

    /// Concatenate sets drawn from the same ensemble, in the given order.
    pub fn merge(sets: &[SampleSet]) -> Result<SampleSet> {
        let first = sets.first().ok_or_else(|| Error::InvalidInput("nothing to merge".into()))?;
        let mut samples = Vec::new();
        for s in sets {
            if s.header.n != first.header.n || s.header.beta != first.header.beta {
                return Err(Error::Incompatible("sample sets differ in N or beta".into()));
            }
            samples.extend(s.samples.iter().cloned());
        }
        Ok(SampleSet::new(first.header.clone(), samples))
    }
}

pub fn write_samples(path: &Path, set: &SampleSet) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# {}", serde_json::to_string(&set.header)?)?;
    let mut line = String::new();
    for c in &set.samples {
        line.clear();
        for (i, x) in c.clone().sorted().positions.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{x}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    let file = fs::File::open(path)
        .map_err(|e| Error::MissingArtifact(format!("{}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("{}: empty sample file", path.display())))??;
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::InvalidInput(format!("{}: missing header line", path.display())))?;
    let header: SampleHeader = serde_json::from_str(json)?;
    let mut samples = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let positions = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("{}: row {}: {e}", path.display(), row + 2)))?;
        if positions.len() != header.n {
            return Err(Error::InvalidInput(format!(
                "{}: row {} has {} positions, expected {}",
                path.display(),
                row + 2,
                positions.len(),
                header.n
            )));
        }
        samples.push(Configuration::new(positions).sorted());
    }
    Ok(SampleSet::new(header, samples))
}
