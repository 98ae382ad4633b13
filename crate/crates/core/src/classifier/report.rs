use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HopfVerdict, Label, PointReport, Thresholds};
use crate::error::{FsmError, Result};

/// One CSV row of a classification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub x: f64,
    pub label: String,
    pub hopf_verdict: String,
    pub hopf_ratio: f64,
    pub cf_residual: f64,
    pub period_c: Option<f64>,
    pub period_g: Option<f64>,
    pub period_b: Option<f64>,
    pub period_d: Option<f64>,
    pub period_residual: Option<f64>,
    pub limit_fixed: bool,
    pub warnings: String,
}

impl From<&PointReport> for ReportRow {
    fn from(p: &PointReport) -> Self {
        let w = p.witness;
        ReportRow {
            x: p.x,
            label: p.label.as_str().to_string(),
            hopf_verdict: p.hopf.verdict.as_str().to_string(),
            hopf_ratio: p.hopf.ratio,
            cf_residual: p.fixed.residual,
            period_c: w.map(|c| c.c),
            period_g: w.map(|c| c.g),
            period_b: w.map(|c| c.b),
            period_d: w.map(|c| c.d),
            period_residual: p.best_period.map(|c| c.residual),
            limit_fixed: p.limit_fixed,
            warnings: p.warnings.join("; "),
        }
    }
}

/// Inclusion diagnostics for fixed ⊆ witness ⊆ Hopf-divergent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Containment {
    pub fixed_without_witness: usize,
    pub witness_not_divergent: usize,
    pub contradictions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kernel: String,
    pub nodes: usize,
    pub thresholds: Thresholds,
    pub fractions: BTreeMap<String, f64>,
    pub hopf: BTreeMap<String, f64>,
    pub limit_fixed: usize,
    pub containment: Containment,
    pub nodes_with_warnings: usize,
    pub config: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub kernel: String,
    pub thresholds: Thresholds,
    /// Effective configuration, echoed as `# key = value` header lines.
    pub config: Vec<(String, String)>,
    pub points: Vec<PointReport>,
}

impl ClassificationReport {
    pub fn labels(&self) -> Vec<(f64, Label)> {
        self.points.iter().map(|p| (p.x, p.label)).collect()
    }

    pub fn fraction(&self, label: Label) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|p| p.label == label).count() as f64 / self.points.len() as f64
    }

    pub fn containment(&self) -> Containment {
        let mut c = Containment::default();
        for p in &self.points {
            if p.label == Label::Fixed && p.witness.is_none() {
                c.fixed_without_witness += 1;
            }
            if p.witness.is_some() && p.hopf.verdict != HopfVerdict::Divergent {
                c.witness_not_divergent += 1;
            }
        }
        c.contradictions = c.fixed_without_witness + c.witness_not_divergent;
        c
    }

    pub fn has_warnings(&self) -> bool {
        self.points.iter().any(|p| !p.warnings.is_empty())
    }

    pub fn summary(&self) -> Summary {
        let n = self.points.len().max(1) as f64;
        let fractions = Label::ALL
            .iter()
            .map(|l| (l.as_str().to_string(), self.fraction(*l)))
            .collect();
        let hopf = [
            HopfVerdict::Finite,
            HopfVerdict::Divergent,
            HopfVerdict::Indeterminate,
        ]
        .iter()
        .map(|v| {
            (
                v.as_str().to_string(),
                self.points.iter().filter(|p| p.hopf.verdict == *v).count() as f64 / n,
            )
        })
        .collect();
        Summary {
            kernel: self.kernel.clone(),
            nodes: self.points.len(),
            thresholds: self.thresholds,
            fractions,
            hopf,
            limit_fixed: self.points.iter().filter(|p| p.limit_fixed).count(),
            containment: self.containment(),
            nodes_with_warnings: self
                .points
                .iter()
                .filter(|p| !p.warnings.is_empty())
                .count(),
            config: self.config.iter().cloned().collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.config {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(ReportRow::from(p))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_files(&self, csv_path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(csv_path)?))?;
        let json = serde_json::to_string_pretty(&self.summary())?;
        std::fs::write(summary_path(csv_path), json + "\n")?;
        Ok(())
    }

    /// Read a report written by [`write_csv`]: the header configuration and the rows.
    pub fn read_csv(path: &Path) -> Result<(Vec<(String, String)>, Vec<ReportRow>)> {
        let file = std::fs::File::open(path)?;
        let mut config = Vec::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line?;
            let Some(rest) = line.strip_prefix('#') else {
                break;
            };
            if let Some((k, v)) = rest.split_once('=') {
                config.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut rows = Vec::new();
        for (i, row) in r.deserialize().enumerate() {
            let row: ReportRow = row?;
            if Label::parse(&row.label).is_none() {
                return Err(FsmError::Parse {
                    line: i + 2,
                    message: format!("unknown label '{}'", row.label),
                });
            }
            rows.push(row);
        }
        Ok((config, rows))
    }
}

/// `report.csv` → `report.summary.json`.
pub fn summary_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("summary.json")
}
