use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid, FsmError, Result};
use crate::grid::GridSpec;
use crate::kernels::KernelSpec;
use crate::stable::{cf_exponent, LinearCombination};

const MAGIC: &[u8; 4] = b"FSM1";

/// Simulated values, `n_paths × times.len()` in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    pub kernel: String,
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub grid: Option<GridSpec>,
    /// CF exponent of each `X(t_k)` under the discretized measure.
    pub discretized_exponents: Vec<f64>,
    pub cells: usize,
}

/// Target characteristic function of `X(t)`: `exp(-cf_exponent)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CfTarget {
    pub t: f64,
    pub cf_exponent: f64,
    pub quadrature_error: f64,
    pub discretized_exponent: f64,
}

impl PathEnsemble {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn value(&self, path: usize, k: usize) -> f64 {
        self.values[path * self.times.len() + k]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.value(p, k)).collect()
    }

    /// Index of the time closest to `t` within `1e-9`.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    /// `Σ_k θ_k X(t_k)` for every path.
    pub fn combine(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.n_paths)
            .map(|p| {
                theta
                    .iter()
                    .enumerate()
                    .map(|(k, th)| th * self.value(p, k))
                    .sum()
            })
            .collect()
    }

    /// Quadrature CF exponents of each `X(t_k)` on the ensemble's grid.
    pub fn cf_targets(&self, kernel: &KernelSpec) -> Result<Vec<CfTarget>> {
        let Some(grid) = &self.grid else {
            return invalid("ensemble carries no grid");
        };
        self.times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let (v, e) = if t == 0.0 {
                    (0.0, 0.0)
                } else {
                    let q = cf_exponent(kernel, &LinearCombination::single(1.0, t), grid)?;
                    (q.value, q.error)
                };
                Ok(CfTarget {
                    t,
                    cf_exponent: v,
                    quadrature_error: e,
                    discretized_exponent: self
                        .discretized_exponents
                        .get(k)
                        .copied()
                        .unwrap_or(f64::NAN),
                })
            })
            .collect()
    }

    /// Times as the header row, then one row per path.
    pub fn write_csv<W: Write>(&self, mut out: W, config: &[(String, String)]) -> Result<()> {
        for (k, v) in config {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.times.iter().map(|t| t.to_string()))?;
        for p in 0..self.n_paths {
            w.write_record((0..self.n_times()).map(|k| self.value(p, k).to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<PathEnsemble> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(false)
            .from_path(path)?;
        let mut rows = r.records();
        let parse = |s: &str, line: usize| {
            s.trim().parse::<f64>().map_err(|e| FsmError::Parse {
                line,
                message: format!("'{s}': {e}"),
            })
        };
        let header = rows.next().ok_or_else(|| FsmError::Parse {
            line: 1,
            message: "missing times row".into(),
        })??;
        let times: Vec<f64> = header.iter().map(|s| parse(s, 1)).collect::<Result<_>>()?;
        let mut values = Vec::new();
        let mut n_paths = 0;
        for (i, rec) in rows.enumerate() {
            let rec = rec?;
            if rec.len() != times.len() {
                return Err(FsmError::Parse {
                    line: i + 2,
                    message: format!("expected {} values", times.len()),
                });
            }
            for s in rec.iter() {
                values.push(parse(s, i + 2)?);
            }
            n_paths += 1;
        }
        Ok(PathEnsemble {
            kernel: String::new(),
            times,
            n_paths,
            values,
            seed: 0,
            grid: None,
            discretized_exponents: Vec::new(),
            cells: 0,
        })
    }

    /// `FSM1`, then little-endian `u64` path count, time count and seed, the times, and the
    /// values column by column, all as `f64`.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        for v in [self.n_paths as u64, self.n_times() as u64, self.seed] {
            out.write_all(&v.to_le_bytes())?;
        }
        for t in &self.times {
            out.write_all(&t.to_le_bytes())?;
        }
        for k in 0..self.n_times() {
            for p in 0..self.n_paths {
                out.write_all(&self.value(p, k).to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<PathEnsemble> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(FsmError::Parse {
                line: 0,
                message: "not an FSM1 file".into(),
            });
        }
        let mut word = [0u8; 8];
        let mut next = |input: &mut R| -> Result<[u8; 8]> {
            input.read_exact(&mut word)?;
            Ok(word)
        };
        let n_paths = u64::from_le_bytes(next(&mut input)?) as usize;
        let n_times = u64::from_le_bytes(next(&mut input)?) as usize;
        let seed = u64::from_le_bytes(next(&mut input)?);
        let times = (0..n_times)
            .map(|_| Ok(f64::from_le_bytes(next(&mut input)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut values = vec![0.0; n_paths * n_times];
        for k in 0..n_times {
            for p in 0..n_paths {
                values[p * n_times + k] = f64::from_le_bytes(next(&mut input)?);
            }
        }
        Ok(PathEnsemble {
            kernel: String::new(),
            times,
            n_paths,
            values,
            seed,
            grid: None,
            discretized_exponents: Vec::new(),
            cells: 0,
        })
    }
}

pub fn write_targets_csv<W: Write>(
    targets: &[CfTarget],
    mut out: W,
    config: &[(String, String)],
) -> Result<()> {
    for (k, v) in config {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t",
        "cf_exponent",
        "quadrature_error",
        "discretized_exponent",
        "target_cf",
    ])?;
    for c in targets {
        w.write_record([
            c.t.to_string(),
            c.cf_exponent.to_string(),
            c.quadrature_error.to_string(),
            c.discretized_exponent.to_string(),
            (-c.cf_exponent).exp().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Drops the rounding noise of `a + k h` (`0.30000000000000004` becomes `0.3`).
fn snap(v: f64) -> f64 {
    format!("{v:.12e}").parse().unwrap_or(v)
}

/// `start:step:end` (both ends included within half a step) or a comma-separated list.
pub fn parse_time_grid(s: &str) -> Result<Vec<f64>> {
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| FsmError::InvalidArgument(format!("bad number '{p}' in time grid '{s}'")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let times = match parts.len() {
        1 => s.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        3 => {
            let (a, h, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(h > 0.0) || b < a {
                return invalid(format!("time grid '{s}' needs step > 0 and end >= start"));
            }
            let n = ((b - a) / h + 0.5).floor() as usize;
            (0..=n)
                .map(|k| {
                    if k == n && ((a + k as f64 * h) - b).abs() <= 0.5 * h {
                        b
                    } else {
                        snap(a + k as f64 * h)
                    }
                })
                .collect()
        }
        _ => {
            return invalid(format!(
                "time grid '{s}' must be start:step:end or a comma list"
            ))
        }
    };
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return invalid(format!("time grid '{s}' has no finite times"));
    }
    Ok(times)
}
