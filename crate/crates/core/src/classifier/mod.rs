//! Pointwise classification of x-nodes.
//!
//! Each node gets three independent diagnostics: a fit to the fixed-point family, a search for
//! a periodicity witness and an octave-wise Hopf growth test. A finite Hopf integral makes the
//! node dissipative; otherwise the label is fixed, cyclic or conservative non-periodic, in that
//! order. Indeterminate Hopf growth is treated as divergent and flagged.

mod fit;
mod hopf;
mod period;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fit::{fixed_fit, fixed_fit_values, FixedFit};
pub use hopf::{hopf_test, verdict as hopf_verdict, HopfTrace, HopfVerdict};
pub use period::{limit_fixed, periodic_search, PeriodCandidate, SearchGrid, EXACT_RESIDUAL};
pub use report::{summary_path, ClassificationReport, Containment, ReportRow, Summary};

use crate::error::{invalid, Result};
use crate::grid::GridSpec;
use crate::kernels::KernelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pfsm_tol: f64,
    pub cf_tol: f64,
    pub hopf_finite_ratio: f64,
    pub hopf_divergent_ratio: f64,
    /// Divergent once `J_N > hopf_cap · J_1`.
    pub hopf_cap: f64,
    pub octaves: usize,
    pub hopf_rel_tol: f64,
    /// Dilations with `|ln c|` below this are not searched.
    pub c_exclusion: f64,
    pub limit_bands: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pfsm_tol: 1e-6,
            cf_tol: 1e-6,
            hopf_finite_ratio: 0.5,
            hopf_divergent_ratio: 0.9,
            hopf_cap: 1e6,
            octaves: 6,
            hopf_rel_tol: 1e-5,
            c_exclusion: 0.05,
            limit_bands: 6,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.pfsm_tol, self.cf_tol, self.hopf_cap, self.hopf_rel_tol];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid("tolerances must be positive");
        }
        if !(0.0 < self.hopf_finite_ratio && self.hopf_finite_ratio <= self.hopf_divergent_ratio) {
            return invalid("need 0 < finite ratio <= divergent ratio");
        }
        if self.octaves < 3 {
            return invalid("the Hopf test needs at least 3 octaves");
        }
        if !(self.c_exclusion >= 0.0 && self.c_exclusion < 4.0) {
            return invalid("c exclusion must lie in [0, 4)");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Fixed,
    Cyclic,
    ConservativeNonperiodic,
    Dissipative,
}

impl Label {
    pub const ALL: [Label; 4] = [
        Label::Fixed,
        Label::Cyclic,
        Label::ConservativeNonperiodic,
        Label::Dissipative,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Fixed => "fixed",
            Label::Cyclic => "cyclic",
            Label::ConservativeNonperiodic => "conservative_nonperiodic",
            Label::Dissipative => "dissipative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Label::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointReport {
    pub x: f64,
    pub label: Label,
    pub fixed: FixedFit,
    /// Best periodicity candidate, whether or not it qualifies as a witness.
    pub best_period: Option<PeriodCandidate>,
    pub witness: Option<PeriodCandidate>,
    pub limit_fixed: bool,
    pub hopf: HopfTrace,
    pub warnings: Vec<String>,
}

pub fn classify_point(
    kernel: &KernelSpec,
    x: f64,
    grid: &GridSpec,
    th: &Thresholds,
) -> PointReport {
    let fixed = fixed_fit(kernel, x, grid);
    let search = SearchGrid::standard(grid, th.c_exclusion);
    let best_period = periodic_search(kernel, x, grid, &search);
    let witness = best_period.filter(|c| c.residual < th.pfsm_tol);
    let limit = witness.is_some() && limit_fixed(kernel, x, grid, th.limit_bands, th.pfsm_tol);
    let hopf = hopf_test(kernel, x, grid, th);

    let mut warnings = Vec::new();
    if hopf.verdict == HopfVerdict::Indeterminate {
        warnings.push(format!("indeterminate Hopf ratio {:.3}", hopf.ratio));
    }
    let label = if hopf.verdict == HopfVerdict::Finite {
        if witness.is_some() {
            warnings.push("periodicity witness with finite Hopf integral".into());
        }
        Label::Dissipative
    } else if fixed.residual < th.cf_tol {
        if witness.is_none() {
            warnings.push("fixed fit without periodicity witness".into());
        }
        Label::Fixed
    } else if witness.is_some() {
        Label::Cyclic
    } else {
        Label::ConservativeNonperiodic
    };
    if hopf.unconverged > 0 {
        warnings.push(format!(
            "{} Hopf line integrals above tolerance",
            hopf.unconverged
        ));
    }
    PointReport {
        x,
        label,
        fixed,
        best_period,
        witness,
        limit_fixed: limit,
        hopf,
        warnings,
    }
}

/// Classify every x-node of `grid` (in parallel; the output order follows the grid).
pub fn classify_kernel(
    kernel: &KernelSpec,
    grid: &GridSpec,
    th: &Thresholds,
) -> Result<ClassificationReport> {
    grid.validate()?;
    th.validate()?;
    let points: Vec<PointReport> = grid
        .x_nodes
        .par_iter()
        .map(|&(x, _)| classify_point(kernel, x, grid, th))
        .collect();
    Ok(ClassificationReport {
        kernel: kernel.label.clone(),
        thresholds: *th,
        config: Vec::new(),
        points,
    })
}
