//! Truncation schedules for the cone integrals and the reports they produce.

use std::io::Write;

use crate::error::{Error, Result};

/// Relative L² increment between successive steps below which a schedule stops.
pub const CAUCHY_TOL: f64 = 1e-4;

/// Default eigenvalue points per quadrature over a truncated interval.
pub const DEFAULT_RESOLUTION: usize = 128;

/// Matrix intervals (ε_j I, ρ_j I) with ε_j decreasing and ρ_j increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSchedule {
    pub pairs: Vec<(f64, f64)>,
    pub resolution: usize,
}

impl TruncationSchedule {
    pub fn new(pairs: Vec<(f64, f64)>, resolution: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Precondition("truncation schedule is empty".into()));
        }
        for (j, &(e, r)) in pairs.iter().enumerate() {
            if !(e > 0.0 && r > e && r.is_finite()) {
                return Err(Error::Precondition(format!("step {j}: need 0 < ε < ρ < ∞, got ({e}, {r})")));
            }
            if j > 0 {
                let (pe, pr) = pairs[j - 1];
                if !(e < pe && r > pr) {
                    return Err(Error::Precondition(format!("step {j}: ε must decrease and ρ increase")));
                }
            }
        }
        if resolution < 8 {
            return Err(Error::Precondition(format!("resolution {resolution} below 8")));
        }
        Ok(TruncationSchedule { pairs, resolution })
    }

    /// ε_j = q^{-j}, ρ_j = q^j for j = 1..=steps.
    pub fn geometric(steps: usize, ratio: f64, resolution: usize) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::Precondition(format!("ratio {ratio} must exceed 1")));
        }
        Self::new((1..=steps).map(|j| (ratio.powi(-(j as i32)), ratio.powi(j as i32))).collect(), resolution)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn last(&self) -> (f64, f64) {
        *self.pairs.last().expect("schedule is non-empty")
    }
}

impl Default for TruncationSchedule {
    fn default() -> Self {
        TruncationSchedule::geometric(10, 4.0, DEFAULT_RESOLUTION).expect("valid default")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportStep {
    pub step: usize,
    pub eps: f64,
    pub rho: f64,
    /// Relative L² error against the reference, when one was supplied.
    pub l2_error: Option<f64>,
    pub multiplier_sup: f64,
    /// Relative L² distance to the previous step.
    pub increment: Option<f64>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Converged { increment: f64 },
    Diverged { increment: f64 },
}

impl Verdict {
    pub fn is_converged(&self) -> bool {
        matches!(self, Verdict::Converged { .. })
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Converged { increment } => write!(f, "converged (last increment {increment:.3e})"),
            Verdict::Diverged { increment } => write!(f, "diverged (last increment {increment:.3e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub steps: Vec<ReportStep>,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    pub fn final_error(&self) -> Option<f64> {
        self.steps.last().and_then(|s| s.l2_error)
    }

    pub fn errors(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.l2_error).collect()
    }

    pub fn multiplier_sups(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.multiplier_sup).collect()
    }

    /// Errors never grow by more than `slack` (relative) after step `from`.
    pub fn non_increasing_from(&self, from: usize, slack: f64) -> bool {
        let e = self.errors();
        e.windows(2).skip(from).all(|w| w[1] <= w[0] * (1.0 + slack) + 1e-15)
    }

    /// Err(NoConvergence) unless the verdict is converged.
    pub fn ensure_converged(&self) -> Result<()> {
        match self.verdict {
            Verdict::Converged { .. } => Ok(()),
            Verdict::Diverged { increment } => Err(Error::NoConvergence(format!("last increment {increment:e}"))),
        }
    }

    /// CSV with columns step, eps, rho, l2_error, multiplier_sup, wall_time_ms and
    /// a trailing verdict comment.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,eps,rho,l2_error,multiplier_sup,wall_time_ms")?;
        for s in &self.steps {
            let err = s.l2_error.map(|e| format!("{e:.17e}")).unwrap_or_default();
            writeln!(out, "{},{:.17e},{:.17e},{},{:.17e},{:.3}", s.step, s.eps, s.rho, err, s.multiplier_sup, s.wall_time_ms)?;
        }
        writeln!(out, "# verdict: {}", self.verdict)?;
        Ok(())
    }

    /// Same as `write_csv` with the timing column zeroed, for byte comparisons.
    pub fn write_csv_untimed<W: Write>(&self, out: W) -> Result<()> {
        let steps = self.steps.iter().map(|s| ReportStep { wall_time_ms: 0.0, ..*s }).collect();
        ConvergenceReport { steps, verdict: self.verdict }.write_csv(out)
    }
}

/// Accumulates steps and applies the Cauchy stopping rule.
#[derive(Debug, Default)]
pub(crate) struct ReportBuilder {
    steps: Vec<ReportStep>,
}

impl ReportBuilder {
    /// Record a step; returns true when the schedule may stop here.
    pub(crate) fn push(&mut self, eps: f64, rho: f64, l2_error: Option<f64>, multiplier_sup: f64, increment: Option<f64>, started: std::time::Instant) -> bool {
        let step = self.steps.len();
        self.steps.push(ReportStep { step, eps, rho, l2_error, multiplier_sup, increment, wall_time_ms: started.elapsed().as_secs_f64() * 1e3 });
        increment.is_some_and(|d| d < CAUCHY_TOL)
    }

    /// `captured` marks a final step whose multiplier already equals the full
    /// constant, which is conclusive without a second step.
    pub(crate) fn finish(self, captured: bool) -> ConvergenceReport {
        let last = self.steps.last().and_then(|s| s.increment);
        let verdict = match last {
            Some(d) if d < CAUCHY_TOL => Verdict::Converged { increment: d },
            _ if captured => Verdict::Converged { increment: last.unwrap_or(0.0) },
            Some(d) => Verdict::Diverged { increment: d },
            None => Verdict::Diverged { increment: f64::INFINITY },
        };
        ConvergenceReport { steps: self.steps, verdict }
    }
}

/// ‖a - b‖ / ‖b‖, falling back to ‖a - b‖ when b vanishes.
pub(crate) fn relative(diff: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        diff / norm
    } else {
        diff
    }
}
