//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.
//!
//! Run it alone with `cargo test -p tkdv-validation --test acceptance`, or
//! pass criterion numbers to select a subset:
//! `cargo test -p tkdv-validation --test acceptance -- 4 5`.

use std::fmt;
use std::time::Duration;

/// Wall-clock budget for criteria that cannot finish on a desk machine.
pub const BUDGET_ENV: &str = "TKDV_ACCEPTANCE_BUDGET_SECS";
pub const DEFAULT_BUDGET_SECS: u64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The criterion's hardware precondition does not hold here.
    Skip,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub verdict: Verdict,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {}  [{:.1} s] {}",
            self.id,
            self.name,
            self.verdict,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Budget from [`BUDGET_ENV`], falling back to [`DEFAULT_BUDGET_SECS`].
pub fn budget() -> Duration {
    let secs = std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .unwrap_or(DEFAULT_BUDGET_SECS);
    Duration::from_secs(secs)
}

/// Relative interval check `value ∈ [target / factor, target · factor]`.
pub fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value >= target / factor && value <= target * factor
}
