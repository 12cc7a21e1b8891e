//! Verification suites: Monte Carlo checks of the simulator and the
//! renormalization chain against closed-form targets, plus exact pathwise
//! identities.
//!
//! Every suite produces a [`TestReport`] whose verdicts are recomputable
//! from the recorded numbers alone: a check passes iff its `estimate` lies
//! in its `band`. Reports are self-auditing ([`TestReport::audit`]) and
//! have a canonical serialization that omits wall-clock time, so two runs
//! with the same seed and scale produce byte-identical canonical reports.

pub mod stats;
mod suites;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use stats::Band;

/// Names of all verification suites, in recommended execution order.
pub const SUITE_NAMES: &[&str] = &[
    "holding",
    "poisson1d",
    "homogeneity",
    "scaling",
    "iterate",
    "iterate22",
    "lemma_fundadef",
    "coupling_elemental1",
    "stationarity",
    "mixing_decay",
    "atom",
    "factor_propf2",
    "factor_certificate",
];

/// Shared p-value floor for distribution-equality checks.
pub const P_THRESHOLD: f64 = 0.001;

/// Shared width (in standard errors) for proportion bands.
pub const PROPORTION_SIGMA: f64 = 4.0;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite `{name}` (expected one of: {})", SUITE_NAMES.join(", "))]
    UnknownSuite { name: String },
}

/// Replica-count scale. `Standard` is the calibrated regime the acceptance
/// bands were chosen for; `Quick` is a smoke-test regime with the same
/// checks at reduced replica counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteScale {
    Standard,
    Quick,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteParams {
    pub master_seed: u64,
    pub scale: SuiteScale,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            master_seed: 17,
            scale: SuiteScale::Standard,
        }
    }
}

impl SuiteParams {
    /// Replica count for the current scale.
    pub(crate) fn n(&self, standard: u64, quick: u64) -> u64 {
        match self.scale {
            SuiteScale::Standard => standard,
            SuiteScale::Quick => quick,
        }
    }
}

/// One check inside a suite. The verdict is determined by the recorded
/// numbers: `verdict == band.contains(estimate)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Suite this check belongs to.
    pub suite: String,
    /// Short identifier of the quantity under test.
    pub check: String,
    /// Closed-form target (or p-value threshold for p-value checks).
    pub target: f64,
    /// Point estimate (or p-value for p-value checks).
    pub estimate: f64,
    /// Standard error of the estimate where meaningful, else 0.
    pub std_error: f64,
    /// Acceptance band for the estimate.
    pub band: Band,
    pub verdict: bool,
    /// Replica counts and context needed to re-derive the numbers.
    pub detail: String,
}

impl CheckRecord {
    pub fn new(
        suite: &str,
        check: &str,
        target: f64,
        estimate: f64,
        std_error: f64,
        band: Band,
        detail: String,
    ) -> Self {
        CheckRecord {
            suite: suite.to_string(),
            check: check.to_string(),
            target,
            estimate,
            std_error,
            band,
            verdict: band.contains(estimate),
            detail,
        }
    }

    /// A p-value check: passes when `p` is at or above [`P_THRESHOLD`].
    pub fn p_value(suite: &str, check: &str, p: f64, detail: String) -> Self {
        Self::new(
            suite,
            check,
            P_THRESHOLD,
            p,
            0.0,
            Band::new(P_THRESHOLD, 1.0),
            detail,
        )
    }

    /// A proportion check with a [`PROPORTION_SIGMA`]-wide normal band
    /// around an exact target.
    pub fn proportion(
        suite: &str,
        check: &str,
        target: f64,
        successes: u64,
        trials: u64,
        detail: String,
    ) -> Self {
        let estimate = successes as f64 / trials as f64;
        let se = stats::proportion_se(target, trials);
        Self::new(
            suite,
            check,
            target,
            estimate,
            se,
            stats::proportion_band(target, trials, PROPORTION_SIGMA),
            format!("successes={successes} trials={trials} {detail}"),
        )
    }

    /// An all-or-nothing check: every one of `trials` exact trials must
    /// succeed.
    pub fn exact(suite: &str, check: &str, successes: u64, trials: u64, detail: String) -> Self {
        Self::new(
            suite,
            check,
            trials as f64,
            successes as f64,
            0.0,
            Band::new(trials as f64, trials as f64),
            format!("successes={successes} trials={trials} {detail}"),
        )
    }
}

/// Outcome of one suite run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub suite: String,
    pub scale: SuiteScale,
    pub master_seed: u64,
    /// Headline replica count (per-check counts live in the check details).
    pub replicas: u64,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    /// Wall-clock milliseconds; excluded from the canonical serialization.
    pub wall_ms: u64,
}

impl TestReport {
    /// Re-derive every verdict from the recorded numbers. Returns false if
    /// any stored verdict (or the overall flag) disagrees.
    pub fn audit(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.verdict == c.band.contains(c.estimate))
            && self.pass == self.checks.iter().all(|c| c.verdict)
            && !self.checks.is_empty()
    }

    /// Deterministic serialization: identical runs produce identical bytes.
    /// Wall time is the one legitimately nondeterministic field, so it is
    /// zeroed here.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_ms = 0;
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }

    /// One `PASS`/`FAIL` line per check, for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] {}::{} target={:.6} estimate={:.6} band=[{:.6},{:.6}]",
                    if c.verdict { "PASS" } else { "FAIL" },
                    c.suite,
                    c.check,
                    c.target,
                    c.estimate,
                    c.band.lo,
                    c.band.hi
                )
            })
            .collect()
    }
}

/// Run one suite by name. Unknown names are rejected.
pub fn run_suite(name: &str, params: &SuiteParams) -> Result<TestReport, VerifyError> {
    let start = Instant::now();
    let (replicas, checks) = match name {
        "holding" => suites::holding(params),
        "poisson1d" => suites::poisson1d(params),
        "homogeneity" => suites::homogeneity(params),
        "scaling" => suites::scaling(params),
        "iterate" => suites::iterate_law(params),
        "iterate22" => suites::iterate22(params),
        "lemma_fundadef" => suites::lemma_fundadef(params),
        "coupling_elemental1" => suites::coupling_elemental1(params),
        "stationarity" => suites::stationarity(params),
        "mixing_decay" => suites::mixing_decay(params),
        "atom" => suites::atom(params),
        "factor_propf2" => suites::factor_propf2(params),
        "factor_certificate" => suites::factor_certificate(params),
        other => {
            return Err(VerifyError::UnknownSuite {
                name: other.to_string(),
            })
        }
    };
    let pass = checks.iter().all(|c| c.verdict);
    Ok(TestReport {
        suite: name.to_string(),
        scale: params.scale,
        master_seed: params.master_seed,
        replicas,
        checks,
        pass,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}
