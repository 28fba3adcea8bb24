//! Bound-verification bookkeeping: individual inequality checks and the
//! aggregated scoreboard document consumed by CI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One evaluated inequality `lhs ≤ rhs`.
#[derive(Clone, Debug)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(name: &'static str, lhs: f64, rhs: f64, holds: bool) -> Self {
        Self {
            name,
            lhs,
            rhs,
            holds,
        }
    }
}

/// Anchor names for the cross-cutting inequality ledger. Named by what
/// each check verifies.
pub mod anchors {
    /// `L ≤ L*` (and `L*` against its closed forms).
    pub const PATH_LENGTH_BOUND: &str = "path_length_bound";
    /// Per-step `sin²α_j ≤ δs·∫‖ψ̇‖²`.
    pub const STEP_ANGLE_BOUND: &str = "step_angle_bound";
    /// `Σ sin²α_j ≤ ε` for schedules built from a verified `L*`.
    pub const SCHEDULE_INFIDELITY: &str = "schedule_infidelity";
    /// Measured coherence `c_j` against the geometric recursion bound.
    pub const COHERENCE_RECURSION: &str = "coherence_recursion";
    /// Final fidelity against `1 − ε − 2εε′/((1−ε)(1−ε′))`.
    pub const FINAL_FIDELITY: &str = "final_fidelity";
    /// Accumulated cost against the closed-form total-cost bound.
    pub const RM_TOTAL_COST: &str = "rm_total_cost";
    /// Amplified-evolution RM cost against its closed form.
    pub const AMPLIFIED_RM_COST: &str = "amplified_rm_cost";
    /// Fixed-point-search cost formula against the amplified RM cost.
    pub const FIXED_POINT_COST: &str = "fixed_point_cost";
    /// Annealing cost formula comparison (improved vs prior).
    pub const QSA_COST: &str = "qsa_cost";
    /// Pointwise `‖ψ̇‖² ≤ ⟨ψ|Ḧ−Ë|ψ⟩/(2Δ)`.
    pub const LOCAL_RATE_BOUND: &str = "local_rate_bound";
    /// Three-way agreement of the Gibbs-path rate identity.
    pub const GIBBS_RATE_IDENTITY: &str = "gibbs_rate_identity";
    /// Amplified gap `Δ′ ≥ √(Δ‖Π‖)`.
    pub const AMPLIFIED_GAP: &str = "amplified_gap";

    /// Adiabatic integrator check (not part of the twelve-anchor ledger).
    pub const ADIABATIC_BOUND: &str = "adiabatic_bound";
    /// Oracle-suite outcomes folded in for strict-mode gating.
    pub const LOCAL_RATE_BOUND_ORACLES: &str = "oracle_suite";

    pub const ALL: [&str; 12] = [
        PATH_LENGTH_BOUND,
        STEP_ANGLE_BOUND,
        SCHEDULE_INFIDELITY,
        COHERENCE_RECURSION,
        FINAL_FIDELITY,
        RM_TOTAL_COST,
        AMPLIFIED_RM_COST,
        FIXED_POINT_COST,
        QSA_COST,
        LOCAL_RATE_BOUND,
        GIBBS_RATE_IDENTITY,
        AMPLIFIED_GAP,
    ];
}

/// Aggregate over all instances recorded under one anchor.
///
/// Slack is `(rhs − lhs)/max(rhs, 1e-12)` so tightness is comparable
/// across instances of different scales.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AnchorEntry {
    pub instances: u64,
    pub violations: u64,
    pub max_slack: f64,
    pub min_slack: f64,
}

impl AnchorEntry {
    fn merge(&mut self, other: &AnchorEntry) {
        self.instances += other.instances;
        self.violations += other.violations;
        self.max_slack = self.max_slack.max(other.max_slack);
        self.min_slack = self.min_slack.min(other.min_slack);
    }
}

/// The machine-readable verdict document.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Scoreboard {
    pub entries: BTreeMap<String, AnchorEntry>,
}

impl Scoreboard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one instance of an inequality `lhs ≤ rhs`.
    pub fn record(&mut self, anchor: &str, lhs: f64, rhs: f64, holds: bool) {
        let slack = (rhs - lhs) / rhs.max(1e-12);
        let entry = AnchorEntry {
            instances: 1,
            violations: u64::from(!holds),
            max_slack: slack,
            min_slack: slack,
        };
        self.entries
            .entry(anchor.to_string())
            .and_modify(|e| e.merge(&entry))
            .or_insert(entry);
    }

    pub fn record_check(&mut self, anchor: &str, check: &BoundCheck) {
        self.record(anchor, check.lhs, check.rhs, check.holds);
    }

    /// Entrywise append-merge (associative and commutative).
    pub fn merge(&mut self, other: &Scoreboard) {
        for (k, v) in &other.entries {
            self.entries
                .entry(k.clone())
                .and_modify(|e| e.merge(v))
                .or_insert_with(|| v.clone());
        }
    }

    /// Merge any number of scoreboards into one.
    pub fn aggregate<'a>(parts: impl IntoIterator<Item = &'a Scoreboard>) -> Scoreboard {
        let mut out = Scoreboard::new();
        for p in parts {
            out.merge(p);
        }
        out
    }

    pub fn total_violations(&self) -> u64 {
        self.entries.values().map(|e| e.violations).sum()
    }

    /// Suite verdict: no violations anywhere.
    pub fn passes(&self) -> bool {
        self.total_violations() == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scoreboard serialization")
    }

    /// Human-oriented table, one line per anchor.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>9} {:>10} {:>12} {:>12}\n",
            "anchor", "instances", "violations", "min_slack", "max_slack"
        ));
        for (k, e) in &self.entries {
            out.push_str(&format!(
                "{:<24} {:>9} {:>10} {:>12.3e} {:>12.3e}\n",
                k, e.instances, e.violations, e.min_slack, e.max_slack
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_scoreboard_passes() {
        let sb = Scoreboard::new();
        assert!(sb.passes());
        assert_eq!(sb.entries.len(), 0);
    }

    #[test]
    fn violations_counted() {
        let mut sb = Scoreboard::new();
        sb.record(anchors::FINAL_FIDELITY, 0.9, 0.95, true);
        sb.record(anchors::FINAL_FIDELITY, 0.99, 0.95, false);
        let e = &sb.entries[anchors::FINAL_FIDELITY];
        assert_eq!(e.instances, 2);
        assert_eq!(e.violations, 1);
        assert!(!sb.passes());
        assert!(e.min_slack < 0.0 && e.max_slack > 0.0);
    }

    fn arb_scoreboard() -> impl Strategy<Value = Scoreboard> {
        proptest::collection::vec(
            (0usize..anchors::ALL.len(), -1.0f64..1.0, 0.0f64..2.0, any::<bool>()),
            0..8,
        )
        .prop_map(|records| {
            let mut sb = Scoreboard::new();
            for (k, lhs, rhs, holds) in records {
                sb.record(anchors::ALL[k], lhs, rhs, holds);
            }
            sb
        })
    }

    proptest! {
        #[test]
        fn merge_is_associative(a in arb_scoreboard(), b in arb_scoreboard(), c in arb_scoreboard()) {
            let left = Scoreboard::aggregate([&a, &Scoreboard::aggregate([&b, &c])]);
            let right = Scoreboard::aggregate([&Scoreboard::aggregate([&a, &b]), &c]);
            prop_assert_eq!(left, right);
        }
    }
}
