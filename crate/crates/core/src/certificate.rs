//! Outcome records for individual verification steps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Proved,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// Worst-of combination: any refutation wins, then any inconclusive step.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Refuted, _) | (_, Refuted) => Refuted,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Proved,
        }
    }

    pub fn all<'a>(it: impl IntoIterator<Item = &'a Certificate>) -> Verdict {
        it.into_iter()
            .fold(Verdict::Proved, |acc, c| acc.combine(c.verdict))
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Proved => "PROVED",
            Verdict::Refuted => "REFUTED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// Soundness notes shared by the modular certificates.
pub mod soundness {
    pub const FULL_RANK_MOD_P: &str =
        "full column rank modulo a prime implies full column rank over Q; deficiency modulo p proves nothing";
    pub const EXACT: &str = "exact computation over Q";
    pub const KERNEL_UPPER_BOUND: &str =
        "dim ker over F_p bounds dim ker over Q from above";
    pub const ARTINIAN_SLICE: &str =
        "surjectivity onto degree 54 of the sliced ideal mod p implies the sliced ideal is Artinian over Q, so the three forms have codimension 3";
    pub const DERIVED: &str = "follows from the referenced certificates";
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Stable key, e.g. `regseq.m` or `closedness.k50.e4`.
    pub id: String,
    /// The mathematical statement being certified.
    pub claim: String,
    pub verdict: Verdict,
    #[serde(default)]
    pub primes: Vec<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Computed ranks, dimensions and other observables.
    #[serde(default)]
    pub values: BTreeMap<String, serde_json::Value>,
    pub soundness: String,
    #[serde(default)]
    pub detail: Option<String>,
    /// Wall time; serialized separately from the deterministic part of a report.
    #[serde(skip)]
    pub wall_ms: u64,
}

impl Certificate {
    pub fn new(id: impl Into<String>, claim: impl Into<String>, verdict: Verdict) -> Self {
        Self {
            id: id.into(),
            claim: claim.into(),
            verdict,
            primes: Vec::new(),
            seed: None,
            values: BTreeMap::new(),
            soundness: soundness::EXACT.to_string(),
            detail: None,
            wall_ms: 0,
        }
    }

    pub fn with_value(mut self, key: &str, v: impl Serialize) -> Self {
        self.values.insert(
            key.to_string(),
            serde_json::to_value(v).expect("serializable certificate value"),
        );
        self
    }

    pub fn with_soundness(mut self, s: &str) -> Self {
        self.soundness = s.to_string();
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn with_primes(mut self, primes: &[u64]) -> Self {
        self.primes = primes.to_vec();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_claim(mut self, claim: impl Into<String>) -> Self {
        self.claim = claim.into();
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn timed(mut self, start: std::time::Instant) -> Self {
        self.wall_ms = start.elapsed().as_millis() as u64;
        self
    }

    pub fn is_proved(&self) -> bool {
        self.verdict == Verdict::Proved
    }

    pub fn value_i64(&self, key: &str) -> Option<i64> {
        self.values.get(key).and_then(|v| v.as_i64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_combination_is_fail_closed() {
        use Verdict::*;
        assert_eq!(Proved.combine(Proved), Proved);
        assert_eq!(Proved.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Refuted), Refuted);
    }

    #[test]
    fn json_round_trip_keeps_deterministic_fields() {
        let c = Certificate::new("a", "x = x", Verdict::Proved)
            .with_value("rank", 3)
            .with_primes(&[7, 11]);
        let s = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
