//! Model of the target machine: qubit count and the full symmetric
//! Ising coupling matrix, J_ij in Hz for every unordered pair.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unordered qubit pair, stored with `lo < hi`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    lo: usize,
    hi: usize,
}

impl Pair {
    /// Panics on a self-pair; callers validate indices first.
    pub fn new(a: usize, b: usize) -> Self {
        assert!(a != b, "self-coupling pair ({a},{b})");
        Pair {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn contains(&self, q: usize) -> bool {
        self.lo == q || self.hi == q
    }

    /// The member that is not `q`; panics if `q` is not in the pair.
    pub fn other(&self, q: usize) -> usize {
        if q == self.lo {
            self.hi
        } else {
            assert_eq!(q, self.hi);
            self.lo
        }
    }

    /// All pairs of an `n`-qubit system in lexicographic order.
    pub fn all(n: usize) -> Vec<Pair> {
        let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                v.push(Pair { lo: i, hi: j });
            }
        }
        v
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("invalid device JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("qubit count must be positive")]
    NonPositiveQubits,
    #[error("bad coupling key '{0}': expected 'i-j' with i<j")]
    BadPairKey(String),
    #[error("coupling key '{0}' references qubit out of range (n={1})")]
    PairOutOfRange(String, usize),
    #[error("missing coupling for pair {0}")]
    MissingPair(Pair),
    #[error("coupling J({0}) is not finite")]
    NonFinite(Pair),
    #[error("coupling J({0}) is zero; lazy realization divides by J")]
    ZeroCoupling(Pair),
    #[error("coupling J({0}) is negative; set allow_negative_couplings to permit")]
    NegativeCoupling(Pair),
}

/// The Ising machine: `n` qubits, all n(n-1)/2 couplings defined.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    n_qubits: usize,
    j_hz: BTreeMap<Pair, f64>,
}

#[derive(Serialize, Deserialize)]
struct DeviceFile {
    qubits: usize,
    couplings_hz: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_negative_couplings: bool,
}

impl DeviceModel {
    /// Build from explicit couplings; every pair must be present.
    pub fn new(n_qubits: usize, j_hz: BTreeMap<Pair, f64>, allow_negative: bool) -> Result<Self, DeviceError> {
        if n_qubits == 0 {
            return Err(DeviceError::NonPositiveQubits);
        }
        for p in Pair::all(n_qubits) {
            let j = *j_hz.get(&p).ok_or(DeviceError::MissingPair(p))?;
            if !j.is_finite() {
                return Err(DeviceError::NonFinite(p));
            }
            if j == 0.0 {
                return Err(DeviceError::ZeroCoupling(p));
            }
            if j < 0.0 && !allow_negative {
                return Err(DeviceError::NegativeCoupling(p));
            }
        }
        Ok(DeviceModel { n_qubits, j_hz })
    }

    /// Parse the JSON device config format.
    pub fn from_json(text: &str) -> Result<Self, DeviceError> {
        let file: DeviceFile = serde_json::from_str(text)?;
        if file.qubits == 0 {
            return Err(DeviceError::NonPositiveQubits);
        }
        let mut j_hz = BTreeMap::new();
        for (key, j) in &file.couplings_hz {
            let (a, b) = parse_pair_key(key).ok_or_else(|| DeviceError::BadPairKey(key.clone()))?;
            if a >= b {
                return Err(DeviceError::BadPairKey(key.clone()));
            }
            if b >= file.qubits {
                return Err(DeviceError::PairOutOfRange(key.clone(), file.qubits));
            }
            j_hz.insert(Pair::new(a, b), *j);
        }
        DeviceModel::new(file.qubits, j_hz, file.allow_negative_couplings)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let couplings: BTreeMap<String, f64> =
            self.j_hz.iter().map(|(p, j)| (p.to_string(), *j)).collect();
        let allow = self.j_hz.values().any(|j| *j < 0.0);
        serde_json::to_value(DeviceFile {
            qubits: self.n_qubits,
            couplings_hz: couplings,
            allow_negative_couplings: allow,
        })
        .expect("device serialization cannot fail")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coupling_hz(&self, pair: Pair) -> f64 {
        self.j_hz[&pair]
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.j_hz.keys().copied()
    }

    /// Duration for which full-strength evolution of `pair` accrues
    /// exactly `delta_deg` of coupling angle.
    pub fn coupling_time(&self, pair: Pair, delta_deg: f64) -> f64 {
        debug_assert!(delta_deg >= 0.0);
        delta_deg / (180.0 * self.coupling_hz(pair).abs())
    }
}

fn parse_pair_key(key: &str) -> Option<(usize, usize)> {
    let (a, b) = key.split_once('-')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn fig3_json(j03: f64) -> String {
        format!(
            r#"{{"qubits": 4, "couplings_hz": {{"0-1": 42.0, "0-2": 62.0, "0-3": {j03}, "1-2": 58.0, "1-3": 49.0, "2-3": 67.0}}}}"#
        )
    }

    #[test]
    fn loads_fig3_fixture() {
        let dev = DeviceModel::from_json(&fig3_json(55.0)).unwrap();
        assert_eq!(dev.n_qubits(), 4);
        assert_eq!(dev.coupling_hz(Pair::new(0, 1)), 42.0);
        assert_eq!(dev.coupling_hz(Pair::new(3, 2)), 67.0);
    }

    #[test]
    fn minimal_two_qubit_device() {
        let dev = DeviceModel::from_json(r#"{"qubits": 2, "couplings_hz": {"0-1": 100.0}}"#).unwrap();
        assert_eq!(dev.n_qubits(), 2);
    }

    #[test]
    fn missing_pair_rejected() {
        let text = r#"{"qubits": 4, "couplings_hz": {"0-1": 42.0, "0-2": 62.0, "1-2": 58.0, "1-3": 49.0, "2-3": 67.0}}"#;
        match DeviceModel::from_json(text) {
            Err(DeviceError::MissingPair(p)) => assert_eq!(p, Pair::new(0, 3)),
            other => panic!("expected missing-pair error, got {other:?}"),
        }
    }

    #[test]
    fn zero_and_negative_couplings_rejected() {
        let zero = r#"{"qubits": 2, "couplings_hz": {"0-1": 0.0}}"#;
        assert!(matches!(DeviceModel::from_json(zero), Err(DeviceError::ZeroCoupling(_))));
        let neg = r#"{"qubits": 2, "couplings_hz": {"0-1": -50.0}}"#;
        assert!(matches!(DeviceModel::from_json(neg), Err(DeviceError::NegativeCoupling(_))));
        let neg_ok = r#"{"qubits": 2, "couplings_hz": {"0-1": -50.0}, "allow_negative_couplings": true}"#;
        assert!(DeviceModel::from_json(neg_ok).is_ok());
    }

    #[test]
    fn coupling_times_match_worked_example() {
        let dev = DeviceModel::from_json(&fig3_json(55.0)).unwrap();
        let t01 = dev.coupling_time(Pair::new(0, 1), 90.0) * 1e6;
        assert!((t01 - 11904.76).abs() < 0.01, "got {t01}");
        let t23 = dev.coupling_time(Pair::new(2, 3), 216.0) * 1e6;
        assert!((t23 - 17910.4).abs() < 0.1, "got {t23}");
        assert_eq!(dev.coupling_time(Pair::new(0, 2), 0.0), 0.0);
    }

    #[test]
    fn coupling_time_inverts_to_requested_angle() {
        let dev = DeviceModel::from_json(&fig3_json(55.0)).unwrap();
        for p in Pair::all(4) {
            for delta in [0.5, 90.0, 216.4285714, 359.99] {
                let t = dev.coupling_time(p, delta);
                let back = t * dev.coupling_hz(p) * 180.0;
                assert!((back - delta).abs() / delta < 1e-9);
            }
        }
    }
}
