//! Coupling-angle bookkeeping: the per-pair deficit ledger, per-qubit
//! abstract reference frames, and signed evolution through NOT timelines.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::angle::{is_zero_deg, norm_deg};
use crate::device::{DeviceModel, Pair};

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("internal: reset on qubit {target} with pair {pair} deficit {deficit_deg} deg")]
    ResetWithNonzeroDeficit { target: usize, pair: Pair, deficit_deg: f64 },
}

/// NOT-gate times per qubit inside one evolution period of length
/// `duration`. The induced pair sign s_ij(t) starts at +1 and flips at
/// every NOT on either qubit; simultaneous NOTs on both cancel.
#[derive(Clone, Debug, Default)]
pub struct SignTimeline {
    pub duration: f64,
    flips: BTreeMap<usize, Vec<f64>>,
}

impl SignTimeline {
    pub fn new(duration: f64) -> Self {
        SignTimeline { duration, flips: BTreeMap::new() }
    }

    /// Record a NOT on `qubit` at time `t` in `[0, duration]`.
    pub fn add_flip(&mut self, qubit: usize, t: f64) {
        debug_assert!(t >= 0.0 && t <= self.duration + 1e-12);
        let v = self.flips.entry(qubit).or_default();
        v.push(t);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    pub fn flips(&self, qubit: usize) -> &[f64] {
        self.flips.get(&qubit).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn flip_map(&self) -> &BTreeMap<usize, Vec<f64>> {
        &self.flips
    }

    /// Signed net evolution time of `pair` over the period:
    /// the integral of s_ij(t) dt from 0 to `duration`.
    pub fn net_time(&self, pair: Pair) -> f64 {
        let a = self.flips(pair.lo());
        let b = self.flips(pair.hi());
        // Merge the two sorted flip lists; coincident flips on both
        // qubits leave the pair sign unchanged.
        let mut net = 0.0;
        let mut sign = 1.0;
        let mut prev = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let t = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    continue; // both flip: sign unchanged, no boundary
                }
                (Some(&x), Some(&y)) => {
                    if x < y {
                        i += 1;
                        x
                    } else {
                        j += 1;
                        y
                    }
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            net += sign * (t - prev);
            sign = -sign;
            prev = t;
        }
        net + sign * (self.duration - prev)
    }
}

/// Per-pair coupling-angle deficits (required minus achieved, degrees in
/// [0,360)), cumulative requested angles for reporting, per-qubit frame
/// shifts, and the bookkeeping global phase.
#[derive(Clone, Debug)]
pub struct PhaseLedger {
    n_qubits: usize,
    deficit: BTreeMap<Pair, f64>,
    requested: BTreeMap<Pair, f64>,
    frame: Vec<f64>,
    global_phase_deg: f64,
    /// Round tracked angles to whole degrees after each advance,
    /// reproducing hand-calculation traces.
    pub round_degrees: bool,
}

impl PhaseLedger {
    pub fn new(n_qubits: usize) -> Self {
        let mut deficit = BTreeMap::new();
        let mut requested = BTreeMap::new();
        for p in Pair::all(n_qubits) {
            deficit.insert(p, 0.0);
            requested.insert(p, 0.0);
        }
        PhaseLedger {
            n_qubits,
            deficit,
            requested,
            frame: vec![0.0; n_qubits],
            global_phase_deg: 0.0,
            round_degrees: false,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn deficit(&self, pair: Pair) -> f64 {
        self.deficit[&pair]
    }

    pub fn deficits(&self) -> &BTreeMap<Pair, f64> {
        &self.deficit
    }

    /// Achieved evolution angle of the pair (mod 360), the quantity the
    /// tracking tables record.
    pub fn achieved(&self, pair: Pair) -> f64 {
        norm_deg(self.requested[&pair] - self.deficit[&pair])
    }

    pub fn achieved_map(&self) -> BTreeMap<Pair, f64> {
        self.deficit.keys().map(|p| (*p, self.achieved(*p))).collect()
    }

    pub fn frame(&self, qubit: usize) -> f64 {
        self.frame[qubit]
    }

    pub fn frames(&self) -> &[f64] {
        &self.frame
    }

    pub fn global_phase_deg(&self) -> f64 {
        self.global_phase_deg
    }

    pub fn add_global_phase(&mut self, deg: f64) {
        self.global_phase_deg = norm_deg(self.global_phase_deg + deg);
    }

    /// Add a required evolution angle for the pair, reduced mod 360.
    /// Wrapping by a full turn flips the pair unitary's sign
    /// (U_zz(360) = -1), which lands in the global phase.
    pub fn request_coupling(&mut self, pair: Pair, angle_deg: f64) {
        let wrapped = norm_deg(angle_deg);
        let turns = ((wrapped - angle_deg) / 360.0).round();
        self.add_global_phase(180.0 * turns);
        let d = self.deficit.get_mut(&pair).expect("pair in ledger");
        *d = norm_deg(*d + wrapped);
        let r = self.requested.get_mut(&pair).expect("pair in ledger");
        *r = norm_deg(*r + wrapped);
    }

    /// Integrate signed coupling evolution over one period: for every
    /// pair, deficit -= 180 * J_ij * net_time, reduced into [0,360).
    pub fn advance(&mut self, device: &DeviceModel, timeline: &SignTimeline) {
        if timeline.duration == 0.0 {
            return;
        }
        for (pair, d) in self.deficit.iter_mut() {
            let net = timeline.net_time(*pair);
            if net == 0.0 {
                continue;
            }
            let delta = 180.0 * device.coupling_hz(*pair) * net;
            *d = norm_deg(*d - delta);
        }
        if self.round_degrees {
            self.round_tracked_angles();
        }
    }

    fn round_tracked_angles(&mut self) {
        for (pair, d) in self.deficit.iter_mut() {
            let req = self.requested[pair];
            let achieved = norm_deg(req - *d);
            *d = norm_deg(req - achieved.round());
        }
    }

    /// Called when a single-qubit gate lands on `target`: all coupling
    /// angles to it restart from zero. Deficits involving the target
    /// must already be zero; anything else is a compiler bug.
    pub fn reset_pair_angles_on_gate(&mut self, target: usize) -> Result<(), TrackerError> {
        for (pair, d) in self.deficit.iter_mut() {
            if !pair.contains(target) {
                continue;
            }
            if !is_zero_deg(*d) {
                return Err(TrackerError::ResetWithNonzeroDeficit {
                    target,
                    pair: *pair,
                    deficit_deg: *d,
                });
            }
            *d = 0.0;
            *self.requested.get_mut(pair).expect("pair in ledger") = 0.0;
        }
        Ok(())
    }

    /// Clear sub-tolerance float dust on deficits involving `target`.
    pub fn snap_target_deficits(&mut self, target: usize) {
        for (pair, d) in self.deficit.iter_mut() {
            if pair.contains(target) && is_zero_deg(*d) {
                *d = 0.0;
            }
        }
    }

    /// Clear sub-tolerance float dust on every pair.
    pub fn snap_all_clear_deficits(&mut self) {
        for d in self.deficit.values_mut() {
            if is_zero_deg(*d) {
                *d = 0.0;
            }
        }
    }

    /// Account an abstract z-rotation by `angle_deg` on `qubit`. The
    /// stored frame is the axis shift applied to later pulses; pushing
    /// Rz(a) leftward past a pulse shifts the pulse axis by -a, so the
    /// frame accumulates the negated rotation. The simulator's
    /// equivalence check fixes this sign.
    pub fn apply_frame(&mut self, qubit: usize, angle_deg: f64) {
        self.frame[qubit] = norm_deg(self.frame[qubit] - angle_deg);
    }

    /// Axis at which a pulse about `axis_deg` must be emitted on a qubit
    /// carrying the current frame.
    pub fn shift_pulse_axis(&self, qubit: usize, axis_deg: f64) -> f64 {
        norm_deg(axis_deg + self.frame[qubit])
    }

    /// Pairs with deficits above tolerance, for residual reporting.
    pub fn residual_deficits(&self) -> BTreeMap<Pair, f64> {
        self.deficit
            .iter()
            .filter(|(_, d)| !is_zero_deg(**d))
            .map(|(p, d)| (*p, *d))
            .collect()
    }

    pub fn max_target_deficit(&self, target: usize) -> f64 {
        self.deficit
            .iter()
            .filter(|(p, _)| p.contains(target))
            .map(|(_, d)| {
                let r = norm_deg(*d);
                r.min(360.0 - r)
            })
            .fold(0.0, f64::max)
    }

    pub fn assert_target_clear(&self, target: usize) -> Result<(), TrackerError> {
        for (pair, d) in &self.deficit {
            if pair.contains(target) && !is_zero_deg(*d) {
                return Err(TrackerError::ResetWithNonzeroDeficit {
                    target,
                    pair: *pair,
                    deficit_deg: *d,
                });
            }
        }
        Ok(())
    }

    /// Trade 180 degrees of the pair's deficit for frame rotations:
    /// U_zz(180) = i * Rz(180) (x) Rz(180) (oracle-verified), so
    /// removing 180 from the required evolution costs a 180 frame on
    /// both qubits and a +90 global phase. The requested total moves
    /// with the deficit so achieved() keeps reporting the tracked angle.
    pub fn half_turn_reduction(&mut self, pair: Pair) {
        let d = self.deficit.get_mut(&pair).expect("pair in ledger");
        *d = norm_deg(*d - 180.0);
        let r = self.requested.get_mut(&pair).expect("pair in ledger");
        *r = norm_deg(*r - 180.0);
        self.apply_frame(pair.lo(), 180.0);
        self.apply_frame(pair.hi(), 180.0);
        self.add_global_phase(90.0);
    }
}
