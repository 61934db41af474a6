//! Optimization passes: mod-180 deficit reduction via frame rotations,
//! coupling-sign negation for evolutions in the (-90, 90] range, and
//! NOT-pair cancellation at period boundaries.

use std::collections::BTreeSet;

use crate::angle::{ANGLE_TOL_DEG, TIME_MERGE_TOL_S};
use crate::device::{DeviceModel, Pair};
use crate::scheduler::{plan_with_reductions, Event, PulseSchedule, RealizationStep};
use crate::tracker::PhaseLedger;

/// Pass selection. Negation presupposes the mod-180 reduction;
/// [`normalized`](Self::normalized) enforces the implication.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OptimizationOptions {
    pub cancel_nots: bool,
    pub mod180: bool,
    pub negate: bool,
}

impl OptimizationOptions {
    pub const NONE: OptimizationOptions =
        OptimizationOptions { cancel_nots: false, mod180: false, negate: false };

    pub const ALL: OptimizationOptions =
        OptimizationOptions { cancel_nots: true, mod180: true, negate: true };

    pub fn normalized(&self) -> OptimizationOptions {
        OptimizationOptions {
            cancel_nots: self.cancel_nots,
            mod180: self.mod180 || self.negate,
            negate: self.negate,
        }
    }

    pub fn any(&self) -> bool {
        let n = self.normalized();
        n.cancel_nots || n.mod180 || n.negate
    }
}

/// Reduce the pair's deficit modulo 180: a deficit of 180 or more is
/// traded for 180-degree frame rotations on both qubits (Eq. of motion:
/// U_zz(180) = i * Rz(180) (x) Rz(180)). Returns the reduced deficit.
pub fn reduce_mod_180(ledger: &mut PhaseLedger, pair: Pair) -> f64 {
    let d = ledger.deficit(pair);
    if d >= 180.0 {
        ledger.half_turn_reduction(pair);
    }
    ledger.deficit(pair)
}

/// Map a mod-180-reduced deficit onto a signed target angle in
/// (-90, 90]. Deficits above 90 come back negative with the flag set:
/// the pair is realized with reversed net sign and needs the same
/// 180-degree frame correction as the mod-180 reduction. The 90
/// boundary stays positive.
pub fn negate_to_quarter(deficit_deg: f64) -> (f64, bool) {
    debug_assert!((0.0..180.0 + ANGLE_TOL_DEG).contains(&deficit_deg));
    if deficit_deg > 90.0 {
        (deficit_deg - 180.0, true)
    } else {
        (deficit_deg, false)
    }
}

/// Optimizer-aware realization planning: applies the enabled reductions
/// to every control deficit, then places NOT pairs so positive angles
/// evolve for +tau and reversed ones for -tau within the same period.
pub fn plan_with_signs(
    ledger: &mut PhaseLedger,
    device: &DeviceModel,
    target: usize,
    options: &OptimizationOptions,
) -> RealizationStep {
    plan_with_reductions(ledger, device, target, options, &BTreeSet::new())
}

/// Whole-schedule peephole: delete pairs of identical 180-degree pulses
/// on the same qubit separated by no delay and no other pulse on that
/// qubit. Such a pair is the identity up to a global phase, so verifier
/// equivalence is preserved. The placement work that creates these
/// adjacencies (sliding a NOT pair to the period start when the previous
/// period closed with a NOT on the same qubit) happens at planning time,
/// where the ledger re-tracks the bystander changes before emission.
pub fn cancel_not_pairs(schedule: PulseSchedule) -> PulseSchedule {
    let mut events = schedule.events;
    // (event index, pulse index) of the latest still-adjacent 180 pulse
    // per qubit.
    let mut open: std::collections::BTreeMap<usize, (usize, usize)> = std::collections::BTreeMap::new();
    let mut remove: Vec<(usize, usize)> = Vec::new();
    for (ei, event) in events.iter().enumerate() {
        match event {
            Event::Delay { seconds } => {
                if *seconds > TIME_MERGE_TOL_S {
                    open.clear();
                }
            }
            Event::Pulses { pulses } => {
                for (pi, p) in pulses.iter().enumerate() {
                    let is_half_turn = p.angle_deg.abs() == 180.0;
                    match open.remove(&p.qubit) {
                        Some((oei, opi)) if is_half_turn => {
                            let prev = match &events[oei] {
                                Event::Pulses { pulses } => &pulses[opi],
                                Event::Delay { .. } => unreachable!(),
                            };
                            if prev.axis_deg == p.axis_deg && prev.angle_deg == p.angle_deg {
                                remove.push((oei, opi));
                                remove.push((ei, pi));
                            } else if is_half_turn {
                                open.insert(p.qubit, (ei, pi));
                            }
                        }
                        _ if is_half_turn => {
                            open.insert(p.qubit, (ei, pi));
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    if remove.is_empty() {
        return PulseSchedule { events, ..schedule };
    }
    remove.sort();
    for (ei, pi) in remove.into_iter().rev() {
        if let Event::Pulses { pulses } = &mut events[ei] {
            pulses.remove(pi);
        }
    }
    // Drop emptied groups and merge delays that became adjacent.
    let mut out: Vec<Event> = Vec::new();
    for event in events {
        match event {
            Event::Pulses { pulses } if pulses.is_empty() => {}
            Event::Delay { seconds } => {
                if let Some(Event::Delay { seconds: prev }) = out.last_mut() {
                    *prev += seconds;
                } else {
                    out.push(Event::Delay { seconds });
                }
            }
            other => out.push(other),
        }
    }
    PulseSchedule { events: out, ..schedule }
}
