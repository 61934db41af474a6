//! The compiler core: walks the normalized gate sequence, synthesizes
//! one evolution period before each single-qubit gate whose NOT
//! placements drive every deficit involving the target to zero in the
//! same time, and emits the timed pulse schedule. Also hosts the
//! conventional Hadamard-isolation refocusing used by the final flush
//! and the comparison baseline.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{is_zero_deg, norm_deg, round_deg3, round_us3, TIME_MERGE_TOL_S};
use crate::circuit::{decompose_cphase, normalize, Gate, GateNetwork};
use crate::device::{DeviceError, DeviceModel, Pair};
use crate::optimizer::OptimizationOptions;
use crate::optimizer::negate_to_quarter;
use crate::tracker::{PhaseLedger, SignTimeline, TrackerError};

/// One instantaneous single-qubit pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct Pulse {
    pub qubit: usize,
    pub axis_deg: f64,
    pub angle_deg: f64,
}

impl Pulse {
    pub fn not(qubit: usize) -> Self {
        Pulse { qubit, axis_deg: 0.0, angle_deg: 180.0 }
    }

    /// Refocusing NOT as emitted by the compiler: 180 about x.
    pub fn is_not(&self) -> bool {
        self.angle_deg == 180.0 && self.axis_deg == 0.0
    }
}

/// Schedule event: a free-evolution delay or a group of simultaneous
/// pulses touching each qubit at most once.
#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Delay { seconds: f64 },
    Pulses { pulses: Vec<Pulse> },
}

/// Compiled output: timed events plus residual metadata.
#[derive(Clone, Debug)]
pub struct PulseSchedule {
    pub n_qubits: usize,
    pub events: Vec<Event>,
    pub final_frames_deg: Vec<f64>,
    pub residual_deficits_deg: BTreeMap<Pair, f64>,
    pub global_phase_deg: f64,
}

impl PulseSchedule {
    /// Schedule with no frames or residuals, for tests and hand builds.
    pub fn bare(n_qubits: usize, events: Vec<Event>) -> Self {
        PulseSchedule {
            n_qubits,
            events,
            final_frames_deg: vec![0.0; n_qubits],
            residual_deficits_deg: BTreeMap::new(),
            global_phase_deg: 0.0,
        }
    }

    pub fn total_delay_seconds(&self) -> f64 {
        self.events
            .iter()
            .map(|e| match e {
                Event::Delay { seconds } => *seconds,
                Event::Pulses { .. } => 0.0,
            })
            .sum()
    }

    pub fn pulse_count(&self) -> usize {
        self.events
            .iter()
            .map(|e| match e {
                Event::Pulses { pulses } => pulses.len(),
                Event::Delay { .. } => 0,
            })
            .sum()
    }

    pub fn not_count(&self) -> usize {
        self.events
            .iter()
            .map(|e| match e {
                Event::Pulses { pulses } => pulses.iter().filter(|p| p.is_not()).count(),
                Event::Delay { .. } => 0,
            })
            .sum()
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("circuit uses {circuit} qubits but device has {device}")]
    QubitMismatch { circuit: usize, device: usize },
    #[error(transparent)]
    Internal(#[from] TrackerError),
}

#[derive(Debug, Error)]
pub enum ScheduleIoError {
    #[error("invalid schedule JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schedule device: {0}")]
    Device(#[from] DeviceError),
    #[error("bad pair key '{0}' in residual deficits")]
    BadPairKey(String),
    #[error("bad qubit key '{0}' in final frames")]
    BadQubitKey(String),
    #[error("schedule references qubit {q} outside {n} qubits")]
    QubitOutOfRange { q: usize, n: usize },
}

/// Per-step realization plan: period length and NOT placements that give
/// every control pair its required signed net evolution time.
#[derive(Clone, Debug)]
pub struct RealizationStep {
    pub target: usize,
    /// Period length T in seconds; zero means an empty step.
    pub duration: f64,
    /// Required |net| evolution time per control, seconds.
    pub taus: BTreeMap<usize, f64>,
    /// NOT-pair times per control in [0, T]; absent controls evolve the
    /// whole period.
    pub not_times: BTreeMap<usize, (f64, f64)>,
    /// Controls realized with negated net sign.
    pub reversed: BTreeSet<usize>,
    /// Controls whose opening NOT sits at t = 0 to annihilate against
    /// the previous period's closing NOT.
    pub cancel_with_boundary: BTreeSet<usize>,
}

impl RealizationStep {
    pub fn is_empty(&self) -> bool {
        self.duration == 0.0
    }

    /// Sign timeline induced by the planned NOT placements.
    pub fn timeline(&self) -> SignTimeline {
        let mut tl = SignTimeline::new(self.duration);
        for (q, (t1, t2)) in &self.not_times {
            tl.add_flip(*q, *t1);
            tl.add_flip(*q, *t2);
        }
        tl
    }

    /// NOT groups merged over coincident times, ascending.
    pub fn not_groups(&self) -> Vec<(f64, Vec<usize>)> {
        let mut times: Vec<(f64, usize)> = Vec::new();
        for (q, (t1, t2)) in &self.not_times {
            times.push((*t1, *q));
            times.push((*t2, *q));
        }
        times.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (t, q) in times {
            match groups.last_mut() {
                Some((gt, qs)) if (t - *gt).abs() <= TIME_MERGE_TOL_S => qs.push(q),
                _ => groups.push((t, vec![q])),
            }
        }
        groups
    }
}

/// Compile-time options.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompileOptions {
    /// End with a conventional refocusing stage driving all residual
    /// deficits to zero.
    pub flush: bool,
    pub opt: OptimizationOptions,
    /// Round tracked angles to whole degrees after each period,
    /// reproducing the hand-calculated traces of the worked example.
    pub round_degrees: bool,
}

/// What happened at a labeled trace point.
#[derive(Clone, Debug)]
pub enum TraceDetail {
    Realization {
        target: usize,
        duration: f64,
        taus: BTreeMap<usize, f64>,
        not_times: BTreeMap<usize, (f64, f64)>,
    },
    Pulse { qubit: usize },
    FlushPeriod { pair: Pair, duration: f64 },
}

/// Ledger snapshot taken after each realization period, single-qubit
/// pulse, and flush period.
#[derive(Clone, Debug)]
pub struct TracePoint {
    pub label: String,
    pub angles_deg: BTreeMap<Pair, f64>,
    pub detail: TraceDetail,
}

#[derive(Clone, Debug)]
pub struct CompileResult {
    pub schedule: PulseSchedule,
    pub trace: Vec<TracePoint>,
}

fn trace_label(index: usize) -> String {
    let mut i = index;
    let mut s = String::new();
    loop {
        s.insert(0, (b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s
}

/// Event accumulator that merges delays, tracks which qubits still have
/// a closing NOT at the live boundary, and performs the NOT-pair
/// cancellation agreed with the planner.
struct EventBuilder {
    events: Vec<Event>,
    boundary_nots: BTreeMap<usize, usize>,
}

impl EventBuilder {
    fn new() -> Self {
        EventBuilder { events: Vec::new(), boundary_nots: BTreeMap::new() }
    }

    fn boundary(&self) -> BTreeSet<usize> {
        self.boundary_nots.keys().copied().collect()
    }

    fn delay(&mut self, seconds: f64) {
        if seconds <= 0.0 {
            return;
        }
        self.boundary_nots.clear();
        if let Some(Event::Delay { seconds: prev }) = self.events.last_mut() {
            *prev += seconds;
        } else {
            self.events.push(Event::Delay { seconds });
        }
    }

    fn pulses(&mut self, pulses: Vec<Pulse>, closing_nots: bool) {
        if pulses.is_empty() {
            return;
        }
        let idx = self.events.len();
        for p in &pulses {
            if closing_nots && p.is_not() {
                self.boundary_nots.insert(p.qubit, idx);
            } else {
                self.boundary_nots.remove(&p.qubit);
            }
        }
        self.events.push(Event::Pulses { pulses });
    }

    /// Remove the boundary NOT of `qubit`; its partner at the start of
    /// the new period is simply never emitted.
    fn cancel_boundary_not(&mut self, qubit: usize) {
        let idx = self.boundary_nots.remove(&qubit).expect("cancelable boundary NOT");
        if let Event::Pulses { pulses } = &mut self.events[idx] {
            pulses.retain(|p| !(p.qubit == qubit && p.is_not()));
        }
    }

    fn emit_step(&mut self, step: &RealizationStep) {
        if step.is_empty() {
            return;
        }
        for q in &step.cancel_with_boundary {
            self.cancel_boundary_not(*q);
        }
        let mut now = 0.0;
        for (t, qubits) in step.not_groups() {
            self.delay(t - now);
            now = t;
            let pulses: Vec<Pulse> = qubits
                .into_iter()
                .filter(|q| !(now <= TIME_MERGE_TOL_S && step.cancel_with_boundary.contains(q)))
                .map(Pulse::not)
                .collect();
            // Only NOTs at the period end stay eligible as boundary
            // partners for the next period.
            let closing = (step.duration - now).abs() <= TIME_MERGE_TOL_S;
            self.pulses(pulses, closing);
        }
        self.delay(step.duration - now);
    }

    fn extend_events(&mut self, events: Vec<Event>) {
        for event in events {
            match event {
                Event::Delay { seconds } => self.delay(seconds),
                Event::Pulses { pulses } => self.pulses(pulses, false),
            }
        }
    }

    fn finish(self) -> Vec<Event> {
        let mut out: Vec<Event> = Vec::new();
        for event in self.events {
            match event {
                Event::Delay { seconds } if seconds <= 0.0 => {}
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
        out
    }
}

/// Signed net evolution time the control pair still needs, given the
/// ledger deficit interpreted through the optimizer reductions already
/// applied: deficits in (270, 360) stand for negative angles when the
/// negate pass is active.
fn signed_net_seconds(deficit_deg: f64, j_hz: f64, negate: bool) -> f64 {
    let mut e = deficit_deg;
    if is_zero_deg(e) {
        return 0.0;
    }
    if negate && e > 270.0 {
        e -= 360.0;
    }
    e / (180.0 * j_hz)
}

fn plan_from_nets(
    target: usize,
    nets: &BTreeMap<usize, f64>,
    front: &BTreeSet<usize>,
) -> RealizationStep {
    let mut taus = BTreeMap::new();
    for (q, net) in nets {
        taus.insert(*q, net.abs());
    }
    let duration = taus.values().copied().fold(0.0, f64::max);
    let mut not_times = BTreeMap::new();
    let mut reversed = BTreeSet::new();
    let mut cancel_with_boundary = BTreeSet::new();
    if duration > 0.0 {
        for (q, net) in nets {
            let tau = net.abs();
            if *net < 0.0 {
                reversed.insert(*q);
            }
            if *net >= 0.0 && tau == duration {
                continue; // full-period evolution, no NOTs
            }
            let use_front = front.contains(q);
            let times = match (*net >= 0.0, use_front) {
                (true, false) => ((duration + tau) / 2.0, duration),
                (true, true) => (0.0, (duration - tau) / 2.0),
                (false, false) => ((duration - tau) / 2.0, duration),
                (false, true) => (0.0, (duration + tau) / 2.0),
            };
            if use_front {
                cancel_with_boundary.insert(*q);
            }
            not_times.insert(*q, times);
        }
    }
    RealizationStep { target, duration, taus, not_times, reversed, cancel_with_boundary }
}

/// Plan the evolution period before a single-qubit gate, with no
/// optimizations: tau_i = deficit/(180 J); T = max tau_i; controls at
/// the maximum evolve freely, others get NOT pairs at {(T+tau)/2, T}.
pub fn plan_realization(
    ledger: &PhaseLedger,
    device: &DeviceModel,
    target: usize,
) -> RealizationStep {
    let mut nets = BTreeMap::new();
    for control in (0..ledger.n_qubits()).filter(|&c| c != target) {
        let pair = Pair::new(control, target);
        nets.insert(control, signed_net_seconds(ledger.deficit(pair), device.coupling_hz(pair), false));
    }
    plan_from_nets(target, &nets, &BTreeSet::new())
}

/// Optimizer-aware planning; applies mod-180 and negate reductions to
/// the ledger, then plans with signed placements. Boundary qubits in
/// `front` get their NOT pairs slid to the period start.
///
/// Negation is count-preserving: if the period length would be set
/// exclusively by negated controls, the lowest-indexed one falls back
/// to its positive mod-180 angle. A negated control at the maximum
/// would need a fresh NOT pair where the unoptimized plan has none;
/// reverting it keeps the NOT count monotone at the price of a period
/// up to 180 degrees equivalent instead of 90.
pub(crate) fn plan_with_reductions(
    ledger: &mut PhaseLedger,
    device: &DeviceModel,
    target: usize,
    opt: &OptimizationOptions,
    front_candidates: &BTreeSet<usize>,
) -> RealizationStep {
    let opt = opt.normalized();
    struct Candidate {
        pair: Pair,
        j_hz: f64,
        /// Deficit after the mod-180 reduction, [0, 180) when active.
        d_mod: f64,
        /// Half-turn reductions to book against the ledger.
        reductions: u32,
        /// Chosen signed evolution angle, degrees.
        e: f64,
    }
    let mut cands: BTreeMap<usize, Candidate> = BTreeMap::new();
    for control in (0..ledger.n_qubits()).filter(|&c| c != target) {
        let pair = Pair::new(control, target);
        let d0 = ledger.deficit(pair);
        let (mut d_mod, mut reductions) = (d0, 0);
        let mut e;
        if !is_zero_deg(d0) {
            if opt.mod180 && d0 >= 180.0 {
                d_mod = d0 - 180.0;
                reductions = 1;
            }
            e = d_mod;
            if opt.negate && !is_zero_deg(d_mod) {
                let (folded, reversed) = negate_to_quarter(d_mod);
                if reversed {
                    e = folded;
                    reductions += 1;
                }
            }
        } else {
            e = 0.0;
        }
        cands.insert(control, Candidate { pair, j_hz: device.coupling_hz(pair), d_mod, reductions, e });
    }

    // Revert negations that would put NOTs on an otherwise-free control.
    loop {
        let duration = cands
            .values()
            .map(|c| (c.e / (180.0 * c.j_hz)).abs())
            .fold(0.0, f64::max);
        if duration == 0.0 {
            break;
        }
        let mut revert: Option<usize> = None;
        let mut free_at_max = false;
        for (q, c) in &cands {
            let net = c.e / (180.0 * c.j_hz);
            if net.abs() != duration {
                continue;
            }
            if net >= 0.0 {
                free_at_max = true;
                break;
            }
            if c.e < 0.0 && revert.is_none() {
                revert = Some(*q);
            }
        }
        match (free_at_max, revert) {
            (true, _) | (false, None) => break,
            (false, Some(q)) => {
                let c = cands.get_mut(&q).expect("candidate");
                c.e = c.d_mod;
                c.reductions -= 1;
            }
        }
    }

    let mut nets = BTreeMap::new();
    for (q, c) in &cands {
        for _ in 0..c.reductions {
            ledger.half_turn_reduction(c.pair);
        }
        nets.insert(*q, c.e / (180.0 * c.j_hz));
    }

    let mut wants_front = BTreeSet::new();
    if opt.cancel_nots {
        let duration = nets.values().map(|v| v.abs()).fold(0.0, f64::max);
        if duration > 0.0 {
            for (q, net) in &nets {
                // Only controls that will actually carry NOTs can cancel.
                let carries_nots = !(*net >= 0.0 && net.abs() == duration);
                if carries_nots && front_candidates.contains(q) {
                    wants_front.insert(*q);
                }
            }
        }
    }
    plan_from_nets(target, &nets, &wants_front)
}

/// Execute a planned step standalone: returns the emitted events and
/// advances the ledger over the step's timeline. Deficits involving the
/// target must come out below tolerance.
pub fn execute_step(
    ledger: &mut PhaseLedger,
    device: &DeviceModel,
    step: &RealizationStep,
) -> Result<Vec<Event>, CompileError> {
    let mut builder = EventBuilder::new();
    builder.emit_step(step);
    advance_checked(ledger, device, step)?;
    Ok(builder.finish())
}

fn advance_checked(
    ledger: &mut PhaseLedger,
    device: &DeviceModel,
    step: &RealizationStep,
) -> Result<(), CompileError> {
    if !step.is_empty() {
        ledger.advance(device, &step.timeline());
    }
    ledger.assert_target_clear(step.target)?;
    ledger.snap_target_deficits(step.target);
    Ok(())
}

/// Compile a gate network for a device.
pub fn compile(
    network: &GateNetwork,
    device: &DeviceModel,
    options: &CompileOptions,
) -> Result<CompileResult, CompileError> {
    if network.n_qubits != device.n_qubits() {
        return Err(CompileError::QubitMismatch {
            circuit: network.n_qubits,
            device: device.n_qubits(),
        });
    }
    let opt = options.opt.normalized();
    let mut ledger = PhaseLedger::new(network.n_qubits);
    ledger.round_degrees = options.round_degrees;
    let mut builder = EventBuilder::new();
    let mut trace: Vec<TracePoint> = Vec::new();

    for gate in normalize(network) {
        match gate {
            Gate::Coupling { q_a, q_b, angle_deg } => {
                ledger.request_coupling(Pair::new(q_a, q_b), angle_deg);
            }
            Gate::ControlledPhase { q_a, q_b, phi_deg } => {
                let d = decompose_cphase(phi_deg);
                ledger.request_coupling(Pair::new(q_a, q_b), d.coupling_deg);
                ledger.apply_frame(q_a, d.frame_deg);
                ledger.apply_frame(q_b, d.frame_deg);
                ledger.add_global_phase(d.global_phase_deg);
            }
            Gate::FrameZ { qubit, angle_deg } => {
                ledger.apply_frame(qubit, angle_deg);
            }
            Gate::SingleQubit { qubit, axis_deg, angle_deg } => {
                let boundary = builder.boundary();
                let step =
                    plan_with_reductions(&mut ledger, device, qubit, &opt, &boundary);
                if !step.is_empty() {
                    builder.emit_step(&step);
                    advance_checked(&mut ledger, device, &step)?;
                    trace.push(TracePoint {
                        label: trace_label(trace.len()),
                        angles_deg: ledger.achieved_map(),
                        detail: TraceDetail::Realization {
                            target: qubit,
                            duration: step.duration,
                            taus: step.taus.clone(),
                            not_times: step.not_times.clone(),
                        },
                    });
                } else {
                    advance_checked(&mut ledger, device, &step)?;
                }
                ledger.reset_pair_angles_on_gate(qubit)?;
                let axis = ledger.shift_pulse_axis(qubit, axis_deg);
                builder.pulses(vec![Pulse { qubit, axis_deg: axis, angle_deg }], false);
                trace.push(TracePoint {
                    label: trace_label(trace.len()),
                    angles_deg: ledger.achieved_map(),
                    detail: TraceDetail::Pulse { qubit },
                });
            }
        }
    }

    if options.flush {
        flush_into(&mut ledger, device, &opt, &mut builder, &mut trace)?;
    }

    let mut schedule = PulseSchedule {
        n_qubits: network.n_qubits,
        events: builder.finish(),
        final_frames_deg: ledger.frames().to_vec(),
        residual_deficits_deg: ledger.residual_deficits(),
        global_phase_deg: ledger.global_phase_deg(),
    };
    if opt.cancel_nots {
        schedule = crate::optimizer::cancel_not_pairs(schedule);
    }
    Ok(CompileResult { schedule, trace })
}

/// Emit one Hadamard-isolated refocusing period per residual pair,
/// leaving every deficit at zero.
pub fn flush(
    ledger: &mut PhaseLedger,
    device: &DeviceModel,
    opt: &OptimizationOptions,
) -> Result<Vec<Event>, CompileError> {
    let mut builder = EventBuilder::new();
    let mut trace = Vec::new();
    flush_into(ledger, device, &opt.normalized(), &mut builder, &mut trace)?;
    Ok(builder.finish())
}

fn flush_into(
    ledger: &mut PhaseLedger,
    device: &DeviceModel,
    opt: &OptimizationOptions,
    builder: &mut EventBuilder,
    trace: &mut Vec<TracePoint>,
) -> Result<(), CompileError> {
    for pair in device.pairs() {
        let mut d = ledger.deficit(pair);
        if is_zero_deg(d) {
            continue;
        }
        if opt.mod180 && d >= 180.0 {
            ledger.half_turn_reduction(pair);
            d = ledger.deficit(pair);
        }
        if opt.negate && !is_zero_deg(d) {
            let (_, reversed) = negate_to_quarter(d);
            if reversed {
                ledger.half_turn_reduction(pair);
                d = ledger.deficit(pair);
            }
        }
        let net = signed_net_seconds(d, device.coupling_hz(pair), opt.negate);
        if net == 0.0 {
            continue;
        }
        let (events, timeline) =
            isolation_period(device.n_qubits(), pair, net.abs(), net < 0.0);
        builder.extend_events(events);
        ledger.advance(device, &timeline);
        if !is_zero_deg(ledger.deficit(pair)) {
            return Err(CompileError::Internal(TrackerError::ResetWithNonzeroDeficit {
                target: pair.lo(),
                pair,
                deficit_deg: ledger.deficit(pair),
            }));
        }
        trace.push(TracePoint {
            label: trace_label(trace.len()),
            angles_deg: ledger.achieved_map(),
            detail: TraceDetail::FlushPeriod { pair, duration: timeline.duration },
        });
    }
    ledger.snap_all_clear_deficits();
    Ok(())
}

/// Refocusing period that retains exactly one coupling: the period is
/// split into m equal slots (m the smallest power of two >= n); each
/// qubit follows a row of the order-m Hadamard matrix, the selected pair
/// sharing row 0; NOTs sit at slot boundaries where a row changes sign,
/// plus closing NOTs returning every sign to +. Distinct rows are
/// orthogonal, so every non-selected pair averages to exactly zero.
pub fn hadamard_refocus(device: &DeviceModel, pair: Pair, angle_deg: f64) -> Vec<Event> {
    debug_assert!((0.0..360.0).contains(&angle_deg));
    let net = signed_net_seconds(norm_deg(angle_deg), device.coupling_hz(pair), false);
    if net == 0.0 {
        return Vec::new();
    }
    isolation_period(device.n_qubits(), pair, net.abs(), net < 0.0).0
}

/// Row signs for qubit `q` when isolating `pair` in an n-qubit device.
/// Exposed for the rational-arithmetic orthogonality checks.
pub fn isolation_row(n: usize, pair: Pair, q: usize, reversed: bool) -> Vec<i32> {
    let m = n.next_power_of_two().max(2);
    let row = if pair.contains(q) {
        0
    } else {
        // Rows 1.. assigned to the remaining qubits in index order.
        1 + (0..q).filter(|k| !pair.contains(*k)).count()
    };
    (0..m)
        .map(|s| {
            let sign = if (row & s).count_ones() % 2 == 0 { 1 } else { -1 };
            if reversed && q == pair.hi() {
                -sign
            } else {
                sign
            }
        })
        .collect()
}

fn isolation_period(
    n: usize,
    pair: Pair,
    duration: f64,
    reversed: bool,
) -> (Vec<Event>, SignTimeline) {
    let m = n.next_power_of_two().max(2);
    let mut timeline = SignTimeline::new(duration);
    // boundary index -> flipping qubits; index m is the closing edge.
    let mut boundaries: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for q in 0..n {
        let row = isolation_row(n, pair, q, reversed);
        let mut sign = 1;
        for (s, row_sign) in row.iter().enumerate() {
            if *row_sign != sign {
                boundaries.entry(s).or_default().push(q);
                sign = *row_sign;
            }
        }
        if sign < 0 {
            boundaries.entry(m).or_default().push(q);
        }
    }
    let mut events = Vec::new();
    let mut now = 0.0;
    for (s, qubits) in &boundaries {
        let t = duration * *s as f64 / m as f64;
        if t - now > 0.0 {
            events.push(Event::Delay { seconds: t - now });
        }
        now = t;
        events.push(Event::Pulses { pulses: qubits.iter().map(|q| Pulse::not(*q)).collect() });
        for q in qubits {
            timeline.add_flip(*q, t);
        }
    }
    if duration - now > 0.0 {
        events.push(Event::Delay { seconds: duration - now });
    }
    (events, timeline)
}

/// Comparison baseline: every coupling gate is realized immediately by a
/// Hadamard-isolation period; nothing is tracked lazily, so single-qubit
/// gates never need a realization period.
pub fn compile_hadamard_baseline(
    network: &GateNetwork,
    device: &DeviceModel,
) -> Result<CompileResult, CompileError> {
    if network.n_qubits != device.n_qubits() {
        return Err(CompileError::QubitMismatch {
            circuit: network.n_qubits,
            device: device.n_qubits(),
        });
    }
    let mut ledger = PhaseLedger::new(network.n_qubits);
    let mut builder = EventBuilder::new();
    let mut trace: Vec<TracePoint> = Vec::new();

    let realize_now = |ledger: &mut PhaseLedger,
                           builder: &mut EventBuilder,
                           trace: &mut Vec<TracePoint>,
                           pair: Pair|
     -> Result<(), CompileError> {
        let d = ledger.deficit(pair);
        if is_zero_deg(d) {
            ledger.snap_target_deficits(pair.lo());
            return Ok(());
        }
        let net = signed_net_seconds(d, device.coupling_hz(pair), false);
        let (events, timeline) = isolation_period(network.n_qubits, pair, net.abs(), net < 0.0);
        builder.extend_events(events);
        ledger.advance(device, &timeline);
        if !is_zero_deg(ledger.deficit(pair)) {
            return Err(CompileError::Internal(TrackerError::ResetWithNonzeroDeficit {
                target: pair.lo(),
                pair,
                deficit_deg: ledger.deficit(pair),
            }));
        }
        ledger.snap_all_clear_deficits();
        trace.push(TracePoint {
            label: trace_label(trace.len()),
            angles_deg: ledger.achieved_map(),
            detail: TraceDetail::FlushPeriod { pair, duration: timeline.duration },
        });
        Ok(())
    };

    for gate in normalize(network) {
        match gate {
            Gate::Coupling { q_a, q_b, angle_deg } => {
                let pair = Pair::new(q_a, q_b);
                ledger.request_coupling(pair, angle_deg);
                realize_now(&mut ledger, &mut builder, &mut trace, pair)?;
            }
            Gate::ControlledPhase { q_a, q_b, phi_deg } => {
                let d = decompose_cphase(phi_deg);
                let pair = Pair::new(q_a, q_b);
                ledger.request_coupling(pair, d.coupling_deg);
                ledger.apply_frame(q_a, d.frame_deg);
                ledger.apply_frame(q_b, d.frame_deg);
                ledger.add_global_phase(d.global_phase_deg);
                realize_now(&mut ledger, &mut builder, &mut trace, pair)?;
            }
            Gate::FrameZ { qubit, angle_deg } => ledger.apply_frame(qubit, angle_deg),
            Gate::SingleQubit { qubit, axis_deg, angle_deg } => {
                ledger.reset_pair_angles_on_gate(qubit)?;
                let axis = ledger.shift_pulse_axis(qubit, axis_deg);
                builder.pulses(vec![Pulse { qubit, axis_deg: axis, angle_deg }], false);
                trace.push(TracePoint {
                    label: trace_label(trace.len()),
                    angles_deg: ledger.achieved_map(),
                    detail: TraceDetail::Pulse { qubit },
                });
            }
        }
    }

    Ok(CompileResult {
        schedule: PulseSchedule {
            n_qubits: network.n_qubits,
            events: builder.finish(),
            final_frames_deg: ledger.frames().to_vec(),
            residual_deficits_deg: ledger.residual_deficits(),
            global_phase_deg: ledger.global_phase_deg(),
        },
        trace,
    })
}

/// Counts over a schedule; `p` needs the source network.
#[derive(Clone, Copy, Debug)]
pub struct ScheduleStats {
    pub pulse_count: usize,
    pub not_count: usize,
    pub total_duration_s: f64,
    pub target_gates: Option<usize>,
}

pub fn stats(schedule: &PulseSchedule, network: Option<&GateNetwork>) -> ScheduleStats {
    ScheduleStats {
        pulse_count: schedule.pulse_count(),
        not_count: schedule.not_count(),
        total_duration_s: schedule.total_delay_seconds(),
        target_gates: network.map(|n| n.target_gate_count()),
    }
}

/// Sign timeline of a whole event list, counting NOT pulses as flips.
pub fn timeline_of_events(events: &[Event]) -> SignTimeline {
    let mut flips: Vec<(usize, f64)> = Vec::new();
    let mut now = 0.0;
    for event in events {
        match event {
            Event::Delay { seconds } => now += seconds,
            Event::Pulses { pulses } => {
                for p in pulses {
                    if p.is_not() {
                        flips.push((p.qubit, now));
                    }
                }
            }
        }
    }
    let mut tl = SignTimeline::new(now);
    for (q, t) in flips {
        tl.add_flip(q, t);
    }
    tl
}

// --- schedule JSON ---

#[derive(Serialize, Deserialize)]
struct PulseFile {
    q: usize,
    axis_deg: f64,
    angle_deg: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EventFile {
    Delay { delay_us: f64 },
    Pulses { pulses: Vec<PulseFile> },
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    device: serde_json::Value,
    events: Vec<EventFile>,
    final_frames_deg: BTreeMap<String, f64>,
    residual_deficits_deg: BTreeMap<String, f64>,
    global_phase_deg: f64,
}

impl PulseSchedule {
    /// Serialize with the embedded device; times in microseconds and
    /// angles in degrees, both at 3 decimals.
    pub fn to_json(&self, device: &DeviceModel) -> String {
        let events = self
            .events
            .iter()
            .map(|e| match e {
                Event::Delay { seconds } => EventFile::Delay { delay_us: round_us3(*seconds) },
                Event::Pulses { pulses } => EventFile::Pulses {
                    pulses: pulses
                        .iter()
                        .map(|p| PulseFile {
                            q: p.qubit,
                            axis_deg: round_deg3(p.axis_deg),
                            angle_deg: round_deg3(p.angle_deg),
                        })
                        .collect(),
                },
            })
            .collect();
        let file = ScheduleFile {
            device: device.to_json_value(),
            events,
            final_frames_deg: self
                .final_frames_deg
                .iter()
                .enumerate()
                .map(|(q, f)| (q.to_string(), round_deg3(*f)))
                .collect(),
            residual_deficits_deg: self
                .residual_deficits_deg
                .iter()
                .map(|(p, d)| (p.to_string(), round_deg3(*d)))
                .collect(),
            global_phase_deg: round_deg3(self.global_phase_deg),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("schedule serialization");
        text.push('\n');
        text
    }

    /// Parse a schedule file; returns the schedule and embedded device.
    pub fn from_json(text: &str) -> Result<(PulseSchedule, DeviceModel), ScheduleIoError> {
        let file: ScheduleFile = serde_json::from_str(text)?;
        let device = DeviceModel::from_json(&file.device.to_string())?;
        let n = device.n_qubits();
        let mut events = Vec::new();
        for e in file.events {
            events.push(match e {
                EventFile::Delay { delay_us } => Event::Delay { seconds: delay_us * 1e-6 },
                EventFile::Pulses { pulses } => {
                    let pulses: Vec<Pulse> = pulses
                        .into_iter()
                        .map(|p| Pulse { qubit: p.q, axis_deg: p.axis_deg, angle_deg: p.angle_deg })
                        .collect();
                    for p in &pulses {
                        if p.qubit >= n {
                            return Err(ScheduleIoError::QubitOutOfRange { q: p.qubit, n });
                        }
                    }
                    Event::Pulses { pulses }
                }
            });
        }
        let mut final_frames = vec![0.0; n];
        for (key, v) in file.final_frames_deg {
            let q: usize =
                key.parse().map_err(|_| ScheduleIoError::BadQubitKey(key.clone()))?;
            if q >= n {
                return Err(ScheduleIoError::QubitOutOfRange { q, n });
            }
            final_frames[q] = v;
        }
        let mut residual = BTreeMap::new();
        for (key, v) in file.residual_deficits_deg {
            let (a, b) = key
                .split_once('-')
                .ok_or_else(|| ScheduleIoError::BadPairKey(key.clone()))?;
            let a: usize = a.parse().map_err(|_| ScheduleIoError::BadPairKey(key.clone()))?;
            let b: usize = b.parse().map_err(|_| ScheduleIoError::BadPairKey(key.clone()))?;
            if a == b || a.max(b) >= n {
                return Err(ScheduleIoError::BadPairKey(key));
            }
            residual.insert(Pair::new(a, b), v);
        }
        Ok((
            PulseSchedule {
                n_qubits: n,
                events,
                final_frames_deg: final_frames,
                residual_deficits_deg: residual,
                global_phase_deg: file.global_phase_deg,
            },
            device,
        ))
    }
}
