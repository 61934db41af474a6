//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measurements (run with `--nocapture` to see them).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isingc::oracle;
use isingc::scheduler::{
    compile, compile_hadamard_baseline, hadamard_refocus, isolation_row, stats, timeline_of_events,
    CompileOptions, CompileResult, TraceDetail, TracePoint,
};
use isingc::simulator::{circuit_unitary, unitary_distance, verify_measurement, verify_unitary};
use isingc::tracker::{PhaseLedger, SignTimeline};
use isingc::{
    plan_realization, plan_with_signs, DeviceModel, Gate, GateNetwork, OptimizationOptions, Pair,
};

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn fixture_network() -> GateNetwork {
    let text = std::fs::read_to_string(repo_path("fixtures/fig2.qc")).unwrap();
    isingc::parse_circuit(&text).unwrap()
}

fn fixture_device_with_j03(j03: f64) -> DeviceModel {
    let text = std::fs::read_to_string(repo_path("fixtures/fig3-device.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["couplings_hz"]["0-3"] = serde_json::json!(j03);
    DeviceModel::from_json(&v.to_string()).unwrap()
}

fn fixture_device() -> DeviceModel {
    let text = std::fs::read_to_string(repo_path("fixtures/fig3-device.json")).unwrap();
    DeviceModel::from_json(&text).unwrap()
}

#[derive(serde::Deserialize)]
struct Golden {
    points: Vec<String>,
    angles_deg: BTreeMap<String, Vec<f64>>,
    bold: BTreeMap<String, Vec<String>>,
    times_us: BTreeMap<String, f64>,
}

fn golden() -> Golden {
    let text = std::fs::read_to_string(repo_path("fixtures/table1-golden.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn pair_of_key(key: &str) -> Pair {
    let (a, b) = key.split_once('-').unwrap();
    Pair::new(a.parse().unwrap(), b.parse().unwrap())
}

fn assert_trace_matches_golden(trace: &[TracePoint], golden: &Golden, tol_deg: f64) {
    assert_eq!(trace.len(), golden.points.len(), "trace has {} points", trace.len());
    for (idx, label) in golden.points.iter().enumerate() {
        assert_eq!(&trace[idx].label, label);
        for (key, column) in &golden.angles_deg {
            let pair = pair_of_key(key);
            let got = trace[idx].angles_deg[&pair];
            let want = column[idx];
            let dev = (got - want).abs().min((got - want - 360.0).abs());
            assert!(dev <= tol_deg, "point {label} pair {key}: got {got}, want {want}");
        }
        // Boldface entries are exactly-set coupling angles to the target.
        if let Some(bold_pairs) = golden.bold.get(label) {
            for key in bold_pairs {
                let pair = pair_of_key(key);
                let got = trace[idx].angles_deg[&pair];
                let want = golden.angles_deg[key][idx];
                let dev = (got - want).abs().min((got - want - 360.0).abs());
                assert!(dev < 1e-6, "bold point {label} pair {key}: got {got}, want {want}");
            }
        }
    }
}

struct PeriodInfo {
    duration: f64,
    taus: BTreeMap<usize, f64>,
    not_times: BTreeMap<usize, (f64, f64)>,
}

fn realization_at(trace: &[TracePoint], label: &str) -> PeriodInfo {
    let point = trace.iter().find(|p| p.label == label).unwrap();
    match &point.detail {
        TraceDetail::Realization { duration, taus, not_times, .. } => PeriodInfo {
            duration: *duration,
            taus: taus.clone(),
            not_times: not_times.clone(),
        },
        other => panic!("trace point {label} is {other:?}, not a realization"),
    }
}

// --- shared random corpus -------------------------------------------------

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    loop {
        let b = rng.gen_range(0..n);
        if b != a {
            return (a, b);
        }
    }
}

/// Random instance in the regime the pulse-count comparison assumes:
/// coupling and single-qubit gates alternate, so every instance has at
/// least one coupling gate followed by a target gate.
fn random_instance(rng: &mut ChaCha8Rng) -> (GateNetwork, DeviceModel) {
    let n = rng.gen_range(2..=5);
    let mut j = BTreeMap::new();
    for p in Pair::all(n) {
        j.insert(p, rng.gen_range(30.0..120.0));
    }
    let device = DeviceModel::new(n, j, false).unwrap();
    let units = rng.gen_range(1..=3);
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    for _ in 0..units {
        let (q_a, q_b) = random_pair(rng, n);
        let angle = rng.gen_range(0.0..360.0);
        layers.push(vec![if rng.gen_bool(0.7) {
            Gate::Coupling { q_a, q_b, angle_deg: angle }
        } else {
            Gate::ControlledPhase { q_a, q_b, phi_deg: angle }
        }]);
        if rng.gen_bool(0.25) {
            let (q_a, q_b) = random_pair(rng, n);
            layers.push(vec![Gate::Coupling { q_a, q_b, angle_deg: rng.gen_range(0.0..360.0) }]);
        }
        if rng.gen_bool(0.2) {
            layers.push(vec![Gate::FrameZ {
                qubit: rng.gen_range(0..n),
                angle_deg: rng.gen_range(0.0..360.0),
            }]);
        }
        layers.push(vec![Gate::SingleQubit {
            qubit: rng.gen_range(0..n),
            axis_deg: rng.gen_range(0.0..360.0),
            angle_deg: rng.gen_range(0.0..360.0),
        }]);
    }
    (GateNetwork::new(n, layers).unwrap(), device)
}

fn corpus() -> Vec<(GateNetwork, DeviceModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1519);
    (0..200).map(|_| random_instance(&mut rng)).collect()
}

fn effective_subsets() -> Vec<(&'static str, OptimizationOptions)> {
    let o = |c, m, g| OptimizationOptions { cancel_nots: c, mod180: m, negate: g };
    vec![
        ("none", o(false, false, false)),
        ("cancel", o(true, false, false)),
        ("mod180", o(false, true, false)),
        ("cancel+mod180", o(true, true, false)),
        ("mod180+negate", o(false, true, true)),
        ("all", o(true, true, true)),
    ]
}

fn compile_with(
    net: &GateNetwork,
    dev: &DeviceModel,
    opt: OptimizationOptions,
    flush: bool,
) -> CompileResult {
    compile(net, dev, &CompileOptions { flush, opt, round_degrees: false }).unwrap()
}

// --- criteria ---------------------------------------------------------------

#[test]
fn criterion_1_golden_worked_example() {
    let start = Instant::now();
    let net = fixture_network();
    let device = fixture_device();
    let golden = golden();

    // Tracked-angle table, exact arithmetic.
    let exact = compile(&net, &device, &CompileOptions::default()).unwrap();
    assert_trace_matches_golden(&exact.trace, &golden, 1.0);

    // The quoted times embed the worked example's hand rounding: tracked
    // angles are rounded to whole degrees before deficits are re-derived
    // (216 = 360 - 144 where the exact angle is 143.571...). The
    // round-degrees compile reproduces that arithmetic; its table must
    // still match.
    let rounded = compile(
        &net,
        &device,
        &CompileOptions { round_degrees: true, ..Default::default() },
    )
    .unwrap();
    assert_trace_matches_golden(&rounded.trace, &golden, 1.0);

    let t = &golden.times_us;
    let us = 1e6;
    let b = realization_at(&rounded.trace, "b");
    let d = realization_at(&rounded.trace, "d");
    let f = realization_at(&rounded.trace, "f");
    let checks = [
        ("period_b", b.duration * us),
        ("tau_12_at_d", d.taus[&1] * us),
        ("period_d", d.duration * us),
        ("not_q1_at_d", d.not_times[&1].0 * us),
        ("period_f", f.duration * us),
        ("not_q2_at_f", f.not_times[&2].0 * us),
    ];
    for (name, got) in checks {
        let want = t[name];
        assert!((got - want).abs() <= 1.0, "{name}: got {got:.3} us, want {want} us");
    }
    // The quoted 9288 us net time for pair {0,1} is derived in the text
    // from the microsecond-rounded NOT times; reproduce that arithmetic
    // from the compiled schedule.
    let mut tl = SignTimeline::new((d.duration * us).round() * 1e-6);
    tl.add_flip(0, (d.not_times[&0].0 * us).round() * 1e-6);
    tl.add_flip(0, (d.not_times[&0].1 * us).round() * 1e-6);
    tl.add_flip(1, (d.not_times[&1].0 * us).round() * 1e-6);
    tl.add_flip(1, (d.not_times[&1].1 * us).round() * 1e-6);
    let net01 = tl.net_time(Pair::new(0, 1)) * us;
    assert!((net01 - t["net_01_at_d"]).abs() <= 1.0, "net01 {net01:.3} us");
    // And the exact-arithmetic identity behind it: net = T - tau_12.
    let tl_exact = SignTimeline::new(d.duration).tap_flips(&d.not_times);
    let net_exact = tl_exact.net_time(Pair::new(0, 1));
    assert!((net_exact - (d.duration - d.taus[&1])).abs() < 1e-12);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 (golden worked example): PASS - 42 table entries within 1 deg \
         (exact and hand-rounded modes), 7 quoted times within 1 us, runtime {elapsed:?}"
    );
}

trait TapFlips {
    fn tap_flips(self, not_times: &BTreeMap<usize, (f64, f64)>) -> Self;
}

impl TapFlips for SignTimeline {
    fn tap_flips(mut self, not_times: &BTreeMap<usize, (f64, f64)>) -> Self {
        for (q, (t1, t2)) in not_times {
            self.add_flip(*q, *t1);
            self.add_flip(*q, *t2);
        }
        self
    }
}

#[test]
fn criterion_2_j03_independence() {
    let net = fixture_network();
    let golden = golden();
    let mut tables: Vec<String> = Vec::new();
    let mut event_lists = Vec::new();
    for j03 in [10.0, 55.0, 200.0] {
        let device = fixture_device_with_j03(j03);
        for round_degrees in [false, true] {
            let result =
                compile(&net, &device, &CompileOptions { round_degrees, ..Default::default() })
                    .unwrap();
            assert_trace_matches_golden(&result.trace, &golden, 1.0);
            if round_degrees {
                tables.push(isingc::render::format_trace_table(&result.trace, 4));
                event_lists.push(result.schedule.events.clone());
            }
        }
    }
    assert!(tables.windows(2).all(|w| w[0] == w[1]), "trace output differs across J03");
    assert!(event_lists.windows(2).all(|w| w[0] == w[1]), "schedules differ across J03");
    println!(
        "ACCEPTANCE 2 (J03 independence): PASS - identical traces and schedules for J03 in {{10, 55, 200}} Hz"
    );
}

#[test]
fn criterion_3_unitary_equivalence() {
    let start = Instant::now();
    let mut cases = corpus();
    cases.push((fixture_network(), fixture_device()));
    let subsets = effective_subsets();
    let mut worst = 0.0f64;
    let mut runs = 0usize;
    for (net, dev) in &cases {
        let u = circuit_unitary(net).unwrap();
        for (name, opt) in &subsets {
            let result = compile_with(net, dev, *opt, true);
            let report = verify_unitary(&u, &result.schedule, dev, 1e-9).unwrap();
            assert!(
                report.pass,
                "instance with {} qubits, subset {name}: distance {:.3e}",
                net.n_qubits, report.distance
            );
            worst = worst.max(report.distance);
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 3 (unitary equivalence): PASS - {runs} flush-mode verifications \
         (fixture + 200 random circuits x 6 flag subsets), worst distance {worst:.3e}, runtime {elapsed:?}"
    );
}

#[test]
fn criterion_4_measurement_mode() {
    let cases = corpus();
    let mut worst_dev = 0.0f64;
    let mut unitary_failures = 0usize;
    let mut max_unitary_distance = 0.0f64;
    for (net, dev) in &cases {
        let u = circuit_unitary(net).unwrap();
        let result = compile_with(net, dev, OptimizationOptions::NONE, false);
        let all: Vec<usize> = (0..net.n_qubits).collect();
        let report = verify_measurement(&u, &result.schedule, dev, &all, 1e-9).unwrap();
        assert!(report.pass, "measurement deviation {:.3e}", report.max_deviation);
        worst_dev = worst_dev.max(report.max_deviation);
        // Partial measurement is a coarsening and must also pass.
        let some = vec![0];
        let partial = verify_measurement(&u, &result.schedule, dev, &some, 1e-9).unwrap();
        assert!(partial.pass);
        let distance = unitary_distance(&u, &result.schedule, dev).unwrap();
        max_unitary_distance = max_unitary_distance.max(distance);
        if distance > 1e-3 {
            unitary_failures += 1;
        }
    }
    assert!(
        unitary_failures >= 1,
        "expected at least one instance with residual phases breaking unitary equivalence"
    );
    println!(
        "ACCEPTANCE 4 (measurement-mode equivalence): PASS - 200 no-flush compiles, \
         worst deviation {worst_dev:.3e}; {unitary_failures}/200 fail unitary mode without \
         flush (max distance {max_unitary_distance:.3e})"
    );
}

#[test]
fn criterion_5_pulse_count_bounds() {
    let cases = corpus();
    let mut comparisons = 0usize;
    let mut baseline_ratio_sum = 0.0f64;
    let mut baseline_periods = 0usize;
    for (net, dev) in &cases {
        let n = net.n_qubits;
        let lazy = compile_with(net, dev, OptimizationOptions::NONE, false);
        let s = stats(&lazy.schedule, Some(net));
        let p = s.target_gates.unwrap();
        assert!(p >= 1);
        assert!(
            s.not_count < 2 * n * p,
            "lazy NOT count {} not below 2*{n}*{p}",
            s.not_count
        );
        let baseline = compile_hadamard_baseline(net, dev).unwrap();
        let coupling_gates = isingc::normalize(net)
            .iter()
            .filter(|g| matches!(g, Gate::Coupling { .. } | Gate::ControlledPhase { .. }))
            .count();
        if coupling_gates > 0 {
            baseline_ratio_sum +=
                baseline.schedule.not_count() as f64 / coupling_gates as f64 / (n * n) as f64;
            baseline_periods += 1;
        }
        if n >= 4 && p >= 2 {
            assert!(
                baseline.schedule.not_count() > lazy.schedule.not_count(),
                "baseline {} NOTs vs lazy {} (n={n}, p={p})",
                baseline.schedule.not_count(),
                lazy.schedule.not_count()
            );
            comparisons += 1;
        }
    }
    assert!(comparisons >= 20, "only {comparisons} instances with n>=4, p>=2");
    println!(
        "ACCEPTANCE 5 (pulse-count bound): PASS - not_count < 2*n*p on all 200 instances; \
         baseline exceeds lazy on all {comparisons} instances with n>=4, p>=2; measured \
         baseline NOTs per refocusing period / n^2 = {:.2} (reported, not asserted)",
        baseline_ratio_sum / baseline_periods as f64
    );
}

#[test]
fn criterion_6_optimizer_properties() {
    let cases = corpus();

    // Each pass individually preserves unitary-mode verification.
    let singles = [
        ("cancel", OptimizationOptions { cancel_nots: true, ..OptimizationOptions::NONE }),
        ("mod180", OptimizationOptions { mod180: true, ..OptimizationOptions::NONE }),
        ("negate", OptimizationOptions { negate: true, mod180: true, cancel_nots: false }),
    ];
    for (net, dev) in &cases {
        let u = circuit_unitary(net).unwrap();
        for (name, opt) in &singles {
            let result = compile_with(net, dev, *opt, true);
            let report = verify_unitary(&u, &result.schedule, dev, 1e-9).unwrap();
            assert!(report.pass, "pass {name}: distance {:.3e}", report.distance);
        }
    }

    // Per-instance monotonicity of the core schedules (no flush; flush
    // periods depend on whatever residuals remain and are reported
    // separately below).
    let mut flush_duration_regressions = 0usize;
    for (net, dev) in &cases {
        let plain = compile_with(net, dev, OptimizationOptions::NONE, false);
        let optimized = compile_with(net, dev, OptimizationOptions::ALL, false);
        assert!(
            optimized.schedule.not_count() <= plain.schedule.not_count(),
            "NOT count grew: {} -> {}",
            plain.schedule.not_count(),
            optimized.schedule.not_count()
        );
        assert!(
            optimized.schedule.pulse_count() <= plain.schedule.pulse_count(),
            "pulse count grew"
        );
        let (d_plain, d_opt) =
            (plain.schedule.total_delay_seconds(), optimized.schedule.total_delay_seconds());
        assert!(d_opt <= d_plain + 1e-12, "duration grew: {d_plain} -> {d_opt}");

        let plain_flush = compile_with(net, dev, OptimizationOptions::NONE, true);
        let opt_flush = compile_with(net, dev, OptimizationOptions::ALL, true);
        if opt_flush.schedule.total_delay_seconds()
            > plain_flush.schedule.total_delay_seconds() + 1e-12
        {
            flush_duration_regressions += 1;
        }
    }

    // Duration-reduction factor over random realizations.
    let device = fixture_device();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0406);
    let negate = OptimizationOptions { mod180: true, negate: true, cancel_nots: false };
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for _ in 0..500 {
        let mut ledger = PhaseLedger::new(4);
        for control in 1..4 {
            ledger.request_coupling(Pair::new(0, control), rng.gen_range(0.0..360.0));
        }
        let unopt = plan_realization(&ledger, &device, 0);
        let opt = plan_with_signs(&mut ledger, &device, 0, &negate);
        assert!(opt.duration <= unopt.duration + 1e-15);
        if opt.duration > 0.0 {
            sum += unopt.duration / opt.duration;
            count += 1;
        }
    }
    let mean = sum / count as f64;
    assert!((2.0..=6.0).contains(&mean), "mean duration-reduction factor {mean:.2} outside [2,6]");
    println!(
        "ACCEPTANCE 6 (optimizer properties): PASS - each pass preserves verification; \
         core not_count/duration monotone on all 200 instances; mean duration-reduction \
         factor {mean:.2} in [2,6] over {count} realizations (flush-stage duration grew on \
         {flush_duration_regressions}/200 instances - residual sets differ between runs; \
         reported, not asserted)"
    );
}

#[test]
fn criterion_7_hadamard_isolation() {
    let mut checked_pairs = 0usize;
    for n in 2..=8usize {
        let mut j = BTreeMap::new();
        for p in Pair::all(n) {
            j.insert(p, 35.0 + 7.0 * p.lo() as f64 + 11.0 * p.hi() as f64);
        }
        let device = DeviceModel::new(n, j, false).unwrap();
        for selected in Pair::all(n) {
            let angle = 30.0 + ((selected.lo() * 37 + selected.hi() * 53) % 300) as f64;

            // Rational slot arithmetic: distinct Hadamard rows are
            // orthogonal, so non-selected slot sums are exactly zero.
            let m = n.next_power_of_two().max(2);
            for other in Pair::all(n) {
                let row_a = isolation_row(n, selected, other.lo(), false);
                let row_b = isolation_row(n, selected, other.hi(), false);
                let dot: i32 = row_a.iter().zip(&row_b).map(|(x, y)| x * y).sum();
                if other == selected {
                    assert_eq!(dot, m as i32);
                } else {
                    assert_eq!(dot, 0, "rows not orthogonal for {other} when isolating {selected}");
                }
            }

            let events = hadamard_refocus(&device, selected, angle);
            let tl = timeline_of_events(&events);
            for other in Pair::all(n) {
                let evolved = 180.0 * device.coupling_hz(other) * tl.net_time(other);
                if other == selected {
                    assert!(
                        (evolved - angle).abs() < 1e-9,
                        "selected {selected}: {evolved} vs {angle}"
                    );
                } else {
                    assert!(evolved.abs() < 1e-9, "bystander {other} evolved {evolved}");
                }
                // Brute-force cross-check of the sign integration.
                if n <= 5 || other == selected {
                    let oracle_net = oracle::sign_integrate(&tl, other);
                    let oracle_evolved = 180.0 * device.coupling_hz(other) * oracle_net;
                    let want = if other == selected { angle } else { 0.0 };
                    assert!(
                        (oracle_evolved - want).abs() < 0.01,
                        "oracle mismatch on {other}: {oracle_evolved} vs {want}"
                    );
                }
            }
            checked_pairs += 1;
        }
    }
    println!(
        "ACCEPTANCE 7 (Hadamard isolation): PASS - {checked_pairs} isolation periods over \
         n in 2..=8: non-selected evolution exactly 0 in slot arithmetic and < 1e-9 deg \
         tracked, selected within 1e-9 deg, oracle cross-check within 0.01 deg"
    );
}

#[test]
fn criterion_8_tracker_oracle_equivalence() {
    let start = Instant::now();
    const TRIALS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0881);
    let mut timelines = Vec::with_capacity(TRIALS);
    for _ in 0..TRIALS {
        let duration = rng.gen_range(0.5e-3..15e-3);
        let mut tl = SignTimeline::new(duration);
        for q in 0..2 {
            for _ in 0..rng.gen_range(0..=4) {
                tl.add_flip(q, rng.gen_range(0.0..duration));
            }
        }
        timelines.push(tl);
    }
    // 0.01 degrees at a reference coupling of 100 Hz.
    let j_ref = 100.0;
    let tol_seconds = 0.01 / (180.0 * j_ref);
    let pair = Pair::new(0, 1);
    let worst = std::thread::scope(|scope| {
        let chunks: Vec<_> = timelines.chunks(TRIALS / 8 + 1).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                scope.spawn(move || {
                    let mut worst = 0.0f64;
                    for tl in chunk {
                        let closed = tl.net_time(pair);
                        let integrated = oracle::sign_integrate(tl, pair);
                        worst = worst.max((closed - integrated).abs());
                    }
                    worst
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).fold(0.0, f64::max)
    });
    assert!(
        worst < tol_seconds,
        "worst disagreement {:.3e} s exceeds 0.01 deg at {j_ref} Hz",
        worst
    );
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 8 (tracker oracle equivalence): PASS - {TRIALS} random timelines, worst \
         disagreement {:.2e} deg-equivalent at {j_ref} Hz, runtime {elapsed:?}",
        worst * 180.0 * j_ref
    );
}
