//! Schedule rendering: ASCII and SVG timelines (one lane per qubit,
//! delays to scale) and the trace table mirroring the tracked-angle
//! tables of the worked example.

use crate::device::Pair;
use crate::scheduler::{Event, PulseSchedule, TraceDetail, TracePoint};

const ASCII_WIDTH: usize = 100;

/// Group positions of a schedule, split into periods at every
/// non-refocusing pulse group (a period ends where a rotation lands).
struct PeriodView {
    /// (start time, length) per period with at least one event.
    periods: Vec<(f64, f64)>,
    /// Within-period microsecond marks (NOT groups and period ends).
    marks: Vec<Vec<f64>>,
}

fn period_view(schedule: &PulseSchedule) -> PeriodView {
    let mut periods = Vec::new();
    let mut marks: Vec<Vec<f64>> = Vec::new();
    let mut start = 0.0;
    let mut now = 0.0;
    let mut current_marks: Vec<f64> = Vec::new();
    let mut open = false;
    for event in &schedule.events {
        match event {
            Event::Delay { seconds } => {
                now += seconds;
                open = true;
            }
            Event::Pulses { pulses } => {
                if pulses.iter().all(|p| p.is_not()) {
                    current_marks.push(now - start);
                    open = true;
                } else if open {
                    // A rotation closes the running period.
                    current_marks.push(now - start);
                    periods.push((start, now - start));
                    marks.push(std::mem::take(&mut current_marks));
                    start = now;
                    open = false;
                } else {
                    start = now;
                }
            }
        }
    }
    if open && now > start {
        current_marks.push(now - start);
        periods.push((start, now - start));
        marks.push(current_marks);
    }
    PeriodView { periods, marks }
}

/// ASCII timeline: `#` marks a NOT, `R` a rotation pulse, `=` scaled
/// free evolution. Period lengths and within-period NOT marks are
/// annotated in microseconds.
pub fn render_ascii(schedule: &PulseSchedule) -> String {
    let total = schedule.total_delay_seconds();
    let mut out = format!(
        "isingc schedule: {} qubits, {} events, total delay {:.3} us\n",
        schedule.n_qubits,
        schedule.events.len(),
        total * 1e6
    );
    if schedule.events.is_empty() {
        return out;
    }
    let scale = if total > 0.0 { (ASCII_WIDTH - 1) as f64 / total } else { 0.0 };
    let mut lanes = vec![vec![b'='; ASCII_WIDTH]; schedule.n_qubits];
    let mut now = 0.0;
    for event in &schedule.events {
        match event {
            Event::Delay { seconds } => now += seconds,
            Event::Pulses { pulses } => {
                let col = ((now * scale).round() as usize).min(ASCII_WIDTH - 1);
                for p in pulses {
                    lanes[p.qubit][col] = if p.is_not() { b'#' } else { b'R' };
                }
            }
        }
    }
    for (q, lane) in lanes.iter().enumerate() {
        out.push_str(&format!("q{q}: {}\n", String::from_utf8_lossy(lane)));
    }
    let view = period_view(schedule);
    if !view.periods.is_empty() {
        out.push_str("periods (us): ");
        let lens: Vec<String> =
            view.periods.iter().map(|(_, len)| format!("{:.0}", len * 1e6)).collect();
        out.push_str(&lens.join(" | "));
        out.push('\n');
        for (k, ms) in view.marks.iter().enumerate() {
            let marks: Vec<String> = ms.iter().map(|t| format!("{:.0}", t * 1e6)).collect();
            out.push_str(&format!("p{} marks (us): {}\n", k + 1, marks.join(" ")));
        }
    }
    out
}

/// SVG timeline with exactly one `<rect>` per pulse; lanes are `<line>`
/// elements so rect counts stay comparable to pulse counts.
pub fn render_svg(schedule: &PulseSchedule) -> String {
    let lane_height = 28.0;
    let margin = 40.0;
    let width = 900.0;
    let height = margin * 2.0 + lane_height * schedule.n_qubits as f64;
    let total = schedule.total_delay_seconds();
    let scale = if total > 0.0 { (width - 2.0 * margin) / total } else { 0.0 };
    let x_of = |t: f64| margin + t * scale;
    let y_of = |q: usize| margin + lane_height * (q as f64 + 0.5);

    let mut body = String::new();
    for q in 0..schedule.n_qubits {
        body.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            margin,
            y_of(q),
            width - margin,
            y_of(q)
        ));
        body.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">q{}</text>\n",
            8.0,
            y_of(q) + 4.0,
            q
        ));
    }
    let mut now = 0.0;
    for event in &schedule.events {
        match event {
            Event::Delay { seconds } => {
                let label_x = x_of(now + seconds / 2.0);
                body.push_str(&format!(
                    "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"middle\">{:.0}us</text>\n",
                    label_x,
                    margin - 8.0,
                    seconds * 1e6
                ));
                now += seconds;
            }
            Event::Pulses { pulses } => {
                for p in pulses {
                    let (w, fill) = if p.is_not() { (5.0, "black") } else { (8.0, "white") };
                    body.push_str(&format!(
                        "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"{w}\" height=\"{:.1}\" fill=\"{fill}\" stroke=\"black\"/>\n",
                        x_of(now) - w / 2.0,
                        y_of(p.qubit) - 9.0,
                        18.0
                    ));
                    if !p.is_not() {
                        body.push_str(&format!(
                            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"8\" text-anchor=\"middle\">{:.0}@{:.0}</text>\n",
                            x_of(now),
                            y_of(p.qubit) - 12.0,
                            p.angle_deg,
                            p.axis_deg
                        ));
                    }
                }
            }
        }
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n{body}</svg>\n"
    )
}

/// Trace table in the layout of the worked example: one row per pair,
/// one column per labeled point, entries rounded to whole degrees.
pub fn format_trace_table(trace: &[TracePoint], n_qubits: usize) -> String {
    let mut out = format!("{:<6}", "angle");
    for point in trace {
        out.push_str(&format!("{:>6}", point.label));
    }
    out.push('\n');
    for pair in Pair::all(n_qubits) {
        out.push_str(&format!("{:<6}", format!("{},{}", pair.lo(), pair.hi())));
        for point in trace {
            out.push_str(&format!("{:>6.0}", point.angles_deg[&pair]));
        }
        out.push('\n');
    }
    for point in trace {
        match &point.detail {
            TraceDetail::Realization { target, duration, taus, not_times } => {
                let taus_txt: Vec<String> = taus
                    .iter()
                    .filter(|(_, t)| **t > 0.0)
                    .map(|(q, t)| format!("tau q{q}={:.1}us", t * 1e6))
                    .collect();
                let nots_txt: Vec<String> = not_times
                    .iter()
                    .map(|(q, (t1, t2))| format!("NOT q{q}@{{{:.1},{:.1}}}us", t1 * 1e6, t2 * 1e6))
                    .collect();
                out.push_str(&format!(
                    "({}) period for q{target}: T={:.1}us  {}  {}\n",
                    point.label,
                    duration * 1e6,
                    taus_txt.join(" "),
                    nots_txt.join(" ")
                ));
            }
            TraceDetail::Pulse { qubit } => {
                out.push_str(&format!("({}) pulse on q{qubit}\n", point.label));
            }
            TraceDetail::FlushPeriod { pair, duration } => {
                out.push_str(&format!(
                    "({}) flush period for pair {pair}: T={:.1}us\n",
                    point.label,
                    duration * 1e6
                ));
            }
        }
    }
    out
}
