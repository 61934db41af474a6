//! Desk-scale dense unitary oracle: exact unitaries of abstract circuits
//! and compiled schedules, plus the two equivalence checks.
//!
//! Conventions, frozen by the oracle tests in `oracle`:
//! qubit q maps to bit q of the basis index; |0> carries Iz = +1/2;
//! R(axis, angle) = exp(-i*angle_rad*(cos axis * Ix + sin axis * Iy));
//! Rz(a) = exp(-i*a_rad*Iz); U_zz(t) = exp(-i*t_rad*2*Iz*Iz).

use num_complex::Complex64;
use thiserror::Error;

use crate::angle::deg_to_rad;
use crate::circuit::{normalize, Gate, GateNetwork};
use crate::device::{DeviceModel, Pair};
use crate::scheduler::{Event, PulseSchedule};

/// Largest simulable system; 2^10 keeps matrices at 1024^2 entries.
pub const DEFAULT_QUBIT_CAP: usize = 10;

/// Residual deficit (degrees) above which a schedule does not count as
/// flushed for unitary-mode verification.
pub const FLUSH_RESIDUAL_TOL_DEG: f64 = 1e-6;

/// Default trace-fidelity distance bound for a pass.
pub const DEFAULT_DISTANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{n} qubits exceeds the simulator cap of {cap}")]
    DimensionLimit { n: usize, cap: usize },
    #[error("unitary-mode verification requires a flushed schedule; residual deficit {pair} = {deficit_deg} deg")]
    NotFlushed { pair: Pair, deficit_deg: f64 },
    #[error("schedule touches qubit {q} outside the {n}-qubit device")]
    QubitOutOfRange { q: usize, n: usize },
}

/// Dense 2^n x 2^n complex matrix, row-major.
#[derive(Clone, Debug)]
pub struct Unitary {
    n: usize,
    dim: usize,
    a: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(n: usize) -> Result<Self, SimError> {
        Self::identity_capped(n, DEFAULT_QUBIT_CAP)
    }

    pub fn identity_capped(n: usize, cap: usize) -> Result<Self, SimError> {
        if n > cap {
            return Err(SimError::DimensionLimit { n, cap });
        }
        let dim = 1usize << n;
        let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            a[r * dim + r] = Complex64::new(1.0, 0.0);
        }
        Ok(Unitary { n, dim, a })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.a[r * self.dim + c]
    }

    /// Left-multiply by a single-qubit gate on `q`: U <- (G_q (x) 1) U.
    pub fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        debug_assert!(q < self.n);
        let bit = 1usize << q;
        let dim = self.dim;
        for block in 0..dim / 2 {
            let r0 = ((block >> q) << (q + 1)) | (block & (bit - 1));
            let r1 = r0 | bit;
            for c in 0..dim {
                let x = self.a[r0 * dim + c];
                let y = self.a[r1 * dim + c];
                self.a[r0 * dim + c] = m[0][0] * x + m[0][1] * y;
                self.a[r1 * dim + c] = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    /// Left-multiply by a diagonal of unit phases given as arguments.
    pub fn apply_diagonal_args(&mut self, args: &[f64]) {
        debug_assert_eq!(args.len(), self.dim);
        let dim = self.dim;
        for r in 0..dim {
            let ph = Complex64::from_polar(1.0, args[r]);
            for c in 0..dim {
                self.a[r * dim + c] *= ph;
            }
        }
    }

    /// 1 - |tr(self^dagger * other)| / 2^n; zero iff equal up to a
    /// global phase (for unitaries).
    pub fn fidelity_distance(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut tr = Complex64::new(0.0, 0.0);
        for (x, y) in self.a.iter().zip(other.a.iter()) {
            tr += x.conj() * y;
        }
        1.0 - tr.norm() / self.dim as f64
    }

    /// Frobenius norm of U^dagger U - 1 (upper bound on the operator
    /// norm defect).
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim;
        let mut sum = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let mut e = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    e += self.a[k * dim + r].conj() * self.a[k * dim + c];
                }
                if r == c {
                    e -= Complex64::new(1.0, 0.0);
                }
                sum += e.norm_sqr();
            }
        }
        sum.sqrt()
    }
}

/// 2x2 matrix of R(axis, angle).
pub fn rotation_matrix(axis_deg: f64, angle_deg: f64) -> [[Complex64; 2]; 2] {
    let half = deg_to_rad(angle_deg) / 2.0;
    let (c, s) = (half.cos(), half.sin());
    let phi = deg_to_rad(axis_deg);
    let i = Complex64::new(0.0, 1.0);
    [
        [
            Complex64::new(c, 0.0),
            -i * s * Complex64::from_polar(1.0, -phi),
        ],
        [
            -i * s * Complex64::from_polar(1.0, phi),
            Complex64::new(c, 0.0),
        ],
    ]
}

fn bit_sign(index: usize, q: usize) -> f64 {
    if index >> q & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unitary of an abstract network, gates applied in normalized order.
pub fn circuit_unitary(network: &GateNetwork) -> Result<Unitary, SimError> {
    circuit_unitary_capped(network, DEFAULT_QUBIT_CAP)
}

pub fn circuit_unitary_capped(network: &GateNetwork, cap: usize) -> Result<Unitary, SimError> {
    let n = network.n_qubits;
    let mut u = Unitary::identity_capped(n, cap)?;
    let dim = u.dim();
    for gate in normalize(network) {
        match gate {
            Gate::SingleQubit { qubit, axis_deg, angle_deg } => {
                u.apply_single(qubit, rotation_matrix(axis_deg, angle_deg));
            }
            Gate::FrameZ { qubit, angle_deg } => {
                let half = deg_to_rad(angle_deg) / 2.0;
                let args: Vec<f64> = (0..dim).map(|b| -half * bit_sign(b, qubit)).collect();
                u.apply_diagonal_args(&args);
            }
            Gate::Coupling { q_a, q_b, angle_deg } => {
                let half = deg_to_rad(angle_deg) / 2.0;
                let args: Vec<f64> = (0..dim)
                    .map(|b| -half * bit_sign(b, q_a) * bit_sign(b, q_b))
                    .collect();
                u.apply_diagonal_args(&args);
            }
            Gate::ControlledPhase { q_a, q_b, phi_deg } => {
                let phi = deg_to_rad(phi_deg);
                let args: Vec<f64> = (0..dim)
                    .map(|b| if b >> q_a & 1 == 1 && b >> q_b & 1 == 1 { phi } else { 0.0 })
                    .collect();
                u.apply_diagonal_args(&args);
            }
        }
    }
    Ok(u)
}

/// Unitary realized by a pulse schedule on a device. Delays are the
/// diagonal rotating-frame coupling propagator; pulse groups are
/// simultaneous single-qubit rotations.
pub fn schedule_unitary(schedule: &PulseSchedule, device: &DeviceModel) -> Result<Unitary, SimError> {
    schedule_unitary_capped(schedule, device, DEFAULT_QUBIT_CAP)
}

pub fn schedule_unitary_capped(
    schedule: &PulseSchedule,
    device: &DeviceModel,
    cap: usize,
) -> Result<Unitary, SimError> {
    let n = device.n_qubits();
    let mut u = Unitary::identity_capped(n, cap)?;
    let dim = u.dim();
    let pairs: Vec<Pair> = device.pairs().collect();
    for event in &schedule.events {
        match event {
            Event::Delay { seconds } => {
                let mut args = vec![0.0; dim];
                for p in &pairs {
                    let half = std::f64::consts::PI * device.coupling_hz(*p) * seconds / 2.0;
                    for (b, arg) in args.iter_mut().enumerate() {
                        *arg -= half * bit_sign(b, p.lo()) * bit_sign(b, p.hi());
                    }
                }
                u.apply_diagonal_args(&args);
            }
            Event::Pulses { pulses } => {
                for pulse in pulses {
                    if pulse.qubit >= n {
                        return Err(SimError::QubitOutOfRange { q: pulse.qubit, n });
                    }
                    u.apply_single(pulse.qubit, rotation_matrix(pulse.axis_deg, pulse.angle_deg));
                }
            }
        }
    }
    Ok(u)
}

/// Apply the final-frame correction: prepend Rz(-frame_q) on each qubit.
pub fn frame_corrected(mut u: Unitary, frames_deg: &[f64]) -> Unitary {
    let dim = u.dim();
    for (q, f) in frames_deg.iter().enumerate() {
        if *f == 0.0 {
            continue;
        }
        let half = deg_to_rad(-*f) / 2.0;
        let args: Vec<f64> = (0..dim).map(|b| -half * bit_sign(b, q)).collect();
        u.apply_diagonal_args(&args);
    }
    u
}

#[derive(Clone, Copy, Debug)]
pub struct UnitaryReport {
    pub pass: bool,
    pub distance: f64,
}

/// Trace-fidelity distance between the abstract circuit and the
/// frame-corrected schedule, regardless of residual deficits.
pub fn unitary_distance(
    u_circuit: &Unitary,
    schedule: &PulseSchedule,
    device: &DeviceModel,
) -> Result<f64, SimError> {
    let u_sched = schedule_unitary(schedule, device)?;
    let corrected = frame_corrected(u_sched, &schedule.final_frames_deg);
    Ok(u_circuit.fidelity_distance(&corrected))
}

/// Full-unitary equivalence check; requires a flushed schedule.
pub fn verify_unitary(
    u_circuit: &Unitary,
    schedule: &PulseSchedule,
    device: &DeviceModel,
    tol: f64,
) -> Result<UnitaryReport, SimError> {
    for (pair, d) in &schedule.residual_deficits_deg {
        let folded = d.min(360.0 - d);
        if folded >= FLUSH_RESIDUAL_TOL_DEG {
            return Err(SimError::NotFlushed { pair: *pair, deficit_deg: *d });
        }
    }
    let distance = unitary_distance(u_circuit, schedule, device)?;
    Ok(UnitaryReport { pass: distance < tol, distance })
}

#[derive(Clone, Copy, Debug)]
pub struct MeasurementReport {
    pub pass: bool,
    pub max_deviation: f64,
}

/// Computational-basis measurement equivalence: for every basis input,
/// outcome distributions over `measured_qubits` must match. Residual
/// Ising phases and leftover frames are diagonal, so they cannot move
/// these probabilities.
pub fn verify_measurement(
    u_circuit: &Unitary,
    schedule: &PulseSchedule,
    device: &DeviceModel,
    measured_qubits: &[usize],
    tol: f64,
) -> Result<MeasurementReport, SimError> {
    let u_sched = schedule_unitary(schedule, device)?;
    let corrected = frame_corrected(u_sched, &schedule.final_frames_deg);
    let dim = u_circuit.dim();
    assert_eq!(dim, corrected.dim());

    let bucket_of = |state: usize| -> usize {
        let mut m = 0usize;
        for (k, q) in measured_qubits.iter().enumerate() {
            m |= (state >> q & 1) << k;
        }
        m
    };
    let buckets = 1usize << measured_qubits.len();

    let mut max_dev = 0.0f64;
    let mut p_circ = vec![0.0f64; buckets];
    let mut p_sched = vec![0.0f64; buckets];
    for input in 0..dim {
        p_circ.iter_mut().for_each(|x| *x = 0.0);
        p_sched.iter_mut().for_each(|x| *x = 0.0);
        for out in 0..dim {
            let b = bucket_of(out);
            p_circ[b] += u_circuit.entry(out, input).norm_sqr();
            p_sched[b] += corrected.entry(out, input).norm_sqr();
        }
        for b in 0..buckets {
            max_dev = max_dev.max((p_circ[b] - p_sched[b]).abs());
        }
    }
    Ok(MeasurementReport { pass: max_dev < tol, max_deviation: max_dev })
}
