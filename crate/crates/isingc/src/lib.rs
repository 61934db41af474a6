//! Compiler from abstract quantum gate networks to timed pulse schedules
//! (delays, NOT gates, single-qubit rotations) for a fully-coupled Ising
//! machine. Couplings that are not needed yet are tracked lazily in a
//! per-pair angle ledger instead of being refocused, and corrected just
//! before each single-qubit gate. A dense-unitary simulator checks the
//! compiled schedules against their source circuits.

pub mod angle;
pub mod circuit;
pub mod device;
pub mod optimizer;
pub mod oracle;
pub mod render;
pub mod scheduler;
pub mod simulator;
pub mod tracker;

pub use circuit::{decompose_cphase, normalize, parse_circuit, render_circuit, Gate, GateNetwork};
pub use device::{DeviceModel, Pair};
pub use optimizer::{cancel_not_pairs, negate_to_quarter, plan_with_signs, reduce_mod_180, OptimizationOptions};
pub use scheduler::{
    compile, compile_hadamard_baseline, execute_step, flush, hadamard_refocus, plan_realization,
    stats, CompileOptions, CompileResult, Event, Pulse, PulseSchedule, RealizationStep,
    ScheduleStats, TraceDetail, TracePoint,
};
pub use simulator::{
    circuit_unitary, schedule_unitary, unitary_distance, verify_measurement, verify_unitary,
    Unitary,
};
pub use tracker::{PhaseLedger, SignTimeline};
