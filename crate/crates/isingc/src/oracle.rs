//! Independent brute-force references used by tests: a discretized sign
//! integrator for NOT timelines and a small dense-matrix route to gate
//! unitaries built from Kronecker products and a series exponential.
//! Deliberately avoids the closed forms used by `tracker` and
//! `simulator` so the two routes check each other.

use num_complex::Complex64;

use crate::angle::deg_to_rad;
use crate::device::Pair;
use crate::tracker::SignTimeline;

/// Number of discretization steps used by [`sign_integrate`].
pub const SIGN_INTEGRATE_STEPS: usize = 1_000_000;

/// Midpoint-rule integration of the pair sign function over the period,
/// evaluating the flip parities step by step.
pub fn sign_integrate(timeline: &SignTimeline, pair: Pair) -> f64 {
    sign_integrate_steps(timeline, pair, SIGN_INTEGRATE_STEPS)
}

pub fn sign_integrate_steps(timeline: &SignTimeline, pair: Pair, steps: usize) -> f64 {
    let duration = timeline.duration;
    if duration == 0.0 {
        return 0.0;
    }
    let a = timeline.flips(pair.lo());
    let b = timeline.flips(pair.hi());
    let dt = duration / steps as f64;
    let mut net = 0.0;
    let (mut ia, mut ib) = (0usize, 0usize);
    for k in 0..steps {
        let t = (k as f64 + 0.5) * dt;
        while ia < a.len() && a[ia] <= t {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= t {
            ib += 1;
        }
        let sign = if (ia + ib) % 2 == 0 { 1.0 } else { -1.0 };
        net += sign * dt;
    }
    net
}

/// Dense complex matrix for the small-system oracle.
#[derive(Clone, Debug)]
pub struct Mat {
    pub dim: usize,
    pub a: Vec<Complex64>,
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Mat { dim, a: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for r in 0..dim {
            m.a[r * dim + r] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.a[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.a[r * self.dim + c] = v;
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut out = Mat::zeros(dim);
        for r in 0..dim {
            for k in 0..dim {
                let x = self.get(r, k);
                if x.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    out.a[r * dim + c] += x * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Mat {
        Mat { dim: self.dim, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        Mat {
            dim: self.dim,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn kron(&self, other: &Mat) -> Mat {
        let (da, db) = (self.dim, other.dim);
        let mut out = Mat::zeros(da * db);
        for ra in 0..da {
            for ca in 0..da {
                let x = self.get(ra, ca);
                for rb in 0..db {
                    for cb in 0..db {
                        out.set(ra * db + rb, ca * db + cb, x * other.get(rb, cb));
                    }
                }
            }
        }
        out
    }

    /// Frobenius norm of self - other (also an operator-norm bound).
    pub fn frobenius_distance(&self, other: &Mat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Distance to `other` minimized over a global phase.
    pub fn distance_up_to_phase(&self, other: &Mat) -> f64 {
        let mut tr = Complex64::new(0.0, 0.0);
        for (x, y) in self.a.iter().zip(&other.a) {
            tr += x.conj() * y;
        }
        if tr.norm() == 0.0 {
            return self.frobenius_distance(other);
        }
        let phase = tr / tr.norm();
        self.scale(phase).frobenius_distance(other)
    }

    /// exp(self) by scaling-and-squaring on a Taylor series.
    pub fn expm(&self) -> Mat {
        let norm = self.frobenius_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = self.scale(Complex64::new(1.0 / f64::powi(2.0, squarings as i32), 0.0));
        let mut term = Mat::identity(self.dim);
        let mut sum = Mat::identity(self.dim);
        for k in 1..=30 {
            term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        let mut out = sum;
        for _ in 0..squarings {
            out = out.mul(&out);
        }
        out
    }
}

fn pauli(which: char) -> Mat {
    let mut m = Mat::zeros(2);
    let (o, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    match which {
        'x' => {
            m.set(0, 1, o);
            m.set(1, 0, o);
        }
        'y' => {
            m.set(0, 1, -i);
            m.set(1, 0, i);
        }
        'z' => {
            m.set(0, 0, o);
            m.set(1, 1, -o);
        }
        _ => unreachable!(),
    }
    m
}

/// sigma/2 on `q` of an n-qubit register, qubit q = bit q of the index.
pub fn spin_op(which: char, q: usize, n: usize) -> Mat {
    let mut m = Mat::identity(1);
    for k in (0..n).rev() {
        let factor = if k == q {
            pauli(which).scale(Complex64::new(0.5, 0.0))
        } else {
            Mat::identity(2)
        };
        m = m.kron(&factor);
    }
    m
}

/// exp(-i * angle_rad * generator).
fn evolve(generator: &Mat, angle_rad: f64) -> Mat {
    generator.scale(Complex64::new(0.0, -angle_rad)).expm()
}

/// Oracle route to a single-qubit rotation about an xy axis.
pub fn rotation(n: usize, q: usize, axis_deg: f64, angle_deg: f64) -> Mat {
    let phi = deg_to_rad(axis_deg);
    let gen = spin_op('x', q, n)
        .scale(Complex64::new(phi.cos(), 0.0))
        .add(&spin_op('y', q, n).scale(Complex64::new(phi.sin(), 0.0)));
    evolve(&gen, deg_to_rad(angle_deg))
}

/// Oracle route to Rz.
pub fn rz(n: usize, q: usize, angle_deg: f64) -> Mat {
    evolve(&spin_op('z', q, n), deg_to_rad(angle_deg))
}

/// Oracle route to U_zz(theta) = exp(-i*theta_rad*2 Iz Iz).
pub fn u_zz(n: usize, a: usize, b: usize, angle_deg: f64) -> Mat {
    let gen = spin_op('z', a, n).mul(&spin_op('z', b, n)).scale(Complex64::new(2.0, 0.0));
    evolve(&gen, deg_to_rad(angle_deg))
}

/// Oracle route to the rotating-frame delay propagator: couplings only.
pub fn delay(n: usize, couplings: &[(usize, usize, f64)], seconds: f64) -> Mat {
    let mut h = Mat::zeros(1 << n);
    for (a, b, j_hz) in couplings {
        let term = spin_op('z', *a, n)
            .mul(&spin_op('z', *b, n))
            .scale(Complex64::new(2.0 * std::f64::consts::PI * j_hz, 0.0));
        h = h.add(&term);
    }
    evolve(&h, seconds)
}

/// diag(1,1,1,e^{i phi}) on the pair (a,b) of an n-qubit register.
pub fn controlled_phase(n: usize, a: usize, b: usize, phi_deg: f64) -> Mat {
    let dim = 1 << n;
    let mut m = Mat::identity(dim);
    let phi = deg_to_rad(phi_deg);
    for s in 0..dim {
        if s >> a & 1 == 1 && s >> b & 1 == 1 {
            m.set(s, s, Complex64::from_polar(1.0, phi));
        }
    }
    m
}
