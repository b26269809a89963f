use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::algebra::{collective_spin, op_norm, HermitianEig, Matrix, Operator, Spin, C64};
use crate::pointgroup::lift_register_axis_angle;
use crate::sequence::{Item, Profile, Pulse, PulseSequence};

/// Toggling-frame Hamiltonians `g_k† H g_k` and the length of every wait.
pub fn toggling_frame(seq: &PulseSequence, h: &Operator) -> Result<Vec<(Matrix, f64)>, SimError> {
    if !seq.is_ideal() {
        return Err(SimError::FinitePulses);
    }
    let spins = h.spins();
    let d = h.dim();
    let mut g = Matrix::identity(d, d);
    let mut out = Vec::with_capacity(seq.wait_count());
    for item in &seq.items {
        match item {
            Item::Wait { duration } => out.push((g.adjoint() * &h.matrix * &g, *duration)),
            Item::Pulse(p) => g = lift_register_axis_angle(p.axis, p.angle, &spins) * g,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MagnusReport {
    pub order1: Matrix,
    pub order2: Matrix,
    pub norm1: f64,
    pub norm2: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MagnusSummary {
    pub order1_norm: f64,
    pub order2_norm: f64,
    pub duration: f64,
}

impl MagnusReport {
    pub fn summary(&self) -> MagnusSummary {
        MagnusSummary { order1_norm: self.norm1, order2_norm: self.norm2, duration: self.duration }
    }
}

/// First two Magnus terms of the piecewise-constant toggling-frame Hamiltonian:
/// `(1/T) Σ H_k τ_k` and `(−i/2T) Σ_{k>l} [H_k τ_k, H_l τ_l]`.
pub fn magnus(seq: &PulseSequence, h: &Operator) -> Result<MagnusReport, SimError> {
    let frames = toggling_frame(seq, h)?;
    let d = h.dim();
    let total: f64 = frames.iter().map(|(_, t)| t).sum();
    if total <= 0.0 {
        return Err(SimError::Spec("sequence has no free evolution".into()));
    }
    let mut order1 = Matrix::zeros(d, d);
    let mut order2 = Matrix::zeros(d, d);
    // running Σ_{l<k} H_l τ_l turns the double sum into a single pass
    let mut prefix = Matrix::zeros(d, d);
    for (hk, t) in &frames {
        let a = hk * C64::from(*t);
        order2 += &a * &prefix - &prefix * &a;
        prefix += &a;
        order1 += &a;
    }
    order1 /= C64::from(total);
    order2 *= C64::new(0.0, -0.5 / total);
    let (norm1, norm2) = (op_norm(&order1), op_norm(&order2));
    Ok(MagnusReport { order1, order2, norm1, norm2, duration: total })
}

/// Propagator of an ideal-pulse sequence.
pub fn propagate_ideal(seq: &PulseSequence, h: &Operator) -> Result<Matrix, SimError> {
    if !seq.is_ideal() {
        return Err(SimError::FinitePulses);
    }
    let eig = HermitianEig::new(&h.matrix)?;
    let spins = h.spins();
    let d = h.dim();
    let mut u = Matrix::identity(d, d);
    let mut cache: Vec<(f64, Matrix)> = Vec::new();
    for item in &seq.items {
        match item {
            Item::Wait { duration } => {
                let w = match cache.iter().find(|(t, _)| t == duration) {
                    Some((_, w)) => w.clone(),
                    None => {
                        let w = eig.propagator(*duration);
                        cache.push((*duration, w.clone()));
                        w
                    }
                };
                u = w * u;
            }
            Item::Pulse(p) => u = lift_register_axis_angle(p.axis, p.angle, &spins) * u,
        }
    }
    check_finite(&u)?;
    Ok(u)
}

/// Systematic error term `strength · (axis·J)` present while a pulse is on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlError {
    pub axis: [f64; 3],
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteOptions {
    pub steps_per_pulse: usize,
    pub control_error: Option<ControlError>,
}

impl Default for FiniteOptions {
    fn default() -> Self {
        FiniteOptions { steps_per_pulse: 64, control_error: None }
    }
}

fn collective_along(spins: &[Spin], n: [f64; 3]) -> Matrix {
    let [jx, jy, jz] = collective_spin(spins);
    jx * C64::from(n[0]) + jy * C64::from(n[1]) + jz * C64::from(n[2])
}

/// Propagator of one shaped pulse under `H + f(t) n·J`. Each slice uses the
/// exact angle accumulated over it; rect pulses take a single slice.
pub fn pulse_propagator(p: &Pulse, h: &Matrix, spins: &[Spin], opts: &FiniteOptions) -> Result<Matrix, SimError> {
    if p.is_ideal() {
        return Ok(lift_register_axis_angle(p.axis, p.angle, spins));
    }
    let nj = collective_along(spins, p.axis);
    let mut base = h.clone();
    if let Some(e) = opts.control_error {
        base += collective_along(spins, e.axis) * C64::from(e.strength);
    }
    let steps = match p.profile {
        Profile::Rect | Profile::Ideal => 1,
        Profile::Sin2 => opts.steps_per_pulse.max(1),
    };
    let dt = p.duration / steps as f64;
    let d = h.nrows();
    let mut u = Matrix::identity(d, d);
    for k in 0..steps {
        let (s0, s1) = (k as f64 / steps as f64, (k + 1) as f64 / steps as f64);
        let rate = p.angle * (p.profile.accumulated(s1) - p.profile.accumulated(s0)) / dt;
        let hk = &base + &nj * C64::from(rate);
        u = HermitianEig::new(&hk)?.propagator(dt) * u;
    }
    Ok(u)
}

/// Propagator with finite pulses; ideal pulses inside the sequence stay exact.
pub fn propagate_finite(seq: &PulseSequence, h: &Operator, opts: &FiniteOptions) -> Result<Matrix, SimError> {
    if opts.steps_per_pulse == 0 {
        return Err(SimError::Spec("steps_per_pulse must be at least 1".into()));
    }
    let eig = HermitianEig::new(&h.matrix)?;
    let spins = h.spins();
    let d = h.dim();
    let mut u = Matrix::identity(d, d);
    for item in &seq.items {
        let step = match item {
            Item::Wait { duration } => eig.propagator(*duration),
            Item::Pulse(p) => pulse_propagator(p, &h.matrix, &spins, opts)?,
        };
        u = step * u;
    }
    check_finite(&u)?;
    Ok(u)
}

/// Which side the pulse propagator acts on inside the time average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toggle {
    /// `u(t)† S u(t)`
    Forward,
    /// `u(t) S u(t)†`
    Backward,
}

/// `(1/τp) ∫ u(t)† S u(t) dt` (or the backward form) over the pulse, with
/// `u(t) = exp(−iΘ(t) n·J)`, by composite Simpson on `steps` intervals.
pub fn pulse_average(p: &Pulse, s: &Operator, steps: usize, toggle: Toggle) -> Result<Matrix, SimError> {
    if p.is_ideal() {
        return Ok(s.matrix.clone());
    }
    let steps = steps.max(2) + steps % 2;
    let nj = collective_along(&s.spins(), p.axis);
    let eig = HermitianEig::new(&nj)?;
    let d = s.dim();
    let mut acc = Matrix::zeros(d, d);
    for k in 0..=steps {
        let frac = k as f64 / steps as f64;
        let u = eig.propagator(p.angle * p.profile.accumulated(frac));
        let term = match toggle {
            Toggle::Forward => u.adjoint() * &s.matrix * &u,
            Toggle::Backward => &u * &s.matrix * u.adjoint(),
        };
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += term * C64::from(w);
    }
    Ok(acc * C64::from(1.0 / (3.0 * steps as f64)))
}

/// Finite-duration maps of one interval: a wait `τ0` followed by the pulse.
#[derive(Debug, Clone)]
pub struct FiniteMaps {
    /// `f = (1/τp) ∫ u† S u` over the pulse.
    pub pulse_term: Matrix,
    /// `F = (τ0/τ) S + (τp/τ) f`.
    pub interval_term: Matrix,
}

pub fn finite_maps(p: &Pulse, s: &Operator, tau0: f64, steps: usize) -> Result<FiniteMaps, SimError> {
    let f = pulse_average(p, s, steps, Toggle::Forward)?;
    let tau = tau0 + p.duration;
    let big = if tau == 0.0 {
        s.matrix.clone()
    } else {
        &s.matrix * C64::from(tau0 / tau) + &f * C64::from(p.duration / tau)
    };
    Ok(FiniteMaps { pulse_term: f, interval_term: big })
}

fn check_finite(u: &Matrix) -> Result<(), SimError> {
    if u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(SimError::NonFinite)
    }
}

/// `D = sqrt(1 − |tr U| / d)`. Close to the identity the value comes from the
/// eigenphases `δ_k` of `U` relative to `arg tr U`, as `(2/d) Σ sin²(δ_k/2)`,
/// which keeps tiny distances accurate.
pub fn distance(u: &Matrix) -> Result<f64, SimError> {
    check_finite(u)?;
    let d = u.nrows();
    let dev = (u.adjoint() * u - Matrix::identity(d, d)).norm();
    if dev > 1e-8 {
        return Err(SimError::NotUnitary(dev));
    }
    let tr = u.trace();
    let direct = (1.0 - tr.norm() / d as f64).max(0.0);
    if tr.norm() < 0.5 * d as f64 {
        return Ok(direct.sqrt());
    }
    let v = u * C64::from_polar(1.0, -tr.arg());
    // (V − V†)/2i has eigenvalues sin δ_k
    let s = (&v - v.adjoint()) * C64::new(0.0, -0.5);
    let sines = SymmetricEigen::new(s).eigenvalues;
    if sines.iter().any(|x| x.abs() > 0.5) {
        return Ok(direct.sqrt());
    }
    let (mut sum, mut cos_sum) = (0.0, 0.0);
    for &x in sines.iter() {
        let delta = x.asin();
        sum += (delta / 2.0).sin().powi(2);
        cos_sum += delta.cos();
    }
    // a phase near π also has a small sine; the cosines then miss the trace
    if (cos_sum - tr.norm()).abs() > 1e-6 * d as f64 {
        return Ok(direct.sqrt());
    }
    Ok((2.0 * sum / d as f64).max(0.0).sqrt())
}
