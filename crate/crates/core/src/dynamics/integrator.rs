//! Fixed-step orbit integration in a [`PotentialParams`] potential.
//!
//! Time is in Myr, positions kpc, velocities km/s.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::potential::{acceleration, potential_value, PotentialParams};
use crate::frames::PhaseState;
use crate::units::KMS_TO_KPC_PER_MYR;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("state became non-finite at step {0}")]
    NonFinite(usize),
    #[error("bad step: dt = {dt} Myr, t_end = {t_end} Myr")]
    BadStep { dt: f64, t_end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Kick-drift-kick leapfrog; symplectic and time-reversible.
    #[default]
    Leapfrog,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Leapfrog => "leapfrog",
            Scheme::Rk4 => "rk4",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "leapfrog" => Ok(Scheme::Leapfrog),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(format!("unknown scheme `{other}` (expected leapfrog or rk4)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times_myr: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// Specific energy per sample, (km/s)^2.
    pub energy_kms2: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times_myr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_myr.is_empty()
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory has the initial sample")
    }

    /// Largest |E(t) - E(0)| / |E(0)| over the samples.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.energy_kms2[0];
        self.energy_kms2
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
            / e0.abs()
    }
}

pub fn specific_energy(st: &PhaseState, pp: &PotentialParams) -> f64 {
    0.5 * st.vel.norm_sq() + potential_value(st.pos, pp)
}

/// Advances one state by `n_steps` of size `dt_myr` without recording the
/// path. Negative `dt_myr` integrates backward.
pub fn advance(
    st0: &PhaseState,
    pp: &PotentialParams,
    dt_myr: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<PhaseState, IntegrateError> {
    let mut stepper = Stepper::new(*st0, pp, dt_myr, scheme);
    for i in 1..=n_steps {
        stepper.step();
        if !stepper.state.is_finite() {
            return Err(IntegrateError::NonFinite(i));
        }
    }
    Ok(stepper.state)
}

/// Integrates from `t = 0` to `t_end_myr` in steps of `dt_myr`, sampling
/// every step. The step count is `round(t_end / dt)`.
pub fn integrate_orbit(
    st0: &PhaseState,
    pp: &PotentialParams,
    dt_myr: f64,
    t_end_myr: f64,
    scheme: Scheme,
) -> Result<Trajectory, IntegrateError> {
    if !(dt_myr.is_finite() && dt_myr > 0.0 && t_end_myr.is_finite() && t_end_myr >= dt_myr) {
        return Err(IntegrateError::BadStep { dt: dt_myr, t_end: t_end_myr });
    }
    let n = (t_end_myr / dt_myr).round() as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut energy = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(*st0);
    energy.push(specific_energy(st0, pp));

    let mut stepper = Stepper::new(*st0, pp, dt_myr, scheme);
    for i in 1..=n {
        stepper.step();
        let st = stepper.state;
        if !st.is_finite() {
            return Err(IntegrateError::NonFinite(i));
        }
        times.push(i as f64 * dt_myr);
        states.push(st);
        energy.push(specific_energy(&st, pp));
    }
    Ok(Trajectory {
        times_myr: times,
        states,
        energy_kms2: energy,
    })
}

/// Integrates many independent orbits in parallel; output order follows
/// input order.
pub fn integrate_many(
    states: &[PhaseState],
    pp: &PotentialParams,
    dt_myr: f64,
    t_end_myr: f64,
    scheme: Scheme,
) -> Vec<Result<Trajectory, IntegrateError>> {
    states
        .par_iter()
        .map(|st| integrate_orbit(st, pp, dt_myr, t_end_myr, scheme))
        .collect()
}

struct Stepper<'a> {
    state: PhaseState,
    pp: &'a PotentialParams,
    dt: f64,
    scheme: Scheme,
    // Acceleration at the current position, reused by leapfrog.
    acc: crate::vec3::Vec3,
}

impl<'a> Stepper<'a> {
    fn new(state: PhaseState, pp: &'a PotentialParams, dt: f64, scheme: Scheme) -> Self {
        Stepper {
            state,
            pp,
            dt,
            scheme,
            acc: acceleration(state.pos, pp),
        }
    }

    fn step(&mut self) {
        match self.scheme {
            Scheme::Leapfrog => self.leapfrog(),
            Scheme::Rk4 => self.rk4(),
        }
    }

    fn leapfrog(&mut self) {
        let h = self.dt;
        let v_half = self.state.vel + self.acc * (0.5 * h);
        self.state.pos += v_half * (KMS_TO_KPC_PER_MYR * h);
        self.acc = acceleration(self.state.pos, self.pp);
        self.state.vel = v_half + self.acc * (0.5 * h);
    }

    fn rk4(&mut self) {
        let h = self.dt;
        let k = KMS_TO_KPC_PER_MYR;
        let PhaseState { pos: x, vel: v } = self.state;
        let a1 = self.acc;
        let (x1, v1) = (v * k, a1);
        let a2 = acceleration(x + x1 * (0.5 * h), self.pp);
        let (x2, v2) = ((v + v1 * (0.5 * h)) * k, a2);
        let a3 = acceleration(x + x2 * (0.5 * h), self.pp);
        let (x3, v3) = ((v + v2 * (0.5 * h)) * k, a3);
        let a4 = acceleration(x + x3 * h, self.pp);
        let (x4, v4) = ((v + v3 * h) * k, a4);
        self.state.pos = x + (x1 + x2 * 2.0 + x3 * 2.0 + x4) * (h / 6.0);
        self.state.vel = v + (v1 + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0);
        self.acc = acceleration(self.state.pos, self.pp);
    }
}
