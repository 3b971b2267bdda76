//! PD-tracked hip joint.
//!
//! The trunk is a fixed base and the thigh swings about the hip as a rigid
//! uniform rod under gravity. A PD controller drives the joint torque towards
//! a generated trajectory; the closed loop is integrated with fixed-step RK4.
//! Trajectories are in degrees; everything inside this module is in radians.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{AngleUnit, ErrorStats, MetricsError, MetricsReport, SampledSeries};
use crate::poly::DerivativeOrder;
use crate::scheme::{PiecewiseTrajectory, SchemeError};

pub const GRAVITY: f64 = 9.81;
/// States beyond this magnitude mean the loop diverged.
pub const BLOWUP_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid body parameters: {0}")]
    InvalidBody(String),
    #[error("invalid gains: kp = {kp}, kd = {kd}")]
    InvalidGains { kp: f64, kd: f64 },
    #[error("time step {dt} must be positive and at most {max} (shortest segment / 10)")]
    InvalidTimeStep { dt: f64, max: f64 },
    #[error("simulation diverged at t = {t} (theta = {theta}, omega = {omega})")]
    NumericalBlowup { t: f64, theta: f64, omega: f64 },
    #[error(transparent)]
    Trajectory(#[from] SchemeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Mass (kg), length (m) and distance from the proximal joint to the centre
/// of mass (m) of one body segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    pub mass: f64,
    pub length: f64,
    pub com: f64,
}

impl BodyParams {
    #[allow(clippy::approx_constant)]
    pub const THIGH: BodyParams = BodyParams {
        mass: 15.961,
        length: 0.5287,
        com: 0.3183,
    };
    pub const TRUNK: BodyParams = BodyParams {
        mass: 17.761,
        length: 0.7050,
        com: 0.2965,
    };

    pub fn new(mass: f64, length: f64, com: f64) -> Result<Self, SimError> {
        let params = Self { mass, length, com };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let all_positive = [self.mass, self.length, self.com]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(SimError::InvalidBody(format!(
                "mass, length and com must be positive: {self:?}"
            )));
        }
        if self.com >= self.length {
            return Err(SimError::InvalidBody(format!(
                "com {} must lie inside the segment of length {}",
                self.com, self.length
            )));
        }
        Ok(())
    }

    /// Moment of inertia about the hip: `m·com² + m·L²/12`.
    pub fn pivot_inertia(&self) -> f64 {
        self.mass * self.com * self.com + self.mass * self.length * self.length / 12.0
    }

    /// Gravity torque `m·g·com·sin θ` pulling the thigh back to hanging.
    pub fn gravity_torque(&self, theta: f64) -> f64 {
        self.mass * GRAVITY * self.com * theta.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimState {
    pub theta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
}

impl PdGains {
    pub fn new(kp: f64, kd: f64) -> Result<Self, SimError> {
        if !(kp >= 0.0 && kd >= 0.0 && kp.is_finite() && kd.is_finite()) {
            return Err(SimError::InvalidGains { kp, kd });
        }
        Ok(Self { kp, kd })
    }
}

impl Default for PdGains {
    fn default() -> Self {
        Self {
            kp: 500.0,
            kd: 50.0,
        }
    }
}

/// Reference joint motion at one instant, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingTarget {
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimOptions {
    /// Add `m·g·com·sin θ` to cancel gravity.
    #[serde(default)]
    pub gravity_compensation: bool,
    /// Add `I·θ̈_ref` feedforward.
    #[serde(default)]
    pub acceleration_feedforward: bool,
}

/// `(θ̇, θ̈)` of the thigh under an applied hip torque.
pub fn hip_dynamics(state: SimState, torque: f64, thigh: &BodyParams) -> (f64, f64) {
    let alpha = (torque - thigh.gravity_torque(state.theta)) / thigh.pivot_inertia();
    (state.omega, alpha)
}

/// `kp·(θ_ref − θ) + kd·(ω_ref − ω)`, plus `inertia·θ̈_ref` when a
/// feedforward inertia is given.
pub fn pd_torque(
    state: SimState,
    target: TrackingTarget,
    gains: PdGains,
    feedforward_inertia: Option<f64>,
) -> f64 {
    let feedback =
        gains.kp * (target.position - state.theta) + gains.kd * (target.velocity - state.omega);
    feedback + feedforward_inertia.map_or(0.0, |i| i * target.acceleration)
}

/// Total mechanical energy, zero at the hanging rest position.
pub fn mechanical_energy(state: SimState, thigh: &BodyParams) -> f64 {
    0.5 * thigh.pivot_inertia() * state.omega * state.omega
        + thigh.mass * GRAVITY * thigh.com * (1.0 - state.theta.cos())
}

/// One classical Runge–Kutta step of `ẋ = f(t, x)`.
pub fn rk4_step(
    state: SimState,
    t: f64,
    dt: f64,
    f: impl Fn(f64, SimState) -> (f64, f64),
) -> SimState {
    let offset = |s: SimState, k: (f64, f64), h: f64| SimState {
        theta: s.theta + h * k.0,
        omega: s.omega + h * k.1,
    };
    let k1 = f(t, state);
    let k2 = f(t + dt / 2.0, offset(state, k1, dt / 2.0));
    let k3 = f(t + dt / 2.0, offset(state, k2, dt / 2.0));
    let k4 = f(t + dt, offset(state, k3, dt));
    SimState {
        theta: state.theta + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        omega: state.omega + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    }
}

fn check_finite(state: SimState, t: f64) -> Result<(), SimError> {
    let ok = state.theta.is_finite()
        && state.omega.is_finite()
        && state.theta.abs() <= BLOWUP_LIMIT
        && state.omega.abs() <= BLOWUP_LIMIT;
    if ok {
        Ok(())
    } else {
        Err(SimError::NumericalBlowup {
            t,
            theta: state.theta,
            omega: state.omega,
        })
    }
}

fn step_count(span: f64, dt: f64) -> usize {
    ((span / dt).round() as usize).max(1)
}

/// Unforced swing from `initial` over `duration` seconds. Returns the state
/// at every grid point including the initial one; the step is adjusted to
/// `duration / round(duration / dt)`.
pub fn simulate_free_swing(
    initial: SimState,
    thigh: &BodyParams,
    duration: f64,
    dt: f64,
) -> Result<Vec<SimState>, SimError> {
    thigh.validate()?;
    if !(dt > 0.0 && dt.is_finite() && dt <= duration) {
        return Err(SimError::InvalidTimeStep { dt, max: duration });
    }
    let n = step_count(duration, dt);
    let h = duration / n as f64;
    let mut states = Vec::with_capacity(n + 1);
    let mut state = initial;
    states.push(state);
    for i in 0..n {
        let t = i as f64 * h;
        state = rk4_step(state, t, h, |_, s| hip_dynamics(s, 0.0, thigh));
        check_finite(state, t + h)?;
        states.push(state);
    }
    Ok(states)
}

/// Tracked joint profiles and tracking error of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRun {
    /// Joint angle on the integration grid, radians.
    pub position: SampledSeries,
    /// Joint rate on the integration grid, rad/s.
    pub velocity: SampledSeries,
    /// Tracking error (tracked vs trajectory) for orders 0 and 1, radians.
    pub metrics: MetricsReport,
    pub final_state: SimState,
}

/// Runs the PD loop along `traj`, starting from the trajectory's initial
/// position and velocity. The step is adjusted to `span / round(span / dt)`.
pub fn simulate_tracking(
    traj: &PiecewiseTrajectory,
    thigh: &BodyParams,
    gains: PdGains,
    dt: f64,
    options: SimOptions,
) -> Result<TrackingRun, SimError> {
    thigh.validate()?;
    PdGains::new(gains.kp, gains.kd)?;
    let max = traj.shortest_segment() / 10.0;
    if !(dt > 0.0 && dt <= max) {
        return Err(SimError::InvalidTimeStep { dt, max });
    }

    let (start, end) = (traj.start(), traj.end());
    let target_at = |t: f64| -> Result<TrackingTarget, SchemeError> {
        let k = traj.kinematics(t.clamp(start, end))?;
        Ok(TrackingTarget {
            position: k.position.to_radians(),
            velocity: k.velocity.to_radians(),
            acceleration: k.acceleration.to_radians(),
        })
    };
    let feedforward = options
        .acceleration_feedforward
        .then(|| thigh.pivot_inertia());

    let n = step_count(end - start, dt);
    let h = (end - start) / n as f64;
    let initial = target_at(start)?;
    let mut state = SimState {
        theta: initial.position,
        omega: initial.velocity,
    };

    let mut times = Vec::with_capacity(n + 1);
    let mut thetas = Vec::with_capacity(n + 1);
    let mut omegas = Vec::with_capacity(n + 1);
    let mut ref_theta = Vec::with_capacity(n + 1);
    let mut ref_omega = Vec::with_capacity(n + 1);
    let mut record = |t: f64, s: SimState, r: TrackingTarget| {
        times.push(t);
        thetas.push(s.theta);
        omegas.push(s.omega);
        ref_theta.push(r.position);
        ref_omega.push(r.velocity);
    };
    record(start, state, initial);

    for i in 0..n {
        let t = start + i as f64 * h;
        let field = |tau: f64, s: SimState| {
            // Stage times are clamped into the span, so the lookup cannot miss.
            let target = target_at(tau).unwrap_or_default();
            let mut torque = pd_torque(s, target, gains, feedforward);
            if options.gravity_compensation {
                torque += thigh.gravity_torque(s.theta);
            }
            hip_dynamics(s, torque, thigh)
        };
        state = rk4_step(state, t, h, field);
        let t_next = if i + 1 == n {
            end
        } else {
            start + (i + 1) as f64 * h
        };
        check_finite(state, t_next)?;
        record(t_next, state, target_at(t_next)?);
    }

    let position = SampledSeries::new(
        times.clone(),
        thetas,
        DerivativeOrder::Position,
        AngleUnit::Radians,
    )?;
    let velocity =
        SampledSeries::new(times, omegas, DerivativeOrder::Velocity, AngleUnit::Radians)?;
    let ref_position = position.with_values(ref_theta)?;
    let ref_velocity = velocity.with_values(ref_omega)?;
    let metrics = MetricsReport {
        errors: vec![
            ErrorStats::between(&position, &ref_position)?,
            ErrorStats::between(&velocity, &ref_velocity)?,
        ],
        ..MetricsReport::default()
    };
    Ok(TrackingRun {
        position,
        velocity,
        metrics,
        final_state: state,
    })
}
