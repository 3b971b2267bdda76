//! Run configuration: a single JSON document, resolved into a [`Plan`].
//!
//! ```json
//! {
//!   "schemes": ["434-1", "656-2"],
//!   "stance": { "times": [0.0, 0.12, 0.48, 0.6] },
//!   "swing": {},
//!   "reference": { "type": "sinusoid", "amplitude": 30.0, "period": 1.0 },
//!   "samples": 101,
//!   "via_window": 0.01,
//!   "simulation": { "kp": 500.0, "kd": 50.0, "dt": 0.001 }
//! }
//! ```
//!
//! Omitting `swing` generates the stance phase only; `"swing": {}` adds a
//! swing phase on the default timing.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::reference::{Reference, ReferenceConfig};
use super::CliError;
use crate::metrics::{DEFAULT_SAMPLES, DEFAULT_VIA_WINDOW, DEFAULT_VIA_WINDOW_SAMPLES};
use crate::poly::DerivativeOrder;
use crate::scheme::{
    PhaseInput, PhaseLabel, SchemeId, Side, SideOverride, Waypoint, DEFAULT_STANCE_TIMES,
    DEFAULT_SWING_TIMES,
};
use crate::sim::{BodyParams, PdGains, SimOptions};

/// Default half-window for the sampled continuity cross-check, seconds.
pub const DEFAULT_CONTINUITY_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub schemes: Option<Vec<SchemeId>>,
    #[serde(default)]
    pub stance: PhaseConfig,
    #[serde(default)]
    pub swing: Option<PhaseConfig>,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_via_window")]
    pub via_window: f64,
    #[serde(default = "default_via_window_samples")]
    pub via_window_samples: usize,
    #[serde(default = "default_epsilon")]
    pub continuity_epsilon: f64,
    #[serde(default)]
    pub overrides: Vec<OverrideConfig>,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_via_window() -> f64 {
    DEFAULT_VIA_WINDOW
}

fn default_via_window_samples() -> usize {
    DEFAULT_VIA_WINDOW_SAMPLES
}

fn default_epsilon() -> f64 {
    DEFAULT_CONTINUITY_EPSILON
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    #[serde(default)]
    pub times: Option<[f64; 4]>,
    #[serde(default)]
    pub waypoints: Option<Vec<WaypointValues>>,
    #[serde(default)]
    pub midpoints: Option<Vec<Option<f64>>>,
}

/// Waypoint values; the time comes from the phase timing.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointValues {
    pub position: f64,
    #[serde(default)]
    pub velocity: Option<f64>,
    #[serde(default)]
    pub acceleration: Option<f64>,
    #[serde(default)]
    pub jerk: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseName {
    Stance,
    Swing,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideConfig {
    pub phase: PhaseName,
    pub waypoint: usize,
    pub side: Side,
    pub order: DerivativeOrder,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_kp")]
    pub kp: f64,
    #[serde(default = "default_kd")]
    pub kd: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub gravity_compensation: bool,
    #[serde(default)]
    pub acceleration_feedforward: bool,
    #[serde(default)]
    pub thigh: Option<BodyParams>,
}

fn default_kp() -> f64 {
    PdGains::default().kp
}

fn default_kd() -> f64 {
    PdGains::default().kd
}

fn default_dt() -> f64 {
    1e-3
}

/// Validated, fully resolved run inputs.
#[derive(Debug, Clone)]
pub struct Plan {
    pub schemes: Vec<SchemeId>,
    pub stance: PhaseInput,
    pub swing: Option<PhaseInput>,
    pub reference: Option<Reference>,
    pub samples: usize,
    pub via_window: f64,
    pub via_window_samples: usize,
    pub continuity_epsilon: f64,
    pub simulation: Option<SimulationPlan>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimulationPlan {
    pub gains: PdGains,
    pub dt: f64,
    pub options: SimOptions,
    pub thigh: BodyParams,
}

impl Plan {
    /// Phases in time order, labelled.
    pub fn phases(&self) -> Vec<(PhaseLabel, &PhaseInput)> {
        let mut phases = vec![(PhaseLabel::Stance, &self.stance)];
        if let Some(swing) = &self.swing {
            phases.push((PhaseLabel::Swing, swing));
        }
        phases
    }

    pub fn start(&self) -> f64 {
        self.stance.waypoints[0].time
    }

    pub fn end(&self) -> f64 {
        self.swing.as_ref().unwrap_or(&self.stance).waypoints[3].time
    }
}

fn config_err(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {message}"))
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // serde_json reports line and column of the offending field.
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Validates and resolves defaults. Relative file paths are taken from
    /// `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<Plan, CliError> {
        let schemes = match &self.schemes {
            Some(list) if list.is_empty() => {
                return Err(config_err("schemes", "at least one scheme is required"))
            }
            Some(list) => list.clone(),
            None => SchemeId::ALL.to_vec(),
        };
        if self.samples < 2 {
            return Err(config_err(
                "samples",
                format!("must be at least 2, got {}", self.samples),
            ));
        }
        if !(self.via_window > 0.0 && self.via_window.is_finite()) {
            return Err(config_err(
                "via_window",
                format!("must be positive, got {}", self.via_window),
            ));
        }
        if self.via_window_samples < 2 {
            return Err(config_err("via_window_samples", "must be at least 2"));
        }
        if !(self.continuity_epsilon > 0.0 && self.continuity_epsilon.is_finite()) {
            return Err(config_err("continuity_epsilon", "must be positive"));
        }

        let reference = self
            .reference
            .as_ref()
            .map(|r| r.resolve(base_dir))
            .transpose()?;

        let stance = resolve_phase(
            "stance",
            &self.stance,
            DEFAULT_STANCE_TIMES,
            reference.as_ref(),
        )?;
        let swing = self
            .swing
            .as_ref()
            .map(|cfg| resolve_phase("swing", cfg, DEFAULT_SWING_TIMES, reference.as_ref()))
            .transpose()?;
        if let Some(swing) = &swing {
            let (end, start) = (stance.waypoints[3].time, swing.waypoints[0].time);
            if end != start {
                return Err(config_err(
                    "swing.times",
                    format!("swing must start where stance ends ({end}), got {start}"),
                ));
            }
        }

        let mut plan = Plan {
            schemes,
            stance,
            swing,
            reference,
            samples: self.samples,
            via_window: self.via_window,
            via_window_samples: self.via_window_samples,
            continuity_epsilon: self.continuity_epsilon,
            simulation: None,
            output_dir: self.output_dir.as_ref().map(|p| base_dir.join(p)),
        };

        for (i, o) in self.overrides.iter().enumerate() {
            let field = format!("overrides[{i}]");
            if o.waypoint > 3 {
                return Err(config_err(&field, "waypoint index must be 0..=3"));
            }
            let target = match o.phase {
                PhaseName::Stance => &mut plan.stance,
                PhaseName::Swing => plan
                    .swing
                    .as_mut()
                    .ok_or_else(|| config_err(&field, "no swing phase is configured"))?,
            };
            target.overrides.push(SideOverride {
                waypoint: o.waypoint,
                side: o.side,
                order: o.order,
                value: o.value,
            });
        }

        if let Some((lo, hi)) = plan.reference.as_ref().and_then(Reference::span) {
            if lo > plan.start() || hi < plan.end() {
                return Err(config_err(
                    "reference",
                    format!(
                        "covers [{lo}, {hi}] but the trajectory spans [{}, {}]",
                        plan.start(),
                        plan.end()
                    ),
                ));
            }
        }

        if let Some(sim) = &self.simulation {
            let gains = PdGains::new(sim.kp, sim.kd).map_err(|e| config_err("simulation", e))?;
            let thigh = sim.thigh.unwrap_or(BodyParams::THIGH);
            thigh
                .validate()
                .map_err(|e| config_err("simulation.thigh", e))?;
            if !(sim.dt > 0.0 && sim.dt.is_finite()) {
                return Err(config_err("simulation.dt", "must be positive"));
            }
            plan.simulation = Some(SimulationPlan {
                gains,
                dt: sim.dt,
                options: SimOptions {
                    gravity_compensation: sim.gravity_compensation,
                    acceleration_feedforward: sim.acceleration_feedforward,
                },
                thigh,
            });
        }
        Ok(plan)
    }
}

fn resolve_phase(
    name: &str,
    cfg: &PhaseConfig,
    default_times: [f64; 4],
    reference: Option<&Reference>,
) -> Result<PhaseInput, CliError> {
    let times = cfg.times.unwrap_or(default_times);
    if !(times.iter().all(|t| t.is_finite()) && times.windows(2).all(|w| w[1] > w[0])) {
        return Err(config_err(
            &format!("{name}.times"),
            format!("must be strictly increasing, got {times:?}"),
        ));
    }

    let waypoints: [Waypoint; 4] = match (&cfg.waypoints, reference) {
        (Some(values), _) => {
            if values.len() != 4 {
                return Err(config_err(
                    &format!("{name}.waypoints"),
                    format!("expected 4 waypoints, got {}", values.len()),
                ));
            }
            std::array::from_fn(|i| Waypoint {
                time: times[i],
                position: values[i].position,
                velocity: values[i].velocity,
                acceleration: values[i].acceleration,
                jerk: values[i].jerk,
            })
        }
        (None, Some(r)) => times.map(|t| Waypoint::from_kinematics(t, r.kinematics(t))),
        (None, None) => {
            return Err(config_err(
                &format!("{name}.waypoints"),
                "no waypoints given and no reference to derive them from",
            ))
        }
    };

    let midpoints: [Option<f64>; 3] = match (&cfg.midpoints, reference) {
        (Some(values), _) => {
            if values.len() != 3 {
                return Err(config_err(
                    &format!("{name}.midpoints"),
                    format!("expected 3 entries (one per segment), got {}", values.len()),
                ));
            }
            [values[0], values[1], values[2]]
        }
        (None, Some(r)) => std::array::from_fn(|i| {
            let mid = 0.5 * (times[i] + times[i + 1]);
            Some(r.value(mid, DerivativeOrder::Position))
        }),
        (None, None) => [None; 3],
    };

    Ok(PhaseInput::new(waypoints).with_midpoints(midpoints))
}
