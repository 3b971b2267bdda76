//! The six three-segment constraint schemes and gait composition.
//!
//! Every phase (stance or swing) is one three-segment trajectory bracketed by
//! four waypoints. The segments are solved independently and only meet through
//! the waypoint values they read, so a derivative order pinned on both sides of
//! a via point is continuous there and any other order is free to jump.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{DerivativeOrder, Kinematics};
use crate::solve::{solve_segment, Anchor, Constraint, SolveError, SolvedSegment};

use DerivativeOrder::{Acceleration as A, Jerk as J, Position as P, Velocity as V};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("unknown scheme `{0}` (expected one of 434-1, 434-2, 545-1, 545-2, 656-1, 656-2)")]
    UnknownScheme(String),
    #[error("malformed scheme: {0}")]
    MalformedScheme(String),
    #[error("waypoint {waypoint} (t = {time}) has no {order:?} value but the scheme needs one")]
    MissingWaypointDerivative {
        waypoint: usize,
        time: f64,
        order: DerivativeOrder,
    },
    #[error("segment {segment} needs a mid-point position but none was given")]
    MissingMidpoint { segment: usize },
    #[error("waypoint times must be strictly increasing and finite: {0:?}")]
    NonIncreasingTimes(Vec<f64>),
    #[error("stance ends at {stance_end} but swing starts at {swing_start}")]
    NonContiguousPhases { stance_end: f64, swing_start: f64 },
    #[error("side override does not match any constraint: {0}")]
    UnusedOverride(String),
    #[error("t = {t} is outside the trajectory span [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },
    #[error("trajectory segments are not contiguous at index {0}")]
    NonContiguousSegments(usize),
    #[error("trajectory has no segments")]
    EmptyTrajectory,
    #[error("segment {segment}: {source}")]
    Solve {
        segment: usize,
        #[source]
        source: SolveError,
    },
}

/// The six builtin constraint schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    S434_1,
    S434_2,
    S545_1,
    S545_2,
    S656_1,
    S656_2,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::S434_1,
        SchemeId::S434_2,
        SchemeId::S545_1,
        SchemeId::S545_2,
        SchemeId::S656_1,
        SchemeId::S656_2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::S434_1 => "434-1",
            SchemeId::S434_2 => "434-2",
            SchemeId::S545_1 => "545-1",
            SchemeId::S545_2 => "545-2",
            SchemeId::S656_1 => "656-1",
            SchemeId::S656_2 => "656-2",
        }
    }

    pub fn family(self) -> SchemeFamily {
        match self {
            SchemeId::S434_1 | SchemeId::S434_2 => SchemeFamily::F434,
            SchemeId::S545_1 | SchemeId::S545_2 => SchemeFamily::F545,
            SchemeId::S656_1 | SchemeId::S656_2 => SchemeFamily::F656,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| SchemeError::UnknownScheme(s.to_string()))
    }
}

impl Serialize for SchemeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SchemeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Degree family: 4-3-4, 5-4-5 or 6-5-6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeFamily {
    F434,
    F545,
    F656,
}

impl SchemeFamily {
    pub const ALL: [SchemeFamily; 3] = [SchemeFamily::F434, SchemeFamily::F545, SchemeFamily::F656];

    pub fn name(self) -> &'static str {
        match self {
            SchemeFamily::F434 => "434",
            SchemeFamily::F545 => "545",
            SchemeFamily::F656 => "656",
        }
    }
}

impl fmt::Display for SchemeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a scheme slot reads its value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotAnchor {
    Start,
    Mid,
    End,
}

/// One (anchor, order) entry of a scheme row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintSlot {
    pub anchor: SlotAnchor,
    pub order: DerivativeOrder,
}

/// A three-segment constraint template.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    name: String,
    segment_degrees: [usize; 3],
    segment_constraints: [Vec<ConstraintSlot>; 3],
}

impl SchemeSpec {
    /// Checks that every segment is exactly determined and that mid-point
    /// slots only pin position.
    pub fn new(
        name: impl Into<String>,
        segment_degrees: [usize; 3],
        segment_constraints: [Vec<ConstraintSlot>; 3],
    ) -> Result<Self, SchemeError> {
        let name = name.into();
        for (i, (degree, slots)) in segment_degrees.iter().zip(&segment_constraints).enumerate() {
            if slots.len() != degree + 1 {
                return Err(SchemeError::MalformedScheme(format!(
                    "{name}: segment {} has degree {degree} but {} constraints",
                    i + 1,
                    slots.len()
                )));
            }
            if slots
                .iter()
                .any(|s| s.anchor == SlotAnchor::Mid && s.order != P)
            {
                return Err(SchemeError::MalformedScheme(format!(
                    "{name}: segment {} uses a non-position mid-point constraint",
                    i + 1
                )));
            }
            for (a, s) in slots.iter().enumerate() {
                if slots[..a].contains(s) {
                    return Err(SchemeError::MalformedScheme(format!(
                        "{name}: segment {} repeats {:?} at {:?}",
                        i + 1,
                        s.order,
                        s.anchor
                    )));
                }
            }
        }
        Ok(Self {
            name,
            segment_degrees,
            segment_constraints,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn segment_degrees(&self) -> [usize; 3] {
        self.segment_degrees
    }

    pub fn segment_constraints(&self) -> &[Vec<ConstraintSlot>; 3] {
        &self.segment_constraints
    }

    pub fn pins(&self, segment: usize, anchor: SlotAnchor, order: DerivativeOrder) -> bool {
        self.segment_constraints[segment].contains(&ConstraintSlot { anchor, order })
    }
}

fn row(start: &[DerivativeOrder], mid: bool, end: &[DerivativeOrder]) -> Vec<ConstraintSlot> {
    let mut slots: Vec<ConstraintSlot> = start
        .iter()
        .map(|&order| ConstraintSlot {
            anchor: SlotAnchor::Start,
            order,
        })
        .collect();
    if mid {
        slots.push(ConstraintSlot {
            anchor: SlotAnchor::Mid,
            order: P,
        });
    }
    slots.extend(end.iter().map(|&order| ConstraintSlot {
        anchor: SlotAnchor::End,
        order,
    }));
    slots
}

pub fn builtin_scheme(id: SchemeId) -> SchemeSpec {
    let (degrees, rows) = match id {
        SchemeId::S434_1 => (
            [4, 3, 4],
            [
                row(&[P, V, A], false, &[P, V]),
                row(&[P, V], false, &[P, V]),
                row(&[P, V], false, &[P, V, A]),
            ],
        ),
        SchemeId::S434_2 => (
            [4, 3, 4],
            [
                row(&[P, V], true, &[P, V]),
                row(&[P, V], false, &[P, V]),
                row(&[P, V], true, &[P, V]),
            ],
        ),
        SchemeId::S545_1 => (
            [5, 4, 5],
            [
                row(&[P, V, A, J], false, &[P, V]),
                row(&[P, V, A], false, &[P, V]),
                row(&[P, V, A], false, &[P, V, A]),
            ],
        ),
        SchemeId::S545_2 => (
            [5, 4, 5],
            [
                row(&[P, V, A], false, &[P, V, A]),
                row(&[P, V], true, &[P, V]),
                row(&[P, V, A], false, &[P, V, A]),
            ],
        ),
        SchemeId::S656_1 => (
            [6, 5, 6],
            [
                row(&[P, V, A, J], false, &[P, V, A]),
                row(&[P, V, A], false, &[P, V, A]),
                row(&[P, V, A], false, &[P, V, A, J]),
            ],
        ),
        SchemeId::S656_2 => (
            [6, 5, 6],
            [
                row(&[P, V, A], true, &[P, V, A]),
                row(&[P, V, A], false, &[P, V, A]),
                row(&[P, V, A], true, &[P, V, A]),
            ],
        ),
    };
    SchemeSpec::new(id.name(), degrees, rows).expect("builtin schemes are exactly determined")
}

/// Look up a builtin scheme by its identifier, e.g. `"545-1"`.
pub fn builtin_scheme_by_name(name: &str) -> Result<SchemeSpec, SchemeError> {
    Ok(builtin_scheme(name.parse()?))
}

/// A boundary sample of the joint angle and whichever derivatives are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub time: f64,
    pub position: f64,
    #[serde(default)]
    pub velocity: Option<f64>,
    #[serde(default)]
    pub acceleration: Option<f64>,
    #[serde(default)]
    pub jerk: Option<f64>,
}

impl Waypoint {
    pub fn new(time: f64, position: f64) -> Self {
        Self {
            time,
            position,
            velocity: None,
            acceleration: None,
            jerk: None,
        }
    }

    pub fn from_kinematics(time: f64, k: Kinematics) -> Self {
        Self {
            time,
            position: k.position,
            velocity: Some(k.velocity),
            acceleration: Some(k.acceleration),
            jerk: Some(k.jerk),
        }
    }

    pub fn get(&self, order: DerivativeOrder) -> Option<f64> {
        match order {
            P => Some(self.position),
            V => self.velocity,
            A => self.acceleration,
            J => self.jerk,
        }
    }
}

/// Which side of a waypoint a value applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// End of the segment arriving at the waypoint.
    Left,
    /// Start of the segment leaving the waypoint.
    Right,
}

/// Replaces the waypoint value one side of a waypoint reads, which lets a
/// phase be built with deliberately inconsistent per-side constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideOverride {
    /// Waypoint index 0..=3 within the phase.
    pub waypoint: usize,
    pub side: Side,
    pub order: DerivativeOrder,
    pub value: f64,
}

/// Everything one phase needs: four waypoints (start, via 1, via 2, end),
/// optional per-segment mid-point positions and optional side overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInput {
    pub waypoints: [Waypoint; 4],
    pub midpoints: [Option<f64>; 3],
    pub overrides: Vec<SideOverride>,
}

impl PhaseInput {
    pub fn new(waypoints: [Waypoint; 4]) -> Self {
        Self {
            waypoints,
            midpoints: [None; 3],
            overrides: Vec::new(),
        }
    }

    pub fn with_midpoints(mut self, midpoints: [Option<f64>; 3]) -> Self {
        self.midpoints = midpoints;
        self
    }

    pub fn with_overrides(mut self, overrides: Vec<SideOverride>) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn times(&self) -> [f64; 4] {
        self.waypoints.map(|w| w.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseLabel {
    Stance,
    Swing,
    Full,
}

impl PhaseLabel {
    pub fn name(self) -> &'static str {
        match self {
            PhaseLabel::Stance => "stance",
            PhaseLabel::Swing => "swing",
            PhaseLabel::Full => "full",
        }
    }
}

/// Contiguous solved segments; via times are the interior boundaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseTrajectory {
    segments: Vec<SolvedSegment>,
    via_times: Vec<f64>,
    phase_label: PhaseLabel,
}

impl PiecewiseTrajectory {
    pub fn new(segments: Vec<SolvedSegment>, phase_label: PhaseLabel) -> Result<Self, SchemeError> {
        if segments.is_empty() {
            return Err(SchemeError::EmptyTrajectory);
        }
        for (i, pair) in segments.windows(2).enumerate() {
            if pair[0].t_end != pair[1].t_start {
                return Err(SchemeError::NonContiguousSegments(i));
            }
        }
        let via_times = segments[1..].iter().map(|s| s.t_start).collect();
        Ok(Self {
            segments,
            via_times,
            phase_label,
        })
    }

    pub fn segments(&self) -> &[SolvedSegment] {
        &self.segments
    }

    pub fn via_times(&self) -> &[f64] {
        &self.via_times
    }

    pub fn phase_label(&self) -> PhaseLabel {
        self.phase_label
    }

    pub fn start(&self) -> f64 {
        self.segments[0].t_start
    }

    pub fn end(&self) -> f64 {
        self.segments[self.segments.len() - 1].t_end
    }

    pub fn span(&self) -> f64 {
        self.end() - self.start()
    }

    /// Index of the segment owning `t`: right-continuous at via times, the
    /// final instant belongs to the last segment.
    pub fn segment_index(&self, t: f64) -> Result<usize, SchemeError> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(SchemeError::OutOfDomain {
                t,
                start: self.start(),
                end: self.end(),
            });
        }
        let idx = self.via_times.partition_point(|&v| v <= t);
        Ok(idx)
    }

    pub fn evaluate(&self, t: f64, order: DerivativeOrder) -> Result<f64, SchemeError> {
        let idx = self.segment_index(t)?;
        Ok(self.segments[idx].eval(t, order))
    }

    pub fn kinematics(&self, t: f64) -> Result<Kinematics, SchemeError> {
        let idx = self.segment_index(t)?;
        Ok(self.segments[idx].kinematics(t))
    }

    pub fn shortest_segment(&self) -> f64 {
        self.segments
            .iter()
            .map(SolvedSegment::duration)
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_times(times: &[f64]) -> Result<(), SchemeError> {
    let ok = times.iter().all(|t| t.is_finite()) && times.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(SchemeError::NonIncreasingTimes(times.to_vec()))
    }
}

fn describe(o: &SideOverride) -> String {
    format!(
        "waypoint {} {:?} side, order {}",
        o.waypoint,
        o.side,
        o.order.index()
    )
}

/// Solves the three segments of one phase independently.
pub fn generate_phase(
    scheme: &SchemeSpec,
    input: &PhaseInput,
    label: PhaseLabel,
) -> Result<PiecewiseTrajectory, SchemeError> {
    let times = input.times();
    check_times(&times)?;

    for o in &input.overrides {
        let segment_and_anchor = match (o.waypoint, o.side) {
            (1..=3, Side::Left) => Some((o.waypoint - 1, SlotAnchor::End)),
            (0..=2, Side::Right) => Some((o.waypoint, SlotAnchor::Start)),
            _ => None,
        };
        match segment_and_anchor {
            Some((seg, anchor)) if scheme.pins(seg, anchor, o.order) => {}
            _ => return Err(SchemeError::UnusedOverride(describe(o))),
        }
    }

    let mut segments = Vec::with_capacity(3);
    for (seg, slots) in scheme.segment_constraints().iter().enumerate() {
        let constraints = slots
            .iter()
            .map(|slot| resolve_slot(input, seg, *slot))
            .collect::<Result<Vec<_>, _>>()?;
        let solved = solve_segment(
            scheme.segment_degrees()[seg],
            &constraints,
            times[seg],
            times[seg + 1],
        )
        .map_err(|source| SchemeError::Solve {
            segment: seg + 1,
            source,
        })?;
        segments.push(solved);
    }
    PiecewiseTrajectory::new(segments, label)
}

fn resolve_slot(
    input: &PhaseInput,
    segment: usize,
    slot: ConstraintSlot,
) -> Result<Constraint, SchemeError> {
    let (waypoint, side, anchor) = match slot.anchor {
        SlotAnchor::Mid => {
            let value = input.midpoints[segment].ok_or(SchemeError::MissingMidpoint {
                segment: segment + 1,
            })?;
            return Ok(Constraint::midpoint(value));
        }
        SlotAnchor::Start => (segment, Side::Right, Anchor::SegmentStart),
        SlotAnchor::End => (segment + 1, Side::Left, Anchor::SegmentEnd),
    };
    let overridden = input
        .overrides
        .iter()
        .find(|o| o.waypoint == waypoint && o.side == side && o.order == slot.order)
        .map(|o| o.value);
    let wp = &input.waypoints[waypoint];
    let value = match overridden {
        Some(v) => v,
        None => wp
            .get(slot.order)
            .ok_or(SchemeError::MissingWaypointDerivative {
                waypoint,
                time: wp.time,
                order: slot.order,
            })?,
    };
    Ok(Constraint {
        order: slot.order,
        anchor,
        value,
    })
}

/// Stance followed by swing as one six-segment trajectory.
pub fn generate_gait(
    scheme: &SchemeSpec,
    stance: &PhaseInput,
    swing: &PhaseInput,
) -> Result<PiecewiseTrajectory, SchemeError> {
    let stance_end = stance.waypoints[3].time;
    let swing_start = swing.waypoints[0].time;
    if stance_end != swing_start {
        return Err(SchemeError::NonContiguousPhases {
            stance_end,
            swing_start,
        });
    }
    let stance = generate_phase(scheme, stance, PhaseLabel::Stance)?;
    let swing = generate_phase(scheme, swing, PhaseLabel::Swing)?;
    let segments = stance.segments.into_iter().chain(swing.segments).collect();
    PiecewiseTrajectory::new(segments, PhaseLabel::Full)
}

/// Default stance waypoint times in seconds.
pub const DEFAULT_STANCE_TIMES: [f64; 4] = [0.0, 0.12, 0.48, 0.6];
/// Default swing waypoint times in seconds (same proportions as stance).
pub const DEFAULT_SWING_TIMES: [f64; 4] = [0.6, 0.68, 0.92, 1.0];
