//! Accuracy and smoothness metrics.
//!
//! ADE ("average difference error") is `RMSE / √N`. With the default of 101
//! samples per series this gives the constant RMSE/ADE ratio of about 10.05
//! seen in published PSPB comparison tables. A conventional mean absolute
//! error is available separately as [`mae`].

use serde::Serialize;
use thiserror::Error;

use crate::poly::DerivativeOrder;
use crate::scheme::{PiecewiseTrajectory, SchemeError};

/// Samples per series unless configured otherwise.
pub const DEFAULT_SAMPLES: usize = 101;
/// Half-width of the via-point window in seconds.
pub const DEFAULT_VIA_WINDOW: f64 = 0.01;
pub const DEFAULT_VIA_WINDOW_SAMPLES: usize = 21;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("series mismatch: {0}")]
    SeriesMismatch(String),
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("via window must be positive and finite, got {0}")]
    InvalidWindow(f64),
    #[error("epsilon {epsilon} must be positive and below half the shortest segment ({limit})")]
    InvalidEpsilon { epsilon: f64, limit: f64 },
    #[error(transparent)]
    Trajectory(#[from] SchemeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AngleUnit {
    Degrees,
    Radians,
}

impl AngleUnit {
    /// Unit string for a derivative order, e.g. `deg/s^2`.
    pub fn label(self, order: DerivativeOrder) -> String {
        let base = match self {
            AngleUnit::Degrees => "deg",
            AngleUnit::Radians => "rad",
        };
        match order.index() {
            0 => base.to_string(),
            1 => format!("{base}/s"),
            k => format!("{base}/s^{k}"),
        }
    }
}

/// A sampled profile of one derivative order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    order: DerivativeOrder,
    unit: AngleUnit,
}

impl SampledSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        order: DerivativeOrder,
        unit: AngleUnit,
    ) -> Result<Self, MetricsError> {
        if times.len() != values.len() {
            return Err(MetricsError::InvalidSeries(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(MetricsError::TooFewSamples(times.len()));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(MetricsError::InvalidSeries(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            times,
            values,
            order,
            unit,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> DerivativeOrder {
        self.order
    }

    pub fn unit(&self) -> AngleUnit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Same grid and order, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, MetricsError> {
        Self::new(self.times.clone(), values, self.order, self.unit)
    }
}

/// `n` evenly spaced times over `[start, end]`, both ends included exactly.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Result<Vec<f64>, MetricsError> {
    if n < 2 {
        return Err(MetricsError::TooFewSamples(n));
    }
    let step = (end - start) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                end
            } else {
                start + i as f64 * step
            }
        })
        .collect())
}

pub fn sample(
    traj: &PiecewiseTrajectory,
    n: usize,
    order: DerivativeOrder,
) -> Result<SampledSeries, MetricsError> {
    let times = uniform_grid(traj.start(), traj.end(), n)?;
    let values = times
        .iter()
        .map(|&t| traj.evaluate(t, order))
        .collect::<Result<Vec<_>, _>>()?;
    SampledSeries::new(times, values, order, AngleUnit::Degrees)
}

/// Samples a reference function on the same grid as `like`.
pub fn sample_fn(like: &SampledSeries, f: impl Fn(f64) -> f64) -> SampledSeries {
    SampledSeries {
        times: like.times.clone(),
        values: like.times.iter().map(|&t| f(t)).collect(),
        order: like.order,
        unit: like.unit,
    }
}

fn check_pair(a: &SampledSeries, b: &SampledSeries) -> Result<(), MetricsError> {
    if a.order != b.order {
        return Err(MetricsError::SeriesMismatch(format!(
            "orders {} and {} differ",
            a.order.index(),
            b.order.index()
        )));
    }
    if a.unit != b.unit {
        return Err(MetricsError::SeriesMismatch("units differ".into()));
    }
    if a.times != b.times {
        return Err(MetricsError::SeriesMismatch("sample grids differ".into()));
    }
    Ok(())
}

fn sum_sq(a: &SampledSeries, b: &SampledSeries) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn rmse_values(errors: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = errors.len();
    if n == 0 {
        return 0.0;
    }
    (errors.map(|e| e * e).sum::<f64>() / n as f64).sqrt()
}

pub fn rmse(a: &SampledSeries, b: &SampledSeries) -> Result<f64, MetricsError> {
    check_pair(a, b)?;
    Ok((sum_sq(a, b) / a.len() as f64).sqrt())
}

/// `RMSE / √N`, i.e. `√(Σ eᵢ²) / N`.
pub fn ade(a: &SampledSeries, b: &SampledSeries) -> Result<f64, MetricsError> {
    check_pair(a, b)?;
    Ok(rmse(a, b)? / (a.len() as f64).sqrt())
}

/// Mean absolute error.
pub fn mae(a: &SampledSeries, b: &SampledSeries) -> Result<f64, MetricsError> {
    check_pair(a, b)?;
    let total: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(total / a.len() as f64)
}

/// Windowed error around one via time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViaWindowError {
    pub via_time: f64,
    pub window_start: f64,
    pub window_end: f64,
    /// The nominal window reached outside the trajectory and was cut back.
    pub clipped: bool,
    pub rmse: f64,
}

/// RMSE of `traj − reference` over `[v − window, v + window]` for every via
/// time `v`.
pub fn via_point_rmse(
    traj: &PiecewiseTrajectory,
    reference: impl Fn(f64) -> f64,
    order: DerivativeOrder,
    window: f64,
    samples_per_window: usize,
) -> Result<Vec<ViaWindowError>, MetricsError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(MetricsError::InvalidWindow(window));
    }
    if samples_per_window < 2 {
        return Err(MetricsError::TooFewSamples(samples_per_window));
    }
    traj.via_times()
        .iter()
        .map(|&v| {
            let lo = v - window;
            let hi = v + window;
            let window_start = lo.max(traj.start());
            let window_end = hi.min(traj.end());
            let clipped = window_start != lo || window_end != hi;
            let grid = uniform_grid(window_start, window_end, samples_per_window)?;
            let errors = grid
                .iter()
                .map(|&t| Ok(traj.evaluate(t, order)? - reference(t)))
                .collect::<Result<Vec<f64>, SchemeError>>()?;
            Ok(ViaWindowError {
                via_time: v,
                window_start,
                window_end,
                clipped,
                rmse: rmse_values(errors.into_iter()),
            })
        })
        .collect()
}

/// Jump of one derivative order across one via point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderJump {
    pub order: DerivativeOrder,
    /// `|right limit − left limit|` from the segment polynomials.
    pub jump: f64,
    /// Finite-window cross-check `|f(v + ε) − f(v − ε)|`.
    pub sampled_jump: f64,
    /// Both adjacent segments pin this order at the via point.
    pub constrained_both_sides: bool,
    /// Both sides pin it to the identical value.
    pub values_agree: bool,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViaContinuity {
    pub via_time: f64,
    pub orders: [OrderJump; 4],
}

impl ViaContinuity {
    pub fn jump(&self, order: DerivativeOrder) -> &OrderJump {
        &self.orders[order.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub vias: Vec<ViaContinuity>,
}

impl ContinuityReport {
    pub fn max_jump(&self, order: DerivativeOrder) -> f64 {
        self.vias
            .iter()
            .map(|v| v.jump(order).jump)
            .fold(0.0, f64::max)
    }
}

/// Derivative jumps at every via time, evaluated from the adjacent segment
/// polynomials at their shared boundary.
pub fn continuity_report(
    traj: &PiecewiseTrajectory,
    epsilon: f64,
) -> Result<ContinuityReport, MetricsError> {
    let limit = traj.shortest_segment() / 2.0;
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(MetricsError::InvalidEpsilon { epsilon, limit });
    }
    let vias = traj
        .segments()
        .windows(2)
        .map(|pair| {
            let (left_seg, right_seg) = (&pair[0], &pair[1]);
            let v = right_seg.t_start;
            let orders = DerivativeOrder::ALL.map(|order| {
                let left = left_seg.eval_at_tau(1.0, order);
                let right = right_seg.eval_at_tau(0.0, order);
                let sampled_jump =
                    (right_seg.eval(v + epsilon, order) - left_seg.eval(v - epsilon, order)).abs();
                let pinned = (
                    left_seg.end_constraint(order),
                    right_seg.start_constraint(order),
                );
                let (constrained_both_sides, values_agree) = match pinned {
                    (Some(l), Some(r)) => (true, l == r),
                    _ => (false, false),
                };
                OrderJump {
                    order,
                    jump: (right - left).abs(),
                    sampled_jump,
                    constrained_both_sides,
                    values_agree,
                    left,
                    right,
                }
            });
            ViaContinuity {
                via_time: v,
                orders,
            }
        })
        .collect();
    Ok(ContinuityReport { vias })
}

/// RMSE / ADE / MAE of one derivative order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorStats {
    pub order: DerivativeOrder,
    pub samples: usize,
    pub rmse: f64,
    pub ade: f64,
    pub mae: f64,
}

impl ErrorStats {
    pub fn between(a: &SampledSeries, b: &SampledSeries) -> Result<Self, MetricsError> {
        Ok(Self {
            order: a.order,
            samples: a.len(),
            rmse: rmse(a, b)?,
            ade: ade(a, b)?,
            mae: mae(a, b)?,
        })
    }
}

/// Error statistics, windowed via-point errors and optional jump table.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MetricsReport {
    pub errors: Vec<ErrorStats>,
    pub via_windows: Vec<(DerivativeOrder, Vec<ViaWindowError>)>,
    pub continuity: Option<ContinuityReport>,
}

impl MetricsReport {
    pub fn stats(&self, order: DerivativeOrder) -> Option<&ErrorStats> {
        self.errors.iter().find(|e| e.order == order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{
        builtin_scheme, generate_phase, PhaseInput, PhaseLabel, SchemeId, Waypoint,
    };
    use crate::solve::{solve_segment, Constraint};
    use proptest::prelude::*;
    use DerivativeOrder::*;

    fn series(values: &[f64]) -> SampledSeries {
        let times = (0..values.len()).map(|i| i as f64).collect();
        SampledSeries::new(times, values.to_vec(), Position, AngleUnit::Degrees).unwrap()
    }

    fn ramp() -> PiecewiseTrajectory {
        let seg = solve_segment(
            1,
            &[
                Constraint::at_start(Position, 0.0),
                Constraint::at_end(Position, 1.0),
            ],
            0.0,
            1.0,
        )
        .unwrap();
        PiecewiseTrajectory::new(vec![seg], PhaseLabel::Stance).unwrap()
    }

    fn generic_stance(id: SchemeId) -> PiecewiseTrajectory {
        let f = |t: f64| 20.0 * (3.0 * t).sin() + 5.0 * t * t;
        let k = |t: f64| crate::poly::Kinematics {
            position: f(t),
            velocity: 60.0 * (3.0 * t).cos() + 10.0 * t,
            acceleration: -180.0 * (3.0 * t).sin() + 10.0,
            jerk: -540.0 * (3.0 * t).cos(),
        };
        let wps = [0.0, 0.12, 0.48, 0.6].map(|t| Waypoint::from_kinematics(t, k(t)));
        let input =
            PhaseInput::new(wps).with_midpoints([Some(f(0.06)), Some(f(0.3)), Some(f(0.54))]);
        generate_phase(&builtin_scheme(id), &input, PhaseLabel::Stance).unwrap()
    }

    #[test]
    fn sample_examples() {
        let s = sample(&ramp(), 3, Position).unwrap();
        assert_eq!(s.values(), &[0.0, 0.5, 1.0]);
        let s = sample(&generic_stance(SchemeId::S434_1), 101, Position).unwrap();
        assert_eq!(s.len(), 101);
        assert_eq!(s.times()[100] - s.times()[0], 0.6);
        assert_eq!(
            sample(&ramp(), 1, Position),
            Err(MetricsError::TooFewSamples(1))
        );
    }

    #[test]
    fn rmse_and_ade_examples() {
        let a = series(&[1.0, 2.0]);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        assert_eq!(ade(&a, &a).unwrap(), 0.0);
        let b = series(&[4.0, 6.0]);
        assert!((rmse(&a, &b).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((ade(&a, &b).unwrap() - 2.5).abs() < 1e-15);
        assert!((mae(&a, &b).unwrap() - 3.5).abs() < 1e-15);
        let shifted = series(&[1.0 - 0.75, 2.0 - 0.75]);
        assert!((rmse(&a, &shifted).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mismatched_series_are_rejected() {
        let a = series(&[1.0, 2.0]);
        let b = series(&[1.0, 2.0, 3.0]);
        assert!(matches!(rmse(&a, &b), Err(MetricsError::SeriesMismatch(_))));
        let c = SampledSeries::new(vec![0.0, 1.0], vec![1.0, 2.0], Velocity, AngleUnit::Degrees)
            .unwrap();
        assert!(matches!(ade(&a, &c), Err(MetricsError::SeriesMismatch(_))));
        assert!(
            SampledSeries::new(vec![0.0, 0.0], vec![1.0, 2.0], Position, AngleUnit::Degrees)
                .is_err()
        );
    }

    #[test]
    fn via_windows_default_bounds() {
        let traj = generic_stance(SchemeId::S656_1);
        let windows = via_point_rmse(
            &traj,
            |t| traj.evaluate(t, Position).unwrap(),
            Position,
            DEFAULT_VIA_WINDOW,
            DEFAULT_VIA_WINDOW_SAMPLES,
        )
        .unwrap();
        assert_eq!(windows.len(), 2);
        assert_eq!(windows[0].window_start, 0.12 - 0.01);
        assert_eq!(windows[0].window_end, 0.12 + 0.01);
        assert!(windows.iter().all(|w| w.rmse == 0.0 && !w.clipped));
    }

    #[test]
    fn via_window_clips_at_domain_edges() {
        let traj = generic_stance(SchemeId::S434_1);
        let windows = via_point_rmse(&traj, |_| 0.0, Position, 0.2, 11).unwrap();
        assert!(windows[0].clipped);
        assert_eq!(windows[0].window_start, 0.0);
        assert!(windows[1].clipped);
        assert_eq!(windows[1].window_end, 0.6);
        assert!(matches!(
            via_point_rmse(&traj, |_| 0.0, Position, 0.0, 11),
            Err(MetricsError::InvalidWindow(_))
        ));
    }

    #[test]
    fn acceleration_jump_leaves_position_error_small() {
        // Compare a 434-1 stance (acceleration jumps at the vias) with its own
        // segment on the other side extended across the via: the position gap
        // inside a ±0.01 s window is bounded by ½·|Δa|·w² + ⅙·max|Δj|·w³.
        let traj = generic_stance(SchemeId::S434_1);
        let report = continuity_report(&traj, 1e-4).unwrap();
        let da = report.vias[0].jump(Acceleration).jump;
        assert!(da > 1.0);
        let left = traj.segments()[0].clone();
        let right = &traj.segments()[1];
        let dj = [0.12, 0.13]
            .iter()
            .map(|&t| (right.eval(t, Jerk) - left.eval(t, Jerk)).abs())
            .fold(0.0, f64::max);
        let windows =
            via_point_rmse(&traj, |t| left.eval(t, Position), Position, 0.01, 21).unwrap();
        let w: f64 = 0.01;
        let bound = 0.5 * da * w * w + dj * w.powi(3) / 6.0 + 1e-9;
        assert!(windows[0].rmse <= bound, "{} > {}", windows[0].rmse, bound);
        assert!(windows[0].rmse > 0.0);
    }

    #[test]
    fn continuity_flags_follow_scheme_tables() {
        let r = continuity_report(&generic_stance(SchemeId::S545_1), 1e-4).unwrap();
        for via in &r.vias {
            assert!(via.jump(Position).constrained_both_sides);
            assert!(via.jump(Velocity).constrained_both_sides);
            assert!(!via.jump(Acceleration).constrained_both_sides);
            assert!(via.jump(Position).jump <= 1e-9);
            assert!(via.jump(Acceleration).jump > 1e-3);
        }
        let r = continuity_report(&generic_stance(SchemeId::S656_2), 1e-4).unwrap();
        for via in &r.vias {
            for order in [Position, Velocity, Acceleration] {
                assert!(via.jump(order).constrained_both_sides && via.jump(order).values_agree);
                assert!(via.jump(order).jump <= 1e-9);
            }
            assert!(!via.jump(Jerk).constrained_both_sides);
        }
    }

    #[test]
    fn sampled_cross_check_tracks_analytic_jump() {
        let r = continuity_report(&generic_stance(SchemeId::S434_1), 1e-7).unwrap();
        for via in &r.vias {
            let j = via.jump(Acceleration);
            assert!((j.sampled_jump - j.jump).abs() < 1e-3 * (1.0 + j.jump));
        }
    }

    #[test]
    fn epsilon_must_fit_inside_segments() {
        let traj = generic_stance(SchemeId::S434_1);
        assert!(matches!(
            continuity_report(&traj, 0.07),
            Err(MetricsError::InvalidEpsilon { .. })
        ));
        assert!(continuity_report(&traj, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn rmse_bounds_ade(values in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..200)) {
            let a = series(&values.iter().map(|v| v.0).collect::<Vec<_>>());
            let b = series(&values.iter().map(|v| v.1).collect::<Vec<_>>());
            let r = rmse(&a, &b).unwrap();
            let d = ade(&a, &b).unwrap();
            prop_assert!(r >= d);
            if r > 0.0 {
                prop_assert!(r > d);
            }
        }

        #[test]
        fn rmse_is_translation_invariant(
            values in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..50),
            shift in -1000.0..1000.0f64,
        ) {
            // Exact equality holds whenever adding the shift is exact, which a
            // dyadic grid of values guarantees.
            let q = |x: f64| (x * 64.0).round() / 64.0;
            let a: Vec<f64> = values.iter().map(|v| q(v.0)).collect();
            let b: Vec<f64> = values.iter().map(|v| q(v.1)).collect();
            let s = q(shift);
            let a2: Vec<f64> = a.iter().map(|x| x + s).collect();
            let b2: Vec<f64> = b.iter().map(|x| x + s).collect();
            prop_assert_eq!(
                rmse(&series(&a), &series(&b)).unwrap(),
                rmse(&series(&a2), &series(&b2)).unwrap()
            );
        }
    }
}
