mod common;

use common::Degree7Reference;
use pspb::metrics::{continuity_report, sample};
use pspb::poly::DerivativeOrder::{self, *};
use pspb::scheme::{
    builtin_scheme, generate_gait, generate_phase, PhaseLabel, SchemeFamily, SchemeId,
    DEFAULT_STANCE_TIMES, DEFAULT_SWING_TIMES,
};

/// Orders that must be continuous at both stance via points, per scheme.
fn guaranteed_orders(id: SchemeId) -> &'static [DerivativeOrder] {
    match id.family() {
        SchemeFamily::F434 | SchemeFamily::F545 => &[Position, Velocity],
        SchemeFamily::F656 => &[Position, Velocity, Acceleration],
    }
}

#[test]
fn guaranteed_orders_are_continuous_for_generic_references() {
    for seed in 0..20 {
        let reference = Degree7Reference::seeded(seed);
        let input = reference.phase_input(DEFAULT_STANCE_TIMES);
        for id in SchemeId::ALL {
            let traj = generate_phase(&builtin_scheme(id), &input, PhaseLabel::Stance).unwrap();
            let report = continuity_report(&traj, 1e-4).unwrap();
            assert_eq!(report.vias.len(), 2);
            for via in &report.vias {
                for &order in guaranteed_orders(id) {
                    let j = via.jump(order);
                    assert!(j.constrained_both_sides && j.values_agree, "{id} {order:?}");
                    assert!(
                        j.jump <= 1e-9,
                        "{id} seed {seed}: {order:?} jump {}",
                        j.jump
                    );
                }
                if id.family() == SchemeFamily::F656 {
                    assert!(!via.jump(Jerk).constrained_both_sides);
                    assert!(via.jump(Jerk).jump > 0.0, "{id} seed {seed}");
                } else {
                    assert!(!via.jump(Acceleration).constrained_both_sides);
                }
            }
        }
    }
}

/// Acceleration jump at each stance via divided by the reference's peak
/// stance acceleration, for every seed.
fn relative_acceleration_jumps(id: SchemeId, seeds: std::ops::Range<u64>) -> Vec<f64> {
    seeds
        .flat_map(|seed| {
            let reference = Degree7Reference::seeded(seed);
            let input = reference.phase_input(DEFAULT_STANCE_TIMES);
            let scale = reference.acceleration_scale(0.0, 0.6);
            let traj = generate_phase(&builtin_scheme(id), &input, PhaseLabel::Stance).unwrap();
            let report = continuity_report(&traj, 1e-4).unwrap();
            report
                .vias
                .iter()
                .map(|v| v.jump(Acceleration).jump / scale)
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn acceleration_jumps_at_434_vias() {
    for id in [SchemeId::S434_1, SchemeId::S434_2] {
        for r in relative_acceleration_jumps(id, 0..20) {
            assert!(r > 1e-3, "{id}: {r}");
        }
    }
}

#[test]
fn acceleration_jumps_at_545_vias() {
    // The first 545-1 segment pins four orders at the start, so its end
    // acceleration tracks a smooth reference closely and the jump at the
    // first via can be small. It never vanishes.
    for id in [SchemeId::S545_1, SchemeId::S545_2] {
        let ratios = relative_acceleration_jumps(id, 0..20);
        assert!(ratios.iter().all(|r| *r > 1e-5), "{id}: {ratios:?}");
        let above = ratios.iter().filter(|r| **r > 1e-3).count();
        assert!(above * 10 >= ratios.len() * 9, "{id}: {ratios:?}");
    }
    assert!(relative_acceleration_jumps(SchemeId::S545_1, 0..1)
        .iter()
        .all(|r| *r > 1e-3));
}

#[test]
fn flagged_orders_never_jump() {
    for seed in 100..110 {
        let reference = Degree7Reference::seeded(seed);
        let stance = reference.phase_input(DEFAULT_STANCE_TIMES);
        let swing = reference.phase_input(DEFAULT_SWING_TIMES);
        for id in SchemeId::ALL {
            let traj = generate_gait(&builtin_scheme(id), &stance, &swing).unwrap();
            let report = continuity_report(&traj, 1e-4).unwrap();
            assert_eq!(report.vias.len(), 5);
            for via in &report.vias {
                for j in &via.orders {
                    if j.constrained_both_sides && j.values_agree {
                        let scale = j.left.abs().max(j.right.abs());
                        assert!(
                            j.jump <= 1e-9 * (1.0 + scale),
                            "{id} {:?} {}",
                            j.order,
                            j.jump
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn phase_boundary_position_mismatch_is_reported() {
    let reference = Degree7Reference::seeded(3);
    let stance = reference.phase_input(DEFAULT_STANCE_TIMES);
    let mut swing = reference.phase_input(DEFAULT_SWING_TIMES);
    swing.waypoints[0].position += 2.5;
    let traj = generate_gait(&builtin_scheme(SchemeId::S656_2), &stance, &swing).unwrap();
    let report = continuity_report(&traj, 1e-4).unwrap();
    let boundary = &report.vias[2];
    assert_eq!(boundary.via_time, 0.6);
    let p = boundary.jump(Position);
    assert!(p.constrained_both_sides && !p.values_agree);
    assert!((p.jump - 2.5).abs() < 1e-9);
    // The stance-internal vias are untouched.
    assert!(report.vias[0].jump(Position).jump <= 1e-9);
}

#[test]
fn middle_segment_jerk_is_constant_for_434() {
    for seed in 0..5 {
        let reference = Degree7Reference::seeded(seed);
        let input = reference.phase_input(DEFAULT_STANCE_TIMES);
        for id in [SchemeId::S434_1, SchemeId::S434_2] {
            let traj = generate_phase(&builtin_scheme(id), &input, PhaseLabel::Stance).unwrap();
            let mid = &traj.segments()[1];
            let jerks: Vec<f64> = (0..=200)
                .map(|i| mid.eval(0.12 + 0.36 * i as f64 / 200.0, Jerk))
                .collect();
            let spread = jerks.iter().cloned().fold(f64::MIN, f64::max)
                - jerks.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 1e-9, "{id}: {spread}");
        }
    }
}

#[test]
fn waypoints_are_interpolated() {
    for seed in 0..5 {
        let reference = Degree7Reference::seeded(seed);
        let input = reference.phase_input(DEFAULT_STANCE_TIMES);
        for id in SchemeId::ALL {
            let traj = generate_phase(&builtin_scheme(id), &input, PhaseLabel::Stance).unwrap();
            for w in &input.waypoints {
                let got = traj.evaluate(w.time, Position).unwrap();
                assert!(
                    (got - w.position).abs() <= 1e-9 * (1.0 + w.position.abs()),
                    "{id}"
                );
            }
            // Left sides too, where right-continuity would hide them.
            for (seg, w) in traj.segments().iter().zip(&input.waypoints[1..]) {
                let got = seg.eval(w.time, Position);
                assert!((got - w.position).abs() <= 1e-9 * (1.0 + w.position.abs()));
            }
        }
    }
}

#[test]
fn midpoint_constraints_are_honoured() {
    let reference = Degree7Reference::seeded(9);
    let input = reference.phase_input(DEFAULT_STANCE_TIMES);
    let traj = generate_phase(
        &builtin_scheme(SchemeId::S656_2),
        &input,
        PhaseLabel::Stance,
    )
    .unwrap();
    let got = traj.evaluate(0.06, Position).unwrap();
    assert!((got - input.midpoints[0].unwrap()).abs() < 1e-9);
    let got = traj.evaluate(0.54, Position).unwrap();
    assert!((got - input.midpoints[2].unwrap()).abs() < 1e-9);
}

#[test]
fn sampled_profiles_cover_the_span() {
    let reference = Degree7Reference::seeded(1);
    let traj = generate_gait(
        &builtin_scheme(SchemeId::S545_2),
        &reference.phase_input(DEFAULT_STANCE_TIMES),
        &reference.phase_input(DEFAULT_SWING_TIMES),
    )
    .unwrap();
    let s = sample(&traj, 101, Velocity).unwrap();
    assert_eq!(s.times()[0], 0.0);
    assert_eq!(s.times()[100], 1.0);
}

#[test]
fn condition_estimates_stay_moderate() {
    let reference = Degree7Reference::seeded(4);
    let input = reference.phase_input(DEFAULT_STANCE_TIMES);
    for id in SchemeId::ALL {
        let traj = generate_phase(&builtin_scheme(id), &input, PhaseLabel::Stance).unwrap();
        for seg in traj.segments() {
            assert!(seg.condition_estimate >= 1.0);
            assert!(
                seg.condition_estimate < 1e12,
                "{id}: {}",
                seg.condition_estimate
            );
        }
    }
}
