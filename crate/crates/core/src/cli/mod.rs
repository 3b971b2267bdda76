//! The `generate`, `compare` and `benchmark` runs behind the command line.

pub mod config;
pub mod output;
pub mod reference;

use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::metrics::{
    continuity_report, sample, sample_fn, uniform_grid, via_point_rmse, ErrorStats, MetricsError,
};
use crate::poly::DerivativeOrder;
use crate::scheme::{
    builtin_scheme, generate_gait, generate_phase, PhaseLabel, PiecewiseTrajectory, SchemeError,
    SchemeFamily, SchemeId, SchemeSpec,
};
use crate::sim::{simulate_tracking, SimError};

pub use config::{Plan, RunConfig};
use output::{fmt_sig, text_table, write_csv};

/// Minimum repetitions accepted by the benchmark.
pub const MIN_BENCHMARK_REPETITIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::Solve { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NumericalBlowup { .. } => CliError::Numerical(e.to_string()),
            SimError::Trajectory(inner) => inner.into(),
            SimError::Metrics(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Trajectory(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Per-phase trajectories of one scheme plus the whole-run trajectory.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub id: SchemeId,
    pub phases: Vec<PiecewiseTrajectory>,
    pub full: PiecewiseTrajectory,
}

pub fn build_scheme_run(plan: &Plan, id: SchemeId) -> Result<SchemeRun, CliError> {
    let spec = builtin_scheme(id);
    let phases = plan
        .phases()
        .into_iter()
        .map(|(label, input)| generate_phase(&spec, input, label))
        .collect::<Result<Vec<_>, _>>()?;
    let full = match &plan.swing {
        Some(swing) => generate_gait(&spec, &plan.stance, swing)?,
        None => phases[0].clone(),
    };
    Ok(SchemeRun { id, phases, full })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Profile rows `t, position, velocity, acceleration, jerk`, `samples` per
/// phase. The shared phase boundary therefore appears twice: once as the
/// end of stance and once as the start of swing.
pub fn profile_rows(run: &SchemeRun, samples: usize) -> Result<Vec<[f64; 5]>, CliError> {
    let mut rows = Vec::with_capacity(samples * run.phases.len());
    for traj in &run.phases {
        for t in uniform_grid(traj.start(), traj.end(), samples)? {
            let k = traj.kinematics(t)?;
            rows.push([t, k.position, k.velocity, k.acceleration, k.jerk]);
        }
    }
    Ok(rows)
}

/// Writes `profile_<scheme>.csv` and `continuity_<scheme>.csv` for every
/// configured scheme and returns the written paths.
pub fn run_generate(plan: &Plan, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out_dir)?;
    let mut written = Vec::new();
    for &id in &plan.schemes {
        let run = build_scheme_run(plan, id)?;

        let rows: Vec<Vec<String>> = profile_rows(&run, plan.samples)?
            .iter()
            .map(|r| r.iter().map(|v| fmt_sig(*v)).collect())
            .collect();
        let path = out_dir.join(format!("profile_{id}.csv"));
        write_csv(
            &path,
            &["t", "position", "velocity", "acceleration", "jerk"],
            &rows,
        )?;
        written.push(path);

        let report = continuity_report(&run.full, plan.continuity_epsilon)?;
        let rows: Vec<Vec<String>> = report
            .vias
            .iter()
            .flat_map(|via| {
                via.orders.iter().map(move |j| {
                    vec![
                        fmt_sig(via.via_time),
                        j.order.index().to_string(),
                        fmt_sig(j.jump),
                        j.constrained_both_sides.to_string(),
                    ]
                })
            })
            .collect();
        let path = out_dir.join(format!("continuity_{id}.csv"));
        write_csv(
            &path,
            &["via_time", "order", "jump", "constrained_both_sides"],
            &rows,
        )?;
        written.push(path);
    }
    Ok(written)
}

/// `Hip (Pos)`, `Hip (Vel)`, ...
pub fn quantity_label(order: DerivativeOrder) -> String {
    format!("Hip ({})", order.label())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub scheme: SchemeId,
    pub scope: PhaseLabel,
    pub stats: ErrorStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViaRow {
    pub scheme: SchemeId,
    pub via_time: f64,
    pub order: DerivativeOrder,
    pub window_start: f64,
    pub window_end: f64,
    pub clipped: bool,
    pub rmse: f64,
    pub jump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRow {
    pub scheme: SchemeId,
    pub position: ErrorStats,
    pub velocity: ErrorStats,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareReport {
    pub accuracy: Vec<AccuracyRow>,
    pub via: Vec<ViaRow>,
    pub tracking: Vec<TrackingRow>,
}

const ACCURACY_HEADER: [&str; 6] = ["scheme", "scope", "quantity", "rmse", "ade", "samples"];
const VIA_HEADER: [&str; 8] = [
    "scheme",
    "via_time",
    "quantity",
    "window_start",
    "window_end",
    "clipped",
    "rmse",
    "jump",
];
const TRACKING_HEADER: [&str; 6] = [
    "scheme",
    "pos_rmse_rad",
    "pos_ade_rad",
    "vel_rmse_rad_s",
    "vel_ade_rad_s",
    "samples",
];

impl CompareReport {
    fn accuracy_rows(&self) -> Vec<Vec<String>> {
        self.accuracy
            .iter()
            .map(|r| {
                vec![
                    r.scheme.to_string(),
                    r.scope.name().to_string(),
                    quantity_label(r.stats.order),
                    fmt_sig(r.stats.rmse),
                    fmt_sig(r.stats.ade),
                    r.stats.samples.to_string(),
                ]
            })
            .collect()
    }

    fn via_rows(&self) -> Vec<Vec<String>> {
        self.via
            .iter()
            .map(|r| {
                vec![
                    r.scheme.to_string(),
                    fmt_sig(r.via_time),
                    quantity_label(r.order),
                    fmt_sig(r.window_start),
                    fmt_sig(r.window_end),
                    r.clipped.to_string(),
                    fmt_sig(r.rmse),
                    fmt_sig(r.jump),
                ]
            })
            .collect()
    }

    fn tracking_rows(&self) -> Vec<Vec<String>> {
        self.tracking
            .iter()
            .map(|r| {
                vec![
                    r.scheme.to_string(),
                    fmt_sig(r.position.rmse),
                    fmt_sig(r.position.ade),
                    fmt_sig(r.velocity.rmse),
                    fmt_sig(r.velocity.ade),
                    r.position.samples.to_string(),
                ]
            })
            .collect()
    }

    /// Aligned plain-text rendering of all tables.
    pub fn to_text(&self) -> String {
        let mut out = String::from("RMSE and ADE against the reference\n\n");
        out.push_str(&text_table(&ACCURACY_HEADER, &self.accuracy_rows()));
        out.push_str("\nVia-point windowed RMSE and derivative jumps\n\n");
        out.push_str(&text_table(&VIA_HEADER, &self.via_rows()));
        if !self.tracking.is_empty() {
            out.push_str("\nPD tracking error\n\n");
            out.push_str(&text_table(&TRACKING_HEADER, &self.tracking_rows()));
        }
        out
    }

    pub fn accuracy_for(
        &self,
        scheme: SchemeId,
        scope: PhaseLabel,
        order: DerivativeOrder,
    ) -> Option<&ErrorStats> {
        self.accuracy
            .iter()
            .find(|r| r.scheme == scheme && r.scope == scope && r.stats.order == order)
            .map(|r| &r.stats)
    }
}

/// Accuracy against the reference per scheme, phase and derivative order;
/// windowed via-point errors; optional PD tracking. Writes
/// `compare_accuracy.csv`, `compare_via.csv`, `compare_tracking.csv` (when
/// simulation is configured) and `compare_report.txt`.
pub fn run_compare(plan: &Plan, out_dir: &Path) -> Result<CompareReport, CliError> {
    let report = compare(plan)?;
    ensure_dir(out_dir)?;
    write_csv(
        &out_dir.join("compare_accuracy.csv"),
        &ACCURACY_HEADER,
        &report.accuracy_rows(),
    )?;
    write_csv(
        &out_dir.join("compare_via.csv"),
        &VIA_HEADER,
        &report.via_rows(),
    )?;
    if !report.tracking.is_empty() {
        write_csv(
            &out_dir.join("compare_tracking.csv"),
            &TRACKING_HEADER,
            &report.tracking_rows(),
        )?;
    }
    write_text(&out_dir.join("compare_report.txt"), &report.to_text())?;
    Ok(report)
}

/// The computation behind [`run_compare`], without touching the filesystem.
pub fn compare(plan: &Plan) -> Result<CompareReport, CliError> {
    let reference = plan.reference.as_ref().ok_or_else(|| {
        CliError::Config("reference: compare needs a reference trajectory".into())
    })?;
    let mut report = CompareReport::default();

    for &id in &plan.schemes {
        let run = build_scheme_run(plan, id)?;
        let mut scopes: Vec<&PiecewiseTrajectory> = run.phases.iter().collect();
        if run.phases.len() > 1 {
            scopes.push(&run.full);
        }
        for traj in scopes {
            for order in DerivativeOrder::ALL {
                let generated = sample(traj, plan.samples, order)?;
                let expected = sample_fn(&generated, |t| reference.value(t, order));
                report.accuracy.push(AccuracyRow {
                    scheme: id,
                    scope: traj.phase_label(),
                    stats: ErrorStats::between(&generated, &expected)?,
                });
            }
        }

        let continuity = continuity_report(&run.full, plan.continuity_epsilon)?;
        for order in DerivativeOrder::ALL {
            let windows = via_point_rmse(
                &run.full,
                |t| reference.value(t, order),
                order,
                plan.via_window,
                plan.via_window_samples,
            )?;
            for (w, via) in windows.iter().zip(&continuity.vias) {
                report.via.push(ViaRow {
                    scheme: id,
                    via_time: w.via_time,
                    order,
                    window_start: w.window_start,
                    window_end: w.window_end,
                    clipped: w.clipped,
                    rmse: w.rmse,
                    jump: via.jump(order).jump,
                });
            }
        }

        if let Some(sim) = &plan.simulation {
            let tracked = simulate_tracking(&run.full, &sim.thigh, sim.gains, sim.dt, sim.options)?;
            let stats = |order| {
                tracked
                    .metrics
                    .stats(order)
                    .cloned()
                    .expect("tracking reports position and velocity")
            };
            report.tracking.push(TrackingRow {
                scheme: id,
                position: stats(DerivativeOrder::Position),
                velocity: stats(DerivativeOrder::Velocity),
            });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub family: SchemeFamily,
    pub scheme: SchemeId,
    pub repetitions: usize,
    pub median_s: f64,
    pub mean_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

const BENCH_HEADER: [&str; 5] = ["family", "scheme", "repetitions", "median_s", "mean_s"];

impl BenchmarkReport {
    fn rows_as_strings(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.family.to_string(),
                    r.scheme.to_string(),
                    r.repetitions.to_string(),
                    fmt_sig(r.median_s),
                    fmt_sig(r.mean_s),
                ]
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("Generation time per trajectory\n\n");
        out.push_str(&text_table(&BENCH_HEADER, &self.rows_as_strings()));
        let medians: Vec<f64> = self.rows.iter().map(|r| r.median_s).collect();
        let monotone = medians.windows(2).all(|w| w[0] <= w[1]);
        out.push_str(&format!(
            "\nmedian ordering 434 <= 545 <= 656: {}\n",
            if monotone { "yes" } else { "no" }
        ));
        out
    }

    pub fn median(&self, family: SchemeFamily) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.family == family)
            .map(|r| r.median_s)
    }
}

fn family_representative(family: SchemeFamily) -> SchemeId {
    match family {
        SchemeFamily::F434 => SchemeId::S434_1,
        SchemeFamily::F545 => SchemeId::S545_1,
        SchemeFamily::F656 => SchemeId::S656_1,
    }
}

fn generate_once(plan: &Plan, spec: &SchemeSpec) -> Result<PiecewiseTrajectory, SchemeError> {
    match &plan.swing {
        Some(swing) => generate_gait(spec, &plan.stance, swing),
        None => generate_phase(spec, &plan.stance, PhaseLabel::Stance),
    }
}

/// Times generation of one full trajectory with the `-1` variant of each
/// degree family. Families are interleaved within every repetition so that
/// background load affects all three alike.
pub fn benchmark(plan: &Plan, repetitions: usize) -> Result<BenchmarkReport, CliError> {
    if repetitions < MIN_BENCHMARK_REPETITIONS {
        return Err(CliError::Config(format!(
            "repetitions: must be at least {MIN_BENCHMARK_REPETITIONS}, got {repetitions}"
        )));
    }
    let specs: Vec<(SchemeFamily, SchemeId, SchemeSpec)> = SchemeFamily::ALL
        .iter()
        .map(|&f| {
            let id = family_representative(f);
            (f, id, builtin_scheme(id))
        })
        .collect();
    for (_, _, spec) in &specs {
        generate_once(plan, spec)?;
    }

    let warmup = repetitions / 10;
    let mut samples = vec![Vec::with_capacity(repetitions); specs.len()];
    for rep in 0..warmup + repetitions {
        for (i, (_, _, spec)) in specs.iter().enumerate() {
            let start = Instant::now();
            let traj = generate_once(black_box(plan), black_box(spec));
            let elapsed = start.elapsed().as_secs_f64();
            black_box(traj).ok();
            if rep >= warmup {
                samples[i].push(elapsed);
            }
        }
    }

    let rows = specs
        .iter()
        .zip(samples)
        .map(|((family, id, _), mut times)| {
            times.sort_by(f64::total_cmp);
            let n = times.len();
            let median = if n % 2 == 1 {
                times[n / 2]
            } else {
                0.5 * (times[n / 2 - 1] + times[n / 2])
            };
            BenchmarkRow {
                family: *family,
                scheme: *id,
                repetitions,
                median_s: median,
                mean_s: times.iter().sum::<f64>() / n as f64,
            }
        })
        .collect();
    Ok(BenchmarkReport { rows })
}

/// [`benchmark`] plus `benchmark.csv` in `out_dir`.
pub fn run_benchmark(
    plan: &Plan,
    repetitions: usize,
    out_dir: &Path,
) -> Result<BenchmarkReport, CliError> {
    let report = benchmark(plan, repetitions)?;
    ensure_dir(out_dir)?;
    write_csv(
        &out_dir.join("benchmark.csv"),
        &BENCH_HEADER,
        &report.rows_as_strings(),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Numerical(String::new()).exit_code(), 3);
        assert_eq!(CliError::Io(String::new()).exit_code(), 4);

        let singular = SchemeError::Solve {
            segment: 1,
            source: crate::solve::SolveError::SingularSystem,
        };
        assert_eq!(CliError::from(singular).exit_code(), 3);
        let blowup = SimError::NumericalBlowup {
            t: 0.1,
            theta: 1e7,
            omega: 0.0,
        };
        assert_eq!(CliError::from(blowup).exit_code(), 3);
        assert_eq!(
            CliError::from(SchemeError::MissingMidpoint { segment: 1 }).exit_code(),
            2
        );
    }

    #[test]
    fn labels_follow_table_rows() {
        let labels: Vec<String> = DerivativeOrder::ALL
            .into_iter()
            .map(quantity_label)
            .collect();
        assert_eq!(
            labels,
            ["Hip (Pos)", "Hip (Vel)", "Hip (Accel)", "Hip (Jerk)"]
        );
    }
}
