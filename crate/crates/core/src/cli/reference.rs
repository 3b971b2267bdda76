//! Reference trajectories that waypoints are drawn from and that generated
//! profiles are compared against.

use std::f64::consts::TAU;
use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::poly::{DerivativeOrder, Kinematics, Polynomial};

/// Reference source as written in the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReferenceConfig {
    /// `offset + amplitude · sin(2π t / period)`, degrees.
    Sinusoid {
        amplitude: f64,
        period: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Ascending coefficients in physical time, degrees.
    Polynomial { coefficients: Vec<f64> },
    /// CSV file with header `t,pos[,vel,acc,jerk]`.
    Csv { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Sinusoid {
        amplitude: f64,
        period: f64,
        offset: f64,
    },
    Polynomial(Polynomial),
    Table(TabulatedReference),
}

impl Reference {
    pub fn kinematics(&self, t: f64) -> Kinematics {
        match self {
            Reference::Sinusoid {
                amplitude,
                period,
                offset,
            } => {
                let w = TAU / period;
                let (s, c) = (w * t).sin_cos();
                Kinematics {
                    position: offset + amplitude * s,
                    velocity: amplitude * w * c,
                    acceleration: -amplitude * w * w * s,
                    jerk: -amplitude * w * w * w * c,
                }
            }
            Reference::Polynomial(p) => Kinematics {
                position: p.eval_derivative(t, DerivativeOrder::Position),
                velocity: p.eval_derivative(t, DerivativeOrder::Velocity),
                acceleration: p.eval_derivative(t, DerivativeOrder::Acceleration),
                jerk: p.eval_derivative(t, DerivativeOrder::Jerk),
            },
            Reference::Table(table) => table.kinematics(t),
        }
    }

    pub fn value(&self, t: f64, order: DerivativeOrder) -> f64 {
        self.kinematics(t).get(order)
    }

    /// Time span over which the reference is defined, if bounded.
    pub fn span(&self) -> Option<(f64, f64)> {
        match self {
            Reference::Table(table) => Some((table.times[0], table.times[table.times.len() - 1])),
            _ => None,
        }
    }
}

/// Sampled reference, linearly interpolated between rows. Derivative columns
/// missing from the file are filled by central differences of the column one
/// order below (one-sided at the ends).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedReference {
    times: Vec<f64>,
    columns: [Vec<f64>; 4],
}

const HEADER: [&str; 5] = ["t", "pos", "vel", "acc", "jerk"];

impl TabulatedReference {
    pub fn new(times: Vec<f64>, known: Vec<Vec<f64>>) -> Result<Self, CliError> {
        if times.len() < 2 {
            return Err(CliError::Config(format!(
                "reference grid has {} point(s); at least 2 are needed to resample",
                times.len()
            )));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(CliError::Config(
                "reference times must be strictly increasing".into(),
            ));
        }
        if known.is_empty() || known.len() > 4 {
            return Err(CliError::Config(
                "reference needs a position column and at most three derivative columns".into(),
            ));
        }
        let mut columns: Vec<Vec<f64>> = known;
        while columns.len() < 4 {
            let next = central_difference(&times, &columns[columns.len() - 1]);
            columns.push(next);
        }
        let columns: [Vec<f64>; 4] = columns.try_into().expect("exactly four columns");
        Ok(Self { times, columns })
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
            .clone();
        let width = headers.len();
        if !(2..=5).contains(&width) || headers.iter().zip(HEADER).any(|(h, want)| h != want) {
            return Err(CliError::Config(format!(
                "{}: header must be `t,pos[,vel,acc,jerk]`, got `{}`",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut known = vec![Vec::new(); width - 1];
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record
                .map_err(|e| CliError::Config(format!("{} line {line}: {e}", path.display())))?;
            if record.len() != width {
                return Err(CliError::Config(format!(
                    "{} line {line}: expected {width} fields, got {}",
                    path.display(),
                    record.len()
                )));
            }
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    CliError::Config(format!(
                        "{} line {line}, column `{}`: `{field}` is not a number",
                        path.display(),
                        HEADER[col]
                    ))
                })?;
                if col == 0 {
                    times.push(v);
                } else {
                    known[col - 1].push(v);
                }
            }
        }
        Self::new(times, known)
    }

    pub fn kinematics(&self, t: f64) -> Kinematics {
        let n = self.times.len();
        let t = t.clamp(self.times[0], self.times[n - 1]);
        let hi = self.times.partition_point(|&x| x < t).clamp(1, n - 1);
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        let lerp = |c: &Vec<f64>| c[lo] + w * (c[hi] - c[lo]);
        Kinematics {
            position: lerp(&self.columns[0]),
            velocity: lerp(&self.columns[1]),
            acceleration: lerp(&self.columns[2]),
            jerk: lerp(&self.columns[3]),
        }
    }
}

fn central_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect()
}

impl ReferenceConfig {
    pub fn resolve(&self, base_dir: &Path) -> Result<Reference, CliError> {
        match self {
            ReferenceConfig::Sinusoid {
                amplitude,
                period,
                offset,
            } => {
                if !(period.is_finite() && *period > 0.0) {
                    return Err(CliError::Config(format!(
                        "reference.period must be positive, got {period}"
                    )));
                }
                Ok(Reference::Sinusoid {
                    amplitude: *amplitude,
                    period: *period,
                    offset: *offset,
                })
            }
            ReferenceConfig::Polynomial { coefficients } => Polynomial::new(coefficients.clone())
                .map(Reference::Polynomial)
                .map_err(|e| CliError::Config(format!("reference.coefficients: {e}"))),
            ReferenceConfig::Csv { path } => {
                let full = base_dir.join(path);
                if !full.is_file() {
                    return Err(CliError::Config(format!(
                        "reference.path: file `{}` does not exist",
                        full.display()
                    )));
                }
                TabulatedReference::from_csv_path(&full).map(Reference::Table)
            }
        }
    }
}
