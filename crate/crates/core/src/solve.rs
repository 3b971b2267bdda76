//! Single-segment boundary-value solves.
//!
//! A segment of degree `n` is pinned by exactly `n + 1` kinematic constraints.
//! Each constraint becomes one row of a square system in the normalized-time
//! coefficients; the row holds the `k`-th derivative of the monomial basis at
//! the anchor, scaled by `T⁻ᵏ` so the right-hand side stays in physical units.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{
    falling_factorial, two_prod, two_sum, DerivativeOrder, Kinematics, PolyError, Polynomial,
};

/// Highest segment degree the solver accepts.
pub const MAX_SEGMENT_DEGREE: usize = 6;

/// Pivots below this (after row equilibration) mark the system singular.
const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("degree {degree} needs {expected} constraints, got {found}")]
    ConstraintCountMismatch {
        degree: usize,
        expected: usize,
        found: usize,
    },
    #[error("constraint system is singular (duplicate or contradictory constraints)")]
    SingularSystem,
    #[error("segment degree {0} is outside 0..=6")]
    DegreeOutOfRange(usize),
    #[error("segment interval [{start}, {end}] is empty or not finite")]
    InvalidInterval { start: f64, end: f64 },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Where on the segment a constraint applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Anchor {
    SegmentStart,
    SegmentEnd,
    /// Fixed at `τ = 0.5`; position constraints only.
    MidPoint,
    AbsoluteTau(f64),
}

impl Anchor {
    pub fn tau(self) -> f64 {
        match self {
            Anchor::SegmentStart => 0.0,
            Anchor::SegmentEnd => 1.0,
            Anchor::MidPoint => 0.5,
            Anchor::AbsoluteTau(tau) => tau,
        }
    }

    pub fn is_start(self) -> bool {
        self.tau() == 0.0
    }

    pub fn is_end(self) -> bool {
        self.tau() == 1.0
    }
}

/// A prescribed value of one derivative order at one anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub order: DerivativeOrder,
    pub anchor: Anchor,
    /// Physical units: deg, deg/s, deg/s², deg/s³.
    pub value: f64,
}

impl Constraint {
    pub fn new(order: DerivativeOrder, anchor: Anchor, value: f64) -> Result<Self, SolveError> {
        let c = Self {
            order,
            anchor,
            value,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn at_start(order: DerivativeOrder, value: f64) -> Self {
        Self {
            order,
            anchor: Anchor::SegmentStart,
            value,
        }
    }

    pub fn at_end(order: DerivativeOrder, value: f64) -> Self {
        Self {
            order,
            anchor: Anchor::SegmentEnd,
            value,
        }
    }

    pub fn midpoint(value: f64) -> Self {
        Self {
            order: DerivativeOrder::Position,
            anchor: Anchor::MidPoint,
            value,
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if let Anchor::AbsoluteTau(tau) = self.anchor {
            if !(0.0..=1.0).contains(&tau) {
                return Err(SolveError::InvalidConstraint(format!(
                    "anchor tau {tau} is outside [0, 1]"
                )));
            }
        }
        if self.anchor == Anchor::MidPoint && self.order != DerivativeOrder::Position {
            return Err(SolveError::InvalidConstraint(format!(
                "mid-point anchor only takes position, got order {}",
                self.order.index()
            )));
        }
        if !self.value.is_finite() {
            return Err(SolveError::InvalidConstraint(format!(
                "value {} is not finite",
                self.value
            )));
        }
        Ok(())
    }
}

/// Dense square system `matrix · c = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

pub fn assemble_system(
    degree: usize,
    constraints: &[Constraint],
    duration: f64,
) -> Result<LinearSystem, SolveError> {
    if degree > MAX_SEGMENT_DEGREE {
        return Err(SolveError::DegreeOutOfRange(degree));
    }
    if constraints.len() != degree + 1 {
        return Err(SolveError::ConstraintCountMismatch {
            degree,
            expected: degree + 1,
            found: constraints.len(),
        });
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(PolyError::InvalidDuration(duration).into());
    }
    for c in constraints {
        c.validate()?;
    }

    let matrix = constraints
        .iter()
        .map(|c| basis_row(degree, c.order, c.anchor.tau(), duration))
        .collect();
    let rhs = constraints.iter().map(|c| c.value).collect();
    Ok(LinearSystem { matrix, rhs })
}

fn basis_row(degree: usize, order: DerivativeOrder, tau: f64, duration: f64) -> Vec<f64> {
    let k = order.index();
    let scale = duration.powi(-(k as i32));
    (0..=degree)
        .map(|j| {
            if j < k {
                0.0
            } else {
                falling_factorial(j, k) * tau.powi((j - k) as i32) * scale
            }
        })
        .collect()
}

/// LU factorization with partial pivoting of a row-equilibrated copy.
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
    row_scale: Vec<f64>,
}

impl Lu {
    #[allow(clippy::needless_range_loop)]
    fn factor(matrix: &[Vec<f64>]) -> Result<Self, SolveError> {
        let n = matrix.len();
        let mut row_scale = Vec::with_capacity(n);
        let mut lu: Vec<Vec<f64>> = Vec::with_capacity(n);
        for row in matrix {
            let max = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if max == 0.0 || !max.is_finite() {
                return Err(SolveError::SingularSystem);
            }
            row_scale.push(1.0 / max);
            lu.push(row.iter().map(|v| v / max).collect());
        }
        let mut perm: Vec<usize> = (0..n).collect();

        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&a, &b| lu[a][col].abs().total_cmp(&lu[b][col].abs()))
                .unwrap_or(col);
            if lu[pivot_row][col].abs() < SINGULAR_PIVOT {
                return Err(SolveError::SingularSystem);
            }
            lu.swap(col, pivot_row);
            perm.swap(col, pivot_row);
            let pivot = lu[col][col];
            for r in col + 1..n {
                let factor = lu[r][col] / pivot;
                lu[r][col] = factor;
                if factor != 0.0 {
                    for c in col + 1..n {
                        lu[r][c] -= factor * lu[col][c];
                    }
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            row_scale,
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut x: Vec<f64> = self
            .perm
            .iter()
            .map(|&p| rhs[p] * self.row_scale[p])
            .collect();
        for r in 0..n {
            for c in 0..r {
                x[r] -= self.lu[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r][c] * x[c];
            }
            x[r] /= self.lu[r][r];
        }
        x
    }

    fn inverse_norm_inf(&self) -> f64 {
        let n = self.lu.len();
        let mut row_sums = vec![0.0; n];
        let mut unit = vec![0.0; n];
        for col in 0..n {
            unit.iter_mut().for_each(|u| *u = 0.0);
            unit[col] = 1.0;
            let x = self.solve(&unit);
            for (sum, v) in row_sums.iter_mut().zip(x) {
                *sum += v.abs();
            }
        }
        row_sums.into_iter().fold(0.0, f64::max)
    }
}

fn norm_inf(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Iterative refinement passes applied after the direct solve.
const REFINEMENT_STEPS: usize = 2;

/// `value − achieved` per constraint in physical units, with the achieved
/// value and `value · Tᵏ` both carried in twice the working precision so
/// that refinement converges to the correctly rounded coefficients.
fn compensated_residual(
    polynomial: &Polynomial,
    constraints: &[Constraint],
    duration: f64,
) -> Vec<f64> {
    constraints
        .iter()
        .map(|c| {
            let k = c.order.index();
            let (mut target, mut target_lo) = (c.value, 0.0);
            for _ in 0..k {
                let (p, e) = two_prod(target, duration);
                target = p;
                target_lo = target_lo * duration + e;
            }
            let (hi, lo) = polynomial.eval_derivative_compensated(c.anchor.tau(), k);
            let (d, d_err) = two_sum(target, -hi);
            (d + (d_err + target_lo - lo)) / duration.powi(k as i32)
        })
        .collect()
}

/// One solved polynomial segment on `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvedSegment {
    pub polynomial: Polynomial,
    pub t_start: f64,
    pub t_end: f64,
    /// `‖A‖∞ · ‖A⁻¹‖∞` of the assembled system. Diagnostic only.
    pub condition_estimate: f64,
    /// The constraints this segment was solved from, in row order.
    pub constraints: Vec<Constraint>,
}

impl SolvedSegment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn tau(&self, t: f64) -> f64 {
        (t - self.t_start) / self.duration()
    }

    /// Physical kinematics at physical time `t`.
    pub fn kinematics(&self, t: f64) -> Kinematics {
        self.kinematics_at_tau(self.tau(t))
    }

    pub fn kinematics_at_tau(&self, tau: f64) -> Kinematics {
        self.polynomial
            .eval_kinematics(tau, self.duration())
            .expect("segment duration validated at construction")
    }

    pub fn eval(&self, t: f64, order: DerivativeOrder) -> f64 {
        self.eval_at_tau(self.tau(t), order)
    }

    pub fn eval_at_tau(&self, tau: f64, order: DerivativeOrder) -> f64 {
        self.polynomial.eval_derivative(tau, order) * self.duration().powi(-(order.index() as i32))
    }

    /// Value pinned by a constraint of `order` at the segment start, if any.
    pub fn start_constraint(&self, order: DerivativeOrder) -> Option<f64> {
        self.constraints
            .iter()
            .find(|c| c.order == order && c.anchor.is_start())
            .map(|c| c.value)
    }

    pub fn end_constraint(&self, order: DerivativeOrder) -> Option<f64> {
        self.constraints
            .iter()
            .find(|c| c.order == order && c.anchor.is_end())
            .map(|c| c.value)
    }
}

pub fn solve_segment(
    degree: usize,
    constraints: &[Constraint],
    t_start: f64,
    t_end: f64,
) -> Result<SolvedSegment, SolveError> {
    if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
        return Err(SolveError::InvalidInterval {
            start: t_start,
            end: t_end,
        });
    }
    let duration = t_end - t_start;
    let system = assemble_system(degree, constraints, duration)?;
    let lu = Lu::factor(&system.matrix)?;
    let mut polynomial = Polynomial::new(lu.solve(&system.rhs))?;
    if polynomial.coefficients().iter().any(|c| !c.is_finite()) {
        return Err(SolveError::SingularSystem);
    }
    for _ in 0..REFINEMENT_STEPS {
        let correction = lu.solve(&compensated_residual(&polynomial, constraints, duration));
        let refined: Vec<f64> = polynomial
            .coefficients()
            .iter()
            .zip(&correction)
            .map(|(c, d)| c + d)
            .collect();
        if refined.iter().any(|c| !c.is_finite()) {
            break;
        }
        polynomial = Polynomial::new(refined)?;
    }
    let condition_estimate = (norm_inf(&system.matrix) * lu.inverse_norm_inf()).max(1.0);

    Ok(SolvedSegment {
        polynomial,
        t_start,
        t_end,
        condition_estimate,
        constraints: constraints.to_vec(),
    })
}

/// `|achieved − specified|` per constraint, in the constraint's physical units.
pub fn residuals(segment: &SolvedSegment, constraints: &[Constraint]) -> Vec<f64> {
    constraints
        .iter()
        .map(|c| (segment.eval_at_tau(c.anchor.tau(), c.order) - c.value).abs())
        .collect()
}
