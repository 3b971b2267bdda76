//! Polynomials over normalized segment time and their kinematic evaluation.
//!
//! Coefficients are stored in ascending power order over `τ ∈ [0, 1]`. The
//! physical time derivative of order `k` is the normalized derivative divided
//! by `Tᵏ`, where `T` is the segment duration.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest derivative order modelled anywhere in the crate (jerk).
pub const MAX_DERIVATIVE_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("a polynomial needs at least one coefficient")]
    Empty,
    #[error("derivative order {0} is outside 0..=3")]
    InvalidOrder(usize),
    #[error("segment duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
}

/// Derivative order of a kinematic quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum DerivativeOrder {
    Position,
    Velocity,
    Acceleration,
    Jerk,
}

impl DerivativeOrder {
    pub const ALL: [DerivativeOrder; 4] = [
        DerivativeOrder::Position,
        DerivativeOrder::Velocity,
        DerivativeOrder::Acceleration,
        DerivativeOrder::Jerk,
    ];

    pub fn new(k: usize) -> Result<Self, PolyError> {
        match k {
            0 => Ok(Self::Position),
            1 => Ok(Self::Velocity),
            2 => Ok(Self::Acceleration),
            3 => Ok(Self::Jerk),
            other => Err(PolyError::InvalidOrder(other)),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short label used in reports: `Pos`, `Vel`, `Accel`, `Jerk`.
    pub fn label(self) -> &'static str {
        match self {
            Self::Position => "Pos",
            Self::Velocity => "Vel",
            Self::Acceleration => "Accel",
            Self::Jerk => "Jerk",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Position => "P",
            Self::Velocity => "V",
            Self::Acceleration => "A",
            Self::Jerk => "J",
        }
    }
}

impl TryFrom<usize> for DerivativeOrder {
    type Error = PolyError;

    fn try_from(k: usize) -> Result<Self, Self::Error> {
        Self::new(k)
    }
}

impl From<DerivativeOrder> for usize {
    fn from(order: DerivativeOrder) -> usize {
        order.index()
    }
}

impl fmt::Display for DerivativeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Position, velocity, acceleration and jerk at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Kinematics {
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub jerk: f64,
}

impl Kinematics {
    pub fn get(&self, order: DerivativeOrder) -> f64 {
        match order {
            DerivativeOrder::Position => self.position,
            DerivativeOrder::Velocity => self.velocity,
            DerivativeOrder::Acceleration => self.acceleration,
            DerivativeOrder::Jerk => self.jerk,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.position, self.velocity, self.acceleration, self.jerk]
    }
}

/// A polynomial `Σ cᵢ τⁱ`.
///
/// The degree is structural: it is always `coefficients.len() - 1`, even when
/// the leading coefficient happens to be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Result<Self, PolyError> {
        if coefficients.is_empty() {
            return Err(PolyError::Empty);
        }
        Ok(Self { coefficients })
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coefficients: vec![0.0; degree + 1],
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_derivative(t, DerivativeOrder::Position)
    }

    /// `k`-th formal derivative, `0 ≤ k ≤ 3`. The result has degree
    /// `max(n - k, 0)`.
    pub fn differentiate(&self, k: usize) -> Result<Self, PolyError> {
        DerivativeOrder::new(k)?;
        Ok(self.derivative_unchecked(k))
    }

    // Applied one order at a time so that differentiating twice and
    // differentiating by 2 round identically.
    fn derivative_unchecked(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.first_derivative())
    }

    fn first_derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero(0);
        }
        let coefficients = self.coefficients[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c)
            .collect();
        Self { coefficients }
    }

    /// Value of the `k`-th derivative with respect to normalized time at `tau`.
    pub fn eval_derivative(&self, tau: f64, order: DerivativeOrder) -> f64 {
        let (hi, lo) = self.eval_derivative_compensated(tau, order.index());
        hi + lo
    }

    /// Compensated Horner evaluation of the `k`-th normalized derivative,
    /// returned as an unevaluated sum `hi + lo`. The result is as accurate as
    /// Horner's rule carried out in twice the working precision, which
    /// matters for high-degree segments whose coefficients cancel heavily.
    pub(crate) fn eval_derivative_compensated(&self, tau: f64, k: usize) -> (f64, f64) {
        if k > self.degree() {
            return (0.0, 0.0);
        }
        let n = self.coefficients.len() - 1;
        // `falling_factorial(i, k)` is an exact small integer, so each
        // differentiated coefficient is carried exactly as `hi + lo`.
        let (mut hi, mut lo) = two_prod(falling_factorial(n, k), self.coefficients[n]);
        for i in (k..n).rev() {
            let (c_hi, c_lo) = two_prod(falling_factorial(i, k), self.coefficients[i]);
            let (p, p_err) = two_prod(hi, tau);
            let (s, s_err) = two_sum(p, c_hi);
            hi = s;
            lo = lo * tau + (p_err + s_err + c_lo);
        }
        (hi, lo)
    }

    /// Physical kinematics at normalized time `tau` of a segment lasting
    /// `duration` seconds.
    pub fn eval_kinematics(&self, tau: f64, duration: f64) -> Result<Kinematics, PolyError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(PolyError::InvalidDuration(duration));
        }
        let inv = 1.0 / duration;
        Ok(Kinematics {
            position: self.eval_derivative(tau, DerivativeOrder::Position),
            velocity: self.eval_derivative(tau, DerivativeOrder::Velocity) * inv,
            acceleration: self.eval_derivative(tau, DerivativeOrder::Acceleration) * inv * inv,
            jerk: self.eval_derivative(tau, DerivativeOrder::Jerk) * inv * inv * inv,
        })
    }
}

/// `a + b` as `s + e` with `s = fl(a + b)` and no rounding error.
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let b_virtual = s - a;
    let e = (a - (s - b_virtual)) + (b - b_virtual);
    (s, e)
}

/// `a · b` as `p + e` with `p = fl(a · b)` and no rounding error.
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `i · (i-1) ··· (i-k+1)`, the coefficient picked up by `τⁱ` after `k`
/// derivatives.
pub(crate) fn falling_factorial(i: usize, k: usize) -> f64 {
    (0..k).map(|j| (i - j) as f64).product()
}
