//! Test-only oracles, independent of the library's solve path.
#![allow(dead_code, clippy::needless_range_loop)]

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pspb::poly::Kinematics;
use pspb::scheme::{PhaseInput, Waypoint};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// A constraint in exact arithmetic: derivative order, anchor τ, value.
#[derive(Clone, Debug)]
pub struct ExactConstraint {
    pub order: usize,
    pub tau: BigRational,
    pub value: BigRational,
}

/// Solves the normalized-time boundary system by fraction-exact Gaussian
/// elimination. Row `i`: `d^k/dτ^k τ^j` at the anchor, times `T^-k`.
pub fn exact_solve(
    degree: usize,
    constraints: &[ExactConstraint],
    duration: &BigRational,
) -> Option<Vec<BigRational>> {
    let n = degree + 1;
    assert_eq!(constraints.len(), n);
    let mut m: Vec<Vec<BigRational>> = constraints
        .iter()
        .map(|c| {
            let mut row: Vec<BigRational> = (0..n)
                .map(|j| {
                    if j < c.order {
                        BigRational::zero()
                    } else {
                        let ff: i64 = (0..c.order).map(|q| (j - q) as i64).product();
                        let mut v = BigRational::from_integer(ff.into());
                        for _ in 0..(j - c.order) {
                            v *= &c.tau;
                        }
                        for _ in 0..c.order {
                            v /= duration;
                        }
                        v
                    }
                })
                .collect();
            row.push(c.value.clone());
            row
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for c in col..=n {
            m[col][c] = &m[col][c] / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

pub fn to_f64(values: &[BigRational]) -> Vec<f64> {
    values.iter().map(|v| v.to_f64().unwrap()).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn exact_rel_close(a: f64, b: &BigRational, tol: f64) -> bool {
    let diff = (BigRational::from_float(a).unwrap() - b)
        .abs()
        .to_f64()
        .unwrap();
    diff <= tol * b.abs().to_f64().unwrap().max(1.0)
}

/// Cubic with position and velocity pinned at both ends, in normalized time:
/// `p0 + V0 τ + (3h − 2V0 − V1) τ² + (−2h + V0 + V1) τ³` where `h = p1 − p0`
/// and `Vi = vi·T`.
pub fn cubic_closed_form(p0: f64, v0: f64, p1: f64, v1: f64, duration: f64) -> [f64; 4] {
    let h = p1 - p0;
    let (v0, v1) = (v0 * duration, v1 * duration);
    [p0, v0, 3.0 * h - 2.0 * v0 - v1, -2.0 * h + v0 + v1]
}

/// Quintic with position, velocity and acceleration pinned at both ends, in
/// normalized time, with `Vi = vi·T`, `Ai = ai·T²`:
/// c3 = 10h − 6V0 − 4V1 − (3A0 − A1)/2,
/// c4 = −15h + 8V0 + 7V1 + (3A0 − 2A1)/2,
/// c5 = 6h − 3V0 − 3V1 − (A0 − A1)/2.
pub fn quintic_closed_form(
    start: (f64, f64, f64),
    end: (f64, f64, f64),
    duration: f64,
) -> [f64; 6] {
    let (p0, v0, a0) = start;
    let (p1, v1, a1) = end;
    let h = p1 - p0;
    let t = duration;
    let (v0, v1) = (v0 * t, v1 * t);
    let (a0, a1) = (a0 * t * t, a1 * t * t);
    [
        p0,
        v0,
        a0 / 2.0,
        10.0 * h - 6.0 * v0 - 4.0 * v1 - (3.0 * a0 - a1) / 2.0,
        -15.0 * h + 8.0 * v0 + 7.0 * v1 + (3.0 * a0 - 2.0 * a1) / 2.0,
        6.0 * h - 3.0 * v0 - 3.0 * v1 - (a0 - a1) / 2.0,
    ]
}

/// A degree-7 polynomial with seeded random coefficients in the Chebyshev
/// basis over `t ∈ [0, 1]`, stored as monomial coefficients in `t`.
///
/// Random Chebyshev coefficients spread the variation evenly over all
/// degrees, so the reference has features on the scale of individual
/// segments instead of being nearly quadratic across a short one.
#[derive(Clone, Debug)]
pub struct Degree7Reference {
    pub coefficients: [f64; 8],
}

impl Degree7Reference {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cheb: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-20.0..20.0));
        Self {
            coefficients: chebyshev_to_monomial_unit(&cheb),
        }
    }

    /// Brute-force term-by-term derivative of order `k` at `t`.
    pub fn derivative(&self, t: f64, k: usize) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(i, _)| *i >= k)
            .map(|(i, c)| {
                let ff: f64 = (0..k).map(|q| (i - q) as f64).product();
                c * ff * t.powi((i - k) as i32)
            })
            .sum()
    }

    pub fn kinematics(&self, t: f64) -> Kinematics {
        Kinematics {
            position: self.derivative(t, 0),
            velocity: self.derivative(t, 1),
            acceleration: self.derivative(t, 2),
            jerk: self.derivative(t, 3),
        }
    }

    /// Waypoints and segment mid-point positions for one phase.
    pub fn phase_input(&self, times: [f64; 4]) -> PhaseInput {
        let wps = times.map(|t| Waypoint::from_kinematics(t, self.kinematics(t)));
        let mids = [0, 1, 2].map(|i| Some(self.derivative(0.5 * (times[i] + times[i + 1]), 0)));
        PhaseInput::new(wps).with_midpoints(mids)
    }

    /// `max |p''(t)|` over `[a, b]` on a dense grid.
    pub fn acceleration_scale(&self, a: f64, b: f64) -> f64 {
        (0..=1000)
            .map(|i| self.derivative(a + (b - a) * i as f64 / 1000.0, 2).abs())
            .fold(0.0, f64::max)
    }
}

/// `Σ cₖ Tₖ(2t − 1)` expanded into powers of `t`.
fn chebyshev_to_monomial_unit(cheb: &[f64; 8]) -> [f64; 8] {
    // Tₖ in powers of x via T₀ = 1, T₁ = x, Tₖ₊₁ = 2x Tₖ − Tₖ₋₁.
    let mut basis = vec![[0.0f64; 8]; 8];
    basis[0][0] = 1.0;
    basis[1][1] = 1.0;
    for k in 1..7 {
        for i in 0..8 {
            let shifted = if i > 0 { 2.0 * basis[k][i - 1] } else { 0.0 };
            basis[k + 1][i] = shifted - basis[k - 1][i];
        }
    }
    let mut in_x = [0.0; 8];
    for (c, row) in cheb.iter().zip(&basis) {
        for (acc, b) in in_x.iter_mut().zip(row) {
            *acc += c * b;
        }
    }
    // xⁱ = (2t − 1)ⁱ = Σⱼ C(i, j) 2ʲ tʲ (−1)^(i−j).
    let mut in_t = [0.0; 8];
    for (i, a) in in_x.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=i {
            let sign = if (i - j) % 2 == 0 { 1.0 } else { -1.0 };
            in_t[j] += a * binom * 2f64.powi(j as i32) * sign;
            binom = binom * (i - j) as f64 / (j + 1) as f64;
        }
    }
    in_t
}

pub fn one() -> BigRational {
    BigRational::one()
}
