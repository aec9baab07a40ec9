use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::par;
use crate::special::bessel_j;
use crate::torusmaps::{InvariantCurve, TrigSeries};

use super::observable::{Observable, Term};

const CHUNK: u64 = 1 << 16;

/// Bessel coefficients below this are dropped from the frequency content.
const BESSEL_TAIL: f64 = 1e-18;

/// Smallest `n` with `|J_m(x)| ≤ BESSEL_TAIL` for all `m ≥ n`, from
/// `J_ν(ν sech a) ≤ exp(ν (tanh a − a))`.
pub fn bessel_cutoff(x: f64) -> u64 {
    let x = x.abs();
    if x == 0.0 {
        return 1;
    }
    let small = |n: u64| {
        let a = (n as f64 / x).acosh();
        n as f64 * (a.tanh() - a) <= BESSEL_TAIL.ln()
    };
    let mut lo = x.floor() as u64;
    let mut step = 1u64;
    while !small(lo + step) {
        lo += step;
        step *= 2;
    }
    let mut hi = lo + step;
    // small(hi) holds and small(lo) fails (or lo ≤ x).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if small(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Frequency content of `x ↦ e^{2πi(kx − l g(x))}` up to Bessel tails below `1e-18`:
/// `|k| + Σ_j q_j n_j` with `n_j` the cutoff of `J_n(2π l c_j)`.
pub fn bandwidth(k: i64, l: i64, g: &TrigSeries) -> f64 {
    let mut b = k.unsigned_abs() as f64;
    if l != 0 {
        for &(c, q) in g.terms() {
            if c != 0.0 {
                b += q as f64 * bessel_cutoff(std::f64::consts::TAU * l as f64 * c) as f64;
            }
        }
    }
    b
}

/// Trapezoid nodes that integrate one term without aliasing: one more than its bandwidth.
pub fn term_points(k: i64, l: i64, g: &TrigSeries) -> u64 {
    bandwidth(k, l, g) as u64 + 1
}

/// Nodes needed so that no term aliases onto its mean.
pub fn required_points(f: &Observable, g: &TrigSeries) -> u64 {
    f.terms.iter().map(|t| term_points(t.k, t.l, g)).max().unwrap_or(1)
}

/// `∫₀¹ e^{2πi(kx + lΓ(x))} dx` by the `points`-node trapezoid rule, which is the exact
/// integral of every frequency of modulus below `points`. Abscissae are `j/points`, so each phase
/// `q j mod points` is an exact integer.
pub fn term_integral(k: i64, l: i64, curve: &InvariantCurve, points: u64) -> Complex64 {
    if l == 0 {
        return if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let n = points.max(1);
    let nn = n as u128;
    let freqs: Vec<(f64, u128)> = curve.g.terms().iter().map(|&(c, q)| (c, q as u128 % nn)).collect();
    let k_mod = (k as i128).rem_euclid(n as i128) as u128;
    let y0 = Dd::from_f64(curve.y0).mul_f64(l as f64);
    let chunks = n.div_ceil(CHUNK) as usize;
    let partial = par::map_range(chunks, |ci| {
        let lo = ci as u64 * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = super::birkhoff::Accumulator::default();
        for j in lo..hi {
            let jj = j as u128;
            let mut g = Dd::ZERO;
            for &(c, qm) in &freqs {
                let t = ((qm * jj) % nn) as f64 / n as f64;
                g = g + Dd::from_f64(c).mul_f64((std::f64::consts::TAU * t).sin());
            }
            let kx = ((k_mod * jj) % nn) as f64 / n as f64;
            let phase = (Dd::from_f64(kx) + y0 - g.mul_f64(l as f64)).frac();
            let (s, c) = Dd::sin_cos_two_pi_f64(phase);
            acc.add(Complex64::new(c, s));
        }
        acc.value()
    });
    let mut acc = super::birkhoff::Accumulator::default();
    for p in partial {
        acc.add(p);
    }
    acc.value() / n as f64
}

/// `∫₀¹ f(x, Γ(x)) dx`, the mean of `f` for the invariant measure carried by the curve.
pub fn curve_integral(f: &Observable, curve: &InvariantCurve, points: u64) -> Result<Complex64> {
    let required = required_points(f, &curve.g);
    if points < required {
        return Err(Error::UnderResolved { points: points as usize, required: required as usize });
    }
    Ok(f.terms.iter().map(|t| t.coeff * term_integral(t.k, t.l, curve, points)).sum())
}

/// Closed form for a curve with at most one sine term:
/// `e^{2πi l y₀} J_{k/q}(2π l c)` when `q | k`, else `0`.
pub fn single_sine_integral(k: i64, l: i64, curve: &InvariantCurve) -> Option<Complex64> {
    let terms = curve.g.terms();
    if terms.len() > 1 {
        return None;
    }
    let (s, co) = Dd::sin_cos_two_pi_f64(Dd::from_f64(curve.y0).mul_f64(l as f64));
    let rot = Complex64::new(co, s);
    let (c, q) = terms.first().copied().unwrap_or((0.0, 1));
    if l == 0 || c == 0.0 {
        return Some(if k == 0 { rot } else { Complex64::new(0.0, 0.0) });
    }
    if k % q as i64 != 0 {
        return Some(Complex64::new(0.0, 0.0));
    }
    Some(rot * bessel_j(k / q as i64, std::f64::consts::TAU * l as f64 * c))
}

/// Per-term curve means `I_{k,l} = ∫ e^{2πi(kx − l g(x))} dx`, reused for every invariant
/// curve `y = u − g(x)` since the mean there is `Σ coeff e^{2πilu} I_{k,l}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfile {
    pub terms: Vec<(Term, Complex64)>,
    /// Quadrature nodes used; zero when every term had a closed form.
    pub points: u64,
}

impl MeasureProfile {
    pub fn new(f: &Observable, g: &TrigSeries, budget: u64) -> Result<Self> {
        let base = InvariantCurve { y0: 0.0, g: g.clone() };
        let mut points = 0;
        let mut terms = Vec::with_capacity(f.terms.len());
        for t in &f.terms {
            let v = match single_sine_integral(t.k, t.l, &base) {
                Some(v) => v,
                None if t.l == 0 => term_integral(t.k, 0, &base, 1),
                None => {
                    let required = term_points(t.k, t.l, g);
                    if required > budget {
                        return Err(Error::InfeasibleQuadrature { required, budget });
                    }
                    points = points.max(required);
                    term_integral(t.k, t.l, &base, required)
                }
            };
            terms.push((*t, v));
        }
        Ok(MeasureProfile { terms, points })
    }

    /// Mean of `f` on the curve through a point with invariant `u`.
    pub fn mean_on_curve(&self, u: Dd) -> Complex64 {
        self.terms
            .iter()
            .map(|(t, v)| {
                let (s, c) = Dd::sin_cos_two_pi_f64(u.mul_f64(t.l as f64));
                t.coeff * v * Complex64::new(c, s)
            })
            .sum()
    }

    /// `sup_u |mean_on_curve(u) − f̂|` bounded by the non-constant part.
    pub fn distance_to_lebesgue(&self) -> f64 {
        self.terms.iter().filter(|(t, _)| t.k != 0 || t.l != 0).map(|(t, v)| (t.coeff * v).norm()).sum()
    }
}
