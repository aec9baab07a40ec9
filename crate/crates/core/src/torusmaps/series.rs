use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::schedule::{Schedule, MAX_EVALUABLE_FREQUENCY};

use super::point::TorusPoint;

/// `frequency * x mod 1`; exact for the hi word since `frequency <= 2^53`.
#[inline]
pub fn phase(frequency: u64, x: Dd) -> Dd {
    x.mul_f64(frequency as f64).frac()
}

/// `frequency * x mod 1` computed in exact arithmetic before rounding.
pub fn phase_exact(frequency: u64, x: &Rational) -> Dd {
    Dd::from_rational(&(x * &Rational::from_integer(frequency)).frac())
}

/// `Σ amplitude_j sin(2π frequency_j x)` with strictly increasing frequencies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    terms: Vec<(f64, u64)>,
}

impl TrigSeries {
    pub fn zero() -> Self {
        TrigSeries { terms: Vec::new() }
    }

    pub fn new(terms: Vec<(f64, u64)>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[1].1 <= w[0].1 {
                return Err(Error::InvalidArgument("frequencies must increase strictly".into()));
            }
        }
        if let Some(&(_, q)) = terms.iter().find(|t| t.1 == 0 || t.1 > MAX_EVALUABLE_FREQUENCY) {
            return Err(Error::FrequencyOverflow(q.to_string()));
        }
        Ok(TrigSeries { terms })
    }

    pub fn single(amplitude: f64, frequency: u64) -> Self {
        TrigSeries::new(vec![(amplitude, frequency)]).expect("valid single term")
    }

    pub fn terms(&self) -> &[(f64, u64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_frequency(&self) -> u64 {
        self.terms.last().map(|t| t.1).unwrap_or(0)
    }

    /// `Σ |amplitude_j|`, the sup norm bound on the real line.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.0.abs()).sum()
    }

    pub fn eval(&self, x: Dd) -> Dd {
        self.terms.iter().fold(Dd::ZERO, |acc, &(c, q)| {
            let (s, _) = Dd::sin_cos_two_pi_f64(phase(q, x));
            acc + Dd::from_f64(c * s)
        })
    }

    pub fn eval_exact(&self, x: &Rational) -> Dd {
        self.terms.iter().fold(Dd::ZERO, |acc, &(c, q)| {
            let (s, _) = Dd::sin_cos_two_pi_f64(phase_exact(q, x));
            acc + Dd::from_f64(c * s)
        })
    }

    /// Uses the exact abscissa when the point carries one.
    pub fn eval_at(&self, z: &TorusPoint) -> Dd {
        match &z.exact_x {
            Some(x) => self.eval_exact(x),
            None => self.eval(z.x),
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.eval(Dd::from_f64(x)).to_f64()
    }

    pub fn derivative(&self, x: Dd) -> f64 {
        self.terms
            .iter()
            .map(|&(c, q)| {
                let (_, co) = Dd::sin_cos_two_pi_f64(phase(q, x));
                2.0 * std::f64::consts::PI * q as f64 * c * co
            })
            .sum()
    }

    /// Holomorphic extension; the real part of `x` is reduced in double-double.
    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(c, q)| c * sin_two_pi_complex(q, x))
            .sum()
    }

    pub fn derivative_complex(&self, x: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(c, q)| 2.0 * std::f64::consts::PI * q as f64 * c * cos_two_pi_complex(q, x))
            .sum()
    }

    /// Terms `m..=n` of another series; used to peel stages.
    pub fn restrict(&self, keep: impl Fn(u64) -> bool) -> TrigSeries {
        TrigSeries { terms: self.terms.iter().copied().filter(|t| keep(t.1)).collect() }
    }
}

fn reduced_arg(q: u64, x: Complex64) -> Complex64 {
    let re = phase(q, Dd::from_f64(x.re)).centered_frac().to_f64();
    Complex64::new(re, q as f64 * x.im) * (2.0 * std::f64::consts::PI)
}

/// `sin(2π q x)` for complex `x`.
pub fn sin_two_pi_complex(q: u64, x: Complex64) -> Complex64 {
    reduced_arg(q, x).sin()
}

pub fn cos_two_pi_complex(q: u64, x: Complex64) -> Complex64 {
    reduced_arg(q, x).cos()
}

fn stage_frequency(schedule: &Schedule, j: usize) -> Result<u64> {
    let st = schedule.stage(j)?;
    match st.q.to_u64() {
        Some(q) if q <= MAX_EVALUABLE_FREQUENCY => Ok(q),
        _ => Err(Error::FrequencyOverflow(st.q.to_string())),
    }
}

/// `Σ_{j=m}^{n} c_j sin(2π q_j x)`; empty when `m > n`.
pub fn coboundary_series(m: usize, n: usize, schedule: &Schedule) -> Result<TrigSeries> {
    if m == 0 {
        return Err(Error::InvalidArgument("stages are numbered from 1".into()));
    }
    let mut terms = Vec::new();
    for j in m..=n {
        terms.push((schedule.stage(j)?.c, stage_frequency(schedule, j)?));
    }
    TrigSeries::new(terms)
}

/// Graph `x ↦ y0 − g(x) mod 1`, invariant under every skew map built on `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCurve {
    pub y0: f64,
    pub g: TrigSeries,
}

impl InvariantCurve {
    pub fn eval(&self, x: Dd) -> Dd {
        (Dd::from_f64(self.y0) - self.g.eval(x)).frac()
    }

    pub fn eval_exact(&self, x: &Rational) -> Dd {
        (Dd::from_f64(self.y0) - self.g.eval_exact(x)).frac()
    }

    /// Height without reduction mod 1; oscillation checks need the lift.
    pub fn lift(&self, x: Dd) -> f64 {
        (Dd::from_f64(self.y0) - self.g.eval(x)).to_f64()
    }

    pub fn lift_exact(&self, x: &Rational) -> f64 {
        (Dd::from_f64(self.y0) - self.g.eval_exact(x)).to_f64()
    }

    pub fn point(&self, x: Dd) -> TorusPoint {
        TorusPoint::from_dd(x, self.eval(x))
    }

    pub fn point_exact(&self, x: Rational) -> TorusPoint {
        let y = self.eval_exact(&x);
        TorusPoint::exact(x, y)
    }
}

pub fn invariant_curve(y0: f64, m: usize, n: usize, schedule: &Schedule) -> Result<InvariantCurve> {
    Ok(InvariantCurve { y0, g: coboundary_series(m, n, schedule)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_quarter_period() {
        let g = TrigSeries::single(1.0, 4);
        assert!((g.eval_exact(&Rational::new(1, 16)).to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_terms_sum() {
        let g = TrigSeries::new(vec![(1.0, 4), (1.0, 16)]).unwrap();
        let expected = (std::f64::consts::PI / 8.0).sin() + 1.0;
        assert!((g.eval_exact(&Rational::new(1, 64)).to_f64() - expected).abs() < 1e-15);
        assert!((g.eval_exact(&Rational::new(1, 64)).to_f64() - 1.3826834).abs() < 1e-7);
    }

    #[test]
    fn rejects_unsorted_and_oversized() {
        assert!(TrigSeries::new(vec![(1.0, 16), (1.0, 4)]).is_err());
        assert!(matches!(
            TrigSeries::new(vec![(1.0, (1u64 << 53) + 4)]),
            Err(Error::FrequencyOverflow(_))
        ));
    }

    #[test]
    fn curve_reduces_mod_one() {
        let c = InvariantCurve { y0: 0.5, g: TrigSeries::single(1.0, 4) };
        assert!((c.eval_exact(&Rational::new(1, 16)).to_f64() - 0.5).abs() < 1e-15);
        assert!((c.lift_exact(&Rational::new(1, 16)) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn complex_matches_real_on_axis() {
        let g = TrigSeries::new(vec![(0.7, 3), (0.2, 12)]).unwrap();
        for i in 0..20 {
            let x = i as f64 / 20.0 + 0.01;
            let z = g.eval_complex(Complex64::new(x, 0.0));
            assert!((z.re - g.eval_f64(x)).abs() < 1e-14);
            assert!(z.im.abs() < 1e-14);
        }
    }
}
