//! Fourier-side diagnostics of the limit: the cohomological equation `φ = g − g∘R_α` and the
//! growth of lacunary partial sums.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::kronecker;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::torusmaps::{Angle, TrigSeries};

/// Tail mass `Σ_{j ≥ ⌈N/2⌉} |c_j|` at or above which partial sums are reported as
/// divergent. Any summable sequence has tails tending to zero; the harmonic tail stays near
/// `ln 2`.
pub const DIVERGENCE_TOLERANCE: f64 = 0.5;

/// `kα mod 1`, exact when `α` is.
fn frequency_phase(k: i64, alpha: &Angle) -> Dd {
    match alpha {
        Angle::Exact(a) => Dd::from_rational(&(a * &Rational::from_integer(k)).frac()),
        Angle::Real(a) => Dd::from_f64(*a).mul_f64(k as f64).frac(),
    }
}

/// `1 − e^{2πikα} = −2i sin(πkα) e^{iπkα}`, evaluated without cancellation.
pub fn small_divisor(k: i64, alpha: &Angle) -> Complex64 {
    let phi = frequency_phase(k, alpha);
    let (s, c) = Dd::sin_cos_two_pi_f64(phi.mul_f64(0.5));
    Complex64::new(0.0, -2.0 * s) * Complex64::new(c, s)
}

/// Fourier coefficients of `Σ c_j sin 2πq_jx`: `∓ i c_j / 2` at `±q_j`.
pub fn sine_coefficients(g: &TrigSeries) -> Vec<(i64, Complex64)> {
    let mut out = Vec::with_capacity(2 * g.terms().len());
    for &(c, q) in g.terms() {
        out.push((q as i64, Complex64::new(0.0, -c / 2.0)));
        out.push((-(q as i64), Complex64::new(0.0, c / 2.0)));
    }
    out
}

/// Coefficients of `φ = g − g∘R_α`: `ĝ_k (1 − e^{2πikα})`.
pub fn difference_coefficients(g: &TrigSeries, alpha: &Angle) -> Vec<(i64, Complex64)> {
    sine_coefficients(g).into_iter().map(|(k, c)| (k, c * small_divisor(k, alpha))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoboundaryMode {
    pub frequency: i64,
    /// `|1 − e^{2πikα}|`.
    pub divisor: f64,
    pub phi: Complex64,
    pub g: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoboundaryReport {
    /// Mean of `φ`; a nonzero mean is the constant `r` no coboundary can absorb.
    pub mean_obstruction: Complex64,
    /// Ordered by `|k|`, then `k`.
    pub modes: Vec<CoboundaryMode>,
    /// `Σ |ĝ_k|` over the first `j + 1` modes.
    pub partial_sums: Vec<f64>,
}

/// Solves `φ = g − g∘R_α` mode by mode, `ĝ_k = φ̂_k / (1 − e^{2πikα})`.
pub fn coboundary_solve(phi_hat: &[(i64, Complex64)], alpha: &Angle) -> Result<CoboundaryReport> {
    let mut modes: Vec<(i64, Complex64)> = Vec::new();
    let mut mean = Complex64::new(0.0, 0.0);
    for &(k, c) in phi_hat {
        if k == 0 {
            mean += c;
        } else if let Some(m) = modes.iter_mut().find(|m| m.0 == k) {
            m.1 += c;
        } else {
            modes.push((k, c));
        }
    }
    modes.sort_by_key(|&(k, _)| (k.unsigned_abs(), k));
    let mut out = Vec::with_capacity(modes.len());
    let mut partial_sums = Vec::with_capacity(modes.len());
    let mut total = 0.0;
    for (k, c) in modes {
        let active = c != Complex64::new(0.0, 0.0);
        if frequency_phase(k, alpha).is_zero() {
            if active {
                return Err(Error::SmallDivisorZero { frequency: k });
            }
            continue;
        }
        let d = small_divisor(k, alpha);
        let g = c / d;
        total += g.norm();
        partial_sums.push(total);
        out.push(CoboundaryMode { frequency: k, divisor: d.norm(), phi: c, g });
    }
    Ok(CoboundaryReport { mean_obstruction: mean, modes: out, partial_sums })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LacunarityReport {
    /// `min_j q_{j+1} / q_j`.
    pub ratio: f64,
    /// `Σ_{i≤j} |c_i|`.
    pub partial_sums: Vec<f64>,
    /// `Σ_{j ≥ ⌈N/2⌉} |c_j|`.
    pub tail: f64,
    pub divergent: bool,
    /// Sampled `max − min` of each partial sum `g_n`.
    pub oscillation: Vec<f64>,
}

pub fn lacunarity_report(g: &TrigSeries) -> Result<LacunarityReport> {
    let terms = g.terms();
    if terms.len() < 2 {
        return Err(Error::InvalidArgument("lacunarity needs at least two terms".into()));
    }
    let ratio = terms.windows(2).map(|w| w[1].1 as f64 / w[0].1 as f64).fold(f64::INFINITY, f64::min);
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for &(c, _) in terms {
        acc += c.abs();
        partial_sums.push(acc);
    }
    let half = terms.len().div_ceil(2);
    let tail: f64 = terms[half - 1..].iter().map(|t| t.0.abs()).sum();

    // Kronecker points plus the two points where every term sits at a crest or trough
    // when each frequency divides the next.
    let mut xs: Vec<Dd> = (0..4096).map(|j| Dd::from_f64(kronecker(j))).collect();
    let q1 = terms[0].1 as f64;
    let mut shift = Dd::ZERO;
    for &(_, q) in &terms[1..] {
        shift = shift + Dd::from_f64(1.0).div(Dd::from_f64(4.0 * q as f64));
    }
    xs.push(Dd::from_f64(1.0).div(Dd::from_f64(4.0 * q1)) + shift);
    xs.push(Dd::from_f64(3.0).div(Dd::from_f64(4.0 * q1)) - shift);
    let oscillation = (1..=terms.len())
        .map(|n| {
            let gn = TrigSeries::new(terms[..n].to_vec()).expect("prefix of a valid series");
            let (mn, mx) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), &x| {
                let v = gn.eval(x).to_f64();
                (mn.min(v), mx.max(v))
            });
            mx - mn
        })
        .collect();
    Ok(LacunarityReport { ratio, partial_sums, tail, divergent: tail >= DIVERGENCE_TOLERANCE, oscillation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_sine() {
        let g = TrigSeries::single(1.0, 16);
        let alpha = Angle::Exact(Rational::new(1, 7));
        let phi = difference_coefficients(&g, &alpha);
        let r = coboundary_solve(&phi, &alpha).unwrap();
        assert_eq!(r.modes.len(), 2);
        let plus = r.modes.iter().find(|m| m.frequency == 16).unwrap();
        let minus = r.modes.iter().find(|m| m.frequency == -16).unwrap();
        assert!((plus.g - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((minus.g - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((r.partial_sums[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resonance_and_zero() {
        let phi = vec![(4, Complex64::new(0.0, -0.5)), (-4, Complex64::new(0.0, 0.5))];
        let err = coboundary_solve(&phi, &Angle::Exact(Rational::new(1, 4))).unwrap_err();
        assert_eq!(err, Error::SmallDivisorZero { frequency: -4 });
        let r = coboundary_solve(&[], &Angle::Real(0.3)).unwrap();
        assert!(r.modes.is_empty() && r.mean_obstruction == Complex64::new(0.0, 0.0));
        let r = coboundary_solve(&[(0, Complex64::new(0.25, 0.0))], &Angle::Real(0.3)).unwrap();
        assert_eq!(r.mean_obstruction, Complex64::new(0.25, 0.0));
    }

    #[test]
    fn lacunarity_of_harmonic_profile() {
        let g = TrigSeries::new(vec![(1.0, 4), (0.5, 16), (1.0 / 3.0, 64)]).unwrap();
        let r = lacunarity_report(&g).unwrap();
        assert_eq!(r.ratio, 4.0);
        let expect = [1.0, 1.5, 1.8333333333333333];
        for (a, b) in r.partial_sums.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(r.divergent);
        let geometric = TrigSeries::new(vec![(0.5, 4), (0.25, 16), (0.125, 64)]).unwrap();
        assert!(!lacunarity_report(&geometric).unwrap().divergent);
        assert!(lacunarity_report(&TrigSeries::single(1.0, 4)).is_err());
    }
}
