use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::torusmaps::{MapExpr, SkewMap, TorusPoint};

use super::observable::Observable;

/// A map that can be iterated along an orbit.
pub trait Dynamics: Sync {
    fn step(&self, z: &TorusPoint) -> TorusPoint;

    /// Calls `visit(i, z_i)` for `i = 0..=count`.
    fn orbit(&self, z: &TorusPoint, count: u64, visit: &mut dyn FnMut(u64, &TorusPoint)) {
        let mut p = z.clone();
        visit(0, &p);
        for i in 1..=count {
            p = self.step(&p);
            visit(i, &p);
        }
    }

    /// Skew products expose their closed form so callers can skip simulation.
    fn as_skew(&self) -> Option<&SkewMap> {
        None
    }
}

impl Dynamics for MapExpr {
    fn step(&self, z: &TorusPoint) -> TorusPoint {
        self.apply(z)
    }
}

impl Dynamics for SkewMap {
    fn step(&self, z: &TorusPoint) -> TorusPoint {
        self.apply(z)
    }

    /// `x_i = x_0 + iα` from the rounded angle (no accumulated drift) and `y_i = u − g(x_i)`
    /// from the invariant `u`, so no error builds up along the orbit.
    fn orbit(&self, z: &TorusPoint, count: u64, visit: &mut dyn FnMut(u64, &TorusPoint)) {
        let u = self.invariant(z);
        let a = self.alpha_dd();
        visit(0, z);
        for i in 1..=count {
            let x = (z.x + a.mul_f64(i as f64)).frac();
            let y = (u - self.g.eval(x)).frac();
            visit(i, &TorusPoint { x, y, exact_x: None });
        }
    }

    fn as_skew(&self) -> Option<&SkewMap> {
        Some(self)
    }
}

/// Calls `visit(i, f(z_i))` for `i = 0..=count`; skips the curve evaluation when `f`
/// ignores `y`.
pub fn observe(map: &dyn Dynamics, f: &Observable, z: &TorusPoint, count: u64, visit: &mut dyn FnMut(u64, Complex64)) {
    match map.as_skew() {
        Some(skew) if f.x_only() => {
            let a = skew.alpha_dd();
            for i in 0..=count {
                let x = (z.x + a.mul_f64(i as f64)).frac();
                visit(i, f.eval(x, Dd::ZERO));
            }
        }
        _ => map.orbit(z, count, &mut |i, p| visit(i, f.eval(p.x, p.y))),
    }
}

/// `Σ_{i=0}^{k} e^{2πi iφ}` via `e^{iπkφ} sin(π(k+1)φ) / sin(πφ)`.
pub fn dirichlet_sum(phi: Dd, k: u64) -> Complex64 {
    let phi = phi.frac();
    if phi.is_zero() {
        return Complex64::new((k + 1) as f64, 0.0);
    }
    let (den, _) = Dd::sin_cos_two_pi_f64(phi.mul_f64(0.5));
    let (num, _) = Dd::sin_cos_two_pi_f64(phi.mul_f64(0.5 * (k + 1) as f64));
    let (s, c) = Dd::sin_cos_two_pi_f64(phi.mul_f64(0.5 * k as f64));
    Complex64::new(c, s) * (num / den)
}

/// `Σ_{i=0}^{k} f(x_0 + iα)` in closed form for an `x`-only observable.
pub fn pure_x_partial_sum(f: &Observable, x0: Dd, alpha: Dd, k: u64) -> Complex64 {
    debug_assert!(f.x_only());
    f.terms
        .iter()
        .map(|t| {
            let (s, c) = Dd::sin_cos_two_pi_f64(x0.mul_f64(t.k as f64));
            t.coeff * Complex64::new(c, s) * dirichlet_sum(alpha.mul_f64(t.k as f64), k)
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: u64,
    pub average: Complex64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffResult {
    pub reference: Complex64,
    pub checkpoints: Vec<Checkpoint>,
}

impl BirkhoffResult {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("at least one checkpoint")
    }
}

/// `1, 2, 5, 10, 20, 50, … ≤ k_max`, then `k_max` itself; strictly increasing.
pub fn log_checkpoints(k_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for m in [1u64, 2, 5] {
            let k = decade.saturating_mul(m);
            if k >= k_max {
                break 'outer;
            }
            out.push(k);
        }
        decade = decade.saturating_mul(10);
    }
    out.push(k_max);
    out
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Default)]
pub(crate) struct Accumulator {
    sum: Complex64,
    comp: Complex64,
}

impl Accumulator {
    #[inline]
    pub(crate) fn add(&mut self, v: Complex64) {
        self.sum.re = two_sum_into(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = two_sum_into(self.sum.im, v.im, &mut self.comp.im);
    }

    #[inline]
    pub(crate) fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[inline]
fn two_sum_into(a: f64, b: f64, comp: &mut f64) -> f64 {
    let s = a + b;
    *comp += if a.abs() >= b.abs() { (a - s) + b } else { (b - s) + a };
    s
}

/// Running averages `(1/(k+1)) Σ_{i≤k} f(map^i(z0))` at logarithmic checkpoints up to `k_max`.
pub fn birkhoff_average(
    map: &dyn Dynamics,
    f: &Observable,
    z0: &TorusPoint,
    k_max: u64,
    reference: Complex64,
) -> Result<BirkhoffResult> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("at least one iterate is required".into()));
    }
    let ks = log_checkpoints(k_max);
    let point = |k: u64, sum: Complex64| {
        let average = sum / (k + 1) as f64;
        Checkpoint { k, average, deviation: (average - reference).norm() }
    };
    let checkpoints = match map.as_skew() {
        Some(skew) if f.x_only() => {
            ks.iter().map(|&k| point(k, pure_x_partial_sum(f, z0.x, skew.alpha_dd(), k))).collect()
        }
        _ => {
            let mut out = Vec::with_capacity(ks.len());
            let mut acc = Accumulator::default();
            let mut next = 0;
            observe(map, f, z0, k_max, &mut |i, v| {
                acc.add(v);
                if ks[next] == i {
                    out.push(point(i, acc.value()));
                    next += 1;
                }
            });
            out
        }
    };
    Ok(BirkhoffResult { reference, checkpoints })
}

/// `max_{k_lo ≤ k ≤ k_hi} |(1/(k+1)) S_k − reference|` by simulation of every `k`.
pub fn deviation_sup(
    map: &dyn Dynamics,
    f: &Observable,
    z0: &TorusPoint,
    reference: Complex64,
    k_lo: u64,
    k_hi: u64,
) -> f64 {
    let mut acc = Accumulator::default();
    let mut worst = 0.0f64;
    observe(map, f, z0, k_hi, &mut |i, v| {
        acc.add(v);
        if i >= k_lo {
            worst = worst.max((acc.value() / (i + 1) as f64 - reference).norm());
        }
    });
    worst
}

/// Largest `k ≤ horizon` whose running average deviates by at least `threshold`.
pub fn last_exceedance(
    map: &dyn Dynamics,
    f: &Observable,
    z0: &TorusPoint,
    reference: Complex64,
    horizon: u64,
    threshold: f64,
) -> Option<u64> {
    let mut acc = Accumulator::default();
    let mut last = None;
    observe(map, f, z0, horizon, &mut |i, v| {
        acc.add(v);
        if (acc.value() / (i + 1) as f64 - reference).norm() >= threshold {
            last = Some(i);
        }
    });
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use crate::torusmaps::TrigSeries;

    #[test]
    fn checkpoints_increase() {
        assert_eq!(log_checkpoints(1), vec![1]);
        assert_eq!(log_checkpoints(100), vec![1, 2, 5, 10, 20, 50, 100]);
        assert_eq!(log_checkpoints(7), vec![1, 2, 5, 7]);
    }

    #[test]
    fn dirichlet_matches_direct_sum() {
        for &(phi, k) in &[(0.1234, 17u64), (0.5, 9), (1e-9, 1000), (0.0, 5)] {
            let direct: Complex64 =
                (0..=k).map(|i| Complex64::from_polar(1.0, std::f64::consts::TAU * phi * i as f64)).sum();
            assert!((dirichlet_sum(Dd::from_f64(phi), k) - direct).norm() < 1e-10, "{phi} {k}");
        }
    }

    #[test]
    fn constant_observable_averages_to_itself() {
        let map = SkewMap::new(Rational::new(1, 7), TrigSeries::single(1.0, 4));
        let r = birkhoff_average(&map, &Observable::constant(1.0), &TorusPoint::new(0.3, 0.2), 1000, Complex64::new(1.0, 0.0))
            .unwrap();
        assert!(r.checkpoints.iter().all(|c| c.deviation < 1e-14));
        assert!(birkhoff_average(&map, &Observable::constant(1.0), &TorusPoint::new(0.0, 0.0), 0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn closed_form_and_simulation_agree() {
        let g = TrigSeries::single(1.0, 4);
        let skew = SkewMap::new(0.318309886183791, g.clone());
        let expr = MapExpr { atoms: vec![crate::torusmaps::Atom::Rotate(0.318309886183791.into())] };
        let f = Observable::cos(1, 0);
        let z = TorusPoint::new(0.1, 0.9);
        let zero = Complex64::new(0.0, 0.0);
        let a = birkhoff_average(&skew, &f, &z, 5000, zero).unwrap();
        let b = birkhoff_average(&expr, &f, &z, 5000, zero).unwrap();
        for (p, q) in a.checkpoints.iter().zip(&b.checkpoints) {
            assert!((p.average - q.average).norm() < 1e-12);
        }
    }

    #[test]
    fn skew_orbit_matches_stepping() {
        let skew = SkewMap::new(0.2718281828, TrigSeries::new(vec![(0.7, 3), (0.2, 24)]).unwrap());
        let z = TorusPoint::new(0.41, 0.05);
        let mut pts = Vec::new();
        skew.orbit(&z, 200, &mut |_, p| pts.push(p.clone()));
        let mut p = z.clone();
        for (i, q) in pts.iter().enumerate() {
            assert!(p.distance(q) < 1e-12, "step {i}");
            p = skew.step(&p);
        }
    }
}
