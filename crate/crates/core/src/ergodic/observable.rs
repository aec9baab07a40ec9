use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;

const TAU: f64 = std::f64::consts::TAU;

/// One character `coeff · e^{2πi(kx + ly)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub k: i64,
    pub l: i64,
    pub coeff: Complex64,
}

impl Term {
    /// `k x + l y mod 1`.
    #[inline]
    pub fn phase(&self, x: Dd, y: Dd) -> Dd {
        (x.mul_f64(self.k as f64) + y.mul_f64(self.l as f64)).frac()
    }

    #[inline]
    pub fn eval(&self, x: Dd, y: Dd) -> Complex64 {
        let (s, c) = Dd::sin_cos_two_pi_f64(self.phase(x, y));
        self.coeff * Complex64::new(c, s)
    }
}

/// Trigonometric polynomial on the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub label: String,
    pub terms: Vec<Term>,
}

impl Observable {
    /// Terms with equal `(k, l)` are merged; zero coefficients are dropped.
    pub fn new(label: impl Into<String>, terms: Vec<Term>) -> Self {
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.k == t.k && m.l == t.l) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        Observable { label: label.into(), terms: merged }
    }

    pub fn constant(value: f64) -> Self {
        Observable::new(format!("{value}"), vec![Term { k: 0, l: 0, coeff: Complex64::new(value, 0.0) }])
    }

    pub fn character(k: i64, l: i64) -> Self {
        Observable::new(format!("exp(2pi i({}))", linear_form(k, l)), vec![Term { k, l, coeff: Complex64::new(1.0, 0.0) }])
    }

    /// `cos 2π(kx + ly)`.
    pub fn cos(k: i64, l: i64) -> Self {
        let half = Complex64::new(0.5, 0.0);
        Observable::new(
            format!("cos 2pi({})", linear_form(k, l)),
            vec![Term { k, l, coeff: half }, Term { k: -k, l: -l, coeff: half }],
        )
    }

    /// `sin 2π(kx + ly)`.
    pub fn sin(k: i64, l: i64) -> Self {
        Observable::new(
            format!("sin 2pi({})", linear_form(k, l)),
            vec![
                Term { k, l, coeff: Complex64::new(0.0, -0.5) },
                Term { k: -k, l: -l, coeff: Complex64::new(0.0, 0.5) },
            ],
        )
    }

    /// Lebesgue mean, the `(0, 0)` coefficient.
    pub fn mean(&self) -> Complex64 {
        self.terms.iter().filter(|t| t.k == 0 && t.l == 0).map(|t| t.coeff).sum()
    }

    /// `Σ |coeff|`, an upper bound for the sup norm (attained by single characters and real pairs).
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// True when the observable depends on `x` only.
    pub fn x_only(&self) -> bool {
        self.terms.iter().all(|t| t.l == 0)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| {
            let partner: Complex64 =
                self.terms.iter().filter(|u| u.k == -t.k && u.l == -t.l).map(|u| u.coeff).sum();
            (partner - t.coeff.conj()).norm() <= tol
        })
    }

    pub fn eval(&self, x: Dd, y: Dd) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x, y)).sum()
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> Complex64 {
        self.eval(Dd::from_f64(x), Dd::from_f64(y))
    }

    /// `(∂f/∂x, ∂f/∂y)`.
    pub fn gradient(&self, x: Dd, y: Dd) -> (Complex64, Complex64) {
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let v = t.eval(x, y) * Complex64::new(0.0, TAU);
            gx += v * t.k as f64;
            gy += v * t.l as f64;
        }
        (gx, gy)
    }
}

fn linear_form(k: i64, l: i64) -> String {
    match (k, l) {
        (0, 0) => "0".into(),
        (k, 0) => format!("{}x", coef(k)),
        (0, l) => format!("{}y", coef(l)),
        (k, l) if l > 0 => format!("{}x+{}y", coef(k), coef(l)),
        (k, l) => format!("{}x-{}y", coef(k), coef(-l)),
    }
}

fn coef(v: i64) -> String {
    match v {
        1 => String::new(),
        -1 => "-".into(),
        v => v.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_pairs_evaluate_to_trig_functions() {
        let (x, y) = (0.137, 0.811);
        let c = Observable::cos(2, -1).eval_f64(x, y);
        let s = Observable::sin(2, -1).eval_f64(x, y);
        let th = TAU * (2.0 * x - y);
        assert!((c.re - th.cos()).abs() < 1e-15 && c.im.abs() < 1e-15);
        assert!((s.re - th.sin()).abs() < 1e-15 && s.im.abs() < 1e-15);
        assert!(Observable::cos(1, 1).is_real(0.0));
        assert!(!Observable::character(1, 0).is_real(1e-12));
        assert_eq!(Observable::cos(1, 0).label, "cos 2pi(x)");
        assert_eq!(Observable::sin(-1, 1).label, "sin 2pi(-x+y)");
    }

    #[test]
    fn merging_and_mean() {
        let f = Observable::new(
            "f",
            vec![
                Term { k: 0, l: 0, coeff: Complex64::new(1.0, 0.0) },
                Term { k: 1, l: 0, coeff: Complex64::new(1.0, 0.0) },
                Term { k: 1, l: 0, coeff: Complex64::new(-1.0, 0.0) },
            ],
        );
        assert_eq!(f.terms.len(), 1);
        assert_eq!(f.mean(), Complex64::new(1.0, 0.0));
        assert!(f.x_only());
        assert_eq!(Observable::cos(0, 1).sup_bound(), 1.0);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let f = Observable::sin(1, 2);
        let (x, y) = (0.3, 0.7);
        let h = 1e-6;
        let (gx, gy) = f.gradient(Dd::from_f64(x), Dd::from_f64(y));
        let fx = (f.eval_f64(x + h, y) - f.eval_f64(x - h, y)) / (2.0 * h);
        let fy = (f.eval_f64(x, y + h) - f.eval_f64(x, y - h)) / (2.0 * h);
        assert!((gx - fx).norm() < 1e-6 && (gy - fy).norm() < 1e-6);
    }
}
