//! Recorded evaluations of single inequalities.

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// One side of a certified inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Exact(Rational),
    Real(f64),
    /// Natural logarithm of a positive quantity too large or small for f64.
    Ln(f64),
}

impl Quantity {
    pub fn ln(&self) -> f64 {
        match self {
            Quantity::Exact(r) => r.ln(),
            Quantity::Real(x) => x.ln(),
            Quantity::Ln(l) => *l,
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            Quantity::Exact(r) => r.to_f64(),
            Quantity::Real(x) => *x,
            Quantity::Ln(l) => l.exp(),
        }
    }
}

/// How much a verdict can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rigor {
    /// Exact big-integer / rational arithmetic.
    Exact,
    /// Closed-form bound evaluated in floating point (or log-domain).
    Analytic,
    /// Maximum over a finite sample; may miss the true supremum.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Stable slug naming the condition, e.g. `denominator-growth`.
    pub condition: String,
    /// The inequality in plain notation.
    pub statement: String,
    pub stage: Option<usize>,
    pub lhs: Quantity,
    pub rhs: Quantity,
    /// Signed slack; `pass` iff positive.
    pub margin: f64,
    pub pass: bool,
    pub rigor: Rigor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn clamp_margin(m: f64, pass: bool) -> f64 {
    let m = if m.is_nan() { if pass { f64::MIN_POSITIVE } else { -f64::MAX } } else { m };
    let m = m.clamp(-f64::MAX, f64::MAX);
    // Keep the sign of the margin consistent with the exact verdict even after rounding.
    match (pass, m > 0.0) {
        (true, false) => f64::MIN_POSITIVE,
        (false, true) => -f64::MIN_POSITIVE,
        _ => {
            if m == 0.0 {
                -f64::MIN_POSITIVE
            } else {
                m
            }
        }
    }
}

impl Certificate {
    fn build(
        condition: &str,
        statement: impl Into<String>,
        stage: Option<usize>,
        lhs: Quantity,
        rhs: Quantity,
        margin: f64,
        pass: bool,
        rigor: Rigor,
    ) -> Certificate {
        Certificate {
            condition: condition.to_string(),
            statement: statement.into(),
            stage,
            lhs,
            rhs,
            margin: clamp_margin(margin, pass),
            pass,
            rigor,
            note: None,
        }
    }

    /// `lhs < rhs` decided exactly; margin is `rhs - lhs`.
    pub fn exact_less(
        condition: &str,
        statement: impl Into<String>,
        stage: Option<usize>,
        lhs: Rational,
        rhs: Rational,
    ) -> Certificate {
        let pass = lhs < rhs;
        let margin = (&rhs - &lhs).to_f64();
        Certificate::build(
            condition,
            statement,
            stage,
            Quantity::Exact(lhs),
            Quantity::Exact(rhs),
            margin,
            pass,
            Rigor::Exact,
        )
    }

    /// `lhs == rhs` decided exactly; margin is `1` on equality and `-|lhs - rhs|` otherwise.
    pub fn exact_equal(
        condition: &str,
        statement: impl Into<String>,
        stage: Option<usize>,
        lhs: Rational,
        rhs: Rational,
    ) -> Certificate {
        let pass = lhs == rhs;
        let margin = if pass { 1.0 } else { -(&lhs - &rhs).abs().to_f64() };
        Certificate::build(
            condition,
            statement,
            stage,
            Quantity::Exact(lhs),
            Quantity::Exact(rhs),
            margin,
            pass,
            Rigor::Exact,
        )
    }

    /// `lhs < rhs` in floating point; margin is `rhs - lhs`.
    pub fn real_less(
        condition: &str,
        statement: impl Into<String>,
        stage: Option<usize>,
        lhs: f64,
        rhs: f64,
        rigor: Rigor,
    ) -> Certificate {
        let pass = lhs < rhs;
        Certificate::build(
            condition,
            statement,
            stage,
            Quantity::Real(lhs),
            Quantity::Real(rhs),
            rhs - lhs,
            pass,
            rigor,
        )
    }

    /// `lhs <= rhs` in floating point; margin is `rhs - lhs`, nudged positive on equality.
    pub fn real_at_most(
        condition: &str,
        statement: impl Into<String>,
        stage: Option<usize>,
        lhs: f64,
        rhs: f64,
        rigor: Rigor,
    ) -> Certificate {
        let pass = lhs <= rhs;
        Certificate::build(
            condition,
            statement,
            stage,
            Quantity::Real(lhs),
            Quantity::Real(rhs),
            rhs - lhs,
            pass,
            rigor,
        )
    }

    /// `exp(ln_lhs) < exp(ln_rhs)`; margin is `ln_rhs - ln_lhs`.
    pub fn log_less(
        condition: &str,
        statement: impl Into<String>,
        stage: Option<usize>,
        ln_lhs: f64,
        ln_rhs: f64,
        rigor: Rigor,
    ) -> Certificate {
        let pass = ln_lhs < ln_rhs;
        Certificate::build(
            condition,
            statement,
            stage,
            Quantity::Ln(ln_lhs),
            Quantity::Ln(ln_rhs),
            ln_rhs - ln_lhs,
            pass,
            rigor,
        )
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Certificate {
        self.note = Some(note.into());
        self
    }
}

pub fn all_pass(certs: &[Certificate]) -> bool {
    certs.iter().all(|c| c.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_sign_tracks_verdict() {
        let c = Certificate::exact_less("t", "a < b", None, Rational::new(1, 3), Rational::new(1, 2));
        assert!(c.pass && c.margin > 0.0);
        let c = Certificate::exact_less("t", "a < b", None, Rational::new(1, 2), Rational::new(1, 2));
        assert!(!c.pass && c.margin < 0.0);
        // A difference below f64 range still yields a positive margin.
        let tiny = Rational::dyadic_below_exp(-3000.0).unwrap();
        let c = Certificate::exact_less("t", "", None, Rational::zero(), tiny);
        assert!(c.pass && c.margin > 0.0);
        let c = Certificate::exact_equal("t", "", None, Rational::one(), Rational::one());
        assert!(c.pass && c.margin == 1.0);
    }

    #[test]
    fn log_domain_and_serde() {
        let c = Certificate::log_less("t", "", Some(2), 1000.0, 1001.0, Rigor::Analytic);
        assert!(c.pass);
        let s = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let c = Certificate::real_less("t", "", None, f64::INFINITY, 1.0, Rigor::Sampled);
        assert!(!c.pass && c.margin.is_finite());
    }
}
