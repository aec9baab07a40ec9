use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::rational::Rational;

/// Point of the torus with coordinates in `[0, 1)`. When `exact_x` is present, `x` is its
/// rounding and every rotation by an exact angle keeps it exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: Dd,
    pub y: Dd,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_x: Option<Rational>,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint::from_dd(Dd::from_f64(x), Dd::from_f64(y))
    }

    pub fn from_dd(x: Dd, y: Dd) -> Self {
        TorusPoint { x: x.frac(), y: y.frac(), exact_x: None }
    }

    pub fn exact(x: Rational, y: Dd) -> Self {
        let x = x.frac();
        TorusPoint { x: Dd::from_rational(&x), y: y.frac(), exact_x: Some(x) }
    }

    pub fn xf(&self) -> f64 {
        self.x.to_f64()
    }

    pub fn yf(&self) -> f64 {
        self.y.to_f64()
    }

    pub fn without_exact(mut self) -> Self {
        self.exact_x = None;
        self
    }

    /// Coordinate-max distance on the torus.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        let dx = (self.x - other.x).centered_frac().to_f64().abs();
        let dy = (self.y - other.y).centered_frac().to_f64().abs();
        dx.max(dy)
    }

    /// Signed `(dx, dy)` of `other − self`, each in `[-1/2, 1/2)`.
    pub fn delta(&self, other: &TorusPoint) -> (f64, f64) {
        (
            (other.x - self.x).centered_frac().to_f64(),
            (other.y - self.y).centered_frac().to_f64(),
        )
    }
}

/// Point of the complex strip `{|Im x|, |Im y| <= r}`; not reduced mod 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripPoint {
    pub x: Complex64,
    pub y: Complex64,
}

impl StripPoint {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        StripPoint { x, y }
    }

    pub fn in_strip(&self, r: f64) -> bool {
        self.x.im.abs() <= r && self.y.im.abs() <= r
    }

    pub fn max_imag(&self) -> f64 {
        self.x.im.abs().max(self.y.im.abs())
    }
}

/// Rotation angle: exact angles keep exact abscissae exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Exact(Rational),
    Real(f64),
}

impl Angle {
    pub fn dd(&self) -> Dd {
        match self {
            Angle::Exact(r) => Dd::from_rational(r),
            Angle::Real(a) => Dd::from_f64(*a),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.dd().to_f64()
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Angle::Exact(r) => Some(r),
            Angle::Real(_) => None,
        }
    }

    /// `i * self`.
    pub fn times(&self, i: u64) -> Angle {
        match self {
            Angle::Exact(r) => Angle::Exact(r * &Rational::from_integer(i)),
            Angle::Real(a) => Angle::Real(a * i as f64),
        }
    }

    /// Shift of `x` by `i * self`, exact where possible.
    pub fn shift(&self, z: &TorusPoint, i: u64) -> (Dd, Option<Rational>) {
        match (self, &z.exact_x) {
            (Angle::Exact(a), Some(x)) => {
                let nx = (x + &(a * &Rational::from_integer(i))).frac();
                (Dd::from_rational(&nx), Some(nx))
            }
            _ => ((z.x + self.dd().mul_f64(i as f64)).frac(), None),
        }
    }
}

impl From<Rational> for Angle {
    fn from(r: Rational) -> Self {
        Angle::Exact(r)
    }
}

impl From<f64> for Angle {
    fn from(a: f64) -> Self {
        Angle::Real(a)
    }
}
