//! Shears, rotations and their compositions on the torus and on complex strips.
//!
//! Two independent evaluation paths are kept: atom-by-atom composition ([`MapExpr`]) and
//! the closed skew-product form ([`SkewMap`]). Each is the other's oracle.

mod point;
mod series;

pub use point::{Angle, StripPoint, TorusPoint};
pub use series::{
    coboundary_series, cos_two_pi_complex, invariant_curve, phase, phase_exact, sin_two_pi_complex,
    InvariantCurve, TrigSeries,
};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::schedule::{Schedule, MAX_EVALUABLE_FREQUENCY};

const TAU: f64 = std::f64::consts::TAU;

pub type Matrix2 = [[f64; 2]; 2];

pub fn det(m: &Matrix2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

const IDENTITY: Matrix2 = [[1.0, 0.0], [0.0, 1.0]];

/// `(x, y) ↦ (x + 1/(2q), y + c sin 2πqx)`: time-`1/(2q)` flow of an area-preserving field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shear {
    pub q: u64,
    pub c: f64,
}

impl Shear {
    pub fn new(q: u64, c: f64) -> Result<Self> {
        if q == 0 || q > MAX_EVALUABLE_FREQUENCY {
            return Err(Error::FrequencyOverflow(q.to_string()));
        }
        Ok(Shear { q, c })
    }

    pub fn from_stage(schedule: &Schedule, j: usize) -> Result<Self> {
        let st = schedule.stage(j)?;
        Shear::new(st.q_u64()?, st.c)
    }

    fn half_step(&self) -> Rational {
        Rational::new(1, 2 * self.q as i64)
    }

    fn shift(&self, z: &TorusPoint, sign: i64) -> (Dd, Option<Rational>) {
        let h = self.half_step();
        match &z.exact_x {
            Some(x) => {
                let nx = if sign > 0 { x + &h } else { x - &h }.frac();
                (Dd::from_rational(&nx), Some(nx))
            }
            None => {
                let d = Dd::from_rational(&h);
                ((if sign > 0 { z.x + d } else { z.x - d }).frac(), None)
            }
        }
    }

    fn sin_at(&self, x: Dd, exact: Option<&Rational>) -> f64 {
        let ph = match exact {
            Some(e) => phase_exact(self.q, e),
            None => phase(self.q, x),
        };
        Dd::sin_cos_two_pi_f64(ph).0
    }

    fn cos_at(&self, x: Dd) -> f64 {
        Dd::sin_cos_two_pi_f64(phase(self.q, x)).1
    }

    pub fn apply(&self, z: &TorusPoint) -> TorusPoint {
        let dy = self.c * self.sin_at(z.x, z.exact_x.as_ref());
        let (x, exact_x) = self.shift(z, 1);
        TorusPoint { x, y: (z.y + Dd::from_f64(dy)).frac(), exact_x }
    }

    pub fn apply_inverse(&self, z: &TorusPoint) -> TorusPoint {
        let (x, exact_x) = self.shift(z, -1);
        let dy = self.c * self.sin_at(x, exact_x.as_ref());
        TorusPoint { x, y: (z.y - Dd::from_f64(dy)).frac(), exact_x }
    }

    pub fn apply_strip(&self, z: &StripPoint) -> StripPoint {
        let dy = self.c * sin_two_pi_complex(self.q, z.x);
        StripPoint { x: z.x + 1.0 / (2.0 * self.q as f64), y: z.y + dy }
    }

    pub fn apply_inverse_strip(&self, z: &StripPoint) -> StripPoint {
        let x = z.x - 1.0 / (2.0 * self.q as f64);
        StripPoint { x, y: z.y - self.c * sin_two_pi_complex(self.q, x) }
    }

    pub fn jacobian(&self, z: &TorusPoint) -> Matrix2 {
        [[1.0, 0.0], [TAU * self.q as f64 * self.c * self.cos_at(z.x), 1.0]]
    }

    pub fn jacobian_inverse(&self, z: &TorusPoint) -> Matrix2 {
        let x = (z.x - Dd::from_rational(&self.half_step())).frac();
        [[1.0, 0.0], [-TAU * self.q as f64 * self.c * self.cos_at(x), 1.0]]
    }
}

/// One factor of a composition.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Rotate(Angle),
    Shear(Shear),
    ShearInverse(Shear),
}

impl Atom {
    fn inverse(&self) -> Atom {
        match self {
            Atom::Rotate(Angle::Exact(a)) => Atom::Rotate(Angle::Exact(-a.clone())),
            Atom::Rotate(Angle::Real(a)) => Atom::Rotate(Angle::Real(-a)),
            Atom::Shear(s) => Atom::ShearInverse(*s),
            Atom::ShearInverse(s) => Atom::Shear(*s),
        }
    }

    fn apply(&self, z: &TorusPoint) -> TorusPoint {
        match self {
            Atom::Rotate(a) => {
                let (x, exact_x) = a.shift(z, 1);
                TorusPoint { x, y: z.y, exact_x }
            }
            Atom::Shear(s) => s.apply(z),
            Atom::ShearInverse(s) => s.apply_inverse(z),
        }
    }

    fn apply_strip(&self, z: &StripPoint) -> StripPoint {
        match self {
            Atom::Rotate(a) => StripPoint { x: z.x + a.to_f64(), y: z.y },
            Atom::Shear(s) => s.apply_strip(z),
            Atom::ShearInverse(s) => s.apply_inverse_strip(z),
        }
    }

    fn jacobian(&self, z: &TorusPoint) -> Matrix2 {
        match self {
            Atom::Rotate(_) => IDENTITY,
            Atom::Shear(s) => s.jacobian(z),
            Atom::ShearInverse(s) => s.jacobian_inverse(z),
        }
    }
}

/// Composition of atoms, applied in list order (the first atom acts first).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MapExpr {
    pub atoms: Vec<Atom>,
}

impl MapExpr {
    pub fn identity() -> Self {
        MapExpr { atoms: Vec::new() }
    }

    pub fn rotation(alpha: impl Into<Angle>) -> Self {
        MapExpr { atoms: vec![Atom::Rotate(alpha.into())] }
    }

    /// `T_{m,n} = Φ_n ∘ ⋯ ∘ Φ_m`; identity when `m > n`.
    pub fn conjugacy(schedule: &Schedule, m: usize, n: usize) -> Result<Self> {
        let mut atoms = Vec::new();
        for j in m.max(1)..=n {
            atoms.push(Atom::Shear(Shear::from_stage(schedule, j)?));
        }
        Ok(MapExpr { atoms })
    }

    /// `T_{m,n}⁻¹ ∘ R_α ∘ T_{m,n}`.
    pub fn conjugated_rotation(alpha: impl Into<Angle>, schedule: &Schedule, m: usize, n: usize) -> Result<Self> {
        let t = MapExpr::conjugacy(schedule, m, n)?;
        Ok(t.clone().then(MapExpr::rotation(alpha)).then(t.inverse()))
    }

    /// `other ∘ self`.
    pub fn then(mut self, other: MapExpr) -> MapExpr {
        self.atoms.extend(other.atoms);
        self
    }

    pub fn inverse(&self) -> MapExpr {
        MapExpr { atoms: self.atoms.iter().rev().map(Atom::inverse).collect() }
    }

    pub fn apply(&self, z: &TorusPoint) -> TorusPoint {
        self.atoms.iter().fold(z.clone(), |p, a| a.apply(&p))
    }

    pub fn apply_strip(&self, z: &StripPoint) -> StripPoint {
        self.atoms.iter().fold(*z, |p, a| a.apply_strip(&p))
    }

    /// Chain rule over atoms.
    pub fn jacobian(&self, z: &TorusPoint) -> Matrix2 {
        let mut p = z.clone().without_exact();
        let mut j = IDENTITY;
        for a in &self.atoms {
            j = mat_mul(&a.jacobian(&p), &j);
            p = a.apply(&p);
        }
        j
    }

    pub fn shears(&self) -> impl Iterator<Item = (&Shear, bool)> {
        self.atoms.iter().filter_map(|a| match a {
            Atom::Shear(s) => Some((s, false)),
            Atom::ShearInverse(s) => Some((s, true)),
            Atom::Rotate(_) => None,
        })
    }
}

/// `(x, y) ↦ (x + α, y + g(x) − g(x + α))`, the closed form of `T⁻¹ ∘ R_α ∘ T`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMap {
    pub alpha: Angle,
    pub g: TrigSeries,
    alpha_dd: Dd,
}

impl SkewMap {
    pub fn new(alpha: impl Into<Angle>, g: TrigSeries) -> Self {
        let alpha = alpha.into();
        let alpha_dd = alpha.dd();
        SkewMap { alpha, g, alpha_dd }
    }

    /// The closed form of `G_{m,n}(α)`.
    pub fn stage(alpha: impl Into<Angle>, schedule: &Schedule, m: usize, n: usize) -> Result<Self> {
        check_divisibility(schedule, m, n)?;
        Ok(SkewMap::new(alpha, coboundary_series(m, n, schedule)?))
    }

    /// Rounded angle shared by every iterate.
    pub fn alpha_dd(&self) -> Dd {
        self.alpha_dd
    }

    pub fn apply(&self, z: &TorusPoint) -> TorusPoint {
        self.iterate(z, 1)
    }

    /// `G^i(z)` in closed form: `(x + iα, y + g(x) − g(x + iα))`.
    pub fn iterate(&self, z: &TorusPoint, i: u64) -> TorusPoint {
        let (x, exact_x) = match (&self.alpha, &z.exact_x) {
            (Angle::Exact(_), Some(_)) => self.alpha.shift(z, i),
            _ => ((z.x + self.alpha_dd.mul_f64(i as f64)).frac(), None),
        };
        let gx = self.g.eval_at(z);
        let gi = match &exact_x {
            Some(e) => self.g.eval_exact(e),
            None => self.g.eval(x),
        };
        TorusPoint { x, y: (z.y + gx - gi).frac(), exact_x }
    }

    pub fn apply_strip(&self, z: &StripPoint) -> StripPoint {
        let a = self.alpha_dd.to_f64();
        StripPoint { x: z.x + a, y: z.y + self.g.eval_complex(z.x) - self.g.eval_complex(z.x + a) }
    }

    pub fn jacobian(&self, z: &TorusPoint) -> Matrix2 {
        let xa = (z.x + self.alpha_dd).frac();
        [[1.0, 0.0], [self.g.derivative(z.x) - self.g.derivative(xa), 1.0]]
    }

    /// `u = y + g(x) mod 1`, constant along orbits.
    pub fn invariant(&self, z: &TorusPoint) -> Dd {
        (z.y + self.g.eval_at(z)).frac()
    }
}

/// Fails unless `q_j = 4 s_j q_{j-1}` for every `j` in `(m, n]`, the condition making the
/// closed forms valid.
pub fn check_divisibility(schedule: &Schedule, m: usize, n: usize) -> Result<()> {
    for j in (m.max(1) + 1)..=n {
        let prev = &schedule.stage(j - 1)?.q;
        let st = schedule.stage(j)?;
        let four_prev: BigInt = prev * 4;
        if !(&st.q % &four_prev).is_zero() || st.q != &st.s * &four_prev {
            return Err(Error::PrereqViolated(format!(
                "q_{j} = {} is not 4 s_{j} q_{} = {}",
                st.q,
                j - 1,
                &st.s * &four_prev
            )));
        }
    }
    Ok(())
}

/// `T_{m,n}⁻¹(z)` in closed form: `(x − S, y − g(x − S))` with `S = Σ 1/(2q_j)`.
pub fn conjugacy_inverse_apply(m: usize, n: usize, schedule: &Schedule, z: &TorusPoint) -> Result<TorusPoint> {
    check_divisibility(schedule, m, n)?;
    let g = coboundary_series(m, n, schedule)?;
    let mut shift = Rational::zero();
    for j in m..=n {
        shift = &shift + &Rational::new(1, schedule.stage(j)?.q.clone() * 2);
    }
    let (x, exact_x) = match &z.exact_x {
        Some(e) => {
            let nx = (e - &shift).frac();
            (Dd::from_rational(&nx), Some(nx))
        }
        None => ((z.x - Dd::from_rational(&shift)).frac(), None),
    };
    let gx = match &exact_x {
        Some(e) => g.eval_exact(e),
        None => g.eval(x),
    };
    Ok(TorusPoint { x, y: (z.y - gx).frac(), exact_x })
}

/// Ground truth: `T_{m,n}⁻¹ ∘ R_α ∘ T_{m,n}` applied atom by atom.
pub fn compose_oracle(
    alpha: impl Into<Angle>,
    m: usize,
    n: usize,
    schedule: &Schedule,
    z: &TorusPoint,
) -> Result<TorusPoint> {
    if m == 0 || m > n + 1 {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n + 1, got m = {m}, n = {n}")));
    }
    Ok(MapExpr::conjugated_rotation(alpha, schedule, m, n)?.apply(z))
}

/// `S_m⁻¹ ∘ map ∘ S_m` with `S_m⁻¹ = T_{1,m-1}`.
pub fn conjugate_transport(m: usize, map: &MapExpr, schedule: &Schedule, z: &TorusPoint) -> Result<TorusPoint> {
    let s_inv = MapExpr::conjugacy(schedule, 1, m.saturating_sub(1))?;
    Ok(s_inv.inverse().then(map.clone()).then(s_inv).apply(z))
}

/// `y`-amplitude sup of a stage's shear for sizing; `None` beyond the evaluable range.
pub fn stage_frequency(schedule: &Schedule, j: usize) -> Option<u64> {
    schedule.stage(j).ok()?.q.to_u64().filter(|&q| q <= MAX_EVALUABLE_FREQUENCY)
}

/// Complex-strip version of the `y`-difference `g(x) − g(x + α)` for a strip point.
pub fn skew_increment_complex(g: &TrigSeries, x: Complex64, alpha: f64) -> Complex64 {
    g.eval_complex(x) - g.eval_complex(x + alpha)
}
