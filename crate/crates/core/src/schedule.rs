//! Parameter schedules: denominators, numerators, amplitudes and nested intervals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Rigor};
use crate::error::{Error, Result};
use crate::rational::{Interval, Rational};

/// Largest frequency for which `frequency * x` is exact in double-double arithmetic.
pub const MAX_EVALUABLE_FREQUENCY: u64 = 1 << 53;

pub(crate) mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(n)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => BigInt::from_str(s.trim()).map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(BigInt::from(i)),
        }
    }
}

/// Which family of certificates a schedule is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Dense invariant curves; the limit is not conjugate to a rotation.
    #[serde(rename = "theorem1")]
    NonLinearizable,
    /// Harmonic amplitudes; invariant strips, minimal but not ergodic.
    #[serde(rename = "theorem2")]
    MinimalNonErgodic,
    /// Fast-growing amplitudes; Birkhoff averages converge to the Lebesgue mean.
    #[serde(rename = "theorem3")]
    UniquelyErgodic,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(Variant::NonLinearizable),
            "theorem2" => Ok(Variant::MinimalNonErgodic),
            "theorem3" => Ok(Variant::UniquelyErgodic),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
        }
    }
}

/// How the shear amplitudes `c_n` evolve with the stage index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeProfile {
    Constant { c: f64 },
    /// `c_n = 1/n`.
    Harmonic,
    /// `c_n = first * ratio^(n-1)`.
    Geometric { first: f64, ratio: f64 },
    /// Amplitudes chosen per stage by the oscillatory-integral certificate search;
    /// `start` seeds the search.
    CertificateDriven { start: f64 },
}

impl AmplitudeProfile {
    pub fn amplitude(&self, n: usize) -> f64 {
        match *self {
            AmplitudeProfile::Constant { c } => c,
            AmplitudeProfile::Harmonic => 1.0 / n as f64,
            AmplitudeProfile::Geometric { first, ratio } => first * ratio.powi(n as i32 - 1),
            AmplitudeProfile::CertificateDriven { start } => start,
        }
    }

    /// Whether `Σ c_n` diverges.
    pub fn diverges(&self) -> bool {
        match *self {
            AmplitudeProfile::Constant { c } => c > 0.0,
            AmplitudeProfile::Harmonic => true,
            AmplitudeProfile::Geometric { first, ratio } => first > 0.0 && ratio >= 1.0,
            AmplitudeProfile::CertificateDriven { start } => start > 0.0,
        }
    }

    /// Parses `constant:C`, `harmonic`, `geometric:FIRST:RATIO` or `driven:START`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad amplitude profile {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["constant", c] => Ok(AmplitudeProfile::Constant { c: num(c)? }),
            ["harmonic"] => Ok(AmplitudeProfile::Harmonic),
            ["geometric", a, r] => Ok(AmplitudeProfile::Geometric { first: num(a)?, ratio: num(r)? }),
            ["driven", c] => Ok(AmplitudeProfile::CertificateDriven { start: num(c)? }),
            _ => Err(bad()),
        }
    }
}

/// Constants selecting the subdivision count `s` of the piecewise-linear approximation
/// of an invariant curve: `s > floor`, `sqrt_factor * sqrt(c/eps) < s` and
/// `s ln s < c eps / log_factor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionConstants {
    pub sqrt_factor: f64,
    pub log_factor: f64,
    pub floor: f64,
}

impl SubdivisionConstants {
    /// `16`, `16`, `e^2`.
    pub fn literal() -> Self {
        SubdivisionConstants { sqrt_factor: 16.0, log_factor: 16.0, floor: std::f64::consts::E.powi(2) }
    }

    /// Smallest constants for which the approximation and ladder bounds still follow:
    /// `sqrt_factor` just above `sqrt(4π³)`.
    pub fn profile() -> Self {
        SubdivisionConstants { sqrt_factor: 11.2, log_factor: 16.0, floor: std::f64::consts::E.powi(2) }
    }
}

impl Default for SubdivisionConstants {
    fn default() -> Self {
        SubdivisionConstants::literal()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthPolicy {
    /// Base `b` of the growth bound `q_n > b^(n+2) Σ c_i q_i`.
    pub base: u32,
    pub amplitudes: AmplitudeProfile,
    /// Allow denominators beyond the evaluable range; only exact certificates are produced.
    pub literal_mode: bool,
    /// `eps_n = eps_decay^-(n+1)`.
    pub eps_decay: f64,
    /// Fixed strip half-width; `None` means `r_n = 10^n`.
    pub strip_r: Option<f64>,
    pub subdivision: SubdivisionConstants,
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        GrowthPolicy {
            base: 10,
            amplitudes: AmplitudeProfile::Constant { c: 1.0 },
            literal_mode: false,
            eps_decay: 10.0,
            strip_r: None,
            subdivision: SubdivisionConstants::literal(),
        }
    }
}

impl GrowthPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.base < 2 {
            return Err(Error::InvalidArgument("growth base must be at least 2".into()));
        }
        if let AmplitudeProfile::Constant { c } = self.amplitudes {
            if c <= 0.0 {
                return Err(Error::InvalidArgument("constant amplitude must be positive".into()));
            }
        }
        if self.eps_decay <= 1.0 {
            return Err(Error::InvalidArgument("eps_decay must exceed 1".into()));
        }
        Ok(())
    }

    pub fn eps(&self, n: usize) -> f64 {
        self.eps_decay.powi(-(n as i32 + 1))
    }

    pub fn strip(&self, n: usize) -> f64 {
        self.strip_r.unwrap_or_else(|| 10f64.powi(n as i32))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    pub n: usize,
    #[serde(with = "bigint_str")]
    pub p: BigInt,
    #[serde(with = "bigint_str")]
    pub q: BigInt,
    #[serde(with = "bigint_str")]
    pub s: BigInt,
    pub c: f64,
    pub eps: f64,
    pub r: f64,
    pub interval: Interval,
}

impl StageParams {
    pub fn center(&self) -> Rational {
        Rational::new(self.p.clone(), self.q.clone())
    }

    /// Denominator as an exactly representable float, if it fits.
    pub fn q_u64(&self) -> Result<u64> {
        match self.q.to_u64() {
            Some(q) if q <= MAX_EVALUABLE_FREQUENCY && q > 0 => Ok(q),
            _ => Err(Error::FrequencyOverflow(self.q.to_string())),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub stages: Vec<StageParams>,
}

impl Schedule {
    pub fn new(stages: Vec<StageParams>) -> Self {
        Schedule { stages }
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Stage `n` (1-based).
    pub fn stage(&self, n: usize) -> Result<&StageParams> {
        if n == 0 || n > self.stages.len() {
            return Err(Error::InvalidArgument(format!("stage {n} not in schedule of {}", self.len())));
        }
        Ok(&self.stages[n - 1])
    }

    pub fn last_interval(&self) -> Interval {
        self.stages.last().map(|s| s.interval.clone()).unwrap_or_else(Interval::unit)
    }

    fn last_q(&self) -> BigInt {
        self.stages.last().map(|s| s.q.clone()).unwrap_or_else(BigInt::one)
    }

    /// Prefix of the first `n` stages.
    pub fn truncated(&self, n: usize) -> Schedule {
        Schedule { stages: self.stages[..n.min(self.len())].to_vec() }
    }
}

/// Center of the last interval: the finite-stage stand-in for the limit rotation number.
pub fn alpha_of(schedule: &Schedule) -> Result<Rational> {
    schedule.stages.last().map(|s| s.interval.center.clone()).ok_or(Error::EmptySchedule)
}

fn weighted_sum(stages: &[StageParams]) -> Rational {
    stages.iter().fold(Rational::zero(), |acc, st| {
        let c = Rational::from_f64(st.c).unwrap_or_else(Rational::zero);
        &acc + &(&c * &Rational::from_integer(st.q.clone()))
    })
}

fn growth_bound(base: u32, n: usize, earlier: &[StageParams]) -> Rational {
    let factor = Rational::from_integer(BigInt::from(base).pow(n as u32 + 2));
    &factor * &weighted_sum(earlier)
}

/// Smallest `s >= 1` with `4 s q_prev > bound`.
fn minimal_s(bound: &Rational, q_prev: &BigInt) -> BigInt {
    let four_q = Rational::from_integer(q_prev * 4);
    let s = (bound / &four_q).floor() + BigInt::one();
    if s < BigInt::one() {
        BigInt::one()
    } else {
        s
    }
}

/// Reduced `p/q` strictly inside `target`, nearest its center, ties to the smaller `p`.
pub fn select_numerator(q: &BigInt, target: &Interval) -> Option<BigInt> {
    let qr = Rational::from_integer(q.clone());
    let x = &qr * &target.center;
    let reach = &qr * &target.half_width;
    let mut lo = x.floor();
    let mut hi = &lo + BigInt::one();
    let dist = |p: &BigInt| (&Rational::from_integer(p.clone()) - &x).abs();
    loop {
        let dl = dist(&lo);
        let dh = dist(&hi);
        let lo_ok = dl < reach;
        let hi_ok = dh < reach;
        if !lo_ok && !hi_ok {
            return None;
        }
        let take_lo = lo_ok && (!hi_ok || dl <= dh);
        let p = if take_lo { lo.clone() } else { hi.clone() };
        if p.gcd(q).is_one() {
            return Some(p);
        }
        if take_lo {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
}

fn stage_with_s(
    n: usize,
    q_prev: &BigInt,
    s: BigInt,
    c: f64,
    target: &Interval,
    policy: &GrowthPolicy,
) -> Result<StageParams> {
    let q: BigInt = &s * q_prev * 4;
    if !policy.literal_mode && q > BigInt::from(MAX_EVALUABLE_FREQUENCY) {
        return Err(Error::FrequencyOverflow(q.to_string()));
    }
    let p = select_numerator(&q, target).ok_or_else(|| Error::NoAdmissibleNumerator { q: q.to_string() })?;
    let center = Rational::new(p.clone(), q.clone());
    let gap = Rational::min(&(&center - &target.lo()), &(&target.hi() - &center));
    let cap = Rational::new(1, &q * &q * 4);
    let half_width = Rational::min(&cap, &(&gap / &Rational::from_integer(2)));
    Ok(StageParams {
        n,
        p,
        q,
        s,
        c,
        eps: policy.eps(n),
        r: policy.strip(n),
        interval: Interval::new(center, half_width),
    })
}

/// Next stage with the smallest admissible `s`; the interval is provisional.
pub fn build_stage(prev: &Schedule, policy: &GrowthPolicy, c: f64) -> Result<StageParams> {
    policy.validate()?;
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument("amplitude must be nonnegative".into()));
    }
    let n = prev.len() + 1;
    let q_prev = prev.last_q();
    let bound = growth_bound(policy.base, n, &prev.stages);
    let s = minimal_s(&bound, &q_prev);
    stage_with_s(n, &q_prev, s, c, &prev.last_interval(), policy)
}

/// Like [`build_stage`], but enlarges `s` (and so `q`) until a reduced numerator fits
/// strictly inside `target` (defaults to the last interval), with `s >= s_min`.
pub fn grow_stage(
    prev: &Schedule,
    policy: &GrowthPolicy,
    c: f64,
    target: Option<&Interval>,
    s_min: Option<BigInt>,
) -> Result<StageParams> {
    policy.validate()?;
    let n = prev.len() + 1;
    let q_prev = prev.last_q();
    let last = prev.last_interval();
    let target = target.unwrap_or(&last);
    let bound = growth_bound(policy.base, n, &prev.stages);
    let mut s = minimal_s(&bound, &q_prev);
    if let Some(m) = s_min {
        if m > s {
            s = m;
        }
    }
    // Below this s the spacing 1/q exceeds the interval length and no numerator can fit.
    let spacing_s = (Rational::one() / (&target.length() * &Rational::from_integer(&q_prev * 4))).floor();
    let mut tries = 0u32;
    loop {
        match stage_with_s(n, &q_prev, s.clone(), c, target, policy) {
            Err(Error::NoAdmissibleNumerator { .. }) => {
                tries += 1;
                if tries > 4096 {
                    return Err(Error::BudgetExceeded(format!("no numerator found for stage {n}")));
                }
                // Steps of about 1.5% keep q near-minimal without scanning every s.
                let step = std::cmp::max(BigInt::one(), &s / BigInt::from(64));
                s = if spacing_s > s { spacing_s.clone() } else { s + step };
            }
            other => return other,
        }
    }
}

/// Builds `stages` stages with provisional intervals under `policy`.
pub fn build_schedule(stages: usize, policy: &GrowthPolicy) -> Result<Schedule> {
    let mut sched = Schedule::default();
    for n in 1..=stages {
        let st = grow_stage(&sched, policy, policy.amplitudes.amplitude(n), None, None)?;
        sched.stages.push(st);
    }
    Ok(sched)
}

/// Outcome of the search for the subdivision count `s` given `c` and `eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionChoice {
    /// Smallest integer above both lower bounds.
    pub s: u64,
    pub lower_bound: f64,
    /// `s ln s`.
    pub growth: f64,
    /// `c eps / log_factor`.
    pub budget: f64,
    pub feasible: bool,
}

/// Since `s ln s` increases, the smallest admissible `s` decides feasibility.
pub fn choose_subdivision(c: f64, eps: f64, k: &SubdivisionConstants) -> SubdivisionChoice {
    let lower_bound = k.floor.max(k.sqrt_factor * (c / eps).sqrt());
    let s = (lower_bound.floor() + 1.0).min(u64::MAX as f64 / 2.0);
    let growth = s * s.ln();
    let budget = c * eps / k.log_factor;
    SubdivisionChoice { s: s as u64, lower_bound, growth, budget, feasible: growth < budget }
}

/// First `s <= s_max` meeting both subdivision inequalities, found by trying every integer.
/// An independent check of [`choose_subdivision`].
pub fn scan_subdivision(c: f64, eps: f64, k: &SubdivisionConstants, s_max: u64) -> Option<u64> {
    let lower = k.floor.max(k.sqrt_factor * (c / eps).sqrt());
    let budget = c * eps / k.log_factor;
    (1..=s_max).find(|&s| {
        let sf = s as f64;
        sf > lower && sf * sf.ln() < budget
    })
}

/// Upper bound `2π Σ_{j<n} c_j q_j` on the slope of the previous invariant curve.
pub fn slope_bound(prev: &[StageParams]) -> f64 {
    2.0 * std::f64::consts::PI * weighted_sum(prev).to_f64()
}

/// One certificate per applicable inequality per stage. Failures are reported, not raised.
pub fn validate_schedule(s: &Schedule, variant: Variant, policy: &GrowthPolicy) -> Vec<Certificate> {
    let mut out = Vec::new();
    let mut prev_interval = Interval::unit();
    let mut q_prev = BigInt::one();
    for (idx, st) in s.stages.iter().enumerate() {
        let n = idx + 1;
        let earlier = &s.stages[..idx];
        out.push(Certificate::exact_less(
            "denominator-growth",
            format!("{}^(n+2) * sum_(i<n) c_i q_i < q_n", policy.base),
            Some(n),
            growth_bound(policy.base, n, earlier),
            Rational::from_integer(st.q.clone()),
        ));
        out.push(Certificate::exact_equal(
            "denominator-divisibility",
            "q_n = 4 s_n q_(n-1)",
            Some(n),
            Rational::from_integer(st.q.clone()),
            Rational::from_integer(&st.s * &q_prev * 4),
        ));
        let g = if st.q.is_positive() { st.p.gcd(&st.q) } else { BigInt::zero() };
        out.push(Certificate::exact_equal(
            "center-reduced",
            "gcd(p_n, q_n) = 1 and center = p_n/q_n",
            Some(n),
            Rational::from_integer(g),
            Rational::one(),
        ));
        if st.q.is_positive() && st.interval.center != st.center() {
            let last = out.last_mut().unwrap();
            last.pass = false;
            last.margin = -1.0;
            last.note = Some("interval center differs from p_n/q_n".into());
        }
        out.push(Certificate::exact_less(
            "interval-nesting",
            "I_n lies strictly inside I_(n-1)",
            Some(n),
            Rational::zero(),
            prev_interval.inner_gap(&st.interval),
        ));
        let q2 = Rational::from_integer(&st.q * &st.q);
        out.push(Certificate::exact_less(
            "interval-width",
            "|I_n| < 1/q_n^2",
            Some(n),
            st.interval.length(),
            if q2.is_zero() { Rational::zero() } else { q2.recip() },
        ));
        if variant == Variant::UniquelyErgodic {
            out.extend(subdivision_certificates(st, earlier, &policy.subdivision));
        }
        prev_interval = st.interval.clone();
        q_prev = st.q.clone();
    }
    out
}

/// Subdivision-window and denominator-versus-slope certificates for one stage.
pub fn subdivision_certificates(
    st: &StageParams,
    earlier: &[StageParams],
    k: &SubdivisionConstants,
) -> Vec<Certificate> {
    let n = st.n;
    let choice = choose_subdivision(st.c, st.eps, k);
    let window = Certificate::real_less(
        "subdivision-window",
        format!(
            "exists s > {:.4}: {} sqrt(c/eps) < s and s ln s < c eps / {}",
            k.floor, k.sqrt_factor, k.log_factor
        ),
        Some(n),
        choice.growth,
        choice.budget,
        Rigor::Analytic,
    )
    .with_note(format!("smallest admissible s = {}", choice.s));
    let beta = slope_bound(earlier);
    let rhs = Rational::from_f64(beta).unwrap_or_else(Rational::zero) * Rational::from_integer(choice.s as i64);
    let slope = Certificate::exact_less(
        "denominator-vs-slope",
        "beta_n s_n < q_n, beta_n = 2 pi sum_(j<n) c_j q_j",
        Some(n),
        rhs,
        Rational::from_integer(st.q.clone()),
    );
    vec![window, slope]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy(base: u32) -> GrowthPolicy {
        GrowthPolicy { base, ..GrowthPolicy::default() }
    }

    #[test]
    fn first_stage_is_quarter() {
        let st = build_stage(&Schedule::default(), &policy(10), 1.0).unwrap();
        assert_eq!(st.q, BigInt::from(4));
        assert_eq!(st.s, BigInt::from(1));
        assert_eq!(st.p, BigInt::from(1));
        assert_eq!(st.interval.center, Rational::new(1, 4));
        assert!(st.interval.half_width < Rational::new(1, 16));
    }

    #[test]
    fn second_stage_literal_base() {
        let mut s = Schedule::default();
        s.stages.push(build_stage(&s, &policy(10), 1.0).unwrap());
        let st = build_stage(&s, &policy(10), 1.0).unwrap();
        assert_eq!(st.q, BigInt::from(40016));
        assert_eq!(st.s, BigInt::from(2501));
        assert_eq!(st.p, BigInt::from(10003));
        s.stages.push(st);
        assert_eq!(alpha_of(&s).unwrap(), Rational::new(10003, 40016));
    }

    #[test]
    fn second_stage_base_two() {
        let mut s = Schedule::default();
        s.stages.push(build_stage(&s, &policy(2), 1.0).unwrap());
        let st = build_stage(&s, &policy(2), 1.0).unwrap();
        assert_eq!(st.q, BigInt::from(80));
        assert_eq!(st.s, BigInt::from(5));
    }

    #[test]
    fn empty_schedule_has_no_alpha() {
        assert_eq!(alpha_of(&Schedule::default()), Err(Error::EmptySchedule));
    }

    #[test]
    fn narrow_previous_interval_rejects_numerator() {
        let mut s = Schedule::default();
        let mut st = build_stage(&s, &policy(2), 1.0).unwrap();
        st.interval.half_width = Rational::new(1, 100_000);
        s.stages.push(st);
        assert!(matches!(build_stage(&s, &policy(2), 1.0), Err(Error::NoAdmissibleNumerator { .. })));
        let grown = grow_stage(&s, &policy(2), 1.0, None, None).unwrap();
        assert!(s.stages[0].interval.contains_strictly(&grown.center()));
        assert_eq!(&grown.q % BigInt::from(16), BigInt::zero());
    }

    #[test]
    fn single_stage_validates() {
        let s = build_schedule(1, &policy(10)).unwrap();
        let certs = validate_schedule(&s, Variant::NonLinearizable, &policy(10));
        assert!(certs.iter().all(|c| c.pass), "{certs:#?}");
    }

    #[test]
    fn small_second_denominator_fails_growth() {
        let mut s = build_schedule(1, &policy(10)).unwrap();
        let mut st = s.stages[0].clone();
        st.n = 2;
        st.q = BigInt::from(16);
        st.s = BigInt::from(1);
        st.p = BigInt::from(5);
        st.interval = Interval::new(Rational::new(5, 16), Rational::new(1, 1024));
        s.stages.push(st);
        let certs = validate_schedule(&s, Variant::NonLinearizable, &policy(10));
        let growth: Vec<_> = certs.iter().filter(|c| c.condition == "denominator-growth").collect();
        assert!(growth[0].pass);
        assert!(!growth[1].pass);
        assert_eq!(growth[1].rhs, crate::certificate::Quantity::Exact(Rational::from_integer(16)));
    }

    #[test]
    fn subdivision_window_infeasible_for_unit_amplitude() {
        let choice = choose_subdivision(1.0, 0.1, &SubdivisionConstants::literal());
        assert!(!choice.feasible);
        assert_eq!(scan_subdivision(1.0, 0.1, &SubdivisionConstants::literal(), 100_000), None);
        let wide = choose_subdivision(1e12, 0.1, &SubdivisionConstants::profile());
        assert!(wide.feasible);
        assert_eq!(scan_subdivision(1e12, 0.1, &SubdivisionConstants::profile(), 1 << 26), Some(wide.s));
        // Exhaustive scan: no s in range satisfies both inequalities.
        for s in 1..100_000u64 {
            let sf = s as f64;
            let ok = sf > std::f64::consts::E.powi(2) && 16.0 * (1.0f64 / 0.1).sqrt() < sf && sf * sf.ln() < 0.1 / 16.0;
            assert!(!ok);
        }
        let mut s = build_schedule(1, &policy(10)).unwrap();
        s.stages[0].eps = 0.1;
        let certs = validate_schedule(&s, Variant::UniquelyErgodic, &policy(10));
        let w = certs.iter().find(|c| c.condition == "subdivision-window").unwrap();
        assert!(!w.pass);
    }

    #[test]
    fn profile_parsing() {
        assert_eq!(AmplitudeProfile::parse("constant:1").unwrap(), AmplitudeProfile::Constant { c: 1.0 });
        assert_eq!(AmplitudeProfile::parse("harmonic").unwrap(), AmplitudeProfile::Harmonic);
        assert!(!AmplitudeProfile::parse("geometric:0.5:0.5").unwrap().diverges());
        assert!(AmplitudeProfile::parse("bogus").is_err());
    }

    #[test]
    fn schedule_serde_roundtrip() {
        let s = build_schedule(2, &policy(2)).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"q\":\"80\""));
        let back: Schedule = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
