//! Strip sup-norms, derivative bounds and the selection of parameter intervals on which
//! consecutive stages stay close.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Rigor};
use crate::error::{Error, Result};
use crate::par;
use crate::rational::{Interval, Rational};
use crate::schedule::Schedule;
use crate::torusmaps::{
    check_divisibility, coboundary_series, Angle, Atom, MapExpr, Shear, SkewMap, StripPoint, TorusPoint, TrigSeries,
};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

/// Half-widths below `exp(-LN_WIDTH_FLOOR)` are not materialized as rationals.
pub const LN_WIDTH_FLOOR: f64 = 20_000.0;

pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln sinh(x)` for `x > 0`.
pub fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    }
}

/// `ln(1 + e^x)`.
fn ln1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn exp_or_inf(ln: f64) -> f64 {
    if ln > 709.0 {
        f64::INFINITY
    } else {
        ln.exp()
    }
}

/// Sup-norm of a function on a strip: an analytic bound, kept in log-domain, and a sampled
/// value when the bound is representable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub ln_analytic: Option<f64>,
    pub sampled: Option<f64>,
    pub grid: usize,
    pub r: f64,
}

impl NormEstimate {
    pub fn analytic(&self) -> Option<f64> {
        self.ln_analytic.map(exp_or_inf)
    }

    /// `sampled <= analytic * (1 + tol)` whenever both are known.
    pub fn consistent(&self, tol: f64) -> bool {
        match (self.sampled, self.analytic()) {
            (Some(s), Some(a)) => s <= a * (1.0 + tol) + f64::MIN_POSITIVE,
            _ => true,
        }
    }
}

/// `Σ |c_j| cosh(2π q_j r)` (exact for one term), and the max of `|g|` on `Im x = ±r`.
pub fn strip_norm(g: &TrigSeries, r: f64, grid: usize) -> NormEstimate {
    let ln_bound = g
        .terms()
        .iter()
        .filter(|t| t.0 != 0.0)
        .fold(f64::NEG_INFINITY, |acc, &(c, q)| log_add(acc, c.abs().ln() + ln_cosh(TAU * q as f64 * r)));
    let grid = grid.max(1);
    let sampled = (ln_bound < 600.0).then(|| {
        par::map_range(grid, |j| {
            let x = j as f64 / grid as f64;
            let up = g.eval_complex(Complex64::new(x, r)).norm();
            let down = g.eval_complex(Complex64::new(x, -r)).norm();
            up.max(down)
        })
        .into_iter()
        .fold(0.0, f64::max)
    });
    NormEstimate { ln_analytic: Some(ln_bound), sampled, grid, r }
}

/// `ln(1 + 2π q c cosh(2π q r))`: max-row-sum bound of a shear's derivative on the strip.
pub fn ln_shear_derivative_bound(q: u64, c: f64, r: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    ln1p_exp((TAU * q as f64 * c.abs()).ln() + ln_cosh(TAU * q as f64 * r))
}

/// Log of the product of per-atom derivative bounds. Every atom preserves `Im x`, so each
/// factor is evaluated at the same `r`.
pub fn derivative_norm_bound(expr: &MapExpr, r: f64) -> f64 {
    expr.shears().map(|(s, _)| ln_shear_derivative_bound(s.q, s.c, r)).sum()
}

/// `r + Σ |c_j| sinh(2π q_j r)`: the largest `|Im|` of the image of the strip under the
/// conjugacy built on `g`.
pub fn imag_reach(g: &TrigSeries, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    r + g.terms().iter().map(|&(c, q)| c.abs() * exp_or_inf(ln_sinh(TAU * q as f64 * r))).sum::<f64>()
}

/// Exact strip norm of `Φ⁻¹ ∘ R_α ∘ Φ − R_α`, which is also that of `G_{m,n} − G_{m,n-1}`:
/// `2c cosh(2πqr) |sin(π d)|` with `d = qα − p`. Log-domain.
pub fn ln_commutator_norm(q: u64, c: f64, r: f64, offset: f64) -> f64 {
    (2.0 * c.abs()).ln() + ln_cosh(TAU * q as f64 * r) + (PI * offset).sin().abs().ln()
}

/// `c e^{2πqr} 4π |d|`, the linear bound behind the interval formula. Log-domain.
pub fn ln_commutator_chain(q: u64, c: f64, r: f64, offset: f64) -> f64 {
    c.abs().ln() + TAU * q as f64 * r + (4.0 * PI * offset.abs()).ln()
}

/// Half-width `h = ε / (8π M C q c)` with `C = e^{2πqr}`: half of the largest admissible
/// radius. Log-domain.
pub fn commutator_interval(q: u64, c: f64, r: f64, eps: f64, ln_m: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::DegenerateAmplitude);
    }
    if !(eps > 0.0) || q == 0 {
        return Err(Error::InvalidArgument("need eps > 0 and q >= 1".into()));
    }
    Ok(eps.ln() - (8.0 * PI).ln() - ln_m - TAU * q as f64 * r - (q as f64).ln() - c.abs().ln())
}

/// Sampled `|Φ⁻¹ ∘ R_α ∘ Φ − R_α|_r` on a lattice of the real torus and both strip faces.
pub fn sampled_commutator_norm(q: u64, c: f64, r: f64, alpha: &Rational, grid: usize) -> Result<f64> {
    let phi = MapExpr { atoms: vec![Atom::Shear(Shear::new(q, c)?)] };
    let conj = phi.clone().then(MapExpr::rotation(alpha.clone())).then(phi.inverse());
    let rot = MapExpr::rotation(alpha.clone());
    Ok(map_distance(|z| conj.apply_strip(z), |z| rot.apply_strip(z), r, grid).sampled.unwrap_or(f64::NAN))
}

/// How the conjugation-closeness interval is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalRule {
    /// Derivative-bound chain through the previous conjugacy.
    #[default]
    Rigorous,
    /// Inversion of the exact closed-form norm of the stage difference.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugationBound {
    pub m: usize,
    pub n: usize,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    /// `ln |DT⁻¹|` on the enlarged strip.
    pub ln_m_conjugacy: f64,
    /// `ln |DΦ_n⁻¹|` entering the shear-interval formula.
    pub ln_m_shear: f64,
    pub ln_half_width: f64,
}

impl ConjugationBound {
    /// Log of the chain `|DT⁻¹| |DΦ_n⁻¹| c C 4π q h` at the returned radius.
    pub fn ln_chain(&self, q: u64, c: f64) -> f64 {
        self.ln_m_conjugacy + self.ln_m_shear + c.abs().ln() + TAU * q as f64 * self.r1 + (4.0 * PI * q as f64).ln()
            + self.ln_half_width
    }
}

/// Radius guaranteeing `|G_{m,n}(α) − G_{m,n-1}(α)|_r < ε` through the derivative chain
/// with `T = T_{m,n-1}`. Imaginary reaches count only imaginary displacements.
pub fn conjugation_bound(schedule: &Schedule, m: usize, n: usize, r: f64, eps: f64) -> Result<ConjugationBound> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    check_divisibility(schedule, m, n)?;
    let st = schedule.stage(n)?;
    let q = st.q_u64()?;
    let c = st.c;
    let prior = coboundary_series(m, n - 1, schedule)?;
    let r1 = imag_reach(&prior, r);
    let reach = |k: f64| if r1 == 0.0 { 0.0 } else { r1 + k * c.abs() * exp_or_inf(ln_sinh(TAU * q as f64 * r1)) };
    let r2 = reach(2.0);
    let t_inv = MapExpr::conjugacy(schedule, m, n - 1)?.inverse();
    let ln_m_conjugacy = derivative_norm_bound(&t_inv, r2);
    let ln_m_shear = ln_shear_derivative_bound(q, c, reach(3.0));
    let ln_half_width = commutator_interval(q, c, r1, eps, ln_m_shear)? - ln_m_conjugacy;
    Ok(ConjugationBound { m, n, r, r1, r2, ln_m_conjugacy, ln_m_shear, ln_half_width })
}

/// Radius from inverting `2c cosh(2πqr) sin(π q h) < ε`, halved. Log-domain.
pub fn direct_half_width(q: u64, c: f64, r: f64, eps: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::DegenerateAmplitude);
    }
    let ratio_ln = eps.ln() - (2.0 * c.abs()).ln() - ln_cosh(TAU * q as f64 * r);
    let angle = if ratio_ln >= 0.0 { PI / 2.0 } else { ratio_ln.exp().asin() };
    if angle == 0.0 {
        // Below f64 range: asin(t) ≈ t.
        return Ok(ratio_ln - PI.ln() - (q as f64).ln() - std::f64::consts::LN_2);
    }
    Ok((angle / (PI * q as f64)).ln() - std::f64::consts::LN_2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RefineMode {
    /// Closeness of consecutive stages conjugated by `T_{m,n-1}`.
    Conjugation { m: usize, r: f64, eps: f64 },
    /// Closeness of the first `tau` iterates of `G_{n-1}` and `G_n`.
    Iterates { r: f64, eps: f64, tau: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub rule: IntervalRule,
    /// Subdivisions of the α-grid; endpoints are always included.
    pub alpha_grid: u32,
    pub x_grid: usize,
    pub max_depth: u32,
    /// Every iterate up to this count is checked; beyond it a log-spaced subset.
    pub dense_iterates: u64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { rule: IntervalRule::Rigorous, alpha_grid: 16, x_grid: 32, max_depth: 200, dense_iterates: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub interval: Interval,
    pub ln_half_width: f64,
    pub certificate: Certificate,
}

fn materialize(center: &Rational, ln_h: f64) -> Result<Interval> {
    if !(ln_h > -LN_WIDTH_FLOOR) {
        return Err(Error::BudgetExceeded(format!("interval half-width exp({ln_h:.4e}) is not representable")));
    }
    let h = Rational::dyadic_below_exp(ln_h).expect("finite");
    Ok(Interval::new(center.clone(), h))
}

/// Iterate counts checked up to `tau`: every count up to `dense`, then log-spaced, then `tau`.
pub fn iterate_samples(tau: u64, dense: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=tau.min(dense)).collect();
    if tau > dense {
        let steps = 256;
        let (lo, hi) = ((dense.max(1) as f64).ln(), (tau as f64).ln());
        for k in 1..=steps {
            let i = (lo + (hi - lo) * k as f64 / steps as f64).exp().round() as u64;
            if i > *out.last().unwrap_or(&0) && i <= tau {
                out.push(i);
            }
        }
        if out.last() != Some(&tau) {
            out.push(tau);
        }
    }
    out
}

/// Low-discrepancy abscissae `frac(1/2 + j/φ)`; unlike a uniform grid they never
/// resonate with the construction's frequencies.
pub fn kronecker(j: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    (0.5 + j as f64 * INV_PHI).fract()
}

/// Second low-discrepancy coordinate `frac(1/4 + j/√2)`.
pub fn kronecker2(j: usize) -> f64 {
    const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;
    (0.25 + j as f64 * INV_SQRT2).fract()
}

/// Sampled `max_{i in samples} |G_{n-1}^i − G_n^i|_r` over the α-grid of `interval` and
/// `x_grid` abscissae, using closed-form iterates. Each α stops early once `stop_at` is
/// reached.
pub fn iterate_closeness(
    schedule: &Schedule,
    n: usize,
    interval: &Interval,
    r: f64,
    samples: &[u64],
    opts: &RefineOptions,
    stop_at: f64,
) -> Result<f64> {
    check_divisibility(schedule, 1, n)?;
    let prev = coboundary_series(1, n - 1, schedule)?;
    let cur = coboundary_series(1, n, schedule)?;
    let x_grid = opts.x_grid.max(1);
    let per_alpha = par::map(interval.grid(opts.alpha_grid), |a| {
        let ga = SkewMap::new(Angle::Exact(a.clone()), prev.clone());
        let gb = SkewMap::new(Angle::Exact(a), cur.clone());
        let mut worst = 0.0f64;
        for j in 0..x_grid {
            let x = kronecker(j);
            if r == 0.0 {
                let z = TorusPoint::new(x, 0.0);
                for &i in samples {
                    worst = worst.max(ga.iterate(&z, i).distance(&gb.iterate(&z, i)));
                    if worst >= stop_at {
                        return worst;
                    }
                }
            } else {
                for sign in [-1.0, 1.0] {
                    let xc = Complex64::new(x, sign * r);
                    for &i in samples {
                        let shift = ga.alpha.times(i).dd().frac().to_f64();
                        let da = ga.g.eval_complex(xc) - ga.g.eval_complex(xc + shift);
                        let db = gb.g.eval_complex(xc) - gb.g.eval_complex(xc + shift);
                        worst = worst.max((da - db).norm());
                        if worst >= stop_at {
                            return worst;
                        }
                    }
                }
            }
        }
        worst
    });
    Ok(per_alpha.into_iter().fold(0.0, f64::max))
}

/// Halves `interval` until the sampled iterate closeness holds.
fn bisect_iterates(
    n: usize,
    schedule: &Schedule,
    mut interval: Interval,
    r: f64,
    eps: f64,
    tau: u64,
    opts: &RefineOptions,
) -> Result<Refinement> {
    let st = schedule.stage(n)?;
    let q = st.q_u64()? as f64;
    let samples = iterate_samples(tau, opts.dense_iterates);
    for depth in 0..=opts.max_depth {
        let worst = iterate_closeness(schedule, n, &interval, r, &samples, opts, eps)?;
        if worst < eps {
            let ln_h = interval.half_width.ln();
            let closed = 2.0 * st.c * (PI * q * tau as f64 * ln_h.exp()).min(PI / 2.0).sin();
            let cert = Certificate::real_less(
                "iterate-closeness",
                "max_(i<=tau) |G_(n-1)^i - G_n^i|_r < eps_n on sampled alpha, i and x",
                Some(n),
                worst,
                eps,
                Rigor::Sampled,
            )
            .with_note(format!(
                "tau = {tau}, r = {r}, {} iterate samples, bisection depth {depth}, closed-form value at r = 0: {closed:.6e}",
                samples.len()
            ));
            return Ok(Refinement { interval, ln_half_width: ln_h, certificate: cert });
        }
        interval.half_width = &interval.half_width / &Rational::from_integer(2);
    }
    Err(Error::BudgetExceeded(format!("iterate closeness not certified within {} bisections", opts.max_depth)))
}

/// Interval around `p_n/q_n` for one closeness requirement, with its certificate.
pub fn refine_interval(n: usize, schedule: &Schedule, mode: &RefineMode, opts: &RefineOptions) -> Result<Refinement> {
    let st = schedule.stage(n)?;
    let center = st.center();
    let q = st.q_u64()?;
    match *mode {
        RefineMode::Conjugation { m, r, eps } => {
            let (ln_h, cert) = match opts.rule {
                IntervalRule::Rigorous => {
                    let b = conjugation_bound(schedule, m, n, r, eps)?;
                    let cert = Certificate::log_less(
                        "conjugation-interval",
                        "|DT^-1| |DPhi_n^-1| c_n e^(2 pi q_n r1) 4 pi q_n h < eps_n",
                        Some(n),
                        b.ln_chain(q, st.c),
                        eps.ln(),
                        Rigor::Analytic,
                    )
                    .with_note(format!(
                        "m = {m}, r1 = {:.6e}, r2 = {:.6e}, ln M = {:.6e}",
                        b.r1,
                        b.r2,
                        b.ln_m_conjugacy + b.ln_m_shear
                    ));
                    (b.ln_half_width, cert)
                }
                IntervalRule::Direct => {
                    check_divisibility(schedule, m.max(1), n)?;
                    let ln_h = direct_half_width(q, st.c, r, eps)?;
                    let cert = Certificate::log_less(
                        "stage-difference",
                        "2 c_n cosh(2 pi q_n r) |sin(pi q_n h)| < eps_n",
                        Some(n),
                        ln_commutator_norm(q, st.c, r, q as f64 * ln_h.exp()),
                        eps.ln(),
                        Rigor::Analytic,
                    )
                    .with_note(format!("m = {m}; the norm does not depend on m"));
                    (ln_h, cert)
                }
            };
            Ok(Refinement { interval: materialize(&center, ln_h)?, ln_half_width: ln_h, certificate: cert })
        }
        RefineMode::Iterates { r, eps, tau } => {
            if tau == 0 {
                return Err(Error::InvalidArgument("tau must be at least 1".into()));
            }
            let start = refine_interval(n, schedule, &RefineMode::Conjugation { m: 1, r, eps }, opts)?;
            bisect_iterates(n, schedule, start.interval, r, eps, tau, opts)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageInterval {
    pub interval: Interval,
    pub certificates: Vec<Certificate>,
}

/// Intersection of the provisional interval, the conjugation intervals for every `m <= n`
/// and one iterate interval at `r = 0` per `(tau, tolerance)` requirement.
pub fn stage_interval(
    n: usize,
    schedule: &Schedule,
    r: f64,
    eps: f64,
    iterates: &[(u64, f64)],
    opts: &RefineOptions,
) -> Result<StageInterval> {
    let st = schedule.stage(n)?;
    let mut half = st.interval.half_width.clone();
    let mut certificates = Vec::new();
    if st.c != 0.0 {
        let ms: Vec<usize> = match opts.rule {
            IntervalRule::Rigorous => (1..=n).collect(),
            IntervalRule::Direct => vec![1],
        };
        for m in ms {
            let rf = refine_interval(n, schedule, &RefineMode::Conjugation { m, r, eps }, opts)?;
            half = Rational::min(&half, &rf.interval.half_width);
            certificates.push(rf.certificate);
        }
        for &(tau, iterate_eps) in iterates {
            let start = Interval::new(st.center(), half.clone());
            let rf = bisect_iterates(n, schedule, start, 0.0, iterate_eps, tau, opts)?;
            half = Rational::min(&half, &rf.interval.half_width);
            certificates.push(rf.certificate);
        }
    }
    let interval = Interval::new(st.center(), half);
    let q2 = Rational::from_integer(&st.q * &st.q);
    certificates.push(Certificate::exact_less("interval-width", "|I_n| < 1/q_n^2", Some(n), interval.length(), q2.recip()));
    Ok(StageInterval { interval, certificates })
}

/// Sampled `max(|Δx|, |Δy|)` of two strip maps over `grid` low-discrepancy points of the
/// real torus and, for `r > 0`, the faces `Im = ±r`. Real parts of differences are taken mod 1.
pub fn map_distance<F, G>(f: F, g: G, r: f64, grid: usize) -> NormEstimate
where
    F: Fn(&StripPoint) -> StripPoint + Sync + Send,
    G: Fn(&StripPoint) -> StripPoint + Sync + Send,
{
    let offsets: Vec<f64> = if r > 0.0 { vec![-r, 0.0, r] } else { vec![0.0] };
    let grid = grid.max(1);
    let rows = par::map_range(grid, |k| {
        let mut worst = 0.0f64;
        {
            let (x, y) = (kronecker(k), kronecker2(k));
            for &ix in &offsets {
                for &iy in &offsets {
                    let z = StripPoint::new(Complex64::new(x, ix), Complex64::new(y, iy));
                    let (u, v) = (f(&z), g(&z));
                    worst = worst.max(lift_gap(u.x - v.x)).max(lift_gap(u.y - v.y));
                }
            }
        }
        worst
    });
    NormEstimate { ln_analytic: None, sampled: Some(rows.into_iter().fold(0.0, f64::max)), grid, r }
}

fn lift_gap(d: Complex64) -> f64 {
    Complex64::new(d.re - d.re.round(), d.im).norm()
}

/// Sampled torus distance `max |F(z) − G(z)|` in double-double over low-discrepancy points.
pub fn map_distance_torus<F, G>(f: F, g: G, grid: usize) -> f64
where
    F: Fn(&TorusPoint) -> TorusPoint + Sync + Send,
    G: Fn(&TorusPoint) -> TorusPoint + Sync + Send,
{
    par::map_range(grid.max(1), |k| {
        let z = TorusPoint::new(kronecker(k), kronecker2(k));
        f(&z).distance(&g(&z))
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Sampled `|G_{1,n}(α) − G_{1,n-1}(α)|_0` and its closed-form value `2c_n |sin(π(q_nα − p_n))|`.
pub fn stage_difference(schedule: &Schedule, n: usize, alpha: &Rational, grid: usize) -> Result<(f64, f64)> {
    let a = SkewMap::stage(alpha.clone(), schedule, 1, n)?;
    let b = SkewMap::stage(alpha.clone(), schedule, 1, n - 1)?;
    let sampled = map_distance_torus(|z| a.apply(z), |z| b.apply(z), grid);
    let st = schedule.stage(n)?;
    let offset = (alpha * &Rational::from_integer(st.q.clone()) - Rational::from_integer(st.p.clone())).to_f64();
    Ok((sampled, 2.0 * st.c * (PI * offset).sin().abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_norm_single_term() {
        let g = TrigSeries::single(1.0, 1);
        let e = strip_norm(&g, 0.0, 1000);
        assert!((e.analytic().unwrap() - 1.0).abs() < 1e-15);
        assert!((e.sampled.unwrap() - 1.0).abs() < 1e-12);
        let e = strip_norm(&g, 0.1, 10_000);
        assert!((e.analytic().unwrap() - (0.2 * PI).cosh()).abs() < 1e-12);
        assert!((e.analytic().unwrap() - 1.2040).abs() < 1e-4);
        assert!((e.sampled.unwrap() - e.analytic().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn derivative_bounds() {
        let one = MapExpr { atoms: vec![Atom::ShearInverse(Shear::new(4, 1.0).unwrap())] };
        assert!((derivative_norm_bound(&one, 0.0).exp() - (1.0 + 8.0 * PI)).abs() < 1e-12);
        assert!((derivative_norm_bound(&one, 0.0).exp() - 26.1327).abs() < 1e-4);
        let zero = MapExpr { atoms: vec![Atom::ShearInverse(Shear::new(4, 0.0).unwrap())] };
        assert_eq!(derivative_norm_bound(&zero, 0.0), 0.0);
        let two = MapExpr {
            atoms: vec![Atom::ShearInverse(Shear::new(16, 1.0).unwrap()), Atom::ShearInverse(Shear::new(4, 1.0).unwrap())],
        };
        let direct = (1.0 + 8.0 * PI) * (1.0 + 32.0 * PI);
        assert!((derivative_norm_bound(&two, 0.0).exp() / direct - 1.0).abs() < 1e-10);
        assert!((direct - 2653.0).abs() < 1.0);
    }

    #[test]
    fn shear_interval_formula() {
        let ln_h = commutator_interval(16, 1.0, 0.0, 1e-3, 2f64.ln()).unwrap();
        assert!((ln_h.exp() - 1.2434e-6).abs() < 1e-10);
        assert!((2.0 * ln_h.exp() - 1e-3 / (4.0 * PI * 2.0 * 16.0)).abs() < 1e-15);
        assert_eq!(commutator_interval(16, 0.0, 0.0, 1e-3, 0.0), Err(Error::DegenerateAmplitude));
    }

    #[test]
    fn log_helpers() {
        for x in [0.01, 0.5, 3.0, 40.0] {
            assert!((ln_cosh(x) - x.cosh().ln()).abs() < 1e-12);
            assert!((ln_sinh(x) - x.sinh().ln()).abs() < 1e-12);
        }
        assert!(ln_cosh(1e6).is_finite());
    }

    #[test]
    fn iterate_samples_cover_tau() {
        assert_eq!(iterate_samples(10, 4096), (1..=10).collect::<Vec<_>>());
        let s = iterate_samples(1_000_000, 100);
        assert_eq!(*s.last().unwrap(), 1_000_000);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rotation_distance_is_constant() {
        let a = MapExpr::rotation(0.3);
        let b = MapExpr::rotation(0.1);
        let d = map_distance(|z| a.apply_strip(z), |z| b.apply_strip(z), 0.5, 100);
        assert!((d.sampled.unwrap() - 0.2).abs() < 1e-12);
        let d = map_distance(|z| a.apply_strip(z), |z| a.apply_strip(z), 0.5, 100);
        assert_eq!(d.sampled, Some(0.0));
    }

    #[test]
    fn direct_rule_inverts_closed_form() {
        let ln_h = direct_half_width(40, 1.0, 0.0, 1e-2).unwrap();
        let at = 2.0 * (PI * 40.0 * 2.0 * ln_h.exp()).sin();
        assert!((at - 1e-2).abs() < 1e-12);
    }
}
