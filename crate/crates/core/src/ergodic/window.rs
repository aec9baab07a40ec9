//! Windows of angles on which Birkhoff averages of a stage map converge uniformly.
//!
//! Pick `α₀` in the interval, find `K` with `|avg_k − f̂_n| < ε/4` for all sampled starting
//! points and all `k ∈ [K, 2K]`, then shrink to the angles where the first `K + 1` iterates of
//! every orbit move by less than `ε / (4 (K + 1) D)`, `D` the gradient bound of `f ∘ T_n⁻¹`.
//! Averages over `k ≥ τ = a (K + 1)` then stay within `ε`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Rigor};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::par;
use crate::rational::{Interval, Rational};
use crate::schedule::Schedule;
use crate::torusmaps::{coboundary_series, SkewMap, TorusPoint, TrigSeries};

use super::birkhoff::{deviation_sup, last_exceedance, pure_x_partial_sum};
use super::observable::Observable;
use super::quadrature::MeasureProfile;

/// `√5 − 2` to 18 digits; the window's base angle sits this fraction of a half-width
/// right of the interval's center.
const OFFSET_NUM: i64 = 236_067_977_499_789_696;
const OFFSET_DEN: i64 = 1_000_000_000_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowOptions {
    /// Starting points form a `z_grid × z_grid` lattice of cell centers.
    pub z_grid: usize,
    pub gradient_grid: usize,
    pub initial_horizon: u64,
    pub max_horizon: u64,
    pub quadrature_budget: u64,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions { z_grid: 32, gradient_grid: 64, initial_horizon: 64, max_horizon: 1 << 22, quadrature_budget: 1 << 26 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformWindow {
    pub alpha0: Rational,
    pub k: u64,
    pub interval: Interval,
    /// `ln(ε / (4 (K + 1) D))` before clipping to the enclosing interval.
    pub ln_raw_half_width: f64,
    /// Whether the half-width was clipped to fit inside the enclosing interval.
    pub clipped: bool,
    pub gradient_sup: f64,
    pub a: u64,
    pub tau: u64,
    /// Largest sampled `|avg_k − f̂_n|` over `k ∈ [K, 2K]`.
    pub deviation: f64,
    pub horizon: u64,
    pub certificates: Vec<Certificate>,
}

/// Deterministic base angle inside `interval`.
pub fn base_angle(interval: &Interval) -> Rational {
    &interval.center + &(&interval.half_width * &Rational::new(OFFSET_NUM, OFFSET_DEN))
}

fn stage_series(n: usize, schedule: &Schedule) -> Result<TrigSeries> {
    if n == 0 {
        Ok(TrigSeries::zero())
    } else {
        coboundary_series(1, n, schedule)
    }
}

/// The stage map `G_n(α)`; `n = 0` is the rotation.
pub fn stage_map(n: usize, schedule: &Schedule, alpha: Rational) -> Result<SkewMap> {
    if n == 0 {
        Ok(SkewMap::new(alpha, TrigSeries::zero()))
    } else {
        SkewMap::stage(alpha, schedule, 1, n)
    }
}

/// Cell centers of a `side × side` lattice.
pub fn lattice(side: usize) -> Vec<TorusPoint> {
    let side = side.max(1);
    (0..side * side)
        .map(|i| TorusPoint::new(((i / side) as f64 + 0.5) / side as f64, ((i % side) as f64 + 0.5) / side as f64))
        .collect()
}

/// Sampled `sup max(|∂_x(f∘T⁻¹)|, |∂_y(f∘T⁻¹)|)`, evaluated at `w = T⁻¹(z)` where
/// `∂_x = f_x − f_y g'` and `∂_y = f_y`.
pub fn gradient_sup(f: &Observable, g: &TrigSeries, side: usize) -> f64 {
    let pts = lattice(side);
    par::map(pts, |w| {
        let (fx, fy) = f.gradient(w.x, w.y);
        let dx = fx - fy * g.derivative(w.x);
        dx.norm().max(fy.norm())
    })
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn uniform_window(
    n: usize,
    schedule: &Schedule,
    f: &Observable,
    eps: f64,
    interval: &Interval,
    opts: &WindowOptions,
) -> Result<UniformWindow> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if interval.half_width <= Rational::zero() {
        return Err(Error::InvalidArgument("window needs a non-degenerate interval".into()));
    }
    let g = stage_series(n, schedule)?;
    let alpha0 = base_angle(interval);
    let map = stage_map(n, schedule, alpha0.clone())?;
    let profile = MeasureProfile::new(f, &g, opts.quadrature_budget)?;
    let starts = lattice(opts.z_grid);
    let refs: Vec<Complex64> = starts.iter().map(|z| profile.mean_on_curve(map.invariant(z))).collect();

    let mut horizon = opts.initial_horizon.max(2).min(opts.max_horizon);
    let k = loop {
        let lasts = par::map_range(starts.len(), |i| last_exceedance(&map, f, &starts[i], refs[i], horizon, eps / 4.0));
        let k = lasts.into_iter().flatten().max().map_or(1, |l| l + 1);
        if 2 * k <= horizon {
            break k;
        }
        if horizon >= opts.max_horizon {
            return Err(Error::BudgetExceeded(format!(
                "averages still deviate by eps/4 at k = {} with horizon {horizon}",
                k - 1
            )));
        }
        horizon = (2 * horizon).max(4 * k).min(opts.max_horizon);
    };
    let deviation = par::map_range(starts.len(), |i| deviation_sup(&map, f, &starts[i], refs[i], k, 2 * k))
        .into_iter()
        .fold(0.0, f64::max);

    let d = gradient_sup(f, &g, opts.gradient_grid);
    let ln_raw = eps.ln() - (4.0 * (k + 1) as f64).ln() - d.ln();
    let lo_gap = &alpha0 - &interval.lo();
    let hi_gap = &interval.hi() - &alpha0;
    let gap = Rational::min(&lo_gap, &hi_gap);
    let raw = Rational::dyadic_below_exp(ln_raw);
    let (half_width, clipped) = match raw {
        Some(h) if h < gap => (h, false),
        _ => (&gap * &Rational::new(1, 2), true),
    };
    let a = (4.0 * f.sup_bound() / eps).floor() as u64 + 1;
    let tau = a * (k + 1);
    let cert = Certificate::real_less(
        "window-average",
        "max over sampled z and k in [K, 2K] of |avg_k - mean on curve| < eps/4",
        Some(n),
        deviation,
        eps / 4.0,
        Rigor::Sampled,
    )
    .with_note(format!("K = {k}, {} starting points", starts.len()));
    Ok(UniformWindow {
        alpha0: alpha0.clone(),
        k,
        interval: Interval::new(alpha0, half_width),
        ln_raw_half_width: ln_raw,
        clipped,
        gradient_sup: d,
        a,
        tau,
        deviation,
        horizon,
        certificates: vec![cert],
    })
}

/// Worst `|avg_k − f̂_n|` over sampled angles in the window, starting points, and
/// `k ∈ [k_lo, k_hi]`. `x`-only observables use the closed form at `k_samples` evenly
/// spaced `k`; others are simulated at every `k`.
pub fn window_deviation(
    n: usize,
    schedule: &Schedule,
    f: &Observable,
    window: &Interval,
    alphas: u32,
    z_grid: usize,
    k_lo: u64,
    k_hi: u64,
    quadrature_budget: u64,
) -> Result<f64> {
    let g = stage_series(n, schedule)?;
    let profile = MeasureProfile::new(f, &g, quadrature_budget)?;
    let starts = lattice(z_grid);
    let angles = window.grid(alphas.saturating_sub(1).max(1));
    let mut jobs = Vec::new();
    for a in &angles {
        for z in &starts {
            jobs.push((a.clone(), z.clone()));
        }
    }
    let ks = k_samples(k_lo, k_hi, 257);
    let worst = par::map(jobs, |(a, z)| -> Result<f64> {
        let map = stage_map(n, schedule, a)?;
        let reference = profile.mean_on_curve(map.invariant(&z));
        Ok(if f.x_only() {
            ks.iter()
                .map(|&k| (pure_x_partial_sum(f, z.x, map.alpha_dd(), k) / (k + 1) as f64 - reference).norm())
                .fold(0.0, f64::max)
        } else {
            deviation_sup(&map, f, &z, reference, k_lo, k_hi)
        })
    });
    worst.into_iter().try_fold(0.0f64, |m, w| Ok(m.max(w?)))
}

/// `count` evenly spaced integers covering `[lo, hi]`, both ends included.
pub fn k_samples(lo: u64, hi: u64, count: u64) -> Vec<u64> {
    if hi <= lo {
        return vec![lo];
    }
    let span = hi - lo;
    if span < count {
        return (lo..=hi).collect();
    }
    let mut v: Vec<u64> = (0..count).map(|i| lo + (span as u128 * i as u128 / (count - 1) as u128) as u64).collect();
    v.dedup();
    v
}

/// `|Σ_{i≤k} e^{2πi iα}| / (k + 1) ≤ 2 / ((k + 1) |1 − e^{2πiα}|)`: the rotation's `K` for
/// deviation `threshold`.
pub fn rotation_horizon(alpha: &Rational, threshold: f64) -> f64 {
    let (s, _) = Dd::sin_cos_two_pi_f64(Dd::from_rational(alpha).mul_f64(0.5));
    2.0 / (threshold * 2.0 * s.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torusmaps::tests::manual_schedule;

    fn unit_window() -> Interval {
        Interval::new(Rational::new(1, 3), Rational::new(1, 100))
    }

    #[test]
    fn constant_observable_needs_one_step() {
        let sched = manual_schedule(&[(1, 4, 1, 1.0)]);
        let w = uniform_window(1, &sched, &Observable::constant(1.0), 0.1, &unit_window(), &WindowOptions::default()).unwrap();
        assert_eq!(w.k, 1);
        assert_eq!(w.a, 41);
        assert_eq!(w.tau, 82);
        assert!(w.clipped && w.deviation < 1e-15);
    }

    #[test]
    fn rotation_horizon_within_factor_four() {
        let eps = 0.1;
        let interval = unit_window();
        let opts = WindowOptions { z_grid: 4, ..WindowOptions::default() };
        let w = uniform_window(0, &Schedule::new(vec![]), &Observable::character(1, 0), eps, &interval, &opts).unwrap();
        let bound = rotation_horizon(&w.alpha0, eps / 4.0);
        assert!((w.k as f64) <= bound && (w.k as f64) >= bound / 4.0, "K = {}, bound = {bound}", w.k);
        assert!(w.certificates[0].pass);
    }

    #[test]
    fn k_samples_cover_range() {
        assert_eq!(k_samples(5, 8, 257), vec![5, 6, 7, 8]);
        let v = k_samples(1000, 100_000, 11);
        assert_eq!((v[0], *v.last().unwrap(), v.len()), (1000, 100_000, 11));
    }
}
