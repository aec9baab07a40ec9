use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Rigor};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::par;
use crate::rational::Rational;
use crate::schedule::Schedule;
use crate::torusmaps::{coboundary_series, TrigSeries};

/// Largest `q_m` whose `J_k` cells are all scanned.
const MAX_CELLS_SCANNED: u64 = 1 << 22;
/// Largest covering grid, in cells per side.
const MAX_GRID_SIDE: u64 = 1 << 13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub eps: f64,
    pub m: usize,
    pub n: usize,
    /// `Γ_n(w_k) − Γ_n(z_k)` exceeds one, per cell `J_k = [k/q_m, (k+1)/q_m]`.
    pub oscillation_pass: Vec<bool>,
    pub min_oscillation: f64,
    pub cells_per_side: u64,
    pub cells_hit: u64,
    /// Fraction of covering cells containing an orbit point.
    pub grid_cells_hit: f64,
    /// Orbit points used: `min(q_{n+1}, budget)` plus the start.
    pub iterate_budget: u64,
    pub alpha: Rational,
    pub certificates: Vec<Certificate>,
}

/// Points `z_k, w_k ∈ J_k` at which the stage-`n` curve sits near its minimum and
/// maximum: `(4k+1)/(4q_m) + T` and `(4k+3)/(4q_m) − T`, `T = Σ_{i=m+1}^{n} 1/(4q_i)`.
pub fn extremal_points(m: usize, n: usize, schedule: &Schedule, k: u64) -> Result<(Dd, Dd)> {
    let qm = schedule.stage(m)?.q_u64()?;
    let mut tail = Dd::ZERO;
    for i in m + 1..=n {
        tail = tail + Dd::from_f64(1.0).div(Dd::from_f64(4.0 * schedule.stage(i)?.q_u64()? as f64));
    }
    let base = Dd::from_f64(4.0 * qm as f64);
    let z = Dd::from_f64((4 * k + 1) as f64).div(base) + tail;
    let w = Dd::from_f64((4 * k + 3) as f64).div(base) - tail;
    Ok((z, w))
}

/// `max − min` of `−g` over a dense uniform scan of `[lo, hi]`.
pub fn scanned_oscillation(g: &TrigSeries, lo: f64, hi: f64, samples: usize) -> f64 {
    let samples = samples.max(2);
    let mut mn = f64::INFINITY;
    let mut mx = f64::NEG_INFINITY;
    for i in 0..samples {
        let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let v = -g.eval(Dd::from_f64(x)).to_f64();
        mn = mn.min(v);
        mx = mx.max(v);
    }
    mx - mn
}

pub fn density_check(m: usize, n: usize, schedule: &Schedule, eps: f64, budget: u64) -> Result<DensityReport> {
    if budget == 0 {
        return Err(Error::InvalidArgument("the orbit needs at least one iterate".into()));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let qm = schedule.stage(m)?.q_u64()?;
    if 1.0 / (qm as f64) > eps {
        return Err(Error::PrereqViolated(format!("1/q_{m} = 1/{qm} exceeds eps = {eps}")));
    }
    if qm > MAX_CELLS_SCANNED {
        return Err(Error::BudgetExceeded(format!("q_{m} = {qm} cells to scan")));
    }
    let g = coboundary_series(1, n, schedule)?;

    // Γ_n = −g, so Γ_n(w) − Γ_n(z) = g(z) − g(w).
    let osc: Vec<f64> = par::map_range(qm as usize, |k| {
        let (z, w) = extremal_points(m, n, schedule, k as u64).expect("stages checked above");
        (g.eval(z) - g.eval(w)).to_f64()
    });
    let oscillation_pass: Vec<bool> = osc.iter().map(|&o| o > 1.0).collect();
    let min_oscillation = osc.iter().copied().fold(f64::INFINITY, f64::min);

    let side = (1.0 / eps).ceil() as u64;
    if side > MAX_GRID_SIDE {
        return Err(Error::BudgetExceeded(format!("covering grid of {side}^2 cells")));
    }
    let (alpha, count) = match schedule.stage(n + 1) {
        Ok(next) => {
            let q_next = next.q_u64().unwrap_or(u64::MAX);
            (next.center(), q_next.min(budget))
        }
        Err(_) => (schedule.stage(n)?.interval.center.clone(), budget),
    };
    let a = Dd::from_rational(&alpha);
    let mut hit = vec![false; (side * side) as usize];
    let cell = |v: Dd| ((v.frac().to_f64() * side as f64) as u64).min(side - 1);
    for i in 0..=count {
        let x = a.mul_f64(i as f64).frac();
        let y = (-g.eval(x)).frac();
        hit[(cell(x) * side + cell(y)) as usize] = true;
    }
    let cells_hit = hit.iter().filter(|&&h| h).count() as u64;
    let total = side * side;

    let certificates = vec![
        Certificate::real_less(
            "oscillation",
            "1 < min_k Gamma_n(w_k) - Gamma_n(z_k)",
            Some(n),
            1.0,
            min_oscillation,
            Rigor::Analytic,
        )
        .with_note(format!("m = {m}, {qm} cells")),
        Certificate::exact_equal(
            "coverage",
            "every eps-cell of the torus contains an orbit point on Gamma_n",
            Some(n),
            Rational::from_integer(cells_hit as i64),
            Rational::from_integer(total as i64),
        )
        .with_note(format!("{} iterates, {side}x{side} cells", count)),
    ];
    Ok(DensityReport {
        eps,
        m,
        n,
        oscillation_pass,
        min_oscillation,
        cells_per_side: side,
        cells_hit,
        grid_cells_hit: cells_hit as f64 / total as f64,
        iterate_budget: count,
        alpha,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torusmaps::tests::manual_schedule;

    #[test]
    fn single_stage_oscillation_is_twice_the_amplitude() {
        let sched = manual_schedule(&[(1, 4, 1, 1.0)]);
        let r = density_check(1, 1, &sched, 0.25, 100).unwrap();
        assert!(r.oscillation_pass.iter().all(|&p| p));
        assert!((r.min_oscillation - 2.0).abs() < 1e-12);
        assert!(r.grid_cells_hit > 0.0 && r.grid_cells_hit <= 1.0);
    }

    #[test]
    fn preconditions() {
        let sched = manual_schedule(&[(1, 4, 1, 1.0)]);
        assert!(matches!(density_check(1, 1, &sched, 0.25, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(density_check(1, 1, &sched, 0.1, 10), Err(Error::PrereqViolated(_))));
    }

    #[test]
    fn verdicts_agree_with_dense_scan() {
        for amps in [(0.7, 0.4), (0.3, 0.15)] {
            let sched = manual_schedule(&[(1, 4, 1, amps.0), (9, 32, 2, amps.1)]);
            let r = density_check(1, 2, &sched, 0.25, 1000).unwrap();
            let g = coboundary_series(1, 2, &sched).unwrap();
            for k in 0..4 {
                let scan = scanned_oscillation(&g, k as f64 / 4.0, (k + 1) as f64 / 4.0, 20_000);
                assert_eq!(r.oscillation_pass[k], scan > 1.0, "cell {k}, amplitudes {amps:?}");
            }
        }
    }
}
