use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::derivative_norm_bound;
use crate::certificate::{Certificate, Rigor};
use crate::error::{Error, Result};
use crate::par;
use crate::rational::Rational;
use crate::schedule::Schedule;
use crate::torusmaps::{conjugate_transport, MapExpr, SkewMap};

use super::random_points;

const POINTWISE_TOLERANCE: f64 = 1e-10;
/// Rounding allowance in the transported Lipschitz estimate.
const TRANSPORT_SLACK: f64 = 1e-12;

/// Consistency of the offset family `G_(m,n) = T_(m,n)⁻¹ R_α T_(m,n)` with the stage maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetCheck {
    pub m: usize,
    pub n: usize,
    pub alpha: Rational,
    pub points: usize,
    /// `max |G_(m,n) z − T_(1,m−1) G_n T_(1,m−1)⁻¹ z|`.
    pub pointwise: f64,
    /// Bound on the derivative of `T_(1,m−1)⁻¹` used to pull distances back.
    pub lipschitz: f64,
    /// `max |F z − G_n z|` with `F = T_(1,m−1)⁻¹ R_α T_(1,m−1)`.
    pub pulled_back: f64,
    /// `max |R_α w − G_(m,n) w|` at `w = T_(1,m−1) z`.
    pub offset_distance: f64,
    /// `max (|F z − G_n z| − L |R_α w − G_(m,n) w|)`; never positive when the estimate holds.
    pub worst_excess: f64,
    pub certificates: Vec<Certificate>,
}

/// Samples `points` seeded torus points and checks that the offset family is the stage map
/// seen through `T_(1,m−1)`, and that distances from the rotation transport back with at
/// most the derivative bound of `T_(1,m−1)⁻¹`. Needs `1 ≤ m ≤ n + 1`.
pub fn offset_family_check(
    m: usize,
    n: usize,
    schedule: &Schedule,
    alpha: &Rational,
    points: usize,
    seed: u64,
) -> Result<OffsetCheck> {
    if m == 0 || m > n + 1 {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n + 1, got m = {m}, n = {n}")));
    }
    if points == 0 {
        return Err(Error::InvalidArgument("at least one sample point is required".into()));
    }
    let offset = SkewMap::stage(alpha.clone(), schedule, m, n)?;
    let full = SkewMap::stage(alpha.clone(), schedule, 1, n)?;
    let full_expr = MapExpr::conjugated_rotation(alpha.clone(), schedule, 1, n)?;
    let s = MapExpr::conjugacy(schedule, 1, m - 1)?;
    let s_inv = s.inverse();
    let lipschitz = derivative_norm_bound(&s_inv, 0.0).exp();
    let rotation = MapExpr::rotation(alpha.clone());

    let pts = random_points(&mut ChaCha8Rng::seed_from_u64(seed), points);
    let rows = par::map(pts, |z| -> Result<[f64; 4]> {
        let transported = conjugate_transport(m, &full_expr, schedule, &z)?;
        let pointwise = offset.apply(&z).distance(&transported);
        let w = s.apply(&z);
        let (a, b) = (rotation.apply(&w), offset.apply(&w));
        let near = a.distance(&b);
        let pulled = s_inv.apply(&a).distance(&full.apply(&z));
        Ok([pointwise, pulled, near, pulled - lipschitz * near])
    });
    let mut w = [0.0f64, 0.0, 0.0, f64::NEG_INFINITY];
    for r in rows {
        for (slot, v) in w.iter_mut().zip(r?) {
            *slot = slot.max(v);
        }
    }
    let stage = Some(n);
    let certificates = vec![
        Certificate::real_less(
            "offset-pointwise",
            "max over sampled z of |G_(m,n) z - T_(1,m-1) G_n T_(1,m-1)^-1 z| < 1e-10",
            stage,
            w[0],
            POINTWISE_TOLERANCE,
            Rigor::Sampled,
        )
        .with_note(format!("m = {m}, {points} points")),
        Certificate::real_at_most(
            "transport-estimate",
            "|F z - G_n z| <= L |R w - G_(m,n) w| at every sampled z, w = T_(1,m-1) z",
            stage,
            w[3],
            TRANSPORT_SLACK,
            Rigor::Sampled,
        )
        .with_note(format!("L = {lipschitz:.6e}")),
    ];
    Ok(OffsetCheck {
        m,
        n,
        alpha: alpha.clone(),
        points,
        pointwise: w[0],
        lipschitz,
        pulled_back: w[1],
        offset_distance: w[2],
        worst_excess: w[3],
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::all_pass;
    use crate::torusmaps::tests::manual_schedule;

    #[test]
    fn offsets_agree_on_a_manual_schedule() {
        let sched = manual_schedule(&[(1, 4, 1, 1.0), (9, 32, 2, 1.0), (73, 256, 2, 0.5)]);
        let alpha = Rational::new(1, 7);
        for m in 1..=4 {
            let r = offset_family_check(m, 3, &sched, &alpha, 200, 3).unwrap();
            assert!(all_pass(&r.certificates), "m = {m}: {:#?}", r.certificates);
        }
        let r = offset_family_check(1, 3, &sched, &alpha, 50, 0).unwrap();
        assert_eq!(r.lipschitz, 1.0);
        assert!((r.pulled_back - r.offset_distance).abs() < 1e-12);
    }

    #[test]
    fn range_checked() {
        let sched = manual_schedule(&[(1, 4, 1, 1.0)]);
        let a = Rational::new(1, 3);
        assert!(offset_family_check(0, 1, &sched, &a, 10, 0).is_err());
        assert!(offset_family_check(3, 1, &sched, &a, 10, 0).is_err());
        assert!(offset_family_check(1, 1, &sched, &a, 0, 0).is_err());
    }
}
