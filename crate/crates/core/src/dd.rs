//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 32 significant digits. Used for phases `frequency * x mod 1` and for
//! `y` accumulation along long orbits.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// 2π to double-double precision.
pub const TWO_PI: Dd = Dd { hi: 6.283185307179586, lo: 2.4492935982947064e-16 };

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn new(hi: f64, lo: f64) -> Dd {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    /// Nearest double-double to an exact rational.
    pub fn from_rational(r: &Rational) -> Dd {
        let hi = r.to_f64();
        if !hi.is_finite() || hi == 0.0 {
            // Values below f64 range; the low word carries nothing useful.
            return Dd::from_f64(hi);
        }
        let rest = r - &Rational::from_f64(hi).expect("finite");
        Dd::new(hi, rest.to_f64())
    }

    pub fn from_integer(n: &BigInt) -> Dd {
        let hi = n.to_f64().unwrap_or(f64::INFINITY);
        if !hi.is_finite() {
            return Dd::from_f64(hi);
        }
        let rest = n - BigInt::from(hi as i128);
        Dd::new(hi, rest.to_f64().unwrap_or(0.0))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_zero(self) -> bool {
        self.hi.is_zero() && self.lo.is_zero()
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        Dd::new(p, e)
    }

    pub fn recip(self) -> Dd {
        Dd::from_f64(1.0).div(self)
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l } + Dd::from_f64(q3)
    }

    pub fn floor(self) -> Dd {
        let fh = self.hi.floor();
        if fh == self.hi {
            Dd::new(fh, self.lo.floor())
        } else {
            Dd::from_f64(fh)
        }
    }

    pub fn round(self) -> Dd {
        (self + Dd::from_f64(0.5)).floor()
    }

    /// Representative in `[0, 1)`.
    pub fn frac(self) -> Dd {
        let f = self - self.floor();
        if f.hi >= 1.0 {
            f - Dd::from_f64(1.0)
        } else if f.hi < 0.0 || (f.hi == 0.0 && f.lo < 0.0) {
            f + Dd::from_f64(1.0)
        } else {
            f
        }
    }

    /// Signed representative of `self mod 1` in `[-1/2, 1/2)`.
    pub fn centered_frac(self) -> Dd {
        let f = self.frac();
        if f.hi >= 0.5 {
            f - Dd::from_f64(1.0)
        } else {
            f
        }
    }

    /// `(sin 2πt, cos 2πt)` to double-double accuracy.
    pub fn sin_cos_two_pi(t: Dd) -> (Dd, Dd) {
        let t = t.frac();
        let quarter = (t.mul_f64(4.0)).round();
        let k = (quarter.hi as i64).rem_euclid(4);
        let r = t - quarter.mul_f64(0.25);
        let theta = TWO_PI * r;
        let (s, c) = sin_cos_small(theta);
        match k {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    /// `(sin 2πt, cos 2πt)` as f64, with the argument reduction carried out in
    /// double-double so that large integer parts of `t` do not cost accuracy.
    pub fn sin_cos_two_pi_f64(t: Dd) -> (f64, f64) {
        let r = t.centered_frac();
        let theta = TWO_PI * r;
        let (s, c) = theta.hi.sin_cos();
        (s + c * theta.lo, c - s * theta.lo)
    }
}

const INV_FACT: [Dd; 34] = inv_factorials();

const fn inv_factorials() -> [Dd; 34] {
    // 1/k! for k = 0..34 as double-double.
    [
        Dd { hi: 1.0, lo: 0.0 },
        Dd { hi: 1.0, lo: 0.0 },
        Dd { hi: 0.5, lo: 0.0 },
        Dd { hi: 0.16666666666666666, lo: 9.25185853854297e-18 },
        Dd { hi: 0.041666666666666664, lo: 2.3129646346357427e-18 },
        Dd { hi: 0.008333333333333333, lo: 1.1564823173178714e-19 },
        Dd { hi: 0.001388888888888889, lo: -5.300543954373577e-20 },
        Dd { hi: 0.0001984126984126984, lo: 1.7209558293420705e-22 },
        Dd { hi: 2.48015873015873e-05, lo: 2.1511947866775882e-23 },
        Dd { hi: 2.7557319223985893e-06, lo: -1.858393274046472e-22 },
        Dd { hi: 2.755731922398589e-07, lo: 2.3767714622250297e-23 },
        Dd { hi: 2.505210838544172e-08, lo: -1.448814070935912e-24 },
        Dd { hi: 2.08767569878681e-09, lo: -1.20734505911326e-25 },
        Dd { hi: 1.6059043836821613e-10, lo: 1.2585294588752098e-26 },
        Dd { hi: 1.1470745597729725e-11, lo: 2.0655512752830745e-28 },
        Dd { hi: 7.647163731819816e-13, lo: 7.03872877733453e-30 },
        Dd { hi: 4.779477332387385e-14, lo: 4.399205485834081e-31 },
        Dd { hi: 2.8114572543455206e-15, lo: 1.6508842730861433e-31 },
        Dd { hi: 1.5619206968586225e-16, lo: 1.1910679660273754e-32 },
        Dd { hi: 8.22063524662433e-18, lo: 2.2141894119604265e-34 },
        Dd { hi: 4.110317623312165e-19, lo: 1.4412973378659527e-36 },
        Dd { hi: 1.9572941063391263e-20, lo: -1.3643503830087908e-36 },
        Dd { hi: 8.896791392450574e-22, lo: -7.911402614872376e-38 },
        Dd { hi: 3.868170170630684e-23, lo: -8.843177655482344e-40 },
        Dd { hi: 1.6117375710961184e-24, lo: -3.6846573564509766e-41 },
        Dd { hi: 6.446950284384474e-26, lo: -1.9330404233703465e-42 },
        Dd { hi: 2.4795962632247976e-27, lo: -1.2953730964765229e-43 },
        Dd { hi: 9.183689863795546e-29, lo: 1.4303150396787322e-45 },
        Dd { hi: 3.279889237069838e-30, lo: 1.5117542744029879e-46 },
        Dd { hi: 1.1309962886447716e-31, lo: 1.0498015412959506e-47 },
        Dd { hi: 3.7699876288159054e-33, lo: 2.5870347832750324e-49 },
        Dd { hi: 1.216125041553518e-34, lo: 5.586290567888806e-51 },
        Dd { hi: 3.8003907548547434e-36, lo: 1.7457158024652518e-52 },
        Dd { hi: 1.151633562077195e-37, lo: -6.09957445788454e-54 },
    ]
}

/// Taylor series for `|theta| <= pi/4`.
fn sin_cos_small(theta: Dd) -> (Dd, Dd) {
    if theta.is_zero() {
        return (Dd::ZERO, Dd::from_f64(1.0));
    }
    let x2 = theta * theta;
    let mut s = Dd::ZERO;
    let mut c = Dd::ZERO;
    // Horner from the highest retained order downwards.
    let mut k = 33;
    while k >= 1 {
        // odd terms: theta^(2m+1)/(2m+1)!, even: theta^(2m)/(2m)!
        if k % 2 == 1 {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            s = s * x2 + INV_FACT[k].mul_f64(sign);
        }
        k -= 1;
    }
    let mut k = 32;
    loop {
        if k % 2 == 0 {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            c = c * x2 + INV_FACT[k].mul_f64(sign);
        }
        if k == 0 {
            break;
        }
        k -= 1;
    }
    (s * theta, c)
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (h, l) = quick_two_sum(s1, s2);
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}
