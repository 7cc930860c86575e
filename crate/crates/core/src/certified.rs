//! Certified rational arithmetic: values carried as `value ± error_bound`
//! with conservative propagation, plus dyadic enclosures for ln/exp/sqrt.
//!
//! The invariant everywhere is `|true - value| <= error`. Bounds are allowed
//! to be loose, never tight in the wrong direction.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedReal {
    value: BigRational,
    error: BigRational,
}

impl CertifiedReal {
    pub fn new(value: BigRational, error: BigRational) -> Self {
        debug_assert!(!error.is_negative());
        CertifiedReal { value, error }
    }

    pub fn exact(value: BigRational) -> Self {
        CertifiedReal { value, error: BigRational::zero() }
    }

    pub fn exact_int(v: i64) -> Self {
        Self::exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_interval(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        let two = BigRational::from_integer(BigInt::from(2));
        let value = (&lo + &hi) / &two;
        let error = (&hi - &lo) / two;
        CertifiedReal { value, error }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn error(&self) -> &BigRational {
        &self.error
    }

    pub fn lo(&self) -> BigRational {
        &self.value - &self.error
    }

    pub fn hi(&self) -> BigRational {
        &self.value + &self.error
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        CertifiedReal {
            value: &self.value + &other.value,
            error: &self.error + &other.error,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        CertifiedReal {
            value: &self.value - &other.value,
            error: &self.error + &other.error,
        }
    }

    pub fn neg(&self) -> Self {
        CertifiedReal { value: -self.value.clone(), error: self.error.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let value = &self.value * &other.value;
        let error = self.value.abs() * &other.error
            + other.value.abs() * &self.error
            + &self.error * &other.error;
        CertifiedReal { value, error }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        CertifiedReal { value: &self.value * c, error: &self.error * c.abs() }
    }

    pub fn add_rat(&self, c: &BigRational) -> Self {
        CertifiedReal { value: &self.value + c, error: self.error.clone() }
    }

    /// Reciprocal; requires the interval to be separated from zero.
    pub fn recip(&self) -> Result<Self> {
        let lo_abs = self.value.abs() - &self.error;
        if !lo_abs.is_positive() {
            return Err(Error::precision("reciprocal of interval containing zero"));
        }
        let value = self.value.recip();
        let error = &self.error / (self.value.abs() * lo_abs);
        Ok(CertifiedReal { value, error })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    /// Interval minimum: exact on enclosures.
    pub fn min_with(&self, other: &Self) -> Self {
        let lo = self.lo().min(other.lo());
        let hi = self.hi().min(other.hi());
        Self::from_interval(lo, hi)
    }

    pub fn max_with(&self, other: &Self) -> Self {
        let lo = self.lo().max(other.lo());
        let hi = self.hi().max(other.hi());
        Self::from_interval(lo, hi)
    }

    /// Certified comparison against an exact rational. `None` when the
    /// interval straddles `c`.
    pub fn cmp_rational(&self, c: &BigRational) -> Option<Ordering> {
        if self.hi() < *c {
            Some(Ordering::Less)
        } else if self.lo() > *c {
            Some(Ordering::Greater)
        } else if self.is_exact() && self.value == *c {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified comparison of two enclosures. `None` when they overlap.
    pub fn cmp_certified(&self, other: &Self) -> Option<Ordering> {
        if self.hi() < other.lo() {
            Some(Ordering::Less)
        } else if self.lo() > other.hi() {
            Some(Ordering::Greater)
        } else if self.is_exact() && other.is_exact() && self.value == other.value {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Natural log of the enclosure. Requires a certified-positive interval.
    pub fn ln(&self, prec: u32) -> Result<Self> {
        let lo = self.lo();
        if !lo.is_positive() {
            return Err(Error::precision("ln of interval not certified positive"));
        }
        let (a, _) = ln_enclosure(&lo, prec)?;
        let (_, b) = ln_enclosure(&self.hi(), prec)?;
        Ok(Self::from_interval(a, b))
    }

    pub fn exp(&self, prec: u32) -> Result<Self> {
        let (a, _) = exp_enclosure(&self.lo(), prec)?;
        let (_, b) = exp_enclosure(&self.hi(), prec)?;
        Ok(Self::from_interval(a, b))
    }

    /// Rendered as `value ± bound` with 12 significant digits on the value.
    pub fn display_string(&self) -> String {
        if self.is_exact() {
            format!("{} ± 0", decimal_string(&self.value, 12))
        } else {
            format!(
                "{} ± {}",
                decimal_string(&self.value, 12),
                decimal_string(&self.error, 3)
            )
        }
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_string())
    }
}

/// floor(x * 2^prec) as a BigInt.
pub fn floor_scaled(x: &BigRational, prec: u32) -> BigInt {
    let num = x.numer() << prec;
    num.div_floor(x.denom())
}

/// Sound interval accumulator over a fixed dyadic grid.
///
/// Summing exact rationals with unrelated denominators makes every addition
/// pay a growing gcd; rounding each bound onto the 2^-prec grid (down for
/// the lower bound, up for the upper) keeps additions cheap and the
/// enclosure sound.
#[derive(Clone, Debug)]
pub struct DyadicAccumulator {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

impl DyadicAccumulator {
    pub fn new(prec: u32) -> Self {
        DyadicAccumulator { lo: BigInt::zero(), hi: BigInt::zero(), prec }
    }

    pub fn add_interval(&mut self, lo: &BigRational, hi: &BigRational) {
        self.lo += floor_scaled(lo, self.prec);
        self.hi += ceil_scaled(hi, self.prec);
    }

    pub fn add_certified(&mut self, c: &CertifiedReal) {
        self.add_interval(&c.lo(), &c.hi());
    }

    pub fn bounds(&self) -> (BigRational, BigRational) {
        let d = BigInt::one() << self.prec;
        (
            BigRational::new(self.lo.clone(), d.clone()),
            BigRational::new(self.hi.clone(), d),
        )
    }

    pub fn to_certified(&self) -> CertifiedReal {
        let (lo, hi) = self.bounds();
        CertifiedReal::from_interval(lo, hi)
    }
}

/// ceil(x * 2^prec) as a BigInt.
pub fn ceil_scaled(x: &BigRational, prec: u32) -> BigInt {
    let num = x.numer() << prec;
    num.div_ceil(x.denom())
}

fn pow2_rat(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as usize))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// Exponent e with 2^e <= x < 2^{e+1}, for x > 0.
fn dyadic_exponent(x: &BigRational) -> i64 {
    debug_assert!(x.is_positive());
    let mut e = x.numer().bits() as i64 - x.denom().bits() as i64;
    // bits() estimate can be off by one either way
    loop {
        let p = pow2_rat(e);
        if *x < p {
            e -= 1;
            continue;
        }
        if *x >= pow2_rat(e + 1) {
            e += 1;
            continue;
        }
        return e;
    }
}

/// atanh series on a scaled point Z (z = Z/2^prec, 0 <= z <= 0.34...).
/// Returns (sum, slack_ulps) with atanh(z) * 2^prec in [sum, sum + slack].
fn atanh_scaled(z_scaled: &BigInt, prec: u32) -> (BigInt, BigInt) {
    let terms = (prec as usize + 8) / 3 + 2;
    let z2 = z_scaled * z_scaled;
    let mut t = z_scaled.clone();
    let mut sum = t.clone();
    let mut j = 1usize;
    while j < terms && !t.is_zero() {
        t = (&t * &z2) >> (2 * prec as usize);
        sum += t.div_floor(&BigInt::from(2 * j + 1));
        j += 1;
    }
    // Every floor lost at most 1 ulp per operation, the truncated tail is
    // below 1 ulp by the term-count choice; 4*terms + 8 is a safe cover.
    (sum, BigInt::from(4 * terms + 8))
}

static LN2_CACHE: Mutex<Option<(u32, BigRational, BigRational)>> = Mutex::new(None);

/// Enclosure of ln 2 to roughly `prec` bits.
pub fn ln2_enclosure(prec: u32) -> (BigRational, BigRational) {
    {
        let guard = LN2_CACHE.lock().unwrap();
        if let Some((p, lo, hi)) = guard.as_ref() {
            if *p >= prec {
                return (lo.clone(), hi.clone());
            }
        }
    }
    // ln 2 = 2 atanh(1/3); the scaled point floor(2^prec / 3) is within one
    // ulp of the exact argument, with atanh' bounded by 9/8 there.
    let z = (BigInt::one() << prec).div_floor(&BigInt::from(3));
    let (sum, slack) = atanh_scaled(&z, prec);
    let denom = BigInt::one() << prec;
    let lo = BigRational::new(2 * (&sum - BigInt::from(2)), denom.clone());
    let hi = BigRational::new(2 * (&sum + slack + BigInt::from(2)), denom);
    let mut guard = LN2_CACHE.lock().unwrap();
    *guard = Some((prec, lo.clone(), hi.clone()));
    (lo, hi)
}

/// Sound enclosure of ln(x) for rational x > 0.
///
/// Works on the dyadic mantissa, so the cost is O(prec) regardless of how
/// many bits x has; huge convergent denominators are fine.
pub fn ln_enclosure(x: &BigRational, prec: u32) -> Result<(BigRational, BigRational)> {
    if !x.is_positive() {
        return Err(Error::validation("ln requires a positive argument"));
    }
    if x.is_one() {
        return Ok((BigRational::zero(), BigRational::zero()));
    }
    let e = dyadic_exponent(x);
    // m = x / 2^e in [1, 2)
    let m = x * pow2_rat(-e);
    let big_m = floor_scaled(&m, prec);
    let one_scaled = BigInt::one() << prec;
    // z = (m - 1)/(m + 1) in [0, 1/3), scaled; floor errors below 2 ulps.
    let z = ((&big_m - &one_scaled) << prec).div_floor(&(&big_m + &one_scaled));
    let (sum, slack) = atanh_scaled(&z, prec);
    let denom = BigInt::one() << prec;
    // mantissa floor + division floor shift z by < 2 ulps; atanh' <= 9/8.
    let ln_m_lo = BigRational::new(2 * (&sum - BigInt::from(4)), denom.clone());
    let ln_m_hi = BigRational::new(2 * (&sum + slack + BigInt::from(4)), denom);

    if e == 0 {
        return Ok((ln_m_lo, ln_m_hi));
    }
    let extra = 64 - (e.unsigned_abs().leading_zeros());
    let (l2lo, l2hi) = ln2_enclosure(prec + extra + 4);
    let e_rat = BigRational::from_integer(BigInt::from(e));
    let (tlo, thi) = if e > 0 {
        (&e_rat * l2lo, &e_rat * l2hi)
    } else {
        (&e_rat * l2hi, &e_rat * l2lo)
    };
    Ok((tlo + ln_m_lo, thi + ln_m_hi))
}

/// Sound enclosure of exp(x) for rational x with |x| <= 2^20.
pub fn exp_enclosure(x: &BigRational, prec: u32) -> Result<(BigRational, BigRational)> {
    if x.abs() > BigRational::from_integer(BigInt::from(1u64 << 20)) {
        return Err(Error::precision("exp argument out of supported range"));
    }
    let xf = x.to_f64().unwrap_or(0.0);
    let k = (xf / std::f64::consts::LN_2).round() as i64;
    let lp = prec + 40;
    let (l2lo, l2hi) = ln2_enclosure(lp);
    let k_rat = BigRational::from_integer(BigInt::from(k));
    let (klo, khi) = if k >= 0 {
        (&k_rat * &l2lo, &k_rat * &l2hi)
    } else {
        (&k_rat * &l2hi, &k_rat * &l2lo)
    };
    // r = x - k ln2, |r| <= 0.75 by the choice of k
    let r_lo = x - &khi;
    let r_hi = x - &klo;
    let r = floor_scaled(&r_lo, prec);
    let three_quarters = BigInt::from(3) << (prec - 2);
    if r.abs() > three_quarters {
        return Err(Error::precision("exp range reduction failed"));
    }
    let terms = std::cmp::max(24, prec as usize / 3);
    let one_scaled = BigInt::one() << prec;
    let mut t = one_scaled.clone();
    let mut sum = t.clone();
    for j in 1..terms {
        t = ((&t * &r) >> prec).div_floor(&BigInt::from(j));
        if t.is_zero() {
            break;
        }
        sum += &t;
    }
    // Floor losses, tail, and the width of the reduced interval r, all in
    // ulps; exp(r) <= 2.2 on the reduced range bounds the derivative.
    let input_width = ceil_scaled(&(&r_hi - &r_lo), prec) + BigInt::from(1);
    let slack = BigInt::from(4 * terms + 16) + BigInt::from(3) * input_width;
    let denom = BigInt::one() << prec;
    let lo = BigRational::new(&sum - &slack, denom.clone());
    let hi = BigRational::new(&sum + &slack, denom);
    let lo = if lo.is_positive() { lo } else { BigRational::zero() };
    let scale = pow2_rat(k);
    Ok((lo * &scale, hi * &scale))
}

/// Sound enclosure of sqrt(x) for rational x >= 0.
pub fn sqrt_enclosure(x: &BigRational, prec: u32) -> Result<(BigRational, BigRational)> {
    if x.is_negative() {
        return Err(Error::validation("sqrt requires a nonnegative argument"));
    }
    let scaled = floor_scaled(x, 2 * prec);
    let (_, mag) = scaled.into_parts();
    let root = mag.sqrt();
    let denom = BigInt::one() << prec;
    let lo = BigRational::new(BigInt::from(root.clone()), denom.clone());
    let hi = BigRational::new(BigInt::from(root + BigUint::one()), denom);
    Ok((lo, hi))
}

/// Decimal rendering with `sig` significant digits, deterministic.
pub fn decimal_string(x: &BigRational, sig: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // e10 with 10^e10 <= ax < 10^{e10+1}
    let mut e10: i64 = {
        let nbits = ax.numer().bits() as i64 - ax.denom().bits() as i64;
        (nbits as f64 * 0.30103).floor() as i64
    };
    let ten = BigInt::from(10);
    let pow10 = |p: i64| -> BigRational {
        if p >= 0 {
            BigRational::from_integer(ten.pow(p as u32))
        } else {
            BigRational::new(BigInt::one(), ten.pow((-p) as u32))
        }
    };
    loop {
        if ax < pow10(e10) {
            e10 -= 1;
            continue;
        }
        if ax >= pow10(e10 + 1) {
            e10 += 1;
            continue;
        }
        break;
    }
    // round-half-up at sig digits
    let scaled = &ax * pow10(sig as i64 - 1 - e10);
    let two = BigInt::from(2);
    let mut digits =
        (scaled.numer() * &two + scaled.denom()).div_floor(&(scaled.denom() * &two));
    let mut ds = digits.to_string();
    if ds.len() as u32 > sig {
        // rounding overflowed to the next power of ten
        e10 += 1;
        digits = digits.div_floor(&ten);
        ds = digits.to_string();
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if (-4..=(sig as i64 + 5)).contains(&e10) {
        if e10 >= 0 {
            let ip = (e10 + 1) as usize;
            if ip >= ds.len() {
                out.push_str(&ds);
                out.push_str(&"0".repeat(ip - ds.len()));
            } else {
                out.push_str(&ds[..ip]);
                out.push('.');
                out.push_str(&ds[ip..]);
            }
        } else {
            out.push_str("0.");
            out.push_str(&"0".repeat((-e10 - 1) as usize));
            out.push_str(&ds);
        }
        // trim trailing zeros after a decimal point
        if out.contains('.') {
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
    } else {
        out.push_str(&ds[..1]);
        if ds.len() > 1 {
            out.push('.');
            out.push_str(&ds[1..]);
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
        out.push('e');
        out.push_str(&e10.to_string());
    }
    out
}

/// Parse "p/q" or "p" into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::validation(format!("invalid integer `{t}`")))
    };
    if let Some((p, q)) = s.split_once('/') {
        let den = parse_int(q)?;
        if den.is_zero() {
            return Err(Error::validation("zero denominator"));
        }
        Ok(BigRational::new(parse_int(p)?, den))
    } else {
        Ok(BigRational::from_integer(parse_int(s)?))
    }
}

/// Render as "p/q" (or "p" for integers).
pub fn rational_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn big_rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_from_biguint(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}
