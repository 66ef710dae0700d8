use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::GeomError;

pub type Rational = BigRational;

/// Parses a decimal literal such as `"-23.1"`, `"1e-6"` or `"2.5E+3"` exactly.
pub fn parse_decimal(s: &str) -> Result<Rational, GeomError> {
    let bad = || GeomError::BadDecimal(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(k) => {
            let e: i64 = t[k + 1..].parse().map_err(|_| bad())?;
            (&t[..k], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(k) => (&digits[..k], &digits[k + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if exponent.abs() > 4096 {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Parses either a decimal literal or a fraction `p/q` of decimal literals.
pub fn parse_rational(s: &str) -> Result<Rational, GeomError> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_decimal(q)?;
            if q.is_zero() {
                return Err(GeomError::BadDecimal(s.to_string()));
            }
            Ok(parse_decimal(p)? / q)
        }
        None => parse_decimal(s),
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite double")
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational lower and upper bounds of `sqrt(q)` with `hi - lo <= 2^-bits`.
pub fn sqrt_bounds(q: &Rational, bits: u32) -> (Rational, Rational) {
    assert!(!q.is_negative(), "square root of a negative rational");
    if q.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    let guess = from_f64(to_f64(q).sqrt());
    let (mut lo, mut hi) = if &guess * &guess <= *q {
        let mut h = guess.clone() + Rational::one();
        while &h * &h < *q {
            h = h * int(2);
        }
        (guess, h)
    } else {
        (Rational::zero(), guess)
    };
    let width = Rational::new(BigInt::one(), BigInt::one() << bits);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / int(2);
        let mid = round_to_bits(&mid, bits + 4);
        if &mid * &mid <= *q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn round_to_bits(q: &Rational, bits: u32) -> Rational {
    let den = BigInt::one() << bits;
    let num = (q * Rational::from_integer(den.clone())).floor().to_integer();
    Rational::new(num, den)
}

/// Formats a rational as `p/q` (or `p` when integral).
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A planar point with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointR2 {
    pub x: Rational,
    pub y: Rational,
}

impl PointR2 {
    pub fn new(x: Rational, y: Rational) -> Self {
        PointR2 { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        PointR2 { x: int(x), y: int(y) }
    }

    pub fn parse(x: &str, y: &str) -> Result<Self, GeomError> {
        Ok(PointR2 { x: parse_decimal(x)?, y: parse_decimal(y)? })
    }

    pub fn origin() -> Self {
        PointR2 { x: Rational::zero(), y: Rational::zero() }
    }

    pub fn dot(&self, other: &PointR2) -> Rational {
        &self.x * &other.x + &self.y * &other.y
    }

    pub fn cross(&self, other: &PointR2) -> Rational {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn norm_sq(&self) -> Rational {
        self.dot(self)
    }

    pub fn scale(&self, k: &Rational) -> PointR2 {
        PointR2 { x: &self.x * k, y: &self.y * k }
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn to_f64(&self) -> nalgebra::Vector2<f64> {
        nalgebra::Vector2::new(to_f64(&self.x), to_f64(&self.y))
    }

    pub fn from_f64(p: &nalgebra::Vector2<f64>) -> Self {
        PointR2 { x: from_f64(p.x), y: from_f64(p.y) }
    }
}

impl fmt::Display for PointR2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_rational(&self.x), fmt_rational(&self.y))
    }
}

/// Serializes a rational as its exact decimal-or-fraction string.
pub fn serialize_rational<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(q))
}

pub fn serialize_opt_rational<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&fmt_rational(q)),
        None => s.serialize_none(),
    }
}

impl Serialize for PointR2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [fmt_rational(&self.x), fmt_rational(&self.y)].serialize(s)
    }
}

impl<'a> Sub<&'a PointR2> for &'a PointR2 {
    type Output = PointR2;
    fn sub(self, o: &PointR2) -> PointR2 {
        PointR2 { x: &self.x - &o.x, y: &self.y - &o.y }
    }
}

impl<'a> Add<&'a PointR2> for &'a PointR2 {
    type Output = PointR2;
    fn add(self, o: &PointR2) -> PointR2 {
        PointR2 { x: &self.x + &o.x, y: &self.y + &o.y }
    }
}

impl Neg for &PointR2 {
    type Output = PointR2;
    fn neg(self) -> PointR2 {
        PointR2 { x: -&self.x, y: -&self.y }
    }
}

impl Mul<&Rational> for &PointR2 {
    type Output = PointR2;
    fn mul(self, k: &Rational) -> PointR2 {
        self.scale(k)
    }
}

/// Squared distance from `p` to the closed segment `ab`, exactly.
pub fn dist_sq_point_segment(p: &PointR2, a: &PointR2, b: &PointR2) -> Rational {
    let ab = b - a;
    let ap = p - a;
    let len = ab.norm_sq();
    if len.is_zero() {
        return ap.norm_sq();
    }
    let t = ap.dot(&ab);
    if !t.is_positive() {
        return ap.norm_sq();
    }
    if t >= len {
        return (p - b).norm_sq();
    }
    let c = ap.cross(&ab);
    &c * &c / len
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("23.1").unwrap(), rat(231, 10));
        assert_eq!(parse_decimal("-0.1").unwrap(), rat(-1, 10));
        assert_eq!(parse_decimal("1e-6").unwrap(), rat(1, 1_000_000));
        assert_eq!(parse_decimal("2.5E+3").unwrap(), int(2500));
        assert_eq!(parse_decimal(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn sqrt_bounds_bracket() {
        let (lo, hi) = sqrt_bounds(&int(3), 100);
        assert!(&lo * &lo <= int(3));
        assert!(&hi * &hi >= int(3));
        assert!(&hi - &lo <= Rational::new(BigInt::one(), BigInt::one() << 100));
        let (lo, hi) = sqrt_bounds(&int(78400), 40);
        assert!(lo <= int(280) && int(280) <= hi);
    }

    #[test]
    fn point_segment_distance() {
        let a = PointR2::from_ints(0, 0);
        let b = PointR2::from_ints(2, 0);
        assert_eq!(dist_sq_point_segment(&PointR2::from_ints(1, 3), &a, &b), int(9));
        assert_eq!(dist_sq_point_segment(&PointR2::from_ints(-1, 1), &a, &b), int(2));
        assert_eq!(dist_sq_point_segment(&PointR2::from_ints(3, 0), &a, &b), int(1));
    }
}
