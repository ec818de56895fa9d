//! Scalar arithmetic over the supported fields.
//!
//! A [`Field`] is a small `Copy` descriptor; the scalars themselves are
//! [`Elem`] payloads whose interpretation depends on the descriptor.
//! Matrices store bare payloads next to one descriptor and do arithmetic
//! through the `Field` methods, which assume (and debug-assert) that the
//! payloads belong to the field. [`FieldValue`] pairs a payload with its
//! descriptor and checks compatibility on every operation.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Largest modulus accepted for prime fields (exclusive).
pub const MAX_PRIME: u64 = 1 << 61;

/// Which field a scalar lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    /// GF(p) for a prime `p < 2^61`.
    Prime(u64),
    /// GF(4) = GF(2)[w] / (w^2 + w + 1).
    Gf4,
    /// Arbitrary-precision rationals.
    Rational,
    /// IEEE-754 doubles. Approximate; exact algorithms refuse it.
    F64,
}

/// GF(4) symbols are encoded as two bits `b1 b0` meaning `b1·w + b0`.
const GF4_MUL: [[u8; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
const GF4_INV: [u8; 4] = [0, 1, 3, 2];

/// Canonical payload of a field element.
#[derive(Clone, Debug, PartialEq)]
pub enum Elem {
    /// Least non-negative residue.
    Residue(u64),
    /// GF(4) symbol, `0..4`.
    Gf4(u8),
    /// Reduced fraction with positive denominator.
    Rational(BigRational),
    Float(f64),
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl Field {
    /// GF(p), rejecting composite or oversized moduli.
    pub fn prime(p: u64) -> Result<Field> {
        if p >= MAX_PRIME {
            return Err(Error::InvalidField(format!(
                "modulus {p} is not below 2^61"
            )));
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(Field::Prime(p))
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, Field::F64)
    }

    /// Number of elements, `None` for infinite fields.
    pub fn order(self) -> Option<u64> {
        match self {
            Field::Prime(p) => Some(p),
            Field::Gf4 => Some(4),
            Field::Rational | Field::F64 => None,
        }
    }

    pub fn characteristic(self) -> u64 {
        match self {
            Field::Prime(p) => p,
            Field::Gf4 => 2,
            Field::Rational | Field::F64 => 0,
        }
    }

    /// Errors unless the field supports exact algorithms.
    pub fn require_exact(self) -> Result<()> {
        if self.is_exact() {
            Ok(())
        } else {
            Err(Error::UnsupportedField(self))
        }
    }

    pub fn zero(self) -> Elem {
        match self {
            Field::Prime(_) => Elem::Residue(0),
            Field::Gf4 => Elem::Gf4(0),
            Field::Rational => Elem::Rational(BigRational::zero()),
            Field::F64 => Elem::Float(0.0),
        }
    }

    pub fn one(self) -> Elem {
        match self {
            Field::Prime(p) => Elem::Residue(1 % p),
            Field::Gf4 => Elem::Gf4(1),
            Field::Rational => Elem::Rational(BigRational::one()),
            Field::F64 => Elem::Float(1.0),
        }
    }

    /// Image of `k` under the ring map from the integers.
    pub fn from_int(self, k: i64) -> Elem {
        match self {
            Field::Prime(p) => Elem::Residue((k as i128).rem_euclid(p as i128) as u64),
            Field::Gf4 => Elem::Gf4((k.rem_euclid(2)) as u8),
            Field::Rational => Elem::Rational(BigRational::from_integer(BigInt::from(k))),
            Field::F64 => Elem::Float(k as f64),
        }
    }

    /// Exact rational embedding, only for the rational field.
    pub fn from_rational(self, q: BigRational) -> Result<Elem> {
        match self {
            Field::Rational => Ok(Elem::Rational(q)),
            other => Err(Error::UnsupportedField(other)),
        }
    }

    pub fn is_zero(self, a: &Elem) -> bool {
        match a {
            Elem::Residue(v) => *v == 0,
            Elem::Gf4(v) => *v == 0,
            Elem::Rational(q) => q.is_zero(),
            Elem::Float(x) => *x == 0.0,
        }
    }

    pub fn is_one(self, a: &Elem) -> bool {
        *a == self.one()
    }

    /// True when `a` is a canonical payload of this field.
    pub fn contains(self, a: &Elem) -> bool {
        match (self, a) {
            (Field::Prime(p), Elem::Residue(v)) => *v < p,
            (Field::Gf4, Elem::Gf4(v)) => *v < 4,
            (Field::Rational, Elem::Rational(q)) => q.denom().is_positive(),
            (Field::F64, Elem::Float(_)) => true,
            _ => false,
        }
    }

    pub fn add(self, a: &Elem, b: &Elem) -> Elem {
        debug_assert!(self.contains(a) && self.contains(b));
        match (a, b) {
            (Elem::Residue(x), Elem::Residue(y)) => {
                let p = self.modulus();
                let s = x + y;
                Elem::Residue(if s >= p { s - p } else { s })
            }
            (Elem::Gf4(x), Elem::Gf4(y)) => Elem::Gf4(x ^ y),
            (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x + y),
            (Elem::Float(x), Elem::Float(y)) => Elem::Float(x + y),
            _ => unreachable!("payloads from different fields"),
        }
    }

    pub fn neg(self, a: &Elem) -> Elem {
        match a {
            Elem::Residue(x) => {
                let p = self.modulus();
                Elem::Residue(if *x == 0 { 0 } else { p - x })
            }
            Elem::Gf4(x) => Elem::Gf4(*x),
            Elem::Rational(x) => Elem::Rational(-x),
            Elem::Float(x) => Elem::Float(-x),
        }
    }

    pub fn sub(self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(self, a: &Elem, b: &Elem) -> Elem {
        debug_assert!(self.contains(a) && self.contains(b));
        match (a, b) {
            (Elem::Residue(x), Elem::Residue(y)) => Elem::Residue(mul_mod(*x, *y, self.modulus())),
            (Elem::Gf4(x), Elem::Gf4(y)) => Elem::Gf4(GF4_MUL[*x as usize][*y as usize]),
            (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x * y),
            (Elem::Float(x), Elem::Float(y)) => Elem::Float(x * y),
            _ => unreachable!("payloads from different fields"),
        }
    }

    pub fn inv(self, a: &Elem) -> Result<Elem> {
        if self.is_zero(a) {
            return Err(Error::DivideByZero);
        }
        Ok(match a {
            Elem::Residue(x) => {
                let p = self.modulus();
                Elem::Residue(pow_mod(*x, p - 2, p))
            }
            Elem::Gf4(x) => Elem::Gf4(GF4_INV[*x as usize]),
            Elem::Rational(x) => Elem::Rational(x.recip()),
            Elem::Float(x) => Elem::Float(1.0 / x),
        })
    }

    pub fn div(self, a: &Elem, b: &Elem) -> Result<Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(self, a: &Elem, mut exp: u64) -> Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }

    fn modulus(self) -> u64 {
        match self {
            Field::Prime(p) => p,
            _ => unreachable!("modulus of a non-prime field"),
        }
    }

    /// All elements in canonical order, for finite fields only.
    pub fn elements(self) -> Option<Vec<Elem>> {
        match self {
            Field::Prime(p) => Some((0..p).map(Elem::Residue).collect()),
            Field::Gf4 => Some((0..4).map(Elem::Gf4).collect()),
            _ => None,
        }
    }

    /// Nonzero elements in canonical order (finite fields only).
    pub fn units(self) -> Option<Vec<Elem>> {
        self.elements()
            .map(|all| all.into_iter().filter(|e| !self.is_zero(e)).collect())
    }

    /// Uniform element for finite fields; a small fraction for the
    /// rationals; uniform in `[-1, 1]` for floats.
    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> Elem {
        match self {
            Field::Prime(p) => Elem::Residue(rng.gen_range(0..p)),
            Field::Gf4 => Elem::Gf4(rng.gen_range(0..4)),
            Field::Rational => {
                let num: i64 = rng.gen_range(-4..=4);
                let den: i64 = if rng.gen_bool(0.25) {
                    rng.gen_range(1..=3)
                } else {
                    1
                };
                Elem::Rational(BigRational::new(num.into(), den.into()))
            }
            Field::F64 => Elem::Float(rng.gen_range(-1.0..=1.0)),
        }
    }

    /// Random nonzero element.
    pub fn random_unit<R: Rng + ?Sized>(self, rng: &mut R) -> Elem {
        loop {
            let e = self.random(rng);
            if !self.is_zero(&e) {
                return e;
            }
        }
    }

    /// Parse a scalar literal: integers for GF(p) (reduced), `0`, `1`,
    /// `w`, `w+1` for GF(4), `a` or `a/b` for rationals, decimal floats.
    pub fn parse_elem(self, literal: &str) -> Result<Elem> {
        let bad = || Error::InvalidLiteral {
            field: self,
            literal: literal.to_string(),
        };
        let s = literal.trim();
        match self {
            Field::Prime(p) => {
                let v: i128 = s.parse().map_err(|_| bad())?;
                Ok(Elem::Residue(v.rem_euclid(p as i128) as u64))
            }
            Field::Gf4 => match s {
                "0" => Ok(Elem::Gf4(0)),
                "1" => Ok(Elem::Gf4(1)),
                "w" => Ok(Elem::Gf4(2)),
                "w+1" | "1+w" => Ok(Elem::Gf4(3)),
                _ => Err(bad()),
            },
            Field::Rational => {
                let (num, den) = match s.split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (s, "1"),
                };
                let num: BigInt = num.parse().map_err(|_| bad())?;
                let den: BigInt = den.parse().map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(bad());
                }
                Ok(Elem::Rational(BigRational::new(num, den)))
            }
            Field::F64 => {
                let x: f64 = s.parse().map_err(|_| bad())?;
                if !x.is_finite() {
                    return Err(bad());
                }
                Ok(Elem::Float(x))
            }
        }
    }

    /// Canonical literal; inverse of [`Field::parse_elem`] on exact fields.
    pub fn format_elem(self, a: &Elem) -> String {
        match a {
            Elem::Residue(v) => v.to_string(),
            Elem::Gf4(v) => ["0", "1", "w", "w+1"][*v as usize].to_string(),
            Elem::Rational(q) => {
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Elem::Float(x) => x.to_string(),
        }
    }

    /// Float approximation, used when emitting networks and measuring error.
    pub fn to_f64(self, a: &Elem) -> Result<f64> {
        match a {
            Elem::Rational(q) => Ok(rational_to_f64(q)),
            Elem::Float(x) => Ok(*x),
            _ => Err(Error::UnsupportedField(self)),
        }
    }
}

/// Nearest f64, also for numerators and denominators beyond the f64 range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Prime(p) => write!(f, "gf:{p}"),
            Field::Gf4 => f.write_str("gf:4"),
            Field::Rational => f.write_str("rational"),
            Field::F64 => f.write_str("f64"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Field> {
        match s {
            "rational" => Ok(Field::Rational),
            "f64" => Ok(Field::F64),
            "gf:4" => Ok(Field::Gf4),
            _ => {
                let digits = s
                    .strip_prefix("gf:")
                    .ok_or_else(|| Error::InvalidField(s.to_string()))?;
                let p: u64 = digits
                    .parse()
                    .map_err(|_| Error::InvalidField(s.to_string()))?;
                Field::prime(p)
            }
        }
    }
}

impl serde::Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Field, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A scalar tagged with its field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldValue {
    field: Field,
    elem: Elem,
}

/// The four operations accepted by [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldValue {
    pub fn new(field: Field, elem: Elem) -> Result<FieldValue> {
        if !field.contains(&elem) {
            return Err(Error::InvalidLiteral {
                field,
                literal: format!("{elem:?}"),
            });
        }
        Ok(FieldValue { field, elem })
    }

    pub fn from_int(k: i64, field: Field) -> FieldValue {
        FieldValue {
            field,
            elem: field.from_int(k),
        }
    }

    pub fn parse(field: Field, literal: &str) -> Result<FieldValue> {
        Ok(FieldValue {
            field,
            elem: field.parse_elem(literal)?,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn elem(&self) -> &Elem {
        &self.elem
    }

    pub fn into_elem(self) -> Elem {
        self.elem
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero(&self.elem)
    }

    pub fn is_one(&self) -> bool {
        self.field.is_one(&self.elem)
    }

    fn same_field(&self, other: &FieldValue) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch(self.field, other.field))
        }
    }

    pub fn add(&self, other: &FieldValue) -> Result<FieldValue> {
        field_arith(self, other, ArithOp::Add)
    }

    pub fn sub(&self, other: &FieldValue) -> Result<FieldValue> {
        field_arith(self, other, ArithOp::Sub)
    }

    pub fn mul(&self, other: &FieldValue) -> Result<FieldValue> {
        field_arith(self, other, ArithOp::Mul)
    }

    pub fn div(&self, other: &FieldValue) -> Result<FieldValue> {
        field_arith(self, other, ArithOp::Div)
    }

    pub fn inv(&self) -> Result<FieldValue> {
        Ok(FieldValue {
            field: self.field,
            elem: self.field.inv(&self.elem)?,
        })
    }

    pub fn neg(&self) -> FieldValue {
        FieldValue {
            field: self.field,
            elem: self.field.neg(&self.elem),
        }
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format_elem(&self.elem))
    }
}

/// Checked scalar arithmetic between two tagged values.
pub fn field_arith(a: &FieldValue, b: &FieldValue, op: ArithOp) -> Result<FieldValue> {
    a.same_field(b)?;
    let f = a.field;
    let elem = match op {
        ArithOp::Add => f.add(&a.elem, &b.elem),
        ArithOp::Sub => f.sub(&a.elem, &b.elem),
        ArithOp::Mul => f.mul(&a.elem, &b.elem),
        ArithOp::Div => f.div(&a.elem, &b.elem)?,
    };
    Ok(FieldValue { field: f, elem })
}

/// Smallest canonical `(g, h)` with `g, h, gh` all different from 1 (and
/// nonzero). Needs at least four elements.
pub fn pick_gh(field: Field) -> Result<(FieldValue, FieldValue)> {
    let candidates: Vec<Elem> = match field.units() {
        Some(units) => units,
        // Infinite fields: 2, 3, ... always works on the first try.
        None => (2..6).map(|k| field.from_int(k)).collect(),
    };
    let candidates: Vec<Elem> = candidates
        .into_iter()
        .filter(|e| !field.is_one(e))
        .collect();
    for g in &candidates {
        for h in &candidates {
            let gh = field.mul(g, h);
            if !field.is_one(&gh) && !field.is_zero(&gh) {
                return Ok((
                    FieldValue {
                        field,
                        elem: g.clone(),
                    },
                    FieldValue {
                        field,
                        elem: h.clone(),
                    },
                ));
            }
        }
    }
    Err(Error::FieldTooSmall(field))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(field: Field, s: &str) -> FieldValue {
        FieldValue::parse(field, s).unwrap()
    }

    #[test]
    fn arith_examples() {
        let gf5 = Field::Prime(5);
        assert_eq!(v(gf5, "3").mul(&v(gf5, "4")).unwrap(), v(gf5, "2"));
        assert_eq!(
            v(Field::Gf4, "w").mul(&v(Field::Gf4, "w")).unwrap(),
            v(Field::Gf4, "w+1")
        );
        let q = Field::Rational;
        assert_eq!(v(q, "1/2").add(&v(q, "1/3")).unwrap(), v(q, "5/6"));
    }

    #[test]
    fn arith_errors() {
        let gf5 = Field::Prime(5);
        assert_eq!(v(gf5, "3").div(&v(gf5, "0")), Err(Error::DivideByZero));
        assert_eq!(
            v(gf5, "3").add(&v(Field::Prime(7), "3")),
            Err(Error::FieldMismatch(Field::Prime(5), Field::Prime(7)))
        );
    }

    #[test]
    fn from_int_examples() {
        assert!(FieldValue::from_int(2, Field::Prime(2)).is_zero());
        assert_eq!(
            FieldValue::from_int(5, Field::Prime(3)),
            v(Field::Prime(3), "2")
        );
        assert_eq!(
            FieldValue::from_int(-1, Field::Rational),
            v(Field::Rational, "-1")
        );
        assert_eq!(
            FieldValue::from_int(-1, Field::Prime(7)),
            v(Field::Prime(7), "6")
        );
    }

    #[test]
    fn pick_gh_examples() {
        let (g, h) = pick_gh(Field::Gf4).unwrap();
        assert_eq!((g.to_string(), h.to_string()), ("w".into(), "w".into()));
        let (g, h) = pick_gh(Field::Prime(5)).unwrap();
        assert_eq!((g.to_string(), h.to_string()), ("2".into(), "2".into()));
        assert_eq!(
            pick_gh(Field::Prime(3)),
            Err(Error::FieldTooSmall(Field::Prime(3)))
        );
        assert_eq!(
            pick_gh(Field::Prime(2)),
            Err(Error::FieldTooSmall(Field::Prime(2)))
        );
    }

    #[test]
    fn field_spellings() {
        for s in [
            "rational",
            "f64",
            "gf:4",
            "gf:2",
            "gf:97",
            "gf:2305843009213693951",
        ] {
            assert_eq!(s.parse::<Field>().unwrap().to_string(), s);
        }
        for s in [
            "gf:1",
            "gf:9",
            "gf:",
            "GF:5",
            "real",
            "gf:4611686018427387847",
        ] {
            assert!(s.parse::<Field>().is_err(), "{s}");
        }
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| {
            n >= 2
                && (2..n)
                    .take_while(|d| d * d <= n)
                    .all(|d| !n.is_multiple_of(d))
        };
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "{n}");
        }
        assert!(is_prime((1 << 61) - 1));
    }

    #[test]
    fn literal_round_trip() {
        let q = Field::Rational;
        for s in ["0", "-7", "3/4", "-12345678901234567890123/7"] {
            assert_eq!(q.format_elem(&q.parse_elem(s).unwrap()), s);
        }
        assert_eq!(q.format_elem(&q.parse_elem("4/6").unwrap()), "2/3");
        assert_eq!(q.format_elem(&q.parse_elem("3/-6").unwrap()), "-1/2");
        assert!(q.parse_elem("1/0").is_err());
        for s in ["0", "1", "w", "w+1"] {
            assert_eq!(
                Field::Gf4.format_elem(&Field::Gf4.parse_elem(s).unwrap()),
                s
            );
        }
        assert!(Field::Gf4.parse_elem("2").is_err());
        for bad in ["NaN", "inf", "-inf", "1e999"] {
            assert!(Field::F64.parse_elem(bad).is_err(), "{bad}");
        }
        assert_eq!(Field::F64.parse_elem("-0.25").unwrap(), Elem::Float(-0.25));
    }

    fn axioms_exhaustive(field: Field) {
        let els = field.elements().unwrap();
        let zero = field.zero();
        let one = field.one();
        for a in &els {
            assert_eq!(field.add(a, &zero), *a);
            assert_eq!(field.mul(a, &one), *a);
            assert_eq!(field.add(a, &field.neg(a)), zero);
            if !field.is_zero(a) {
                assert_eq!(field.mul(a, &field.inv(a).unwrap()), one);
            }
            for b in &els {
                assert_eq!(field.add(a, b), field.add(b, a));
                assert_eq!(field.mul(a, b), field.mul(b, a));
                for c in &els {
                    assert_eq!(
                        field.add(&field.add(a, b), c),
                        field.add(a, &field.add(b, c))
                    );
                    assert_eq!(
                        field.mul(&field.mul(a, b), c),
                        field.mul(a, &field.mul(b, c))
                    );
                    assert_eq!(
                        field.mul(a, &field.add(b, c)),
                        field.add(&field.mul(a, b), &field.mul(a, c))
                    );
                }
            }
        }
    }

    #[test]
    fn field_axioms_small_fields() {
        for field in [
            Field::Prime(2),
            Field::Prime(3),
            Field::Gf4,
            Field::Prime(5),
        ] {
            axioms_exhaustive(field);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rat() -> impl Strategy<Value = Elem> {
            (-1000i64..1000, 1i64..50)
                .prop_map(|(n, d)| Elem::Rational(BigRational::new(n.into(), d.into())))
        }

        proptest! {
            #[test]
            fn rational_axioms(a in rat(), b in rat(), c in rat()) {
                let f = Field::Rational;
                prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
                prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
                if !f.is_zero(&b) {
                    prop_assert_eq!(f.mul(&f.div(&a, &b).unwrap(), &b), a);
                }
            }

            #[test]
            fn from_int_is_ring_hom(a in -100i64..=100, b in -100i64..=100) {
                for f in [Field::Prime(2), Field::Prime(3), Field::Gf4, Field::Prime(5), Field::Prime(97), Field::Rational] {
                    prop_assert_eq!(f.from_int(a + b), f.add(&f.from_int(a), &f.from_int(b)));
                    prop_assert_eq!(f.from_int(a * b), f.mul(&f.from_int(a), &f.from_int(b)));
                }
            }

            #[test]
            fn pick_gh_constraints(p in 5u64..=97) {
                prop_assume!(is_prime(p));
                let f = Field::Prime(p);
                let (g, h) = pick_gh(f).unwrap();
                let gh = g.mul(&h).unwrap();
                prop_assert!(!g.is_one() && !h.is_one() && !gh.is_one());
                prop_assert!(!g.is_zero() && !h.is_zero());
            }
        }
    }
}
