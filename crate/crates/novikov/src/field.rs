//! Exact scalars: ℚ, ℚ(i), ℚ(√d) and prime fields.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("cannot parse scalar {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("unknown field tag {0:?} (expected q, qi, qsqrt:d or fp:p)")]
    UnknownField(String),
    #[error("{0} cannot be represented in {1}")]
    NotRepresentable(String, Field),
}

/// A concrete coefficient field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Q,
    Qi,
    /// ℚ(√d) for a square-free d ≥ 2.
    Qsqrt(i64),
    /// Prime field of order p, p < 2³¹.
    Fp(u64),
}

impl Field {
    pub fn is_finite(&self) -> bool {
        matches!(self, Field::Fp(_))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Fp(p) => *p,
            _ => 0,
        }
    }

    pub fn tag(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => write!(f, "q"),
            Field::Qi => write!(f, "qi"),
            Field::Qsqrt(d) => write!(f, "qsqrt:{d}"),
            Field::Fp(p) => write!(f, "fp:{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn is_square_free(d: i64) -> bool {
    let mut k = 2i64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

impl FromStr for Field {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::UnknownField(s.to_string());
        let s = s.trim();
        match s {
            "q" => return Ok(Field::Q),
            "qi" => return Ok(Field::Qi),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("qsqrt:") {
            let d: i64 = rest.parse().map_err(|_| bad())?;
            if d < 2 || !is_square_free(d) {
                return Err(bad());
            }
            return Ok(Field::Qsqrt(d));
        }
        if let Some(rest) = s.strip_prefix("fp:") {
            let p: u64 = rest.parse().map_err(|_| bad())?;
            if p >= (1 << 31) || !is_prime(p) {
                return Err(bad());
            }
            return Ok(Field::Fp(p));
        }
        Err(bad())
    }
}

/// A field element tagged with its field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Elem {
    Q(BigRational),
    /// a + b·i
    Qi(BigRational, BigRational),
    /// a + b·√d
    Qs(i64, BigRational, BigRational),
    /// residue r in [0, p)
    Fp(u64, u64),
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn mod_inv(a: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        None
    } else {
        Some(mod_pow(a, p - 2, p))
    }
}

/// Square root mod an odd prime by Tonelli–Shanks.
fn mod_sqrt(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 || p == 2 {
        return Some(a);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = tt * tt % p;
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Some(r.min(p - r))
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

fn reduce_rational(q: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let n = q.numer().mod_floor(&pb).to_u64()?;
    let d = q.denom().mod_floor(&pb).to_u64()?;
    mod_inv(d, p).map(|di| n * di % p)
}

impl Elem {
    pub fn field(&self) -> Field {
        match self {
            Elem::Q(_) => Field::Q,
            Elem::Qi(..) => Field::Qi,
            Elem::Qs(d, ..) => Field::Qsqrt(*d),
            Elem::Fp(_, p) => Field::Fp(*p),
        }
    }

    pub fn zero(f: Field) -> Elem {
        Elem::from_int(f, 0)
    }

    pub fn one(f: Field) -> Elem {
        Elem::from_int(f, 1)
    }

    pub fn from_int(f: Field, k: i64) -> Elem {
        match f {
            Field::Q => Elem::Q(rat(k)),
            Field::Qi => Elem::Qi(rat(k), BigRational::zero()),
            Field::Qsqrt(d) => Elem::Qs(d, rat(k), BigRational::zero()),
            Field::Fp(p) => Elem::Fp(k.rem_euclid(p as i64) as u64, p),
        }
    }

    /// Embeds a rational; fails over F_p when the denominator vanishes mod p.
    pub fn from_rational(f: Field, q: &BigRational) -> Result<Elem, FieldError> {
        Ok(match f {
            Field::Q => Elem::Q(q.clone()),
            Field::Qi => Elem::Qi(q.clone(), BigRational::zero()),
            Field::Qsqrt(d) => Elem::Qs(d, q.clone(), BigRational::zero()),
            Field::Fp(p) => Elem::Fp(
                reduce_rational(q, p).ok_or_else(|| FieldError::NotRepresentable(q.to_string(), f))?,
                p,
            ),
        })
    }

    /// √d in ℚ(√d), i in ℚ(i).
    pub fn generator(f: Field) -> Option<Elem> {
        match f {
            Field::Qi => Some(Elem::Qi(BigRational::zero(), BigRational::one())),
            Field::Qsqrt(d) => Some(Elem::Qs(d, BigRational::zero(), BigRational::one())),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Elem::Q(a) => a.is_zero(),
            Elem::Qi(a, b) | Elem::Qs(_, a, b) => a.is_zero() && b.is_zero(),
            Elem::Fp(r, _) => *r == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Elem::Q(a) => a.is_one(),
            Elem::Qi(a, b) | Elem::Qs(_, a, b) => a.is_one() && b.is_zero(),
            Elem::Fp(r, _) => *r == 1,
        }
    }

    /// The value as a rational, if it lies in the prime subfield of a characteristic-zero field.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Elem::Q(a) => Some(a.clone()),
            Elem::Qi(a, b) | Elem::Qs(_, a, b) if b.is_zero() => Some(a.clone()),
            _ => None,
        }
    }

    /// Reduction of a rational element modulo p.
    pub fn reduce_mod(&self, p: u64) -> Result<Elem, FieldError> {
        match self {
            Elem::Fp(r, q) if *q == p => Ok(self.clone()),
            _ => {
                let q = self
                    .to_rational()
                    .ok_or_else(|| FieldError::NotRepresentable(self.to_string(), Field::Fp(p)))?;
                Elem::from_rational(Field::Fp(p), &q)
            }
        }
    }

    fn check(&self, other: &Elem) -> Result<(), FieldError> {
        let (a, b) = (self.field(), other.field());
        if a == b {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch(a, b))
        }
    }

    pub fn try_add(&self, other: &Elem) -> Result<Elem, FieldError> {
        self.check(other)?;
        Ok(match (self, other) {
            (Elem::Q(a), Elem::Q(b)) => Elem::Q(a + b),
            (Elem::Qi(a, b), Elem::Qi(c, e)) => Elem::Qi(a + c, b + e),
            (Elem::Qs(d, a, b), Elem::Qs(_, c, e)) => Elem::Qs(*d, a + c, b + e),
            (Elem::Fp(a, p), Elem::Fp(b, _)) => Elem::Fp((a + b) % p, *p),
            _ => unreachable!(),
        })
    }

    pub fn try_sub(&self, other: &Elem) -> Result<Elem, FieldError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Elem) -> Result<Elem, FieldError> {
        self.check(other)?;
        Ok(match (self, other) {
            (Elem::Q(a), Elem::Q(b)) => Elem::Q(a * b),
            (Elem::Qi(a, b), Elem::Qi(c, e)) => Elem::Qi(a * c - b * e, a * e + b * c),
            (Elem::Qs(d, a, b), Elem::Qs(_, c, e)) => {
                let dd = rat(*d);
                Elem::Qs(*d, a * c + dd * b * e, a * e + b * c)
            }
            (Elem::Fp(a, p), Elem::Fp(b, _)) => Elem::Fp(a * b % p, *p),
            _ => unreachable!(),
        })
    }

    pub fn neg_ref(&self) -> Elem {
        match self {
            Elem::Q(a) => Elem::Q(-a),
            Elem::Qi(a, b) => Elem::Qi(-a, -b),
            Elem::Qs(d, a, b) => Elem::Qs(*d, -a, -b),
            Elem::Fp(r, p) => Elem::Fp((p - r) % p, *p),
        }
    }

    pub fn inv(&self) -> Result<Elem, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match self {
            Elem::Q(a) => Elem::Q(a.recip()),
            Elem::Qi(a, b) => {
                let n = a * a + b * b;
                Elem::Qi(a / &n, -b / &n)
            }
            Elem::Qs(d, a, b) => {
                let n = a * a - rat(*d) * b * b;
                Elem::Qs(*d, a / &n, -b / &n)
            }
            Elem::Fp(r, p) => Elem::Fp(mod_inv(*r, *p).expect("nonzero residue"), *p),
        })
    }

    pub fn try_div(&self, other: &Elem) -> Result<Elem, FieldError> {
        self.check(other)?;
        self.try_mul(&other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Elem {
        let mut acc = Elem::one(self.field());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// A square root, if one exists in the field. The root returned has a
    /// nonnegative rational part; over F_p it is the smaller residue.
    pub fn try_sqrt(&self) -> Option<Elem> {
        match self {
            Elem::Q(a) => rational_sqrt(a).map(Elem::Q),
            Elem::Fp(r, p) => mod_sqrt(*r, *p).map(|s| Elem::Fp(s, *p)),
            Elem::Qi(a, b) => {
                if b.is_zero() {
                    return if a.is_negative() {
                        rational_sqrt(&-a).map(|y| Elem::Qi(BigRational::zero(), y))
                    } else {
                        rational_sqrt(a).map(|x| Elem::Qi(x, BigRational::zero()))
                    };
                }
                // x² − y² = a, 2xy = b
                let norm = rational_sqrt(&(a * a + b * b))?;
                let x = rational_sqrt(&((a + norm) / rat(2)))?;
                let y = b / (rat(2) * &x);
                Some(Elem::Qi(x, y))
            }
            Elem::Qs(d, a, b) => {
                let dd = rat(*d);
                if b.is_zero() {
                    if let Some(x) = rational_sqrt(a) {
                        return Some(Elem::Qs(*d, x, BigRational::zero()));
                    }
                    return rational_sqrt(&(a / &dd)).map(|y| Elem::Qs(*d, BigRational::zero(), y));
                }
                // x² + d y² = a, 2xy = b
                let disc = rational_sqrt(&(a * a - &dd * b * b))?;
                for x2 in [(a + &disc) / rat(2), (a - &disc) / rat(2)] {
                    if let Some(x) = rational_sqrt(&x2) {
                        if x.is_zero() {
                            continue;
                        }
                        let y = b / (rat(2) * &x);
                        return Some(Elem::Qs(*d, x, y));
                    }
                }
                None
            }
        }
    }

    /// Parses the JSON text encoding in the given field.
    pub fn parse(text: &str, field: Field) -> Result<Elem, FieldError> {
        let err = |reason: &str| FieldError::Parse { text: text.to_string(), reason: reason.to_string() };
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty"));
        }
        if let Some((k, p)) = s.split_once("mod") {
            let p: u64 = p.parse().map_err(|_| err("bad modulus"))?;
            if field != Field::Fp(p) {
                return Err(FieldError::FieldMismatch(Field::Fp(p), field));
            }
            let k: BigInt = k.parse().map_err(|_| err("bad residue"))?;
            let r = k.mod_floor(&BigInt::from(p)).to_u64().unwrap();
            return Ok(Elem::Fp(r, p));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for idx in 1..bytes.len() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && bytes[idx - 1] != b'(' {
                terms.push(&s[start..idx]);
                start = idx;
            }
        }
        terms.push(&s[start..]);
        let gen_suffix = match field {
            Field::Qi => Some("i".to_string()),
            Field::Qsqrt(d) => Some(format!("sqrt({d})")),
            _ => None,
        };
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        for term in terms {
            let (body, is_gen) = match &gen_suffix {
                Some(g) if term.ends_with(g.as_str()) => {
                    let body = term[..term.len() - g.len()].trim_end_matches('*');
                    (body, true)
                }
                _ => (term, false),
            };
            if term.contains("sqrt") && !is_gen {
                return Err(err("radical does not match the field"));
            }
            let body = body.strip_prefix('+').unwrap_or(body);
            let value = match body {
                "" => BigRational::one(),
                "-" => -BigRational::one(),
                _ => body.parse::<BigRational>().map_err(|_| err("bad rational"))?,
            };
            if is_gen {
                im += value;
            } else {
                re += value;
            }
        }
        match field {
            Field::Q => Ok(Elem::Q(re)),
            Field::Qi => Ok(Elem::Qi(re, im)),
            Field::Qsqrt(d) => Ok(Elem::Qs(d, re, im)),
            Field::Fp(_) => Elem::from_rational(field, &re),
        }
    }

    /// A small random element, used by property suites.
    pub fn random<R: Rng + ?Sized>(field: Field, rng: &mut R) -> Elem {
        let small = |rng: &mut R| {
            let n: i64 = rng.gen_range(-6..=6);
            let d: i64 = rng.gen_range(1..=4);
            BigRational::new(BigInt::from(n), BigInt::from(d))
        };
        match field {
            Field::Q => Elem::Q(small(rng)),
            Field::Qi => Elem::Qi(small(rng), small(rng)),
            Field::Qsqrt(d) => Elem::Qs(d, small(rng), small(rng)),
            Field::Fp(p) => Elem::Fp(rng.gen_range(0..p), p),
        }
    }

    /// Height of a rational value: max(|numerator|, denominator).
    pub fn height(&self) -> Option<BigInt> {
        let q = self.to_rational()?;
        Some(q.numer().abs().max(q.denom().clone()))
    }
}

fn fmt_gen_part(f: &mut fmt::Formatter<'_>, re: &BigRational, im: &BigRational, g: &str) -> fmt::Result {
    if im.is_zero() {
        return write!(f, "{re}");
    }
    if re.is_zero() {
        return write!(f, "{im}*{g}");
    }
    if im.is_negative() {
        write!(f, "{re}-{}*{g}", -im)
    } else {
        write!(f, "{re}+{im}*{g}")
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Q(a) => write!(f, "{a}"),
            Elem::Qi(a, b) => fmt_gen_part(f, a, b, "i"),
            Elem::Qs(d, a, b) => fmt_gen_part(f, a, b, &format!("sqrt({d})")),
            Elem::Fp(r, p) => write!(f, "{r} mod {p}"),
        }
    }
}

impl Add for &Elem {
    type Output = Elem;
    fn add(self, rhs: &Elem) -> Elem {
        self.try_add(rhs).expect("scalar addition across fields")
    }
}

impl Sub for &Elem {
    type Output = Elem;
    fn sub(self, rhs: &Elem) -> Elem {
        self.try_sub(rhs).expect("scalar subtraction across fields")
    }
}

impl Mul for &Elem {
    type Output = Elem;
    fn mul(self, rhs: &Elem) -> Elem {
        self.try_mul(rhs).expect("scalar multiplication across fields")
    }
}

impl Neg for &Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        self.neg_ref()
    }
}

impl Neg for Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        self.neg_ref()
    }
}
