//! Arithmetic in F_q, q = p^m, q <= 2^16.
//!
//! Elements are stored by their canonical integer representative: the base-p
//! digits of the value are the coefficients of the residue polynomial, lowest
//! degree first. Multiplication and inversion go through log/antilog tables
//! built once per field; addition is digit-wise (XOR for p = 2).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// A field element, identified by its canonical representative in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Defining data of a finite field: characteristic, extension degree and a
/// monic irreducible reduction polynomial over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u32,
    m: u32,
    /// `m + 1` coefficients, lowest degree first, leading coefficient 1.
    modulus: Vec<u32>,
}

impl FieldSpec {
    /// Validates and builds a field description.
    pub fn new(p: u32, m: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("characteristic {p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be positive".into()));
        }
        let q = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if q > MAX_ORDER as u64 {
            return Err(Error::InvalidField(format!("order {p}^{m} exceeds 2^16")));
        }
        if modulus.len() != m as usize + 1 {
            return Err(Error::InvalidField(format!(
                "reduction polynomial needs {} coefficients, got {}",
                m + 1,
                modulus.len()
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField("reduction polynomial coefficient out of range".into()));
        }
        if modulus[m as usize] != 1 {
            return Err(Error::InvalidField("reduction polynomial must be monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField("reduction polynomial is reducible".into()));
        }
        Ok(FieldSpec { p, m, modulus })
    }

    /// The prime field F_p.
    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1, vec![0, 1])
    }

    /// F_{2^m} with the reduction polynomial given as a bit mask (bit i is the
    /// coefficient of x^i), e.g. `0x11d` for x^8+x^4+x^3+x^2+1.
    pub fn binary(m: u32, mask: u32) -> Result<Self> {
        let modulus = (0..=m).map(|i| (mask >> i) & 1).collect();
        Self::new(2, m, modulus)
    }

    /// F_256 with x^8+x^4+x^3+x^2+1.
    pub fn gf256() -> Self {
        Self::binary(8, 0x11d).expect("x^8+x^4+x^3+x^2+1 is irreducible")
    }

    /// A field of order `q` with a default reduction polynomial: the
    /// lexicographically smallest monic irreducible of degree m (the
    /// conventional polynomial for q = 256).
    pub fn with_order(q: u32) -> Result<Self> {
        if q == 256 {
            return Ok(Self::gf256());
        }
        let (p, m) = prime_power(q).ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        if m == 1 {
            return Self::prime(p);
        }
        let modulus = first_irreducible(p, m);
        Self::new(p, m, modulus)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.m)
    }

    /// Bytes per element on the wire.
    pub fn element_size(&self) -> usize {
        if self.order() <= 256 {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 {
            return write!(f, "F_{}", self.p);
        }
        write!(f, "F_{} (", self.order())?;
        let mut first = true;
        for (i, &c) in self.modulus.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (1, c) => write!(f, "{c}x")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        write!(f, ")")
    }
}

struct Tables {
    spec: FieldSpec,
    q: u32,
    /// exp[i] = g^i for i in [0, 2(q-1)), so products of logs need no reduction.
    exp: Vec<u16>,
    /// log[a] for a != 0; log[0] is unused.
    log: Vec<u16>,
}

/// A finite field with precomputed tables. Cloning is cheap and clones share
/// the tables.
#[derive(Clone)]
pub struct Field(Arc<Tables>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.0.spec)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Self {
        let q = spec.order();
        let mut exp = vec![0u16; 2 * (q as usize - 1)];
        let mut log = vec![0u16; q as usize];
        let g = find_generator(&spec);
        let mut x = 1u32;
        for i in 0..(q - 1) as usize {
            exp[i] = x as u16;
            exp[i + (q - 1) as usize] = x as u16;
            log[x as usize] = i as u16;
            x = mul_schoolbook(&spec, x, g);
        }
        debug_assert_eq!(x, 1);
        Field(Arc::new(Tables { spec, q, exp, log }))
    }

    pub fn gf256() -> Self {
        Self::new(FieldSpec::gf256())
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.0.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.0.spec.p
    }

    /// Checked conversion from an integer representative.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value < self.0.q {
            Ok(FieldElement(value as u16))
        } else {
            Err(Error::InvalidField(format!("{value} is not an element of a field of order {}", self.0.q)))
        }
    }

    /// Embeds an integer via its residue mod p.
    pub fn from_int(&self, value: i64) -> FieldElement {
        FieldElement(value.rem_euclid(self.0.spec.p as i64) as u16)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let t = &*self.0;
        if t.spec.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        if t.spec.m == 1 {
            let s = a.0 as u32 + b.0 as u32;
            return FieldElement(if s >= t.q { s - t.q } else { s } as u16);
        }
        FieldElement(digitwise(t.spec.p, a.0 as u32, b.0 as u32, |x, y, p| (x + y) % p) as u16)
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let t = &*self.0;
        if t.spec.p == 2 || a.0 == 0 {
            return a;
        }
        if t.spec.m == 1 {
            return FieldElement((t.q - a.0 as u32) as u16);
        }
        FieldElement(digitwise(t.spec.p, 0, a.0 as u32, |_, y, p| (p - y) % p) as u16)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let t = &*self.0;
        FieldElement(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let t = &*self.0;
        let l = t.log[a.0 as usize] as usize;
        Ok(FieldElement(t.exp[(t.q as usize - 1 - l) % (t.q as usize - 1)]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.0 == 0 {
            return FieldElement::ZERO;
        }
        let t = &*self.0;
        let l = t.log[a.0 as usize] as u64 * (e % (t.q as u64 - 1));
        FieldElement(t.exp[(l % (t.q as u64 - 1)) as usize])
    }

    /// Multiplies by reducing the product polynomial directly, bypassing the
    /// tables.
    pub fn mul_schoolbook(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(mul_schoolbook(&self.0.spec, a.0 as u32, b.0 as u32) as u16)
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.0.q).map(|v| FieldElement(v as u16))
    }

    /// Uniformly random element.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.random_range(0..self.0.q) as u16)
    }

    /// Uniformly random nonzero element.
    pub fn random_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.random_range(1..self.0.q) as u16)
    }

    /// Binds an element to this field for checked arithmetic.
    pub fn scalar(&self, value: u32) -> Result<Scalar> {
        Ok(Scalar { field: self.clone(), value: self.element(value)? })
    }
}

/// An element that carries its field, for arithmetic where the operands may
/// come from unrelated sources.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar {
    pub field: Field,
    pub value: FieldElement,
}

impl Scalar {
    fn same_field(&self, other: &Scalar) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(Scalar { field: self.field.clone(), value: self.field.add(self.value, other.value) })
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(Scalar { field: self.field.clone(), value: self.field.mul(self.value, other.value) })
    }

    pub fn inv(&self) -> Result<Scalar> {
        Ok(Scalar { field: self.field.clone(), value: self.field.inv(self.value)? })
    }
}

fn digitwise(p: u32, mut a: u32, mut b: u32, op: impl Fn(u32, u32, u32) -> u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += op(a % p, b % p, p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn to_digits(mut v: u32, p: u32, m: u32) -> Vec<u32> {
    (0..m)
        .map(|_| {
            let d = v % p;
            v /= p;
            d
        })
        .collect()
}

fn from_digits(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn mul_schoolbook(spec: &FieldSpec, a: u32, b: u32) -> u32 {
    let (p, m) = (spec.p as u64, spec.m as usize);
    let da = to_digits(a, spec.p, spec.m);
    let db = to_digits(b, spec.p, spec.m);
    let mut prod = vec![0u64; 2 * m - 1];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
        }
    }
    // modulus is monic: x^m = -(lower terms)
    for deg in (m..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &r) in spec.modulus[..m].iter().enumerate() {
            let idx = deg - m + i;
            prod[idx] = (prod[idx] + p - c * r as u64 % p) % p;
        }
    }
    let digits: Vec<u32> = prod[..m].iter().map(|&d| d as u32).collect();
    from_digits(&digits, spec.p)
}

fn pow_schoolbook(spec: &FieldSpec, mut base: u32, mut e: u32) -> u32 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_schoolbook(spec, acc, base);
        }
        base = mul_schoolbook(spec, base, base);
        e >>= 1;
    }
    acc
}

fn find_generator(spec: &FieldSpec) -> u32 {
    let q = spec.order();
    if q == 2 {
        return 1;
    }
    let order = q - 1;
    let factors = prime_factors(order);
    (2..q)
        .find(|&g| factors.iter().all(|&r| pow_schoolbook(spec, g, order / r) != 1))
        .expect("the multiplicative group of a finite field is cyclic")
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    let p = *prime_factors(q).first()?;
    let (mut r, mut m) = (q, 0);
    while r % p == 0 {
        r /= p;
        m += 1;
    }
    (r == 1).then_some((p, m))
}

/// Remainder of `a` modulo the monic polynomial `b` over F_p (coefficients
/// lowest degree first).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().unwrap() as u64;
        let shift = r.len() - 1 - db;
        if c != 0 {
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = ((r[shift + i] as u64 + p64 - c * bc as u64 % p64) % p64) as u32;
            }
        }
        r.pop();
    }
    r
}

/// Trial division by every monic polynomial of degree 1..=m/2.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let m = poly.len() - 1;
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for lower in 0..count {
            let mut divisor = to_digits(lower as u32, p, d as u32);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = p.pow(m);
    (0..count)
        .map(|lower| {
            let mut poly = to_digits(lower, p, m);
            poly.push(1);
            poly
        })
        .find(|poly| is_irreducible(poly, p))
        .expect("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f8() -> Field {
        Field::new(FieldSpec::binary(3, 0b1011).unwrap())
    }

    fn e(v: u16) -> FieldElement {
        FieldElement(v)
    }

    /// Polynomial product over F_2 followed by reduction, written out
    /// independently of the field implementation.
    fn gf2_mul_oracle(a: u32, b: u32, modulus: u32, m: u32) -> u32 {
        let mut prod = 0u32;
        for i in 0..m {
            if (b >> i) & 1 == 1 {
                prod ^= a << i;
            }
        }
        for deg in (m..2 * m).rev() {
            if (prod >> deg) & 1 == 1 {
                prod ^= modulus << (deg - m);
            }
        }
        prod
    }

    #[test]
    fn identities() {
        let f = Field::gf256();
        for a in f.elements() {
            assert_eq!(f.add(a, FieldElement::ZERO), a);
            assert_eq!(f.mul(a, FieldElement::ONE), a);
            assert_eq!(f.mul(a, FieldElement::ZERO), FieldElement::ZERO);
        }
        let f2 = Field::new(FieldSpec::prime(2).unwrap());
        assert_eq!(f2.add(e(1), e(1)), e(0));
    }

    #[test]
    fn small_field_examples() {
        let f = f8();
        assert_eq!(f.add(e(3), e(5)), e(6));
        assert_eq!(f.mul(e(2), e(4)), e(3));
        assert_eq!(f.inv(e(2)).unwrap(), e(5));
        assert_eq!(f.inv(e(1)).unwrap(), e(1));
        assert_eq!(gf2_mul_oracle(2, 4, 0b1011, 3), 3);

        let f7 = Field::new(FieldSpec::prime(7).unwrap());
        let brute = (1..7).find(|x| (3 * x) % 7 == 1).unwrap();
        assert_eq!(f7.inv(e(3)).unwrap(), e(brute as u16));
        assert_eq!(brute, 5);
    }

    #[test]
    fn zero_has_no_inverse() {
        assert!(matches!(f8().inv(FieldElement::ZERO), Err(Error::ZeroInverse)));
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = f8().scalar(3).unwrap();
        let b = Field::gf256().scalar(3).unwrap();
        assert!(matches!(a.add(&b), Err(Error::FieldMismatch)));
        assert!(matches!(a.mul(&b), Err(Error::FieldMismatch)));
        assert_eq!(a.add(&f8().scalar(5).unwrap()).unwrap().value, e(6));
        assert!(f8().scalar(8).is_err());
    }

    #[test]
    fn tables_agree_with_schoolbook() {
        let f = Field::gf256();
        for a in 0..256u32 {
            for b in 0..256u32 {
                let want = gf2_mul_oracle(a, b, 0x11d, 8);
                assert_eq!(f.mul(e(a as u16), e(b as u16)).0 as u32, want);
                assert_eq!(f.mul_schoolbook(e(a as u16), e(b as u16)).0 as u32, want);
            }
        }
        for spec in [FieldSpec::with_order(9).unwrap(), FieldSpec::with_order(125).unwrap()] {
            let f = Field::new(spec);
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul_schoolbook(a, b));
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        let specs = [
            FieldSpec::prime(2).unwrap(),
            FieldSpec::prime(7).unwrap(),
            FieldSpec::binary(3, 0b1011).unwrap(),
            FieldSpec::with_order(9).unwrap(),
            FieldSpec::with_order(16).unwrap(),
            FieldSpec::with_order(25).unwrap(),
            FieldSpec::prime(31).unwrap(),
            FieldSpec::with_order(64).unwrap(),
        ];
        for spec in specs {
            let f = Field::new(spec);
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn lagrange_exhaustive() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 27, 32, 49, 64, 81, 128, 243, 256] {
            let f = Field::new(FieldSpec::with_order(q).unwrap());
            for a in f.elements().skip(1) {
                let mut acc = FieldElement::ONE;
                for _ in 0..q - 1 {
                    acc = f.mul_schoolbook(acc, a);
                }
                assert_eq!(acc, FieldElement::ONE, "q={q} a={a}");
                assert_eq!(f.pow(a, (q - 1) as u64), FieldElement::ONE);
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            }
        }
    }

    #[test]
    fn randomized_axioms_large_field() {
        use rand::SeedableRng;
        let f = Field::new(FieldSpec::with_order(1 << 16).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20_000 {
            let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            assert_eq!(f.mul(a, b), f.mul_schoolbook(a, b));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(FieldSpec::prime(6).is_err());
        assert!(FieldSpec::binary(2, 0b101).is_err()); // x^2+1 = (x+1)^2
        assert!(FieldSpec::new(2, 2, vec![1, 1, 0]).is_err());
        assert!(FieldSpec::with_order(1 << 17).is_err());
        assert!(FieldSpec::with_order(12).is_err());
        assert_eq!(FieldSpec::gf256().element_size(), 1);
        assert_eq!(FieldSpec::with_order(1 << 16).unwrap().element_size(), 2);
    }
}
