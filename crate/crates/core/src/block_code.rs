//! The secret inner block code.
//!
//! Reed-Solomon codes are used in evaluation form: the message `u` is the
//! coefficient vector of `f(x) = u_0 + u_1 x + ... + u_{k-1} x^{k-1}` and the
//! codeword is `(f(a_0), ..., f(a_{n-1}))` at the points `a_j = j + 1`
//! (canonical representatives). This is a generalized RS code, so decoding
//! works on syndromes weighted by the column multipliers of its dual:
//!
//! ```text
//! v_j = 1 / prod_{i != j} (a_j - a_i)
//! S_r = sum_j y_j v_j a_j^r,          r = 0 .. n-k-1
//! ```
//!
//! Berlekamp-Massey gives the locator `Λ(x) = prod (1 - a_j x)` over error
//! positions, roots are found by testing `Λ(1/a_j)` at every point, and
//! Forney's formula gives the values.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    ReedSolomon,
    /// `G = [I_k | 0]`, `t = 0`. Only for exercising the surrounding layers.
    IdentityTest,
}

impl CodeFamily {
    pub fn tag(self) -> u8 {
        match self {
            CodeFamily::ReedSolomon => 0,
            CodeFamily::IdentityTest => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(CodeFamily::ReedSolomon),
            1 => Some(CodeFamily::IdentityTest),
            _ => None,
        }
    }
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeFamily::ReedSolomon => "reed-solomon",
            CodeFamily::IdentityTest => "identity-test",
        })
    }
}

/// The received word is farther than `t` from every codeword (or the
/// decoder could not certify the result).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeFailure;

/// `(u, e)` from a successful decode.
pub type Decoded = std::result::Result<(Vec<FieldElement>, Vec<FieldElement>), DecodeFailure>;

/// An `(n, k)` linear code with a `t`-error decoder.
#[derive(Clone, Debug)]
pub struct BlockCode {
    field: Field,
    family: CodeFamily,
    n: usize,
    k: usize,
    t: usize,
    generator: Matrix,
    points: Vec<FieldElement>,
    col_mult: Vec<FieldElement>,
    /// Inverse of the first k columns of G; maps a codeword back to u.
    info_inverse: Matrix,
}

impl PartialEq for BlockCode {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.family == other.family
            && (self.n, self.k) == (other.n, other.k)
            && self.generator == other.generator
    }
}

impl Eq for BlockCode {}

impl BlockCode {
    pub fn new(field: &Field, family: CodeFamily, n: usize, k: usize) -> Result<Self> {
        match family {
            CodeFamily::ReedSolomon => Self::reed_solomon(field, n, k),
            CodeFamily::IdentityTest => Self::identity_test(field, n, k),
        }
    }

    pub fn reed_solomon(field: &Field, n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::Params(format!("need 0 < k < n, got n={n} k={k}")));
        }
        if field.order() as usize <= n {
            return Err(Error::Params(format!(
                "Reed-Solomon length {n} needs a field with more than {n} elements, have {}",
                field.order()
            )));
        }
        let f = field;
        let points: Vec<FieldElement> = (1..=n as u16).map(FieldElement).collect();
        let mut generator = Matrix::zeros(k, n);
        for (j, &a) in points.iter().enumerate() {
            let mut x = FieldElement::ONE;
            for i in 0..k {
                generator[(i, j)] = x;
                x = f.mul(x, a);
            }
        }
        let col_mult = points
            .iter()
            .enumerate()
            .map(|(j, &aj)| {
                let prod = points
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .fold(FieldElement::ONE, |acc, (_, &ai)| f.mul(acc, f.sub(aj, ai)));
                f.inv(prod).expect("evaluation points are distinct")
            })
            .collect();
        let info_inverse = generator
            .select_columns(&(0..k).collect::<Vec<_>>())
            .inverse(f)
            .expect("Vandermonde matrix on distinct points is invertible");
        Ok(BlockCode {
            field: f.clone(),
            family: CodeFamily::ReedSolomon,
            n,
            k,
            t: (n - k) / 2,
            generator,
            points,
            col_mult,
            info_inverse,
        })
    }

    pub fn identity_test(field: &Field, n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Params(format!("need 0 < k <= n, got n={n} k={k}")));
        }
        let mut generator = Matrix::zeros(k, n);
        generator.set_block(0, 0, &Matrix::identity(k));
        Ok(BlockCode {
            field: field.clone(),
            family: CodeFamily::IdentityTest,
            n,
            k,
            t: 0,
            generator,
            points: Vec::new(),
            col_mult: Vec::new(),
            info_inverse: Matrix::identity(k),
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of correctable errors.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// Evaluation points of the Reed-Solomon family (empty otherwise).
    pub fn points(&self) -> &[FieldElement] {
        &self.points
    }

    /// `u * G`.
    pub fn encode(&self, u: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if u.len() != self.k {
            return Err(Error::Dimension(format!("message of length {} for k={}", u.len(), self.k)));
        }
        self.generator.left_mul_vec(u, &self.field)
    }

    /// Recovers `(u, e)` from `y = u G + e` when `wt(e) <= t`.
    pub fn decode(&self, y: &[FieldElement]) -> Result<Decoded> {
        if y.len() != self.n {
            return Err(Error::Dimension(format!("received word of length {} for n={}", y.len(), self.n)));
        }
        Ok(match self.family {
            CodeFamily::ReedSolomon => self.decode_rs(y),
            CodeFamily::IdentityTest => self.decode_identity(y),
        })
    }

    fn decode_identity(&self, y: &[FieldElement]) -> Decoded {
        if y[self.k..].iter().any(|x| !x.is_zero()) {
            return Err(DecodeFailure);
        }
        Ok((y[..self.k].to_vec(), vec![FieldElement::ZERO; self.n]))
    }

    fn syndromes(&self, y: &[FieldElement]) -> Vec<FieldElement> {
        let f = &self.field;
        let mut s = vec![FieldElement::ZERO; self.n - self.k];
        for ((&yj, &vj), &aj) in y.iter().zip(&self.col_mult).zip(&self.points) {
            if yj.is_zero() {
                continue;
            }
            let mut term = f.mul(yj, vj);
            for sr in s.iter_mut() {
                *sr = f.add(*sr, term);
                term = f.mul(term, aj);
            }
        }
        s
    }

    fn decode_rs(&self, y: &[FieldElement]) -> Decoded {
        let f = &self.field;
        let synd = self.syndromes(y);
        let mut error = vec![FieldElement::ZERO; self.n];
        if synd.iter().any(|s| !s.is_zero()) {
            let (locator, lfsr_len) = berlekamp_massey(f, &synd);
            let degree = locator.len() - 1;
            if degree != lfsr_len || degree > self.t {
                return Err(DecodeFailure);
            }
            let positions: Vec<usize> = (0..self.n)
                .filter(|&j| {
                    let x = f.inv(self.points[j]).expect("points are nonzero");
                    poly_eval(f, &locator, x).is_zero()
                })
                .collect();
            if positions.len() != degree {
                return Err(DecodeFailure);
            }
            let mut evaluator = poly_mul(f, &synd, &locator);
            evaluator.truncate(synd.len());
            let derivative = formal_derivative(f, &locator);
            for &j in &positions {
                let xj = self.points[j];
                let x_inv = f.inv(xj).expect("points are nonzero");
                let denom = poly_eval(f, &derivative, x_inv);
                if denom.is_zero() {
                    return Err(DecodeFailure);
                }
                let num = f.mul(xj, poly_eval(f, &evaluator, x_inv));
                let scaled = f.neg(f.div(num, denom).expect("checked nonzero"));
                error[j] = f.div(scaled, self.col_mult[j]).expect("multipliers are nonzero");
                if error[j].is_zero() {
                    return Err(DecodeFailure);
                }
            }
        }
        let codeword: Vec<FieldElement> = y.iter().zip(&error).map(|(&a, &b)| f.sub(a, b)).collect();
        if !error.iter().all(|x| x.is_zero()) && self.syndromes(&codeword).iter().any(|s| !s.is_zero()) {
            return Err(DecodeFailure);
        }
        let u = self.info_inverse.left_mul_vec(&codeword[..self.k], f).expect("dimensions fixed at construction");
        Ok((u, error))
    }
}

/// Shortest LFSR `C` (with `C_0 = 1`) generating the syndrome sequence,
/// returned with its length. Trailing zero coefficients are trimmed, so
/// `len - 1` is the degree, which may fall short of the LFSR length.
fn berlekamp_massey(f: &Field, s: &[FieldElement]) -> (Vec<FieldElement>, usize) {
    let mut c = vec![FieldElement::ONE];
    let mut b = vec![FieldElement::ONE];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last_disc = FieldElement::ONE;
    for r in 0..s.len() {
        let mut d = s[r];
        for i in 1..=l.min(c.len() - 1) {
            d = f.add(d, f.mul(c[i], s[r - i]));
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = f.div(d, last_disc).expect("discrepancy base is nonzero");
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, FieldElement::ZERO);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] = f.sub(c[i + shift], f.mul(coef, bi));
        }
        if 2 * l <= r {
            l = r + 1 - l;
            b = prev;
            last_disc = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.truncate(l + 1);
    while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    (c, l)
}

fn poly_eval(f: &Field, p: &[FieldElement], x: FieldElement) -> FieldElement {
    p.iter().rev().fold(FieldElement::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
}

fn poly_mul(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    out
}

fn formal_derivative(f: &Field, p: &[FieldElement]) -> Vec<FieldElement> {
    if p.len() <= 1 {
        return vec![FieldElement::ZERO];
    }
    p.iter().enumerate().skip(1).map(|(i, &c)| f.mul(f.from_int(i as i64), c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::linalg::weight;
    use rand::{Rng, SeedableRng};

    fn f8() -> Field {
        Field::new(FieldSpec::binary(3, 0b1011).unwrap())
    }

    fn fe(v: u16) -> FieldElement {
        FieldElement(v)
    }

    #[test]
    fn encode_basics() {
        let f = f8();
        let code = BlockCode::reed_solomon(&f, 7, 3).unwrap();
        assert_eq!(code.t(), 2);
        assert_eq!(code.encode(&[FieldElement::ZERO; 3]).unwrap(), vec![FieldElement::ZERO; 7]);
        assert_eq!(code.encode(&[fe(1), fe(0), fe(0)]).unwrap(), code.generator().row(0));
        assert!(code.encode(&[fe(1); 2]).is_err());
        assert_eq!(code.generator().rank(&f), 3);
    }

    #[test]
    fn codeword_is_message_polynomial_evaluation() {
        let f = f8();
        let code = BlockCode::reed_solomon(&f, 7, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let u: Vec<_> = (0..3).map(|_| f.random(&mut rng)).collect();
            let c = code.encode(&u).unwrap();
            for (j, &cj) in c.iter().enumerate() {
                let x = fe(j as u16 + 1);
                // Horner with schoolbook products
                let want = u.iter().rev().fold(FieldElement::ZERO, |acc, &coef| f.add(f.mul_schoolbook(acc, x), coef));
                assert_eq!(cj, want);
            }
        }
    }

    #[test]
    fn corrects_every_pattern_up_to_t_rs_7_3() {
        let f = f8();
        let code = BlockCode::reed_solomon(&f, 7, 3).unwrap();
        let u = vec![fe(5), fe(1), fe(6)];
        let c = code.encode(&u).unwrap();
        let mut checked = 0;
        for p1 in 0..7 {
            for v1 in 1..8 {
                let mut e = vec![FieldElement::ZERO; 7];
                e[p1] = fe(v1);
                let y: Vec<_> = c.iter().zip(&e).map(|(&a, &b)| f.add(a, b)).collect();
                assert_eq!(code.decode(&y).unwrap().unwrap(), (u.clone(), e.clone()));
                checked += 1;
                for p2 in p1 + 1..7 {
                    for v2 in 1..8 {
                        let mut e2 = e.clone();
                        e2[p2] = fe(v2);
                        let y: Vec<_> = c.iter().zip(&e2).map(|(&a, &b)| f.add(a, b)).collect();
                        assert_eq!(code.decode(&y).unwrap().unwrap(), (u.clone(), e2));
                        checked += 1;
                    }
                }
            }
        }
        assert_eq!(checked, 7 * 7 + 21 * 49);
    }

    #[test]
    fn weight_three_outside_every_sphere_is_not_guaranteed() {
        let f = f8();
        let code = BlockCode::reed_solomon(&f, 7, 3).unwrap();
        let codewords: Vec<Vec<FieldElement>> = (0..512u32)
            .map(|m| {
                let u = [fe((m & 7) as u16), fe(((m >> 3) & 7) as u16), fe((m >> 6) as u16)];
                code.encode(&u).unwrap()
            })
            .collect();
        let dist = |a: &[FieldElement], b: &[FieldElement]| a.iter().zip(b).filter(|(x, y)| x != y).count();
        // weight-3 error with no codeword within distance 2 of it
        let mut found = None;
        'search: for a in 0..7 {
            for b in a + 1..7 {
                for c in b + 1..7 {
                    for vals in 0..343u16 {
                        let mut e = vec![FieldElement::ZERO; 7];
                        e[a] = fe(vals % 7 + 1);
                        e[b] = fe(vals / 7 % 7 + 1);
                        e[c] = fe(vals / 49 + 1);
                        if codewords.iter().all(|cw| dist(cw, &e) > 2) {
                            found = Some(e);
                            break 'search;
                        }
                    }
                }
            }
        }
        let e = found.expect("a weight-3 word outside all radius-2 spheres exists");
        assert_eq!(weight(&e), 3);
        let u = vec![fe(0); 3];
        match code.decode(&e).unwrap() {
            Err(DecodeFailure) => {}
            Ok((got, _)) => assert_ne!(got, u),
        }
    }

    #[test]
    fn randomized_rs_32_16() {
        let f = Field::gf256();
        let code = BlockCode::reed_solomon(&f, 32, 16).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let u: Vec<_> = (0..16).map(|_| f.random(&mut rng)).collect();
            let mut e = vec![FieldElement::ZERO; 32];
            let w = rng.random_range(0..=8);
            for pos in rand::seq::index::sample(&mut rng, 32, w) {
                e[pos] = f.random_nonzero(&mut rng);
            }
            let y: Vec<_> = code.encode(&u).unwrap().iter().zip(&e).map(|(&a, &b)| f.add(a, b)).collect();
            assert_eq!(code.decode(&y).unwrap().unwrap(), (u, e));
        }
    }

    #[test]
    fn odd_characteristic_and_odd_redundancy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (q, n, k) in [(7u32, 6usize, 2usize), (9, 8, 3), (13, 12, 5), (31, 30, 11)] {
            let f = Field::new(FieldSpec::with_order(q).unwrap());
            let code = BlockCode::reed_solomon(&f, n, k).unwrap();
            for _ in 0..2000 {
                let u: Vec<_> = (0..k).map(|_| f.random(&mut rng)).collect();
                let mut e = vec![FieldElement::ZERO; n];
                let w = rng.random_range(0..=code.t());
                for pos in rand::seq::index::sample(&mut rng, n, w) {
                    e[pos] = f.random_nonzero(&mut rng);
                }
                let y: Vec<_> = code.encode(&u).unwrap().iter().zip(&e).map(|(&a, &b)| f.add(a, b)).collect();
                assert_eq!(code.decode(&y).unwrap().unwrap(), (u, e), "q={q} n={n} k={k}");
            }
        }
    }

    #[test]
    fn identity_test_code() {
        let f = Field::gf256();
        let code = BlockCode::identity_test(&f, 5, 3).unwrap();
        assert_eq!(code.t(), 0);
        let u = vec![fe(9), fe(0), fe(200)];
        let c = code.encode(&u).unwrap();
        assert_eq!(c, vec![fe(9), fe(0), fe(200), fe(0), fe(0)]);
        assert_eq!(code.decode(&c).unwrap().unwrap().0, u);
        let mut bad = c.clone();
        bad[4] = fe(1);
        assert_eq!(code.decode(&bad).unwrap(), Err(DecodeFailure));
    }

    #[test]
    fn parameter_errors() {
        let f = f8();
        assert!(BlockCode::reed_solomon(&f, 8, 3).is_err());
        assert!(BlockCode::reed_solomon(&f, 7, 7).is_err());
        assert!(BlockCode::reed_solomon(&f, 7, 0).is_err());
        let code = BlockCode::reed_solomon(&f, 7, 3).unwrap();
        assert!(code.decode(&[fe(0); 6]).is_err());
    }
}
