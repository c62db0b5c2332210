//! Matrices of Laurent polynomials in the delay operator D.
//!
//! A [`LaurentMatrix`] stores its coefficient matrices `M_i` for
//! `i in [low, high]`, trimmed so that `M_low` and `M_high` are nonzero. The
//! zero matrix has no coefficients.

mod counting;
mod transform;

pub use counting::{count_delta, count_u, partition_count, PartitionTable, UCount};
pub use transform::{
    enumerate_profiles, sample_delta, sample_pi, validate_t, DeltaProfile, Permutation, PiMatrix, Transform, Violation,
};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::Matrix;

#[derive(Clone, Debug)]
pub struct LaurentMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    low: i64,
    coeffs: Vec<Matrix>,
}

impl PartialEq for LaurentMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && (self.rows, self.cols) == (other.rows, other.cols)
            && self.coeffs == other.coeffs
            && (self.coeffs.is_empty() || self.low == other.low)
    }
}

impl Eq for LaurentMatrix {}

impl LaurentMatrix {
    /// `sum_i coeffs[i] D^(low + i)`, trimmed.
    pub fn new(field: &Field, rows: usize, cols: usize, low: i64, coeffs: Vec<Matrix>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| (c.rows(), c.cols()) != (rows, cols)) {
            return Err(Error::Dimension(format!(
                "coefficient of shape {}x{} in a {rows}x{cols} Laurent matrix",
                bad.rows(),
                bad.cols()
            )));
        }
        let mut m = LaurentMatrix { field: field.clone(), rows, cols, low, coeffs };
        m.trim();
        Ok(m)
    }

    pub fn zero(field: &Field, rows: usize, cols: usize) -> Self {
        LaurentMatrix { field: field.clone(), rows, cols, low: 0, coeffs: Vec::new() }
    }

    pub fn constant(field: &Field, m: Matrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        Self::new(field, rows, cols, 0, vec![m]).expect("shape taken from the matrix")
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        Self::constant(field, Matrix::identity(n))
    }

    /// `D^exponent * I_n`.
    pub fn monomial(field: &Field, n: usize, exponent: i64) -> Self {
        Self::new(field, n, n, exponent, vec![Matrix::identity(n)]).expect("square identity")
    }

    /// `diag(D^e_0, ..., D^e_{n-1})`.
    pub fn diagonal(field: &Field, exponents: &[i64]) -> Self {
        let n = exponents.len();
        let Some((&lo, &hi)) = exponents.iter().min().zip(exponents.iter().max()) else {
            return Self::zero(field, 0, 0);
        };
        let mut coeffs = vec![Matrix::zeros(n, n); (hi - lo + 1) as usize];
        for (i, &e) in exponents.iter().enumerate() {
            coeffs[(e - lo) as usize][(i, i)] = crate::FieldElement::ONE;
        }
        Self::new(field, n, n, lo, coeffs).expect("square coefficients")
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Matrix::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.low = 0;
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient (`None` for the zero matrix).
    pub fn low_degree(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.low)
    }

    /// Highest exponent with a nonzero coefficient.
    pub fn high_degree(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then(|| self.low + self.coeffs.len() as i64 - 1)
    }

    /// Coefficient of `D^i`, if nonzero.
    pub fn coeff(&self, i: i64) -> Option<&Matrix> {
        let idx = i.checked_sub(self.low)?;
        usize::try_from(idx).ok().and_then(|idx| self.coeffs.get(idx))
    }

    /// Coefficient of `D^i`, materializing zero outside the support.
    pub fn coeff_or_zero(&self, i: i64) -> Matrix {
        self.coeff(i).cloned().unwrap_or_else(|| Matrix::zeros(self.rows, self.cols))
    }

    /// `(exponent, coefficient)` pairs over the support, including zero
    /// coefficients strictly inside it.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Matrix)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.low + i as i64, c))
    }

    pub fn is_identity(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_identity()
    }

    /// Product without trimming: returns the exponent of the first entry and
    /// every coefficient in `[A.low + B.low, A.high + B.high]`.
    pub fn mul_untrimmed(&self, other: &LaurentMatrix) -> Result<(i64, Vec<Matrix>)> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{} Laurent matrices",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok((0, Vec::new()));
        }
        let f = &self.field;
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![Matrix::zeros(self.rows, other.cols); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let prod = a.mul(b, f)?;
                out[i + j].add_assign(&prod, f);
            }
        }
        Ok((self.low + other.low, out))
    }

    pub fn mul(&self, other: &LaurentMatrix) -> Result<LaurentMatrix> {
        let (low, coeffs) = self.mul_untrimmed(other)?;
        LaurentMatrix::new(&self.field, self.rows, other.cols, low, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldElement, FieldSpec};
    use rand::{Rng, SeedableRng};

    fn random_laurent<R: Rng>(f: &Field, n: usize, lo: i64, hi: i64, rng: &mut R) -> LaurentMatrix {
        let coeffs = (lo..=hi).map(|_| Matrix::random(n, n, f, rng)).collect();
        LaurentMatrix::new(f, n, n, lo, coeffs).unwrap()
    }

    /// Evaluates at a nonzero scalar by summing `M_i x^i` term by term.
    fn evaluate(m: &LaurentMatrix, x: FieldElement) -> Matrix {
        let f = m.field();
        let mut acc = Matrix::zeros(m.rows(), m.cols());
        for (e, c) in m.terms() {
            let xe = if e >= 0 { f.pow(x, e as u64) } else { f.pow(f.inv(x).unwrap(), (-e) as u64) };
            for i in 0..c.rows() {
                for j in 0..c.cols() {
                    acc[(i, j)] = f.add(acc[(i, j)], f.mul(c[(i, j)], xe));
                }
            }
        }
        acc
    }

    #[test]
    fn identity_and_monomials() {
        let f = Field::new(FieldSpec::prime(7).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = random_laurent(&f, 3, -1, 1, &mut rng);
        assert_eq!(a.mul(&LaurentMatrix::identity(&f, 3)).unwrap(), a);
        let d = LaurentMatrix::monomial(&f, 3, 1);
        let dinv = LaurentMatrix::monomial(&f, 3, -1);
        assert!(d.mul(&dinv).unwrap().is_identity());
    }

    #[test]
    fn product_matches_evaluation_homomorphism() {
        let f = Field::new(FieldSpec::prime(7).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = random_laurent(&f, 3, -1, 1, &mut rng);
            let b = random_laurent(&f, 3, -1, 1, &mut rng);
            let ab = a.mul(&b).unwrap();
            for _ in 0..20 {
                let x = f.random_nonzero(&mut rng);
                assert_eq!(evaluate(&ab, x), evaluate(&a, x).mul(&evaluate(&b, x), &f).unwrap());
            }
        }
    }

    #[test]
    fn trimming_gives_canonical_form() {
        let f = Field::gf256();
        let z = Matrix::zeros(2, 2);
        let i = Matrix::identity(2);
        let m = LaurentMatrix::new(&f, 2, 2, -3, vec![z.clone(), i.clone(), z.clone(), i.clone(), z.clone()]).unwrap();
        assert_eq!(m.low_degree(), Some(-2));
        assert_eq!(m.high_degree(), Some(0));
        let zero = LaurentMatrix::new(&f, 2, 2, 5, vec![z.clone(), z]).unwrap();
        assert!(zero.is_zero());
        assert_eq!(zero, LaurentMatrix::zero(&f, 2, 2));
        assert_eq!(zero.low_degree(), None);
    }

    #[test]
    fn shape_and_field_mismatch() {
        let f = Field::gf256();
        let a = LaurentMatrix::identity(&f, 2);
        let b = LaurentMatrix::identity(&f, 3);
        assert!(matches!(a.mul(&b), Err(Error::Dimension(_))));
        let g = Field::new(FieldSpec::prime(7).unwrap());
        assert!(matches!(a.mul(&LaurentMatrix::identity(&g, 2)), Err(Error::FieldMismatch)));
        assert!(LaurentMatrix::new(&f, 2, 2, 0, vec![Matrix::zeros(2, 3)]).is_err());
    }
}
