//! Sequences of vectors, `v(D) = sum_i v_i D^i`.

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::laurent::LaurentMatrix;
use crate::linalg::{weight, Matrix};

/// A vector of Laurent polynomials stored as its coefficient vectors
/// `v_start, v_{start+1}, ...`, each of length `width`. Coefficients are not
/// trimmed: a message of degree ℓ keeps all `ℓ + 1` coefficients even when
/// some are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVector {
    width: usize,
    start: i64,
    coeffs: Vec<Vec<FieldElement>>,
}

impl PolyVector {
    pub fn new(width: usize, start: i64, coeffs: Vec<Vec<FieldElement>>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| c.len() != width) {
            return Err(Error::Dimension(format!("coefficient of length {} in a width-{width} sequence", bad.len())));
        }
        Ok(PolyVector { width, start, coeffs })
    }

    /// Polynomial starting at time zero.
    pub fn from_coeffs(width: usize, coeffs: Vec<Vec<FieldElement>>) -> Result<Self> {
        Self::new(width, 0, coeffs)
    }

    pub fn zeros(width: usize, len: usize) -> Self {
        PolyVector { width, start: 0, coeffs: vec![vec![FieldElement::ZERO; width]; len] }
    }

    pub fn random<R: rand::Rng + ?Sized>(width: usize, len: usize, f: &Field, rng: &mut R) -> Self {
        let coeffs = (0..len).map(|_| (0..width).map(|_| f.random(rng)).collect()).collect();
        PolyVector { width, start: 0, coeffs }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Vec<FieldElement>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Vec<FieldElement>> {
        self.coeffs
    }

    /// Coefficient of `D^i`, if stored.
    pub fn coeff(&self, i: i64) -> Option<&[FieldElement]> {
        let idx = usize::try_from(i - self.start).ok()?;
        self.coeffs.get(idx).map(Vec::as_slice)
    }

    pub fn coeff_mut(&mut self, i: i64) -> Option<&mut Vec<FieldElement>> {
        let idx = usize::try_from(i - self.start).ok()?;
        self.coeffs.get_mut(idx)
    }

    /// Total Hamming weight.
    pub fn weight(&self) -> usize {
        self.coeffs.iter().map(|c| weight(c)).sum()
    }

    pub fn coefficient_weights(&self) -> Vec<usize> {
        self.coeffs.iter().map(|c| weight(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|x| x.is_zero()))
    }

    /// Coefficient-wise sum of two sequences with the same start.
    pub fn add(&self, other: &PolyVector, f: &Field) -> Result<PolyVector> {
        if self.width != other.width || self.start != other.start {
            return Err(Error::Dimension("sum of sequences with different shapes".into()));
        }
        let len = self.len().max(other.len());
        let zero = vec![FieldElement::ZERO; self.width];
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = other.coeffs.get(i).unwrap_or(&zero);
                a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
            })
            .collect();
        Ok(PolyVector { width: self.width, start: self.start, coeffs })
    }

    /// `v(D) * M(D)` where `M(D) = sum_j coeffs[j] D^(low + j)`; every
    /// coefficient in the full degree range is kept.
    pub fn mul_coeffs(&self, low: i64, coeffs: &[Matrix], f: &Field) -> Result<PolyVector> {
        let out_width = coeffs.first().map_or(self.width, Matrix::cols);
        if let Some(bad) = coeffs.iter().find(|m| m.rows() != self.width || m.cols() != out_width) {
            return Err(Error::Dimension(format!(
                "width-{} sequence times {}x{} coefficient",
                self.width,
                bad.rows(),
                bad.cols()
            )));
        }
        if self.coeffs.is_empty() || coeffs.is_empty() {
            return Ok(PolyVector { width: out_width, start: self.start + low, coeffs: Vec::new() });
        }
        let len = self.coeffs.len() + coeffs.len() - 1;
        let mut out = vec![vec![FieldElement::ZERO; out_width]; len];
        for (i, v) in self.coeffs.iter().enumerate() {
            for (j, m) in coeffs.iter().enumerate() {
                m.accumulate_left_mul(v, &mut out[i + j], f);
            }
        }
        Ok(PolyVector { width: out_width, start: self.start + low, coeffs: out })
    }

    /// `v(D) * M(D, D^-1)`.
    pub fn mul_laurent(&self, m: &LaurentMatrix) -> Result<PolyVector> {
        if m.rows() != self.width {
            return Err(Error::Dimension(format!(
                "width-{} sequence times {}x{} Laurent matrix",
                self.width,
                m.rows(),
                m.cols()
            )));
        }
        let low = m.low_degree().unwrap_or(0);
        let coeffs: Vec<Matrix> = m.terms().map(|(_, c)| c.clone()).collect();
        if coeffs.is_empty() {
            return Ok(PolyVector { width: m.cols(), start: self.start, coeffs: Vec::new() });
        }
        self.mul_coeffs(low, &coeffs, m.field())
    }
}
