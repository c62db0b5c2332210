//! Admissible transforms `T(D, D^-1) = Π Δ(D) Γ`.
//!
//! `Γ` is a permutation, `Δ` is diagonal with entries `D^e` in non-decreasing
//! order of `e ∈ [-μ, μ]` (`d_e` copies of each) balanced so that
//! `sum_e e·d_e = 0`, and `Π` is a constant block matrix over the Δ blocks with
//! identity diagonal blocks and off-diagonal blocks having at most one nonzero
//! entry per row. Such a `T` has a constant nonzero determinant, every
//! coefficient `T_i` has at most one nonzero per row, and the nonzero columns
//! of the `T_i` partition `{0..n}`.

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;

use super::counting::count_delta;
use super::LaurentMatrix;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::linalg::Matrix;

/// Multiplicities `d_e` of `D^e` on the diagonal of Δ, `e ∈ [-μ, μ]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeltaProfile {
    mu: usize,
    counts: Vec<usize>,
}

impl DeltaProfile {
    /// `counts[e + μ] = d_e`; must have `2μ + 1` entries and be balanced.
    pub fn new(mu: usize, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != 2 * mu + 1 {
            return Err(Error::Params(format!(
                "profile for radius {mu} needs {} multiplicities, got {}",
                2 * mu + 1,
                counts.len()
            )));
        }
        let p = DeltaProfile { mu, counts };
        if p.imbalance() != 0 {
            return Err(Error::Params(format!("unbalanced profile {:?}", p.counts)));
        }
        Ok(p)
    }

    pub fn identity(n: usize) -> Self {
        DeltaProfile { mu: 0, counts: vec![n] }
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `d_e`.
    pub fn count(&self, e: i64) -> usize {
        let idx = e + self.mu as i64;
        if idx < 0 {
            return 0;
        }
        self.counts.get(idx as usize).copied().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.counts.iter().enumerate().all(|(i, &d)| d == 0 || i == self.mu)
    }

    /// `sum_e e·d_e`; zero for admissible profiles.
    pub fn imbalance(&self) -> i64 {
        self.counts.iter().enumerate().map(|(i, &d)| (i as i64 - self.mu as i64) * d as i64).sum()
    }

    /// Diagonal exponent of each position, non-decreasing.
    pub fn exponents(&self) -> Vec<i64> {
        self.counts.iter().enumerate().flat_map(|(i, &d)| std::iter::repeat_n(i as i64 - self.mu as i64, d)).collect()
    }

    /// Sizes of the Δ blocks, including empty ones.
    pub fn block_sizes(&self) -> &[usize] {
        &self.counts
    }

    /// Block index of every position.
    pub fn block_of_position(&self) -> Vec<usize> {
        self.counts.iter().enumerate().flat_map(|(b, &d)| std::iter::repeat_n(b, d)).collect()
    }

    /// First position of every block.
    pub fn block_starts(&self) -> Vec<usize> {
        self.counts
            .iter()
            .scan(0, |acc, &d| {
                let s = *acc;
                *acc += d;
                Some(s)
            })
            .collect()
    }
}

/// All balanced profiles of size `n` and radius `μ`, the identity included.
pub fn enumerate_profiles(n: usize, mu: usize) -> Vec<DeltaProfile> {
    fn go(mu: usize, idx: usize, left: usize, balance: i64, cur: &mut Vec<usize>, out: &mut Vec<DeltaProfile>) {
        let width = 2 * mu + 1;
        if idx == width {
            if left == 0 && balance == 0 {
                out.push(DeltaProfile { mu, counts: cur.clone() });
            }
            return;
        }
        let e = idx as i64 - mu as i64;
        let last = idx + 1 == width;
        for d in 0..=left {
            let b = balance + e * d as i64;
            let rest = (left - d) as i64;
            // later exponents lie in [e+1, μ] and take exactly `rest` slots
            let feasible =
                if last { rest == 0 && b == 0 } else { b + rest * (e + 1) <= 0 && b + rest * (mu as i64) >= 0 };
            if !feasible {
                continue;
            }
            let rest = rest as usize;
            cur.push(d);
            go(mu, idx + 1, rest, b, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(mu, 0, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Profiles are drawn by enumeration when there are at most this many.
const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Uniformly random admissible profile; the identity only when `μ = 0`.
pub fn sample_delta<R: Rng + ?Sized>(n: usize, mu: usize, rng: &mut R) -> Result<DeltaProfile> {
    if mu == 0 {
        return Ok(DeltaProfile::identity(n));
    }
    if n < 2 {
        return Err(Error::Params(format!("no non-identity profile exists for n={n}")));
    }
    let count = count_delta(n, mu);
    if count.to_u64().is_some_and(|c| c <= ENUMERATION_LIMIT) {
        let profiles: Vec<_> = enumerate_profiles(n, mu).into_iter().filter(|p| !p.is_identity()).collect();
        return Ok(profiles[rng.random_range(0..profiles.len())].clone());
    }
    // Uniform compositions of n into 2μ+1 parts (stars and bars), restricted
    // to balanced non-identity ones, are uniform over the admissible set.
    let width = 2 * mu + 1;
    loop {
        let mut bars: Vec<usize> = rand::seq::index::sample(rng, n + width - 1, width - 1).into_vec();
        bars.sort_unstable();
        let mut counts = Vec::with_capacity(width);
        let mut prev = 0;
        for &b in &bars {
            counts.push(b - prev);
            prev = b + 1;
        }
        counts.push(n + width - 1 - prev);
        let p = DeltaProfile { mu, counts };
        if p.imbalance() == 0 && !p.is_identity() {
            return Ok(p);
        }
    }
}

/// Permutation matrix Γ: row `i` has its 1 in column `perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    perm: Vec<usize>,
}

impl Permutation {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Params("not a permutation".into()));
            }
        }
        Ok(Permutation { perm })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { perm: (0..n).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Permutation { perm }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.perm.len(), self.perm.len());
        for (i, &p) in self.perm.iter().enumerate() {
            m[(i, p)] = FieldElement::ONE;
        }
        m
    }
}

/// The constant factor Π.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiMatrix {
    blocks: Vec<usize>,
    matrix: Matrix,
}

impl PiMatrix {
    /// Checks the block shape (identity diagonal blocks, at most one nonzero
    /// per row in each off-diagonal block) and invertibility.
    pub fn new(profile: &DeltaProfile, matrix: Matrix, f: &Field) -> Result<Self> {
        let n = profile.n();
        if (matrix.rows(), matrix.cols()) != (n, n) {
            return Err(Error::Dimension(format!("Π must be {n}x{n}")));
        }
        let block_of = profile.block_of_position();
        let starts = profile.block_starts();
        for (r, &own) in block_of.iter().enumerate() {
            for (b, (&start, &size)) in starts.iter().zip(profile.block_sizes()).enumerate() {
                let row = &matrix.row(r)[start..start + size];
                if b == own {
                    let diag = r - start;
                    if row
                        .iter()
                        .enumerate()
                        .any(|(c, &x)| x != if c == diag { FieldElement::ONE } else { FieldElement::ZERO })
                    {
                        return Err(Error::Params(format!("Π diagonal block {b} is not the identity in row {r}")));
                    }
                } else if row.iter().filter(|x| !x.is_zero()).count() > 1 {
                    return Err(Error::Params(format!("Π block ({own}, {b}) has several nonzeros in row {r}")));
                }
            }
        }
        if matrix.rank(f) != n {
            return Err(Error::Params("Π is singular".into()));
        }
        Ok(PiMatrix { blocks: profile.block_sizes().to_vec(), matrix })
    }

    pub fn identity(profile: &DeltaProfile) -> Self {
        PiMatrix { blocks: profile.block_sizes().to_vec(), matrix: Matrix::identity(profile.n()) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    /// Whether every block below the diagonal is zero, which makes Π unit
    /// upper triangular.
    pub fn is_block_upper_triangular(&self) -> bool {
        let mut block_of = Vec::with_capacity(self.n());
        for (b, &d) in self.blocks.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(b, d));
        }
        (0..self.n()).all(|r| (0..self.n()).all(|c| block_of[c] >= block_of[r] || self.matrix[(r, c)].is_zero()))
    }

    pub fn inverse(&self, f: &Field) -> Matrix {
        if !self.is_block_upper_triangular() {
            return self.matrix.inverse(f).expect("Π is invertible by construction");
        }
        // unit upper triangular: X[r] = e_r - sum_{c > r} Π[r][c] X[c]
        let n = self.n();
        let mut inv = Matrix::identity(n);
        for r in (0..n).rev() {
            for c in r + 1..n {
                let a = self.matrix[(r, c)];
                if a.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = f.sub(inv[(r, j)], f.mul(a, inv[(c, j)]));
                    inv[(r, j)] = v;
                }
            }
        }
        inv
    }
}

/// Block upper-triangular Π: each row of each block `U_ij` (`i < j`) is left
/// zero with probability `1 - density`, otherwise gets a single uniform
/// nonzero value in a uniform column. Blocks below the diagonal are zero.
pub fn sample_pi<R: Rng + ?Sized>(profile: &DeltaProfile, rng: &mut R, density: f64, f: &Field) -> PiMatrix {
    let n = profile.n();
    let mut m = Matrix::identity(n);
    let starts = profile.block_starts();
    let sizes = profile.block_sizes();
    let block_of = profile.block_of_position();
    for (r, &own) in block_of.iter().enumerate() {
        for b in own + 1..sizes.len() {
            if sizes[b] == 0 || !rng.random_bool(density.clamp(0.0, 1.0)) {
                continue;
            }
            let c = starts[b] + rng.random_range(0..sizes[b]);
            m[(r, c)] = f.random_nonzero(rng);
        }
    }
    PiMatrix { blocks: sizes.to_vec(), matrix: m }
}

/// A condition of an admissible transform that a Laurent matrix fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotSquare {
        rows: usize,
        cols: usize,
    },
    /// Constant nonzero determinant: the exponents do not cancel.
    Unbalanced {
        exponent_sum: i64,
    },
    /// Constant nonzero determinant: the constant part is singular.
    SingularConstantPart,
    /// Nonzero columns of the coefficients overlap.
    ColumnInSeveralCoefficients {
        column: usize,
        degrees: (i64, i64),
    },
    /// Nonzero columns of the coefficients do not cover every column.
    ZeroColumn {
        column: usize,
    },
    /// A coefficient has a row with more than one nonzero entry.
    RowWithSeveralNonzeros {
        degree: i64,
        row: usize,
    },
}

/// Checks a Laurent matrix against the three admissibility conditions and
/// lists every violation found. The determinant condition is checked by
/// recovering the factorization: with disjoint column supports each column
/// `c` carries a single exponent `e_c`, so `T = Π' diag(D^e_c)` for a
/// constant `Π'`, and `det T = det Π' · D^(sum e_c)`. It is only evaluated
/// when the column supports are disjoint and complete.
pub fn validate_t(t: &LaurentMatrix) -> std::result::Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if t.rows() != t.cols() {
        return Err(vec![Violation::NotSquare { rows: t.rows(), cols: t.cols() }]);
    }
    let n = t.cols();
    let f = t.field();
    let mut column_degree: Vec<Option<i64>> = vec![None; n];
    for (deg, coeff) in t.terms() {
        for r in 0..n {
            if coeff.row(r).iter().filter(|x| !x.is_zero()).count() > 1 {
                violations.push(Violation::RowWithSeveralNonzeros { degree: deg, row: r });
            }
        }
        for c in 0..n {
            if (0..n).any(|r| !coeff[(r, c)].is_zero()) {
                match column_degree[c] {
                    None => column_degree[c] = Some(deg),
                    Some(prev) => {
                        violations.push(Violation::ColumnInSeveralCoefficients { column: c, degrees: (prev, deg) })
                    }
                }
            }
        }
    }
    for (c, d) in column_degree.iter().enumerate() {
        if d.is_none() {
            violations.push(Violation::ZeroColumn { column: c });
        }
    }
    let supports_ok = !violations
        .iter()
        .any(|v| matches!(v, Violation::ColumnInSeveralCoefficients { .. } | Violation::ZeroColumn { .. }));
    if supports_ok {
        let exponent_sum: i64 = column_degree.iter().map(|d| d.expect("checked")).sum();
        if exponent_sum != 0 {
            violations.push(Violation::Unbalanced { exponent_sum });
        }
        let mut constant = Matrix::zeros(n, n);
        for (c, d) in column_degree.iter().enumerate() {
            let coeff = t.coeff(d.expect("checked")).expect("column is nonzero in this coefficient");
            for r in 0..n {
                constant[(r, c)] = coeff[(r, c)];
            }
        }
        if constant.rank(f) != n {
            violations.push(Violation::SingularConstantPart);
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// A transform in factored form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transform {
    pub pi: PiMatrix,
    pub delta: DeltaProfile,
    pub gamma: Permutation,
}

impl Transform {
    pub fn new(pi: PiMatrix, delta: DeltaProfile, gamma: Permutation) -> Result<Self> {
        if pi.n() != delta.n() || gamma.len() != delta.n() {
            return Err(Error::Dimension(format!(
                "Π is {0}x{0}, Δ has {1} entries, Γ permutes {2}",
                pi.n(),
                delta.n(),
                gamma.len()
            )));
        }
        if pi.blocks != delta.block_sizes() {
            return Err(Error::Params("Π block structure does not follow Δ".into()));
        }
        Ok(Transform { pi, delta, gamma })
    }

    pub fn identity(n: usize) -> Self {
        let delta = DeltaProfile::identity(n);
        Transform { pi: PiMatrix::identity(&delta), delta, gamma: Permutation::identity(n) }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, mu: usize, density: f64, f: &Field, rng: &mut R) -> Result<Self> {
        let delta = sample_delta(n, mu, rng)?;
        let pi = sample_pi(&delta, rng, density, f);
        let gamma = Permutation::random(n, rng);
        Ok(Transform { pi, delta, gamma })
    }

    pub fn n(&self) -> usize {
        self.delta.n()
    }

    pub fn mu(&self) -> usize {
        self.delta.mu()
    }

    /// `T = Π Δ Γ`: column `perm[c]` of `T` is column `c` of Π times `D^e_c`.
    pub fn compose(&self, f: &Field) -> LaurentMatrix {
        let n = self.n();
        let mu = self.mu() as i64;
        let mut coeffs = vec![Matrix::zeros(n, n); 2 * self.mu() + 1];
        let perm = self.gamma.as_slice();
        for (c, e) in self.delta.exponents().into_iter().enumerate() {
            let coeff = &mut coeffs[(e + mu) as usize];
            for r in 0..n {
                coeff[(r, perm[c])] = self.pi.matrix[(r, c)];
            }
        }
        LaurentMatrix::new(f, n, n, -mu, coeffs).expect("square coefficients")
    }

    /// `P = T^-1 = Γ^T Δ^-1 Π^-1`: row `perm[r]` of `P` is row `r` of `Π^-1`
    /// times `D^-e_r`.
    pub fn inverse(&self, f: &Field) -> LaurentMatrix {
        let n = self.n();
        let mu = self.mu() as i64;
        let pi_inv = self.pi.inverse(f);
        let mut coeffs = vec![Matrix::zeros(n, n); 2 * self.mu() + 1];
        let perm = self.gamma.as_slice();
        for (r, e) in self.delta.exponents().into_iter().enumerate() {
            coeffs[(-e + mu) as usize].row_mut(perm[r]).copy_from_slice(pi_inv.row(r));
        }
        LaurentMatrix::new(f, n, n, -mu, coeffs).expect("square coefficients")
    }
}
