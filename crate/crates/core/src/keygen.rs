//! Key pairs `(G'(D); S(D), G, P(D))` with `G'(D) = S(D) G P(D)`.

use rand::Rng;

use crate::block_code::{BlockCode, CodeFamily};
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::laurent::{validate_t, LaurentMatrix, Transform};
use crate::linalg::Matrix;

/// Off-diagonal density of Π as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Density {
    pub num: u32,
    pub den: u32,
}

impl Density {
    pub const HALF: Density = Density { num: 1, den: 2 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::Params(format!("density {num}/{den} is not in [0, 1]")));
        }
        Ok(Density { num, den })
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    pub field: FieldSpec,
    pub family: CodeFamily,
    pub n: usize,
    pub k: usize,
    pub mu: usize,
    pub nu: usize,
    pub density: Density,
}

impl SchemeParams {
    pub fn new(
        field: FieldSpec,
        family: CodeFamily,
        n: usize,
        k: usize,
        mu: usize,
        nu: usize,
        density: Density,
    ) -> Result<Self> {
        let p = SchemeParams { field, family, n, k, mu, nu, density };
        p.validate()?;
        Ok(p)
    }

    /// F_256, RS[32, 16], μ = 2, ν = 6.
    pub fn reference() -> Self {
        SchemeParams {
            field: FieldSpec::gf256(),
            family: CodeFamily::ReedSolomon,
            n: 32,
            k: 16,
            mu: 2,
            nu: 6,
            density: Density::HALF,
        }
    }

    /// F_8, RS[7, 3], μ = 1, ν = 3.
    pub fn small() -> Self {
        SchemeParams {
            field: FieldSpec::with_order(8).expect("8 is a prime power"),
            family: CodeFamily::ReedSolomon,
            n: 7,
            k: 3,
            mu: 1,
            nu: 3,
            density: Density::HALF,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.n {
            return Err(Error::Params(format!("need 0 < k < n, got n={} k={}", self.n, self.k)));
        }
        if self.nu < self.mu {
            return Err(Error::Params(format!("need ν >= μ, got μ={} ν={}", self.mu, self.nu)));
        }
        if self.family == CodeFamily::ReedSolomon && self.field.order() as usize <= self.n {
            return Err(Error::Params(format!("Reed-Solomon needs q > n, got q={} n={}", self.field.order(), self.n)));
        }
        if self.mu > 0 && self.n < 2 {
            return Err(Error::Params("μ > 0 needs n >= 2".into()));
        }
        if u16::try_from(self.n).is_err() || self.mu + self.nu > u16::MAX as usize {
            return Err(Error::Params("parameters exceed 16-bit limits".into()));
        }
        Density::new(self.density.num, self.density.den)?;
        Ok(())
    }

    pub fn code(&self, f: &Field) -> Result<BlockCode> {
        BlockCode::new(f, self.family, self.n, self.k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub params: SchemeParams,
    pub t: usize,
    field: Field,
    /// `G'_0 .. G'_{μ+ν}`, each k×n.
    coeffs: Vec<Matrix>,
}

impl PublicKey {
    pub fn new(params: SchemeParams, t: usize, coeffs: Vec<Matrix>) -> Result<Self> {
        params.validate()?;
        if coeffs.len() != params.mu + params.nu + 1 {
            return Err(Error::Dimension(format!(
                "public key has {} coefficients, expected μ+ν+1 = {}",
                coeffs.len(),
                params.mu + params.nu + 1
            )));
        }
        if let Some(bad) = coeffs.iter().find(|m| (m.rows(), m.cols()) != (params.k, params.n)) {
            return Err(Error::Dimension(format!("public coefficient of shape {}x{}", bad.rows(), bad.cols())));
        }
        let field = Field::new(params.field.clone());
        if let Some(bad) = coeffs.iter().flat_map(|m| m.data()).find(|x| x.0 as u32 >= field.order()) {
            return Err(Error::InvalidField(format!("element {} outside F_{}", bad.0, field.order())));
        }
        Ok(PublicKey { params, t, field, coeffs })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn mu(&self) -> usize {
        self.params.mu
    }

    pub fn nu(&self) -> usize {
        self.params.nu
    }

    pub fn memory(&self) -> usize {
        self.params.mu + self.params.nu
    }

    pub fn as_laurent(&self) -> LaurentMatrix {
        LaurentMatrix::new(&self.field, self.k(), self.n(), 0, self.coeffs.clone()).expect("shapes checked")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub params: SchemeParams,
    s: LaurentMatrix,
    code: BlockCode,
    transform: Transform,
    t_matrix: LaurentMatrix,
    p_matrix: LaurentMatrix,
}

impl SecretKey {
    /// Assembles a key from its parts, recomposing `T` and `P` and checking
    /// that `T` is admissible.
    pub fn new(params: SchemeParams, s: LaurentMatrix, code: BlockCode, transform: Transform) -> Result<Self> {
        params.validate()?;
        let f = code.field().clone();
        if (s.rows(), s.cols()) != (params.k, params.k) {
            return Err(Error::Dimension("S(D) must be k×k".into()));
        }
        if s.low_degree().is_some_and(|d| d < params.mu as i64) || s.high_degree().is_some_and(|d| d > params.nu as i64)
        {
            return Err(Error::Params("S(D) has terms outside degrees [μ, ν]".into()));
        }
        if s.coeff_or_zero(params.mu as i64).inverse(&f).is_none() {
            return Err(Error::Params("S_μ is singular".into()));
        }
        if (code.n(), code.k(), code.family()) != (params.n, params.k, params.family) {
            return Err(Error::Params("block code does not match the parameters".into()));
        }
        if transform.n() != params.n || transform.mu() != params.mu {
            return Err(Error::Params("transform does not match the parameters".into()));
        }
        let t_matrix = transform.compose(&f);
        if let Err(v) = validate_t(&t_matrix) {
            return Err(Error::Params(format!("T is not admissible: {v:?}")));
        }
        let p_matrix = transform.inverse(&f);
        Ok(SecretKey { params, s, code, transform, t_matrix, p_matrix })
    }

    pub fn field(&self) -> &Field {
        self.code.field()
    }

    pub fn s(&self) -> &LaurentMatrix {
        &self.s
    }

    /// `S_i` for `μ <= i <= ν`, zero where trimmed away.
    pub fn s_coeffs(&self) -> Vec<Matrix> {
        (self.params.mu..=self.params.nu).map(|i| self.s.coeff_or_zero(i as i64)).collect()
    }

    pub fn code(&self) -> &BlockCode {
        &self.code
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// `T(D, D^-1)`.
    pub fn t_matrix(&self) -> &LaurentMatrix {
        &self.t_matrix
    }

    /// `P(D, D^-1) = T^-1`.
    pub fn p_matrix(&self) -> &LaurentMatrix {
        &self.p_matrix
    }

    /// Recomputes `G'(D) = S(D) G P(D)`.
    pub fn public_key(&self) -> Result<PublicKey> {
        let f = self.field();
        let sg = self.s.mul(&LaurentMatrix::constant(f, self.code.generator().clone()))?;
        let (low, coeffs) = sg.mul_untrimmed(&self.p_matrix)?;
        let top = (self.params.mu + self.params.nu) as i64;
        let mut out = vec![Matrix::zeros(self.params.k, self.params.n); top as usize + 1];
        for (i, c) in coeffs.into_iter().enumerate() {
            let d = low + i as i64;
            if (0..=top).contains(&d) {
                out[d as usize] = c;
            } else if !c.is_zero() {
                return Err(Error::Params(format!("G'(D) has a nonzero coefficient at degree {d}")));
            }
        }
        PublicKey::new(self.params.clone(), self.code.t(), out)
    }
}

/// `S(D) = sum_{i=μ}^{ν} S_i D^i` with `S_μ` uniform invertible and the
/// other coefficients uniform.
pub fn sample_s<R: Rng + ?Sized>(params: &SchemeParams, f: &Field, rng: &mut R) -> LaurentMatrix {
    let k = params.k;
    let mut coeffs = vec![Matrix::random_invertible(k, f, rng)];
    coeffs.extend((params.mu..params.nu).map(|_| Matrix::random(k, k, f, rng)));
    LaurentMatrix::new(f, k, k, params.mu as i64, coeffs).expect("k×k coefficients")
}

pub fn keygen<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Result<(PublicKey, SecretKey)> {
    params.validate()?;
    let f = Field::new(params.field.clone());
    let code = params.code(&f)?;
    let s = sample_s(params, &f, rng);
    let transform = Transform::random(params.n, params.mu, params.density.as_f64(), &f, rng)?;
    let sk = SecretKey::new(params.clone(), s, code, transform)?;
    let pk = sk.public_key()?;
    Ok((pk, sk))
}

/// Block-Toeplitz matrix of size `k(ℓ+1) × n(ℓ+1+μ+ν)` whose block row `i`
/// holds `G'_0 .. G'_{μ+ν}` starting at block column `i`.
pub fn sliding_generator(pk: &PublicKey, ell: usize) -> Matrix {
    let (k, n) = (pk.k(), pk.n());
    let mut m = Matrix::zeros(k * (ell + 1), n * (ell + 1 + pk.memory()));
    for i in 0..=ell {
        for (j, g) in pk.coeffs().iter().enumerate() {
            m.set_block(i * k, (i + j) * n, g);
        }
    }
    m
}

/// `G'_truc(s)`: `k(s+1) × n(s+1)` with `G'_{j-i}` in block `(i, j)`.
pub fn truncated_generator(pk: &PublicKey, s: usize) -> Matrix {
    let (k, n) = (pk.k(), pk.n());
    let mut m = Matrix::zeros(k * (s + 1), n * (s + 1));
    for i in 0..=s {
        for j in i..=s.min(i + pk.memory()) {
            m.set_block(i * k, j * n, &pk.coeffs()[j - i]);
        }
    }
    m
}
