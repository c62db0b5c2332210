//! Encryption `y(D) = u(D) G'(D) + e(D)` and sequential decryption.
//!
//! The decoder multiplies the received sequence by `T(D, D^-1)` one
//! coefficient at a time, `ŷ_j = sum_{i=-μ}^{μ} y_{j-i} T_i`, decodes each
//! `ŷ_j` with the inner block code to get the coefficient `(u S)_j`, and peels
//! off `S(D)` by back-substitution through `S_μ^-1`.

use std::collections::VecDeque;

use crate::block_code::BlockCode;
use crate::channel::{validate_error, PolyVector};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::keygen::{PublicKey, SecretKey};
use crate::linalg::{weight, Matrix};

/// `y(D) = u(D) G'(D) + e(D)`, with `ℓ + μ + ν + 1` coefficients for a message
/// of `ℓ + 1` coefficients. `e` may be shorter than `y`; missing coefficients
/// are zero.
pub fn encrypt(pk: &PublicKey, u: &PolyVector, e: &PolyVector) -> Result<PolyVector> {
    if u.width() != pk.k() || e.width() != pk.n() {
        return Err(Error::Dimension(format!(
            "message width {} / error width {} for a [{}, {}] key",
            u.width(),
            e.width(),
            pk.n(),
            pk.k()
        )));
    }
    if u.start() != 0 || e.start() != 0 {
        return Err(Error::Dimension("message and error must start at time zero".into()));
    }
    if u.is_empty() {
        return Err(Error::Dimension("empty message".into()));
    }
    let len = u.len() + pk.memory();
    if e.len() > len {
        return Err(Error::Dimension(format!("error has {} coefficients, ciphertext only {len}", e.len())));
    }
    if let Err(v) = validate_error(e, pk.t, pk.mu()) {
        return Err(Error::ChannelContract { window: v.window, weight: v.weight, t: pk.t });
    }
    let uc = u.mul_coeffs(0, pk.coeffs(), pk.field())?;
    uc.add(e, pk.field())
}

/// Field multiplications spent by the decoder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Products in `ŷ_j = sum y_{j-i} T_i`.
    pub transform_mults: u64,
    /// Products in the back-substitution through `S(D)`.
    pub backsub_mults: u64,
    pub block_decodes: u64,
}

impl OpCounts {
    fn add(&mut self, other: &OpCounts) {
        self.transform_mults += other.transform_mults;
        self.backsub_mults += other.backsub_mults;
        self.block_decodes += other.block_decodes;
    }
}

/// Integrity problems that do not stop decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FramingWarning {
    /// `ŷ_j` for `j < μ` should carry only errors but decoded to a nonzero
    /// message.
    NonzeroBeforeStart { index: i64 },
    /// A recovered coefficient past the end of the message is nonzero.
    NonzeroAfterEnd { index: i64 },
}

/// Nonzero entries of one `T_i` as `(row, col, value)`.
type SparseCoeff = Vec<(usize, usize, FieldElement)>;

/// Decoder for one ciphertext stream.
#[derive(Clone, Debug)]
pub struct DecoderState {
    field: Field,
    code: BlockCode,
    n: usize,
    k: usize,
    mu: usize,
    nu: usize,
    /// `T_{-μ} .. T_μ`.
    t_sparse: Vec<SparseCoeff>,
    /// `S_{μ+1} .. S_ν`.
    s_tail: Vec<Matrix>,
    s_mu_inv: Matrix,
    /// Message length, if announced.
    ell: Option<u64>,
    /// Last `2μ + 1` received coefficients, oldest first.
    window: VecDeque<Vec<FieldElement>>,
    /// Last `ν - μ` recovered coefficients, newest first.
    recent: VecDeque<Vec<FieldElement>>,
    /// Recovered coefficients not yet known to belong to the message.
    held: VecDeque<(u64, Vec<FieldElement>)>,
    /// Number of coefficients received.
    received: u64,
    /// Number of steps run, including the zero coefficients of the flush.
    steps: u64,
    /// Number of message coefficients emitted.
    emitted: u64,
    finished: bool,
    last_step: OpCounts,
    total: OpCounts,
    max_error_weight: usize,
    warnings: Vec<FramingWarning>,
}

impl DecoderState {
    /// `ell` is the degree of the message when it is known in advance; with
    /// `None` the stream ends at [`DecoderState::finish`].
    pub fn new(sk: &SecretKey, ell: Option<u64>) -> Self {
        let f = sk.field().clone();
        let (n, k, mu, nu) = (sk.params.n, sk.params.k, sk.params.mu, sk.params.nu);
        let t_sparse = (-(mu as i64)..=mu as i64)
            .map(|i| {
                let mut entries = Vec::new();
                if let Some(c) = sk.t_matrix().coeff(i) {
                    for r in 0..n {
                        for (col, &x) in c.row(r).iter().enumerate() {
                            if !x.is_zero() {
                                entries.push((r, col, x));
                            }
                        }
                    }
                }
                entries
            })
            .collect();
        let s = sk.s_coeffs();
        let s_mu_inv = s[0].inverse(&f).expect("S_μ is invertible");
        DecoderState {
            field: f,
            code: sk.code().clone(),
            n,
            k,
            mu,
            nu,
            t_sparse,
            s_tail: s[1..].to_vec(),
            s_mu_inv,
            ell,
            window: VecDeque::from(vec![vec![FieldElement::ZERO; n]; 2 * mu + 1]),
            recent: VecDeque::from(vec![vec![FieldElement::ZERO; k]; nu - mu]),
            held: VecDeque::new(),
            received: 0,
            steps: 0,
            emitted: 0,
            finished: false,
            last_step: OpCounts::default(),
            total: OpCounts::default(),
            max_error_weight: 0,
            warnings: Vec::new(),
        }
    }

    /// Number of ciphertext coefficients for a message of degree `ell`.
    pub fn frames_for(&self, ell: u64) -> u64 {
        ell + (self.mu + self.nu) as u64 + 1
    }

    pub fn received(&self) -> u64 {
        self.received
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn last_step_ops(&self) -> OpCounts {
        self.last_step
    }

    pub fn total_ops(&self) -> OpCounts {
        self.total
    }

    /// Largest `wt(ŷ_j - û_j G)` seen so far.
    pub fn max_error_weight(&self) -> usize {
        self.max_error_weight
    }

    pub fn warnings(&self) -> &[FramingWarning] {
        &self.warnings
    }

    /// Feeds `y_j` for the next `j` and returns the message coefficients that
    /// became available, in order.
    pub fn push(&mut self, y: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        if self.finished {
            return Err(Error::Format("coefficient received after the end of the stream".into()));
        }
        if y.len() != self.n {
            return Err(Error::Dimension(format!("ciphertext coefficient of length {} for n={}", y.len(), self.n)));
        }
        if let Some(ell) = self.ell {
            if self.received >= self.frames_for(ell) {
                return Err(Error::Format(format!("more than {} ciphertext coefficients", self.frames_for(ell))));
            }
        }
        self.step(y.to_vec())?;
        self.received += 1;
        Ok(self.release())
    }

    /// Ends the stream: flushes the windows with zero coefficients and returns
    /// the remaining message coefficients.
    pub fn finish(&mut self) -> Result<Vec<Vec<FieldElement>>> {
        if self.finished {
            return Ok(Vec::new());
        }
        let min = (self.mu + self.nu) as u64 + 1;
        if self.received < min {
            return Err(Error::Format(format!("stream of {} coefficients, need at least {min}", self.received)));
        }
        let ell = self.received - min;
        if let Some(want) = self.ell {
            if want != ell {
                return Err(Error::Format(format!(
                    "stream ended after {} coefficients, expected {}",
                    self.received,
                    self.frames_for(want)
                )));
            }
        }
        self.ell = Some(ell);
        for _ in 0..2 * self.mu {
            self.step(vec![FieldElement::ZERO; self.n])?;
        }
        self.finished = true;
        Ok(self.release())
    }

    /// Processes the coefficient at the next time index: computes `ŷ_j` for
    /// `j = time - μ`, decodes it and recovers `u_{j-μ}`.
    fn step(&mut self, y: Vec<FieldElement>) -> Result<()> {
        let f = &self.field;
        let mu = self.mu as i64;
        let mut ops = OpCounts::default();
        self.window.pop_front();
        self.window.push_back(y);
        // window[w] holds y_{time - 2μ + w}; y_{j-i} sits at w = μ - i
        let j = self.steps as i64 - mu;
        self.steps += 1;
        let mut yhat = vec![FieldElement::ZERO; self.n];
        for (idx, entries) in self.t_sparse.iter().enumerate() {
            let i = idx as i64 - mu;
            let src = &self.window[(mu - i) as usize];
            for &(r, c, a) in entries {
                yhat[c] = f.add(yhat[c], f.mul(src[r], a));
            }
            ops.transform_mults += entries.len() as u64;
        }
        let (uhat, err) = match self.code.decode(&yhat)? {
            Ok(pair) => pair,
            Err(_) => return Err(Error::Decode { index: j }),
        };
        ops.block_decodes += 1;
        self.max_error_weight = self.max_error_weight.max(weight(&err));
        if j < mu {
            if uhat.iter().any(|x| !x.is_zero()) {
                self.warnings.push(FramingWarning::NonzeroBeforeStart { index: j });
            }
        } else {
            // u_{j-μ} S_μ = û_j - sum_{i=1}^{ν-μ} u_{j-μ-i} S_{μ+i}
            let mut acc = uhat;
            let available = ((j - mu) as usize).min(self.nu - self.mu);
            for (prev, s) in self.recent.iter().zip(&self.s_tail).take(available) {
                let part = s.left_mul_vec(prev, f)?;
                for (a, p) in acc.iter_mut().zip(part) {
                    *a = f.sub(*a, p);
                }
                ops.backsub_mults += (self.k * self.k) as u64;
            }
            let u = self.s_mu_inv.left_mul_vec(&acc, f)?;
            ops.backsub_mults += (self.k * self.k) as u64;
            if self.nu > self.mu {
                self.recent.pop_back();
                self.recent.push_front(u.clone());
            }
            self.held.push_back(((j - mu) as u64, u));
        }
        self.last_step = ops;
        self.total.add(&ops);
        Ok(())
    }

    /// Moves held coefficients known to lie inside the message to the output.
    fn release(&mut self) -> Vec<Vec<FieldElement>> {
        // without a known length, u_i is released once y_{i+μ+ν} has arrived
        let bound = match self.ell {
            Some(ell) => ell,
            None => match self.received.checked_sub((self.mu + self.nu) as u64 + 1) {
                Some(b) => b,
                None => return Vec::new(),
            },
        };
        let mut out = Vec::new();
        while let Some((index, _)) = self.held.front() {
            if *index > bound {
                break;
            }
            out.push(self.held.pop_front().expect("front exists").1);
            self.emitted += 1;
        }
        if self.ell.is_some() {
            while let Some((index, u)) = self.held.front() {
                if *index <= bound {
                    break;
                }
                if u.iter().any(|x| !x.is_zero()) {
                    self.warnings.push(FramingWarning::NonzeroAfterEnd { index: *index as i64 });
                }
                self.held.pop_front();
            }
        }
        out
    }
}

/// Runs a [`DecoderState`] over a whole ciphertext.
pub fn decrypt(sk: &SecretKey, y: &PolyVector) -> Result<PolyVector> {
    let (u, _) = decrypt_with_state(sk, y)?;
    Ok(u)
}

/// Like [`decrypt`], also returning the final decoder state for inspection.
pub fn decrypt_with_state(sk: &SecretKey, y: &PolyVector) -> Result<(PolyVector, DecoderState)> {
    if y.start() != 0 {
        return Err(Error::Dimension("ciphertext must start at time zero".into()));
    }
    let min = sk.params.mu + sk.params.nu + 1;
    if y.len() < min {
        return Err(Error::Format(format!("ciphertext of {} coefficients, need at least {min}", y.len())));
    }
    let ell = (y.len() - min) as u64;
    let mut state = DecoderState::new(sk, Some(ell));
    let mut out = Vec::with_capacity(ell as usize + 1);
    for c in y.coeffs() {
        out.extend(state.push(c)?);
    }
    out.extend(state.finish()?);
    Ok((PolyVector::from_coeffs(sk.params.k, out)?, state))
}
