//! Key-space sizes and information-set-decoding estimates.
//!
//! Every probability and count is exact (`BigUint` / `BigRational`);
//! logarithms are only taken for presentation.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::keygen::{truncated_generator, PublicKey, SchemeParams};
use crate::laurent::{count_delta, count_u};

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` with `C(n, k) = 0` for negative `n` or `k`.
fn binomial_i(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 {
        BigUint::zero()
    } else {
        binomial(n as u64, k as u64)
    }
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    if den.is_zero() {
        return BigRational::zero();
    }
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `log2(x)` for a nonnegative integer, `-inf` for zero.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return x.to_u64().expect("fits").to_f64().expect("finite").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits");
    (top as f64).log2() + shift as f64
}

/// `log2(x)` for a nonnegative rational, `-inf` for zero.
pub fn log2_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let num = x.numer().abs().to_biguint().expect("nonnegative");
    let den = x.denom().abs().to_biguint().expect("nonnegative");
    log2_biguint(&num) - log2_biguint(&den)
}

/// Number of possible `S(D)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SKeyCount {
    /// `(ν - μ) q^{k²} prod_j (q^k - q^j)`.
    pub closed_form: BigUint,
    /// `q^{k²(ν - μ)} prod_j (q^k - q^j)`: an invertible `S_μ` and `ν - μ`
    /// free coefficients.
    pub proof_derived: BigUint,
}

impl SKeyCount {
    pub fn discrepancy(&self) -> bool {
        self.closed_form != self.proof_derived
    }
}

/// Number of invertible k×k matrices over F_q.
pub fn gl_order(q: u32, k: usize) -> BigUint {
    let q = BigUint::from(q);
    let qk = q.pow(k as u32);
    (0..k).map(|j| &qk - q.pow(j as u32)).product()
}

pub fn count_s_keys(q: u32, k: usize, mu: usize, nu: usize) -> SKeyCount {
    let gl = gl_order(q, k);
    let qb = BigUint::from(q);
    let free = (nu - mu) as u32;
    SKeyCount {
        closed_form: BigUint::from(free) * qb.pow((k * k) as u32) * &gl,
        proof_derived: qb.pow((k * k) as u32 * free) * gl,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SternParams {
    /// Weight guessed on the information set, split evenly between halves.
    pub p: u64,
    /// Length of the zero window.
    pub m: u64,
}

impl SternParams {
    pub const PRANGE: SternParams = SternParams { p: 0, m: 0 };

    pub fn new(p: u64, m: u64) -> Result<Self> {
        if !p.is_multiple_of(2) {
            return Err(Error::Params(format!("Stern weight p = {p} must be even")));
        }
        Ok(SternParams { p, m })
    }

    pub fn check(&self, t: u64) -> Result<()> {
        if !self.p.is_multiple_of(2) || self.p > t {
            return Err(Error::Params(format!("Stern weight p = {} must be even and at most t = {t}", self.p)));
        }
        Ok(())
    }
}

/// Sizes `(N, K)` of the sliding code for a message of degree `ℓ`.
pub fn sliding_dimensions(n: u64, k: u64, ell: u64, mu: u64, nu: u64) -> (u64, u64) {
    (n * (ell + mu + nu + 1), k * (ell + 1))
}

/// Single-iteration Stern success probability on an `[N, K]` code with `t`
/// errors:
/// `C(⌈K/2⌉, p/2) C(⌊K/2⌋, p/2) C(N - K - m, t - p) / C(N, t)`.
pub fn stern_probability(big_n: u64, big_k: u64, t: u64, sp: SternParams) -> BigRational {
    if !sp.p.is_multiple_of(2) || sp.p > t {
        return BigRational::zero();
    }
    let half = sp.p / 2;
    let c1 = binomial(big_k.div_ceil(2), half);
    let c2 = binomial(big_k / 2, half);
    let rest = binomial_i(big_n as i64 - big_k as i64 - sp.m as i64, (t - sp.p) as i64);
    ratio(c1 * c2 * rest, binomial(big_n, t))
}

/// Stern search time on an `[N, K]` code:
/// `C1 p m + (C1 C2 / 2^m) (p (N - K - m) + 1)`.
pub fn stern_time(big_n: u64, big_k: u64, sp: SternParams) -> BigRational {
    let half = sp.p / 2;
    let c1 = binomial(big_k.div_ceil(2), half);
    let c2 = binomial(big_k / 2, half);
    let first = BigInt::from(&c1 * sp.p * sp.m);
    let lists = BigRational::new(BigInt::from(c1 * c2), BigInt::from(BigUint::one() << sp.m));
    let per_pair = BigInt::from(sp.p) * (BigInt::from(big_n) - BigInt::from(big_k) - BigInt::from(sp.m)) + 1;
    BigRational::from_integer(first) + lists * BigRational::from_integer(per_pair)
}

/// Stern success probability against the sliding code of a message of
/// degree `ℓ`.
pub fn stern_success_probability(n: u64, k: u64, ell: u64, mu: u64, nu: u64, t: u64, sp: SternParams) -> BigRational {
    let (big_n, big_k) = sliding_dimensions(n, k, ell, mu, nu);
    stern_probability(big_n, big_k, t, sp)
}

pub fn stern_search_time(n: u64, k: u64, ell: u64, mu: u64, nu: u64, sp: SternParams) -> BigRational {
    let (big_n, big_k) = sliding_dimensions(n, k, ell, mu, nu);
    stern_time(big_n, big_k, sp)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackReport {
    pub probability: BigRational,
    pub log2_probability: f64,
    /// `-log2` of the probability.
    pub log2_expected_iterations: f64,
    pub search_time: BigRational,
    pub log2_search_time: f64,
    /// `log2(search_time / probability)`.
    pub log2_work_factor: f64,
}

impl AttackReport {
    fn new(probability: BigRational, search_time: BigRational) -> Self {
        let lp = log2_rational(&probability);
        let lt = log2_rational(&search_time);
        AttackReport {
            log2_probability: lp,
            log2_expected_iterations: -lp,
            log2_search_time: lt,
            log2_work_factor: lt - lp,
            probability,
            search_time,
        }
    }
}

pub fn stern_attack(n: u64, k: u64, ell: u64, mu: u64, nu: u64, t: u64, sp: SternParams) -> AttackReport {
    AttackReport::new(stern_success_probability(n, k, ell, mu, nu, t, sp), stern_search_time(n, k, ell, mu, nu, sp))
}

/// Largest total weight of `s + 1` consecutive error coefficients when every
/// `2μ + 1` consecutive ones weigh at most `t`.
pub fn max_prefix_weight(t: usize, mu: usize, s: usize) -> usize {
    t * (s + 1).div_ceil(2 * mu + 1)
}

/// `(k_s, t_s)` for `G'_truc(s)`.
pub fn truncated_rank(pk: &PublicKey, s: usize) -> (usize, usize) {
    let ks = truncated_generator(pk, s).rank(pk.field());
    (ks, max_prefix_weight(pk.t, pk.mu(), s))
}

/// Single-iteration ISD model `P(k, n, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsdModel {
    /// `C(n - t, k) / C(n, k)`.
    Prange,
    Stern(SternParams),
}

impl IsdModel {
    pub fn probability(self, k: u64, n: u64, t: u64) -> BigRational {
        match self {
            IsdModel::Prange => ratio(binomial_i(n as i64 - t as i64, k as i64), binomial(n, k)),
            IsdModel::Stern(sp) => stern_probability(n, k, t, sp),
        }
    }
}

impl std::fmt::Display for IsdModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IsdModel::Prange => write!(f, "prange"),
            IsdModel::Stern(sp) => write!(f, "stern(p={},m={})", sp.p, sp.m),
        }
    }
}

/// `q^{-(k(s+1) - k_s)} P(k_s, n(s+1), t_s)`.
pub fn recovery_probability(
    q: u32,
    k: usize,
    n: usize,
    s: usize,
    ks: usize,
    ts: usize,
    model: IsdModel,
) -> BigRational {
    let deficit = (k * (s + 1)).saturating_sub(ks) as u32;
    let guess = BigRational::new(BigInt::one(), BigInt::from(q).pow(deficit));
    guess * model.probability(ks as u64, (n * (s + 1)) as u64, ts as u64)
}

pub fn truncated_recovery_probability(pk: &PublicKey, s: usize, model: IsdModel) -> BigRational {
    let (ks, ts) = truncated_rank(pk, s);
    recovery_probability(pk.field().order(), pk.k(), pk.n(), s, ks, ts, model)
}

/// Sizes of the secret-key factors.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyspaceReport {
    pub s: SKeyCount,
    /// Δ profiles other than the identity.
    pub delta: BigUint,
    /// `(Δ, Π)` pairs over those profiles, Π blocks counted as
    /// `((q-1) cols + 1)^rows`.
    pub delta_pi: BigUint,
    /// Same with the closed form `(q-1) (cols+1)^rows` per block.
    pub delta_pi_literal: BigUint,
    /// `n!`.
    pub gamma: BigUint,
    pub log2_s: f64,
    pub log2_s_literal: f64,
    pub log2_delta: f64,
    /// `log2(delta_pi) - log2(delta)`: Π choices per profile on average.
    pub log2_pi: f64,
    pub log2_pi_literal: f64,
    pub log2_gamma: f64,
    pub log2_total: f64,
    pub log2_total_literal: f64,
    pub s_discrepancy: bool,
    pub u_discrepancy: bool,
}

fn log2_or_zero(x: &BigUint) -> f64 {
    if x.is_zero() {
        0.0
    } else {
        log2_biguint(x)
    }
}

/// Sum over non-identity Δ profiles of the number of Π matrices. Blocks are
/// visited in exponent order; a block of size `d` placed after `used`
/// positions contributes `((q-1) d + 1)^used` for the derived count and
/// `(q-1)^nonempty (d+1)^used` for the literal one.
fn count_delta_pi(n: usize, mu: usize, q: u32) -> (BigUint, BigUint) {
    if mu == 0 {
        return (BigUint::zero(), BigUint::zero());
    }
    // state: (used, exponent balance, nonempty blocks so far)
    type State = (usize, i64, usize);
    let mut derived: HashMap<State, BigUint> = HashMap::new();
    let mut literal: HashMap<State, BigUint> = HashMap::new();
    derived.insert((0, 0, 0), BigUint::one());
    literal.insert((0, 0, 0), BigUint::one());
    let q1 = q as u64 - 1;
    for e in -(mu as i64)..=mu as i64 {
        let mut next_d: HashMap<State, BigUint> = HashMap::new();
        let mut next_l: HashMap<State, BigUint> = HashMap::new();
        for (&(used, bal, blocks), val) in &derived {
            let lit = &literal[&(used, bal, blocks)];
            for d in 0..=n - used {
                let key = (used + d, bal + e * d as i64, blocks + (d > 0) as usize);
                if d == 0 {
                    *next_d.entry(key).or_default() += val;
                    *next_l.entry(key).or_default() += lit;
                    continue;
                }
                let fd = BigUint::from(q1 * d as u64 + 1).pow(used as u32);
                // one (q-1) factor for each earlier nonempty block
                let fl = BigUint::from(q1).pow(blocks as u32) * BigUint::from(d as u64 + 1).pow(used as u32);
                *next_d.entry(key).or_default() += val * fd;
                *next_l.entry(key).or_default() += lit * fl;
            }
        }
        derived = next_d;
        literal = next_l;
    }
    // drop the identity profile, which has a single block and Π = I
    let take = |m: &HashMap<State, BigUint>| -> BigUint {
        m.iter().filter(|(&(used, bal, blocks), _)| used == n && bal == 0 && blocks > 1).map(|(_, v)| v).sum()
    };
    (take(&derived), take(&literal))
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

pub fn keyspace_report(params: &SchemeParams) -> KeyspaceReport {
    let q = params.field.order();
    let s = count_s_keys(q, params.k, params.mu, params.nu);
    let delta = count_delta(params.n, params.mu);
    let (delta_pi, delta_pi_literal) = count_delta_pi(params.n, params.mu, q);
    let gamma = factorial(params.n as u64);
    let log2_s = log2_or_zero(&s.proof_derived);
    let log2_s_literal = log2_or_zero(&s.closed_form);
    let log2_delta = log2_or_zero(&delta);
    let log2_pi = log2_or_zero(&delta_pi) - log2_delta;
    let log2_pi_literal = log2_or_zero(&delta_pi_literal) - log2_delta;
    let log2_gamma = log2_or_zero(&gamma);
    let u_discrepancy = (1..params.n).any(|r| {
        (1..params.n).any(|c| {
            let u = count_u(r, c, q);
            u.closed_form != u.derived
        })
    });
    KeyspaceReport {
        s_discrepancy: s.discrepancy(),
        u_discrepancy,
        log2_total: log2_s + log2_delta + log2_pi + log2_gamma,
        log2_total_literal: log2_s_literal + log2_delta + log2_pi_literal + log2_gamma,
        s,
        delta,
        delta_pi,
        delta_pi_literal,
        gamma,
        log2_s,
        log2_s_literal,
        log2_delta,
        log2_pi,
        log2_pi_literal,
        log2_gamma,
    }
}

/// What `analyze` was asked to compute.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRequest {
    pub stern: SternParams,
    pub ell: u64,
    pub truncations: Vec<usize>,
    pub model: IsdModel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationEntry {
    pub s: usize,
    pub rank: usize,
    pub full_rank: usize,
    pub t_s: usize,
    pub probability: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    pub params: SchemeParams,
    pub t: usize,
    pub request: AnalysisRequest,
    pub keyspace: KeyspaceReport,
    pub attack: AttackReport,
    pub truncations: Vec<TruncationEntry>,
}

pub fn analyze(pk: &PublicKey, request: AnalysisRequest) -> Result<AnalysisReport> {
    let p = &pk.params;
    request.stern.check(pk.t as u64)?;
    if let IsdModel::Stern(sp) = request.model {
        sp.check(pk.t as u64)?;
    }
    let attack =
        stern_attack(p.n as u64, p.k as u64, request.ell, p.mu as u64, p.nu as u64, pk.t as u64, request.stern);
    let truncations = request
        .truncations
        .iter()
        .map(|&s| {
            let (rank, t_s) = truncated_rank(pk, s);
            TruncationEntry {
                s,
                rank,
                full_rank: p.k * (s + 1),
                t_s,
                probability: recovery_probability(pk.field().order(), p.k, p.n, s, rank, t_s, request.model),
            }
        })
        .collect();
    Ok(AnalysisReport { params: p.clone(), t: pk.t, keyspace: keyspace_report(p), attack, truncations, request })
}

fn fmt_log(x: f64) -> String {
    if x.is_infinite() {
        if x < 0.0 { "-inf" } else { "inf" }.to_string()
    } else {
        format!("{x:.6}")
    }
}

impl AnalysisReport {
    /// One `key=value` pair per line.
    pub fn to_kv(&self) -> String {
        let p = &self.params;
        let ks = &self.keyspace;
        let a = &self.attack;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("field.q", p.field.order().to_string());
        kv("code.family", p.family.to_string());
        kv("code.n", p.n.to_string());
        kv("code.k", p.k.to_string());
        kv("code.t", self.t.to_string());
        kv("key.mu", p.mu.to_string());
        kv("key.nu", p.nu.to_string());
        kv("keyspace.log2_s", fmt_log(ks.log2_s));
        kv("keyspace.log2_s_literal", fmt_log(ks.log2_s_literal));
        kv("keyspace.log2_delta", fmt_log(ks.log2_delta));
        kv("keyspace.log2_pi", fmt_log(ks.log2_pi));
        kv("keyspace.log2_pi_literal", fmt_log(ks.log2_pi_literal));
        kv("keyspace.log2_gamma", fmt_log(ks.log2_gamma));
        kv("keyspace.log2_total", fmt_log(ks.log2_total));
        kv("keyspace.log2_total_literal", fmt_log(ks.log2_total_literal));
        kv("keyspace.s_discrepancy", ks.s_discrepancy.to_string());
        kv("keyspace.u_discrepancy", ks.u_discrepancy.to_string());
        kv("stern.p", self.request.stern.p.to_string());
        kv("stern.m", self.request.stern.m.to_string());
        kv("stern.ell", self.request.ell.to_string());
        kv("stern.probability", a.probability.to_string());
        kv("stern.log2_probability", fmt_log(a.log2_probability));
        kv("stern.log2_iterations", fmt_log(a.log2_expected_iterations));
        kv("stern.log2_search_time", fmt_log(a.log2_search_time));
        kv("stern.log2_work_factor", fmt_log(a.log2_work_factor));
        kv("truncated.model", self.request.model.to_string());
        for e in &self.truncations {
            let pre = format!("truncated.s{}", e.s);
            kv(&format!("{pre}.rank"), e.rank.to_string());
            kv(&format!("{pre}.full_rank"), e.full_rank.to_string());
            kv(&format!("{pre}.t_s"), e.t_s.to_string());
            kv(&format!("{pre}.log2_probability"), fmt_log(log2_rational(&e.probability)));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let ks = &self.keyspace;
        let a = &self.attack;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "parameters: F_{} {}[{}, {}] t={} mu={} nu={}",
            p.field.order(),
            p.family,
            p.n,
            p.k,
            self.t,
            p.mu,
            p.nu
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "key space (log2)");
        let _ = writeln!(out, "  S(D)        {:>14}   closed form {}", fmt_log(ks.log2_s), fmt_log(ks.log2_s_literal));
        let _ = writeln!(out, "  Delta       {:>14}", fmt_log(ks.log2_delta));
        let _ =
            writeln!(out, "  Pi          {:>14}   closed form {}", fmt_log(ks.log2_pi), fmt_log(ks.log2_pi_literal));
        let _ = writeln!(out, "  Gamma       {:>14}", fmt_log(ks.log2_gamma));
        let _ = writeln!(
            out,
            "  total       {:>14}   closed form {}",
            fmt_log(ks.log2_total),
            fmt_log(ks.log2_total_literal)
        );
        if ks.s_discrepancy {
            let _ = writeln!(out, "  note: closed-form count of S(D) differs from the direct count");
        }
        if ks.u_discrepancy {
            let _ = writeln!(out, "  note: closed-form count of Pi blocks differs from the direct count");
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Stern attack (p={}, m={}, ell={})",
            self.request.stern.p, self.request.stern.m, self.request.ell
        );
        let _ = writeln!(out, "  log2 success probability  {}", fmt_log(a.log2_probability));
        let _ = writeln!(out, "  log2 search time          {}", fmt_log(a.log2_search_time));
        let _ = writeln!(out, "  log2 work factor          {}", fmt_log(a.log2_work_factor));
        if !self.truncations.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "truncated generator ({})", self.request.model);
            let _ = writeln!(out, "  {:>4} {:>8} {:>8} {:>6} {:>16}", "s", "rank", "k(s+1)", "t_s", "log2 P");
            for e in &self.truncations {
                let _ = writeln!(
                    out,
                    "  {:>4} {:>8} {:>8} {:>6} {:>16}",
                    e.s,
                    e.rank,
                    e.full_rank,
                    e.t_s,
                    fmt_log(log2_rational(&e.probability))
                );
            }
        }
        out
    }
}
