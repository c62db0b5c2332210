//! Error sequences under the sliding-window bound: every `2μ + 1`
//! consecutive coefficients of `e(D)` carry at most `t` nonzero symbols.

use rand::Rng;

use crate::field::{Field, FieldElement};
pub use crate::poly::PolyVector;

/// First window (by start index) whose weight exceeds `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowViolation {
    pub window: usize,
    pub weight: usize,
}

/// Draws `len` coefficients of width `n`. Coefficient `j` gets a weight drawn
/// uniformly from `[0, floor(load * b_j)]`, where `b_j` is `t` minus the
/// weight already placed in the previous `2μ` coefficients, at distinct
/// uniform positions with uniform nonzero values.
pub fn sample_error<R: Rng + ?Sized>(
    len: usize,
    n: usize,
    t: usize,
    mu: usize,
    load: f64,
    f: &Field,
    rng: &mut R,
) -> PolyVector {
    let load = load.clamp(0.0, 1.0);
    let span = 2 * mu;
    let mut weights: Vec<usize> = Vec::with_capacity(len);
    let mut coeffs = Vec::with_capacity(len);
    let mut recent = 0usize;
    for j in 0..len {
        if j > span {
            recent -= weights[j - span - 1];
        }
        let budget = t.saturating_sub(recent);
        let cap = ((load * budget as f64).floor() as usize).min(n);
        let w = rng.random_range(0..=cap);
        let mut c = vec![FieldElement::ZERO; n];
        for pos in rand::seq::index::sample(rng, n, w) {
            c[pos] = f.random_nonzero(rng);
        }
        coeffs.push(c);
        weights.push(w);
        recent += w;
    }
    PolyVector::from_coeffs(n, coeffs).expect("every coefficient has width n")
}

/// Checks every window `[i, i + 2μ]`, `i >= 0`, including the shorter ones
/// that run past the last coefficient. Coefficients before time zero count as
/// zero, so windows starting earlier are covered by window 0.
pub fn validate_error(e: &PolyVector, t: usize, mu: usize) -> Result<(), WindowViolation> {
    let weights = e.coefficient_weights();
    let span = 2 * mu + 1;
    let mut window: usize = weights.iter().take(span).sum();
    for i in 0..weights.len() {
        if window > t {
            return Err(WindowViolation { window: i, weight: window });
        }
        window -= weights[i];
        if let Some(&w) = weights.get(i + span) {
            window += w;
        }
    }
    Ok(())
}
