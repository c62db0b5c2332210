//! Exact counts of admissible Δ profiles and Π blocks.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Table of `p(r, i, μ)`: partitions of `r` into exactly `i` parts, each part
/// at most `μ`. Filled by
///
/// ```text
/// p(r, i, μ) = p(r-1, i-1, μ) + p(r-i, i, μ) - p(r-i-μ, i-1, μ)
/// ```
///
/// with `p(0, 0, μ) = 1`, `p(r, 0, μ) = 0` for `r > 0` and zero for negative
/// arguments. The first term removes a part of size one, the second shrinks
/// every part by one, and the third discards what the second over-counts:
/// shrunk partitions that contain a part of size μ.
#[derive(Clone, Debug)]
pub struct PartitionTable {
    mu: usize,
    max_parts: usize,
    /// `values[r * (max_parts + 1) + i]`
    values: Vec<BigUint>,
}

impl PartitionTable {
    pub fn new(max_r: usize, max_parts: usize, mu: usize) -> Self {
        let width = max_parts + 1;
        let mut values = vec![BigUint::zero(); (max_r + 1) * width];
        values[0] = BigUint::one();
        let get = |values: &[BigUint], r: isize, i: isize| -> BigUint {
            if r < 0 || i < 0 {
                BigUint::zero()
            } else {
                values[r as usize * width + i as usize].clone()
            }
        };
        for r in 1..=max_r as isize {
            for i in 1..=max_parts as isize {
                let plus = get(&values, r - 1, i - 1) + get(&values, r - i, i);
                let minus = get(&values, r - i - mu as isize, i - 1);
                values[r as usize * width + i as usize] = plus - minus;
            }
        }
        PartitionTable { mu, max_parts, values }
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    /// `p(r, i, μ)`; zero beyond the table's range of parts.
    pub fn get(&self, r: usize, i: usize) -> BigUint {
        if i > self.max_parts {
            return BigUint::zero();
        }
        self.values[r * (self.max_parts + 1) + i].clone()
    }
}

/// `p(r, i, μ)`.
pub fn partition_count(r: usize, i: usize, mu: usize) -> BigUint {
    PartitionTable::new(r, i, mu).get(r, i)
}

/// Number of Δ profiles other than the identity for size `n` and radius `μ`:
///
/// ```text
/// sum_{r=1}^{μ floor(n/2)} sum_{i=1}^{min(r,n)} p(r,i,μ) * sum_{j=1}^{min(r,n-i)} p(r,j,μ)
/// ```
pub fn count_delta(n: usize, mu: usize) -> BigUint {
    let max_r = mu * (n / 2);
    if max_r == 0 {
        return BigUint::zero();
    }
    let table = PartitionTable::new(max_r, n, mu);
    let mut total = BigUint::zero();
    for r in 1..=max_r {
        for i in 1..=r.min(n) {
            let left = table.get(r, i);
            if left.is_zero() {
                continue;
            }
            let right: BigUint = (1..=r.min(n - i)).map(|j| table.get(r, j)).sum();
            total += left * right;
        }
    }
    total
}

/// Number of choices for one above-diagonal block `U` of Π.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UCount {
    /// `(q-1) (cols+1)^rows`, the closed form as usually quoted.
    pub closed_form: BigUint,
    /// `((q-1) cols + 1)^rows`: each row is zero or has exactly one nonzero
    /// entry, in one of `cols` positions with one of `q-1` values.
    pub derived: BigUint,
}

pub fn count_u(rows: usize, cols: usize, q: u32) -> UCount {
    let q1 = BigUint::from(q - 1);
    let rows = rows as u32;
    UCount {
        closed_form: &q1 * BigUint::from(cols + 1).pow(rows),
        derived: (q1 * BigUint::from(cols) + 1u32).pow(rows),
    }
}
