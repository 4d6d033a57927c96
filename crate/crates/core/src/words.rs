//! Length-N words over {1..n} in lexicographic order, and the cell budget.

use crate::error::{Error, Result};

/// Default cap on n^N cells; override with the HLAB_BUDGET_CELLS env var.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 22;

pub fn cell_budget() -> usize {
    std::env::var("HLAB_BUDGET_CELLS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_CELL_BUDGET)
}

/// n^N, as a resource error if it exceeds the budget.
pub fn check_cell_budget(n: usize, depth: usize) -> Result<usize> {
    let budget = cell_budget();
    let needed = (n as u128)
        .checked_pow(depth as u32)
        .unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::Resource { needed, budget });
    }
    Ok(needed as usize)
}

pub fn word_count(n: usize, depth: usize) -> usize {
    n.pow(depth as u32)
}

/// The idx-th word of length `depth` in lexicographic order (symbols 1..=n,
/// leading symbol most significant).
pub fn word_at(n: usize, depth: usize, idx: usize) -> Vec<u8> {
    let mut w = vec![1u8; depth];
    let mut rest = idx;
    for k in (0..depth).rev() {
        w[k] = (rest % n) as u8 + 1;
        rest /= n;
    }
    debug_assert_eq!(rest, 0);
    w
}

pub fn word_index(n: usize, word: &[u8]) -> usize {
    word.iter().fold(0, |acc, &s| acc * n + (s as usize - 1))
}

/// Index arithmetic for sigma (drop the first symbol) and its sections.
pub fn drop_head_index(n: usize, depth: usize, idx: usize) -> usize {
    idx % word_count(n, depth - 1)
}

/// Index of i.v given the index of v at depth-1 resolution.
pub fn prepend_index(n: usize, depth: usize, symbol: usize, tail_idx: usize) -> usize {
    (symbol - 1) * word_count(n, depth - 1) + tail_idx
}

/// First symbol of the idx-th word.
pub fn head_symbol(n: usize, depth: usize, idx: usize) -> u8 {
    (idx / word_count(n, depth - 1)) as u8 + 1
}
