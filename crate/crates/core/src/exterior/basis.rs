//! Strictly increasing multi-indices in lexicographic order, stored as bit masks.

use std::sync::OnceLock;

pub const MAX_DIM: usize = 16;

const fn binomial_table() -> [[usize; MAX_DIM + 1]; MAX_DIM + 1] {
    let mut t = [[0usize; MAX_DIM + 1]; MAX_DIM + 1];
    let mut n = 0;
    while n <= MAX_DIM {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            k += 1;
        }
        n += 1;
    }
    t
}

static BINOMIAL: [[usize; MAX_DIM + 1]; MAX_DIM + 1] = binomial_table();

/// `n choose k` for `n <= 16`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        0
    } else {
        BINOMIAL[n][k]
    }
}

fn lex_masks(dim: usize, degree: usize) -> Vec<u32> {
    fn rec(start: usize, dim: usize, left: usize, acc: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..=dim - left {
            rec(i + 1, dim, left - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::with_capacity(binomial(dim, degree));
    rec(0, dim, degree, 0, &mut out);
    out
}

static TABLES: OnceLock<Vec<Vec<Vec<u32>>>> = OnceLock::new();

/// Bit masks of all degree-`degree` multi-indices of `R^dim`, in lexicographic order.
pub fn masks(dim: usize, degree: usize) -> &'static [u32] {
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|n| (0..=n).map(|k| lex_masks(n, k)).collect())
            .collect()
    });
    &tables[dim][degree]
}

/// Lexicographic rank of the multi-index encoded by `mask` among all
/// multi-indices of the same length in `R^dim`.
pub fn rank(dim: usize, mask: u32) -> usize {
    let k = mask.count_ones() as usize;
    let mut complement = 0usize;
    let mut m = mask;
    let mut i = 0usize;
    while m != 0 {
        let c = m.trailing_zeros() as usize;
        complement += binomial(dim - 1 - c, k - i);
        m &= m - 1;
        i += 1;
    }
    binomial(dim, k) - 1 - complement
}

/// Indices set in `mask`, increasing.
pub fn indices(mask: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Sign of the shuffle taking the concatenation `I J` to increasing order.
/// Assumes the masks are disjoint.
#[inline]
pub fn merge_sign(left: u32, right: u32) -> f64 {
    let mut inversions = 0u32;
    let mut m = left;
    while m != 0 {
        let i = m.trailing_zeros();
        inversions += (right & ((1u32 << i) - 1)).count_ones();
        m &= m - 1;
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
