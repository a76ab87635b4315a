//! Index arithmetic for condensed (strict upper triangle, row-major) storage.
//!
//! Pair `(i, j)` with `i < j` over `n` observations lives at
//! `i*n - i*(i+1)/2 + j - i - 1`.

/// Number of stored pairs for `n` observations.
#[inline]
pub fn condensed_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j < n`, in condensed storage.
#[inline]
pub fn rank(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n, "rank({n}, {i}, {j})");
    i * n - i * (i + 1) / 2 + j - i - 1
}

/// Position of the unordered pair `{a, b}`, `a != b`.
#[inline]
pub fn rank_unordered(n: usize, a: usize, b: usize) -> usize {
    if a < b {
        rank(n, a, b)
    } else {
        rank(n, b, a)
    }
}

/// Inverse of [`rank`]: the pair `(i, j)` stored at position `k`.
pub fn unrank(n: usize, k: usize) -> (usize, usize) {
    debug_assert!(k < condensed_len(n));
    // Start from the closed-form estimate, then correct for rounding.
    let nf = n as f64;
    let kf = k as f64;
    let disc = (2.0 * nf - 1.0) * (2.0 * nf - 1.0) - 8.0 * kf;
    let mut i = (((2.0 * nf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor() as usize;
    i = i.min(n - 2);
    while i > 0 && row_start(n, i) > k {
        i -= 1;
    }
    while i + 1 < n - 1 && row_start(n, i + 1) <= k {
        i += 1;
    }
    let j = k - row_start(n, i) + i + 1;
    (i, j)
}

#[inline]
fn row_start(n: usize, i: usize) -> usize {
    i * n - i * (i + 1) / 2
}
