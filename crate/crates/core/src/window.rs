//! Context windows inside one utterance. Windows never cross utterance
//! boundaries; the speech and text objectives share this enumeration.

/// Positions `m ≠ n` with `|m − n| ≤ k` inside an utterance of `len` items,
/// in increasing order (`n−k..n−1`, then `n+1..n+k`).
pub fn neighbors(n: usize, len: usize, k: usize) -> impl Iterator<Item = usize> {
    let lo = n.saturating_sub(k);
    let hi = n.saturating_add(k).min(len.saturating_sub(1));
    (lo..=hi).filter(move |&m| m != n && m < len)
}

/// Number of in-window neighbours of position `n`.
pub fn neighbor_count(n: usize, len: usize, k: usize) -> usize {
    neighbors(n, len, k).count()
}
