//! Normalized edit similarity between actions.

use crate::scalar::Scalar;

/// Length of the longest common subsequence of two char slices.
fn lcs_len(a: &[char], b: &[char]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut row = vec![0usize; short.len() + 1];
    for &lc in long {
        let mut diag = 0;
        for (j, &sc) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if lc == sc { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[short.len()]
}

/// Edit distance where insertion and deletion cost 1 and substitution costs 2.
///
/// Equal to `|a| + |b| - 2 * LCS(a, b)`.
pub fn indel_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    a.len() + b.len() - 2 * lcs_len(&a, &b)
}

/// Levenshtein ratio in `[0, 1]`: `(|a| + |b| - D) / (|a| + |b|)` with `D` the
/// substitution-cost-2 edit distance. Lengths count Unicode scalar values.
/// Two empty strings are identical (ratio 1).
pub fn levenshtein_ratio<F: Scalar>(a: &str, b: &str) -> F {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return F::one();
    }
    let distance = total - 2 * lcs_len(&a, &b);
    F::from_count(total - distance) / F::from_count(total)
}
