//! Exhaustive enumeration of maps `{0..n} → {0..k}`.
//!
//! Both enumerators visit assignments in lexicographic order (element 0 is
//! the most significant digit) so that "first maximum wins" yields the
//! lexicographically least witness.

use crate::error::{Error, Result};

/// Largest number of assignments any enumeration may visit.
pub const MAX_ASSIGNMENTS: u64 = 1 << 24;

/// Fails with a capacity error when `k^n` exceeds [`MAX_ASSIGNMENTS`].
pub fn check_capacity(n: usize, k: usize) -> Result<()> {
    let mut total: u64 = 1;
    for _ in 0..n {
        total = total.saturating_mul(k as u64);
        if total > MAX_ASSIGNMENTS {
            return Err(Error::Capacity(format!(
                "{k}^{n} assignments exceed the enumeration limit of 2^24"
            )));
        }
    }
    Ok(())
}

/// Visits every map `{0..n} → {0..k}`.
pub fn for_each_map(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    let mut digits = vec![0usize; n];
    loop {
        visit(&digits);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Visits every partition of `{0..n}` into at most `k` non-empty blocks,
/// encoded as a restricted growth string: `digits[0] = 0` and each digit is
/// at most one more than the maximum before it.
pub fn for_each_partition(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    if n == 0 {
        visit(&[]);
        return;
    }
    let mut digits = vec![0usize; n];
    // prefix_max[i] = max(digits[0..i])
    let mut prefix_max = vec![0usize; n];
    loop {
        visit(&digits);
        let mut pos = n;
        loop {
            if pos <= 1 {
                return;
            }
            pos -= 1;
            let limit = (prefix_max[pos] + 1).min(k - 1);
            if digits[pos] < limit {
                digits[pos] += 1;
                break;
            }
        }
        for i in pos + 1..n {
            digits[i] = 0;
            prefix_max[i] = prefix_max[i - 1].max(digits[i - 1]);
        }
    }
}

/// Block masses of `probs` under `assignment` into `k` blocks.
pub fn block_masses(probs: &[f64], assignment: &[usize], k: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(k, 0.0);
    for (&b, &p) in assignment.iter().zip(probs) {
        out[b] += p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stirling2(n: usize, k: usize) -> u64 {
        if n == 0 && k == 0 {
            return 1;
        }
        if n == 0 || k == 0 {
            return 0;
        }
        k as u64 * stirling2(n - 1, k) + stirling2(n - 1, k - 1)
    }

    #[test]
    fn maps_are_lexicographic_and_complete() {
        let mut seen = Vec::new();
        for_each_map(3, 2, |d| seen.push(d.to_vec()));
        assert_eq!(seen.len(), 8);
        assert_eq!(seen[0], vec![0, 0, 0]);
        assert_eq!(seen[1], vec![0, 0, 1]);
        assert_eq!(seen[7], vec![1, 1, 1]);
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
    }

    #[test]
    fn partition_counts_match_stirling_numbers() {
        for n in 1..=7 {
            for k in 1..=4 {
                let mut count = 0u64;
                for_each_partition(n, k, |d| {
                    assert_eq!(d[0], 0);
                    assert!(d.iter().all(|&b| b < k));
                    count += 1;
                });
                let expected: u64 = (1..=k).map(|j| stirling2(n, j)).sum();
                assert_eq!(count, expected, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn partitions_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_partition(4, 3, |d| seen.push(d.to_vec()));
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
    }

    #[test]
    fn capacity_limit() {
        assert!(check_capacity(24, 2).is_ok());
        assert!(check_capacity(25, 2).is_err());
        assert!(check_capacity(15, 3).is_ok());
        assert!(check_capacity(16, 3).is_err());
    }
}
