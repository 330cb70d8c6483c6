//! Subset enumeration and binomial counts.

/// `C(n, k)` as a float; exact while the result fits in 2^53.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
///
/// Stops early and returns `false` when `f` returns `false`.
pub fn for_each_subset<F>(n: usize, k: usize, mut f: F) -> bool
where
    F: FnMut(&[usize]) -> bool,
{
    if k > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return false;
        }
        // Rightmost position that can still advance.
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}
