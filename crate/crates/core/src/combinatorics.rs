/// Advances `combo` (strictly increasing indices below `n`) to the next
/// k-subset in lexicographic order. Returns `false` after the last one.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `visit` on every k-subset of `0..n` in lexicographic order until it
/// returns `false`. Returns `false` if stopped early.
pub(crate) fn for_each_combination<F>(n: usize, k: usize, mut visit: F) -> bool
where
    F: FnMut(&[usize]) -> bool,
{
    if k > n {
        return true;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&combo) {
            return false;
        }
        if k == 0 || !next_combination(&mut combo, n) {
            return true;
        }
    }
}

/// All subsets of `0..n` with at most `max_size` members as bitmasks,
/// ordered by size then lexicographically. Requires `n <= 64`.
pub(crate) fn masks_up_to(n: usize, max_size: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for k in 0..=max_size.min(n) {
        for_each_combination(n, k, |c| {
            out.push(c.iter().fold(0u64, |m, &i| m | 1 << i));
            true
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn edge_sizes() {
        let mut count = 0;
        for_each_combination(3, 0, |c| {
            assert!(c.is_empty());
            count += 1;
            true
        });
        assert_eq!(count, 1);
        assert!(for_each_combination(2, 3, |_| panic!("no subsets")));
        assert_eq!(masks_up_to(3, 1), vec![0, 1, 2, 4]);
        assert_eq!(masks_up_to(5, 5).len(), 32);
    }
}
