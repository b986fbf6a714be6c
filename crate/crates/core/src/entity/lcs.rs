/// Length of the longest common character subsequence of `a` and `b`.
pub fn lcs_length(a: &str, b: &str) -> usize {
    if a.is_ascii() && b.is_ascii() {
        lcs(a.as_bytes(), b.as_bytes())
    } else {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        lcs(&a, &b)
    }
}

fn lcs<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Longest string that is a subsequence of both, by enumerating every
    /// subsequence of the shorter one.
    fn brute_force(a: &str, b: &str) -> usize {
        let (s, t): (Vec<char>, Vec<char>) = if a.chars().count() <= b.chars().count() {
            (a.chars().collect(), b.chars().collect())
        } else {
            (b.chars().collect(), a.chars().collect())
        };
        let is_subseq = |sub: &[char]| {
            let mut it = t.iter();
            sub.iter().all(|c| it.any(|x| x == c))
        };
        let mut best = 0;
        for mask in 0u32..(1 << s.len()) {
            let ones = mask.count_ones() as usize;
            if ones <= best {
                continue;
            }
            let sub: Vec<char> = (0..s.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| s[i])
                .collect();
            if is_subseq(&sub) {
                best = ones;
            }
        }
        best
    }

    #[test]
    fn examples() {
        assert_eq!(lcs_length("titanic", "titanic"), 7);
        assert_eq!(lcs_length("titanic", "titanik"), brute_force("titanic", "titanik"));
        assert_eq!(lcs_length("titanic", "titanik"), 6);
        assert_eq!(lcs_length("abc", ""), 0);
        assert_eq!(lcs_length("", ""), 0);
        assert_eq!(lcs_length("amélie", "amelie"), 5);
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in "[abc ]{0,10}", b in "[abc ]{0,10}") {
            prop_assert_eq!(lcs_length(&a, &b), brute_force(&a, &b));
        }

        #[test]
        fn symmetric_and_bounded(a in "\\PC{0,20}", b in "\\PC{0,20}") {
            let l = lcs_length(&a, &b);
            prop_assert_eq!(l, lcs_length(&b, &a));
            prop_assert!(l <= a.chars().count().min(b.chars().count()));
            prop_assert_eq!(lcs_length(&a, &a), a.chars().count());
        }
    }
}
