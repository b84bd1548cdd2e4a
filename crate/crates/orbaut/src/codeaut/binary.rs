//! Binary codes as bit masks: weight enumerators, Reed-Muller codes and
//! equivalence under coordinate permutations.

use std::collections::HashSet;

use super::Perm;

/// Number of words of each weight 0..=n.
pub fn weight_enumerator(words: &[u64], n: usize) -> Vec<u64> {
    let mut out = vec![0; n + 1];
    for w in words {
        out[w.count_ones() as usize] += 1;
    }
    out
}

/// All codewords of RM(r, m): evaluations of polynomials of degree <= r on F_2^m.
pub fn reed_muller(r: u32, m: u32) -> Vec<u64> {
    let n = 1u32 << m;
    let monomials: Vec<u32> = (0..n).filter(|s| s.count_ones() <= r).collect();
    let rows: Vec<u64> =
        monomials.iter().map(|&s| (0..n).filter(|&p| p & s == s).fold(0u64, |acc, p| acc | 1 << p)).collect();
    let mut words = vec![0u64];
    for row in rows {
        let more: Vec<u64> = words.iter().map(|w| w ^ row).collect();
        words.extend(more);
    }
    words.sort_unstable();
    words.dedup();
    words
}

fn permute(w: u64, image: &[u32]) -> u64 {
    let mut out = 0;
    let mut bits = w;
    while bits != 0 {
        let i = bits.trailing_zeros();
        out |= 1 << image[i as usize];
        bits &= bits - 1;
    }
    out
}

/// A coordinate permutation carrying code `a` onto code `b`, if one exists.
/// Positions are assigned in order; every minimum-weight word of `a` whose
/// support is fully assigned must land on a minimum-weight word of `b`.
pub fn equivalence(a: &[u64], b: &[u64], n: usize) -> Option<Perm> {
    if a.len() != b.len() || weight_enumerator(a, n) != weight_enumerator(b, n) {
        return None;
    }
    let d = a.iter().filter(|w| **w != 0).map(|w| w.count_ones()).min();
    let Some(d) = d else {
        return Some(Perm::identity(n));
    };
    let min_a: Vec<u64> = a.iter().copied().filter(|w| w.count_ones() == d).collect();
    let min_b: HashSet<u64> = b.iter().copied().filter(|w| w.count_ones() == d).collect();
    // words of a indexed by their highest position
    let mut closing: Vec<Vec<u64>> = vec![Vec::new(); n];
    for w in &min_a {
        closing[63 - w.leading_zeros() as usize].push(*w);
    }
    let search = Equivalence { n, closing, min_b, a, b_set: b.iter().copied().collect() };
    let mut image = vec![0u32; n];
    search.extend(0, &mut image, 0).then_some(Perm(image))
}

struct Equivalence<'a> {
    n: usize,
    closing: Vec<Vec<u64>>,
    min_b: HashSet<u64>,
    a: &'a [u64],
    b_set: HashSet<u64>,
}

impl Equivalence<'_> {
    fn extend(&self, i: usize, image: &mut [u32], used: u64) -> bool {
        if i == self.n {
            return self.a.iter().all(|w| self.b_set.contains(&permute(*w, image)));
        }
        for j in 0..self.n as u32 {
            if used >> j & 1 == 1 {
                continue;
            }
            image[i] = j;
            if self.closing[i].iter().all(|w| self.min_b.contains(&permute(*w, image)))
                && self.extend(i + 1, image, used | 1 << j)
            {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reed_muller_sizes() {
        let rm = reed_muller(2, 4);
        assert_eq!(rm.len(), 2048);
        let e = weight_enumerator(&rm, 16);
        assert_eq!((e[0], e[4], e[6], e[8], e[16]), (1, 140, 448, 870, 1));
        assert_eq!(reed_muller(1, 3).len(), 16);
    }

    #[test]
    fn shuffled_code_is_equivalent() {
        let rm = reed_muller(2, 4);
        let shuffle: Vec<u32> = vec![3, 14, 0, 9, 7, 1, 12, 5, 15, 2, 11, 6, 8, 13, 4, 10];
        let moved: Vec<u64> = rm.iter().map(|w| permute(*w, &shuffle)).collect();
        let p = equivalence(&moved, &rm, 16).expect("equivalent");
        assert!(moved.iter().all(|w| rm.contains(&permute(*w, &p.0))));
    }

    #[test]
    fn different_codes_are_not_equivalent() {
        let rm = reed_muller(1, 3);
        // even-weight code of length 8 has a different enumerator
        let even: Vec<u64> = (0u64..256).filter(|w| w.count_ones() % 2 == 0).collect();
        assert!(equivalence(&rm, &even, 8).is_none());
    }
}
