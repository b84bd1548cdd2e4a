//! Finite abelian groups with mixed moduli.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::matrix::{ExactMatrix, Rat};

pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbelianError {
    #[error("subgroup too large: more than {cap} elements")]
    TooLarge { cap: usize },
    #[error("element {0:?} has the wrong length for this group")]
    BadElement(Vec<u32>),
}

/// Z_{m_1} x ... x Z_{m_k}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    moduli: Vec<u32>,
}

/// Coordinates, always reduced against the parent moduli.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbelianElement(pub Vec<u32>);

impl AbelianElement {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }
}

impl AbelianGroup {
    pub fn new(moduli: Vec<u32>) -> Self {
        assert!(moduli.iter().all(|&m| m >= 1), "moduli must be positive");
        AbelianGroup { moduli }
    }

    pub fn trivial() -> Self {
        AbelianGroup { moduli: Vec::new() }
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> u128 {
        self.moduli.iter().map(|&m| m as u128).product()
    }

    pub fn zero(&self) -> AbelianElement {
        AbelianElement(vec![0; self.moduli.len()])
    }

    pub fn element(&self, coords: &[i64]) -> Result<AbelianElement, AbelianError> {
        if coords.len() != self.moduli.len() {
            return Err(AbelianError::BadElement(coords.iter().map(|&c| c as u32).collect()));
        }
        Ok(AbelianElement(coords.iter().zip(&self.moduli).map(|(&c, &m)| c.rem_euclid(m as i64) as u32).collect()))
    }

    pub fn add(&self, a: &AbelianElement, b: &AbelianElement) -> AbelianElement {
        AbelianElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.moduli)
                .map(|((&x, &y), &m)| ((x as u64 + y as u64) % m as u64) as u32)
                .collect(),
        )
    }

    pub fn neg(&self, a: &AbelianElement) -> AbelianElement {
        AbelianElement(a.0.iter().zip(&self.moduli).map(|(&x, &m)| (m - x) % m).collect())
    }

    pub fn scale(&self, k: i64, a: &AbelianElement) -> AbelianElement {
        AbelianElement(
            a.0.iter().zip(&self.moduli).map(|(&x, &m)| (k * x as i64).rem_euclid(m as i64) as u32).collect(),
        )
    }

    pub fn order_of(&self, a: &AbelianElement) -> u64 {
        a.0.iter().zip(&self.moduli).fold(1u64, |acc, (&x, &m)| {
            let m = m as u64;
            acc.lcm(&(m / m.gcd(&(x as u64))))
        })
    }

    /// Mixed-radix index, first coordinate fastest.
    pub fn index_of(&self, a: &AbelianElement) -> u64 {
        a.0.iter().zip(&self.moduli).rev().fold(0u64, |acc, (&x, &m)| acc * m as u64 + x as u64)
    }

    pub fn from_index(&self, mut idx: u64) -> AbelianElement {
        AbelianElement(
            self.moduli
                .iter()
                .map(|&m| {
                    let x = (idx % m as u64) as u32;
                    idx /= m as u64;
                    x
                })
                .collect(),
        )
    }

    pub fn elements(&self) -> impl Iterator<Item = AbelianElement> + '_ {
        (0..self.order() as u64).map(|i| self.from_index(i))
    }

    pub fn product(&self, other: &AbelianGroup) -> AbelianGroup {
        AbelianGroup { moduli: [self.moduli.clone(), other.moduli.clone()].concat() }
    }

    /// Subgroup generated by `gens`, enumerated up to `cap` elements.
    pub fn span(&self, gens: &[AbelianElement]) -> Result<Subgroup, AbelianError> {
        self.span_capped(gens, DEFAULT_ENUMERATION_CAP)
    }

    pub fn span_capped(&self, gens: &[AbelianElement], cap: usize) -> Result<Subgroup, AbelianError> {
        for g in gens {
            if g.0.len() != self.moduli.len() || g.0.iter().zip(&self.moduli).any(|(&x, &m)| x >= m) {
                return Err(AbelianError::BadElement(g.0.clone()));
            }
        }
        let zero = self.zero();
        let mut seen: HashSet<AbelianElement> = HashSet::from([zero.clone()]);
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    if seen.len() > cap {
                        return Err(AbelianError::TooLarge { cap });
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<AbelianElement> = seen.into_iter().collect();
        elements.sort();
        let factors = self.factors_of_span(gens);
        debug_assert_eq!(factors.iter().map(|&d| d as u128).product::<u128>(), elements.len() as u128);
        Ok(Subgroup { parent: self.clone(), gens: gens.to_vec(), elements, factors })
    }

    fn factors_of_span(&self, gens: &[AbelianElement]) -> Vec<u64> {
        let m = self.moduli.len();
        let mut rows: Vec<Vec<Rat>> =
            gens.iter().map(|g| g.0.iter().map(|&x| Rat::from_integer(x.into())).collect()).collect();
        for (i, &md) in self.moduli.iter().enumerate() {
            let mut r = vec![Rat::zero(); m];
            r[i] = Rat::from_integer(md.into());
            rows.push(r);
        }
        let relations: Vec<Vec<Rat>> = self
            .moduli
            .iter()
            .enumerate()
            .map(|(i, &md)| {
                let mut r = vec![Rat::zero(); m];
                r[i] = Rat::from_integer(md.into());
                r
            })
            .collect();
        if m == 0 {
            return Vec::new();
        }
        quotient_invariants(&ExactMatrix::from_rows(&rows), &ExactMatrix::from_rows(&relations))
    }
}

/// Invariant factors (all > 1, each dividing the next) of span(big)/span(small).
/// Both must span full-rank lattices of the same ambient dimension, with small inside big.
pub fn quotient_invariants(big: &ExactMatrix, small: &ExactMatrix) -> Vec<u64> {
    let b = big.hnf();
    let s = small.hnf();
    assert_eq!(b.rows(), b.cols(), "outer lattice must have full rank");
    assert_eq!(s.rows(), s.cols(), "inner lattice must have full rank");
    let coords = s.mul(&b.inverse().expect("full rank"));
    assert!(coords.is_integral(), "inner lattice is not contained in outer lattice");
    coords
        .snf()
        .diag
        .into_iter()
        .filter(|d| !d.is_one())
        .map(|d| d.to_u64().expect("invariant factor fits in u64"))
        .collect()
}

/// Invariant factors of the subgroup of (Q/Z)^m generated by the given rows.
pub fn char_group_structure(rows: &[Vec<Rat>]) -> Vec<u64> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = rows[0].len();
    // Identical columns impose identical constraints, so keep one of each.
    let mut cols: Vec<Vec<Rat>> = (0..m).map(|j| rows.iter().map(|r| r[j].clone() - r[j].floor()).collect()).collect();
    cols.sort();
    cols.dedup();
    let k = cols.len();
    let mut gens: Vec<Vec<Rat>> = (0..rows.len()).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let unit: Vec<Vec<Rat>> =
        (0..k).map(|j| (0..k).map(|l| if j == l { Rat::one() } else { Rat::zero() }).collect()).collect();
    gens.extend(unit.iter().cloned());
    quotient_invariants(&ExactMatrix::from_rows(&gens), &ExactMatrix::from_rows(&unit))
}

/// A subgroup together with its enumerated elements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Subgroup {
    parent: AbelianGroup,
    gens: Vec<AbelianElement>,
    elements: Vec<AbelianElement>,
    factors: Vec<u64>,
}

impl Subgroup {
    pub fn parent(&self) -> &AbelianGroup {
        &self.parent
    }

    pub fn gens(&self) -> &[AbelianElement] {
        &self.gens
    }

    pub fn elements(&self) -> &[AbelianElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &AbelianElement) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|x| other.contains(x))
    }
}

/// Renders invariant factors as e.g. `Z4 x Z2^3`, largest factor first; `1` for the trivial group.
pub fn structure_name(factors: &[u64]) -> String {
    if factors.is_empty() {
        return "1".to_string();
    }
    let mut fs = factors.to_vec();
    fs.sort_unstable_by(|a, b| b.cmp(a));
    let mut parts = Vec::new();
    let mut i = 0;
    while i < fs.len() {
        let j = fs[i..].iter().take_while(|&&x| x == fs[i]).count();
        parts.push(if j == 1 { format!("Z{}", fs[i]) } else { format!("Z{}^{}", fs[i], j) });
        i += j;
    }
    parts.join(" x ")
}

/// Label of an element of Z2 x Z2 given by its mixed-radix index: 0, 1, w, 1+w.
pub fn klein_label(index: u32) -> &'static str {
    ["0", "1", "w", "1+w"][index as usize]
}

pub fn parse_klein_label(s: &str) -> Option<u32> {
    match s {
        "0" => Some(0),
        "1" => Some(1),
        "w" => Some(2),
        "1+w" | "w+1" => Some(3),
        _ => None,
    }
}

impl fmt::Display for AbelianElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Greatest common divisor helper on BigInt for callers working with Smith diagonals.
pub fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::matrix::frac;

    #[test]
    fn cyclic_span_in_z4_z8() {
        let g = AbelianGroup::new(vec![4, 8]);
        let h = g.span(&[g.element(&[1, 2]).unwrap()]).unwrap();
        assert_eq!(h.order(), 4);
        assert_eq!(h.invariant_factors(), &[4]);
    }

    #[test]
    fn empty_span_is_trivial() {
        let g = AbelianGroup::new(vec![3, 5]);
        let h = g.span(&[]).unwrap();
        assert_eq!(h.order(), 1);
        assert!(h.invariant_factors().is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let g = AbelianGroup::new(vec![2; 12]);
        let gens: Vec<_> = (0..12)
            .map(|i| {
                let mut c = vec![0i64; 12];
                c[i] = 1;
                g.element(&c).unwrap()
            })
            .collect();
        assert_eq!(g.span_capped(&gens, 100).unwrap_err(), AbelianError::TooLarge { cap: 100 });
    }

    #[test]
    fn char_rows() {
        assert_eq!(char_group_structure(&[vec![frac(1, 2), frac(0, 1)], vec![frac(0, 1), frac(1, 2)]]), vec![2, 2]);
        assert_eq!(char_group_structure(&[vec![frac(3, 4)]]), vec![4]);
        assert_eq!(char_group_structure(&[vec![frac(1, 2), frac(1, 2)], vec![frac(1, 4), frac(3, 4)]]), vec![4]);
    }

    #[test]
    fn names() {
        assert_eq!(structure_name(&[2, 2, 2, 4]), "Z4 x Z2^3");
        assert_eq!(structure_name(&[]), "1");
        assert_eq!(structure_name(&[8]), "Z8");
    }
}
