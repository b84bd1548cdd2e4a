//! Setwise stabilizers of codes under local symmetries and slot permutations.

pub mod binary;
pub mod perm;

use std::collections::HashSet;

use log::debug;
use thiserror::Error;

pub use perm::{Perm, PermGroup, StabChain};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, Clone)]
pub enum StabilizerError {
    #[error("node budget of {budget} exceeded; order {lower_bound} is a lower bound only")]
    Budget { budget: u64, lower_bound: u128, generators: Vec<AmbientSymmetry> },
    #[error("invalid ambient action: {0}")]
    InvalidAction(String),
    #[error("generator does not stabilize the code")]
    Unsound,
}

/// Slots with label sets, local symmetry groups and permutable classes.
#[derive(Clone, Debug)]
pub struct AmbientAction {
    sizes: Vec<u32>,
    /// All elements of each slot's local group; element 0 is the identity.
    local: Vec<Vec<Vec<u32>>>,
    classes: Vec<usize>,
}

impl AmbientAction {
    /// `local[j]` lists generators of slot j's local group, each fixing label 0;
    /// slots with equal `classes` entries may be permuted and must carry the
    /// same local group.
    pub fn new(sizes: Vec<u32>, local_gens: Vec<Vec<Vec<u32>>>, classes: Vec<usize>) -> Result<Self, StabilizerError> {
        let t = sizes.len();
        if local_gens.len() != t || classes.len() != t {
            return Err(StabilizerError::InvalidAction("length mismatch".into()));
        }
        let mut local = Vec::with_capacity(t);
        for (j, gens) in local_gens.iter().enumerate() {
            for g in gens {
                let mut seen = g.clone();
                seen.sort_unstable();
                if g.len() != sizes[j] as usize || seen != (0..sizes[j]).collect::<Vec<_>>() {
                    return Err(StabilizerError::InvalidAction(format!("slot {j}: not a bijection")));
                }
                if g[0] != 0 {
                    return Err(StabilizerError::InvalidAction(format!("slot {j}: label 0 is not fixed")));
                }
            }
            local.push(crate::rootdata::close_permutations(sizes[j] as usize, gens));
        }
        for i in 0..t {
            for j in 0..t {
                if classes[i] == classes[j] && (sizes[i] != sizes[j] || local[i] != local[j]) {
                    return Err(StabilizerError::InvalidAction(format!("slots {i} and {j} differ but share a class")));
                }
            }
        }
        Ok(AmbientAction { sizes, local, classes })
    }

    pub fn slots(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn local_group(&self, slot: usize) -> &[Vec<u32>] {
        &self.local[slot]
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    /// Order of the whole ambient group.
    pub fn order(&self) -> u128 {
        let local: u128 = self.local.iter().map(|l| l.len() as u128).product();
        let mut counts = std::collections::BTreeMap::new();
        for c in &self.classes {
            *counts.entry(*c).or_insert(0u128) += 1;
        }
        local * counts.values().map(|&k| (1..=k).product::<u128>()).product::<u128>()
    }

    pub fn identity(&self) -> AmbientSymmetry {
        AmbientSymmetry {
            perm: (0..self.slots()).collect(),
            local: self.sizes.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    fn offsets(&self) -> Vec<u32> {
        let mut o = Vec::with_capacity(self.slots());
        let mut acc = 0;
        for &s in &self.sizes {
            o.push(acc);
            acc += s;
        }
        o
    }

    pub fn point_count(&self) -> usize {
        self.sizes.iter().sum::<u32>() as usize
    }

    /// Action on the points (slot, label).
    pub fn point_perm(&self, g: &AmbientSymmetry) -> Perm {
        let off = self.offsets();
        let mut img = vec![0; self.point_count()];
        for j in 0..self.slots() {
            for a in 0..self.sizes[j] {
                img[(off[j] + a) as usize] = off[g.perm[j]] + g.local[j][a as usize];
            }
        }
        Perm(img)
    }

    pub fn is_member(&self, g: &AmbientSymmetry) -> bool {
        (0..self.slots()).all(|j| self.classes[g.perm[j]] == self.classes[j] && self.local[j].contains(&g.local[j]))
    }
}

/// Slot permutation plus a local symmetry per source slot.
/// Slot `perm[j]` of the image receives `local[j]` applied to entry j.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct AmbientSymmetry {
    pub perm: Vec<usize>,
    pub local: Vec<Vec<u32>>,
}

impl AmbientSymmetry {
    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        let mut y = vec![0; x.len()];
        for (j, &v) in x.iter().enumerate() {
            y[self.perm[j]] = self.local[j][v as usize];
        }
        y
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &AmbientSymmetry) -> AmbientSymmetry {
        let t = self.perm.len();
        let mut perm = vec![0; t];
        let mut local = vec![Vec::new(); t];
        for j in 0..t {
            let mid = self.perm[j];
            perm[j] = other.perm[mid];
            local[j] = self.local[j].iter().map(|&a| other.local[mid][a as usize]).collect();
        }
        AmbientSymmetry { perm, local }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
            && self.local.iter().all(|l| l.iter().enumerate().all(|(i, &x)| i as u32 == x))
    }

    pub fn slot_perm(&self) -> Perm {
        Perm(self.perm.iter().map(|&x| x as u32).collect())
    }

    pub fn stabilizes(&self, code: &HashSet<Vec<u32>>) -> bool {
        code.iter().all(|c| code.contains(&self.apply(c)))
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerResult {
    pub generators: Vec<AmbientSymmetry>,
    pub order: u128,
    pub nodes: u64,
    pub orbit_sizes: Vec<usize>,
}

/// Search state for one stabilizer computation.
struct Search<'a> {
    amb: &'a AmbientAction,
    code: Vec<Vec<u32>>,
    base: Vec<usize>,
    // value histogram of each slot, used to filter (source, target, local) choices
    hist: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Choice {
    target: usize,
    local: usize,
}

impl<'a> Search<'a> {
    fn compatible(&self, s: usize, c: Choice) -> bool {
        if self.amb.classes[s] != self.amb.classes[c.target] {
            return false;
        }
        let g = &self.amb.local[s][c.local];
        let mut mapped = vec![0usize; self.amb.sizes[s] as usize];
        for (a, &n) in self.hist[s].iter().enumerate() {
            mapped[g[a] as usize] = n;
        }
        mapped == self.hist[c.target]
    }

    fn choices(&self, s: usize) -> Vec<Choice> {
        let mut out = Vec::new();
        for target in 0..self.amb.slots() {
            for local in 0..self.amb.local[s].len() {
                let c = Choice { target, local };
                if self.compatible(s, c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Extend source/target keys by one base level and test multiset equality.
    fn step(&self, src: &mut [u128], dst: &mut [u128], s: usize, c: Choice) -> bool {
        let radix = self.amb.sizes[s] as u128;
        let g = &self.amb.local[s][c.local];
        for (w, word) in self.code.iter().enumerate() {
            src[w] = src[w] * radix + g[word[s] as usize] as u128;
            dst[w] = dst[w] * radix + word[c.target] as u128;
        }
        let mut a = src.to_vec();
        let mut b = dst.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    fn element(&self, assigned: &[Choice]) -> AmbientSymmetry {
        let t = self.amb.slots();
        let mut perm = vec![0; t];
        let mut local = vec![Vec::new(); t];
        for (k, c) in assigned.iter().enumerate() {
            let s = self.base[k];
            perm[s] = c.target;
            local[s] = self.amb.local[s][c.local].clone();
        }
        AmbientSymmetry { perm, local }
    }

    /// Depth-first search for any stabilizing element extending `assigned`.
    fn find(
        &mut self,
        assigned: &mut Vec<Choice>,
        used: &mut Vec<bool>,
        src: &[u128],
        dst: &[u128],
    ) -> Result<Option<AmbientSymmetry>, ()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(());
        }
        let level = assigned.len();
        if level == self.base.len() {
            return Ok(Some(self.element(assigned)));
        }
        let s = self.base[level];
        for c in self.choices(s) {
            if used[c.target] {
                continue;
            }
            let mut s2 = src.to_vec();
            let mut d2 = dst.to_vec();
            if !self.step(&mut s2, &mut d2, s, c) {
                continue;
            }
            used[c.target] = true;
            assigned.push(c);
            let r = self.find(assigned, used, &s2, &d2);
            assigned.pop();
            used[c.target] = false;
            if let Some(g) = r? {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }
}

/// Image of a level-k choice under an ambient element.
fn act_on_choice(amb: &AmbientAction, s: usize, c: Choice, g: &AmbientSymmetry) -> Choice {
    let cur = &amb.local[s][c.local];
    let composed: Vec<u32> = cur.iter().map(|&a| g.local[c.target][a as usize]).collect();
    let local = amb.local[s].iter().position(|x| *x == composed).expect("local groups are closed");
    Choice { target: g.perm[c.target], local }
}

/// Full stabilizer of `code` (a set of label tuples) in the ambient group.
pub fn stabilizer(amb: &AmbientAction, code: &[Vec<u32>], budget: u64) -> Result<StabilizerResult, StabilizerError> {
    let t = amb.slots();
    // keys start from the word weight, which every ambient element preserves
    let bits: f64 = amb.sizes.iter().map(|&s| (s.max(2) as f64).log2()).sum::<f64>() + ((t + 1) as f64).log2();
    if bits > 127.0 {
        return Err(StabilizerError::InvalidAction("too many slots for packed keys".into()));
    }
    let mut hist = vec![Vec::new(); t];
    for j in 0..t {
        hist[j] = vec![0usize; amb.sizes[j] as usize];
        for w in code {
            hist[j][w[j] as usize] += 1;
        }
    }
    // base: slots whose (class, histogram) is rarest first
    let mut base: Vec<usize> = (0..t).collect();
    let rarity = |j: usize| {
        (0..t)
            .filter(|&i| {
                amb.classes[i] == amb.classes[j] && {
                    let mut a = hist[i].clone();
                    let mut b = hist[j].clone();
                    a.sort_unstable();
                    b.sort_unstable();
                    a == b
                }
            })
            .count()
    };
    base.sort_by_key(|&j| (rarity(j), j));
    let mut search = Search { amb, code: code.to_vec(), base: base.clone(), hist, nodes: 0, budget };

    let seed: Vec<u128> = code.iter().map(|w| w.iter().filter(|&&x| x != 0).count() as u128).collect();
    // levels processed deepest first; gens[k] fix base[0..k] pointwise
    let mut gens: Vec<AmbientSymmetry> = Vec::new();
    let mut orbit_sizes = vec![1usize; t];
    for k in (0..t).rev() {
        // prefix: identity on base[0..k]
        let mut src = seed.clone();
        let mut dst = seed.clone();
        let mut assigned = Vec::new();
        let mut used = vec![false; t];
        for &s in &base[..k] {
            let c = Choice { target: s, local: 0 };
            let ok = search.step(&mut src, &mut dst, s, c);
            debug_assert!(ok);
            assigned.push(c);
            used[s] = true;
        }
        let s = base[k];
        let level_gens: Vec<AmbientSymmetry> = gens.clone();
        let mut orbit: Vec<Choice> = vec![Choice { target: s, local: 0 }];
        let close = |orbit: &mut Vec<Choice>, gs: &[AmbientSymmetry]| {
            let mut i = 0;
            while i < orbit.len() {
                for g in gs {
                    let d = act_on_choice(amb, s, orbit[i], g);
                    if !orbit.contains(&d) {
                        orbit.push(d);
                    }
                }
                i += 1;
            }
        };
        let mut known = level_gens;
        close(&mut orbit, &known);
        for c in search.choices(s) {
            if used[c.target] || orbit.contains(&c) {
                continue;
            }
            let mut s2 = src.clone();
            let mut d2 = dst.clone();
            if !search.step(&mut s2, &mut d2, s, c) {
                continue;
            }
            used[c.target] = true;
            assigned.push(c);
            let found = search.find(&mut assigned, &mut used, &s2, &d2);
            assigned.pop();
            used[c.target] = false;
            match found {
                Ok(Some(g)) => {
                    debug!("level {k}: new generator, {} nodes", search.nodes);
                    known.push(g.clone());
                    gens.push(g);
                    close(&mut orbit, &known);
                }
                Ok(None) => {}
                Err(()) => {
                    let lower_bound = orbit_sizes.iter().map(|&x| x as u128).product::<u128>();
                    return Err(StabilizerError::Budget { budget, lower_bound, generators: gens });
                }
            }
        }
        orbit_sizes[k] = orbit.len();
    }
    let order: u128 = orbit_sizes.iter().map(|&x| x as u128).product();

    // soundness and order recheck outside the search
    let set: HashSet<Vec<u32>> = code.iter().cloned().collect();
    for g in &gens {
        if !amb.is_member(g) || !g.stabilizes(&set) {
            return Err(StabilizerError::Unsound);
        }
    }
    let pg = PermGroup::new(amb.point_count(), gens.iter().map(|g| amb.point_perm(g)).collect());
    if pg.order() != order {
        return Err(StabilizerError::Unsound);
    }
    Ok(StabilizerResult { generators: gens, order, nodes: search.nodes, orbit_sizes })
}

/// Aut1 (trivial slot permutation) and Aut2 (slot permutation image) of a stabilizer.
#[derive(Clone, Debug)]
pub struct AutSplit {
    pub aut1: StabilizerResult,
    pub aut1_invariants: Option<Vec<u64>>,
    pub aut2: PermGroup,
}

/// Aut2 is read off the generators; Aut1 is recomputed as the stabilizer in the
/// product of local groups and must satisfy |Aut1| |Aut2| = |Aut|.
pub fn split_aut1_aut2(
    amb: &AmbientAction,
    code: &[Vec<u32>],
    res: &StabilizerResult,
    budget: u64,
) -> Result<AutSplit, StabilizerError> {
    let aut2 = PermGroup::new(amb.slots(), res.generators.iter().map(|g| g.slot_perm()).collect());
    let local_only = AmbientAction { classes: (0..amb.slots()).collect(), ..amb.clone() };
    let aut1 = stabilizer(&local_only, code, budget)?;
    if aut1.order * aut2.order() != res.order {
        return Err(StabilizerError::Unsound);
    }
    let aut1_invariants =
        PermGroup::new(amb.point_count(), aut1.generators.iter().map(|g| amb.point_perm(g)).collect())
            .abelian_invariants();
    Ok(AutSplit { aut1, aut1_invariants, aut2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_code(sizes: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &s in sizes {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..s).map(move |a| {
                        let mut v = w.clone();
                        v.push(a);
                        v
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn identity_only_ambient() {
        let amb = AmbientAction::new(vec![2, 2, 2], vec![vec![]; 3], vec![0, 1, 2]).unwrap();
        let r = stabilizer(&amb, &[vec![0, 0, 0], vec![1, 1, 0]], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.order, 1);
    }

    #[test]
    fn full_code_gives_whole_ambient() {
        let neg3 = vec![vec![0, 2, 1]];
        let amb =
            AmbientAction::new(vec![3, 3, 3, 2], vec![neg3.clone(), neg3.clone(), neg3, vec![]], vec![0, 0, 0, 1])
                .unwrap();
        let r = stabilizer(&amb, &full_code(&[3, 3, 3, 2]), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.order, amb.order());
        assert_eq!(r.order, 8 * 6);
    }

    #[test]
    fn repetition_code() {
        // {000, 111} in Sym3 with trivial local groups
        let amb = AmbientAction::new(vec![2, 2, 2], vec![vec![]; 3], vec![0, 0, 0]).unwrap();
        let r = stabilizer(&amb, &[vec![0, 0, 0], vec![1, 1, 1]], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.order, 6);
        let split = split_aut1_aut2(&amb, &[vec![0, 0, 0], vec![1, 1, 1]], &r, DEFAULT_BUDGET).unwrap();
        assert_eq!(split.aut1.order, 1);
        assert_eq!(split.aut2.order(), 6);
    }

    #[test]
    fn composition_matches_apply() {
        let a = AmbientSymmetry { perm: vec![1, 2, 0], local: vec![vec![1, 0], vec![0, 1], vec![1, 0]] };
        let b = AmbientSymmetry { perm: vec![0, 2, 1], local: vec![vec![0, 1], vec![1, 0], vec![0, 1]] };
        let x = vec![0, 1, 1];
        assert_eq!(a.then(&b).apply(&x), b.apply(&a.apply(&x)));
    }
}
