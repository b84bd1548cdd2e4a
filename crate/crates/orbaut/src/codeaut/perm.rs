//! Permutations and a small Schreier-Sims implementation.

use std::fmt;

/// A permutation of {0..n}, stored as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(pub Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.0.len()];
        let mut l: u64 = 1;
        for i in 0..self.0.len() {
            if seen[i] {
                continue;
            }
            let mut len = 0u64;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = self.0[j] as usize;
                len += 1;
            }
            l = num_integer::lcm(l, len);
        }
        l
    }

    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for i in 0..self.0.len() {
            if seen[i] || self.0[i] as usize == i {
                continue;
            }
            let mut c = Vec::new();
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                c.push(j as u32);
                j = self.0[j] as usize;
            }
            out.push(c);
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Level {
    base: u32,
    gens: Vec<Perm>,
    orbit: Vec<u32>,
    // transversal[x] maps base to x
    transversal: Vec<Option<Perm>>,
}

impl Level {
    fn new(base: u32, n: usize) -> Self {
        let mut transversal = vec![None; n];
        transversal[base as usize] = Some(Perm::identity(n));
        Level { base, gens: Vec::new(), orbit: vec![base], transversal }
    }
}

/// Base and strong generating set of a permutation group.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabChain {
    pub fn new(degree: usize, gens: &[Perm]) -> Self {
        Self::with_base(degree, gens, &[])
    }

    /// Chain whose base starts with the given points.
    pub fn with_base(degree: usize, gens: &[Perm], prefix: &[u32]) -> Self {
        let mut chain = StabChain { degree, levels: prefix.iter().map(|&b| Level::new(b, degree)).collect() };
        for g in gens {
            chain.extend(0, g.clone());
        }
        chain
    }

    fn sift(&self, from: usize, g: &Perm) -> (Perm, usize) {
        let mut h = g.clone();
        for (i, lvl) in self.levels.iter().enumerate().skip(from) {
            let x = h.apply(lvl.base);
            match &lvl.transversal[x as usize] {
                Some(t) => h = h.then(&t.inverse()),
                None => return (h, i),
            }
        }
        (h, self.levels.len())
    }

    fn extend(&mut self, i: usize, g: Perm) {
        let (h, _) = self.sift(i, &g);
        if h.is_identity() {
            return;
        }
        if i == self.levels.len() {
            let moved = h.0.iter().enumerate().find(|(a, &b)| *a as u32 != b).map(|(a, _)| a as u32).unwrap();
            self.levels.push(Level::new(moved, self.degree));
        }
        // add the original element; its sifted residue is only used to detect membership
        self.levels[i].gens.push(g);
        let lvl = &mut self.levels[i];
        let mut k = 0;
        while k < lvl.orbit.len() {
            let p = lvl.orbit[k];
            for s in &lvl.gens {
                let q = s.apply(p);
                if lvl.transversal[q as usize].is_none() {
                    let t = lvl.transversal[p as usize].as_ref().unwrap().then(s);
                    lvl.transversal[q as usize] = Some(t);
                    lvl.orbit.push(q);
                }
            }
            k += 1;
        }
        let mut schreier = Vec::new();
        for &p in &lvl.orbit {
            let tp = lvl.transversal[p as usize].as_ref().unwrap();
            for s in &lvl.gens {
                let q = s.apply(p);
                let tq = lvl.transversal[q as usize].as_ref().unwrap();
                let sg = tp.then(s).then(&tq.inverse());
                if !sg.is_identity() {
                    schreier.push(sg);
                }
            }
        }
        for sg in schreier {
            self.extend(i + 1, sg);
        }
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.sift(0, g).0.is_identity()
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Generators of the pointwise stabilizer of the first `k` base points.
    pub fn stabilizer_gens(&self, k: usize) -> Vec<Perm> {
        self.levels.iter().skip(k).flat_map(|l| l.gens.iter().cloned()).collect()
    }
}

/// A permutation group given by generators.
#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Perm>,
    chain: StabChain,
}

impl PermGroup {
    pub fn new(degree: usize, gens: Vec<Perm>) -> Self {
        let gens: Vec<Perm> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        let chain = StabChain::new(degree, &gens);
        PermGroup { degree, gens, chain }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn gens(&self) -> &[Perm] {
        &self.gens
    }

    pub fn order(&self) -> u128 {
        self.chain.order()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.chain.contains(g)
    }

    pub fn orbits(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for start in 0..self.degree {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut orb = vec![start as u32];
            let mut k = 0;
            while k < orb.len() {
                let p = orb[k];
                for g in &self.gens {
                    let q = g.apply(p) as usize;
                    if !seen[q] {
                        seen[q] = true;
                        orb.push(q as u32);
                    }
                }
                k += 1;
            }
            orb.sort();
            out.push(orb);
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().all(|a| self.gens.iter().all(|b| a.then(b) == b.then(a)))
    }

    /// Largest k such that the group is k-transitive (0 if intransitive).
    pub fn transitivity(&self) -> usize {
        let mut gens = self.gens.clone();
        let mut fixed: Vec<u32> = Vec::new();
        let mut k = 0;
        while fixed.len() < self.degree {
            let g = PermGroup::new(self.degree, gens.clone());
            let remaining: Vec<u32> = (0..self.degree as u32).filter(|p| !fixed.contains(p)).collect();
            let orbs = g.orbits();
            let orbit_of_first = orbs.iter().find(|o| o.contains(&remaining[0])).unwrap();
            if orbit_of_first.len() != remaining.len() {
                break;
            }
            k += 1;
            fixed.push(remaining[0]);
            let chain = StabChain::with_base(self.degree, &self.gens, &fixed);
            gens = chain.stabilizer_gens(fixed.len());
        }
        k
    }

    /// All elements; only for small groups.
    pub fn elements(&self) -> Vec<Perm> {
        let id = Perm::identity(self.degree);
        let mut out = vec![id.clone()];
        let mut seen = std::collections::HashSet::from([id]);
        let mut k = 0;
        while k < out.len() {
            for g in &self.gens {
                let h = out[k].then(g);
                if seen.insert(h.clone()) {
                    out.push(h);
                }
            }
            k += 1;
        }
        out
    }

    /// Invariant factors of an abelian group, from counts of element orders.
    pub fn abelian_invariants(&self) -> Option<Vec<u64>> {
        if !self.is_abelian() {
            return None;
        }
        let orders: Vec<u64> = self.elements().iter().map(|e| e.order()).collect();
        let n = orders.len() as u64;
        let mut primary: Vec<Vec<u64>> = Vec::new();
        let mut m = n;
        let mut p = 2;
        while m > 1 {
            if m.is_multiple_of(p) {
                let mut p_part = 1;
                while m.is_multiple_of(p) {
                    m /= p;
                    p_part *= p;
                }
                // r_j = log_p(c_j / c_{j-1}) counts cyclic factors of order >= p^j,
                // where c_j = #{g : g^(p^j) = 1}
                let mut r = Vec::new();
                let mut prev = 1u64;
                let mut pj = 1u64;
                while prev < p_part {
                    pj *= p;
                    let c = orders.iter().filter(|&&o| pj.is_multiple_of(o)).count() as u64;
                    let mut x = c / prev;
                    let mut k = 0;
                    while x > 1 {
                        x /= p;
                        k += 1;
                    }
                    r.push(k);
                    prev = c;
                }
                let mut parts = Vec::new();
                for j in 0..r.len() {
                    let next = r.get(j + 1).copied().unwrap_or(0);
                    for _ in next..r[j] {
                        parts.push(p.pow(j as u32 + 1));
                    }
                }
                parts.sort_unstable_by(|a, b| b.cmp(a));
                primary.push(parts);
            }
            p += 1;
        }
        let len = primary.iter().map(|v| v.len()).max().unwrap_or(0);
        let mut factors: Vec<u64> =
            (0..len).map(|i| primary.iter().filter_map(|parts| parts.get(i)).product()).collect();
        factors.sort_unstable();
        Some(factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: usize, cycle: &[u32]) -> Perm {
        let mut p: Vec<u32> = (0..n as u32).collect();
        for w in 0..cycle.len() {
            p[cycle[w] as usize] = cycle[(w + 1) % cycle.len()];
        }
        Perm(p)
    }

    #[test]
    fn symmetric_group_orders() {
        for n in 2..9 {
            let g = PermGroup::new(n, vec![cyc(n, &[0, 1]), cyc(n, &(0..n as u32).collect::<Vec<_>>())]);
            assert_eq!(g.order(), (1..=n as u128).product());
            assert_eq!(g.transitivity(), n);
        }
    }

    #[test]
    fn alternating_group() {
        let g = PermGroup::new(5, vec![cyc(5, &[0, 1, 2]), cyc(5, &[2, 3, 4])]);
        assert_eq!(g.order(), 60);
        assert_eq!(g.transitivity(), 3);
    }

    #[test]
    fn abelian_invariants_of_products() {
        // Z4 x Z2 acting on 4 + 2 points
        let g = PermGroup::new(6, vec![cyc(6, &[0, 1, 2, 3]), cyc(6, &[4, 5])]);
        assert_eq!(g.abelian_invariants(), Some(vec![2, 4]));
        let g = PermGroup::new(7, vec![cyc(7, &[0, 1]), cyc(7, &[2, 3, 4]), cyc(7, &[5, 6])]);
        assert_eq!(g.abelian_invariants(), Some(vec![2, 6]));
        assert_eq!(PermGroup::new(3, vec![]).abelian_invariants(), Some(vec![]));
    }

    #[test]
    fn inverse_and_then() {
        let p = cyc(5, &[0, 3, 1]);
        assert!(p.then(&p.inverse()).is_identity());
        assert_eq!(p.order(), 3);
    }
}
