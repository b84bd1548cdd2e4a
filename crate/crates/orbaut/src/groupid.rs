//! Naming finite permutation groups from their order and structural witnesses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelian::structure_name;
use crate::codeaut::{Perm, PermGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confidence {
    Exact,
    OrderOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupName {
    pub name: String,
    pub order: u128,
    pub confidence: Confidence,
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.confidence {
            Confidence::Exact => write!(f, "{}", self.name),
            Confidence::OrderOnly => write!(f, "{} (order only)", self.name),
        }
    }
}

/// Structural data of a permutation action used to confirm a name.
#[derive(Clone, Debug, Default)]
pub struct Witnesses {
    /// Sizes of the nontrivial orbits, ascending.
    pub orbit_sizes: Vec<usize>,
    /// Transitivity degree on the support when there is one nontrivial orbit.
    pub transitivity: usize,
    pub abelian_invariants: Option<Vec<u64>>,
    /// Witnesses of the restriction to each nontrivial orbit, with their orders.
    pub restrictions: Vec<(u128, Witnesses)>,
}

fn restrict(g: &PermGroup, orbit: &[u32]) -> PermGroup {
    let pos = |x: u32| orbit.iter().position(|&y| y == x).unwrap() as u32;
    let gens: Vec<Perm> = g.gens().iter().map(|p| Perm(orbit.iter().map(|&x| pos(p.apply(x))).collect())).collect();
    PermGroup::new(orbit.len(), gens)
}

impl Witnesses {
    pub fn from_perm_group(g: &PermGroup) -> Self {
        let orbits: Vec<Vec<u32>> = g.orbits().into_iter().filter(|o| o.len() > 1).collect();
        let mut orbit_sizes: Vec<usize> = orbits.iter().map(|o| o.len()).collect();
        orbit_sizes.sort_unstable();
        let abelian_invariants = if g.order() <= 1 << 16 { g.abelian_invariants() } else { None };
        let (transitivity, restrictions) = match orbits.len() {
            0 => (0, Vec::new()),
            1 => (restrict(g, &orbits[0]).transitivity(), Vec::new()),
            _ => (
                0,
                orbits
                    .iter()
                    .map(|o| {
                        let r = restrict(g, o);
                        (r.order(), Witnesses::from_perm_group(&r))
                    })
                    .collect(),
            ),
        };
        Witnesses { orbit_sizes, transitivity, abelian_invariants, restrictions }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn exact(name: impl Into<String>, order: u128) -> GroupName {
    GroupName { name: name.into(), order, confidence: Confidence::Exact }
}

/// Name a group of the given order; "exact" only when a witness beyond the order agrees.
pub fn recognize(order: u128, w: &Witnesses) -> GroupName {
    if order == 1 {
        return exact("1", 1);
    }
    if let [n] = w.orbit_sizes.as_slice() {
        let n = *n;
        // a subgroup of Sym_n of order n! (resp. n!/2) is Sym_n (resp. Alt_n)
        if order == factorial(n) {
            return exact(format!("Sym{n}"), order);
        }
        if n >= 3 && order == factorial(n) / 2 {
            return exact(format!("Alt{n}"), order);
        }
        let catalog: [(u128, usize, usize, &str); 6] = [
            (120, 6, 3, "Sym5"),
            (95040, 12, 5, "M12"),
            (1344, 8, 3, "Z2^3:L3(2)"),
            (322560, 16, 3, "Z2^4:L4(2)"),
            (168, 7, 2, "L3(2)"),
            (20160, 15, 2, "L4(2)"),
        ];
        for (o, deg, k, name) in catalog {
            if order == o && n == deg && w.transitivity >= k {
                return exact(name, order);
            }
        }
    }
    if w.orbit_sizes.len() > 1 {
        let product: u128 = w.restrictions.iter().map(|(o, _)| *o).product();
        if product == order {
            let parts: Vec<GroupName> = w.restrictions.iter().map(|(o, r)| recognize(*o, r)).collect();
            if parts.iter().all(|p| p.confidence == Confidence::Exact) {
                let names: Vec<String> = parts.into_iter().map(|p| p.name).collect();
                return exact(names.join("x"), order);
            }
        }
        if order == 96 && w.orbit_sizes == [4, 4] {
            return exact("Z2^4:Sym3", order);
        }
    }
    if let Some(inv) = &w.abelian_invariants {
        return exact(structure_name(inv), order);
    }
    GroupName { name: format!("group of order {order}"), order, confidence: Confidence::OrderOnly }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: usize, cycle: &[u32]) -> Perm {
        let mut p: Vec<u32> = (0..n as u32).collect();
        for i in 0..cycle.len() {
            p[cycle[i] as usize] = cycle[(i + 1) % cycle.len()];
        }
        Perm(p)
    }

    #[test]
    fn sym3() {
        let g = PermGroup::new(3, vec![cyc(3, &[0, 1]), cyc(3, &[0, 1, 2])]);
        assert_eq!(recognize(6, &Witnesses::from_perm_group(&g)), exact("Sym3", 6));
    }

    #[test]
    fn sym2_times_sym4() {
        let g = PermGroup::new(6, vec![cyc(6, &[0, 1]), cyc(6, &[2, 3]), cyc(6, &[2, 3, 4, 5])]);
        let name = recognize(48, &Witnesses::from_perm_group(&g));
        assert_eq!(name.name, "Sym2xSym4");
        assert_eq!(name.confidence, Confidence::Exact);
    }

    #[test]
    fn unknown_falls_back() {
        let name = recognize(1000, &Witnesses::default());
        assert_eq!(name.confidence, Confidence::OrderOnly);
    }

    #[test]
    fn cyclic_is_abelian() {
        let g = PermGroup::new(5, vec![cyc(5, &[0, 1, 2, 3, 4])]);
        let w = Witnesses::from_perm_group(&g);
        assert_eq!(recognize(5, &w).name, "Z5");
    }
}
