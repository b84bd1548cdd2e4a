//! ADE root lattice catalog: Cartan data, glue labels, diagram actions.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::abelian::AbelianGroup;
use crate::lattice::{frac, rat, ExactMatrix, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Family {
    A,
    D,
    E,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootTypeError {
    #[error("invalid root type {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct RootType {
    pub family: Family,
    pub rank: usize,
}

impl RootType {
    pub fn new(family: Family, rank: usize) -> Result<Self, RootTypeError> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
        };
        if ok {
            Ok(RootType { family, rank })
        } else {
            Err(RootTypeError::Invalid(format!("{family:?}{rank}")))
        }
    }

    pub fn a(n: usize) -> Self {
        Self::new(Family::A, n).unwrap()
    }

    pub fn d(n: usize) -> Self {
        Self::new(Family::D, n).unwrap()
    }

    pub fn e(n: usize) -> Self {
        Self::new(Family::E, n).unwrap()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn root_count(&self) -> usize {
        let n = self.rank;
        match (self.family, n) {
            (Family::A, _) => n * (n + 1),
            (Family::D, _) => 2 * n * (n - 1),
            (Family::E, 6) => 72,
            (Family::E, 7) => 126,
            _ => 240,
        }
    }

    /// Determinant of the Cartan matrix, i.e. the discriminant order.
    pub fn det(&self) -> u32 {
        match self.family {
            Family::A => self.rank as u32 + 1,
            Family::D => 4,
            Family::E => 9 - self.rank as u32,
        }
    }

    pub fn coxeter_number(&self) -> usize {
        let n = self.rank;
        match (self.family, n) {
            (Family::A, _) => n + 1,
            (Family::D, _) => 2 * n - 2,
            (Family::E, 6) => 12,
            (Family::E, 7) => 18,
            _ => 30,
        }
    }

    pub fn weyl_order(&self) -> u128 {
        let n = self.rank as u128;
        let fact = |k: u128| (1..=k).product::<u128>();
        match (self.family, self.rank) {
            (Family::A, _) => fact(n + 1),
            (Family::D, _) => (1u128 << (n - 1)) * fact(n),
            (Family::E, 6) => 51840,
            (Family::E, 7) => 2903040,
            _ => 696729600,
        }
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

impl FromStr for RootType {
    type Err = RootTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RootTypeError::Invalid(s.to_string());
        let mut chars = s.chars();
        let family = match chars.next() {
            Some('A') => Family::A,
            Some('D') => Family::D,
            Some('E') => Family::E,
            _ => return Err(bad()),
        };
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        RootType::new(family, rank).map_err(|_| bad())
    }
}

/// Parse a root system name such as `A5^4D4` or `A11D7E6` into its component list.
pub fn parse_root_system(name: &str) -> Result<Vec<RootType>, RootTypeError> {
    let bad = || RootTypeError::Invalid(name.to_string());
    let bytes = name.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        name[start..*i].parse::<usize>().ok()
    };
    while i < bytes.len() {
        let letter = &name[i..i + 1];
        i += 1;
        let rank = digits(&mut i).ok_or_else(bad)?;
        let t: RootType = format!("{letter}{rank}").parse().map_err(|_| bad())?;
        let mut mult = 1;
        if i < bytes.len() && bytes[i] == b'^' {
            i += 1;
            mult = digits(&mut i).ok_or_else(bad)?;
        }
        out.extend(std::iter::repeat_n(t, mult));
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Canonical name of a component list, grouping equal consecutive types.
pub fn root_system_name(types: &[RootType]) -> String {
    let mut s = String::new();
    let mut i = 0;
    while i < types.len() {
        let mut j = i;
        while j < types.len() && types[j] == types[i] {
            j += 1;
        }
        s.push_str(&types[i].to_string());
        if j - i > 1 {
            s.push_str(&format!("^{}", j - i));
        }
        i = j;
    }
    s
}

#[derive(Clone, Debug)]
pub struct RootSystemData {
    pub root_type: RootType,
    pub cartan: ExactMatrix,
    pub inverse_cartan: ExactMatrix,
    pub discriminant: AbelianGroup,
    /// Representative in root coordinates for each glue label (indexed by label).
    pub class_reps: Vec<Vec<Rat>>,
    /// Generators of the diagram action, as permutations of glue labels.
    pub diagram_action: Vec<Vec<u32>>,
}

impl RootSystemData {
    /// Fundamental weight i (1-based) in root coordinates.
    pub fn fundamental_weight(&self, i: usize) -> &[Rat] {
        self.inverse_cartan.row(i - 1)
    }

    pub fn label_count(&self) -> u32 {
        self.root_type.det()
    }

    /// (u|v) for vectors in root coordinates.
    pub fn inner(&self, u: &[Rat], v: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                s += a * self.cartan.get(i, j) * b;
            }
        }
        s
    }

    /// Glue label of the class of a vector of the dual lattice.
    pub fn class_of(&self, v: &[Rat]) -> Option<u32> {
        (0..self.label_count()).find(|&l| v.iter().zip(&self.class_reps[l as usize]).all(|(a, b)| (a - b).is_integer()))
    }

    /// Glue label of the class of the fundamental weight i (1-based).
    pub fn fundamental_class(&self, i: usize) -> u32 {
        self.class_of(self.fundamental_weight(i)).expect("fundamental weights lie in the dual")
    }

    /// (a|b) mod 1 for glue labels a, b, reduced into [0, 1).
    pub fn label_pairing(&self, a: u32, b: u32) -> Rat {
        let x = self.inner(&self.class_reps[a as usize], &self.class_reps[b as usize]);
        &x - x.floor()
    }

    /// All elements of the group generated by the diagram action.
    pub fn diagram_group(&self) -> Vec<Vec<u32>> {
        close_permutations(self.label_count() as usize, &self.diagram_action)
    }
}

impl RootSystemData {
    /// (alpha_i | v) for all i.
    fn root_pairings(&self, v: &[Rat]) -> Vec<Rat> {
        (0..v.len())
            .map(|i| v.iter().enumerate().map(|(j, x)| self.cartan.get(i, j) * x).fold(Rat::zero(), |a, b| a + b))
            .collect()
    }

    /// Highest root in root coordinates: the dominant element of the orbit of alpha_1.
    pub fn highest_root(&self) -> Vec<Rat> {
        let n = self.root_type.rank;
        let mut v = vec![Rat::zero(); n];
        v[0] = rat(1);
        while let Some((i, p)) = self.root_pairings(&v).into_iter().enumerate().find(|(_, p)| p.is_negative()) {
            v[i] -= p;
        }
        v
    }

    /// The point of the closed fundamental alcove in the orbit of v under the
    /// affine Weyl group W |x Q.
    pub fn alcove_representative(&self, v: &[Rat]) -> Vec<Rat> {
        let theta = self.highest_root();
        let one = rat(1);
        let mut v = v.to_vec();
        loop {
            if let Some((i, p)) = self.root_pairings(&v).into_iter().enumerate().find(|(_, p)| p.is_negative()) {
                v[i] -= p;
                continue;
            }
            let t = self.inner(&v, &theta);
            if t > one {
                let c = t - &one;
                for (x, h) in v.iter_mut().zip(&theta) {
                    *x -= &c * h;
                }
                continue;
            }
            return v;
        }
    }

    /// Minimal norm of v + Q for v in the dual lattice.
    pub fn min_coset_norm(&self, v: &[Rat]) -> Rat {
        let r = self.alcove_representative(v);
        self.inner(&r, &r)
    }
}

pub fn close_permutations(n: usize, gens: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let id: Vec<u32> = (0..n as u32).collect();
    let mut out = vec![id];
    let mut i = 0;
    while i < out.len() {
        for g in gens {
            let p: Vec<u32> = out[i].iter().map(|&x| g[x as usize]).collect();
            if !out.contains(&p) {
                out.push(p);
            }
        }
        i += 1;
    }
    out.sort();
    out
}

pub fn cartan_matrix(t: RootType) -> ExactMatrix {
    let n = t.rank;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match t.family {
        Family::A => edges.extend((1..n).map(|i| (i, i + 1))),
        Family::D => {
            edges.extend((1..n - 1).map(|i| (i, i + 1)));
            edges.push((n - 2, n));
        }
        Family::E => {
            edges.extend([(1, 3), (3, 4), (4, 2)]);
            edges.extend((4..n).map(|i| (i, i + 1)));
        }
    }
    let mut m = ExactMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, rat(2));
    }
    for (a, b) in edges {
        m.set(a - 1, b - 1, rat(-1));
        m.set(b - 1, a - 1, rat(-1));
    }
    m
}

pub fn catalog(t: RootType) -> RootSystemData {
    let n = t.rank;
    let cartan = cartan_matrix(t);
    let inverse_cartan = cartan.inverse().expect("Cartan matrices are invertible");
    let w = |i: usize| inverse_cartan.row(i - 1).to_vec();
    let zero = vec![rat(0); n];
    let (moduli, class_reps, diagram_action): (Vec<u32>, Vec<Vec<Rat>>, Vec<Vec<u32>>) = match t.family {
        Family::A => {
            let m = n as u32 + 1;
            let reps = std::iter::once(zero).chain((1..=n).map(w)).collect();
            let action = if n >= 2 { vec![(0..m).map(|i| (m - i) % m).collect()] } else { vec![] };
            (vec![m], reps, action)
        }
        Family::D => {
            let reps = vec![zero, w(n - 1), w(1), w(n)];
            let action = if n == 4 { vec![vec![0, 2, 1, 3], vec![0, 3, 2, 1]] } else { vec![vec![0, 3, 2, 1]] };
            let moduli = if n.is_multiple_of(2) { vec![2, 2] } else { vec![4] };
            (moduli, reps, action)
        }
        Family::E => match n {
            6 => (vec![3], vec![zero, w(1), w(6)], vec![vec![0, 2, 1]]),
            7 => (vec![2], vec![zero, w(7)], vec![]),
            _ => (vec![], vec![zero], vec![]),
        },
    };
    RootSystemData {
        root_type: t,
        cartan,
        inverse_cartan,
        discriminant: AbelianGroup::new(moduli),
        class_reps,
        diagram_action,
    }
}

/// The Weyl group contains -1 exactly for A1, D_even, E7 and E8.
pub fn minus_one_in_weyl(t: RootType) -> bool {
    match t.family {
        Family::A => t.rank == 1,
        Family::D => t.rank.is_multiple_of(2),
        Family::E => t.rank != 6,
    }
}

pub fn diagram_discriminant_action(t: RootType) -> Vec<Vec<u32>> {
    catalog(t).diagram_action
}

/// Inverse Cartan entry of A_n, closed form.
pub fn a_inverse_cartan_entry(n: usize, i: usize, j: usize) -> Rat {
    let (lo, hi) = (i.min(j) as i64, i.max(j) as i64);
    frac(lo * (n as i64 + 1 - hi), n as i64 + 1)
}
