//! Exact positive definite lattices in a rational ambient space.

pub mod enumerate;
pub mod matrix;

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::abelian::{AbelianElement, AbelianGroup};
use crate::rootdata::RootType;
pub use matrix::{frac, rat, ExactMatrix, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("not integral")]
    NotIntegral,
    #[error("not a sublattice")]
    NotSublattice,
    #[error("not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unrecognized component of rank {rank} with {roots} roots")]
    UnrecognizedComponent { rank: usize, roots: usize },
}

/// A lattice given by independent basis rows and the ambient Gram form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    basis: ExactMatrix,
    form: ExactMatrix,
    gram: ExactMatrix,
}

#[allow(clippy::needless_range_loop)]
fn leading_minors_positive(m: &ExactMatrix) -> bool {
    // LDL^T pivots are ratios of leading minors
    let n = m.rows();
    let mut a = m.row_vecs();
    for i in 0..n {
        if !a[i][i].is_positive() {
            return false;
        }
        for k in i + 1..n {
            let f = &a[k][i] / &a[i][i];
            for l in i..n {
                let v = &f * &a[i][l];
                a[k][l] -= v;
            }
        }
    }
    true
}

impl Lattice {
    /// Lattice spanned by the rows of `generators` (not necessarily independent).
    pub fn new(generators: &ExactMatrix, form: &ExactMatrix) -> Result<Self, LatticeError> {
        if generators.cols() != form.rows() {
            return Err(LatticeError::DimensionMismatch(generators.cols(), form.rows()));
        }
        Self::from_basis(generators.hnf(), form.clone())
    }

    fn from_basis(basis: ExactMatrix, form: ExactMatrix) -> Result<Self, LatticeError> {
        let gram = basis.mul(&form).mul(&basis.transpose());
        if !leading_minors_positive(&gram) {
            return Err(LatticeError::NotPositiveDefinite);
        }
        Ok(Lattice { basis, form, gram })
    }

    /// The lattice Z^n with the given Gram matrix.
    pub fn from_gram(gram: &ExactMatrix) -> Result<Self, LatticeError> {
        Self::from_basis(ExactMatrix::identity(gram.rows()), gram.clone())
    }

    pub fn basis(&self) -> &ExactMatrix {
        &self.basis
    }

    pub fn form(&self) -> &ExactMatrix {
        &self.form
    }

    pub fn gram(&self) -> &ExactMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.form.rows()
    }

    pub fn det(&self) -> Rat {
        self.gram.det()
    }

    pub fn inner(&self, u: &[Rat], v: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                let f = self.form.get(i, j);
                if !f.is_zero() && !vj.is_zero() {
                    s += ui * f * vj;
                }
            }
        }
        s
    }

    pub fn norm(&self, v: &[Rat]) -> Rat {
        self.inner(v, v)
    }

    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    /// Integral with even norms on a basis (hence everywhere).
    pub fn is_even(&self) -> bool {
        self.is_integral()
            && (0..self.rank()).all(|i| {
                let d = self.gram.get(i, i).to_integer();
                (&d % BigInt::from(2)).is_zero()
            })
    }

    /// Coordinates of `v` in the basis, if v lies in the rational span.
    pub fn coords(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        self.basis.solve_left(v)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.coords(v).is_some_and(|c| c.iter().all(|x| x.is_integer()))
    }

    /// Vector with the given integer coordinates.
    pub fn vector(&self, coords: &[BigInt]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.ambient_dim()];
        for (i, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = Rat::from_integer(c.clone());
            for (o, b) in out.iter_mut().zip(self.basis.row(i)) {
                *o += &c * b;
            }
        }
        out
    }

    pub fn scaled(&self, c: &Rat) -> Lattice {
        Lattice::new(&self.basis.scale(c), &self.form).expect("nonzero scaling of a lattice")
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.row_vecs().iter().all(|v| self.contains(v))
    }

    pub fn same_as(&self, other: &Lattice) -> bool {
        self.basis == other.basis && self.form == other.form
    }

    /// Sum of two lattices in the same ambient space.
    pub fn sum(&self, other: &Lattice) -> Result<Lattice, LatticeError> {
        if self.form != other.form {
            return Err(LatticeError::DimensionMismatch(self.ambient_dim(), other.ambient_dim()));
        }
        Lattice::new(&self.basis.vstack(&other.basis), &self.form)
    }
}

pub fn dual_lattice(l: &Lattice) -> Lattice {
    // dual basis = gram^{-1} B; for a full rank lattice this spans L*
    let inv = l.gram.inverse().expect("positive definite gram is invertible");
    Lattice::new(&inv.mul(&l.basis), &l.form).expect("dual of a positive definite lattice")
}

/// A finite quotient B/A with coset representatives.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    group: AbelianGroup,
    lifts: Vec<Vec<Rat>>,
    big: Lattice,
    // columns of V for the nontrivial invariant factors
    proj: Vec<Vec<Rat>>,
}

impl QuotientGroup {
    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn order(&self) -> u128 {
        self.group.order()
    }

    /// Representatives of the standard generators.
    pub fn generator_lifts(&self) -> &[Vec<Rat>] {
        &self.lifts
    }

    pub fn lift(&self, x: &AbelianElement) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.big.ambient_dim()];
        for (c, l) in x.coords().iter().zip(&self.lifts) {
            let c = Rat::from_integer(BigInt::from(*c));
            for (o, y) in out.iter_mut().zip(l) {
                *o += &c * y;
            }
        }
        out
    }

    /// Class of a vector of the numerator lattice.
    pub fn class_of(&self, v: &[Rat]) -> Option<AbelianElement> {
        let c = self.big.coords(v)?;
        if !c.iter().all(|x| x.is_integer()) {
            return None;
        }
        let coords: Vec<i64> = self
            .proj
            .iter()
            .zip(self.group.moduli())
            .map(|(col, m)| {
                let s: Rat = c.iter().zip(col).map(|(a, b)| a * b).sum();
                let r = s.to_integer() % BigInt::from(*m);
                r.to_i64().expect("small residue")
            })
            .collect();
        Some(self.group.element(&coords).expect("reduced coordinates"))
    }

    pub fn elements(&self) -> impl Iterator<Item = AbelianElement> + '_ {
        self.group.elements()
    }
}

/// B/A for A a full-rank sublattice of B.
pub fn quotient(big: &Lattice, small: &Lattice) -> Result<QuotientGroup, LatticeError> {
    if big.rank() != small.rank() || big.form != small.form {
        return Err(LatticeError::NotSublattice);
    }
    let r = big.rank();
    let mut m = ExactMatrix::zeros(r, r);
    for i in 0..r {
        let c = big.coords(small.basis.row(i)).ok_or(LatticeError::NotSublattice)?;
        if !c.iter().all(|x| x.is_integer()) {
            return Err(LatticeError::NotSublattice);
        }
        for (j, x) in c.into_iter().enumerate() {
            m.set(i, j, x);
        }
    }
    let smith = m.snf();
    let v_inv = smith.v.inverse().expect("unimodular");
    let mut moduli = Vec::new();
    let mut lifts = Vec::new();
    let mut proj = Vec::new();
    for (i, d) in smith.diag.iter().enumerate() {
        if d.is_zero() {
            return Err(LatticeError::NotSublattice);
        }
        if d.abs().is_one() {
            continue;
        }
        moduli.push(d.abs().to_u32().expect("small invariant factor"));
        let coords = v_inv.row(i);
        let mut vec = vec![Rat::zero(); big.ambient_dim()];
        for (k, c) in coords.iter().enumerate() {
            for (o, b) in vec.iter_mut().zip(big.basis.row(k)) {
                *o += c * b;
            }
        }
        lifts.push(vec);
        proj.push((0..r).map(|k| smith.v.get(k, i).clone()).collect());
    }
    Ok(QuotientGroup { group: AbelianGroup::new(moduli), lifts, big: big.clone(), proj })
}

pub fn discriminant_group(l: &Lattice) -> Result<QuotientGroup, LatticeError> {
    if !l.is_integral() {
        return Err(LatticeError::NotIntegral);
    }
    quotient(&dual_lattice(l), l)
}

/// A ∩ B, computed as (A* + B*)*.
pub fn intersect(a: &Lattice, b: &Lattice) -> Result<Lattice, LatticeError> {
    if a.form != b.form || a.rank() != a.ambient_dim() || b.rank() != b.ambient_dim() {
        return Err(LatticeError::DimensionMismatch(a.ambient_dim(), b.ambient_dim()));
    }
    Ok(dual_lattice(&dual_lattice(a).sum(&dual_lattice(b))?))
}

/// Integer coordinate vectors of norm at most `bound` (zero excluded).
pub fn short_vectors(l: &Lattice, bound: &Rat) -> Vec<Vec<BigInt>> {
    let (reduced, t) = enumerate::lll_gram(&l.gram);
    let zero = vec![Rat::zero(); l.rank()];
    enumerate::fincke_pohst(&reduced, &zero, bound)
        .into_iter()
        .filter(|x| x.iter().any(|c| !c.is_zero()))
        .map(|x| {
            let mut y = vec![BigInt::zero(); l.rank()];
            for (c, row) in x.iter().zip(&t) {
                if c.is_zero() {
                    continue;
                }
                for (o, r) in y.iter_mut().zip(row) {
                    *o += c * r;
                }
            }
            y
        })
        .collect()
}

/// Norm-2 vectors, as ambient vectors.
pub fn roots(l: &Lattice) -> Vec<Vec<Rat>> {
    root_coords(l).iter().map(|c| l.vector(c)).collect()
}

fn root_coords(l: &Lattice) -> Vec<Vec<BigInt>> {
    let two = rat(2);
    short_vectors(l, &two)
        .into_iter()
        .filter(|x| {
            let v = l.vector(x);
            l.norm(&v) == two
        })
        .collect()
}

/// Minimal norm of v + L.
pub fn min_coset_norm(l: &Lattice, v: &[Rat]) -> Rat {
    let c = l.coords(v).expect("vector in the rational span");
    let (reduced, t) = enumerate::lll_gram(&l.gram);
    // reduced basis rows are T times the old basis, so c = y T
    let y = ExactMatrix::from_big_rows(&t, l.rank()).solve_left(&c).expect("reduction is unimodular");
    let shift: Vec<Rat> = y.iter().map(|x| x - x.floor()).collect();
    enumerate::min_shifted_norm(&reduced, &shift)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootComponent {
    pub root_type: RootType,
    /// Simple roots in the standard labeling, as ambient vectors.
    pub simple_roots: Vec<Vec<Rat>>,
    pub root_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDecomposition {
    pub components: Vec<RootComponent>,
    pub total_roots: usize,
}

impl RootDecomposition {
    pub fn types(&self) -> Vec<RootType> {
        self.components.iter().map(|c| c.root_type).collect()
    }

    pub fn rank(&self) -> usize {
        self.components.iter().map(|c| c.root_type.rank()).sum()
    }
}

pub fn root_decomposition(l: &Lattice) -> Result<RootDecomposition, LatticeError> {
    let all = root_coords(l);
    let total_roots = all.len();
    let positive: Vec<Vec<BigInt>> =
        all.into_iter().filter(|x| x.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_positive())).collect();
    let n = positive.len();
    // inner products in scaled integer arithmetic: d * (x|y) = x (d G) y^T
    let d = l.gram.denominator();
    let gi: Vec<Vec<i64>> = l
        .gram
        .scale(&Rat::from_integer(d.clone()))
        .to_int_rows()
        .iter()
        .map(|r| r.iter().map(|x| x.to_i64().expect("small Gram entries")).collect())
        .collect();
    let xs: Vec<Vec<i64>> =
        positive.iter().map(|x| x.iter().map(|c| c.to_i64().expect("small root coordinates")).collect()).collect();
    let ws: Vec<Vec<i64>> =
        xs.iter().map(|x| (0..x.len()).map(|k| x.iter().zip(&gi).map(|(a, row)| a * row[k]).sum()).collect()).collect();
    let dot = |i: usize, j: usize| -> i64 { ws[i].iter().zip(&xs[j]).map(|(a, b)| a * b).sum() };

    // connected components of the non-orthogonality graph
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if dot(i, j) != 0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort();

    let mut components = Vec::new();
    for members in groups {
        let set: HashSet<&Vec<i64>> = members.iter().map(|&i| &xs[i]).collect();
        let mut diff = vec![0i64; l.rank()];
        let simple: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| {
                !members.iter().any(|&j| {
                    j != i && {
                        for (k, o) in diff.iter_mut().enumerate() {
                            *o = xs[i][k] - xs[j][k];
                        }
                        set.contains(&diff)
                    }
                })
            })
            .collect();
        let roots = 2 * members.len();
        let svecs: Vec<Vec<Rat>> = simple.iter().map(|&i| l.vector(&positive[i])).collect();
        let (root_type, ordered) =
            classify(l, &svecs).ok_or(LatticeError::UnrecognizedComponent { rank: simple.len(), roots })?;
        if root_type.root_count() != roots {
            return Err(LatticeError::UnrecognizedComponent { rank: simple.len(), roots });
        }
        components.push(RootComponent { root_type, simple_roots: ordered, root_count: roots });
    }
    Ok(RootDecomposition { components, total_roots })
}

/// Identify a connected simply-laced Dynkin diagram and order its nodes in the standard labeling.
fn classify(l: &Lattice, simple: &[Vec<Rat>]) -> Option<(RootType, Vec<Vec<Rat>>)> {
    let n = simple.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        if l.norm(&simple[i]) != rat(2) {
            return None;
        }
        for j in i + 1..n {
            let ip = l.inner(&simple[i], &simple[j]);
            if ip == rat(-1) {
                adj[i].push(j);
                adj[j].push(i);
            } else if !ip.is_zero() {
                return None;
            }
        }
    }
    let edges: usize = adj.iter().map(|a| a.len()).sum::<usize>() / 2;
    if edges + 1 != n {
        return None;
    }
    let walk = |start: usize, from: Option<usize>| -> Vec<usize> {
        let mut path = vec![start];
        let mut prev = from;
        let mut cur = start;
        loop {
            let next: Vec<usize> = adj[cur].iter().copied().filter(|&x| Some(x) != prev).collect();
            if next.len() != 1 {
                break;
            }
            prev = Some(cur);
            cur = next[0];
            path.push(cur);
        }
        path
    };
    let branch: Vec<usize> = (0..n).filter(|&i| adj[i].len() >= 3).collect();
    let (rt, order) = match branch.as_slice() {
        [] => {
            let ends: Vec<usize> = (0..n).filter(|&i| adj[i].len() <= 1).collect();
            let start = *ends.iter().min_by(|&&a, &&b| simple[a].cmp(&simple[b]))?;
            (RootType::a(n), walk(start, None))
        }
        [b] if adj[*b].len() == 3 => {
            let mut arms: Vec<Vec<usize>> = adj[*b].iter().map(|&s| walk(s, Some(*b))).collect();
            arms.sort_by_key(|a| a.len());
            let lens: Vec<usize> = arms.iter().map(|a| a.len()).collect();
            match lens.as_slice() {
                [1, 1, m] => {
                    // D_{m+3}: long arm reversed, branch, then the two short leaves
                    let mut order: Vec<usize> = arms[2].iter().rev().copied().collect();
                    order.push(*b);
                    order.push(arms[0][0]);
                    order.push(arms[1][0]);
                    if *m == 1 {
                        // D4: all arms length one
                        order = vec![arms[2][0], *b, arms[0][0], arms[1][0]];
                    }
                    (RootType::d(m + 3), order)
                }
                [1, 2, m @ (2..=4)] => {
                    // alpha1-alpha3-alpha4(branch)-alpha5-...; alpha2 is the short arm
                    let mut order = vec![arms[1][1], arms[0][0], arms[1][0], *b];
                    order.extend(arms[2].iter().copied());
                    (RootType::e(m + 4), order)
                }
                _ => return None,
            }
        }
        _ => return None,
    };
    Some((rt, order.into_iter().map(|i| simple[i].clone()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootdata::catalog;

    fn root_lattice(t: RootType) -> Lattice {
        Lattice::from_gram(&catalog(t).cartan).unwrap()
    }

    #[test]
    fn a1_dual_is_half() {
        let l = root_lattice(RootType::a(1));
        let d = dual_lattice(&l);
        assert_eq!(d.basis().get(0, 0), &frac(1, 2));
    }

    #[test]
    fn discriminant_orders() {
        assert_eq!(discriminant_group(&root_lattice(RootType::a(2))).unwrap().order(), 3);
        assert_eq!(discriminant_group(&root_lattice(RootType::e(8))).unwrap().order(), 1);
        assert_eq!(discriminant_group(&root_lattice(RootType::d(4))).unwrap().group().moduli(), &[2, 2]);
    }

    #[test]
    fn e8_roots_and_type() {
        let l = root_lattice(RootType::e(8));
        assert_eq!(roots(&l).len(), 240);
        let d = root_decomposition(&l).unwrap();
        assert_eq!(d.types(), vec![RootType::e(8)]);
    }

    #[test]
    fn class_of_lift_roundtrip() {
        let l = root_lattice(RootType::a(5));
        let q = discriminant_group(&l).unwrap();
        for x in q.elements() {
            assert_eq!(q.class_of(&q.lift(&x)), Some(x));
        }
    }

    #[test]
    fn min_norms_of_a4_classes() {
        let l = root_lattice(RootType::a(4));
        let inv = catalog(RootType::a(4)).inverse_cartan;
        for i in 0..4 {
            let k = (i + 1) as i64;
            assert_eq!(min_coset_norm(&l, inv.row(i)), frac(k * (5 - k), 5));
        }
    }

    #[test]
    fn intersect_with_self() {
        let l = root_lattice(RootType::d(5));
        assert!(intersect(&l, &l).unwrap().same_as(&l));
    }
}
