//! Niemeier lattices from glue data, with self-validation.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::abelian::{AbelianElement, AbelianError, AbelianGroup, Subgroup};
use crate::codeaut::{split_aut1_aut2, stabilizer, AmbientAction, Perm, PermGroup, StabilizerError};
use crate::groupid::{recognize, GroupName, Witnesses};
use crate::lattice::{
    dual_lattice, intersect, quotient, rat, root_decomposition, ExactMatrix, Lattice, LatticeError, QuotientGroup, Rat,
    RootDecomposition,
};
use crate::rootdata::{
    catalog, diagram_discriminant_action, minus_one_in_weyl, parse_root_system, root_system_name, RootSystemData,
    RootType,
};

pub use crate::data::{DataError, GLUE_DATA};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NiemeierError {
    #[error("{name}: odd vector")]
    OddVector { name: String },
    #[error("{name}: determinant {det} != 1")]
    Determinant { name: String, det: String },
    #[error("{name}: rank {rank} != 24")]
    Rank { name: String, rank: usize },
    #[error("{name}: root system mismatch, expected {expected} found {found}")]
    RootMismatch { name: String, expected: String, found: String },
    #[error("{name}: {source}")]
    Lattice { name: String, source: LatticeError },
    #[error("{name}: glue code: {source}")]
    Glue { name: String, source: AbelianError },
}

/// Root system and glue generators of one Niemeier lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueCode {
    pub name: String,
    /// Empty for the Leech lattice.
    pub components: Vec<RootType>,
    /// Label tuples; binary Golay words for the Leech lattice.
    pub generators: Vec<Vec<u32>>,
    /// Source line of each generator, for error reporting.
    pub generator_lines: Vec<usize>,
}

impl GlueCode {
    pub fn is_leech(&self) -> bool {
        self.components.is_empty()
    }

    /// Product of the components' discriminant groups.
    pub fn label_group(&self) -> AbelianGroup {
        self.components.iter().fold(AbelianGroup::trivial(), |g, t| g.product(&catalog(*t).discriminant))
    }

    /// The element of `label_group` with the given per-component labels.
    pub fn element(&self, labels: &[u32]) -> AbelianElement {
        let mut coords = Vec::new();
        for (t, &l) in self.components.iter().zip(labels) {
            let g = catalog(*t).discriminant;
            coords.extend(g.from_index(l as u64).0);
        }
        AbelianElement(coords)
    }

    /// Inverse of `element`.
    pub fn labels(&self, x: &AbelianElement) -> Vec<u32> {
        let mut out = Vec::new();
        let mut pos = 0;
        for t in &self.components {
            let g = catalog(*t).discriminant;
            let k = g.rank();
            out.push(g.index_of(&AbelianElement(x.0[pos..pos + k].to_vec())) as u32);
            pos += k;
        }
        out
    }

    /// The subgroup spanned by the generators; fails when it has more than 2^20 elements.
    pub fn code(&self) -> Result<Subgroup, AbelianError> {
        let g = self.label_group();
        let gens: Vec<AbelianElement> = self.generators.iter().map(|l| self.element(l)).collect();
        g.span(&gens)
    }
}

impl fmt::Display for GlueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

fn expand_cyclic(tokens: &[&str], line: usize) -> Result<Vec<Vec<u32>>, DataError> {
    let mut prefix = Vec::new();
    let mut cycle = Vec::new();
    let mut suffix = Vec::new();
    let mut state = 0;
    for tok in tokens {
        let mut t = *tok;
        if let Some(rest) = t.strip_prefix('(') {
            if state != 0 {
                return Err(DataError::new(line, "only one parenthesised run allowed"));
            }
            state = 1;
            t = rest;
        }
        let closes = t.ends_with(')');
        let t = t.trim_end_matches(')');
        if !t.is_empty() {
            let v: u32 = t.parse().map_err(|_| DataError::new(line, format!("bad label {tok:?}")))?;
            match state {
                0 => prefix.push(v),
                1 => cycle.push(v),
                _ => suffix.push(v),
            }
        }
        if closes {
            if state != 1 {
                return Err(DataError::new(line, "unbalanced ')'"));
            }
            state = 2;
        }
    }
    if state == 1 {
        return Err(DataError::new(line, "unclosed '('"));
    }
    if state == 0 {
        return Ok(vec![prefix]);
    }
    let n = cycle.len();
    Ok((0..n)
        .map(|s| {
            let mut w = prefix.clone();
            w.extend((0..n).map(|i| cycle[(i + s) % n]));
            w.extend(&suffix);
            w
        })
        .collect())
}

/// Parse the glue data format described in `data/glue.txt`.
pub fn parse_glue_data(text: &str) -> Result<Vec<GlueCode>, DataError> {
    let mut out: Vec<GlueCode> = Vec::new();
    let mut header_line = 0;
    let finish = |code: &GlueCode, line: usize| -> Result<(), DataError> {
        if code.is_leech() {
            if code.name != "Leech" {
                return Err(DataError::new(line, format!("{}: missing components", code.name)));
            }
            for (g, &l) in code.generators.iter().zip(&code.generator_lines) {
                if g.len() != 24 || g.iter().any(|&x| x > 1) {
                    return Err(DataError::new(l, "Golay words need 24 binary entries"));
                }
            }
            return Ok(());
        }
        let named = parse_root_system(&code.name).map_err(|e| DataError::new(line, e.to_string()))?;
        let mut a = named.clone();
        let mut b = code.components.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(DataError::new(line, format!("components do not match name {}", code.name)));
        }
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let key = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        match key {
            "lattice" => {
                if let Some(prev) = out.last() {
                    finish(prev, header_line)?;
                }
                let [name] = rest.as_slice() else {
                    return Err(DataError::new(line, "expected: lattice <name>"));
                };
                if out.iter().any(|c| c.name == *name) {
                    return Err(DataError::new(line, format!("duplicate lattice {name}")));
                }
                header_line = line;
                out.push(GlueCode {
                    name: name.to_string(),
                    components: Vec::new(),
                    generators: Vec::new(),
                    generator_lines: Vec::new(),
                });
            }
            "components" => {
                let code = out.last_mut().ok_or_else(|| DataError::new(line, "components before lattice"))?;
                if !code.components.is_empty() {
                    return Err(DataError::new(line, "components given twice"));
                }
                for tok in rest {
                    let t: RootType =
                        tok.parse().map_err(|e: crate::rootdata::RootTypeError| DataError::new(line, e.to_string()))?;
                    code.components.push(t);
                }
            }
            "glue" => {
                let code = out.last_mut().ok_or_else(|| DataError::new(line, "glue before lattice"))?;
                for g in expand_cyclic(&rest, line)? {
                    if !code.is_leech() {
                        if g.len() != code.components.len() {
                            return Err(DataError::new(
                                line,
                                format!("expected {} labels, found {}", code.components.len(), g.len()),
                            ));
                        }
                        for (t, &l) in code.components.iter().zip(&g) {
                            if l >= t.det() {
                                return Err(DataError::new(line, format!("label {l} invalid for {t}")));
                            }
                        }
                    }
                    code.generators.push(g);
                    code.generator_lines.push(line);
                }
            }
            other => return Err(DataError::new(line, format!("unknown keyword {other:?}"))),
        }
    }
    if let Some(prev) = out.last() {
        finish(prev, header_line)?;
    }
    Ok(out)
}

/// A validated Niemeier lattice.
#[derive(Clone, Debug)]
pub struct NiemeierLattice {
    pub code: GlueCode,
    pub lattice: Lattice,
    pub root_lattice: Option<Lattice>,
    pub decomposition: RootDecomposition,
    pub glue: Subgroup,
    pub data: Vec<RootSystemData>,
    /// Start of each component's block of ambient coordinates.
    pub offsets: Vec<usize>,
}

fn block_diagonal(blocks: &[ExactMatrix]) -> ExactMatrix {
    let n: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut m = ExactMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                m.set(off + i, off + j, b.get(i, j).clone());
            }
        }
        off += b.rows();
    }
    m
}

impl NiemeierLattice {
    pub fn name(&self) -> &str {
        &self.code.name
    }

    pub fn components(&self) -> &[RootType] {
        &self.code.components
    }

    /// Ambient vector of a label tuple, using the standard class representatives.
    pub fn glue_vector(&self, labels: &[u32]) -> Vec<Rat> {
        let mut v = Vec::new();
        for (d, &l) in self.data.iter().zip(labels) {
            v.extend(d.class_reps[l as usize].iter().cloned());
        }
        v
    }

    /// Per-component glue labels of a vector of Q*.
    pub fn labels_of(&self, v: &[Rat]) -> Option<Vec<u32>> {
        self.data
            .iter()
            .zip(&self.offsets)
            .map(|(d, &off)| {
                let block = &v[off..off + d.root_type.rank];
                (0..d.label_count())
                    .find(|&l| block.iter().zip(&d.class_reps[l as usize]).all(|(a, b)| (a - b).is_integer()))
            })
            .collect()
    }

    /// The root lattice Q; `None` for the Leech lattice.
    pub fn q(&self) -> Option<&Lattice> {
        self.root_lattice.as_ref()
    }

    /// Q* as a lattice in the ambient space.
    pub fn q_dual(&self) -> Option<Lattice> {
        self.q().map(dual_lattice)
    }
}

pub fn build(code: &GlueCode) -> Result<NiemeierLattice, NiemeierError> {
    let name = code.name.clone();
    let lat_err = |source| NiemeierError::Lattice { name: name.clone(), source };
    if code.is_leech() {
        return build_leech(code);
    }
    let data: Vec<RootSystemData> = code.components.iter().map(|t| catalog(*t)).collect();
    let rank: usize = code.components.iter().map(|t| t.rank).sum();
    if rank != 24 {
        return Err(NiemeierError::Rank { name, rank });
    }
    let mut offsets = Vec::new();
    let mut off = 0;
    for t in &code.components {
        offsets.push(off);
        off += t.rank;
    }
    let form = block_diagonal(&data.iter().map(|d| d.cartan.clone()).collect::<Vec<_>>());
    let q = Lattice::new(&ExactMatrix::identity(rank), &form).map_err(lat_err)?;
    let mut rows = q.basis().row_vecs();
    for g in &code.generators {
        let mut v = Vec::new();
        for (d, &l) in data.iter().zip(g) {
            v.extend(d.class_reps[l as usize].iter().cloned());
        }
        rows.push(v);
    }
    let lattice = Lattice::new(&ExactMatrix::from_rows(&rows), &form).map_err(lat_err)?;
    if !lattice.is_even() {
        return Err(NiemeierError::OddVector { name });
    }
    let det = lattice.det();
    if det != rat(1) {
        return Err(NiemeierError::Determinant { name, det: det.to_string() });
    }
    let decomposition = root_decomposition(&lattice).map_err(lat_err)?;
    let mut expected = code.components.clone();
    let mut found = decomposition.types();
    expected.sort();
    found.sort();
    let expected_roots: usize = expected.iter().map(|t| t.root_count()).sum();
    if expected != found || decomposition.total_roots != expected_roots {
        return Err(NiemeierError::RootMismatch {
            name,
            expected: format!("{} ({} roots)", root_system_name(&expected), expected_roots),
            found: format!("{} ({} roots)", root_system_name(&found), decomposition.total_roots),
        });
    }
    let glue = code.code().map_err(|source| NiemeierError::Glue { name: name.clone(), source })?;
    Ok(NiemeierLattice { code: code.clone(), lattice, root_lattice: Some(q), decomposition, glue, data, offsets })
}

fn build_leech(code: &GlueCode) -> Result<NiemeierLattice, NiemeierError> {
    let name = code.name.clone();
    let lat_err = |source| NiemeierError::Lattice { name: name.clone(), source };
    let form = ExactMatrix::identity(24).scale(&Rat::new(BigInt::one(), BigInt::from(8)));
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for w in &code.generators {
        rows.push(w.iter().map(|&b| rat(2 * b as i64)).collect());
    }
    for i in 0..24 {
        for j in i + 1..24 {
            for s in [1, -1] {
                let mut v = vec![Rat::zero(); 24];
                v[i] = rat(4);
                v[j] = rat(4 * s);
                rows.push(v);
            }
        }
    }
    let mut v = vec![rat(1); 24];
    v[0] = rat(-3);
    rows.push(v);
    let lattice = Lattice::new(&ExactMatrix::from_rows(&rows), &form).map_err(lat_err)?;
    if !lattice.is_even() {
        return Err(NiemeierError::OddVector { name });
    }
    let det = lattice.det();
    if det != rat(1) {
        return Err(NiemeierError::Determinant { name, det: det.to_string() });
    }
    let decomposition = root_decomposition(&lattice).map_err(lat_err)?;
    if decomposition.total_roots != 0 {
        return Err(NiemeierError::RootMismatch {
            name,
            expected: "0".into(),
            found: format!("{} roots", decomposition.total_roots),
        });
    }
    Ok(NiemeierLattice {
        code: code.clone(),
        lattice,
        root_lattice: None,
        decomposition,
        glue: AbelianGroup::trivial().span(&[]).expect("trivial"),
        data: Vec::new(),
        offsets: Vec::new(),
    })
}

/// True when -1 lies outside W(Q), i.e. some component lacks it; requires Q != 0.
pub fn minus_one_outside_weyl(n: &NiemeierLattice) -> bool {
    !n.components().is_empty() && n.components().iter().any(|t| !minus_one_in_weyl(*t))
}

/// |(N ∩ 2Q*)/2N|.
pub fn index_2qstar(n: &NiemeierLattice) -> Result<u128, LatticeError> {
    let Some(qd) = n.q_dual() else { return Ok(1) };
    let two = rat(2);
    let m = intersect(&n.lattice, &qd.scaled(&two))?;
    Ok(quotient(&m, &n.lattice.scaled(&two))?.order())
}

/// (N ∩ Q/2)/Q together with the glue labels of its elements.
pub fn n0_quotient(n: &NiemeierLattice) -> Result<(QuotientGroup, Vec<Vec<u32>>), LatticeError> {
    let q = n.q().ok_or(LatticeError::NotSublattice)?;
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let n0 = intersect(&n.lattice, &q.scaled(&half))?;
    let quot = quotient(&n0, q)?;
    let mut labels: Vec<Vec<u32>> =
        quot.elements().map(|x| n.labels_of(&quot.lift(&x)).expect("N0 lies in Q*")).collect();
    labels.sort();
    Ok((quot, labels))
}

/// G2(N): the permutation action on components of the glue-code stabilizer.
#[derive(Clone, Debug)]
pub struct G2Result {
    pub generators: Vec<Perm>,
    pub group: PermGroup,
    pub order: u128,
    pub name: GroupName,
    pub nodes: u64,
}

/// Ambient group for G2: diagram actions on each component, permutations of equal types.
pub fn glue_ambient(code: &GlueCode) -> AmbientAction {
    let sizes: Vec<u32> = code.components.iter().map(|t| t.det()).collect();
    let local: Vec<Vec<Vec<u32>>> = code.components.iter().map(|t| diagram_discriminant_action(*t)).collect();
    let classes: Vec<usize> =
        code.components.iter().map(|t| code.components.iter().position(|u| u == t).unwrap()).collect();
    AmbientAction::new(sizes, local, classes).expect("catalog actions are valid")
}

pub fn g2_group(n: &NiemeierLattice, budget: u64) -> Result<G2Result, StabilizerError> {
    let amb = glue_ambient(&n.code);
    let words: Vec<Vec<u32>> = n.glue.elements().iter().map(|x| n.code.labels(x)).collect();
    let res = stabilizer(&amb, &words, budget)?;
    let split = split_aut1_aut2(&amb, &words, &res, budget)?;
    let group = split.aut2;
    let order = group.order();
    let name = recognize(order, &Witnesses::from_perm_group(&group));
    Ok(G2Result { generators: group.gens().to_vec(), group, order, name, nodes: res.nodes + split.aut1.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_expansion() {
        let g = expand_cyclic(&["2", "(0", "2", "4)", "0"], 1).unwrap();
        assert_eq!(g, vec![vec![2, 0, 2, 4, 0], vec![2, 2, 4, 0, 0], vec![2, 4, 0, 2, 0]]);
        assert!(expand_cyclic(&["(1", "2"], 3).is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "lattice A24\ncomponents A24\nglue 25\n";
        let e = parse_glue_data(text).unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_glue_data("lattice A24\ncomponents A23\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_glue_data("bogus\n").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn shipped_data_parses() {
        let codes = parse_glue_data(GLUE_DATA).unwrap();
        assert_eq!(codes.len(), 24);
    }
}
