//! The Z2-orbifold of a Niemeier lattice VOA: conditions, V_1, the glue image
//! C_N in S_N, Aut(C_N), K(V), f_u witnesses and summary-table rows.

pub mod reference;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Range;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{char_group_structure, structure_name, AbelianElement, AbelianGroup};
use crate::affine::{AffineError, AffineIdeal, Conventions, Dictionary, DictionaryData, LieAlgebra, Weight};
use crate::codeaut::{split_aut1_aut2, stabilizer, AmbientAction, AmbientSymmetry, Perm, PermGroup, StabilizerError};
use crate::data::{DataError, DataSet};
use crate::groupid::{recognize, Confidence, GroupName, Witnesses};
use crate::lattice::{frac, rat, LatticeError, Rat};
use crate::niemeier::{
    build, g2_group, glue_ambient, index_2qstar, minus_one_outside_weyl, n0_quotient, parse_glue_data, GlueCode,
    NiemeierError, NiemeierLattice,
};
use crate::rootdata::{close_permutations, Family, RootType};

use reference::{CaseData, Expectation, GoldenRow, KvRole, KvVector, LabelTerm};

/// Lattices whose glue image is generated by the delta patterns alone.
pub const SIMPLE_CASES: [&str; 7] = ["A2^12", "A4^6", "A6^4", "A8^3", "E6^4", "A12^2", "A24"];

/// (weight tuple, whether it is the non-canonical +- module).
type ModuleOption = (Vec<Weight>, Option<bool>);

/// Candidate (target ideal, local map) pairs for one ideal.
type SlotImages = Vec<(usize, Vec<u32>)>;

/// Lattices with G_1(N) of order 2.
pub const G1_CASES: [&str; 3] = ["A5^4D4", "A9^2D6", "A17E7"];

#[derive(Debug, Error, Clone)]
pub enum OrbifoldError {
    #[error("{0}: orbifold isomorphic to a lattice VOA or moonshine")]
    NotApplicable(String),
    #[error("unknown lattice {0:?}")]
    UnknownLattice(String),
    #[error(transparent)]
    Niemeier(#[from] NiemeierError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("data {0}")]
    Data(#[from] DataError),
    #[error("{lattice}: {message}")]
    Inconsistent { lattice: String, message: String },
}

fn inconsistent(lattice: &str, message: impl Into<String>) -> OrbifoldError {
    OrbifoldError::Inconsistent { lattice: lattice.to_string(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii: bool,
    pub extra_automorphism: bool,
}

/// Q splits into blocks A3^2, Dn^2 (n >= 4, n != 8), A7 and D8.
fn is_block_sum(types: &[RootType]) -> bool {
    let mut counts: BTreeMap<RootType, usize> = BTreeMap::new();
    for t in types {
        *counts.entry(*t).or_default() += 1;
    }
    counts.iter().all(|(t, &c)| match (t.family, t.rank) {
        (Family::A, 7) | (Family::D, 8) => true,
        (Family::A, 3) => c % 2 == 0,
        (Family::D, _) => c % 2 == 0,
        _ => false,
    })
}

pub fn conditions(n: &NiemeierLattice) -> ConditionsReport {
    let types = n.components();
    let cond_i = types.iter().map(|t| t.rank).sum::<usize>() == n.lattice.rank() && n.lattice.rank() >= 24;
    let cond_ii = !types.contains(&RootType::a(1));
    let cond_iii = !types.iter().any(|t| t.family == Family::E && t.rank == 8) && !is_block_sum(types);
    let extra_automorphism = cond_i && cond_ii && !cond_iii && minus_one_outside_weyl(n);
    ConditionsReport { cond_i, cond_ii, cond_iii, extra_automorphism }
}

/// Summary-table style name, grouping consecutive equal ideals: D6,2B3,1^2C4,1.
pub fn v1_name(ideals: &[AffineIdeal]) -> String {
    let mut s = String::new();
    let mut i = 0;
    while i < ideals.len() {
        let key = (ideals[i].lie, ideals[i].level);
        let j = ideals[i..].iter().take_while(|x| (x.lie, x.level) == key).count();
        s.push_str(&ideals[i].to_string());
        if j > 1 {
            s.push_str(&format!("^{j}"));
        }
        i += j;
    }
    s
}

/// Per-component data: dictionary, ideal slots and the canonical +- currents.
#[derive(Clone, Debug)]
struct Component {
    dict: Dictionary,
    slots: Range<usize>,
    /// 2-torsion glue label -> (canonical, other) local words.
    pm: BTreeMap<u32, (Vec<u32>, Vec<u32>)>,
    delta: Vec<u32>,
    /// Whether the canonical module of each 2-torsion label is the - module.
    flipped: BTreeMap<u32, bool>,
}

impl Component {
    fn local_word(&self, x: &AbelianElement) -> Vec<u32> {
        let mut out = Vec::new();
        let mut pos = 0;
        for s in self.dict.currents() {
            let r = s.group.rank();
            out.push(s.group.index_of(&AbelianElement(x.0[pos..pos + r].to_vec())) as u32);
            pos += r;
        }
        out
    }

    fn local_element(&self, w: &[u32]) -> AbelianElement {
        AbelianElement(self.dict.currents().iter().zip(w).flat_map(|(s, &i)| s.group.from_index(i as u64).0).collect())
    }

    fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let g = self.dict.current_group();
        self.local_word(&g.add(&self.local_element(a), &self.local_element(b)))
    }
}

/// C_N inside S_N, words indexed by ideal slot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlueImage {
    /// |S_i| per ideal.
    pub sizes: Vec<u32>,
    /// Elements of N_0/Q as glue labels.
    pub n0: Vec<Vec<u32>>,
    /// Canonical lift of each element of `n0`.
    pub lifts: Vec<Vec<u32>>,
    /// delta pattern of each root component.
    pub deltas: Vec<Vec<u32>>,
    /// Sorted elements of C_N.
    pub words: Vec<Vec<u32>>,
    pub expected_order: u128,
}

impl GlueImage {
    pub fn order(&self) -> usize {
        self.words.len()
    }

    pub fn contains(&self, w: &[u32]) -> bool {
        self.words.binary_search_by(|x| x.as_slice().cmp(w)).is_ok()
    }

    pub fn word_set(&self) -> HashSet<Vec<u32>> {
        self.words.iter().cloned().collect()
    }

    /// Words as bit masks when every S_i has order 2.
    pub fn binary_words(&self) -> Option<Vec<u64>> {
        if self.sizes.iter().any(|&s| s != 2) || self.sizes.len() > 64 {
            return None;
        }
        Some(self.words.iter().map(|w| w.iter().enumerate().fold(0u64, |m, (i, &b)| m | (b as u64) << i)).collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutCn {
    pub order: u128,
    pub aut1_order: u128,
    pub aut1_invariants: Option<Vec<u64>>,
    pub aut2_order: u128,
    pub aut2_name: GroupName,
    pub nodes: u64,
    #[serde(skip)]
    pub generators: Vec<AmbientSymmetry>,
    #[serde(skip)]
    pub aut2: Option<PermGroup>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutSource {
    G2,
    AutCn,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutGroups {
    pub out1: GroupName,
    pub out2: GroupName,
    pub source: OutSource,
}

/// Weight tuples of irreducible V_Q^+ modules in V, as indices into per-slot weight lists.
#[derive(Clone, Debug, Default)]
pub struct Inventory {
    pub slot_weights: Vec<Vec<Weight>>,
    pub untwisted: Vec<Vec<u32>>,
    pub twisted: Vec<Vec<u32>>,
}

impl Inventory {
    pub fn weights(&self, module: &[u32]) -> Vec<Weight> {
        module.iter().enumerate().map(|(j, &k)| self.slot_weights[j][k as usize].clone()).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KvResult {
    pub order: u128,
    pub factors: Vec<u64>,
    pub name: String,
    /// 2 a f with a = |(N cap 2Q*)/2N| and f = |G_1(N)|.
    pub expected_order: u128,
    pub a: u128,
    pub f: u128,
    pub vectors: Vec<String>,
    pub z_row_ok: bool,
    pub rows_nontrivial: bool,
    pub modules: usize,
}

impl KvResult {
    pub fn consistent(&self) -> bool {
        self.order == self.expected_order && self.z_row_ok && self.rows_nontrivial
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub u: String,
    pub line: usize,
    pub expect: String,
    pub stabilizes: bool,
    /// Image of each ideal slot (0-based).
    pub slot_perm: Vec<usize>,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    pub checks: Vec<WitnessCheck>,
    /// f_u for the glue generators u.
    pub homs: usize,
    pub lifts: usize,
    pub generated_order: u128,
    pub full_order: u128,
    pub extra_generators: usize,
}

impl WitnessReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.stabilizes && c.satisfied)
    }
}

/// One lattice's orbifold with its per-component dictionaries.
#[derive(Clone, Debug)]
pub struct Orbifold {
    pub lattice: NiemeierLattice,
    pub ideals: Vec<AffineIdeal>,
    components: Vec<Component>,
    algebras: Vec<LieAlgebra>,
}

impl Orbifold {
    pub fn new(lattice: NiemeierLattice, data: &DictionaryData) -> Result<Self, OrbifoldError> {
        if !minus_one_outside_weyl(&lattice) {
            return Err(OrbifoldError::NotApplicable(lattice.name().to_string()));
        }
        let name = lattice.name().to_string();
        let conv: &Conventions = data.conventions();
        let mut cache: HashMap<RootType, Dictionary> = HashMap::new();
        let mut components = Vec::new();
        let mut ideals = Vec::new();
        for (i, t) in lattice.components().iter().enumerate() {
            let dict = match cache.get(t) {
                Some(d) => d.clone(),
                None => {
                    let d = data.dictionary(*t)?;
                    cache.insert(*t, d.clone());
                    d
                }
            };
            let start = ideals.len();
            ideals.extend(dict.ideals.iter().map(|x| AffineIdeal { host: i, ..*x }));
            let slots = start..ideals.len();
            let mut comp = Component { dict, slots, pm: BTreeMap::new(), delta: Vec::new(), flipped: BTreeMap::new() };
            comp.delta = comp.local_word(&comp.dict.delta());
            let disc = comp.dict.root_data().discriminant.clone();
            for mu in 0..comp.dict.root_data().label_count() {
                if disc.order_of(&disc.from_index(mu as u64)) > 2 {
                    continue;
                }
                let (p, m) = comp
                    .dict
                    .pm_currents(mu)
                    .ok_or_else(|| inconsistent(&name, format!("no +- row for class {mu} of {t}")))?;
                let (p, m) = (comp.local_word(&p), comp.local_word(&m));
                let flip = conv.is_flipped(&name, i, mu);
                comp.flipped.insert(mu, flip);
                comp.pm.insert(mu, if flip { (m, p) } else { (p, m) });
            }
            components.push(comp);
        }
        for (_, c, l) in conv.flips.iter().filter(|(n, _, _)| *n == name) {
            if !components.get(*c).is_some_and(|comp| comp.pm.contains_key(l)) {
                return Err(inconsistent(&name, format!("flip on component {} label {l} names no +- row", c + 1)));
            }
        }
        let algebras = ideals.iter().map(|i| LieAlgebra::new(i.lie)).collect();
        Ok(Orbifold { lattice, ideals, components, algebras })
    }

    pub fn name(&self) -> &str {
        self.lattice.name()
    }

    pub fn rank(&self) -> usize {
        self.ideals.iter().map(|i| i.lie.rank).sum()
    }

    pub fn v1_name(&self) -> String {
        v1_name(&self.ideals)
    }

    pub fn dictionary(&self, component: usize) -> &Dictionary {
        &self.components[component].dict
    }

    fn sizes(&self) -> Vec<u32> {
        self.components.iter().flat_map(|c| c.dict.currents().iter().map(|s| s.group.order() as u32)).collect()
    }

    /// S_N as an abelian group, one block of coordinates per ideal.
    pub fn s_n(&self) -> AbelianGroup {
        AbelianGroup::new(
            self.components
                .iter()
                .flat_map(|c| c.dict.currents().iter().flat_map(|s| s.group.moduli().to_vec()))
                .collect(),
        )
    }

    fn word_element(&self, w: &[u32]) -> AbelianElement {
        let mut coords = Vec::new();
        for c in &self.components {
            coords.extend(c.local_element(&w[c.slots.clone()]).0);
        }
        AbelianElement(coords)
    }

    fn element_word(&self, x: &AbelianElement) -> Vec<u32> {
        let mut out = Vec::new();
        let mut pos = 0;
        for c in &self.components {
            let r: usize = c.dict.currents().iter().map(|s| s.group.rank()).sum();
            out.extend(c.local_word(&AbelianElement(x.0[pos..pos + r].to_vec())));
            pos += r;
        }
        out
    }

    /// -w in S_N.
    pub fn negate(&self, w: &[u32]) -> Vec<u32> {
        self.element_word(&self.s_n().neg(&self.word_element(w)))
    }

    fn embed(&self, component: usize, local: &[u32]) -> Vec<u32> {
        let mut w = vec![0; self.ideals.len()];
        w[self.components[component].slots.clone()].copy_from_slice(local);
        w
    }

    pub fn glue_image(&self) -> Result<GlueImage, OrbifoldError> {
        let (_, n0) = n0_quotient(&self.lattice)?;
        let t = self.components.len();
        let lifts: Vec<Vec<u32>> = n0
            .iter()
            .map(|nu| self.components.iter().zip(nu).flat_map(|(c, mu)| c.pm[mu].0.clone()).collect())
            .collect();
        let deltas: Vec<Vec<u32>> = (0..t).map(|i| self.embed(i, &self.components[i].delta)).collect();
        let s = self.s_n();
        let mut gens: Vec<AbelianElement> = lifts.iter().map(|w| self.word_element(w)).collect();
        for j in 1..t {
            gens.push(s.add(&self.word_element(&deltas[0]), &self.word_element(&deltas[j])));
        }
        let span = s.span(&gens).map_err(|e| inconsistent(self.name(), e.to_string()))?;
        let mut words: Vec<Vec<u32>> = span.elements().iter().map(|x| self.element_word(x)).collect();
        words.sort();
        let expected_order = n0.len() as u128 * (1u128 << (t - 1));
        if words.len() as u128 != expected_order {
            return Err(inconsistent(
                self.name(),
                format!("C_N has order {}, expected |N0/Q| 2^(t-1) = {expected_order}", words.len()),
            ));
        }
        Ok(GlueImage { sizes: self.sizes(), n0, lifts, deltas, words, expected_order })
    }

    /// Diagram automorphisms on S_i and permutations of ideals of equal type and level.
    pub fn ambient(&self) -> AmbientAction {
        let mut classes = Vec::new();
        for (j, x) in self.ideals.iter().enumerate() {
            classes.push(self.ideals[..=j].iter().position(|y| (y.lie, y.level) == (x.lie, x.level)).unwrap());
        }
        let local: Vec<Vec<Vec<u32>>> = self
            .components
            .iter()
            .flat_map(|c| c.dict.currents().iter().zip(&c.dict.ideals).map(|(s, i)| s.gamma_action(i.lie)))
            .collect();
        AmbientAction::new(self.sizes(), local, classes).expect("ideals of one class share their local group")
    }

    pub fn aut_cn(&self, image: &GlueImage, budget: u64) -> Result<AutCn, OrbifoldError> {
        let amb = self.ambient();
        let res = stabilizer(&amb, &image.words, budget)?;
        let split = split_aut1_aut2(&amb, &image.words, &res, budget)?;
        let aut2_name = recognize(split.aut2.order(), &Witnesses::from_perm_group(&split.aut2));
        Ok(AutCn {
            order: res.order,
            aut1_order: split.aut1.order,
            aut1_invariants: split.aut1_invariants.clone(),
            aut2_order: split.aut2.order(),
            aut2_name,
            nodes: res.nodes + split.aut1.nodes,
            generators: res.generators,
            aut2: Some(split.aut2),
        })
    }

    pub fn is_simple_case(&self) -> bool {
        SIMPLE_CASES.contains(&self.name())
    }

    pub fn out_groups(&self, budget: u64) -> Result<OutGroups, OrbifoldError> {
        if self.is_simple_case() {
            let g2 = g2_group(&self.lattice, budget)?;
            let one = GroupName { name: "1".into(), order: 1, confidence: Confidence::Exact };
            return Ok(OutGroups { out1: one, out2: g2.name, source: OutSource::G2 });
        }
        let aut = self.aut_cn(&self.glue_image()?, budget)?;
        let inv = aut.aut1_invariants.clone().ok_or_else(|| inconsistent(self.name(), "Aut_1(C_N) is not abelian"))?;
        let out1 = GroupName { name: structure_name(&inv), order: aut.aut1_order, confidence: Confidence::Exact };
        Ok(OutGroups { out1, out2: aut.aut2_name, source: OutSource::AutCn })
    }

    /// Options per component for a glue label: (weight tuple, is the non-canonical +- module).
    fn untwisted_options(&self, component: usize, mu: u32) -> Result<Vec<ModuleOption>, OrbifoldError> {
        let c = &self.components[component];
        let row =
            c.dict.untwisted_row(mu).ok_or_else(|| inconsistent(self.name(), format!("no row for class {mu}")))?;
        if row.pm {
            let flip = c.flipped[&mu];
            let (canon, other) = if flip { (1, 0) } else { (0, 1) };
            Ok(vec![(row.tuples[canon].clone(), Some(false)), (row.tuples[other].clone(), Some(true))])
        } else {
            Ok(vec![(row.tuples[0].clone(), None)])
        }
    }

    pub fn weight_inventory(&self) -> Result<Inventory, OrbifoldError> {
        let nslots = self.ideals.len();
        let mut registry: Vec<HashMap<Weight, u32>> = vec![HashMap::new(); nslots];
        let mut inv = Inventory { slot_weights: vec![Vec::new(); nslots], ..Default::default() };
        let mut intern = |inv: &mut Inventory, slot: usize, w: &Weight| -> u32 {
            *registry[slot].entry(w.clone()).or_insert_with(|| {
                inv.slot_weights[slot].push(w.clone());
                inv.slot_weights[slot].len() as u32 - 1
            })
        };
        let code = &self.lattice.code;
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        for x in self.lattice.glue.elements() {
            let nu = code.labels(x);
            let mut opts: Vec<Vec<(Vec<u32>, Option<bool>)>> = Vec::new();
            for (i, &mu) in nu.iter().enumerate() {
                let slots = self.components[i].slots.clone();
                let o = self.untwisted_options(i, mu)?;
                opts.push(
                    o.into_iter()
                        .map(|(t, s)| (t.iter().zip(slots.clone()).map(|(w, j)| intern(&mut inv, j, w)).collect(), s))
                        .collect(),
                );
            }
            let all_pm = opts.iter().all(|o| o[0].1.is_some());
            let mut acc: Vec<(Vec<u32>, bool)> = vec![(Vec::new(), false)];
            for o in &opts {
                acc = acc
                    .into_iter()
                    .flat_map(|(w, par)| {
                        o.iter().map(move |(ids, s)| {
                            let mut w = w.clone();
                            w.extend(ids);
                            (w, par ^ s.unwrap_or(false))
                        })
                    })
                    .collect();
            }
            for (w, odd) in acc {
                if (!all_pm || !odd) && seen.insert(w.clone()) {
                    inv.untwisted.push(w);
                }
            }
        }
        let mut acc: Vec<(Vec<u32>, Rat)> = vec![(Vec::new(), Rat::zero())];
        for c in &self.components {
            let row = c.dict.twisted_row().ok_or_else(|| inconsistent(self.name(), "missing twisted row"))?;
            let opts: Vec<(Vec<u32>, Rat)> = row
                .tuples
                .iter()
                .map(|t| {
                    (
                        t.iter().zip(c.slots.clone()).map(|(w, j)| intern(&mut inv, j, w)).collect(),
                        c.dict.conformal_weight(t),
                    )
                })
                .collect();
            acc = acc
                .into_iter()
                .flat_map(|(w, h)| {
                    opts.iter().map(move |(ids, hh)| {
                        let mut w = w.clone();
                        w.extend(ids);
                        (w, &h + hh)
                    })
                })
                .collect();
        }
        inv.twisted = acc.into_iter().filter(|(_, h)| h.is_integer()).map(|(w, _)| w).collect();
        inv.twisted.sort();
        inv.twisted.dedup();
        Ok(inv)
    }

    fn g1_order(&self) -> u128 {
        if G1_CASES.contains(&self.name()) {
            2
        } else {
            1
        }
    }

    pub fn compute_kv(&self, vectors: &[KvVector], inventory: &Inventory) -> Result<KvResult, OrbifoldError> {
        let nslots = self.ideals.len();
        if vectors.is_empty() {
            return Err(inconsistent(self.name(), "no K(V) generator vectors"));
        }
        for v in vectors {
            if v.terms.len() != nslots {
                return Err(OrbifoldError::Data(DataError::new(
                    v.line,
                    format!("{} has {} entries, expected {nslots}", self.name(), v.terms.len()),
                )));
            }
            for (j, t) in v.terms.iter().enumerate() {
                if t.iter().any(|&(_, i)| i > self.ideals[j].lie.rank) {
                    return Err(OrbifoldError::Data(DataError::new(
                        v.line,
                        format!("index out of range for ideal {}", j + 1),
                    )));
                }
            }
        }
        // value of each vector on each interned weight, as a rational mod 1
        let table: Vec<Vec<Vec<Rat>>> = (0..nslots)
            .map(|j| {
                inventory.slot_weights[j]
                    .iter()
                    .map(|w| {
                        vectors
                            .iter()
                            .map(|v| {
                                let x = v.terms[j]
                                    .iter()
                                    .map(|&(c, i)| rat(c) * self.algebras[j].coweight_pairing(i, w))
                                    .fold(Rat::zero(), |a, b| a + b);
                                &x - x.floor()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut denom = num_bigint::BigInt::from(1);
        for x in table.iter().flatten().flatten() {
            denom = denom.lcm(x.denom());
        }
        let l = denom.to_i64().ok_or_else(|| inconsistent(self.name(), "pairing denominators overflow"))?;
        let ints: Vec<Vec<Vec<i64>>> = table
            .iter()
            .map(|ws| {
                ws.iter().map(|vs| vs.iter().map(|x| (x * rat(l)).to_integer().to_i64().unwrap()).collect()).collect()
            })
            .collect();
        let column = |m: &[u32]| -> Vec<i64> {
            let mut col = vec![0i64; vectors.len()];
            for (j, &k) in m.iter().enumerate() {
                for (c, v) in col.iter_mut().zip(&ints[j][k as usize]) {
                    *c = (*c + v) % l;
                }
            }
            col
        };
        let z =
            vectors.iter().position(|v| v.role == KvRole::Z).ok_or_else(|| inconsistent(self.name(), "no z vector"))?;
        let mut cols: HashSet<Vec<i64>> = HashSet::new();
        let mut z_row_ok = true;
        for m in &inventory.untwisted {
            let c = column(m);
            z_row_ok &= c[z] == 0;
            cols.insert(c);
        }
        let mut z_twisted = false;
        for m in &inventory.twisted {
            let c = column(m);
            z_twisted |= c[z] != 0;
            cols.insert(c);
        }
        z_row_ok &= z_twisted;
        let mut cols: Vec<Vec<i64>> = cols.into_iter().collect();
        cols.sort();
        let rows_nontrivial = (0..vectors.len()).all(|r| cols.iter().any(|c| c[r] != 0));
        let rows: Vec<Vec<Rat>> = (0..vectors.len()).map(|r| cols.iter().map(|c| frac(c[r], l)).collect()).collect();
        let factors = char_group_structure(&rows);
        let order: u128 = factors.iter().map(|&f| f as u128).product();
        let a = index_2qstar(&self.lattice)?;
        let f = self.g1_order();
        Ok(KvResult {
            order,
            name: structure_name(&factors),
            factors,
            expected_order: 2 * a * f,
            a,
            f,
            vectors: vectors.iter().map(|v| v.to_string()).collect(),
            z_row_ok,
            rows_nontrivial,
            modules: inventory.untwisted.len() + inventory.twisted.len(),
        })
    }

    /// Glue labels of a glue element written with fundamental weights.
    pub fn glue_labels(&self, u: &[LabelTerm]) -> Result<Vec<u32>, OrbifoldError> {
        if u.len() != self.components.len() {
            return Err(inconsistent(
                self.name(),
                format!("glue element has {} entries, expected {}", u.len(), self.components.len()),
            ));
        }
        u.iter()
            .zip(&self.components)
            .map(|(term, c)| {
                let rsd = c.dict.root_data();
                match *term {
                    LabelTerm::Zero => Ok(0),
                    LabelTerm::Multiple { coef, index } => {
                        if index > rsd.root_type.rank {
                            return Err(inconsistent(self.name(), format!("lambda_{index} out of range")));
                        }
                        let g = &rsd.discriminant;
                        let x = g.scale(coef, &g.from_index(rsd.fundamental_class(index) as u64));
                        Ok(g.index_of(&x) as u32)
                    }
                }
            })
            .collect()
    }

    /// Symmetries of one component's slots carrying each `pairs.0` to `pairs.1`,
    /// ideals of `from` mapped to ideals of `to`; first in a fixed order.
    fn realize(&self, from: usize, to: usize, pairs: &[(Vec<u32>, Vec<u32>)]) -> Option<Vec<(usize, Vec<u32>)>> {
        let (cf, ct) = (&self.components[from], &self.components[to]);
        let m = cf.slots.len();
        let locals: Vec<Vec<Vec<u32>>> = cf
            .dict
            .currents()
            .iter()
            .zip(&cf.dict.ideals)
            .map(|(s, i)| close_permutations(s.group.order() as usize, &s.gamma_action(i.lie)))
            .collect();
        for sigma in permutations(m) {
            let mut choice = vec![0usize; m];
            loop {
                let ok = pairs
                    .iter()
                    .all(|(src, dst)| (0..m).all(|k| locals[k][choice[k]][src[k] as usize] == dst[sigma[k]]));
                if ok {
                    return Some((0..m).map(|k| (ct.slots.start + sigma[k], locals[k][choice[k]].clone())).collect());
                }
                // next local choice
                let mut k = 0;
                while k < m {
                    choice[k] += 1;
                    if choice[k] < locals[k].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
        None
    }

    fn assemble(&self, parts: &[Vec<(usize, Vec<u32>)>]) -> AmbientSymmetry {
        let n = self.ideals.len();
        let mut perm = vec![0; n];
        let mut local = vec![Vec::new(); n];
        for (c, part) in self.components.iter().zip(parts) {
            for (j, (target, l)) in c.slots.clone().zip(part) {
                perm[j] = *target;
                local[j] = l.clone();
            }
        }
        AmbientSymmetry { perm, local }
    }

    /// The automorphism of S_N induced by f_u for a glue element u of N.
    pub fn fu_witness(&self, u: &[u32]) -> Result<AmbientSymmetry, OrbifoldError> {
        let code = &self.lattice.code;
        if u.len() != self.components.len() || !self.lattice.glue.contains(&code.element(u)) {
            return Err(inconsistent(self.name(), format!("{u:?} is not a glue element of N")));
        }
        let half = frac(1, 2);
        let mut parts = Vec::new();
        for (i, (c, &ui)) in self.components.iter().zip(u).enumerate() {
            let rsd = c.dict.root_data();
            let mut pairs = Vec::new();
            for (&mu, (p, m)) in &c.pm {
                let shift = rsd.label_pairing(mu, ui) == half;
                let tgt = |w: &Vec<u32>| if shift { c.add(w, &c.delta) } else { w.clone() };
                pairs.push((p.clone(), tgt(p)));
                pairs.push((m.clone(), tgt(m)));
            }
            parts.push(self.realize(i, i, &pairs).ok_or_else(|| {
                inconsistent(
                    self.name(),
                    format!("f_u on component {} is not realized by a symmetry of its ideals", i + 1),
                )
            })?);
        }
        Ok(self.assemble(&parts))
    }

    /// Lifts to S_N of generators of the glue-code stabilizer, sign patterns
    /// chosen so that each lift stabilizes C_N.
    pub fn g2_lifts(&self, image: &GlueImage, budget: u64) -> Result<Vec<AmbientSymmetry>, OrbifoldError> {
        let code = &self.lattice.code;
        let amb = glue_ambient(code);
        let words: Vec<Vec<u32>> = self.lattice.glue.elements().iter().map(|x| code.labels(x)).collect();
        let res = stabilizer(&amb, &words, budget)?;
        let set = image.word_set();
        let mut lifts = Vec::new();
        for g in &res.generators {
            let mut options: Vec<Vec<SlotImages>> = Vec::new();
            for (i, c) in self.components.iter().enumerate() {
                let j = g.perm[i];
                let cj = &self.components[j];
                let labels: Vec<u32> = c.pm.keys().copied().collect();
                let mut opts = Vec::new();
                for phi in homs_to_z2(&c.dict.root_data().discriminant, &labels) {
                    let mut pairs = Vec::new();
                    for (k, &mu) in labels.iter().enumerate() {
                        let nu = g.local[i][mu as usize];
                        let (tp, tm) = &cj.pm[&nu];
                        let shift = |w: &Vec<u32>| if phi[k] { cj.add(w, &cj.delta) } else { w.clone() };
                        pairs.push((c.pm[&mu].0.clone(), shift(tp)));
                        pairs.push((c.pm[&mu].1.clone(), shift(tm)));
                    }
                    if let Some(r) = self.realize(i, j, &pairs) {
                        opts.push(r);
                    }
                }
                if opts.is_empty() {
                    return Err(inconsistent(self.name(), format!("glue symmetry has no lift on component {}", i + 1)));
                }
                options.push(opts);
            }
            let mut idx = vec![0usize; options.len()];
            let found = loop {
                let parts: Vec<Vec<(usize, Vec<u32>)>> = idx.iter().zip(&options).map(|(&k, o)| o[k].clone()).collect();
                let sym = self.assemble(&parts);
                if sym.stabilizes(&set) {
                    break Some(sym);
                }
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break None;
                }
            };
            lifts.push(
                found
                    .ok_or_else(|| inconsistent(self.name(), "no sign pattern lifts a glue symmetry into Aut(C_N)"))?,
            );
        }
        Ok(lifts)
    }

    pub fn check_witnesses(
        &self,
        case: Option<&CaseData>,
        image: &GlueImage,
        aut: &AutCn,
        budget: u64,
    ) -> Result<WitnessReport, OrbifoldError> {
        let set = image.word_set();
        let amb = self.ambient();
        let mut checks = Vec::new();
        let mut syms = Vec::new();
        let mut klein: BTreeMap<[usize; 4], Vec<Perm>> = BTreeMap::new();
        for w in case.map(|c| c.witnesses.as_slice()).unwrap_or_default() {
            let u = self.glue_labels(&w.u)?;
            let sym = self.fu_witness(&u)?;
            let stabilizes = sym.stabilizes(&set);
            let p = &sym.perm;
            let moves: Vec<usize> = (0..p.len()).filter(|&j| p[j] != j).collect();
            let satisfied = match &w.expect {
                Expectation::Aut1 => moves.is_empty() && image.words.iter().any(|x| sym.apply(x) != *x),
                Expectation::Swap(a, b) => {
                    let (a, b) = (a - 1, b - 1);
                    moves == {
                        let mut v = vec![a, b];
                        v.sort();
                        v
                    } && p[a] == b
                        && p[b] == a
                }
                Expectation::Klein(set4) => {
                    let s: Vec<usize> = set4.iter().map(|x| x - 1).collect();
                    let mut sorted = s.clone();
                    sorted.sort();
                    klein.entry(*set4).or_default().push(sym.slot_perm());
                    moves == sorted && s.iter().all(|&j| p[p[j]] == j)
                }
            };
            let u_text: Vec<String> = w.u.iter().map(|t| t.to_string()).collect();
            checks.push(WitnessCheck {
                u: format!("({})", u_text.join(",")),
                line: w.line,
                expect: w.expect.to_string(),
                stabilizes,
                slot_perm: p.clone(),
                satisfied,
            });
            syms.push(sym);
        }
        for (set4, perms) in &klein {
            let g = PermGroup::new(self.ideals.len(), perms.clone());
            if g.order() != 4 || !g.is_abelian() {
                for c in checks.iter_mut().filter(|c| c.expect == Expectation::Klein(*set4).to_string()) {
                    c.satisfied = false;
                }
            }
        }
        // f_u for u running over glue generators spans the image of Hom(N, Z2)
        let homs = self.lattice.code.generators.iter().map(|u| self.fu_witness(u)).collect::<Result<Vec<_>, _>>()?;
        if let Some(h) = homs.iter().find(|h| !h.stabilizes(&set)) {
            return Err(inconsistent(
                self.name(),
                format!("f_u with slot permutation {:?} does not stabilize C_N", h.perm),
            ));
        }
        let lifts = self.g2_lifts(image, budget)?;
        let mut gens: Vec<Perm> = syms.iter().chain(&homs).chain(&lifts).map(|s| amb.point_perm(s)).collect();
        let mut group = PermGroup::new(amb.point_count(), gens.clone());
        let generated_order = group.order();
        let mut extra_generators = 0;
        for g in &aut.generators {
            if group.order() >= aut.order {
                break;
            }
            let p = amb.point_perm(g);
            if !group.contains(&p) {
                gens.push(p);
                group = PermGroup::new(amb.point_count(), gens.clone());
                extra_generators += 1;
            }
        }
        if group.order() != aut.order {
            return Err(inconsistent(self.name(), "witnesses and Aut(C_N) generators disagree on the group order"));
        }
        Ok(WitnessReport {
            checks,
            homs: homs.len(),
            lifts: lifts.len(),
            generated_order,
            full_order: aut.order,
            extra_generators,
        })
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for k in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=k).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                })
            })
            .collect();
    }
    out.sort();
    out
}

/// Homomorphisms from the subgroup with the given labels into Z2, as value lists.
fn homs_to_z2(g: &AbelianGroup, labels: &[u32]) -> Vec<Vec<bool>> {
    let n = labels.len();
    let pos = |x: &AbelianElement| labels.iter().position(|&l| l as u64 == g.index_of(x)).unwrap();
    (0u32..1 << n)
        .map(|bits| (0..n).map(|k| bits >> k & 1 == 1).collect::<Vec<bool>>())
        .filter(|phi| {
            labels.iter().enumerate().all(|(a, &la)| {
                labels.iter().enumerate().all(|(b, &lb)| {
                    let s = g.add(&g.from_index(la as u64), &g.from_index(lb as u64));
                    phi[pos(&s)] == (phi[a] ^ phi[b])
                })
            })
        })
        .collect()
}

/// Parsed data files.
#[derive(Clone, Debug)]
pub struct Context {
    pub codes: Vec<GlueCode>,
    pub dictionary: DictionaryData,
    pub kv: BTreeMap<String, Vec<KvVector>>,
    pub cases: BTreeMap<String, CaseData>,
    pub golden: Vec<GoldenRow>,
}

impl Context {
    pub fn load(d: &DataSet) -> Result<Self, OrbifoldError> {
        let conventions = Conventions::parse(&d.conventions)?;
        Ok(Context {
            codes: parse_glue_data(&d.glue)?,
            dictionary: DictionaryData::parse(&d.dictionary, conventions)?,
            kv: reference::parse_kv(&d.kv)?,
            cases: reference::parse_cases(&d.cases)?,
            golden: reference::parse_table1(&d.table1)?,
        })
    }

    pub fn code(&self, name: &str) -> Result<&GlueCode, OrbifoldError> {
        self.codes.iter().find(|c| c.name == name).ok_or_else(|| OrbifoldError::UnknownLattice(name.to_string()))
    }

    pub fn orbifold(&self, name: &str) -> Result<Orbifold, OrbifoldError> {
        Orbifold::new(build(self.code(name)?)?, &self.dictionary)
    }

    pub fn golden_row(&self, name: &str) -> Option<&GoldenRow> {
        self.golden.iter().find(|r| r.lattice == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub lattice: String,
    pub v1: String,
    pub rank: usize,
    pub kv: String,
    pub kv_factors: Vec<u64>,
    pub out1: GroupName,
    pub out2: GroupName,
    pub number: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub lattice: String,
    pub field: String,
    pub expected: String,
    pub found: String,
}

impl Table1Row {
    /// Every field that differs from the golden row.
    pub fn compare(&self, golden: &GoldenRow) -> Vec<Mismatch> {
        let fields = [
            ("V1", golden.v1.clone(), self.v1.clone()),
            ("rank", golden.rank.to_string(), self.rank.to_string()),
            ("K(V)", golden.kv.clone(), self.kv.clone()),
            ("Out1", golden.out1.clone(), self.out1.to_string()),
            ("Out2", golden.out2.clone(), self.out2.to_string()),
        ];
        fields
            .into_iter()
            .filter(|(_, e, f)| e != f)
            .map(|(field, expected, found)| Mismatch {
                lattice: self.lattice.clone(),
                field: field.into(),
                expected,
                found,
            })
            .collect()
    }
}

/// Everything computed for one lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeReport {
    pub lattice: String,
    pub conditions: ConditionsReport,
    pub ideals: Vec<AffineIdeal>,
    pub row: Table1Row,
    pub g2_order: u128,
    pub g2_name: GroupName,
    pub n0_order: usize,
    pub cn_order: usize,
    pub cn_expected_order: u128,
    /// Reference generators of C_N and whether each lies in the computed C_N.
    pub cn_reference: Vec<(Vec<u32>, bool)>,
    pub aut_cn: Option<AutCn>,
    pub out_source: OutSource,
    pub kv: KvResult,
    pub witnesses: Option<WitnessReport>,
    /// Wall-clock milliseconds per stage; cleared unless requested so reports are byte-stable.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timings_ms: BTreeMap<String, u128>,
}

pub fn compute_report(ctx: &Context, name: &str, budget: u64) -> Result<LatticeReport, OrbifoldError> {
    let mut timings = BTreeMap::new();
    let mut clock = std::time::Instant::now();
    let mut lap = |label: &str, timings: &mut BTreeMap<String, u128>| {
        timings.insert(label.to_string(), clock.elapsed().as_millis());
        clock = std::time::Instant::now();
    };
    let orb = ctx.orbifold(name)?;
    let conditions = conditions(&orb.lattice);
    lap("build", &mut timings);
    let g2 = g2_group(&orb.lattice, budget)?;
    lap("g2", &mut timings);
    let image = orb.glue_image()?;
    let case = ctx.cases.get(name);
    let cn_reference: Vec<(Vec<u32>, bool)> =
        case.map(|c| c.generators.iter().map(|(w, _)| (w.clone(), image.contains(w))).collect()).unwrap_or_default();
    lap("glue_image", &mut timings);
    let (aut_cn, out1, out2, source, witnesses) = if orb.is_simple_case() {
        let one = GroupName { name: "1".into(), order: 1, confidence: Confidence::Exact };
        (None, one, g2.name.clone(), OutSource::G2, None)
    } else {
        let aut = orb.aut_cn(&image, budget)?;
        lap("aut_cn", &mut timings);
        let inv = aut.aut1_invariants.clone().ok_or_else(|| inconsistent(name, "Aut_1(C_N) is not abelian"))?;
        let out1 = GroupName { name: structure_name(&inv), order: aut.aut1_order, confidence: Confidence::Exact };
        let witnesses = Some(orb.check_witnesses(case, &image, &aut, budget)?);
        lap("witnesses", &mut timings);
        let out2 = aut.aut2_name.clone();
        (Some(aut), out1, out2, OutSource::AutCn, witnesses)
    };
    let inventory = orb.weight_inventory()?;
    let vectors = ctx.kv.get(name).map(Vec::as_slice).unwrap_or_default();
    let kv = orb.compute_kv(vectors, &inventory)?;
    lap("kv", &mut timings);
    let row = Table1Row {
        lattice: name.to_string(),
        v1: orb.v1_name(),
        rank: orb.rank(),
        kv: kv.name.clone(),
        kv_factors: kv.factors.clone(),
        out1,
        out2,
        number: ctx.golden_row(name).map(|r| r.number),
    };
    Ok(LatticeReport {
        lattice: name.to_string(),
        conditions,
        ideals: orb.ideals.clone(),
        row,
        g2_order: g2.order,
        g2_name: g2.name,
        n0_order: image.n0.len(),
        cn_order: image.order(),
        cn_expected_order: image.expected_order,
        cn_reference,
        aut_cn,
        out_source: source,
        kv,
        witnesses,
        timings_ms: timings,
    })
}

/// Problems a report raises against the reference data, beyond the summary-table fields.
pub fn report_problems(r: &LatticeReport) -> Vec<String> {
    let mut out = Vec::new();
    if !r.kv.consistent() {
        out.push(format!(
            "K(V): character group order {} vs 2af = {}, z row ok {}, rows nontrivial {}",
            r.kv.order, r.kv.expected_order, r.kv.z_row_ok, r.kv.rows_nontrivial
        ));
    }
    for (w, ok) in &r.cn_reference {
        if !ok {
            out.push(format!("C_N: reference generator {w:?} not contained"));
        }
    }
    if let Some(w) = &r.witnesses {
        for c in w.checks.iter().filter(|c| !c.stabilizes || !c.satisfied) {
            out.push(format!("witness {} (line {}): expected {}", c.u, c.line, c.expect));
        }
        let allowed = usize::from(r.conditions.extra_automorphism);
        if w.extra_generators > allowed {
            out.push(format!("witnesses need {} extra generators", w.extra_generators));
        }
    }
    out
}
