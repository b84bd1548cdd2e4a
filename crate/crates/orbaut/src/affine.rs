//! Affine side: ideal types and levels of (V_R^+)_1, simple currents, conformal
//! weights, coweight pairings and the module dictionary with its load-time checks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{AbelianElement, AbelianGroup};
use crate::data::{content_lines, DataError};
use crate::lattice::{frac, rat, ExactMatrix, Rat};
use crate::rootdata::{cartan_matrix, catalog, Family, RootSystemData, RootType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AffineError {
    #[error("A1 is excluded by condition (II)")]
    ExcludedA1,
    #[error("weight {weight:?} is not a dominant weight of level <= {level} for {lie}")]
    BadWeight { lie: LieType, level: u32, weight: Weight },
    #[error("no dictionary case matches {0}")]
    NoCase(RootType),
    #[error("dictionary data: {0}")]
    Data(#[from] DataError),
    #[error("dictionary {root} row {row}: {message}")]
    Firewall { root: RootType, row: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LieFamily {
    A,
    B,
    C,
    D,
}

/// Type of a simple Lie algebra; D2 and D3 never occur (written A1^2 and A3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LieType {
    pub family: LieFamily,
    pub rank: usize,
}

impl LieType {
    pub fn new(family: LieFamily, rank: usize) -> Option<Self> {
        let ok = match family {
            LieFamily::A => rank >= 1,
            LieFamily::B | LieFamily::C => rank >= 2,
            LieFamily::D => rank >= 4,
        };
        ok.then_some(LieType { family, rank })
    }

    pub fn dual_coxeter(&self) -> i64 {
        let n = self.rank as i64;
        match self.family {
            LieFamily::A => n + 1,
            LieFamily::B => 2 * n - 1,
            LieFamily::C => n + 1,
            LieFamily::D => 2 * n - 2,
        }
    }
}

impl fmt::Display for LieType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

/// A simple ideal of (V_Q^+)_1 with its level and the component it comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineIdeal {
    pub lie: LieType,
    pub level: u32,
    /// Index of the host root component.
    pub host: usize,
    /// Index of this ideal among the ideals of its host.
    pub slot: usize,
}

impl fmt::Display for AffineIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.lie, self.level)
    }
}

/// Dynkin labels of a weight in the fundamental-weight basis.
pub type Weight = Vec<i64>;
/// One weight per ideal of a component.
pub type WeightTuple = Vec<Weight>;

/// Ideal types and levels of (V_R^+)_1 for an indecomposable root lattice R.
pub fn lie_data(t: RootType) -> Result<Vec<AffineIdeal>, AffineError> {
    let n = t.rank;
    let one = |family, rank, level| LieType::new(family, rank).map(|lie| (lie, level));
    let (lie, level, count) = match (t.family, n) {
        (Family::A, 1) => return Err(AffineError::ExcludedA1),
        (Family::A, 2) => (one(LieFamily::A, 1, 4), 4, 1),
        (Family::A, 3) => (one(LieFamily::A, 1, 2), 2, 2),
        (Family::A, 5) => (one(LieFamily::A, 3, 2), 2, 1),
        (Family::A, _) if n.is_multiple_of(2) => (one(LieFamily::B, n / 2, 2), 2, 1),
        (Family::A, _) => (one(LieFamily::D, n.div_ceil(2), 2), 2, 1),
        (Family::D, 4) => (one(LieFamily::A, 1, 1), 1, 4),
        (Family::D, 6) => (one(LieFamily::A, 3, 1), 1, 2),
        (Family::D, _) if n.is_multiple_of(2) => (one(LieFamily::D, n / 2, 1), 1, 2),
        (Family::D, _) => (one(LieFamily::B, n / 2, 1), 1, 2),
        (Family::E, 6) => (one(LieFamily::C, 4, 1), 1, 1),
        (Family::E, 7) => (one(LieFamily::A, 7, 1), 1, 1),
        (Family::E, _) => (one(LieFamily::D, 8, 1), 1, 1),
    };
    let (lie, _) = lie.expect("Table entries are valid Lie types");
    Ok((0..count).map(|slot| AffineIdeal { lie, level, host: 0, slot }).collect())
}

/// Normalized form data of a simple Lie algebra, long roots of norm 2.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    pub lie: LieType,
    /// (alpha_i | alpha_i) / 2.
    pub half_norms: Vec<Rat>,
    /// (Lambda_i | Lambda_j).
    pub weight_form: ExactMatrix,
    /// Highest root in simple-root coordinates.
    pub highest_root: Vec<i64>,
}

impl LieAlgebra {
    pub fn new(lie: LieType) -> Self {
        let n = lie.rank;
        let mut b = ExactMatrix::zeros(n, n);
        let (sym, highest_root): (ExactMatrix, Vec<i64>) = match lie.family {
            LieFamily::A => (cartan_matrix(RootType::a(n)), vec![1; n]),
            LieFamily::D => {
                let mut h = vec![2; n];
                h[0] = 1;
                h[n - 2] = 1;
                h[n - 1] = 1;
                (cartan_matrix(RootType::d(n)), h)
            }
            LieFamily::B => {
                for i in 0..n {
                    b.set(i, i, if i + 1 < n { rat(2) } else { rat(1) });
                }
                for i in 0..n - 1 {
                    b.set(i, i + 1, rat(-1));
                    b.set(i + 1, i, rat(-1));
                }
                let mut h = vec![2; n];
                h[0] = 1;
                (b.clone(), h)
            }
            LieFamily::C => {
                for i in 0..n {
                    b.set(i, i, if i + 1 < n { rat(1) } else { rat(2) });
                }
                for i in 0..n - 1 {
                    let x = if i + 2 < n { frac(-1, 2) } else { rat(-1) };
                    b.set(i, i + 1, x.clone());
                    b.set(i + 1, i, x);
                }
                let mut h = vec![2; n];
                h[n - 1] = 1;
                (b.clone(), h)
            }
        };
        let half_norms: Vec<Rat> = (0..n).map(|i| sym.get(i, i) / rat(2)).collect();
        let inv = sym.inverse().expect("symmetrized Cartan matrices are invertible");
        let mut weight_form = ExactMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                weight_form.set(i, j, &half_norms[i] * inv.get(i, j) * &half_norms[j]);
            }
        }
        LieAlgebra { lie, half_norms, weight_form, highest_root }
    }

    pub fn inner(&self, u: &[i64], v: &[i64]) -> Rat {
        let mut s = Rat::zero();
        for (i, &a) in u.iter().enumerate() {
            for (j, &b) in v.iter().enumerate() {
                if a != 0 && b != 0 {
                    s += self.weight_form.get(i, j) * rat(a * b);
                }
            }
        }
        s
    }

    /// (Lambda | highest root).
    pub fn level_of(&self, w: &[i64]) -> Rat {
        w.iter()
            .zip(&self.highest_root)
            .zip(&self.half_norms)
            .map(|((&m, &h), d)| rat(m * h) * d)
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn is_admissible(&self, w: &[i64], level: u32) -> bool {
        w.len() == self.lie.rank && w.iter().all(|&m| m >= 0) && self.level_of(w) <= rat(level as i64)
    }

    /// (Lambda | Lambda + 2 rho) / (2 (k + h^vee)).
    pub fn conformal_weight(&self, level: u32, w: &[i64]) -> Rat {
        let shifted: Vec<i64> = w.iter().map(|&m| m + 2).collect();
        self.inner(w, &shifted) / rat(2 * (level as i64 + self.lie.dual_coxeter()))
    }

    /// <Lambda_i^vee, Lambda> for 1-based i.
    pub fn coweight_pairing(&self, i: usize, w: &[i64]) -> Rat {
        let mut e = vec![0; self.lie.rank];
        e[i - 1] = 1;
        self.inner(&e, w) / &self.half_norms[i - 1]
    }

    /// Diagram automorphisms as permutations of fundamental-weight indices (0-based).
    pub fn diagram_automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.lie.rank;
        let id: Vec<usize> = (0..n).collect();
        match self.lie.family {
            LieFamily::A if n >= 2 => vec![(0..n).rev().collect()],
            LieFamily::D if n == 4 => vec![vec![0, 1, 3, 2], vec![2, 1, 0, 3]],
            LieFamily::D => {
                let mut p = id;
                p.swap(n - 2, n - 1);
                vec![p]
            }
            _ => vec![],
        }
    }
}

pub fn conformal_weight(ideal: &AffineIdeal, w: &[i64]) -> Result<Rat, AffineError> {
    let alg = LieAlgebra::new(ideal.lie);
    if !alg.is_admissible(w, ideal.level) {
        return Err(AffineError::BadWeight { lie: ideal.lie, level: ideal.level, weight: w.to_vec() });
    }
    Ok(alg.conformal_weight(ideal.level, w))
}

pub fn coweight_pairing(ideal: &AffineIdeal, i: usize, w: &[i64]) -> Rat {
    LieAlgebra::new(ideal.lie).coweight_pairing(i, w)
}

/// Simple currents of L_g(k,0) as an abelian group with their highest weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleCurrentGroup {
    pub group: AbelianGroup,
    /// Highest weight of each element, indexed by mixed-radix index.
    pub weights: Vec<Weight>,
}

impl SimpleCurrentGroup {
    pub fn weight(&self, x: &AbelianElement) -> &Weight {
        &self.weights[self.group.index_of(x) as usize]
    }

    pub fn element_of(&self, w: &[i64]) -> Option<AbelianElement> {
        self.weights.iter().position(|v| v == w).map(|i| self.group.from_index(i as u64))
    }

    /// Generators of the diagram-automorphism action, as permutations of element indices.
    /// Generators of the diagram-automorphism action on the currents; the full
    /// triality on D4 ideals.
    pub fn gamma_action(&self, lie: LieType) -> Vec<Vec<u32>> {
        let alg = LieAlgebra::new(lie);
        alg.diagram_automorphisms()
            .iter()
            .map(|p| {
                self.weights
                    .iter()
                    .map(|w| {
                        let mut img = vec![0; w.len()];
                        for (i, &m) in w.iter().enumerate() {
                            img[p[i]] = m;
                        }
                        self.weights
                            .iter()
                            .position(|v| *v == img)
                            .expect("diagram automorphisms permute simple currents") as u32
                    })
                    .collect()
            })
            .filter(|p: &Vec<u32>| p.iter().enumerate().any(|(i, &x)| i as u32 != x))
            .collect()
    }
}

pub fn simple_current_group(ideal: &AffineIdeal) -> SimpleCurrentGroup {
    let n = ideal.lie.rank;
    let k = ideal.level as i64;
    let fw = |i: usize| {
        let mut w = vec![0; n];
        if i > 0 {
            w[i - 1] = k;
        }
        w
    };
    let (moduli, weights) = match ideal.lie.family {
        LieFamily::A => (vec![n as u32 + 1], (0..=n).map(fw).collect()),
        LieFamily::B => (vec![2], vec![fw(0), fw(1)]),
        LieFamily::C => (vec![2], vec![fw(0), fw(n)]),
        LieFamily::D if n.is_multiple_of(2) => (vec![2, 2], vec![fw(0), fw(1), fw(n - 1), fw(n)]),
        LieFamily::D => (vec![4], vec![fw(0), fw(n), fw(1), fw(n - 1)]),
    };
    SimpleCurrentGroup { group: AbelianGroup::new(moduli), weights }
}

// ---------------------------------------------------------------------------
// Dictionary data

/// Linear expression in lowercase variables.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Expr {
    constant: i64,
    terms: Vec<(i64, char)>,
}

impl Expr {
    fn parse(s: &str) -> Option<Expr> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        let mut e = Expr { constant: 0, terms: Vec::new() };
        let mut chars = s.chars().peekable();
        let mut first = true;
        while chars.peek().is_some() {
            let sign = match chars.peek() {
                Some('+') => {
                    chars.next();
                    1
                }
                Some('-') => {
                    chars.next();
                    -1
                }
                _ if first => 1,
                _ => return None,
            };
            first = false;
            let mut digits = String::new();
            while let Some(c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                digits.push(*c);
                chars.next();
            }
            match chars.peek().copied() {
                Some(v) if v.is_ascii_lowercase() => {
                    chars.next();
                    let coef = if digits.is_empty() { 1 } else { digits.parse().ok()? };
                    e.terms.push((sign * coef, v));
                }
                _ => e.constant += sign * digits.parse::<i64>().ok()?,
            }
        }
        Some(e)
    }

    fn eval(&self, env: &HashMap<char, i64>) -> Option<i64> {
        let mut x = self.constant;
        for (c, v) in &self.terms {
            x += c * env.get(v)?;
        }
        Some(x)
    }
}

#[derive(Clone, Debug)]
enum Coef {
    Int(i64),
    Var(char),
}

#[derive(Clone, Debug)]
struct WeightPattern(Vec<(Coef, Expr)>);

#[derive(Clone, Debug)]
enum AltPattern {
    Tuple(Vec<WeightPattern>),
    Sigma(Vec<WeightPattern>),
    D4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum LabelPattern {
    Zero,
    Fund(Expr),
    Twisted,
}

#[derive(Clone, Debug)]
struct RowPattern {
    line: usize,
    label: LabelPattern,
    pm: bool,
    alts: Vec<AltPattern>,
    loops: Vec<(char, Vec<Expr>)>,
    ranges: Vec<(char, Expr, Expr)>,
}

#[derive(Clone, Debug)]
struct CasePattern {
    line: usize,
    family: Family,
    index: Expr,
    min_n: Option<i64>,
    ideal_family: LieFamily,
    ideal_rank: Expr,
    ideal_count: usize,
    level: u32,
    rows: Vec<RowPattern>,
}

/// Conventions not fixed by the dictionary itself.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Conventions {
    /// D4: fundamental-weight index to the + pattern over the four A1 ideals.
    pub d4: BTreeMap<usize, [bool; 4]>,
    /// (lattice, component, glue label) whose +- roles are swapped.
    pub flips: Vec<(String, usize, u32)>,
}

impl Conventions {
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut c = Conventions::default();
        for (line, l) in content_lines(text) {
            let toks: Vec<&str> = l.split_whitespace().collect();
            match toks.as_slice() {
                ["d4", i, bits] => {
                    let i: usize = i.parse().map_err(|_| DataError::new(line, "bad weight index"))?;
                    let b: Vec<bool> = bits.chars().map(|ch| ch == '1').collect();
                    if b.len() != 4 || bits.chars().any(|ch| ch != '0' && ch != '1') {
                        return Err(DataError::new(line, "pattern must be four binary digits"));
                    }
                    c.d4.insert(i, [b[0], b[1], b[2], b[3]]);
                }
                ["flip", name, comp, label] => {
                    let comp: usize = comp.parse().map_err(|_| DataError::new(line, "bad component"))?;
                    let label: u32 = label.parse().map_err(|_| DataError::new(line, "bad label"))?;
                    if comp == 0 {
                        return Err(DataError::new(line, "components are numbered from 1"));
                    }
                    c.flips.push((name.to_string(), comp - 1, label));
                }
                _ => return Err(DataError::new(line, format!("unrecognized convention {l:?}"))),
            }
        }
        Ok(c)
    }

    pub fn is_flipped(&self, lattice: &str, component: usize, label: u32) -> bool {
        self.flips.iter().any(|(n, c, l)| n == lattice && *c == component && *l == label)
    }
}

/// Parsed dictionary cases, instantiated per root type on demand.
#[derive(Clone, Debug)]
pub struct DictionaryData {
    cases: Vec<CasePattern>,
    conventions: Conventions,
}

fn parse_weight(s: &str, line: usize) -> Result<WeightPattern, DataError> {
    let bad = || DataError::new(line, format!("bad weight {s:?}"));
    let inner = s.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
    if inner.trim() == "0" {
        return Ok(WeightPattern(Vec::new()));
    }
    let mut terms = Vec::new();
    for term in inner.split('+') {
        let (coef, idx) = term.trim().split_once('L').ok_or_else(bad)?;
        let coef = match coef {
            "" => Coef::Int(1),
            c if c.len() == 1 && c.chars().all(|ch| ch.is_ascii_lowercase()) => Coef::Var(c.chars().next().unwrap()),
            c => Coef::Int(c.parse().map_err(|_| bad())?),
        };
        terms.push((coef, Expr::parse(idx).ok_or_else(bad)?));
    }
    Ok(WeightPattern(terms))
}

fn parse_tuple(s: &str, line: usize) -> Result<Vec<WeightPattern>, DataError> {
    let s = s.trim();
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let close = rest.find(']').ok_or_else(|| DataError::new(line, format!("unclosed weight in {s:?}")))?;
        out.push(parse_weight(&rest[..=close], line)?);
        rest = rest[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix('x') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err(DataError::new(line, "dangling 'x'"));
            }
        } else if !rest.is_empty() {
            return Err(DataError::new(line, format!("expected 'x' in {s:?}")));
        }
    }
    if out.is_empty() {
        return Err(DataError::new(line, "empty tuple"));
    }
    Ok(out)
}

fn parse_alt(s: &str, line: usize) -> Result<AltPattern, DataError> {
    let s = s.trim();
    if s == "@d4" {
        return Ok(AltPattern::D4);
    }
    if let Some(inner) = s.strip_prefix("sigma(").and_then(|r| r.strip_suffix(')')) {
        return Ok(AltPattern::Sigma(parse_tuple(inner, line)?));
    }
    Ok(AltPattern::Tuple(parse_tuple(s, line)?))
}

fn parse_row(l: &str, line: usize) -> Result<RowPattern, DataError> {
    let (head, body) = l.split_once('=').ok_or_else(|| DataError::new(line, "expected '='"))?;
    let head = head.trim();
    let (head, pm) = match head.strip_suffix("+-") {
        Some(h) => (h, true),
        None => (head, false),
    };
    let inner = head
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| DataError::new(line, format!("bad label {head:?}")))?;
    let label = match inner {
        "0" => LabelPattern::Zero,
        "chi" => LabelPattern::Twisted,
        l => LabelPattern::Fund(
            l.strip_prefix('l')
                .and_then(Expr::parse)
                .ok_or_else(|| DataError::new(line, format!("bad label {head:?}")))?,
        ),
    };
    let mut parts = body.split(" for ");
    let alts_text = parts.next().unwrap_or("");
    let alts = alts_text.split('|').map(|a| parse_alt(a, line)).collect::<Result<Vec<_>, _>>()?;
    let mut loops = Vec::new();
    let mut ranges = Vec::new();
    for clause in parts {
        let (var, set) =
            clause.split_once(" in ").ok_or_else(|| DataError::new(line, "expected 'for <var> in <set>'"))?;
        let var = var.trim();
        if var.len() != 1 || !var.chars().all(|c| c.is_ascii_lowercase()) || var == "n" {
            return Err(DataError::new(line, format!("bad loop variable {var:?}")));
        }
        let v = var.chars().next().unwrap();
        let set = set.trim();
        if let Some(members) = set.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let m = members
                .split(',')
                .map(|x| Expr::parse(x).ok_or_else(|| DataError::new(line, format!("bad member {x:?}"))));
            loops.push((v, m.collect::<Result<Vec<_>, _>>()?));
        } else if let Some((a, b)) = set.split_once("..") {
            let a = Expr::parse(a).ok_or_else(|| DataError::new(line, "bad range start"))?;
            let b = Expr::parse(b).ok_or_else(|| DataError::new(line, "bad range end"))?;
            ranges.push((v, a, b));
        } else {
            return Err(DataError::new(line, format!("bad set {set:?}")));
        }
    }
    if label == LabelPattern::Twisted && !pm {
        return Err(DataError::new(line, "twisted rows are written (chi)+-"));
    }
    Ok(RowPattern { line, label, pm, alts, loops, ranges })
}

fn parse_case(l: &str, line: usize) -> Result<CasePattern, DataError> {
    let bad = |m: &str| DataError::new(line, m.to_string());
    let rest = l.strip_prefix("case").ok_or_else(|| bad("expected 'case'"))?;
    let (lhs, rhs) = rest.split_once(':').ok_or_else(|| bad("expected ':'"))?;
    let mut lt = lhs.split_whitespace();
    let r = lt.next().ok_or_else(|| bad("missing root type"))?;
    let family = match &r[..1] {
        "A" => Family::A,
        "D" => Family::D,
        "E" => Family::E,
        _ => return Err(bad("root family must be A, D or E")),
    };
    let index = Expr::parse(&r[1..]).ok_or_else(|| bad("bad root index"))?;
    let min_n = match lt.next() {
        None => None,
        Some(c) => {
            Some(c.strip_prefix("n>=").and_then(|x| x.parse().ok()).ok_or_else(|| bad("constraint must be n>=<int>"))?)
        }
    };
    let rt: Vec<&str> = rhs.split_whitespace().collect();
    let [ideal, "level", k] = rt.as_slice() else {
        return Err(bad("expected '<ideal> level <k>'"));
    };
    let (ideal, count) = match ideal.split_once('^') {
        Some((i, c)) => (i, c.parse().map_err(|_| bad("bad ideal multiplicity"))?),
        None => (*ideal, 1),
    };
    let ideal_family = match &ideal[..1] {
        "A" => LieFamily::A,
        "B" => LieFamily::B,
        "C" => LieFamily::C,
        "D" => LieFamily::D,
        _ => return Err(bad("ideal family must be A, B, C or D")),
    };
    let ideal_rank = Expr::parse(&ideal[1..]).ok_or_else(|| bad("bad ideal rank"))?;
    let level = k.parse().map_err(|_| bad("bad level"))?;
    Ok(CasePattern {
        line,
        family,
        index,
        min_n,
        ideal_family,
        ideal_rank,
        ideal_count: count,
        level,
        rows: Vec::new(),
    })
}

impl DictionaryData {
    pub fn parse(text: &str, conventions: Conventions) -> Result<Self, DataError> {
        let mut cases: Vec<CasePattern> = Vec::new();
        for (line, l) in content_lines(text) {
            if l.starts_with("case") {
                cases.push(parse_case(l, line)?);
            } else {
                let row = parse_row(l, line)?;
                cases.last_mut().ok_or_else(|| DataError::new(line, "row before any case"))?.rows.push(row);
            }
        }
        Ok(DictionaryData { cases, conventions })
    }

    pub fn conventions(&self) -> &Conventions {
        &self.conventions
    }

    fn matching_case(&self, t: RootType) -> Option<(&CasePattern, i64)> {
        self.cases.iter().find_map(|c| {
            if c.family != t.family {
                return None;
            }
            let rank = t.rank as i64;
            let n = match c.index.terms.as_slice() {
                [] => (c.index.constant == rank).then_some(0)?,
                [(a, 'n')] => {
                    let d = rank - c.index.constant;
                    (d % a == 0 && d / a >= c.min_n.unwrap_or(1)).then_some(d / a)?
                }
                _ => return None,
            };
            Some((c, n))
        })
    }

    /// Instantiate the dictionary of `t` and run the load-time checks.
    pub fn dictionary(&self, t: RootType) -> Result<Dictionary, AffineError> {
        let (case, n) = self.matching_case(t).ok_or(AffineError::NoCase(t))?;
        let err = |line: usize, m: String| AffineError::Data(DataError::new(line, m));
        let mut env: HashMap<char, i64> = HashMap::new();
        env.insert('n', n);
        let rank =
            case.ideal_rank.eval(&env).ok_or_else(|| err(case.line, "ideal rank uses unknown variable".into()))?;
        let lie = LieType::new(case.ideal_family, rank as usize)
            .ok_or_else(|| err(case.line, format!("invalid ideal type {:?}{rank}", case.ideal_family)))?;
        let ideals: Vec<AffineIdeal> =
            (0..case.ideal_count).map(|slot| AffineIdeal { lie, level: case.level, host: 0, slot }).collect();
        if lie_data(t)? != ideals {
            return Err(err(case.line, format!("ideal data for {t} disagrees with the type/level table")));
        }
        let rsd = catalog(t);
        let mut rows: Vec<DictionaryRow> = Vec::new();
        for rp in &case.rows {
            for env in expand_env(&env, &rp.ranges, &rp.loops, rp.line)? {
                let label = match &rp.label {
                    LabelPattern::Zero => RowLabel::Zero,
                    LabelPattern::Twisted => RowLabel::Twisted,
                    LabelPattern::Fund(e) => {
                        let i = e.eval(&env).ok_or_else(|| err(rp.line, "label uses unknown variable".into()))?;
                        if i < 1 || i as usize > t.rank {
                            return Err(err(rp.line, format!("lambda_{i} out of range for {t}")));
                        }
                        RowLabel::Fundamental(i as usize)
                    }
                };
                let mut tuples = Vec::new();
                for alt in &rp.alts {
                    tuples.extend(self.expand_alt(alt, &label, &env, lie.rank, case.ideal_count, rp.line)?);
                }
                let glue = match label {
                    RowLabel::Zero => Some(0),
                    RowLabel::Fundamental(i) => Some(rsd.fundamental_class(i)),
                    RowLabel::Twisted => None,
                };
                match rows.iter_mut().find(|r| r.label == label) {
                    Some(r) => r.tuples.extend(tuples),
                    None => rows.push(DictionaryRow { label, glue, pm: rp.pm, tuples, line: rp.line }),
                }
            }
        }
        let dict = Dictionary::new(rsd, ideals, rows);
        dict.check()?;
        Ok(dict)
    }

    fn expand_alt(
        &self,
        alt: &AltPattern,
        label: &RowLabel,
        env: &HashMap<char, i64>,
        rank: usize,
        count: usize,
        line: usize,
    ) -> Result<Vec<WeightTuple>, AffineError> {
        let err = |m: String| AffineError::Data(DataError::new(line, m));
        let eval_tuple = |ws: &[WeightPattern]| -> Result<WeightTuple, AffineError> {
            ws.iter()
                .map(|w| {
                    let mut v = vec![0i64; rank];
                    for (coef, idx) in &w.0 {
                        let c = match coef {
                            Coef::Int(c) => *c,
                            Coef::Var(x) => *env.get(x).ok_or_else(|| err(format!("unknown variable {x}")))?,
                        };
                        let i = idx.eval(env).ok_or_else(|| err("weight index uses unknown variable".into()))?;
                        if i < 1 || i as usize > rank {
                            return Err(err(format!("Lambda_{i} out of range")));
                        }
                        v[i as usize - 1] += c;
                    }
                    Ok(v)
                })
                .collect()
        };
        let tuples = match alt {
            AltPattern::Tuple(ws) => vec![eval_tuple(ws)?],
            AltPattern::Sigma(ws) => {
                let base = eval_tuple(ws)?;
                let mut out: Vec<WeightTuple> = Vec::new();
                for p in permutations(base.len()) {
                    let t: WeightTuple = p.iter().map(|&i| base[i].clone()).collect();
                    if !out.contains(&t) {
                        out.push(t);
                    }
                }
                out
            }
            AltPattern::D4 => {
                let RowLabel::Fundamental(i) = label else {
                    return Err(err("@d4 needs a fundamental weight label".into()));
                };
                let bits = self.conventions.d4.get(i).ok_or_else(|| err(format!("no d4 convention for lambda_{i}")))?;
                let make = |on: bool| bits.iter().map(|&b| vec![if b == on { 1 } else { 0 }]).collect::<WeightTuple>();
                vec![make(true), make(false)]
            }
        };
        if let Some(t) = tuples.iter().find(|t| t.len() != count) {
            return Err(err(format!("tuple {t:?} has {} factors, expected {count}", t.len())));
        }
        Ok(tuples)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn expand_env(
    base: &HashMap<char, i64>,
    ranges: &[(char, Expr, Expr)],
    loops: &[(char, Vec<Expr>)],
    line: usize,
) -> Result<Vec<HashMap<char, i64>>, AffineError> {
    let err = || AffineError::Data(DataError::new(line, "loop bound uses unknown variable".to_string()));
    let mut envs = vec![base.clone()];
    for (v, a, b) in ranges {
        let (a, b) = (a.eval(base).ok_or_else(err)?, b.eval(base).ok_or_else(err)?);
        envs = envs
            .into_iter()
            .flat_map(|e| {
                (a..=b).map(move |x| {
                    let mut e = e.clone();
                    e.insert(*v, x);
                    e
                })
            })
            .collect();
    }
    for (v, members) in loops {
        let vals = members.iter().map(|m| m.eval(base).ok_or_else(err)).collect::<Result<Vec<_>, _>>()?;
        envs = envs
            .into_iter()
            .flat_map(|e| {
                vals.clone().into_iter().map(move |x| {
                    let mut e = e.clone();
                    e.insert(*v, x);
                    e
                })
            })
            .collect();
    }
    Ok(envs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowLabel {
    Zero,
    /// lambda_i of R (1-based); covers the classes of lambda_i and -lambda_i.
    Fundamental(usize),
    Twisted,
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Zero => write!(f, "(0)"),
            RowLabel::Fundamental(i) => write!(f, "(lambda_{i})"),
            RowLabel::Twisted => write!(f, "(chi)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryRow {
    pub label: RowLabel,
    /// Glue label of the class; `None` for twisted rows.
    pub glue: Option<u32>,
    pub pm: bool,
    pub tuples: Vec<WeightTuple>,
    pub line: usize,
}

/// Module dictionary of one root type.
#[derive(Clone, Debug)]
pub struct Dictionary {
    pub root_type: RootType,
    pub ideals: Vec<AffineIdeal>,
    pub rows: Vec<DictionaryRow>,
    algebras: Vec<LieAlgebra>,
    currents: Vec<SimpleCurrentGroup>,
    root_data: RootSystemData,
}

impl Dictionary {
    fn new(root_data: RootSystemData, ideals: Vec<AffineIdeal>, rows: Vec<DictionaryRow>) -> Self {
        let algebras = ideals.iter().map(|i| LieAlgebra::new(i.lie)).collect();
        let currents = ideals.iter().map(simple_current_group).collect();
        Dictionary { root_type: root_data.root_type, ideals, rows, algebras, currents, root_data }
    }

    pub fn root_data(&self) -> &RootSystemData {
        &self.root_data
    }

    pub fn currents(&self) -> &[SimpleCurrentGroup] {
        &self.currents
    }

    pub fn algebras(&self) -> &[LieAlgebra] {
        &self.algebras
    }

    /// Product of the simple-current groups of the ideals.
    pub fn current_group(&self) -> AbelianGroup {
        AbelianGroup::new(self.currents.iter().flat_map(|s| s.group.moduli().to_vec()).collect())
    }

    /// Simple-current element of a weight tuple, if every factor is a simple current.
    pub fn current_of(&self, t: &WeightTuple) -> Option<AbelianElement> {
        let mut coords = Vec::new();
        for (s, w) in self.currents.iter().zip(t) {
            coords.extend(s.element_of(w)?.0);
        }
        Some(AbelianElement(coords))
    }

    pub fn weight_of(&self, x: &AbelianElement) -> WeightTuple {
        let mut out = Vec::new();
        let mut off = 0;
        for s in &self.currents {
            let r = s.group.rank();
            out.push(s.weight(&AbelianElement(x.0[off..off + r].to_vec())).clone());
            off += r;
        }
        out
    }

    /// The untwisted row covering a glue label.
    pub fn untwisted_row(&self, glue: u32) -> Option<&DictionaryRow> {
        let g = &self.root_data.discriminant;
        let x = g.from_index(glue as u64);
        let neg = g.index_of(&g.neg(&x)) as u32;
        self.rows.iter().find(|r| r.glue == Some(glue) || (!r.pm && r.glue == Some(neg)))
    }

    pub fn twisted_row(&self) -> Option<&DictionaryRow> {
        self.rows.iter().find(|r| r.label == RowLabel::Twisted)
    }

    /// (s+, s-) of a 2-torsion glue label.
    pub fn pm_currents(&self, glue: u32) -> Option<(AbelianElement, AbelianElement)> {
        let row = self.untwisted_row(glue).filter(|r| r.pm)?;
        Some((self.current_of(&row.tuples[0])?, self.current_of(&row.tuples[1])?))
    }

    /// Simple current of the (0)- module.
    pub fn delta(&self) -> AbelianElement {
        self.pm_currents(0).expect("every dictionary has a (0)+- row").1
    }

    pub fn conformal_weight(&self, t: &WeightTuple) -> Rat {
        self.ideals
            .iter()
            .zip(&self.algebras)
            .zip(t)
            .map(|((i, a), w)| a.conformal_weight(i.level, w))
            .fold(Rat::zero(), |a, b| a + b)
    }

    /// Load-time firewall: admissibility, conformal weights against coset minima,
    /// the delta relation, fusion additivity and label coverage.
    pub fn check(&self) -> Result<(), AffineError> {
        let t = self.root_type;
        let fail = |row: &DictionaryRow, m: String| AffineError::Firewall {
            root: t,
            row: format!("{} (line {})", row.label, row.line),
            message: m,
        };
        let rsd = &self.root_data;
        let algs = &self.algebras;
        let rank_16 = frac(t.rank as i64, 16);
        let half = frac(1, 2);
        for row in &self.rows {
            for tup in &row.tuples {
                for ((w, i), alg) in tup.iter().zip(&self.ideals).zip(algs) {
                    if !alg.is_admissible(w, i.level) {
                        return Err(fail(row, format!("weight {w:?} is not admissible at level {}", i.level)));
                    }
                }
            }
            match row.glue {
                None => {
                    for tup in &row.tuples {
                        let h = self.conformal_weight(tup);
                        if !((&h - &rank_16) / &half).is_integer() {
                            return Err(fail(row, format!("twisted weight {h} is not rank/16 mod 1/2")));
                        }
                    }
                }
                Some(glue) => {
                    let expected_pm = glue == 0 || {
                        let g = &rsd.discriminant;
                        g.order_of(&g.from_index(glue as u64)) <= 2
                    };
                    if row.pm != expected_pm {
                        return Err(fail(row, format!("label class {glue} has the wrong +- type")));
                    }
                    let expected_len = if row.pm { 2 } else { 1 };
                    if row.tuples.len() != expected_len {
                        return Err(fail(row, format!("expected {expected_len} modules, found {}", row.tuples.len())));
                    }
                    let m = rsd.min_coset_norm(&rsd.class_reps[glue as usize]) / rat(2);
                    for (k, tup) in row.tuples.iter().enumerate() {
                        let h = self.conformal_weight(tup);
                        let want = if glue == 0 && k == 1 { Rat::one() } else { m.clone() };
                        if h != want {
                            return Err(fail(row, format!("conformal weight {h}, lowest coset weight {want}")));
                        }
                    }
                    if row.pm {
                        let (Some(p), Some(mi)) = (self.current_of(&row.tuples[0]), self.current_of(&row.tuples[1]))
                        else {
                            return Err(fail(row, "+- modules must be simple currents".into()));
                        };
                        let g = self.current_group();
                        if glue != 0 && g.add(&p, &self.delta()) != mi {
                            return Err(fail(row, "s- != s+ + delta".into()));
                        }
                    }
                }
            }
        }
        for glue in 0..rsd.label_count() {
            if self.untwisted_row(glue).is_none() {
                return Err(AffineError::Firewall {
                    root: t,
                    row: format!("class {glue}"),
                    message: "no row covers this class".into(),
                });
            }
        }
        if self.twisted_row().is_none() {
            return Err(AffineError::Firewall { root: t, row: "(chi)".into(), message: "missing twisted row".into() });
        }
        // fusion of simple currents follows addition of labels
        let g = self.current_group();
        let disc = &rsd.discriminant;
        let pm_rows: Vec<&DictionaryRow> = self.rows.iter().filter(|r| r.pm && r.glue.is_some()).collect();
        for a in &pm_rows {
            for b in &pm_rows {
                let (ga, gb) = (a.glue.unwrap(), b.glue.unwrap());
                let sum = disc.index_of(&disc.add(&disc.from_index(ga as u64), &disc.from_index(gb as u64))) as u32;
                let (pa, _) = self.pm_currents(ga).unwrap();
                let (pb, _) = self.pm_currents(gb).unwrap();
                let (ps, ms) = self.pm_currents(sum).ok_or_else(|| fail(a, format!("no +- row for class {sum}")))?;
                let s = g.add(&pa, &pb);
                if s != ps && s != ms {
                    return Err(fail(a, format!("fusion with {} leaves the row of class {sum}", b.label)));
                }
            }
        }
        Ok(())
    }
}

/// Parse the shipped dictionary and conventions.
pub fn default_dictionary_data() -> Result<DictionaryData, DataError> {
    DictionaryData::parse(crate::data::DICTIONARY_DATA, Conventions::parse(crate::data::CONVENTIONS_DATA)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal(f: LieFamily, n: usize, k: u32) -> AffineIdeal {
        AffineIdeal { lie: LieType::new(f, n).unwrap(), level: k, host: 0, slot: 0 }
    }

    #[test]
    fn expressions() {
        let e = Expr::parse("2n-1").unwrap();
        let env: HashMap<char, i64> = [('n', 4)].into();
        assert_eq!(e.eval(&env), Some(7));
        assert_eq!(Expr::parse("n").unwrap().eval(&env), Some(4));
        assert_eq!(Expr::parse("12").unwrap().eval(&env), Some(12));
        assert!(Expr::parse("").is_none());
    }

    #[test]
    fn table_levels() {
        let a2 = lie_data(RootType::a(2)).unwrap();
        assert_eq!((a2.len(), a2[0].lie.to_string(), a2[0].level), (1, "A1".into(), 4));
        let a24 = lie_data(RootType::a(24)).unwrap();
        assert_eq!(a24[0].to_string(), "B12,2");
        let d6 = lie_data(RootType::d(6)).unwrap();
        assert_eq!(d6.iter().map(|i| i.to_string()).collect::<Vec<_>>(), ["A3,1", "A3,1"]);
        assert_eq!(lie_data(RootType::a(1)), Err(AffineError::ExcludedA1));
    }

    #[test]
    fn conformal_weights() {
        let a1 = ideal(LieFamily::A, 1, 4);
        assert_eq!(conformal_weight(&a1, &[0]).unwrap(), rat(0));
        assert_eq!(conformal_weight(&a1, &[1]).unwrap(), frac(1, 8));
        assert_eq!(conformal_weight(&a1, &[2]).unwrap(), frac(1, 3));
        assert!(conformal_weight(&a1, &[5]).is_err());
        // B_n level 1 spinor: (2n+1)/16
        let b4 = ideal(LieFamily::B, 4, 1);
        assert_eq!(conformal_weight(&b4, &[0, 0, 0, 1]).unwrap(), frac(9, 16));
        // C4 level 1, Lambda_4 closes the (0)- row at weight 1
        let c4 = ideal(LieFamily::C, 4, 1);
        assert_eq!(conformal_weight(&c4, &[0, 0, 0, 1]).unwrap(), rat(1));
    }

    #[test]
    fn pairings() {
        let a1 = ideal(LieFamily::A, 1, 1);
        assert_eq!(coweight_pairing(&a1, 1, &[1]), frac(1, 2));
        let a7 = ideal(LieFamily::A, 7, 1);
        assert_eq!(coweight_pairing(&a7, 1, &[0, 1, 0, 0, 0, 0, 0]), frac(3, 4));
        assert_eq!(coweight_pairing(&a7, 3, &[0; 7]), rat(0));
    }

    #[test]
    fn simple_currents() {
        let a7 = simple_current_group(&ideal(LieFamily::A, 7, 1));
        assert_eq!(a7.group.moduli(), &[8]);
        assert_eq!(a7.weight(&AbelianElement(vec![2])), &vec![0, 1, 0, 0, 0, 0, 0]);
        let d9 = simple_current_group(&ideal(LieFamily::D, 9, 2));
        let mut two_l1 = vec![0; 9];
        two_l1[0] = 2;
        assert_eq!(d9.weight(&AbelianElement(vec![2])), &two_l1);
        let c4 = simple_current_group(&ideal(LieFamily::C, 4, 1));
        assert_eq!(c4.weight(&AbelianElement(vec![1])), &vec![0, 0, 0, 1]);
    }

    #[test]
    fn gamma_actions() {
        let d4 = ideal(LieFamily::D, 4, 2);
        let s = simple_current_group(&d4);
        let gens = s.gamma_action(d4.lie);
        assert_eq!(crate::rootdata::close_permutations(4, &gens).len(), 6);
        let d5 = ideal(LieFamily::D, 5, 2);
        assert_eq!(simple_current_group(&d5).gamma_action(d5.lie), vec![vec![0, 3, 2, 1]]);
        let b3 = ideal(LieFamily::B, 3, 1);
        assert!(simple_current_group(&b3).gamma_action(b3.lie).is_empty());
    }
}
