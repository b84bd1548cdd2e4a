//! Parsers for the reference data: K(V) generator vectors, glue-image
//! generators with f_u witnesses, and the golden summary table.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelian::parse_klein_label;
use crate::data::{content_lines, DataError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KvRole {
    Z,
    Hom,
    Bar,
}

/// A coweight vector: per ideal, a list of (coefficient, fundamental index).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KvVector {
    pub role: KvRole,
    pub terms: Vec<Vec<(i64, usize)>>,
    pub line: usize,
}

impl fmt::Display for KvVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                if t.is_empty() {
                    return "0".to_string();
                }
                let ts: Vec<String> =
                    t.iter().map(|(c, i)| if *c == 1 { format!("L{i}") } else { format!("{c}L{i}") }).collect();
                ts.join("+")
            })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

fn parse_weight_terms(s: &str, line: usize) -> Result<Vec<(i64, usize)>, DataError> {
    if s == "0" {
        return Ok(Vec::new());
    }
    s.split('+')
        .map(|t| {
            let bad = || DataError::new(line, format!("bad weight {s:?}"));
            let (c, i) = t.split_once('L').ok_or_else(bad)?;
            let c = if c.is_empty() { 1 } else { c.parse().map_err(|_| bad())? };
            let i: usize = i.parse().map_err(|_| bad())?;
            if i == 0 {
                return Err(bad());
            }
            Ok((c, i))
        })
        .collect()
}

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, Vec<KvVector>>, DataError> {
    let mut out: BTreeMap<String, Vec<KvVector>> = BTreeMap::new();
    for (line, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [name, role, ws @ ..] = toks.as_slice() else {
            return Err(DataError::new(line, "expected '<lattice> <role> <weights>'"));
        };
        let role = match *role {
            "z" => KvRole::Z,
            "hom" => KvRole::Hom,
            "bar" => KvRole::Bar,
            r => return Err(DataError::new(line, format!("unknown role {r:?}"))),
        };
        let mut terms = Vec::new();
        for w in ws {
            let (w, rep) = match w.split_once('^') {
                Some((w, r)) => (w, r.parse().map_err(|_| DataError::new(line, format!("bad repeat in {w:?}")))?),
                None => (*w, 1),
            };
            let t = parse_weight_terms(w, line)?;
            terms.extend(std::iter::repeat_n(t, rep));
        }
        if terms.is_empty() {
            return Err(DataError::new(line, "no weights"));
        }
        out.entry(name.to_string()).or_default().push(KvVector { role, terms, line });
    }
    Ok(out)
}

/// One entry of a glue element: 0 or coef * lambda_index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelTerm {
    Zero,
    Multiple { coef: i64, index: usize },
}

impl fmt::Display for LabelTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelTerm::Zero => write!(f, "0"),
            LabelTerm::Multiple { coef: 1, index } => write!(f, "l{index}"),
            LabelTerm::Multiple { coef: -1, index } => write!(f, "-l{index}"),
            LabelTerm::Multiple { coef, index } => write!(f, "{coef}l{index}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Aut1,
    /// 1-based ideal positions.
    Swap(usize, usize),
    Klein([usize; 4]),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Aut1 => write!(f, "aut1"),
            Expectation::Swap(a, b) => write!(f, "swap {a} {b}"),
            Expectation::Klein([a, b, c, d]) => write!(f, "klein {a} {b} {c} {d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub u: Vec<LabelTerm>,
    pub expect: Expectation,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseData {
    /// Elements of S_N, one label per ideal, with their source lines.
    pub generators: Vec<(Vec<u32>, usize)>,
    pub witnesses: Vec<WitnessSpec>,
}

fn parse_term(s: &str, line: usize) -> Result<LabelTerm, DataError> {
    if s == "0" {
        return Ok(LabelTerm::Zero);
    }
    let bad = || DataError::new(line, format!("bad glue entry {s:?}"));
    let (c, i) = s.split_once('l').ok_or_else(bad)?;
    let coef = match c {
        "" => 1,
        "-" => -1,
        c => c.parse().map_err(|_| bad())?,
    };
    let index: usize = i.parse().map_err(|_| bad())?;
    if index == 0 {
        return Err(bad());
    }
    Ok(LabelTerm::Multiple { coef, index })
}

fn parse_expectation(s: &str, line: usize) -> Result<Expectation, DataError> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    let num = |t: &str| {
        t.parse::<usize>().ok().filter(|&x| x >= 1).ok_or_else(|| DataError::new(line, format!("bad position {t:?}")))
    };
    match toks.as_slice() {
        ["aut1"] => Ok(Expectation::Aut1),
        ["swap", a, b] => Ok(Expectation::Swap(num(a)?, num(b)?)),
        ["klein", a, b, c, d] => Ok(Expectation::Klein([num(a)?, num(b)?, num(c)?, num(d)?])),
        _ => Err(DataError::new(line, format!("unknown expectation {s:?}"))),
    }
}

pub fn parse_cases(text: &str) -> Result<BTreeMap<String, CaseData>, DataError> {
    let mut out: BTreeMap<String, CaseData> = BTreeMap::new();
    for (line, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["gen", name, entries @ ..] if !entries.is_empty() => {
                let word = entries
                    .iter()
                    .map(|e| {
                        parse_klein_label(e)
                            .or_else(|| e.parse().ok())
                            .ok_or_else(|| DataError::new(line, format!("bad current label {e:?}")))
                    })
                    .collect::<Result<Vec<u32>, _>>()?;
                out.entry(name.to_string()).or_default().generators.push((word, line));
            }
            ["witness", name, ..] => {
                let rest = l.trim_start_matches("witness").trim_start().trim_start_matches(name);
                let (u, expect) = rest.split_once(':').ok_or_else(|| DataError::new(line, "expected ':'"))?;
                let u = u.split_whitespace().map(|t| parse_term(t, line)).collect::<Result<Vec<_>, _>>()?;
                let expect = parse_expectation(expect, line)?;
                out.entry(name.to_string()).or_default().witnesses.push(WitnessSpec { u, expect, line });
            }
            _ => return Err(DataError::new(line, format!("unrecognized line {l:?}"))),
        }
    }
    Ok(out)
}

/// A row of the golden summary table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub lattice: String,
    pub v1: String,
    pub rank: usize,
    pub kv: String,
    pub out1: String,
    pub out2: String,
    pub number: u32,
    pub line: usize,
}

pub fn parse_table1(text: &str) -> Result<Vec<GoldenRow>, DataError> {
    content_lines(text)
        .map(|(line, l)| {
            let f: Vec<&str> = l.split('|').map(str::trim).collect();
            let [lattice, v1, rank, kv, out1, out2, number] = f.as_slice() else {
                return Err(DataError::new(line, "expected 7 '|'-separated fields"));
            };
            Ok(GoldenRow {
                lattice: lattice.to_string(),
                v1: v1.to_string(),
                rank: rank.parse().map_err(|_| DataError::new(line, "bad rank"))?,
                kv: kv.to_string(),
                out1: out1.to_string(),
                out2: out2.to_string(),
                number: number.parse().map_err(|_| DataError::new(line, "bad row number"))?,
                line,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_repeats() {
        let kv = parse_kv("X z L1 0^3 2L3+L1^2\n").unwrap();
        let v = &kv["X"][0];
        assert_eq!(v.terms.len(), 6);
        assert_eq!(v.terms[4], vec![(2, 3), (1, 1)]);
        assert_eq!(v.to_string(), "(L1,0,0,0,2L3+L1,2L3+L1)");
        assert!(parse_kv("X q L1\n").is_err());
    }

    #[test]
    fn cases_lines() {
        let c = parse_cases("gen X 1 w 1+w 3\nwitness X 2l1 -l3 0 : swap 1 2\n").unwrap();
        assert_eq!(c["X"].generators[0].0, vec![1, 2, 3, 3]);
        let w = &c["X"].witnesses[0];
        assert_eq!(w.u[1], LabelTerm::Multiple { coef: -1, index: 3 });
        assert_eq!(w.expect, Expectation::Swap(1, 2));
        assert_eq!(parse_cases("witness X l1 : swap 0 1\n").unwrap_err().line, 1);
    }

    #[test]
    fn shipped_reference_parses() {
        assert_eq!(parse_table1(crate::data::TABLE1_DATA).unwrap().len(), 14);
        assert_eq!(parse_kv(crate::data::KV_DATA).unwrap().len(), 14);
        assert_eq!(parse_cases(crate::data::CASES_DATA).unwrap().len(), 6);
    }
}
