use std::time::Instant;

use orbaut::codeaut::DEFAULT_BUDGET;
use orbaut::groupid::Confidence;
use orbaut::niemeier::{
    build, g2_group, index_2qstar, minus_one_outside_weyl, n0_quotient, parse_glue_data, GLUE_DATA,
};

const G2_TABLE: [(&str, u128, &str); 14] = [
    ("A2^12", 95040, "M12"),
    ("A3^8", 1344, "Z2^3:L3(2)"),
    ("A4^6", 120, "Sym5"),
    ("A5^4D4", 24, "Sym4"),
    ("A6^4", 12, "Alt4"),
    ("A7^2D5^2", 4, "Sym2xSym2"),
    ("A8^3", 6, "Sym3"),
    ("A9^2D6", 2, "Sym2"),
    ("E6^4", 24, "Sym4"),
    ("A11D7E6", 1, "1"),
    ("A12^2", 2, "Sym2"),
    ("A15D9", 1, "1"),
    ("A17E7", 1, "1"),
    ("A24", 1, "1"),
];

fn lattice(name: &str) -> orbaut::niemeier::NiemeierLattice {
    let code = parse_glue_data(GLUE_DATA).unwrap().into_iter().find(|c| c.name == name).unwrap();
    build(&code).unwrap()
}

#[test]
fn g2_orders() {
    for (name, order, group) in G2_TABLE {
        let n = lattice(name);
        let t = Instant::now();
        let g2 = g2_group(&n, DEFAULT_BUDGET).unwrap();
        println!("{name}: {} ({}) in {:?}", g2.order, g2.name, t.elapsed());
        assert_eq!(g2.order, order, "{name}");
        assert_eq!(g2.name.name, group, "{name}");
        assert_eq!(g2.name.confidence, Confidence::Exact);
    }
}

#[test]
fn minus_one_flags_exactly_fourteen() {
    let codes = parse_glue_data(GLUE_DATA).unwrap();
    let flagged: Vec<String> =
        codes.iter().map(|c| build(c).unwrap()).filter(minus_one_outside_weyl).map(|n| n.name().to_string()).collect();
    let mut expected: Vec<String> = G2_TABLE.iter().map(|(n, _, _)| n.to_string()).collect();
    let mut got = flagged.clone();
    expected.sort();
    got.sort();
    assert_eq!(got, expected);
}

#[test]
fn lattice_indices() {
    assert_eq!(index_2qstar(&lattice("A2^12")).unwrap(), 1);
    assert_eq!(index_2qstar(&lattice("A3^8")).unwrap(), 16);
    assert_eq!(index_2qstar(&lattice("A17E7")).unwrap(), 2);
    assert_eq!(n0_quotient(&lattice("A17E7")).unwrap().0.order(), 2);
    assert_eq!(n0_quotient(&lattice("A2^12")).unwrap().0.order(), 1);
    assert_eq!(n0_quotient(&lattice("A3^8")).unwrap().0.order(), 16);
}
