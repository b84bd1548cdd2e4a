use std::collections::HashSet;

use orbaut::codeaut::binary::{equivalence, reed_muller, weight_enumerator};
use orbaut::codeaut::{PermGroup, DEFAULT_BUDGET};
use orbaut::data::DataSet;
use orbaut::niemeier::g2_group;
use orbaut::orbifold::reference::{parse_table1, LabelTerm};
use orbaut::orbifold::{compute_report, conditions, Context, Orbifold, OrbifoldError, SIMPLE_CASES};

const TABLE1_ORDER: [&str; 14] = [
    "A2^12", "A3^8", "A4^6", "A5^4D4", "A6^4", "A7^2D5^2", "A8^3", "A9^2D6", "E6^4", "A11D7E6", "A12^2", "A15D9",
    "A17E7", "A24",
];

const GLUE_CASES: [&str; 7] = ["A3^8", "A5^4D4", "A7^2D5^2", "A9^2D6", "A11D7E6", "A15D9", "A17E7"];

fn ctx() -> Context {
    Context::load(&DataSet::default()).unwrap()
}

fn orb(ctx: &Context, name: &str) -> Orbifold {
    ctx.orbifold(name).unwrap()
}

#[test]
fn conditions_and_extra_automorphism() {
    let ctx = ctx();
    for name in TABLE1_ORDER {
        let c = conditions(&orb(&ctx, name).lattice);
        assert!(c.cond_i && c.cond_ii, "{name}");
        let extra = name == "A3^8" || name == "A7^2D5^2";
        assert_eq!(c.extra_automorphism, extra, "{name}");
        assert_eq!(c.cond_iii, !extra, "{name}");
    }
}

#[test]
fn excluded_lattices() {
    let ctx = ctx();
    for name in ["Leech", "D4^6", "A1^24", "E8^3"] {
        let err = ctx.orbifold(name).unwrap_err();
        assert!(matches!(err, OrbifoldError::NotApplicable(_)), "{name}");
        assert!(err.to_string().ends_with("orbifold isomorphic to a lattice VOA or moonshine"));
    }
    assert!(matches!(ctx.orbifold("A99").unwrap_err(), OrbifoldError::UnknownLattice(_)));
}

#[test]
fn v1_types() {
    let ctx = ctx();
    for (name, v1, rank) in [
        ("A4^6", "B2,2^6", 12),
        ("A5^4D4", "A3,2^4A1,1^4", 16),
        ("A11D7E6", "D6,2B3,1^2C4,1", 16),
        ("A17E7", "D9,2A7,1", 16),
        ("A24", "B12,2", 12),
    ] {
        let o = orb(&ctx, name);
        assert_eq!(o.v1_name(), v1);
        assert_eq!(o.rank(), rank);
    }
}

#[test]
fn glue_image_orders_and_listed_generators() {
    let ctx = ctx();
    for name in TABLE1_ORDER {
        let o = orb(&ctx, name);
        let img = o.glue_image().unwrap();
        let t = o.lattice.components().len() as u32;
        assert_eq!(img.order() as u128, img.n0.len() as u128 * 2u128.pow(t - 1), "{name}");
        // kernel of the projection to N0/Q is the even delta span
        let deltas: HashSet<Vec<u32>> =
            img.words.iter().filter(|w| is_delta_combination(&img.deltas, w)).cloned().collect();
        assert_eq!(deltas.len(), 1 << (t - 1), "{name}");
        for (w, line) in ctx.cases.get(name).map(|c| c.generators.clone()).unwrap_or_default() {
            assert!(img.contains(&w), "{name}: generator on line {line}");
        }
    }
    assert_eq!(orb(&ctx, "A17E7").glue_image().unwrap().words, vec![vec![0, 0], vec![1, 2], vec![2, 4], vec![3, 6]]);
    assert_eq!(orb(&ctx, "A3^8").glue_image().unwrap().order(), 2048);
}

fn is_delta_combination(deltas: &[Vec<u32>], w: &[u32]) -> bool {
    (0u32..1 << deltas.len()).filter(|m| m.count_ones() % 2 == 0).any(|m| {
        let mut x = vec![0u32; w.len()];
        for (k, d) in deltas.iter().enumerate() {
            if m >> k & 1 == 1 {
                for (a, b) in x.iter_mut().zip(d) {
                    *a = if *a == 0 {
                        *b
                    } else if *b == 0 {
                        *a
                    } else {
                        u32::MAX
                    };
                }
            }
        }
        x == w
    })
}

#[test]
fn a3_8_is_reed_muller() {
    let ctx = ctx();
    let img = orb(&ctx, "A3^8").glue_image().unwrap();
    let words = img.binary_words().unwrap();
    let rm = reed_muller(2, 4);
    assert_eq!(weight_enumerator(&words, 16), weight_enumerator(&rm, 16));
    let p = equivalence(&words, &rm, 16).expect("equivalent to RM(2,4)");
    let rm_set: HashSet<u64> = rm.iter().copied().collect();
    for w in &words {
        let image = (0..16).filter(|i| w >> i & 1 == 1).fold(0u64, |m, i| m | 1 << p.0[i]);
        assert!(rm_set.contains(&image));
    }
}

#[test]
fn aut_cn_orders() {
    let ctx = ctx();
    for (name, aut1, aut2) in [
        ("A3^8", 1, 322560),
        ("A5^4D4", 2, 96),
        ("A7^2D5^2", 1, 48),
        ("A9^2D6", 2, 4),
        ("A11D7E6", 1, 2),
        ("A15D9", 1, 2),
        ("A17E7", 2, 1),
    ] {
        let o = orb(&ctx, name);
        let a = o.aut_cn(&o.glue_image().unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!((a.aut1_order, a.aut2_order), (aut1, aut2), "{name}");
        assert_eq!(a.order, aut1 * aut2);
    }
}

#[test]
fn simple_cases_contain_g2_image() {
    let ctx = ctx();
    for name in SIMPLE_CASES {
        let o = orb(&ctx, name);
        let img = o.glue_image().unwrap();
        assert_eq!(img.n0.len(), 1, "{name}");
        let a = o.aut_cn(&img, DEFAULT_BUDGET).unwrap();
        let g2 = g2_group(&o.lattice, DEFAULT_BUDGET).unwrap();
        let aut2 = a.aut2.as_ref().unwrap();
        assert!(g2.generators.iter().all(|g| aut2.contains(g)), "{name}");
        let set = img.word_set();
        assert!(o.g2_lifts(&img, DEFAULT_BUDGET).unwrap().iter().all(|l| l.stabilizes(&set)));
        let out = o.out_groups(DEFAULT_BUDGET).unwrap();
        assert_eq!(out.out1.name, "1");
        assert_eq!(out.out2.order, g2.order);
    }
}

#[test]
fn out_groups_dispatch() {
    let ctx = ctx();
    for (name, out1, out2) in
        [("E6^4", "1", "Sym4"), ("A9^2D6", "Z2", "Sym2xSym2"), ("A24", "1", "1"), ("A17E7", "Z2", "1")]
    {
        let out = orb(&ctx, name).out_groups(DEFAULT_BUDGET).unwrap();
        assert_eq!((out.out1.name.as_str(), out.out2.name.as_str()), (out1, out2), "{name}");
    }
}

#[test]
fn inventory_examples() {
    let ctx = ctx();
    let o = orb(&ctx, "A2^12");
    let inv = o.weight_inventory().unwrap();
    let zero = inv.untwisted.iter().find(|m| inv.weights(m).iter().all(|w| w == &vec![0])).is_some();
    assert!(zero);
    // zero coset: [0] and [4L1] with an even number of the latter
    let zero_coset: Vec<_> = inv
        .untwisted
        .iter()
        .map(|m| inv.weights(m))
        .filter(|ws| ws.iter().all(|w| w == &vec![0] || w == &vec![4]))
        .collect();
    assert_eq!(zero_coset.len(), 1 << 11);
    assert!(zero_coset.iter().all(|ws| ws.iter().filter(|w| **w == vec![4]).count() % 2 == 0));
    for m in &inv.twisted {
        let ws = inv.weights(m);
        assert!(ws.iter().all(|w| w == &vec![1] || w == &vec![3]));
        // h([L1]) = 1/8 and h([3L1]) = 5/8 at level 4
        let eighths: usize = ws.iter().map(|w| if w[0] == 1 { 1 } else { 5 }).sum();
        assert_eq!(eighths % 8, 0);
    }
}

#[test]
fn kv_orders_and_cross_check() {
    let ctx = ctx();
    let expected: [(&str, &[u64]); 14] = [
        ("A2^12", &[2]),
        ("A3^8", &[2, 2, 2, 2, 2]),
        ("A4^6", &[2]),
        ("A5^4D4", &[2, 2, 2, 4]),
        ("A6^4", &[2]),
        ("A7^2D5^2", &[2, 2, 2]),
        ("A8^3", &[2]),
        ("A9^2D6", &[4, 4]),
        ("E6^4", &[2]),
        ("A11D7E6", &[2, 2]),
        ("A12^2", &[2]),
        ("A15D9", &[2, 2]),
        ("A17E7", &[8]),
        ("A24", &[2]),
    ];
    for (name, factors) in expected {
        let o = orb(&ctx, name);
        let kv = o.compute_kv(&ctx.kv[name], &o.weight_inventory().unwrap()).unwrap();
        assert_eq!(kv.factors, factors, "{name}");
        assert_eq!(kv.order, kv.expected_order, "{name}");
        assert!(kv.z_row_ok && kv.rows_nontrivial, "{name}");
    }
}

#[test]
fn fu_witness_actions() {
    let ctx = ctx();
    let o = orb(&ctx, "A9^2D6");
    let img = o.glue_image().unwrap();
    let u = o
        .glue_labels(&[
            LabelTerm::Multiple { coef: 1, index: 5 },
            LabelTerm::Multiple { coef: 1, index: 5 },
            LabelTerm::Multiple { coef: 1, index: 1 },
        ])
        .unwrap();
    let f = o.fu_witness(&u).unwrap();
    assert!(img.words.iter().all(|w| f.apply(w) == o.negate(w)));
    let id = o.fu_witness(&[0, 0, 0]).unwrap();
    assert!(img.words.iter().all(|w| id.apply(w) == *w));

    let o = orb(&ctx, "A15D9");
    let u =
        o.glue_labels(&[LabelTerm::Multiple { coef: 1, index: 2 }, LabelTerm::Multiple { coef: 1, index: 8 }]).unwrap();
    assert_eq!(o.fu_witness(&u).unwrap().perm, vec![0, 2, 1]);
    assert!(o.fu_witness(&[1, 0]).is_err());
}

#[test]
fn witnesses_generate_aut_cn() {
    let ctx = ctx();
    for name in GLUE_CASES {
        let o = orb(&ctx, name);
        let img = o.glue_image().unwrap();
        let aut = o.aut_cn(&img, DEFAULT_BUDGET).unwrap();
        let rep = o.check_witnesses(ctx.cases.get(name), &img, &aut, DEFAULT_BUDGET).unwrap();
        assert!(rep.all_satisfied(), "{name}");
        let allowed = usize::from(name == "A3^8" || name == "A7^2D5^2");
        assert_eq!(rep.extra_generators, allowed, "{name}");
        assert_eq!(rep.full_order, aut.order);
    }
}

#[test]
fn table1_rows_match_reference() {
    let ctx = ctx();
    for name in TABLE1_ORDER {
        let r = compute_report(&ctx, name, DEFAULT_BUDGET).unwrap();
        let golden = ctx.golden_row(name).unwrap();
        assert_eq!(r.row.compare(golden), vec![], "{name}");
        assert_eq!(r.row.number, Some(golden.number));
    }
}

#[test]
fn validation_lists_every_mismatch() {
    let ctx = ctx();
    let r = compute_report(&ctx, "A17E7", DEFAULT_BUDGET).unwrap();
    let bad = parse_table1("A17E7 | D9,2A7,1 | 12 | Z4 | 1 | 1 | 50\n").unwrap();
    let fields: Vec<String> = r.row.compare(&bad[0]).into_iter().map(|m| m.field).collect();
    assert_eq!(fields, ["rank", "K(V)", "Out1"]);
}

#[test]
fn report_json_is_stable() {
    let ctx = ctx();
    let mut r = compute_report(&ctx, "A15D9", DEFAULT_BUDGET).unwrap();
    r.timings_ms.clear();
    let a = serde_json::to_string(&r).unwrap();
    let back: orbaut::orbifold::LatticeReport = serde_json::from_str(&a).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), a);
    let mut again = compute_report(&ctx, "A15D9", DEFAULT_BUDGET).unwrap();
    again.timings_ms.clear();
    assert_eq!(serde_json::to_string(&again).unwrap(), a);
}

#[test]
fn klein_witnesses_generate_four_group() {
    let ctx = ctx();
    let o = orb(&ctx, "A5^4D4");
    let perms: Vec<_> = ctx.cases["A5^4D4"]
        .witnesses
        .iter()
        .skip(1)
        .map(|w| o.fu_witness(&o.glue_labels(&w.u).unwrap()).unwrap().slot_perm())
        .collect();
    let g = PermGroup::new(8, perms);
    assert_eq!(g.order(), 4);
    assert!(g.is_abelian());
}
