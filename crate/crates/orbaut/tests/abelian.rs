use proptest::prelude::*;

use orbaut::abelian::{char_group_structure, structure_name, AbelianElement, AbelianGroup};
use orbaut::lattice::frac;

fn group_and_gens() -> impl Strategy<Value = (Vec<u32>, Vec<Vec<u32>>)> {
    prop::collection::vec(2u32..=12, 1..=3).prop_flat_map(|moduli| {
        let elem = moduli.iter().map(|&m| 0..m).collect::<Vec<_>>();
        (Just(moduli), prop::collection::vec(elem, 0..=4))
    })
}

proptest! {
    #[test]
    fn span_is_a_subgroup_with_matching_factors((moduli, gens) in group_and_gens()) {
        let g = AbelianGroup::new(moduli);
        let gens: Vec<AbelianElement> = gens.into_iter().map(AbelianElement).collect();
        let s = g.span(&gens).unwrap();
        for x in s.elements() {
            prop_assert!(s.contains(&g.neg(x)));
            for y in gens.iter() {
                prop_assert!(s.contains(&g.add(x, y)));
            }
        }
        let f = s.invariant_factors();
        prop_assert_eq!(f.iter().product::<u64>() as usize, s.order());
        prop_assert!(f.windows(2).all(|w| w[1] % w[0] == 0));
        prop_assert_eq!(g.order() % s.order() as u128, 0);
        // 2-torsion count is 2^(number of even factors)
        let two_torsion = s.elements().iter().filter(|x| g.scale(2, x) == g.zero()).count();
        prop_assert_eq!(two_torsion, 1 << f.iter().filter(|d| *d % 2 == 0).count());
        let exponent = f.last().copied().unwrap_or(1);
        prop_assert!(s.elements().iter().all(|x| exponent % g.order_of(x) == 0));
    }

    #[test]
    fn character_rows_match_cyclic_span(n in 2i64..=12, rows in prop::collection::vec(prop::collection::vec(0i64..12, 3), 1..=4)) {
        let rats: Vec<Vec<_>> = rows.iter().map(|r| r.iter().map(|&a| frac(a, n)).collect()).collect();
        let g = AbelianGroup::new(vec![n as u32; 3]);
        let gens: Vec<AbelianElement> =
            rows.iter().map(|r| AbelianElement(r.iter().map(|&a| (a % n) as u32).collect())).collect();
        let s = g.span(&gens).unwrap();
        prop_assert_eq!(char_group_structure(&rats), s.invariant_factors().to_vec());
    }
}

#[test]
fn structure_names() {
    assert_eq!(structure_name(&[]), "1");
    assert_eq!(structure_name(&[2, 2, 2, 4]), "Z4 x Z2^3");
    assert_eq!(structure_name(&[4, 4]), "Z4^2");
    assert_eq!(structure_name(&[8]), "Z8");
}
