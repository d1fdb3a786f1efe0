//! Property checks for the algebra that everything else leans on: the
//! symplectic product rule against dense matrices, the syndrome
//! homomorphism, and the basis indexing.

use asc_core::codes;
use asc_core::pauli::PauliOperator;
use proptest::prelude::*;

/// A Pauli with arbitrary bits and phase on a fixed qubit count.
fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    let mask = (1u16 << n) - 1;
    (0..=mask, 0..=mask, 0u8..4).prop_map(move |(x, z, phase)| {
        PauliOperator::new(n, x as u8, z as u8, phase).unwrap()
    })
}

proptest! {
    #[test]
    fn product_matches_dense_matrices(
        (a, b) in (1usize..=3).prop_flat_map(|n| (pauli(n), pauli(n)))
    ) {
        let product = a.multiply(&b).unwrap();
        let dense = a.to_matrix() * b.to_matrix();
        prop_assert!((product.to_matrix() - dense).camax() < 1e-12);
    }

    #[test]
    fn products_commute_up_to_the_recorded_sign(
        (a, b) in (1usize..=3).prop_flat_map(|n| (pauli(n), pauli(n)))
    ) {
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        prop_assert_eq!(ab.x_bits(), ba.x_bits());
        prop_assert_eq!(ab.z_bits(), ba.z_bits());
        let twist = (ab.phase_exp() + 4 - ba.phase_exp()) % 4;
        if a.commutes(&b).unwrap() {
            prop_assert_eq!(twist, 0);
        } else {
            prop_assert_eq!(twist, 2);
        }
    }

    #[test]
    fn syndromes_are_a_homomorphism(
        (a, b) in (pauli(3), pauli(3))
    ) {
        let code = codes::get("q3").unwrap();
        let code = code.code();
        let sa = code.syndrome_of(&a).unwrap();
        let sb = code.syndrome_of(&b).unwrap();
        let sab = code.syndrome_of(&a.multiply(&b).unwrap()).unwrap();
        prop_assert_eq!(sab, sa.product(&sb).unwrap());
    }

    #[test]
    fn basis_index_round_trips(a in (1usize..=4).prop_flat_map(pauli)) {
        let rep = a.phase0();
        let round = PauliOperator::from_basis_index(rep.n(), rep.basis_index()).unwrap();
        prop_assert_eq!(round, rep);
    }

    #[test]
    fn basis_index_is_lexicographic(n in 1usize..=3) {
        let mut strings: Vec<String> =
            PauliOperator::all_phase0(n).map(|p| p.to_string()).collect();
        let sorted = {
            let mut s = strings.clone();
            s.sort();
            s
        };
        // I < X < Y < Z letterwise matches plain string order.
        prop_assert_eq!(&strings, &sorted);
        strings.dedup();
        prop_assert_eq!(strings.len(), 1 << (2 * n));
    }
}
