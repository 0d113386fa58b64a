use cpc_core::circuit::reference_syndrome;
use cpc_core::cpc::{
    build_circuit, is_valid_code, syndrome_formula, syndrome_table, CodeJson, EmissionOrder, SingleError,
};
use cpc_core::{oracle_syndrome, AdjacencyTriple, ErrorSet, ErrorVector, Letter, PauliString, Syndrome, ValidityMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_triple(k: usize, m: usize, rng: &mut impl Rng) -> AdjacencyTriple {
    let bits = AdjacencyTriple::compact_bits(k, m);
    AdjacencyTriple::from_index(k, m, rng.gen::<u64>() & ((1 << bits) - 1)).unwrap()
}

#[test]
fn formula_matches_circuit_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (k, m) in [(2, 2), (3, 4)] {
        let n = k + m;
        for _ in 0..1000 {
            let t = random_triple(k, m, &mut rng);
            for order in [EmissionOrder::RowMajor, EmissionOrder::ColumnMajor] {
                let c = build_circuit(&t, order);
                assert_eq!(reference_syndrome(&c), Some(Syndrome::zero(m)));
                for q in 0..n {
                    for l in Letter::NON_IDENTITY {
                        let e = PauliString::single(n, q, l).unwrap();
                        let f = syndrome_formula(&t, &ErrorVector::single(k, q, l)).unwrap();
                        assert_eq!(f, oracle_syndrome(&c, &e).unwrap(), "{t:?} {l:?}{q}");
                    }
                }
            }
        }
    }
}

#[test]
fn four_two_two_table() {
    let t = AdjacencyTriple::four_two_two();
    let rows = syndrome_table(&t, ErrorSet::Xyz);
    assert_eq!(rows.len(), 13);
    assert_eq!(rows[0].error, None);
    assert!(rows[0].syndrome.is_zero());
    // A, B, p1, p2 are qubits 0..4.
    let expect = |q: usize, l: Letter| -> [u8; 2] {
        match (q, l) {
            (_, Letter::Y) => [1, 1],
            (0 | 1 | 2, Letter::X) | (3, Letter::Z) => [1, 0],
            _ => [0, 1],
        }
    };
    for row in &rows[1..] {
        let SingleError { qubit, letter } = row.error.unwrap();
        assert_eq!(row.syndrome, Syndrome::from_bits(&expect(qubit, letter)), "{letter:?}{qubit}");
    }
    assert!(is_valid_code(&t, ErrorSet::Xyz, ValidityMode::Detect));
}

#[test]
fn cross_check_closes_the_parity_phase_gap() {
    let t = AdjacencyTriple::four_two_two();
    let bare = AdjacencyTriple::new(t.bit_checks().clone(), t.phase_checks().clone(), cpc_core::BitMatrix::zeros(2, 2))
        .unwrap();
    let z_p1 = ErrorVector::single(2, 2, Letter::Z);
    assert!(syndrome_formula(&bare, &z_p1).unwrap().is_zero());
    assert!(!is_valid_code(&bare, ErrorSet::Xyz, ValidityMode::Detect));
}

#[test]
fn codes_serialize_as_row_strings() {
    let t = AdjacencyTriple::four_two_two();
    let s = serde_json::to_string(&t).unwrap();
    assert_eq!(s, r#"{"n":4,"k":2,"m_b":["10","10"],"m_p":["01","01"],"m_c":["01","00"]}"#);
    let j: CodeJson = serde_json::from_str(&s).unwrap();
    assert_eq!(AdjacencyTriple::try_from(j).unwrap(), t);
    assert!(serde_json::from_str::<AdjacencyTriple>(r#"{"n":4,"k":2,"m_b":["10","10"],"m_p":["01","01"],"m_c":["00","10"]}"#).is_err());
}

fn arb_triple() -> impl Strategy<Value = AdjacencyTriple> {
    prop_oneof![(0u64..1 << AdjacencyTriple::compact_bits(2, 2)).prop_map(|i| (2, 2, i)), (0u64..1 << AdjacencyTriple::compact_bits(3, 4)).prop_map(|i| (3, 4, i))]
        .prop_map(|(k, m, i)| AdjacencyTriple::from_index(k, m, i).unwrap())
}

fn error(k: usize, m: usize, x: u64, z: u64) -> ErrorVector {
    let mask = (1u64 << (k + m)) - 1;
    ErrorVector::from_pauli(k, m, &PauliString::from_bits(k + m, x & mask, z & mask, 0).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn formula_is_linear(t in arb_triple(), bits in any::<[u64; 4]>()) {
        let (k, m) = (t.k(), t.m());
        let (e1, e2) = (error(k, m, bits[0], bits[1]), error(k, m, bits[2], bits[3]));
        let lhs = syndrome_formula(&t, &e1.xor(&e2)).unwrap();
        let rhs = syndrome_formula(&t, &e1).unwrap().xor(&syndrome_formula(&t, &e2).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn parity_bit_flips_only_touch_their_own_readout(t in arb_triple()) {
        let (k, m) = (t.k(), t.m());
        for j in 0..m {
            let s = syndrome_formula(&t, &ErrorVector::single(k, k + j, Letter::X)).unwrap();
            prop_assert_eq!(s, Syndrome::new(1 << j, m));
        }
    }

    #[test]
    fn built_circuits_are_mirrored(t in arb_triple()) {
        prop_assert!(build_circuit(&t, EmissionOrder::RowMajor).is_mirrored());
        prop_assert!(build_circuit(&t, EmissionOrder::ColumnMajor).is_mirrored());
    }

    #[test]
    fn index_and_json_round_trip(t in arb_triple()) {
        prop_assert_eq!(AdjacencyTriple::from_index(t.k(), t.m(), t.to_index()).unwrap(), t.clone());
        let back: AdjacencyTriple = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        prop_assert_eq!(back, t);
    }
}
