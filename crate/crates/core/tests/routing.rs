use cpc_core::cpc::{build_circuit, encoder_gates, EmissionOrder};
use cpc_core::route::{route_nearest_neighbor, verify_routing, Layout, SwapPolicy};
use cpc_core::search::Kernel;
use cpc_core::{oracle_syndrome, AdjacencyTriple, ErrorSet, Gate, Letter, PauliString, ValidityMode};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn valid_codes(n: usize, seed: u64) -> Vec<AdjacencyTriple> {
    let kernel = Kernel::new(3, 4, ErrorSet::Xz, ValidityMode::Correct).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let i = rng.gen_range(0..1u64 << 30);
        if kernel.is_valid_index(i) {
            out.push(AdjacencyTriple::from_index(3, 4, i).unwrap());
        }
    }
    out
}

fn random_layout(rng: &mut impl Rng) -> Layout {
    let mut p: Vec<usize> = (0..7).collect();
    p.shuffle(rng);
    Layout::new(p).unwrap()
}

/// Moving the far qubit next to its partner is a remove/insert on the
/// position list; each step past a neighbour is one SWAP.
fn model_swaps(encoder: &[Gate], layout: &Layout) -> (u32, Vec<usize>) {
    let mut at = layout.positions().to_vec();
    let mut swaps = 0;
    for g in encoder {
        let (a, b) = g.pair().unwrap();
        let pa = at.iter().position(|&q| q == a).unwrap();
        let pb = at.iter().position(|&q| q == b).unwrap();
        let (i, j) = (pa.min(pb), pa.max(pb));
        swaps += (j - i - 1) as u32;
        let q = at.remove(j);
        at.insert(i + 1, q);
    }
    (swaps, at)
}

#[test]
fn routed_codes_replay_and_keep_syndromes() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (n, t) in valid_codes(500, 4).into_iter().enumerate() {
        let layout = if n % 2 == 0 { Layout::identity(7) } else { random_layout(&mut rng) };
        let enc = encoder_gates(&t, EmissionOrder::RowMajor);
        let unrouted = build_circuit(&t, EmissionOrder::RowMajor);
        for policy in [SwapPolicy::Persistent, SwapPolicy::SwapBack] {
            let r = route_nearest_neighbor(&enc, &layout, policy).unwrap();
            assert!(verify_routing(&enc, &r, &layout));
            assert_eq!(r.cpc_count as usize, enc.len());
            for q in 0..7 {
                for l in Letter::NON_IDENTITY {
                    let e = PauliString::single(7, q, l).unwrap();
                    assert_eq!(r.logical_syndrome(&t.roles(), &e).unwrap(), oracle_syndrome(&unrouted, &e).unwrap());
                }
            }
        }
        let r = route_nearest_neighbor(&enc, &layout, SwapPolicy::Persistent).unwrap();
        let (swaps, fin) = model_swaps(&enc, &layout);
        assert_eq!(r.swap_count, swaps);
        assert_eq!(r.final_layout.positions(), fin.as_slice());
        let back = route_nearest_neighbor(&enc, &layout, SwapPolicy::SwapBack).unwrap();
        let inv = layout.inverse();
        let direct: u32 = enc
            .iter()
            .map(|g| {
                let (a, b) = g.pair().unwrap();
                inv[a].abs_diff(inv[b]) as u32 - 1
            })
            .sum();
        assert_eq!(back.swap_count, 2 * direct);
    }
}

#[test]
fn dropping_a_swap_is_caught() {
    let mut checked = 0;
    for t in valid_codes(50, 8) {
        let enc = encoder_gates(&t, EmissionOrder::RowMajor);
        let layout = Layout::identity(7);
        let r = route_nearest_neighbor(&enc, &layout, SwapPolicy::Persistent).unwrap();
        for (i, g) in r.gates.iter().enumerate() {
            if matches!(g, Gate::Swap(..)) {
                let mut broken = r.clone();
                broken.gates.remove(i);
                assert!(!verify_routing(&enc, &broken, &layout));
                broken.swap_count -= 1;
                assert!(!verify_routing(&enc, &broken, &layout));
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn reordered_checks_are_caught() {
    let t = valid_codes(1, 12).remove(0);
    let enc = encoder_gates(&t, EmissionOrder::RowMajor);
    let layout = Layout::identity(7);
    let r = route_nearest_neighbor(&enc, &layout, SwapPolicy::Persistent).unwrap();
    let mut other = enc.clone();
    other.swap(0, enc.len() - 1);
    if other != enc {
        assert!(!verify_routing(&other, &r, &layout));
    }
    assert!(!verify_routing(&enc[..enc.len() - 1], &r, &layout));
}

#[test]
fn routing_rejects_non_check_gates() {
    assert!(route_nearest_neighbor(&[Gate::H(0)], &Layout::identity(2), SwapPolicy::Persistent).is_err());
    assert!(route_nearest_neighbor(&[Gate::Swap(0, 1)], &Layout::identity(2), SwapPolicy::Persistent).is_err());
    assert!(route_nearest_neighbor(&[Gate::Cpg(0, 5)], &Layout::identity(3), SwapPolicy::Persistent).is_err());
}
