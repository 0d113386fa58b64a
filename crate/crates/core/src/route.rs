//! SWAP insertion for a linear nearest-neighbour register.
//!
//! Gates are routed by moving the higher-positioned qubit of each pair down
//! the chain until it sits next to its partner. Only the encoder is routed; the
//! decoder of a routed circuit is the mirror of the routed encoder.

use serde::{Deserialize, Serialize};

use crate::circuit::{oracle_syndrome, Circuit, Role, Syndrome};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::pauli::PauliString;

/// Position → logical qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout {
    positions: Vec<usize>,
}

impl Layout {
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        let n = positions.len();
        let mut seen = vec![false; n];
        for &q in &positions {
            if q >= n || seen[q] {
                return Err(Error::InvalidArgument(format!("layout {positions:?} is not a permutation")));
            }
            seen[q] = true;
        }
        Ok(Self { positions })
    }

    pub fn identity(n: usize) -> Self {
        Self { positions: (0..n).collect() }
    }

    /// Parses labels like `A,B,C,p1,p2,p3,p4` or plain logical indices.
    /// Letters name data qubits in order, `pN` names parity qubit `N`.
    pub fn parse(s: &str, k: usize, m: usize) -> Result<Self> {
        let mut positions = Vec::new();
        for tok in s.split(',').map(str::trim) {
            let q = if let Ok(i) = tok.parse::<usize>() {
                i
            } else if let Some(rest) = tok.strip_prefix(['p', 'P']) {
                let j: usize = rest.parse().map_err(|_| Error::Parse(format!("bad layout label {tok:?}")))?;
                if j == 0 || j > m {
                    return Err(Error::Parse(format!("parity label {tok:?} out of range")));
                }
                k + j - 1
            } else if tok.len() == 1 && tok.as_bytes()[0].is_ascii_uppercase() {
                let d = (tok.as_bytes()[0] - b'A') as usize;
                if d >= k {
                    return Err(Error::Parse(format!("data label {tok:?} out of range")));
                }
                d
            } else {
                return Err(Error::Parse(format!("bad layout label {tok:?}")));
            };
            positions.push(q);
        }
        if positions.len() != k + m {
            return Err(Error::Parse(format!("layout has {} entries, expected {}", positions.len(), k + m)));
        }
        Self::new(positions)
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn qubit_at(&self, pos: usize) -> usize {
        self.positions[pos]
    }

    /// Logical qubit → position.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.positions.len()];
        for (p, &q) in self.positions.iter().enumerate() {
            inv[q] = p;
        }
        inv
    }

    pub fn label(&self, k: usize) -> String {
        self.positions
            .iter()
            .map(|&q| if q < k { ((b'A' + q as u8) as char).to_string() } else { format!("p{}", q - k + 1) })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Every arrangement keeping data qubits and parity qubits in their own
    /// relative order; `C(k+m, k)` of them.
    pub fn interleavings(k: usize, m: usize) -> Vec<Layout> {
        let n = k + m;
        (0u64..1 << n)
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| {
                let (mut d, mut p) = (0, k);
                let positions = (0..n)
                    .map(|pos| {
                        if mask >> pos & 1 == 1 {
                            d += 1;
                            d - 1
                        } else {
                            p += 1;
                            p - 1
                        }
                    })
                    .collect();
                Layout { positions }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapPolicy {
    /// Moved qubits stay where they end up.
    #[default]
    Persistent,
    /// Every moved qubit is swapped back after its gate.
    SwapBack,
}

impl std::str::FromStr for SwapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "persistent" => Ok(SwapPolicy::Persistent),
            "swap-back" | "swapback" => Ok(SwapPolicy::SwapBack),
            other => Err(Error::Parse(format!("unknown swap policy {other:?}"))),
        }
    }
}

/// A routed encoder at physical positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutedCircuit {
    pub gates: Vec<Gate>,
    pub swap_count: u32,
    pub cpc_count: u32,
    pub initial_layout: Layout,
    pub final_layout: Layout,
}

impl RoutedCircuit {
    pub fn two_qubit_count(&self) -> u32 {
        self.cpc_count + self.swap_count
    }

    /// Routed encoder, wait marker, mirrored decoder; roles by starting position.
    pub fn encode_decode(&self, logical_roles: &[Role]) -> Circuit {
        let roles = self.initial_layout.positions().iter().map(|&q| logical_roles[q]).collect();
        Circuit::encode_decode(roles, self.gates.clone()).expect("routing keeps positions in range")
    }

    /// Syndrome of the routed encode-decode circuit for an error given on
    /// logical qubits at the wait stage, bits ordered by logical parity index.
    pub fn logical_syndrome(&self, logical_roles: &[Role], e: &PauliString) -> Result<Syndrome> {
        let c = self.encode_decode(logical_roles);
        let at_wait = self.final_layout.inverse();
        let mut phys = PauliString::identity(e.num_qubits());
        for q in 0..e.num_qubits() {
            phys.set(at_wait[q], e.letter(q))?;
        }
        let raw = oracle_syndrome(&c, &phys)?;
        // Bit j of `raw` belongs to the j-th parity position in the initial layout.
        let parity_logical: Vec<usize> =
            self.initial_layout.positions().iter().copied().filter(|&q| logical_roles[q] == Role::Parity).collect();
        let mut order: Vec<usize> = parity_logical.clone();
        order.sort_unstable();
        let mut s = Syndrome::zero(raw.len);
        for (j, q) in parity_logical.iter().enumerate() {
            let logical_j = order.iter().position(|x| x == q).unwrap();
            s.bits |= (raw.bits >> j & 1) << logical_j;
        }
        Ok(s)
    }
}

/// Routes `encoder` (gates on logical qubits) onto a linear chain.
pub fn route_nearest_neighbor(encoder: &[Gate], layout: &Layout, policy: SwapPolicy) -> Result<RoutedCircuit> {
    let n = layout.len();
    let mut at = layout.positions().to_vec();
    let mut pos = layout.inverse();
    let mut gates = Vec::new();
    let (mut swaps, mut cpc) = (0u32, 0u32);
    for g in encoder {
        g.check(n)?;
        let Some((a, b)) = g.pair() else {
            return Err(Error::UnsupportedGate(format!("{g} (routing expects two-qubit checks)")));
        };
        if matches!(g, Gate::Swap(..)) {
            return Err(Error::UnsupportedGate("SWAP in routing input".into()));
        }
        let (i, j) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
        let mut moved = Vec::new();
        for p in (i + 1..j).rev() {
            gates.push(Gate::Swap(p, p + 1));
            let (qa, qb) = (at[p], at[p + 1]);
            at.swap(p, p + 1);
            pos[qa] = p + 1;
            pos[qb] = p;
            moved.push(p);
            swaps += 1;
        }
        gates.push(g.remap(|q| pos[q]));
        cpc += 1;
        if policy == SwapPolicy::SwapBack {
            for &p in moved.iter().rev() {
                gates.push(Gate::Swap(p, p + 1));
                let (qa, qb) = (at[p], at[p + 1]);
                at.swap(p, p + 1);
                pos[qa] = p + 1;
                pos[qb] = p;
                swaps += 1;
            }
        }
    }
    Ok(RoutedCircuit {
        gates,
        swap_count: swaps,
        cpc_count: cpc,
        initial_layout: layout.clone(),
        final_layout: Layout { positions: at },
    })
}

/// Replays `routed` against `original` on logical qubits.
pub fn verify_routing(original: &[Gate], routed: &RoutedCircuit, layout: &Layout) -> bool {
    let n = layout.len();
    let mut at = layout.positions().to_vec();
    let mut next = original.iter();
    let mut swaps = 0;
    for g in &routed.gates {
        if g.check(n).is_err() {
            return false;
        }
        if let Some((a, b)) = g.pair() {
            if a.abs_diff(b) != 1 {
                return false;
            }
        }
        match *g {
            Gate::Swap(a, b) => {
                at.swap(a, b);
                swaps += 1;
            }
            _ => {
                let Some(orig) = next.next() else { return false };
                if g.remap(|p| at[p]) != *orig {
                    return false;
                }
            }
        }
    }
    next.next().is_none() && swaps == routed.swap_count && at == routed.final_layout.positions()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_gate_needs_no_swap() {
        let r = route_nearest_neighbor(&[Gate::Cnot { control: 0, target: 1 }], &Layout::identity(3), SwapPolicy::Persistent)
            .unwrap();
        assert_eq!(r.swap_count, 0);
        assert_eq!(r.two_qubit_count(), 1);
    }

    #[test]
    fn distance_three_moves_upward() {
        let g = [Gate::Cpg(0, 3)];
        let l = Layout::identity(4);
        let r = route_nearest_neighbor(&g, &l, SwapPolicy::Persistent).unwrap();
        assert_eq!(r.gates, vec![Gate::Swap(2, 3), Gate::Swap(1, 2), Gate::Cpg(0, 1)]);
        assert_eq!(r.final_layout.positions(), &[0, 3, 1, 2]);
        assert!(verify_routing(&g, &r, &l));
    }

    #[test]
    fn swap_back_restores_layout() {
        let g = [Gate::Cpg(0, 3)];
        let l = Layout::identity(4);
        let r = route_nearest_neighbor(&g, &l, SwapPolicy::SwapBack).unwrap();
        assert_eq!(r.swap_count, 4);
        assert_eq!(r.final_layout, l);
        assert!(verify_routing(&g, &r, &l));
    }

    #[test]
    fn layout_parsing() {
        let l = Layout::parse("A,B,C,p1,p2,p3,p4", 3, 4).unwrap();
        assert_eq!(l, Layout::identity(7));
        let l = Layout::parse("p1,A,B", 2, 1).unwrap();
        assert_eq!(l.positions(), &[2, 0, 1]);
        assert_eq!(l.label(2), "p1,A,B");
        assert!(Layout::parse("A,A,p1", 2, 1).is_err());
        assert!(Layout::parse("A,B", 2, 1).is_err());
    }

    #[test]
    fn interleaving_count() {
        assert_eq!(Layout::interleavings(3, 4).len(), 35);
        assert!(Layout::interleavings(3, 4).contains(&Layout::identity(7)));
    }
}
