//! Circuits over data/parity roles and the Pauli-frame engine that runs them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{Gate, Tables};
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Parity,
}

/// Parity-qubit measurement outcomes; bit `j` belongs to the `j`-th parity qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Syndrome {
    pub bits: u64,
    pub len: usize,
}

impl Syndrome {
    pub fn new(bits: u64, len: usize) -> Self {
        Self { bits, len }
    }

    pub fn zero(len: usize) -> Self {
        Self { bits: 0, len }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut s = Self::zero(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            s.bits |= ((b & 1) as u64) << j;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn bit(&self, j: usize) -> bool {
        self.bits >> j & 1 == 1
    }

    pub fn xor(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        Self { bits: self.bits ^ other.bits, len: self.len }
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            write!(f, "{}", self.bits >> j & 1)?;
        }
        Ok(())
    }
}

/// An ordered gate list over qubits tagged data or parity.
///
/// Qubit indices are physical positions. The roles describe the qubit that
/// *starts* at each position; SWAP gates move qubits between positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    roles: Vec<Role>,
    gates: Vec<Gate>,
    wait_marker: Option<usize>,
}

impl Circuit {
    pub fn new(roles: Vec<Role>) -> Self {
        Self { roles, gates: Vec::new(), wait_marker: None }
    }

    pub fn from_gates(roles: Vec<Role>, gates: Vec<Gate>, wait_marker: Option<usize>) -> Result<Self> {
        let c = Self { roles, gates, wait_marker };
        c.validate()?;
        Ok(c)
    }

    /// Builds `encoder · wait · mirror(encoder)`.
    pub fn encode_decode(roles: Vec<Role>, encoder: Vec<Gate>) -> Result<Self> {
        let mut gates = encoder.clone();
        gates.extend(encoder.iter().rev().map(Gate::mirror));
        Self::from_gates(roles, gates, Some(encoder.len()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.roles.len();
        for g in &self.gates {
            g.check(n)?;
        }
        if let Some(w) = self.wait_marker {
            if w > self.gates.len() {
                return Err(Error::GateIndexOutOfRange { index: w, len: self.gates.len() });
            }
        }
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.roles.len())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn mark_wait(&mut self) {
        self.wait_marker = Some(self.gates.len());
    }

    pub fn n_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn wait_marker(&self) -> Option<usize> {
        self.wait_marker
    }

    pub fn encoder(&self) -> &[Gate] {
        &self.gates[..self.wait_marker.unwrap_or(self.gates.len())]
    }

    pub fn decoder(&self) -> &[Gate] {
        &self.gates[self.wait_marker.unwrap_or(self.gates.len())..]
    }

    pub fn data_qubits(&self) -> Vec<usize> {
        self.roles.iter().enumerate().filter(|(_, r)| **r == Role::Data).map(|(q, _)| q).collect()
    }

    pub fn parity_qubits(&self) -> Vec<usize> {
        self.roles.iter().enumerate().filter(|(_, r)| **r == Role::Parity).map(|(q, _)| q).collect()
    }

    /// True iff the decoder is the gate-by-gate mirror of the encoder.
    pub fn is_mirrored(&self) -> bool {
        let (enc, dec) = (self.encoder(), self.decoder());
        self.wait_marker.is_some()
            && enc.len() == dec.len()
            && enc.iter().rev().map(Gate::mirror).eq(dec.iter().copied())
    }

    /// Position of every starting qubit after the first `upto` gates.
    pub fn positions_after(&self, upto: usize) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.n_qubits()).collect();
        let mut at: Vec<usize> = (0..self.n_qubits()).collect();
        for g in &self.gates[..upto.min(self.gates.len())] {
            if let Gate::Swap(a, b) = *g {
                let (qa, qb) = (at[a], at[b]);
                at.swap(a, b);
                pos[qa] = b;
                pos[qb] = a;
            }
        }
        pos
    }

    pub fn final_positions(&self) -> Vec<usize> {
        self.positions_after(self.gates.len())
    }
}

/// `g · p · g†`, phase included.
pub fn conjugate_pauli(g: &Gate, p: &PauliString) -> Result<PauliString> {
    g.check(p.num_qubits())?;
    let mut out = *p;
    apply(g, &mut out, false);
    Ok(out)
}

/// `g† · p · g`: pulls a Pauli backwards through `g`.
pub fn conjugate_pauli_adjoint(g: &Gate, p: &PauliString) -> Result<PauliString> {
    g.check(p.num_qubits())?;
    let mut out = *p;
    apply(g, &mut out, true);
    Ok(out)
}

#[inline]
pub(crate) fn apply(g: &Gate, p: &mut PauliString, adjoint: bool) {
    let tables = Tables::get();
    let (x, z) = (p.xbits(), p.zbits());
    let (arr, len) = g.qubit_array();
    let qs = &arr[..len];
    let mut bits = 0u8;
    for (slot, &q) in qs.iter().enumerate() {
        bits |= ((x >> q & 1) as u8) << (2 * slot);
        bits |= ((z >> q & 1) as u8) << (2 * slot + 1);
    }
    let img = tables.image(g.kind(), bits, adjoint);
    let (mut nx, mut nz) = (x, z);
    for (slot, &q) in qs.iter().enumerate() {
        let m = 1u64 << q;
        nx = if img.bits >> (2 * slot) & 1 == 1 { nx | m } else { nx & !m };
        nz = if img.bits >> (2 * slot + 1) & 1 == 1 { nz | m } else { nz & !m };
    }
    p.set_raw(nx, nz, p.phase() + img.phase);
}

/// Folds [`conjugate_pauli`] over `c.gates()[from_index..]`.
pub fn propagate(c: &Circuit, e: &PauliString, from_index: usize) -> Result<PauliString> {
    if e.num_qubits() != c.n_qubits() {
        return Err(Error::DimensionMismatch { expected: c.n_qubits(), actual: e.num_qubits() });
    }
    if from_index > c.gates.len() {
        return Err(Error::GateIndexOutOfRange { index: from_index, len: c.gates.len() });
    }
    let mut p = *e;
    for g in &c.gates[from_index..] {
        apply(g, &mut p, false);
    }
    Ok(p)
}

/// Syndrome flip caused by a final Pauli frame: parity qubit `j` reads 1 iff
/// the frame has an X component where that qubit ends up.
pub fn readout(c: &Circuit, frame: &PauliString) -> Syndrome {
    let pos = c.final_positions();
    let parity = c.parity_qubits();
    let mut s = Syndrome::zero(parity.len());
    for (j, &q) in parity.iter().enumerate() {
        s.bits |= (frame.xbits() >> pos[q] & 1) << j;
    }
    s
}

/// Syndrome flips produced by an error inserted at the wait marker.
///
/// `e` is expressed at physical positions as they stand at the wait marker.
pub fn oracle_syndrome(c: &Circuit, e: &PauliString) -> Result<Syndrome> {
    let w = c.wait_marker.ok_or(Error::MissingWaitMarker)?;
    let frame = propagate(c, e, w)?;
    Ok(readout(c, &frame))
}

/// The no-error syndrome of the whole circuit, or `None` when it depends on
/// the data state.
///
/// Each parity readout `Z_j` is pulled back through the circuit; the outcome
/// is deterministic iff the pulled-back operator is a signed product of Z on
/// parity qubits, which stabilizes the `|0…0⟩` parity input.
pub fn reference_syndrome(c: &Circuit) -> Option<Syndrome> {
    let n = c.n_qubits();
    let pos = c.final_positions();
    let parity = c.parity_qubits();
    let data_mask: u64 = c.data_qubits().iter().fold(0, |m, &q| m | 1 << q);
    let mut s = Syndrome::zero(parity.len());
    for (j, &q) in parity.iter().enumerate() {
        let mut p = PauliString::identity(n);
        p.set_raw(0, 1 << pos[q], 0);
        for g in c.gates.iter().rev() {
            apply(g, &mut p, true);
        }
        if p.xbits() != 0 || p.zbits() & data_mask != 0 {
            return None;
        }
        match p.phase() {
            0 => {}
            2 => s.bits |= 1 << j,
            _ => return None,
        }
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Letter;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn cnot_copies_x_forward() {
        let g = Gate::Cnot { control: 0, target: 1 };
        assert!(conjugate_pauli(&g, &p("XI")).unwrap().eq_up_to_phase(&p("XX")));
        assert!(conjugate_pauli(&g, &p("IZ")).unwrap().eq_up_to_phase(&p("ZZ")));
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        assert_eq!(conjugate_pauli(&Gate::H(0), &p("X")).unwrap(), p("Z"));
        assert_eq!(conjugate_pauli(&Gate::H(0), &p("Y")).unwrap(), p("-Y"));
    }

    #[test]
    fn sp_turns_x_into_y_z() {
        let out = conjugate_pauli(&Gate::Sp(0, 1), &p("XI")).unwrap();
        assert!(out.eq_up_to_phase(&p("YZ")));
    }

    #[test]
    fn cpg_copies_z_as_x() {
        let out = conjugate_pauli(&Gate::Cpg(0, 1), &p("ZI")).unwrap();
        assert!(out.eq_up_to_phase(&p("ZX")));
        let out = conjugate_pauli(&Gate::Cpg(0, 1), &p("IZ")).unwrap();
        assert!(out.eq_up_to_phase(&p("XZ")));
        assert_eq!(conjugate_pauli(&Gate::Cpg(0, 1), &p("XI")).unwrap(), p("XI"));
    }

    #[test]
    fn out_of_range_gate_is_rejected() {
        assert!(matches!(
            conjugate_pauli(&Gate::H(3), &p("XX")),
            Err(Error::QubitOutOfRange { qubit: 3, n: 2 })
        ));
    }

    #[test]
    fn self_inverse_on_all_two_qubit_paulis() {
        let gates = [Gate::Cnot { control: 0, target: 1 }, Gate::Cpg(0, 1), Gate::Swap(0, 1), Gate::H(0)];
        for x in 0..4u64 {
            for z in 0..4u64 {
                for phase in 0..4 {
                    let e = PauliString::from_bits(2, x, z, phase).unwrap();
                    for g in &gates {
                        let twice = conjugate_pauli(g, &conjugate_pauli(g, &e).unwrap()).unwrap();
                        assert_eq!(twice, e, "{g}");
                    }
                    let sp = Gate::Sp(0, 1);
                    let back = conjugate_pauli_adjoint(&sp, &conjugate_pauli(&sp, &e).unwrap()).unwrap();
                    assert_eq!(back, e);
                }
            }
        }
    }

    #[test]
    fn propagate_empty_tail_is_identity_map() {
        let c = Circuit::encode_decode(vec![Role::Data, Role::Parity], vec![Gate::Cnot { control: 0, target: 1 }])
            .unwrap();
        let e = p("XZ");
        assert_eq!(propagate(&c, &e, c.gates().len()).unwrap(), e);
        assert!(propagate(&c, &e, 5).is_err());
    }

    #[test]
    fn oracle_needs_wait_marker() {
        let c = Circuit::new(vec![Role::Data, Role::Parity]);
        assert_eq!(oracle_syndrome(&c, &p("II")), Err(Error::MissingWaitMarker));
    }

    #[test]
    fn bit_flip_gadget_flags_x() {
        let enc = vec![Gate::Cnot { control: 0, target: 2 }, Gate::Cnot { control: 1, target: 2 }];
        let c = Circuit::encode_decode(vec![Role::Data, Role::Data, Role::Parity], enc).unwrap();
        assert!(c.is_mirrored());
        for q in 0..2 {
            let e = PauliString::single(3, q, Letter::X).unwrap();
            assert_eq!(oracle_syndrome(&c, &e).unwrap().bits, 1);
            let e = PauliString::single(3, q, Letter::Z).unwrap();
            assert_eq!(oracle_syndrome(&c, &e).unwrap().bits, 0);
        }
        assert_eq!(reference_syndrome(&c), Some(Syndrome::zero(1)));
    }

    #[test]
    fn reference_syndrome_sees_unmirrored_h() {
        // H on a fresh parity qubit makes its readout random.
        let c = Circuit::from_gates(vec![Role::Data, Role::Parity], vec![Gate::H(1)], Some(1)).unwrap();
        assert_eq!(reference_syndrome(&c), None);
        // X on the parity qubit flips it deterministically.
        let c = Circuit::from_gates(vec![Role::Data, Role::Parity], vec![Gate::X(1)], Some(1)).unwrap();
        assert_eq!(reference_syndrome(&c), Some(Syndrome::new(1, 1)));
    }

    #[test]
    fn swaps_move_readout_positions() {
        let c = Circuit::from_gates(
            vec![Role::Parity, Role::Data],
            vec![Gate::Swap(0, 1)],
            Some(1),
        )
        .unwrap();
        assert_eq!(c.final_positions(), vec![1, 0]);
        assert_eq!(oracle_syndrome(&c, &p("IX")).unwrap().bits, 1);
        assert_eq!(oracle_syndrome(&c, &p("XI")).unwrap().bits, 0);
    }
}
