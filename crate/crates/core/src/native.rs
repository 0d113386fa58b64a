//! Lowering to the SP native gate, peephole simplification, and cost metrics.
//!
//! Simplification works per wire, where a wire is the qubit that starts at a
//! given position; SWAPs only relabel positions, so local counts do not
//! depend on routing. Every gate except H and X is diagonal, so a wire
//! decomposes into segments separated by H/X barriers, and inside a segment
//! the SP gates and phase gates commute freely.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{conjugate_pauli, oracle_syndrome, reference_syndrome, Circuit, Role, Syndrome};
use crate::cpc::{syndromes_valid, ErrorSet, ValidityMode};
use crate::error::{Error, Result};
use crate::gate::{identity, kind_matrix, kron, matmul, Gate, GateKind, Matrix};
use crate::pauli::{Letter, PauliString};
use crate::route::RoutedCircuit;

/// A native-gate circuit with per-gate provenance and an output frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSeq {
    /// Role of the qubit starting at each position.
    pub roles: Vec<Role>,
    /// Logical qubit starting at each position.
    pub layout: Vec<usize>,
    pub gates: Vec<Gate>,
    /// Index of the source two-qubit gate each native gate came from.
    pub provenance: Vec<Option<usize>>,
    pub wait_marker: usize,
    /// Single-qubit Cliffords elided at the wait stage, per wire, in time order.
    /// A wait-stage error `E` on that wire reads out like `C·E·C†` of the source code.
    pub output_frame: Vec<Vec<GateKind>>,
}

impl GateSeq {
    pub fn n_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn circuit(&self) -> Circuit {
        Circuit::from_gates(self.roles.clone(), self.gates.clone(), Some(self.wait_marker))
            .expect("gate sequence stays in range")
    }

    pub fn encoder(&self) -> &[Gate] {
        &self.gates[..self.wait_marker]
    }

    pub fn local_gate_count(&self) -> u32 {
        self.encoder().iter().filter(|g| g.is_local()).count() as u32
    }

    pub fn sp_count(&self) -> u32 {
        self.encoder().iter().filter(|g| matches!(g, Gate::Sp(..))).count() as u32
    }

    pub fn swap_count(&self) -> u32 {
        self.encoder().iter().filter(|g| matches!(g, Gate::Swap(..))).count() as u32
    }

    /// `L = |SP| + |SWAP| + |LOCAL|` over the encoder.
    pub fn total_length(&self) -> u32 {
        self.sp_count() + self.swap_count() + self.local_gate_count()
    }

    /// Two-qubit gates after the wait marker retrace those before it.
    fn has_mirrored_skeleton(&self) -> bool {
        let (enc, dec) = self.gates.split_at(self.wait_marker);
        let two = |g: &&Gate| g.is_two_qubit();
        enc.iter().rev().filter(two).eq(dec.iter().filter(two))
    }
}

fn embed(kind: GateKind, qubits: &[usize]) -> Matrix {
    let u = kind_matrix(kind);
    match qubits {
        [0] => kron(&u, &identity(2)),
        [1] => kron(&identity(2), &u),
        [0, 1] => u,
        _ => unreachable!("lowering patterns act on local qubits 0 and 1"),
    }
}

/// Native pattern for a two-qubit check on local qubits `(0, 1)`, in time order.
fn pattern(kind: GateKind) -> &'static [(GateKind, &'static [usize])] {
    use GateKind::*;
    match kind {
        // CNOT = (1⊗H)(P⊗P)·SP·(1⊗H)
        Cnot => &[(H, &[1]), (Sp, &[0, 1]), (P, &[0]), (P, &[1]), (H, &[1])],
        // CPG = (H⊗H)·CZ·(H⊗H) with CZ = (P⊗P)·SP
        Cpg => &[(H, &[0]), (H, &[1]), (Sp, &[0, 1]), (P, &[0]), (P, &[1]), (H, &[0]), (H, &[1])],
        _ => &[],
    }
}

/// Largest entry deviation between a pattern's product and its source gate
/// after removing the global phase.
pub fn lowering_deviation(kind: GateKind) -> f64 {
    let mut m = identity(4);
    for &(k, qs) in pattern(kind) {
        m = matmul(&embed(k, qs), &m);
    }
    let target = kind_matrix(kind);
    let (r, c) = (0..16).map(|i| (i / 4, i % 4)).find(|&(r, c)| target[r][c].norm() > 0.4).unwrap();
    let phase: Complex64 = m[r][c] / target[r][c];
    let mut worst = (phase.norm() - 1.0).abs();
    for r in 0..4 {
        for c in 0..4 {
            worst = worst.max((m[r][c] - phase * target[r][c]).norm());
        }
    }
    worst
}

fn check_lowering() {
    static CHECKED: OnceLock<()> = OnceLock::new();
    CHECKED.get_or_init(|| {
        for kind in [GateKind::Cnot, GateKind::Cpg] {
            let dev = lowering_deviation(kind);
            assert!(dev < 1e-12, "{kind:?} lowering deviates from its matrix by {dev}");
        }
    });
}

fn lower_gate(g: &Gate, source: usize, gates: &mut Vec<Gate>, provenance: &mut Vec<Option<usize>>) -> Result<()> {
    match g.kind() {
        GateKind::Cnot | GateKind::Cpg => {
            let (a, b) = g.pair().unwrap();
            for &(kind, qs) in pattern(g.kind()) {
                let phys: Vec<usize> = qs.iter().map(|&i| if i == 0 { a } else { b }).collect();
                gates.push(Gate::new(kind, &phys)?);
                provenance.push(Some(source));
            }
        }
        GateKind::Swap | GateKind::Sp => {
            gates.push(*g);
            provenance.push(Some(source));
        }
        _ => {
            gates.push(*g);
            provenance.push(None);
        }
    }
    Ok(())
}

/// Lowers every CNOT and CPG of a circuit with a wait marker, gate by gate.
pub fn lower_to_native(c: &Circuit) -> Result<GateSeq> {
    lower_with_layout(c, (0..c.n_qubits()).collect())
}

/// Lowers a routed encoder together with its mirrored decoder.
pub fn lower_routed(r: &RoutedCircuit, logical_roles: &[Role]) -> Result<GateSeq> {
    lower_with_layout(&r.encode_decode(logical_roles), r.initial_layout.positions().to_vec())
}

fn lower_with_layout(c: &Circuit, layout: Vec<usize>) -> Result<GateSeq> {
    check_lowering();
    let wait = c.wait_marker().ok_or(Error::MissingWaitMarker)?;
    let mut gates = Vec::new();
    let mut provenance = Vec::new();
    let mut marker = 0;
    for (i, g) in c.gates().iter().enumerate() {
        if i == wait {
            marker = gates.len();
        }
        if !matches!(g.kind(), GateKind::Cnot | GateKind::Cpg | GateKind::Swap | GateKind::Sp) && !g.is_local() {
            return Err(Error::UnsupportedGate(g.to_string()));
        }
        lower_gate(g, i, &mut gates, &mut provenance)?;
    }
    if wait == c.gates().len() {
        marker = gates.len();
    }
    Ok(GateSeq {
        roles: c.roles().to_vec(),
        layout,
        gates,
        provenance,
        wait_marker: marker,
        output_frame: vec![Vec::new(); c.n_qubits()],
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Seg {
    twos: Vec<usize>,
    /// Total phase exponent: `P^exp`, so 2 is Z and 3 is P†.
    exp: u8,
}

impl Seg {
    fn is_empty(&self) -> bool {
        self.twos.is_empty() && self.exp == 0
    }
}

fn diag_kind(exp: u8) -> Option<GateKind> {
    match exp % 4 {
        0 => None,
        1 => Some(GateKind::P),
        2 => Some(GateKind::Z),
        _ => Some(GateKind::Pdag),
    }
}

fn diag_exp(kind: GateKind) -> Option<u8> {
    match kind {
        GateKind::P => Some(1),
        GateKind::Z => Some(2),
        GateKind::Pdag => Some(3),
        _ => None,
    }
}

/// One wire: `segs[0] bars[0] segs[1] … bars[r-1] segs[r]`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Wire {
    segs: Vec<Seg>,
    bars: Vec<GateKind>,
}

impl Wire {
    fn new() -> Self {
        Self { segs: vec![Seg::default()], bars: Vec::new() }
    }

    fn push_two(&mut self, id: usize) {
        self.segs.last_mut().unwrap().twos.push(id);
    }

    fn push_local(&mut self, kind: GateKind) {
        match diag_exp(kind) {
            Some(e) => {
                let s = self.segs.last_mut().unwrap();
                s.exp = (s.exp + e) % 4;
            }
            None => {
                self.bars.push(kind);
                self.segs.push(Seg::default());
            }
        }
    }

    fn local_count(&self) -> usize {
        self.bars.len() + self.segs.iter().filter(|s| s.exp != 0).count()
    }

    /// Cancels `B·B` barrier pairs around empty segments until none remain.
    fn cancel_pairs(&mut self) -> bool {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < self.bars.len() {
            if self.bars[i] == self.bars[i + 1] && self.segs[i + 1].is_empty() {
                self.bars.drain(i..i + 2);
                let after = self.segs.remove(i + 2);
                self.segs.remove(i + 1);
                let s = &mut self.segs[i];
                s.twos.extend(after.twos);
                s.exp = (s.exp + after.exp) % 4;
                changed = true;
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        changed
    }

    /// Drops gates that act before the wire's first check and cannot affect
    /// any readout: everything on a data wire, diagonals on a parity wire.
    fn drop_prefix(&mut self, role: Role) -> bool {
        let before = self.clone();
        match role {
            Role::Data => match self.segs.iter().position(|s| !s.twos.is_empty()) {
                Some(f) => {
                    self.segs.drain(..f);
                    self.bars.drain(..f);
                    self.segs[0].exp = 0;
                }
                None => *self = Wire::new(),
            },
            Role::Parity => self.segs[0].exp = 0,
        }
        *self != before
    }

    /// Local gates after the last check, in time order.
    fn suffix(&self) -> Vec<GateKind> {
        let Some(l) = self.segs.iter().rposition(|s| !s.twos.is_empty()) else {
            return self.all_locals();
        };
        let mut out = Vec::new();
        out.extend(diag_kind(self.segs[l].exp));
        for j in l..self.bars.len() {
            out.push(self.bars[j]);
            out.extend(diag_kind(self.segs[j + 1].exp));
        }
        out
    }

    fn all_locals(&self) -> Vec<GateKind> {
        let mut out = Vec::new();
        for (i, s) in self.segs.iter().enumerate() {
            out.extend(diag_kind(s.exp));
            if i < self.bars.len() {
                out.push(self.bars[i]);
            }
        }
        out
    }

    /// Removes the last `count` gates of [`Wire::suffix`].
    fn remove_suffix(&mut self, count: usize) {
        let mut left = count;
        while left > 0 {
            let last = self.segs.last_mut().unwrap();
            if last.exp != 0 {
                last.exp = 0;
            } else if last.twos.is_empty() && !self.bars.is_empty() {
                self.segs.pop();
                self.bars.pop();
            } else {
                unreachable!("suffix shorter than requested");
            }
            left -= 1;
        }
    }
}

/// Encoder in per-wire form plus the ordered two-qubit gates.
struct Program {
    wires: Vec<Wire>,
    /// Physical two-qubit gates in order; SP entries record their wires.
    twos: Vec<(Gate, Option<(usize, usize)>, Option<usize>)>,
}

impl Program {
    fn parse(seq: &GateSeq) -> Result<Self> {
        let n = seq.n_qubits();
        let mut at: Vec<usize> = (0..n).collect();
        let mut wires = vec![Wire::new(); n];
        let mut twos = Vec::new();
        for (g, prov) in seq.encoder().iter().zip(&seq.provenance) {
            match *g {
                Gate::Swap(a, b) => {
                    twos.push((*g, None, *prov));
                    at.swap(a, b);
                }
                Gate::Sp(a, b) => {
                    let id = twos.len();
                    twos.push((*g, Some((at[a], at[b])), *prov));
                    wires[at[a]].push_two(id);
                    wires[at[b]].push_two(id);
                }
                Gate::Cnot { .. } | Gate::Cpg(..) => return Err(Error::UnsupportedGate(g.to_string())),
                _ => {
                    let q = g.qubits()[0];
                    wires[at[q]].push_local(g.kind());
                }
            }
        }
        Ok(Self { wires, twos })
    }

    fn emit(&self, template: &GateSeq, output_frame: Vec<Vec<GateKind>>) -> GateSeq {
        let n = self.wires.len();
        // Wire tokens: Ok(two id) or Err(local kind).
        let tokens: Vec<Vec<std::result::Result<usize, GateKind>>> = self
            .wires
            .iter()
            .map(|w| {
                let mut t = Vec::new();
                for (i, s) in w.segs.iter().enumerate() {
                    t.extend(s.twos.iter().map(|&id| Ok(id)));
                    if let Some(k) = diag_kind(s.exp) {
                        t.push(Err(k));
                    }
                    if i < w.bars.len() {
                        t.push(Err(w.bars[i]));
                    }
                }
                t
            })
            .collect();
        let mut cursor = vec![0usize; n];
        let mut pos: Vec<usize> = (0..n).collect();
        let mut at: Vec<usize> = (0..n).collect();
        let mut gates = Vec::new();
        let mut provenance = Vec::new();
        type Tokens = Vec<Vec<std::result::Result<usize, GateKind>>>;
        let flush = |w: usize,
                     cursor: &mut [usize],
                     pos: &[usize],
                     gates: &mut Vec<Gate>,
                     provenance: &mut Vec<Option<usize>>,
                     prov: Option<usize>,
                     tokens: &Tokens| {
            while let Some(Err(kind)) = tokens[w].get(cursor[w]) {
                gates.push(Gate::new(*kind, &[pos[w]]).unwrap());
                provenance.push(prov);
                cursor[w] += 1;
            }
        };
        for w in 0..n {
            flush(w, &mut cursor, &pos, &mut gates, &mut provenance, None, &tokens);
        }
        for (id, &(g, wires, prov)) in self.twos.iter().enumerate() {
            match wires {
                None => {
                    let (a, b) = g.pair().unwrap();
                    gates.push(g);
                    provenance.push(prov);
                    let (wa, wb) = (at[a], at[b]);
                    at.swap(a, b);
                    pos[wa] = b;
                    pos[wb] = a;
                }
                Some((wa, wb)) => {
                    gates.push(Gate::Sp(pos[wa], pos[wb]));
                    provenance.push(prov);
                    for w in [wa, wb] {
                        debug_assert_eq!(tokens[w].get(cursor[w]), Some(&Ok(id)));
                        cursor[w] += 1;
                        flush(w, &mut cursor, &pos, &mut gates, &mut provenance, prov, &tokens);
                    }
                }
            }
        }
        let wait = gates.len();
        let decoder: Vec<Gate> = gates.iter().rev().map(Gate::mirror).collect();
        let dec_prov: Vec<Option<usize>> = provenance.iter().rev().copied().collect();
        gates.extend(decoder);
        provenance.extend(dec_prov);
        GateSeq {
            roles: template.roles.clone(),
            layout: template.layout.clone(),
            gates,
            provenance,
            wait_marker: wait,
            output_frame,
        }
    }
}

/// Per-wire single-error syndrome flips of a sequence, indexed by wire then
/// letter (X, Y, Z).
fn wire_table(seq: &GateSeq) -> Result<Vec<[Syndrome; 3]>> {
    let c = seq.circuit();
    let at_wait = c.positions_after(seq.wait_marker);
    let n = seq.n_qubits();
    (0..n)
        .map(|w| {
            let mut row = [Syndrome::default(); 3];
            for (i, letter) in Letter::NON_IDENTITY.into_iter().enumerate() {
                row[i] = oracle_syndrome(&c, &PauliString::single(n, at_wait[w], letter)?)?;
            }
            Ok(row)
        })
        .collect()
}

fn letter_index(l: Letter) -> usize {
    match l {
        Letter::X => 0,
        Letter::Y => 1,
        Letter::Z => 2,
        Letter::I => unreachable!(),
    }
}

/// Letter reached by `C·L·C†` for gates `C` listed in time order.
fn frame_image(frame: &[GateKind], letter: Letter) -> Letter {
    let mut p = PauliString::single(1, 0, letter).unwrap();
    for &k in frame {
        p = conjugate_pauli(&Gate::new(k, &[0]).unwrap(), &p).unwrap();
    }
    p.letter(0)
}

fn table_valid(base: &[[Syndrome; 3]], frames: &[Vec<GateKind>], errset: ErrorSet, mode: ValidityMode) -> bool {
    let mut s = Vec::with_capacity(base.len() * 3);
    for (row, frame) in base.iter().zip(frames) {
        for &l in errset.letters() {
            s.push(row[letter_index(frame_image(frame, l))]);
        }
    }
    syndromes_valid(&s, mode)
}

/// Runs the peephole passes to a fixpoint over the encoder and rebuilds the
/// decoder as its mirror. SP mirrors to itself, so the rebuilt decoder can
/// differ from an exact inverse by Paulis, which only shift the no-error
/// syndrome. Returns the input unchanged if it is not native or its decoder
/// does not retrace the encoder's two-qubit gates.
pub fn simplify(seq: &GateSeq, errset: ErrorSet, mode: ValidityMode) -> GateSeq {
    match wire_table(seq) {
        Ok(base) => simplify_with_table(seq, &base, errset, mode),
        Err(_) => seq.clone(),
    }
}

/// [`simplify`] with the per-wire flip table of `seq` supplied by the caller.
pub(crate) fn simplify_with_table(
    seq: &GateSeq,
    base: &[[Syndrome; 3]],
    errset: ErrorSet,
    mode: ValidityMode,
) -> GateSeq {
    if !seq.has_mirrored_skeleton() {
        return seq.clone();
    }
    let Ok(mut prog) = Program::parse(seq) else { return seq.clone() };
    let n = prog.wires.len();
    let mut frames: Vec<Vec<GateKind>> = vec![Vec::new(); n];
    loop {
        let mut changed = false;
        for (w, wire) in prog.wires.iter_mut().enumerate() {
            changed |= wire.cancel_pairs();
            changed |= wire.drop_prefix(seq.roles[w]);
            changed |= wire.cancel_pairs();
        }
        for w in 0..n {
            let suffix = prog.wires[w].suffix();
            for len in (1..=suffix.len()).rev() {
                let mut trial = frames.clone();
                let mut f = suffix[suffix.len() - len..].to_vec();
                f.extend_from_slice(&frames[w]);
                trial[w] = f;
                if table_valid(base, &trial, errset, mode) {
                    prog.wires[w].remove_suffix(len);
                    frames = trial;
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let output_frame = frames
        .into_iter()
        .zip(&seq.output_frame)
        .map(|(mut f, old)| {
            f.extend_from_slice(old);
            f
        })
        .collect();
    prog.emit(seq, output_frame)
}

/// Local gates a sequence would have after simplification, per wire, without emitting it.
pub fn wire_local_counts(seq: &GateSeq) -> Vec<usize> {
    match Program::parse(seq) {
        Ok(p) => p.wires.iter().map(Wire::local_count).collect(),
        Err(_) => Vec::new(),
    }
}

/// Checks a native sequence against the source code under the frame oracle.
pub fn verify_native_equivalence(original: &Circuit, simplified: &GateSeq, errset: ErrorSet, mode: ValidityMode) -> bool {
    let n = original.n_qubits();
    if simplified.n_qubits() != n || original.wait_marker().is_none() || simplified.wait_marker > simplified.gates.len()
    {
        return false;
    }
    if simplified.roles.iter().zip(&simplified.layout).any(|(r, &q)| q >= n || original.roles()[q] != *r) {
        return false;
    }
    let c = match Circuit::from_gates(simplified.roles.clone(), simplified.gates.clone(), Some(simplified.wait_marker)) {
        Ok(c) => c,
        Err(_) => return false,
    };
    if reference_syndrome(&c).is_none() {
        return false;
    }
    let at_wait = c.positions_after(simplified.wait_marker);
    let mut wire_of = vec![0; n];
    for (w, &q) in simplified.layout.iter().enumerate() {
        wire_of[q] = w;
    }
    let mut pairs = Vec::new();
    for q in 0..n {
        for &l in errset.letters() {
            let e = PauliString::single(n, q, l).unwrap();
            let moved = PauliString::single(n, at_wait[wire_of[q]], l).unwrap();
            let (Ok(old), Ok(new)) = (oracle_syndrome(original, &e), oracle_syndrome(&c, &moved)) else {
                return false;
            };
            if new.is_zero() {
                return false;
            }
            pairs.push((old, new));
        }
    }
    if mode != ValidityMode::Detect {
        for (i, a) in pairs.iter().enumerate() {
            for b in &pairs[i + 1..] {
                if a.0 != b.0 && a.1 == b.1 {
                    return false;
                }
            }
        }
    }
    true
}

/// Gate-count weights `(γ₁, γ₂, γ₃)` for CPC, SWAP and local gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub cpc: f64,
    pub swap: f64,
    pub local: f64,
}

impl CostWeights {
    pub fn new(cpc: f64, swap: f64, local: f64) -> Result<Self> {
        for w in [cpc, swap, local] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!("cost weight {w} must be finite and nonnegative")));
            }
        }
        Ok(Self { cpc, swap, local })
    }

    pub fn unit() -> Self {
        Self { cpc: 1.0, swap: 1.0, local: 1.0 }
    }
}

impl std::str::FromStr for CostWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad weight {p:?}"))))
            .collect::<Result<_>>()?;
        match parts[..] {
            [a, b, c] => Self::new(a, b, c),
            _ => Err(Error::Parse(format!("expected three comma-separated weights, got {s:?}"))),
        }
    }
}

/// `R = γ₁·cpc + γ₂·swap + γ₃·local`.
pub fn weighted_cost(counts: (u32, u32, u32), w: &CostWeights) -> Result<f64> {
    let w = CostWeights::new(w.cpc, w.swap, w.local)?;
    Ok(w.cpc * counts.0 as f64 + w.swap * counts.1 as f64 + w.local * counts.2 as f64)
}
