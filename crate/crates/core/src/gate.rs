//! Gate vocabulary and the matrix-derived Pauli conjugation tables.
//!
//! Every conjugation rule used anywhere in the crate comes from the tables
//! built here, which are computed once from explicit unitary matrices
//! (`U σ U†` decomposed back into a phased Pauli).

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub enum Gate {
    Cnot { control: usize, target: usize },
    /// Conjugate propagator: copies a Z on either qubit onto the other as an X.
    Cpg(usize, usize),
    H(usize),
    /// `diag(1, -i)`.
    P(usize),
    /// `diag(1, i)`.
    Pdag(usize),
    Z(usize),
    X(usize),
    /// Symmetrised-phase native gate `diag(1, i, i, 1)`.
    Sp(usize, usize),
    Swap(usize, usize),
}

/// Gate kinds, used as table keys and in serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Cnot,
    Cpg,
    H,
    P,
    Pdag,
    Z,
    X,
    Sp,
    Swap,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::Cnot,
        GateKind::Cpg,
        GateKind::H,
        GateKind::P,
        GateKind::Pdag,
        GateKind::Z,
        GateKind::X,
        GateKind::Sp,
        GateKind::Swap,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cpg | GateKind::Sp | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Cnot => "CNOT",
            GateKind::Cpg => "CPG",
            GateKind::H => "H",
            GateKind::P => "P",
            GateKind::Pdag => "PDAG",
            GateKind::Z => "Z",
            GateKind::X => "X",
            GateKind::Sp => "SP",
            GateKind::Swap => "SWAP",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        GateKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cpg(..) => GateKind::Cpg,
            Gate::H(_) => GateKind::H,
            Gate::P(_) => GateKind::P,
            Gate::Pdag(_) => GateKind::Pdag,
            Gate::Z(_) => GateKind::Z,
            Gate::X(_) => GateKind::X,
            Gate::Sp(..) => GateKind::Sp,
            Gate::Swap(..) => GateKind::Swap,
        }
    }

    pub fn new(kind: GateKind, qubits: &[usize]) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{} takes {} qubits, got {}",
                kind.name(),
                kind.arity(),
                qubits.len()
            )));
        }
        if kind.arity() == 2 && qubits[0] == qubits[1] {
            return Err(Error::RepeatedQubit(qubits[0]));
        }
        let q = qubits[0];
        Ok(match kind {
            GateKind::Cnot => Gate::Cnot { control: q, target: qubits[1] },
            GateKind::Cpg => Gate::Cpg(q, qubits[1]),
            GateKind::Sp => Gate::Sp(q, qubits[1]),
            GateKind::Swap => Gate::Swap(q, qubits[1]),
            GateKind::H => Gate::H(q),
            GateKind::P => Gate::P(q),
            GateKind::Pdag => Gate::Pdag(q),
            GateKind::Z => Gate::Z(q),
            GateKind::X => Gate::X(q),
        })
    }

    /// Qubits in the order the gate matrix expects them (control first for CNOT).
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cpg(a, b) | Gate::Sp(a, b) | Gate::Swap(a, b) => vec![a, b],
            Gate::H(q) | Gate::P(q) | Gate::Pdag(q) | Gate::Z(q) | Gate::X(q) => vec![q],
        }
    }

    /// Qubits without allocating: the array and how many entries are used.
    pub fn qubit_array(&self) -> ([usize; 2], usize) {
        match *self {
            Gate::Cnot { control, target } => ([control, target], 2),
            Gate::Cpg(a, b) | Gate::Sp(a, b) | Gate::Swap(a, b) => ([a, b], 2),
            Gate::H(q) | Gate::P(q) | Gate::Pdag(q) | Gate::Z(q) | Gate::X(q) => ([q, 0], 1),
        }
    }

    pub fn pair(&self) -> Option<(usize, usize)> {
        match *self {
            Gate::Cnot { control, target } => Some((control, target)),
            Gate::Cpg(a, b) | Gate::Sp(a, b) | Gate::Swap(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.pair().is_some()
    }

    pub fn is_local(&self) -> bool {
        !self.is_two_qubit()
    }

    /// The gate that undoes this one in a mirrored decoder.
    ///
    /// `SP` mirrors to itself: `SP·SP = Z⊗Z`, a Pauli, which shifts syndromes
    /// by a constant and is handled by the reference-syndrome machinery.
    pub fn mirror(&self) -> Gate {
        match *self {
            Gate::P(q) => Gate::Pdag(q),
            Gate::Pdag(q) => Gate::P(q),
            g => g,
        }
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn remap(&self, mut f: impl FnMut(usize) -> usize) -> Gate {
        match *self {
            Gate::Cnot { control, target } => Gate::Cnot { control: f(control), target: f(target) },
            Gate::Cpg(a, b) => Gate::Cpg(f(a), f(b)),
            Gate::Sp(a, b) => Gate::Sp(f(a), f(b)),
            Gate::Swap(a, b) => Gate::Swap(f(a), f(b)),
            Gate::H(q) => Gate::H(f(q)),
            Gate::P(q) => Gate::P(f(q)),
            Gate::Pdag(q) => Gate::Pdag(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::X(q) => Gate::X(f(q)),
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::RepeatedQubit(qs[0]));
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.qubits().iter().map(|q| q.to_string()).collect();
        write!(f, "{}({})", self.kind().name(), qs.join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    kind: String,
    qubits: Vec<usize>,
}

impl From<Gate> for GateRepr {
    fn from(g: Gate) -> Self {
        GateRepr { kind: g.kind().name().to_string(), qubits: g.qubits() }
    }
}

impl TryFrom<GateRepr> for Gate {
    type Error = Error;

    fn try_from(r: GateRepr) -> Result<Self> {
        let kind = GateKind::parse(&r.kind).ok_or_else(|| Error::Parse(format!("unknown gate kind {:?}", r.kind)))?;
        Gate::new(kind, &r.qubits)
    }
}

// ---------------------------------------------------------------------------
// Matrices

pub(crate) type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for (r, row) in a.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v == c(0.0, 0.0) {
                continue;
            }
            for (col, slot) in out[r].iter_mut().enumerate() {
                *slot += v * b[k][col];
            }
        }
    }
    out
}

pub(crate) fn adjoint(a: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|r| (0..n).map(|col| a[col][r].conj()).collect()).collect()
}

pub(crate) fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (na, nb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); na * nb]; na * nb];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn diag(entries: &[Complex64]) -> Matrix {
    let n = entries.len();
    (0..n).map(|r| (0..n).map(|col| if r == col { entries[r] } else { c(0.0, 0.0) }).collect()).collect()
}

pub(crate) fn identity(n: usize) -> Matrix {
    diag(&vec![c(1.0, 0.0); n])
}

/// Single-qubit Pauli matrix for the bit pair `(x, z)` (Hermitian Y for `(1, 1)`).
pub(crate) fn pauli_matrix(x: bool, z: bool) -> Matrix {
    let (o, zero, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match (x, z) {
        (false, false) => vec![vec![o, zero], vec![zero, o]],
        (true, false) => vec![vec![zero, o], vec![o, zero]],
        (true, true) => vec![vec![zero, -i], vec![i, zero]],
        (false, true) => vec![vec![o, zero], vec![zero, -o]],
    }
}

/// Unitary of a gate kind on its own qubits, first listed qubit as the most
/// significant tensor factor.
pub fn kind_matrix(kind: GateKind) -> Vec<Vec<Complex64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let h = vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]];
    let cnot = vec![vec![o, z, z, z], vec![z, o, z, z], vec![z, z, z, o], vec![z, z, o, z]];
    match kind {
        GateKind::H => h,
        GateKind::P => diag(&[o, -i]),
        GateKind::Pdag => diag(&[o, i]),
        GateKind::Z => diag(&[o, -o]),
        GateKind::X => vec![vec![z, o], vec![o, z]],
        GateKind::Cnot => cnot,
        GateKind::Cpg => {
            // (1 ⊗ H) · CNOT(second → first) · (1 ⊗ H)
            let reversed = vec![vec![o, z, z, z], vec![z, z, z, o], vec![z, z, o, z], vec![z, o, z, z]];
            let ih = kron(&identity(2), &h);
            matmul(&matmul(&ih, &reversed), &ih)
        }
        GateKind::Sp => diag(&[o, i, i, o]),
        GateKind::Swap => vec![vec![o, z, z, z], vec![z, z, o, z], vec![z, o, z, z], vec![z, z, z, o]],
    }
}

/// Controlled-Z, the kernel the SP gate is local-Clifford equivalent to.
pub fn cz_matrix() -> Vec<Vec<Complex64>> {
    let o = c(1.0, 0.0);
    diag(&[o, o, o, -o])
}

// ---------------------------------------------------------------------------
// Conjugation tables

/// Image of a Hermitian Pauli under conjugation: new bits plus the `i^k` phase it picks up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Image {
    pub bits: u8,
    pub phase: u8,
}

/// Per-kind conjugation tables indexed by local Pauli bits.
///
/// Local bits for one qubit are `x | z << 1`; for two qubits the first
/// qubit uses bits 0-1 and the second bits 2-3.
pub(crate) struct Tables {
    forward: Vec<Vec<Image>>,
    backward: Vec<Vec<Image>>,
}

fn local_pauli(arity: usize, bits: u8) -> Matrix {
    let first = pauli_matrix(bits & 1 == 1, bits & 2 == 2);
    if arity == 1 {
        return first;
    }
    let second = pauli_matrix(bits & 4 == 4, bits & 8 == 8);
    kron(&first, &second)
}

fn decompose(arity: usize, m: &Matrix) -> Image {
    let dim = 1usize << arity;
    for bits in 0..(1u8 << (2 * arity)) {
        let tau = local_pauli(arity, bits);
        // tau is Hermitian, so tr(tau · m) / dim recovers the coefficient.
        let mut tr = c(0.0, 0.0);
        for r in 0..dim {
            for k in 0..dim {
                tr += tau[r][k] * m[k][r];
            }
        }
        let coeff = tr / dim as f64;
        if (coeff.norm() - 1.0).abs() < 1e-9 {
            let phase = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]
                .iter()
                .position(|p| (p - coeff).norm() < 1e-9)
                .expect("Clifford image must carry a power of i");
            return Image { bits, phase: phase as u8 };
        }
    }
    panic!("matrix is not a phased Pauli; gate is not Clifford");
}

fn build_table(u: &Matrix, arity: usize) -> Vec<Image> {
    let ud = adjoint(u);
    (0..(1u8 << (2 * arity)))
        .map(|bits| decompose(arity, &matmul(&matmul(u, &local_pauli(arity, bits)), &ud)))
        .collect()
}

impl Tables {
    fn generate() -> Self {
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for kind in GateKind::ALL {
            let u = kind_matrix(kind);
            forward.push(build_table(&u, kind.arity()));
            backward.push(build_table(&adjoint(&u), kind.arity()));
        }
        Tables { forward, backward }
    }

    pub(crate) fn get() -> &'static Tables {
        static TABLES: OnceLock<Tables> = OnceLock::new();
        TABLES.get_or_init(Tables::generate)
    }

    pub(crate) fn image(&self, kind: GateKind, bits: u8, adjoint: bool) -> Image {
        // `ALL` lists kinds in declaration order.
        let idx = kind as usize;
        if adjoint {
            self.backward[idx][bits as usize]
        } else {
            self.forward[idx][bits as usize]
        }
    }
}
