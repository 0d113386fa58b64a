//! Adjacency-matrix description of CPC codes, canonical circuit
//! construction and the closed-form syndrome calculation.
//!
//! A code on `k` data and `m` parity qubits is fixed by three GF(2)
//! matrices: bit-checks `m_b` (k×m, data→parity CNOTs), phase-checks `m_p`
//! (k×m, data–parity conjugate propagators) and cross-checks `m_c` (m×m,
//! strictly upper triangular, parity–parity conjugate propagators).
//! Qubits are ordered `D_1..D_k, p_1..p_m`.

use serde::{Deserialize, Serialize};

use crate::bitmatrix::BitMatrix;
use crate::circuit::{Circuit, Role, Syndrome};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::pauli::{Letter, PauliString};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyTriple {
    k: usize,
    m: usize,
    bit_checks: BitMatrix,
    phase_checks: BitMatrix,
    cross_checks: BitMatrix,
}

/// Single-qubit error alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorSet {
    Xz,
    Xyz,
}

impl ErrorSet {
    pub fn letters(self) -> &'static [Letter] {
        match self {
            ErrorSet::Xz => &[Letter::X, Letter::Z],
            ErrorSet::Xyz => &[Letter::X, Letter::Y, Letter::Z],
        }
    }

    pub fn size(self) -> usize {
        self.letters().len()
    }

    pub fn contains(self, letter: Letter) -> bool {
        self.letters().contains(&letter)
    }
}

impl std::str::FromStr for ErrorSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xz" => Ok(ErrorSet::Xz),
            "xyz" => Ok(ErrorSet::Xyz),
            other => Err(Error::Parse(format!("unknown error set {other:?} (expected xz or xyz)"))),
        }
    }
}

/// What a working code must achieve on single-qubit errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidityMode {
    /// Every error gives a nonzero syndrome.
    Detect,
    /// Syndromes are pairwise distinct and all nonzero.
    Correct,
    /// Syndromes are pairwise distinct; one error may share the zero syndrome.
    Distinct,
}

impl std::str::FromStr for ValidityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "detect" => Ok(ValidityMode::Detect),
            "correct" => Ok(ValidityMode::Correct),
            "distinct" => Ok(ValidityMode::Distinct),
            other => Err(Error::Parse(format!("unknown mode {other:?} (expected detect, correct or distinct)"))),
        }
    }
}

/// Intra-round order in which checks are emitted as gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmissionOrder {
    /// Row by row of each matrix (data qubit outer, parity qubit inner).
    #[default]
    RowMajor,
    /// Column by column (parity qubit outer).
    ColumnMajor,
}

impl std::str::FromStr for EmissionOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row-major" | "row" => Ok(EmissionOrder::RowMajor),
            "column-major" | "col" | "column" => Ok(EmissionOrder::ColumnMajor),
            other => Err(Error::Parse(format!("unknown emission order {other:?}"))),
        }
    }
}

/// Error components split by qubit role, each a packed row vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ErrorVector {
    pub data_x: u64,
    pub data_z: u64,
    pub parity_x: u64,
    pub parity_z: u64,
}

impl ErrorVector {
    /// Splits an `(k+m)`-qubit Pauli in canonical qubit order.
    pub fn from_pauli(k: usize, m: usize, e: &PauliString) -> Result<Self> {
        if e.num_qubits() != k + m {
            return Err(Error::DimensionMismatch { expected: k + m, actual: e.num_qubits() });
        }
        let dm = (1u64 << k) - 1;
        let pm = (1u64 << m) - 1;
        Ok(Self {
            data_x: e.xbits() & dm,
            data_z: e.zbits() & dm,
            parity_x: e.xbits() >> k & pm,
            parity_z: e.zbits() >> k & pm,
        })
    }

    pub fn single(k: usize, qubit: usize, letter: Letter) -> Self {
        let (x, z) = letter.bits();
        let mut e = Self::default();
        if qubit < k {
            if x {
                e.data_x |= 1 << qubit;
            }
            if z {
                e.data_z |= 1 << qubit;
            }
        } else {
            let j = qubit - k;
            if x {
                e.parity_x |= 1 << j;
            }
            if z {
                e.parity_z |= 1 << j;
            }
        }
        e
    }

    pub fn xor(&self, o: &Self) -> Self {
        Self {
            data_x: self.data_x ^ o.data_x,
            data_z: self.data_z ^ o.data_z,
            parity_x: self.parity_x ^ o.parity_x,
            parity_z: self.parity_z ^ o.parity_z,
        }
    }
}

/// A single-qubit error in canonical qubit numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SingleError {
    pub qubit: usize,
    pub letter: Letter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    /// `None` is the no-error row.
    pub error: Option<SingleError>,
    pub syndrome: Syndrome,
}

impl AdjacencyTriple {
    pub fn new(bit_checks: BitMatrix, phase_checks: BitMatrix, cross_checks: BitMatrix) -> Result<Self> {
        let k = bit_checks.rows();
        let m = bit_checks.cols();
        if phase_checks.rows() != k || phase_checks.cols() != m {
            return Err(Error::InvalidTriple(format!(
                "phase-check matrix is {}x{}, expected {k}x{m}",
                phase_checks.rows(),
                phase_checks.cols()
            )));
        }
        if cross_checks.rows() != m || cross_checks.cols() != m {
            return Err(Error::InvalidTriple(format!(
                "cross-check matrix is {}x{}, expected {m}x{m}",
                cross_checks.rows(),
                cross_checks.cols()
            )));
        }
        if !cross_checks.is_strictly_upper() {
            return Err(Error::InvalidTriple("cross-check matrix must be strictly upper triangular".into()));
        }
        if k + m > 64 {
            return Err(Error::InvalidTriple(format!("{} qubits exceeds 64", k + m)));
        }
        Ok(Self { k, m, bit_checks, phase_checks, cross_checks })
    }

    pub fn zero(k: usize, m: usize) -> Self {
        Self {
            k,
            m,
            bit_checks: BitMatrix::zeros(k, m),
            phase_checks: BitMatrix::zeros(k, m),
            cross_checks: BitMatrix::zeros(m, m),
        }
    }

    /// The [[4,2,2]] detection code: both data qubits bit-checked into `p_1`,
    /// phase-checked into `p_2`, one cross-check between the parity qubits.
    pub fn four_two_two() -> Self {
        Self::new(
            BitMatrix::from_rows(2, vec![0b01, 0b01]).unwrap(),
            BitMatrix::from_rows(2, vec![0b10, 0b10]).unwrap(),
            BitMatrix::from_rows(2, vec![0b10, 0b00]).unwrap(),
        )
        .unwrap()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.k + self.m
    }

    pub fn bit_checks(&self) -> &BitMatrix {
        &self.bit_checks
    }

    pub fn phase_checks(&self) -> &BitMatrix {
        &self.phase_checks
    }

    pub fn cross_checks(&self) -> &BitMatrix {
        &self.cross_checks
    }

    pub fn roles(&self) -> Vec<Role> {
        let mut roles = vec![Role::Data; self.k];
        roles.extend(std::iter::repeat(Role::Parity).take(self.m));
        roles
    }

    /// `m_c + m_cᵀ`.
    pub fn cross_symmetric(&self) -> BitMatrix {
        self.cross_checks.add(&self.cross_checks.transpose()).unwrap()
    }

    /// Number of bits in the compact integer encoding.
    pub fn compact_bits(k: usize, m: usize) -> usize {
        2 * k * m + m * (m.saturating_sub(1)) / 2
    }

    /// Compact encoding: `m_b` row-major, then `m_p` row-major, then the
    /// upper triangle of `m_c` row-major (`c_12, c_13, …, c_(m-1)m`).
    pub fn to_index(&self) -> u64 {
        let (k, m) = (self.k, self.m);
        let mut idx = 0u64;
        let mut bit = 0;
        for mat in [&self.bit_checks, &self.phase_checks] {
            for d in 0..k {
                idx |= mat.row(d) << bit;
                bit += m;
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                if self.cross_checks.get(i, j) {
                    idx |= 1 << bit;
                }
                bit += 1;
            }
        }
        idx
    }

    pub fn from_index(k: usize, m: usize, index: u64) -> Result<Self> {
        let bits = Self::compact_bits(k, m);
        if bits > 64 || (bits < 64 && index >> bits != 0) {
            return Err(Error::InvalidTriple(format!("index {index} out of range for shape ({k},{m})")));
        }
        let row_mask = (1u64 << m) - 1;
        let mut bit = 0;
        let mut rows = |count: usize| -> Vec<u64> {
            let out = (0..count).map(|i| index >> (bit + i * m) & row_mask).collect();
            bit += count * m;
            out
        };
        let mb = BitMatrix::from_rows(m, rows(k))?;
        let mp = BitMatrix::from_rows(m, rows(k))?;
        let mut mc = BitMatrix::zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                mc.set(i, j, index >> bit & 1 == 1);
                bit += 1;
            }
        }
        Self::new(mb, mp, mc)
    }
}

/// Encoder rounds: cross-checks, bit-checks, phase-checks; decoder mirrors it.
pub fn build_circuit(t: &AdjacencyTriple, order: EmissionOrder) -> Circuit {
    Circuit::encode_decode(t.roles(), encoder_gates(t, order)).expect("triple shape guarantees valid gates")
}

pub fn encoder_gates(t: &AdjacencyTriple, order: EmissionOrder) -> Vec<Gate> {
    let (k, m) = (t.k, t.m);
    let parity = |j: usize| k + j;
    let mut gates = Vec::with_capacity(cpc_gate_count(t) as usize);

    let mut cross: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    if order == EmissionOrder::ColumnMajor {
        cross.sort_by_key(|&(i, j)| (j, i));
    }
    for (i, j) in cross {
        if t.cross_checks.get(i, j) {
            gates.push(Gate::Cpg(parity(i), parity(j)));
        }
    }

    let cells: Vec<(usize, usize)> = match order {
        EmissionOrder::RowMajor => (0..k).flat_map(|d| (0..m).map(move |j| (d, j))).collect(),
        EmissionOrder::ColumnMajor => (0..m).flat_map(|j| (0..k).map(move |d| (d, j))).collect(),
    };
    for &(d, j) in &cells {
        if t.bit_checks.get(d, j) {
            gates.push(Gate::Cnot { control: d, target: parity(j) });
        }
    }
    for &(d, j) in &cells {
        if t.phase_checks.get(d, j) {
            gates.push(Gate::Cpg(d, parity(j)));
        }
    }
    gates
}

/// `S = E_dx·m_b + E_dz·m_p + E_px + E_pz·m_pᵀ·m_b + E_pz·(m_c + m_cᵀ)` over GF(2).
pub fn syndrome_formula(t: &AdjacencyTriple, e: &ErrorVector) -> Result<Syndrome> {
    let (k, m) = (t.k, t.m);
    if (e.data_x | e.data_z) >> k != 0 || (e.parity_x | e.parity_z) >> m != 0 {
        return Err(Error::DimensionMismatch { expected: k + m, actual: 64 });
    }
    let phase_to_data = t.phase_checks.transpose();
    let via_data = t.bit_checks.left_mul(phase_to_data.left_mul(e.parity_z));
    let bits = t.bit_checks.left_mul(e.data_x)
        ^ t.phase_checks.left_mul(e.data_z)
        ^ e.parity_x
        ^ via_data
        ^ t.cross_symmetric().left_mul(e.parity_z);
    Ok(Syndrome::new(bits, m))
}

/// One row per (qubit, letter) in canonical qubit order, preceded by the no-error row.
pub fn syndrome_table(t: &AdjacencyTriple, errset: ErrorSet) -> Vec<TableRow> {
    let mut rows = vec![TableRow { error: None, syndrome: Syndrome::zero(t.m) }];
    for q in 0..t.n() {
        let sx = syndrome_formula(t, &ErrorVector::single(t.k, q, Letter::X)).unwrap();
        let sz = syndrome_formula(t, &ErrorVector::single(t.k, q, Letter::Z)).unwrap();
        for &letter in errset.letters() {
            let syndrome = match letter {
                Letter::X => sx,
                Letter::Z => sz,
                Letter::Y => sx.xor(&sz),
                Letter::I => unreachable!(),
            };
            rows.push(TableRow { error: Some(SingleError { qubit: q, letter }), syndrome });
        }
    }
    rows
}

/// Checks a list of single-error syndromes against a validity mode.
pub fn syndromes_valid(syndromes: &[Syndrome], mode: ValidityMode) -> bool {
    if syndromes.is_empty() {
        return false;
    }
    if mode != ValidityMode::Distinct && syndromes.iter().any(Syndrome::is_zero) {
        return false;
    }
    if mode == ValidityMode::Detect {
        return true;
    }
    let mut sorted: Vec<u64> = syndromes.iter().map(|s| s.bits).collect();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

pub fn is_valid_code(t: &AdjacencyTriple, errset: ErrorSet, mode: ValidityMode) -> bool {
    let syndromes: Vec<Syndrome> =
        syndrome_table(t, errset).into_iter().filter(|r| r.error.is_some()).map(|r| r.syndrome).collect();
    syndromes_valid(&syndromes, mode)
}

/// One CPC gate per nonzero adjacency entry.
pub fn cpc_gate_count(t: &AdjacencyTriple) -> u32 {
    t.bit_checks.popcount() + t.phase_checks.popcount() + t.cross_checks.popcount()
}

/// JSON form `{n, k, m_b, m_p, m_c}` with each matrix as row strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeJson {
    pub n: usize,
    pub k: usize,
    pub m_b: Vec<String>,
    pub m_p: Vec<String>,
    pub m_c: Vec<String>,
}

impl From<&AdjacencyTriple> for CodeJson {
    fn from(t: &AdjacencyTriple) -> Self {
        CodeJson {
            n: t.n(),
            k: t.k,
            m_b: t.bit_checks.to_row_strings(),
            m_p: t.phase_checks.to_row_strings(),
            m_c: t.cross_checks.to_row_strings(),
        }
    }
}

impl TryFrom<CodeJson> for AdjacencyTriple {
    type Error = Error;

    fn try_from(j: CodeJson) -> Result<Self> {
        if j.k > j.n {
            return Err(Error::InvalidTriple(format!("k = {} exceeds n = {}", j.k, j.n)));
        }
        let m = j.n - j.k;
        if j.m_b.len() != j.k || j.m_p.len() != j.k || j.m_c.len() != m {
            return Err(Error::InvalidTriple("matrix row counts do not match n and k".into()));
        }
        AdjacencyTriple::new(
            BitMatrix::from_row_strings(&j.m_b, m)?,
            BitMatrix::from_row_strings(&j.m_p, m)?,
            BitMatrix::from_row_strings(&j.m_c, m)?,
        )
    }
}

impl Serialize for AdjacencyTriple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AdjacencyTriple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CodeJson::deserialize(d)?;
        AdjacencyTriple::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_two_two_circuit_matches_canonical_order() {
        let t = AdjacencyTriple::four_two_two();
        let c = build_circuit(&t, EmissionOrder::RowMajor);
        // A=0, B=1, p1=2, p2=3
        assert_eq!(
            c.encoder(),
            &[
                Gate::Cpg(2, 3),
                Gate::Cnot { control: 0, target: 2 },
                Gate::Cnot { control: 1, target: 2 },
                Gate::Cpg(0, 3),
                Gate::Cpg(1, 3),
            ]
        );
        assert!(c.is_mirrored());
        assert_eq!(cpc_gate_count(&t), 5);
    }

    #[test]
    fn zero_triple_is_empty_and_invalid() {
        let t = AdjacencyTriple::zero(3, 4);
        assert!(build_circuit(&t, EmissionOrder::RowMajor).gates().is_empty());
        assert_eq!(cpc_gate_count(&t), 0);
        for mode in [ValidityMode::Detect, ValidityMode::Correct, ValidityMode::Distinct] {
            for es in [ErrorSet::Xz, ErrorSet::Xyz] {
                assert!(!is_valid_code(&t, es, mode));
            }
        }
        // Only an X component on a parity qubit still flips its own readout.
        for row in syndrome_table(&t, ErrorSet::Xyz) {
            let flips_parity = row.error.is_some_and(|e| e.qubit >= 3 && e.letter != Letter::Z);
            assert_eq!(row.syndrome.is_zero(), !flips_parity, "{row:?}");
        }
    }

    #[test]
    fn formula_examples() {
        let t = AdjacencyTriple::four_two_two();
        let s = syndrome_formula(&t, &ErrorVector { data_x: 0b01, ..Default::default() }).unwrap();
        assert_eq!(s, Syndrome::from_bits(&[1, 0]));
        let s = syndrome_formula(&t, &ErrorVector { parity_z: 0b10, ..Default::default() }).unwrap();
        assert_eq!(s, Syndrome::from_bits(&[1, 0]));
        assert!(syndrome_formula(&t, &ErrorVector::default()).unwrap().is_zero());
        assert!(syndrome_formula(&t, &ErrorVector { data_x: 0b100, ..Default::default() }).is_err());
    }

    #[test]
    fn four_two_two_validity() {
        let t = AdjacencyTriple::four_two_two();
        assert!(is_valid_code(&t, ErrorSet::Xyz, ValidityMode::Detect));
        assert!(!is_valid_code(&t, ErrorSet::Xz, ValidityMode::Correct));
    }

    #[test]
    fn compact_index_layout() {
        // c_34 is the top bit for the (3,4) shape.
        let t = AdjacencyTriple::from_index(3, 4, 1 << 29).unwrap();
        assert!(t.cross_checks().get(2, 3));
        let t = AdjacencyTriple::from_index(3, 4, 1 << 24).unwrap();
        assert!(t.cross_checks().get(0, 1));
        let t = AdjacencyTriple::from_index(3, 4, 1 << 5).unwrap();
        assert!(t.bit_checks().get(1, 1));
        let t = AdjacencyTriple::from_index(3, 4, 1 << 12).unwrap();
        assert!(t.phase_checks().get(0, 0));
        assert_eq!(AdjacencyTriple::compact_bits(3, 4), 30);
        assert_eq!(AdjacencyTriple::compact_bits(4, 5), 50);
        assert!(AdjacencyTriple::from_index(3, 4, 1 << 30).is_err());
    }

    #[test]
    fn rejects_lower_triangular_cross_checks() {
        let mb = BitMatrix::zeros(1, 2);
        let mc = BitMatrix::from_rows(2, vec![0, 0b01]).unwrap();
        assert!(AdjacencyTriple::new(mb.clone(), mb, mc).is_err());
    }

    #[test]
    fn json_shape() {
        let t = AdjacencyTriple::four_two_two();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":4,"k":2,"m_b":["10","10"],"m_p":["01","01"],"m_c":["01","00"]}"#);
        let back: AdjacencyTriple = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
