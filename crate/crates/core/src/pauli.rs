//! Packed n-qubit Pauli operators with an exact phase.
//!
//! A [`PauliString`] stores `i^phase * (sigma_0 ⊗ sigma_1 ⊗ ...)` where each
//! `sigma_q` is one of I, X, Y, Z selected by the bit pair `(x_q, z_q)`.
//! The pair `(1, 1)` denotes the Hermitian Y, not the product XZ.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register a packed Pauli can describe.
pub const MAX_QUBITS: usize = 64;

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    xbits: u64,
    zbits: u64,
    /// Exponent of `i`, always reduced mod 4.
    phase: u8,
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits are supported");
        Self { n, xbits: 0, zbits: 0, phase: 0 }
    }

    pub fn from_bits(n: usize, xbits: u64, zbits: u64, phase: u8) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("{n} qubits exceeds the packed limit")));
        }
        let m = mask(n);
        if xbits & !m != 0 || zbits & !m != 0 {
            return Err(Error::DimensionMismatch { expected: n, actual: 64 - (xbits | zbits).leading_zeros() as usize });
        }
        Ok(Self { n, xbits, zbits, phase: phase & 3 })
    }

    pub fn single(n: usize, qubit: usize, letter: Letter) -> Result<Self> {
        let mut p = Self::identity(n);
        p.set(qubit, letter)?;
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn xbits(&self) -> u64 {
        self.xbits
    }

    pub fn zbits(&self) -> u64 {
        self.zbits
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        debug_assert!(qubit < self.n);
        Letter::from_bits(self.xbits >> qubit & 1 == 1, self.zbits >> qubit & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, letter: Letter) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { qubit, n: self.n });
        }
        let (x, z) = letter.bits();
        let bit = 1u64 << qubit;
        self.xbits = if x { self.xbits | bit } else { self.xbits & !bit };
        self.zbits = if z { self.zbits | bit } else { self.zbits & !bit };
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.xbits == 0 && self.zbits == 0
    }

    pub fn weight(&self) -> u32 {
        (self.xbits | self.zbits).count_ones()
    }

    pub fn support(&self) -> u64 {
        self.xbits | self.zbits
    }

    /// Same Pauli ignoring phase.
    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        self.n == other.n && self.xbits == other.xbits && self.zbits == other.zbits
    }

    /// Product `self · other` with the phase tracked exactly.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: other.n });
        }
        let (ax, az, bx, bz) = (self.xbits, self.zbits, other.xbits, other.zbits);
        let (a_x, a_y, a_z) = (ax & !az, ax & az, !ax & az);
        let (b_x, b_y, b_z) = (bx & !bz, bx & bz, !bx & bz);
        // XY = iZ, YZ = iX, ZX = iY; reversed order picks up -i.
        let plus = ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
        let minus = ((a_x & b_z) | (a_y & b_x) | (a_z & b_y)).count_ones();
        let phase = (self.phase as u32 + other.phase as u32 + plus + 3 * minus) % 4;
        Ok(Self { n: self.n, xbits: ax ^ bx, zbits: az ^ bz, phase: phase as u8 })
    }

    /// True iff the two operators commute (even symplectic product).
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: other.n });
        }
        let s = (self.xbits & other.zbits) ^ (self.zbits & other.xbits);
        Ok(s.count_ones() % 2 == 0)
    }

    /// Restrict to the qubits selected by `qubits`, in that order.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut out = Self::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.xbits |= (self.xbits >> q & 1) << i;
            out.zbits |= (self.zbits >> q & 1) << i;
        }
        out
    }

    pub(crate) fn set_raw(&mut self, xbits: u64, zbits: u64, phase: u8) {
        self.xbits = xbits;
        self.zbits = zbits;
        self.phase = phase & 3;
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{sign}")?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

/// Parses strings like `XIZY`, `-iXZ` or `+YY`; qubit 0 is the leftmost letter.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        if n > MAX_QUBITS {
            return Err(Error::Parse(format!("{n} letters exceeds the packed limit")));
        }
        let mut p = Self::identity(n);
        for (q, c) in body.chars().enumerate() {
            let letter = match c {
                'I' | '_' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                other => return Err(Error::Parse(format!("unexpected Pauli letter {other:?}"))),
            };
            p.set(q, letter)?;
        }
        p.phase = phase;
        Ok(p)
    }
}
