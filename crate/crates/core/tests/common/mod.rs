#![allow(dead_code)]

use cpc_core::gate::kind_matrix;
use cpc_core::{Gate, Letter, PauliString};
use num_complex::Complex64;
use rand::Rng;

pub type State = Vec<Complex64>;

/// Dense state-vector update; the gate's first qubit is the most significant
/// bit of the matrix index.
pub fn apply_gate(g: &Gate, psi: &State) -> State {
    let m = kind_matrix(g.kind());
    let qs = g.qubits();
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (i, a) in psi.iter().enumerate() {
        if *a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let col = qs.iter().fold(0, |acc, &q| acc * 2 + (i >> q & 1));
        for (row, r) in m.iter().enumerate() {
            let mut j = i;
            for (s, &q) in qs.iter().enumerate() {
                let bit = row >> (qs.len() - 1 - s) & 1;
                j = (j & !(1 << q)) | bit << q;
            }
            out[j] += r[col] * a;
        }
    }
    out
}

pub fn apply_gates(gates: &[Gate], psi: &State) -> State {
    gates.iter().fold(psi.clone(), |s, g| apply_gate(g, &s))
}

pub fn apply_pauli(p: &PauliString, psi: &State) -> State {
    let i = Complex64::new(0.0, 1.0);
    let mut out = psi.clone();
    for q in 0..p.num_qubits() {
        let prev = out.clone();
        for (idx, slot) in out.iter_mut().enumerate() {
            let b = idx >> q & 1;
            let flipped = prev[idx ^ (1 << q)];
            *slot = match p.letter(q) {
                Letter::I => prev[idx],
                Letter::X => flipped,
                Letter::Z => if b == 0 { prev[idx] } else { -prev[idx] },
                // Y|0> = i|1>, Y|1> = -i|0>
                Letter::Y => if b == 1 { i * flipped } else { -i * flipped },
            };
        }
    }
    let ph = i.powu(p.phase() as u32);
    out.iter().map(|a| a * ph).collect()
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> State {
    let v: State = (0..1 << n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|a| a / norm).collect()
}

pub fn basis_state(n: usize, index: usize) -> State {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
    v[index] = Complex64::new(1.0, 0.0);
    v
}

pub fn close(a: &State, b: &State) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-9)
}

pub fn random_pauli(n: usize, rng: &mut impl Rng) -> PauliString {
    let mask = (1u64 << n) - 1;
    PauliString::from_bits(n, rng.gen::<u64>() & mask, rng.gen::<u64>() & mask, rng.gen_range(0..4)).unwrap()
}

/// Uniform over every gate kind the frame tables cover.
pub fn random_gate(n: usize, rng: &mut impl Rng) -> Gate {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    match rng.gen_range(0..9) {
        0 => Gate::Cnot { control: a, target: b },
        1 => Gate::Cpg(a, b),
        2 => Gate::H(a),
        3 => Gate::P(a),
        4 => Gate::Pdag(a),
        5 => Gate::Z(a),
        6 => Gate::X(a),
        7 => Gate::Sp(a, b),
        _ => Gate::Swap(a, b),
    }
}
