//! Biased Pauli noise on CPC memories: single cycles, exact and sampled
//! rate estimates with post-selection, and a single-fault propagation scan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{propagate, readout, Circuit, Role, Syndrome};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::pauli::{Letter, PauliString};

/// Independent X and Z flips per qubit per wait stage; Y arises when both fire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_x: f64,
    pub p_z: f64,
}

impl NoiseModel {
    pub fn new(p_x: f64, p_z: f64) -> Result<Self> {
        let ok = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        if !ok(p_x) || !ok(p_z) || p_x + p_z > 1.0 {
            return Err(Error::InvalidArgument(format!("invalid noise probabilities p_x={p_x}, p_z={p_z}")));
        }
        Ok(Self { p_x, p_z })
    }

    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }
}

/// Rank-tracked GF(2) span of data-register Paulis, phases ignored.
#[derive(Debug, Clone, Default)]
pub struct StabilizerSpan {
    /// Reduced basis as `x | z << 64`, each with a distinct pivot.
    basis: Vec<u128>,
    /// Generators as given, for coset enumeration.
    gens: Vec<u128>,
    k: usize,
}

fn pack(p: &PauliString) -> u128 {
    p.xbits() as u128 | (p.zbits() as u128) << 64
}

fn packed_weight(v: u128) -> u32 {
    ((v as u64) | (v >> 64) as u64).count_ones()
}

impl StabilizerSpan {
    pub fn new(k: usize, stabilizers: &[PauliString]) -> Result<Self> {
        let mut s = Self { basis: Vec::new(), gens: Vec::new(), k };
        for p in stabilizers {
            if p.num_qubits() != k {
                return Err(Error::DimensionMismatch { expected: k, actual: p.num_qubits() });
            }
            s.gens.push(pack(p));
            let r = s.reduce(pack(p));
            if r != 0 {
                s.basis.push(r);
            }
        }
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn reduce(&self, mut v: u128) -> u128 {
        for &b in &self.basis {
            let pivot = 127 - b.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= b;
            }
        }
        v
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.reduce(pack(p)) == 0
    }

    /// Smallest weight of `p·s` over the span.
    pub fn min_weight(&self, p: &PauliString) -> u32 {
        let v = pack(p);
        let r = self.basis.len().min(20);
        (0u32..1 << r)
            .map(|mask| {
                let mut w = v;
                for (i, &b) in self.basis.iter().take(r).enumerate() {
                    if mask >> i & 1 == 1 {
                        w ^= b;
                    }
                }
                packed_weight(w)
            })
            .min()
            .unwrap_or_else(|| packed_weight(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleOutcome {
    pub syndrome: Syndrome,
    /// Final frame on the data qubits, in data-qubit order.
    pub residual: PauliString,
    pub logical_failure: bool,
}

fn data_residual(c: &Circuit, frame: &PauliString) -> PauliString {
    let pos = c.final_positions();
    let qs: Vec<usize> = c.data_qubits().iter().map(|&q| pos[q]).collect();
    frame.restrict(&qs)
}

/// One encode–wait–decode cycle with `e` injected at the wait stage.
pub fn run_cycle(c: &Circuit, stabs: &StabilizerSpan, e: &PauliString) -> Result<CycleOutcome> {
    let w = c.wait_marker().ok_or(Error::MissingWaitMarker)?;
    let k = c.data_qubits().len();
    if stabs.k() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: stabs.k() });
    }
    let frame = propagate(c, e, w)?;
    let residual = data_residual(c, &frame);
    Ok(CycleOutcome { syndrome: readout(c, &frame), logical_failure: !stabs.contains(&residual), residual })
}

/// Single-error lookup: syndrome → data residual of the error that produces it.
#[derive(Debug, Clone)]
pub struct LookupDecoder {
    table: std::collections::HashMap<u64, PauliString>,
}

impl LookupDecoder {
    /// First error in qubit-then-letter order claims each syndrome.
    pub fn new(c: &Circuit, letters: &[Letter]) -> Result<Self> {
        let n = c.n_qubits();
        let w = c.wait_marker().ok_or(Error::MissingWaitMarker)?;
        let mut table = std::collections::HashMap::new();
        for q in 0..n {
            for &l in letters {
                let frame = propagate(c, &PauliString::single(n, q, l)?, w)?;
                let s = readout(c, &frame);
                if !s.is_zero() {
                    table.entry(s.bits).or_insert_with(|| data_residual(c, &frame));
                }
            }
        }
        Ok(Self { table })
    }

    pub fn correct(&self, outcome: &CycleOutcome, stabs: &StabilizerSpan) -> bool {
        let fixed = match self.table.get(&outcome.syndrome.bits) {
            Some(r) => outcome.residual.mul(r).expect("same data register"),
            None => outcome.residual,
        };
        !stabs.contains(&fixed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Estimation {
    /// All patterns with at most this many elementary X/Z flips.
    Exact { max_weight: u32 },
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateEstimate {
    pub raw_failure_rate: f64,
    pub postselected_failure_rate: f64,
    #[serde(rename = "yield")]
    pub yield_rate: f64,
    /// Failure rate after lookup correction, when a decoder was supplied.
    pub corrected_failure_rate: Option<f64>,
    /// Probability mass covered: enumerated mass (exact) or 1 (sampled).
    pub mass: f64,
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    total: f64,
    fail: f64,
    zero: f64,
    zero_fail: f64,
    corrected_fail: f64,
    shots: u64,
}

impl Tally {
    fn add(&mut self, weight: f64, o: &CycleOutcome, corrected_fail: bool) {
        self.total += weight;
        self.shots += 1;
        if o.logical_failure {
            self.fail += weight;
        }
        if o.syndrome.is_zero() {
            self.zero += weight;
            if o.logical_failure {
                self.zero_fail += weight;
            }
        }
        if corrected_fail {
            self.corrected_fail += weight;
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.total += o.total;
        self.fail += o.fail;
        self.zero += o.zero;
        self.zero_fail += o.zero_fail;
        self.corrected_fail += o.corrected_fail;
        self.shots += o.shots;
        self
    }
}

/// Streams drawn from `(seed, stream)`; the count is fixed so results do not
/// depend on the thread count.
const SAMPLE_STREAMS: u64 = 64;

pub fn estimate_rates(
    c: &Circuit,
    stabs: &StabilizerSpan,
    nm: &NoiseModel,
    how: Estimation,
    decoder: Option<&LookupDecoder>,
) -> Result<RateEstimate> {
    let n = c.n_qubits();
    c.wait_marker().ok_or(Error::MissingWaitMarker)?;
    let nm = NoiseModel::new(nm.p_x, nm.p_z)?;
    let run = |x: u64, z: u64| -> Result<(CycleOutcome, bool)> {
        let e = PauliString::from_bits(n, x, z, 0)?;
        let o = run_cycle(c, stabs, &e)?;
        let cf = decoder.is_some_and(|d| d.correct(&o, stabs));
        Ok((o, cf))
    };
    let tally = match how {
        Estimation::Exact { max_weight } => {
            let mut t = Tally::default();
            for (x, z) in patterns(n, max_weight) {
                let nx = x.count_ones() as i32;
                let nz = z.count_ones() as i32;
                let prob = nm.p_x.powi(nx)
                    * (1.0 - nm.p_x).powi(n as i32 - nx)
                    * nm.p_z.powi(nz)
                    * (1.0 - nm.p_z).powi(n as i32 - nz);
                let (o, cf) = run(x, z)?;
                t.add(prob, &o, cf);
            }
            t
        }
        Estimation::Sampled { shots, seed } => {
            if shots == 0 {
                return Err(Error::InvalidArgument("shots must be at least 1".into()));
            }
            let parts: Vec<Result<Tally>> = (0..SAMPLE_STREAMS)
                .into_par_iter()
                .map(|stream| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(stream);
                    let quota = shots / SAMPLE_STREAMS + u64::from(stream < shots % SAMPLE_STREAMS);
                    let mut t = Tally::default();
                    for _ in 0..quota {
                        let (mut x, mut z) = (0u64, 0u64);
                        for q in 0..n {
                            if rng.gen::<f64>() < nm.p_x {
                                x |= 1 << q;
                            }
                            if rng.gen::<f64>() < nm.p_z {
                                z |= 1 << q;
                            }
                        }
                        let (o, cf) = run(x, z)?;
                        t.add(1.0, &o, cf);
                    }
                    Ok(t)
                })
                .collect();
            let mut t = Tally::default();
            for p in parts {
                t = t.merge(p?);
            }
            let total = t.total;
            Tally {
                total: 1.0,
                fail: t.fail / total,
                zero: t.zero / total,
                zero_fail: t.zero_fail / total,
                corrected_fail: t.corrected_fail / total,
                shots: t.shots,
            }
        }
    };
    Ok(RateEstimate {
        raw_failure_rate: tally.fail,
        postselected_failure_rate: if tally.zero > 0.0 { tally.zero_fail / tally.zero } else { 0.0 },
        yield_rate: tally.zero,
        corrected_failure_rate: decoder.map(|_| tally.corrected_fail),
        mass: tally.total,
        shots: tally.shots,
    })
}

/// Every `(x, z)` flip pattern on `n` qubits with at most `w` set bits in total.
fn patterns(n: usize, w: u32) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let bits = 2 * n;
    let mut stack: Vec<(usize, u128, u32)> = vec![(0, 0, 0)];
    while let Some((next, v, count)) = stack.pop() {
        out.push(((v as u64) & mask(n), (v >> n) as u64 & mask(n)));
        if count < w {
            for b in next..bits {
                stack.push((b + 1, v | 1 << b, count + 1));
            }
        }
    }
    out.sort_unstable();
    out
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A single-qubit fault that reaches the data register undetected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultLocation {
    /// The fault acts right after this gate.
    pub after_gate: usize,
    /// Position the fault acts on.
    pub qubit: usize,
    pub letter: Letter,
    /// Data-register weight after reduction by the input stabilizers.
    pub weight: u32,
}

/// Which qubits can fault after a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultSites {
    /// Only the qubits the gate acted on.
    #[default]
    GateQubits,
    /// Every qubit.
    AllQubits,
}

/// Inserts X, Y and Z after every gate and reports the faults that leave a
/// data error of weight ≥ 2 (modulo the input stabilizers) with a zero syndrome.
pub fn fault_scan(c: &Circuit, stabs: &StabilizerSpan, sites: FaultSites) -> Result<Vec<FaultLocation>> {
    let n = c.n_qubits();
    let mut out = Vec::new();
    for (i, g) in c.gates().iter().enumerate() {
        let qubits: Vec<usize> = match sites {
            FaultSites::GateQubits => g.qubits(),
            FaultSites::AllQubits => (0..n).collect(),
        };
        for q in qubits {
            for letter in Letter::NON_IDENTITY {
                let frame = propagate(c, &PauliString::single(n, q, letter)?, i + 1)?;
                if !readout(c, &frame).is_zero() {
                    continue;
                }
                let weight = stabs.min_weight(&data_residual(c, &frame));
                if weight >= 2 {
                    out.push(FaultLocation { after_gate: i, qubit: q, letter, weight });
                }
            }
        }
    }
    Ok(out)
}

/// Stabilizers of the `|+⟩_A |0⟩_B` input used with [`hardened_four_two_two`].
pub fn plus_zero_stabilizers() -> StabilizerSpan {
    let x_a = PauliString::single(2, 0, Letter::X).expect("two qubits");
    let z_b = PauliString::single(2, 1, Letter::Z).expect("two qubits");
    StabilizerSpan::new(2, &[x_a, z_b]).expect("two qubits")
}

/// The [[4,2,2]] memory specialised to a `|+⟩_A |0⟩_B` input on a bow-tie
/// device with A, B, p1, p2 on physical qubits 3, 0, 2, 1.
///
/// The encoder applies CPG(p1,p2), CPG(A,p2), CNOT(A→p1), CPG(B,p2),
/// CNOT(B→p1). CPG(A,p2) then acts trivially because A is still in `|+⟩`, so
/// it is dropped; that pair is not coupled on the device. The decoder mirrors
/// the full encoder with a SWAP(p1,p2) placed before the decoder's CPG(A,p2),
/// which brings p2 next to A.
pub fn hardened_four_two_two() -> Circuit {
    let (a, b, p1, p2) = (0, 1, 2, 3);
    let enc = [
        Gate::Cpg(p1, p2),
        Gate::Cpg(a, p2),
        Gate::Cnot { control: a, target: p1 },
        Gate::Cpg(b, p2),
        Gate::Cnot { control: b, target: p1 },
    ];
    let mut gates: Vec<Gate> = enc.iter().copied().filter(|g| *g != Gate::Cpg(a, p2)).collect();
    let wait = gates.len();
    let mut swapped = false;
    for g in enc.iter().rev() {
        if *g == Gate::Cpg(a, p2) {
            gates.push(Gate::Swap(p1, p2));
            swapped = true;
        }
        let g = g.mirror();
        gates.push(if swapped { g.remap(|q| [a, b, p2, p1][q]) } else { g });
    }
    Circuit::from_gates(vec![Role::Data, Role::Data, Role::Parity, Role::Parity], gates, Some(wait))
        .expect("fixed circuit is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_counts() {
        // n = 4: 8 elementary flips, C(8,0)+C(8,1)+C(8,2) = 37.
        assert_eq!(patterns(4, 2).len(), 37);
        assert_eq!(patterns(4, 0), vec![(0, 0)]);
    }

    #[test]
    fn span_membership_and_weight() {
        let s = StabilizerSpan::new(2, &["XI".parse().unwrap(), "IZ".parse().unwrap()]).unwrap();
        assert!(s.contains(&"XZ".parse().unwrap()));
        assert!(s.contains(&"-XI".parse().unwrap()));
        assert!(!s.contains(&"ZI".parse().unwrap()));
        assert_eq!(s.min_weight(&"ZZ".parse().unwrap()), 1);
        assert_eq!(s.min_weight(&"YX".parse().unwrap()), 2);
        assert!(StabilizerSpan::new(3, &["XI".parse().unwrap()]).is_err());
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(0.6, 0.6).is_err());
        assert!(NoiseModel::new(-0.1, 0.0).is_err());
        assert!(NoiseModel::new(0.1, 0.2).is_ok());
    }
    fn four_two_two() -> Circuit {
        crate::cpc::build_circuit(&crate::cpc::AdjacencyTriple::four_two_two(), Default::default())
    }

    #[test]
    fn single_errors_on_plus_zero() {
        let c = four_two_two();
        let s = plus_zero_stabilizers();
        let xa = run_cycle(&c, &s, &"XIII".parse().unwrap()).unwrap();
        assert_eq!(xa.syndrome, Syndrome::from_bits(&[1, 0]));
        assert!(!xa.logical_failure);
        let za = run_cycle(&c, &s, &"ZIII".parse().unwrap()).unwrap();
        assert_eq!(za.syndrome, Syndrome::from_bits(&[0, 1]));
        assert!(za.logical_failure);
    }

    #[test]
    fn weight_one_never_fails_after_postselection() {
        let c = four_two_two();
        let nm = NoiseModel::symmetric(0.01).unwrap();
        let r = estimate_rates(&c, &plus_zero_stabilizers(), &nm, Estimation::Exact { max_weight: 1 }, None).unwrap();
        assert_eq!(r.postselected_failure_rate, 0.0);
        assert!(r.raw_failure_rate > 0.0);
    }

    #[test]
    fn noiseless_yield_is_one() {
        let c = four_two_two();
        let nm = NoiseModel::symmetric(0.0).unwrap();
        let r = estimate_rates(&c, &plus_zero_stabilizers(), &nm, Estimation::Exact { max_weight: 2 }, None).unwrap();
        assert_eq!((r.yield_rate, r.raw_failure_rate), (1.0, 0.0));
    }

    #[test]
    fn rate_scaling() {
        let c = four_two_two();
        let s = plus_zero_stabilizers();
        let at = |p| {
            estimate_rates(&c, &s, &NoiseModel::symmetric(p).unwrap(), Estimation::Exact { max_weight: 4 }, None).unwrap()
        };
        let (lo, hi) = (at(1e-3), at(2e-3));
        let post = hi.postselected_failure_rate / lo.postselected_failure_rate;
        let raw = hi.raw_failure_rate / lo.raw_failure_rate;
        assert!((post - 4.0).abs() < 0.8, "{post}");
        assert!((raw - 2.0).abs() < 0.2, "{raw}");
    }

    #[test]
    fn sampling_is_seeded() {
        let c = four_two_two();
        let s = plus_zero_stabilizers();
        let nm = NoiseModel::symmetric(0.05).unwrap();
        let how = Estimation::Sampled { shots: 5000, seed: 7 };
        let a = estimate_rates(&c, &s, &nm, how, None).unwrap();
        assert_eq!(a, estimate_rates(&c, &s, &nm, how, None).unwrap());
        assert_eq!(a.shots, 5000);
        let exact = estimate_rates(&c, &s, &nm, Estimation::Exact { max_weight: 8 }, None).unwrap();
        assert!((a.yield_rate - exact.yield_rate).abs() < 0.03);
    }
}
