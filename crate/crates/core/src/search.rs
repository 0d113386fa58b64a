//! Exhaustive and random discovery of valid CPC codes, canonicalization
//! under qubit relabelling, and distribution statistics.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpc::{cpc_gate_count, AdjacencyTriple, ErrorSet, ValidityMode};
use crate::error::{Error, Result};

/// Largest `k` with `Σ_{j≤(d-1)/2} C(n,j)·e^j · 2^k ≤ 2^n`.
pub fn hamming_bound_kmax(n: u32, d: u32, errset_size: u32) -> Result<u32> {
    if n == 0 || n > 120 {
        return Err(Error::InvalidArgument(format!("n = {n} out of range")));
    }
    if d == 0 || d % 2 == 0 {
        return Err(Error::InvalidArgument(format!("distance must be odd and positive, got {d}")));
    }
    if !(2..=3).contains(&errset_size) {
        return Err(Error::InvalidArgument(format!("error alphabet size must be 2 or 3, got {errset_size}")));
    }
    let t = (d - 1) / 2;
    let mut volume: u128 = 0;
    let mut binom: u128 = 1;
    for j in 0..=t.min(n) {
        if j > 0 {
            binom = binom * (n - j + 1) as u128 / j as u128;
        }
        volume += binom * (errset_size as u128).pow(j);
    }
    let total = 1u128 << n;
    Ok((0..=n).rev().find(|&k| volume << k <= total).unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub k: usize,
    pub m: usize,
    pub errset: ErrorSet,
    pub mode: ValidityMode,
    /// Half-open range of compact indices.
    pub lo: u64,
    pub hi: u64,
    /// Indices per work item; results do not depend on it.
    pub chunk: u64,
}

impl SearchSpec {
    pub fn full(k: usize, m: usize, errset: ErrorSet, mode: ValidityMode) -> Result<Self> {
        let bits = AdjacencyTriple::compact_bits(k, m);
        if bits >= 64 {
            return Err(Error::InvalidArgument(format!("shape ({k},{m}) has {bits} index bits; use random search")));
        }
        Ok(Self { k, m, errset, mode, lo: 0, hi: 1 << bits, chunk: default_chunk(k, m) })
    }

    pub fn with_range(mut self, lo: u64, hi: u64) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.m > 16 || self.k > 16 {
            return Err(Error::InvalidArgument(format!("unsupported shape ({},{})", self.k, self.m)));
        }
        let bits = AdjacencyTriple::compact_bits(self.k, self.m);
        if bits > 63 {
            return Err(Error::InvalidArgument(format!("shape ({},{}) too large for exhaustive search", self.k, self.m)));
        }
        if self.lo > self.hi || self.hi > 1 << bits {
            return Err(Error::InvalidArgument(format!(
                "range {}:{} outside 0:{}",
                self.lo,
                self.hi,
                1u64 << bits
            )));
        }
        if self.chunk == 0 {
            return Err(Error::InvalidArgument("chunk size must be positive".into()));
        }
        Ok(())
    }
}

fn default_chunk(k: usize, m: usize) -> u64 {
    // Whole outer blocks keep the per-block pruning effective.
    (1u64 << (k * m).min(40)).max(1 << 16)
}

/// Precomputed per-shape layout for the bit-sliced validity kernel.
#[derive(Debug, Clone)]
pub struct Kernel {
    k: usize,
    m: usize,
    errset: ErrorSet,
    mode: ValidityMode,
    row_mask: u64,
    inner_bits: usize,
}

/// Syndromes fixed by the high index bits (phase and cross checks).
struct Block {
    /// Rows of `m_p`.
    zd: [u64; 16],
    /// Rows of `m_pᵀ` as masks over data qubits.
    hp: [u64; 16],
    /// Rows of `m_c + m_cᵀ`.
    cross: [u64; 16],
}

impl Kernel {
    pub fn new(k: usize, m: usize, errset: ErrorSet, mode: ValidityMode) -> Result<Self> {
        if k == 0 || m == 0 || k > 16 || m > 16 {
            return Err(Error::InvalidArgument(format!("unsupported shape ({k},{m})")));
        }
        Ok(Self { k, m, errset, mode, row_mask: (1 << m) - 1, inner_bits: k * m })
    }

    fn block(&self, high: u64) -> Block {
        let (k, m) = (self.k, self.m);
        let mut b = Block { zd: [0; 16], hp: [0; 16], cross: [0; 16] };
        for d in 0..k {
            let row = high >> (d * m) & self.row_mask;
            b.zd[d] = row;
            for j in 0..m {
                b.hp[j] |= (row >> j & 1) << d;
            }
        }
        let mut bit = k * m;
        for i in 0..m {
            for j in i + 1..m {
                if high >> bit & 1 == 1 {
                    b.cross[i] |= 1 << j;
                    b.cross[j] |= 1 << i;
                }
                bit += 1;
            }
        }
        b
    }

    /// Whether the syndromes independent of `m_b` already violate the mode.
    fn block_feasible(&self, b: &Block) -> bool {
        let mut s = [0u64; 32];
        let mut len = 0;
        for d in 0..self.k {
            s[len] = b.zd[d];
            len += 1;
        }
        for j in 0..self.m {
            s[len] = 1 << j;
            len += 1;
        }
        check(&s[..len], self.m, self.mode)
    }

    fn inner_valid(&self, b: &Block, low: u64) -> bool {
        let (k, m) = (self.k, self.m);
        let mut xd = [0u64; 16];
        for (d, x) in xd.iter_mut().enumerate().take(k) {
            *x = low >> (d * m) & self.row_mask;
        }
        let mut s = [0u64; 64];
        let mut len = 0;
        let with_y = self.errset == ErrorSet::Xyz;
        for d in 0..k {
            s[len] = xd[d];
            s[len + 1] = b.zd[d];
            len += 2;
            if with_y {
                s[len] = xd[d] ^ b.zd[d];
                len += 1;
            }
        }
        for j in 0..m {
            let mut zp = b.cross[j];
            let mut sel = b.hp[j];
            while sel != 0 {
                zp ^= xd[sel.trailing_zeros() as usize];
                sel &= sel - 1;
            }
            s[len] = 1 << j;
            s[len + 1] = zp;
            len += 2;
            if with_y {
                s[len] = zp ^ (1 << j);
                len += 1;
            }
        }
        check(&s[..len], m, self.mode)
    }

    pub fn is_valid_index(&self, index: u64) -> bool {
        let b = self.block(index >> self.inner_bits);
        self.inner_valid(&b, index & ((1 << self.inner_bits) - 1))
    }

    /// Valid indices in `[lo, hi)`, ascending.
    pub fn scan(&self, lo: u64, hi: u64, out: &mut Vec<u64>) {
        let inner = 1u64 << self.inner_bits;
        let mut i = lo;
        while i < hi {
            let high = i >> self.inner_bits;
            let block_end = ((high + 1) * inner).min(hi);
            let b = self.block(high);
            if self.block_feasible(&b) {
                let base = high * inner;
                for idx in i..block_end {
                    if self.inner_valid(&b, idx - base) {
                        out.push(idx);
                    }
                }
            }
            i = block_end;
        }
    }
}

/// Checks nonzero/distinctness of a syndrome list according to `mode`.
fn check(s: &[u64], m: usize, mode: ValidityMode) -> bool {
    match mode {
        ValidityMode::Detect => s.iter().all(|&x| x != 0),
        ValidityMode::Correct | ValidityMode::Distinct => {
            let allow_zero = mode == ValidityMode::Distinct;
            if m <= 7 {
                let mut seen: u128 = 0;
                for &x in s {
                    if x == 0 && !allow_zero {
                        return false;
                    }
                    let bit = 1u128 << x;
                    if seen & bit != 0 {
                        return false;
                    }
                    seen |= bit;
                }
                true
            } else {
                if !allow_zero && s.contains(&0) {
                    return false;
                }
                let mut v = s.to_vec();
                v.sort_unstable();
                v.windows(2).all(|w| w[0] != w[1])
            }
        }
    }
}

/// Every valid index in the spec's range, ascending; independent of thread count.
pub fn enumerate_indices(spec: &SearchSpec) -> Result<Vec<u64>> {
    spec.validate()?;
    let kernel = Kernel::new(spec.k, spec.m, spec.errset, spec.mode)?;
    let starts: Vec<u64> = (spec.lo..spec.hi).step_by(spec.chunk as usize).collect();
    let parts: Vec<Vec<u64>> = starts
        .par_iter()
        .map(|&s| {
            let mut out = Vec::new();
            kernel.scan(s, (s + spec.chunk).min(spec.hi), &mut out);
            out
        })
        .collect();
    Ok(parts.concat())
}

/// A code plus the metrics filled in by later pipeline stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeRecord {
    pub index: u64,
    pub code: AdjacencyTriple,
    pub cpc_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_total: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_weighted: Option<f64>,
    pub canonical_key: u64,
}

impl CodeRecord {
    pub fn new(code: AdjacencyTriple) -> Self {
        Self {
            index: code.to_index(),
            cpc_count: cpc_gate_count(&code),
            canonical_key: canonical_form(&code),
            code,
            swap_count: None,
            local_count: None,
            l_total: None,
            r_weighted: None,
        }
    }

    pub fn two_qubit_count(&self) -> Option<u32> {
        self.swap_count.map(|s| s + self.cpc_count)
    }
}

/// Lexicographic permutation generator over `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Relabels data qubit `d → sigma[d]` and parity qubit `j → tau[j]`.
pub fn permute_triple(t: &AdjacencyTriple, sigma: &[usize], tau: &[usize]) -> AdjacencyTriple {
    let (k, m) = (t.k(), t.m());
    let mut out = AdjacencyTriple::zero(k, m);
    let (mut mb, mut mp, mut mc) =
        (out.bit_checks().clone(), out.phase_checks().clone(), out.cross_checks().clone());
    for d in 0..k {
        for j in 0..m {
            mb.set(sigma[d], tau[j], t.bit_checks().get(d, j));
            mp.set(sigma[d], tau[j], t.phase_checks().get(d, j));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if t.cross_checks().get(i, j) {
                let (a, b) = (tau[i].min(tau[j]), tau[i].max(tau[j]));
                mc.set(a, b, true);
            }
        }
    }
    out = AdjacencyTriple::new(mb, mp, mc).expect("permutation preserves shape");
    out
}

/// Orbit representative under `S_k × S_m`: the smallest compact index.
pub fn canonical_form(t: &AdjacencyTriple) -> u64 {
    CanonicalTable::new(t.k(), t.m()).key(t.to_index())
}

/// Index-level permutation tables so orbit keys need no matrix allocation.
#[derive(Debug, Clone)]
pub struct CanonicalTable {
    k: usize,
    m: usize,
    /// For every (σ, τ): image bit position of each source bit.
    maps: Vec<Vec<u8>>,
}

impl CanonicalTable {
    pub fn new(k: usize, m: usize) -> Self {
        let bits = AdjacencyTriple::compact_bits(k, m);
        assert!(bits <= 64, "shape too large for compact keys");
        let mut cross_pos = vec![vec![0u8; m]; m];
        let mut bit = 2 * k * m;
        for i in 0..m {
            for j in i + 1..m {
                cross_pos[i][j] = bit as u8;
                cross_pos[j][i] = bit as u8;
                bit += 1;
            }
        }
        let mut maps = Vec::new();
        for sigma in permutations(k) {
            for tau in permutations(m) {
                let mut map = vec![0u8; bits];
                for d in 0..k {
                    for j in 0..m {
                        map[d * m + j] = (sigma[d] * m + tau[j]) as u8;
                        map[k * m + d * m + j] = (k * m + sigma[d] * m + tau[j]) as u8;
                    }
                }
                for i in 0..m {
                    for j in i + 1..m {
                        map[cross_pos[i][j] as usize] = cross_pos[tau[i]][tau[j]];
                    }
                }
                maps.push(map);
            }
        }
        Self { k, m, maps }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.k, self.m)
    }

    pub fn group_order(&self) -> usize {
        self.maps.len()
    }

    pub fn key(&self, index: u64) -> u64 {
        self.maps
            .iter()
            .map(|map| {
                let mut out = 0u64;
                let mut bits = index;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    out |= 1 << map[b];
                    bits &= bits - 1;
                }
                out
            })
            .min()
            .unwrap_or(index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CpcCount,
    SwapCount,
    TwoQubitCount,
    LocalCount,
    LTotal,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::CpcCount => "cpc_count",
            Metric::SwapCount => "swap_count",
            Metric::TwoQubitCount => "two_qubit_count",
            Metric::LocalCount => "local_count",
            Metric::LTotal => "l_total",
        }
    }

    pub fn of(self, r: &CodeRecord) -> Option<u32> {
        match self {
            Metric::CpcCount => Some(r.cpc_count),
            Metric::SwapCount => r.swap_count,
            Metric::TwoQubitCount => r.two_qubit_count(),
            Metric::LocalCount => r.local_count,
            Metric::LTotal => r.l_total,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cpc_count" | "cpc" => Ok(Metric::CpcCount),
            "swap_count" | "swap" => Ok(Metric::SwapCount),
            "two_qubit_count" | "two_qubit" | "two-qubit" => Ok(Metric::TwoQubitCount),
            "local_count" | "local" => Ok(Metric::LocalCount),
            "l_total" | "total" => Ok(Metric::LTotal),
            other => Err(Error::Parse(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Histogram {
    pub metric: String,
    pub bins: BTreeMap<u32, u64>,
}

impl Histogram {
    pub fn from_values(metric: &str, values: impl IntoIterator<Item = u32>) -> Self {
        let mut bins = BTreeMap::new();
        for v in values {
            *bins.entry(v).or_insert(0) += 1;
        }
        Self { metric: metric.to_string(), bins }
    }

    pub fn total(&self) -> u64 {
        self.bins.values().sum()
    }

    pub fn min(&self) -> Option<u32> {
        self.bins.keys().next().copied()
    }

    pub fn count_at(&self, bin: u32) -> u64 {
        self.bins.get(&bin).copied().unwrap_or(0)
    }

    /// Lower middle element for even totals.
    pub fn median(&self) -> Option<u32> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let target = (total - 1) / 2;
        let mut seen = 0;
        for (&bin, &count) in &self.bins {
            seen += count;
            if seen > target {
                return Some(bin);
            }
        }
        None
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin,count\n");
        for (bin, count) in &self.bins {
            s.push_str(&format!("{bin},{count}\n"));
        }
        s
    }
}

pub fn histogram(records: &[CodeRecord], metric: Metric) -> Result<Histogram> {
    let mut values = Vec::with_capacity(records.len());
    for r in records {
        values.push(metric.of(r).ok_or_else(|| {
            Error::InvalidArgument(format!("metric {} not populated for code {}", metric.name(), r.index))
        })?);
    }
    Ok(Histogram::from_values(metric.name(), values))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total_checked: u64,
    pub valid_count: u64,
    pub min: Option<u32>,
    pub median: Option<u32>,
    pub class_count: u64,
}

/// Summary over cpc counts with orbit classes counted by canonical key.
pub fn summarize(total_checked: u64, records: &[CodeRecord]) -> Summary {
    let h = Histogram::from_values("cpc_count", records.iter().map(|r| r.cpc_count));
    let classes: HashSet<u64> = records.iter().map(|r| r.canonical_key).collect();
    Summary {
        total_checked,
        valid_count: records.len() as u64,
        min: h.min(),
        median: h.median(),
        class_count: classes.len() as u64,
    }
}

/// Builds records for a list of valid indices, in parallel, order kept.
pub fn records_for(k: usize, m: usize, indices: &[u64]) -> Result<Vec<CodeRecord>> {
    let table = CanonicalTable::new(k, m);
    indices
        .par_iter()
        .map(|&i| {
            let code = AdjacencyTriple::from_index(k, m, i)?;
            Ok(CodeRecord {
                index: i,
                cpc_count: cpc_gate_count(&code),
                canonical_key: table.key(i),
                code,
                swap_count: None,
                local_count: None,
                l_total: None,
                r_weighted: None,
            })
        })
        .collect()
}

/// Seeded random sampling of the index space; stream `w` is drawn from
/// `(seed, w)` so the result is independent of the thread count.
pub fn random_search(
    k: usize,
    m: usize,
    errset: ErrorSet,
    mode: ValidityMode,
    samples: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    const STREAMS: u64 = 64;
    let bits = AdjacencyTriple::compact_bits(k, m);
    if bits > 64 {
        return Err(Error::InvalidArgument(format!("shape ({k},{m}) needs {bits} index bits")));
    }
    let kernel = Kernel::new(k, m, errset, mode)?;
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let parts: Vec<Vec<u64>> = (0..STREAMS)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w);
            let quota = samples / STREAMS + u64::from(w < samples % STREAMS);
            (0..quota).map(|_| rng.gen::<u64>() & mask).filter(|&i| kernel.is_valid_index(i)).collect()
        })
        .collect();
    Ok(parts.concat())
}
