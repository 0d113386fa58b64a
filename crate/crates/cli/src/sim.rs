//! Noise-study inputs: which memory circuit, which stabilizers, which channel.

use std::fmt::Write;

use cpc_core::cpc::{build_circuit, AdjacencyTriple, EmissionOrder};
use cpc_core::noisesim::{
    estimate_rates, hardened_four_two_two, Estimation, LookupDecoder, NoiseModel, StabilizerSpan,
};
use cpc_core::search::CodeRecord;
use cpc_core::{BitMatrix, Circuit, ErrorSet, Letter, PauliString};

use crate::error::{CliError, CliResult};

pub struct Memory {
    pub circuit: Circuit,
    pub stabilizers: StabilizerSpan,
}

fn four_two_two_without_cross_check() -> Circuit {
    let t = AdjacencyTriple::four_two_two();
    let k = t.k();
    let bare = AdjacencyTriple::new(t.bit_checks().clone(), t.phase_checks().clone(), BitMatrix::zeros(k, k))
        .expect("zero cross checks are upper triangular");
    build_circuit(&bare, EmissionOrder::RowMajor)
}

/// `builtin:*` names or a file holding a code JSON or a code record.
/// Stabilizers default to `XI,IZ` for the built-in [[4,2,2]] circuits and to
/// Z on every data qubit otherwise.
pub fn load_memory(code: &str, stabs: Option<&str>) -> CliResult<Memory> {
    let (circuit, default) = match code {
        "builtin:422" => (build_circuit(&AdjacencyTriple::four_two_two(), EmissionOrder::RowMajor), Some("XI,IZ")),
        "builtin:422-hardened" => (hardened_four_two_two(), Some("XI,IZ")),
        "builtin:422-nocross" => (four_two_two_without_cross_check(), Some("XI,IZ")),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read code file {path}: {e}")))?;
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
            let t = serde_json::from_str::<AdjacencyTriple>(first)
                .or_else(|_| serde_json::from_str::<CodeRecord>(first).map(|r| r.code))
                .map_err(|e| CliError::Data(format!("{path}: not a code or code record: {e}")))?;
            (build_circuit(&t, EmissionOrder::RowMajor), None)
        }
    };
    let k = circuit.data_qubits().len();
    let gens: Vec<PauliString> = match stabs.or(default) {
        Some(s) if s.trim().is_empty() => Vec::new(),
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse::<PauliString>().map_err(|e| CliError::Config(format!("stabilizer {p:?}: {e}"))))
            .collect::<CliResult<_>>()?,
        None => (0..k).map(|q| PauliString::single(k, q, Letter::Z).expect("in range")).collect(),
    };
    let stabilizers = StabilizerSpan::new(k, &gens)?;
    Ok(Memory { circuit, stabilizers })
}

/// `(p_x, p_z)` pairs: the symmetric sweep, or one biased point.
pub fn noise_points(p: &[f64], px: Option<f64>, pz: Option<f64>) -> CliResult<Vec<NoiseModel>> {
    let points = match (p.is_empty(), px, pz) {
        (false, None, None) => p.iter().map(|&v| NoiseModel::symmetric(v)).collect::<Result<Vec<_>, _>>()?,
        (true, Some(_), _) | (true, _, Some(_)) => vec![NoiseModel::new(px.unwrap_or(0.0), pz.unwrap_or(0.0))?],
        (true, None, None) => return Err(CliError::Config("give --p or --px/--pz".into())),
        _ => return Err(CliError::Config("--p cannot be combined with --px/--pz".into())),
    };
    Ok(points)
}

pub fn estimation(shots: Option<u64>, exact_weight: Option<u32>, seed: u64) -> CliResult<Estimation> {
    match (shots, exact_weight) {
        (Some(0), _) => Err(CliError::Config("--shots must be at least 1".into())),
        (Some(shots), None) => Ok(Estimation::Sampled { shots, seed }),
        (None, Some(w)) => Ok(Estimation::Exact { max_weight: w }),
        (None, None) => Ok(Estimation::Exact { max_weight: 2 }),
        (Some(_), Some(_)) => Err(CliError::Config("--shots and --exact-weight are exclusive".into())),
    }
}

/// CSV with one row per noise point; `p` is `p_x`, and a `corrected` column
/// is added when lookup correction is on.
pub fn rate_table(m: &Memory, points: &[NoiseModel], how: Estimation, lookup: bool) -> CliResult<String> {
    let decoder = lookup.then(|| LookupDecoder::new(&m.circuit, ErrorSet::Xz.letters())).transpose()?;
    let mut out = String::from(if lookup { "p,raw,postselected,yield,corrected\n" } else { "p,raw,postselected,yield\n" });
    for nm in points {
        let r = estimate_rates(&m.circuit, &m.stabilizers, nm, how, decoder.as_ref())?;
        write!(out, "{},{},{},{}", nm.p_x, r.raw_failure_rate, r.postselected_failure_rate, r.yield_rate).unwrap();
        if let Some(c) = r.corrected_failure_rate {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}
