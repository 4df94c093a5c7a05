//! JSON wire formats. Complex scalars are `[re, im]` pairs; matrices are
//! `{"rows", "cols", "entries"}` with row-major nested entries; sequences
//! are `{"dim", "vectors"}`; symbols add a `"kind"` tag plus constructor
//! parameters, which are cross-checked against the stored entries.

use crate::multiplier::GeneralizedMultiplier;
use crate::numerics::{self, ToleranceConfig};
use crate::perturbation::{ConvergenceExperiment, NormMode, Schedule};
use crate::sequences::SequenceSystem;
use crate::symbols::{Symbol, SymbolKind};
use crate::{C64, CMatrix, CVector, Error, Result};
use serde::{Deserialize, Serialize};

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn to_c64(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn to_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDto {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDto {
    dim: usize,
    vectors: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolDto {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<[f64; 2]>>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleDto {
    symbol: SymbolDto,
    synthesis: SequenceDto,
    analysis: SequenceDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDto {
    l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symbol: Option<SymbolDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    synthesis: Option<SequenceDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    analysis: Option<SequenceDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentDto {
    symbol: SymbolDto,
    synthesis: SequenceDto,
    analysis: SequenceDto,
    schedule: Vec<StepDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norms: Option<Vec<String>>,
}

fn entries_to_matrix(rows: usize, cols: usize, entries: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Parse(format!("matrix must be nonempty, got {rows}x{cols}")));
    }
    if entries.len() != rows {
        return Err(Error::Parse(format!(
            "expected {rows} rows of entries, got {}",
            entries.len()
        )));
    }
    for (i, row) in entries.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
    }
    let m = CMatrix::from_fn(rows, cols, |i, j| to_c64(entries[i][j]));
    numerics::check_finite(&m)?;
    Ok(m)
}

fn matrix_to_entries(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_json(s: &str) -> Result<CMatrix> {
    let dto: MatrixDto = serde_json::from_str(s).map_err(json_err)?;
    entries_to_matrix(dto.rows, dto.cols, &dto.entries)
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    let dto = MatrixDto {
        rows: m.nrows(),
        cols: m.ncols(),
        entries: matrix_to_entries(m),
    };
    serde_json::to_string_pretty(&dto).expect("matrix serialization cannot fail")
}

/// Parses `[[re, im], ...]` into a vector.
pub fn vector_from_json(s: &str) -> Result<CVector> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(s).map_err(json_err)?;
    if pairs.is_empty() {
        return Err(Error::Parse("vector must be nonempty".into()));
    }
    let v = CVector::from_iterator(pairs.len(), pairs.into_iter().map(to_c64));
    for (row, z) in v.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { row, col: 0 });
        }
    }
    Ok(v)
}

pub fn vector_to_json(v: &CVector) -> String {
    let pairs: Vec<[f64; 2]> = v.iter().map(|&z| to_pair(z)).collect();
    serde_json::to_string_pretty(&pairs).expect("vector serialization cannot fail")
}

fn sequence_from_dto(dto: &SequenceDto) -> Result<SequenceSystem> {
    if dto.vectors.is_empty() {
        return Err(Error::Parse("sequence has no vectors".into()));
    }
    let mut vectors = Vec::with_capacity(dto.vectors.len());
    for (k, pairs) in dto.vectors.iter().enumerate() {
        if pairs.len() != dto.dim {
            return Err(Error::Parse(format!(
                "vector {k} has length {}, expected dim {}",
                pairs.len(),
                dto.dim
            )));
        }
        vectors.push(CVector::from_iterator(dto.dim, pairs.iter().map(|&p| to_c64(p))));
    }
    SequenceSystem::new(dto.dim, vectors)
}

fn sequence_to_dto(seq: &SequenceSystem) -> SequenceDto {
    SequenceDto {
        dim: seq.dim(),
        vectors: (0..seq.count())
            .map(|k| seq.vector(k).iter().map(|&z| to_pair(z)).collect())
            .collect(),
    }
}

pub fn sequence_from_json(s: &str) -> Result<SequenceSystem> {
    let dto: SequenceDto = serde_json::from_str(s).map_err(json_err)?;
    sequence_from_dto(&dto)
}

pub fn sequence_to_json(seq: &SequenceSystem) -> String {
    serde_json::to_string_pretty(&sequence_to_dto(seq))
        .expect("sequence serialization cannot fail")
}

/// Rebuilds the symbol named by `kind` from its parameters and requires
/// the stored entries to agree with the rebuilt matrix.
fn symbol_from_dto(dto: &SymbolDto, tol: &ToleranceConfig) -> Result<Symbol> {
    let matrix = entries_to_matrix(dto.rows, dto.cols, &dto.entries)?;
    let reject_params = |which: &[(&str, bool)]| -> Result<()> {
        for (name, present) in which {
            if *present {
                return Err(Error::Parse(format!(
                    "parameter {name:?} is not allowed for kind {:?}",
                    dto.kind
                )));
            }
        }
        Ok(())
    };
    let rebuilt = match dto.kind.as_str() {
        "dense" => {
            reject_params(&[
                ("m", dto.m.is_some()),
                ("kernel", dto.kernel.is_some()),
                ("offset", dto.offset.is_some()),
                ("a", dto.a.is_some()),
            ])?;
            return Symbol::dense(matrix);
        }
        "diagonal" => {
            reject_params(&[
                ("kernel", dto.kernel.is_some()),
                ("offset", dto.offset.is_some()),
                ("a", dto.a.is_some()),
            ])?;
            let m = dto
                .m
                .as_ref()
                .ok_or_else(|| Error::Parse("diagonal symbol needs \"m\"".into()))?;
            let diag: Vec<C64> = m.iter().map(|&p| to_c64(p)).collect();
            if dto.rows != dto.cols {
                return Err(Error::Parse(format!(
                    "diagonal symbol must be square, got {}x{}",
                    dto.rows, dto.cols
                )));
            }
            Symbol::diagonal(&diag, dto.rows)?
        }
        "convolution" => {
            reject_params(&[("m", dto.m.is_some()), ("a", dto.a.is_some())])?;
            let kernel = dto
                .kernel
                .as_ref()
                .ok_or_else(|| Error::Parse("convolution symbol needs \"kernel\"".into()))?;
            let offset = dto
                .offset
                .ok_or_else(|| Error::Parse("convolution symbol needs \"offset\"".into()))?;
            if dto.rows != dto.cols {
                return Err(Error::Parse(format!(
                    "convolution symbol must be square, got {}x{}",
                    dto.rows, dto.cols
                )));
            }
            let coeffs: Vec<C64> = kernel.iter().map(|&p| to_c64(p)).collect();
            Symbol::convolution(&coeffs, offset, dto.rows)?
        }
        "frobenius" => {
            reject_params(&[
                ("m", dto.m.is_some()),
                ("kernel", dto.kernel.is_some()),
                ("offset", dto.offset.is_some()),
            ])?;
            if let Some(a) = &dto.a {
                let a_matrix = entries_to_matrix(dto.rows, dto.cols, a)?;
                let dev = numerics::max_abs_entry(&(&a_matrix - &matrix));
                if dev > tol.eq_abs * numerics::scale_of(&matrix) {
                    return Err(Error::Parse(format!(
                        "parameter \"a\" disagrees with entries by {dev:.3e}"
                    )));
                }
            }
            return Symbol::frobenius(matrix);
        }
        "triblock" => {
            reject_params(&[
                ("m", dto.m.is_some()),
                ("kernel", dto.kernel.is_some()),
                ("offset", dto.offset.is_some()),
                ("a", dto.a.is_some()),
            ])?;
            if dto.rows != dto.cols {
                return Err(Error::Parse(format!(
                    "triblock symbol must be square, got {}x{}",
                    dto.rows, dto.cols
                )));
            }
            Symbol::triblock(dto.rows)?
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown symbol kind {other:?}; expected dense, diagonal, convolution, frobenius or triblock"
            )));
        }
    };
    let dev = numerics::max_abs_entry(&(rebuilt.matrix() - &matrix));
    if dev > tol.eq_abs * numerics::scale_of(&matrix) {
        return Err(Error::Parse(format!(
            "entries disagree with the {:?} parameters by {dev:.3e}",
            dto.kind
        )));
    }
    Ok(rebuilt)
}

fn symbol_to_dto(symbol: &Symbol) -> SymbolDto {
    let (mut m, mut kernel, mut offset, mut a) = (None, None, None, None);
    match symbol.kind() {
        SymbolKind::Dense => {}
        SymbolKind::Diagonal { m: diag } => {
            m = Some(diag.iter().map(|&z| to_pair(z)).collect());
        }
        SymbolKind::Convolution { kernel: coeffs, offset: off } => {
            kernel = Some(coeffs.iter().map(|&z| to_pair(z)).collect());
            offset = Some(*off);
        }
        SymbolKind::Frobenius => {
            a = Some(matrix_to_entries(symbol.matrix()));
        }
        SymbolKind::TriBlock => {}
    }
    SymbolDto {
        rows: symbol.rows(),
        cols: symbol.cols(),
        entries: matrix_to_entries(symbol.matrix()),
        kind: symbol.kind().name().into(),
        m,
        kernel,
        offset,
        a,
    }
}

pub fn symbol_from_json(s: &str, tol: &ToleranceConfig) -> Result<Symbol> {
    let dto: SymbolDto = serde_json::from_str(s).map_err(json_err)?;
    symbol_from_dto(&dto, tol)
}

pub fn symbol_to_json(symbol: &Symbol) -> String {
    serde_json::to_string_pretty(&symbol_to_dto(symbol))
        .expect("symbol serialization cannot fail")
}

fn bundle_from_dto(dto: &BundleDto, tol: &ToleranceConfig) -> Result<GeneralizedMultiplier> {
    let symbol = symbol_from_dto(&dto.symbol, tol)?;
    let synthesis = sequence_from_dto(&dto.synthesis)?;
    let analysis = sequence_from_dto(&dto.analysis)?;
    GeneralizedMultiplier::build(symbol, synthesis, analysis)
}

pub fn bundle_from_json(s: &str, tol: &ToleranceConfig) -> Result<GeneralizedMultiplier> {
    let dto: BundleDto = serde_json::from_str(s).map_err(json_err)?;
    bundle_from_dto(&dto, tol)
}

pub fn bundle_to_json(m: &GeneralizedMultiplier) -> String {
    let dto = BundleDto {
        symbol: symbol_to_dto(m.symbol()),
        synthesis: sequence_to_dto(m.synthesis_seq()),
        analysis: sequence_to_dto(m.analysis_seq()),
    };
    serde_json::to_string_pretty(&dto).expect("bundle serialization cannot fail")
}

pub fn experiment_from_json(s: &str, tol: &ToleranceConfig) -> Result<ConvergenceExperiment> {
    let dto: ExperimentDto = serde_json::from_str(s).map_err(json_err)?;
    let base = bundle_from_dto(
        &BundleDto {
            symbol: dto.symbol,
            synthesis: dto.synthesis,
            analysis: dto.analysis,
        },
        tol,
    )?;
    if dto.schedule.is_empty() {
        return Err(Error::Parse("schedule must not be empty".into()));
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Side {
        Symbol,
        Synthesis,
        Analysis,
    }
    let side_of = |step: &StepDto| -> Result<Side> {
        match (
            step.symbol.is_some(),
            step.synthesis.is_some(),
            step.analysis.is_some(),
        ) {
            (true, false, false) => Ok(Side::Symbol),
            (false, true, false) => Ok(Side::Synthesis),
            (false, false, true) => Ok(Side::Analysis),
            _ => Err(Error::Parse(format!(
                "step l={} must carry exactly one of symbol, synthesis or analysis",
                step.l
            ))),
        }
    };
    let side = side_of(&dto.schedule[0])?;
    let mut labels = Vec::with_capacity(dto.schedule.len());
    for step in &dto.schedule {
        if side_of(step)? != side {
            return Err(Error::Parse(format!(
                "step l={} perturbs a different component than the first step",
                step.l
            )));
        }
        labels.push(step.l);
    }
    let schedule = match side {
        Side::Symbol => Schedule::Symbol(
            dto.schedule
                .iter()
                .map(|s| symbol_from_dto(s.symbol.as_ref().unwrap(), tol))
                .collect::<Result<Vec<_>>>()?,
        ),
        Side::Synthesis => Schedule::Synthesis(
            dto.schedule
                .iter()
                .map(|s| sequence_from_dto(s.synthesis.as_ref().unwrap()))
                .collect::<Result<Vec<_>>>()?,
        ),
        Side::Analysis => Schedule::Analysis(
            dto.schedule
                .iter()
                .map(|s| sequence_from_dto(s.analysis.as_ref().unwrap()))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let norms = match &dto.norms {
        None => NormMode::all().to_vec(),
        Some(names) => {
            if names.is_empty() {
                return Err(Error::Parse("norms must not be empty when present".into()));
            }
            names
                .iter()
                .map(|n| n.parse::<NormMode>())
                .collect::<Result<Vec<_>>>()?
        }
    };
    ConvergenceExperiment::with_labels(base, schedule, norms, labels)
}
