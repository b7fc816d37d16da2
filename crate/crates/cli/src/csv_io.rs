//! Survey CSV ingestion and emission.
//!
//! Layout: the first column is a respondent id, remaining column headers are
//! item ids, and an empty cell is a missing response. Two value conventions
//! are accepted and auto-detected: ordinal ratings in 1..=R (rescaled into
//! (0, 1) before analysis) and already-continuous responses strictly inside
//! (0, 1), as written by `simulate`.

use std::path::Path;

use icct::model::grid::Grid;
use icct::model::types::ResponseMatrix;
use icct::RescaleRule;

use crate::error::{CliError, CliResult};
use crate::outputs::write_atomic;

/// Raw ordinal survey ratings before rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSurveyTable {
    pub respondent_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// None marks a missing response.
    pub ratings: Grid<Option<u32>>,
    /// Number of ordinal levels R.
    pub levels: u32,
}

/// Either interpretation of a parsed survey file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedSurvey {
    Ordinal(RawSurveyTable),
    Continuous(ResponseMatrix),
}

struct ParsedCsv {
    respondent_ids: Vec<String>,
    item_ids: Vec<String>,
    cells: Grid<Option<f64>>,
}

fn parse_csv(path: &Path) -> CliResult<ParsedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::validation(format!("{}: bad header: {e}", path.display())))?
        .clone();
    if headers.len() < 2 {
        return Err(CliError::validation(format!(
            "{}: need a respondent id column plus at least one item column",
            path.display()
        )));
    }
    let item_ids: Vec<String> = headers.iter().skip(1).map(String::from).collect();
    {
        let mut seen = std::collections::BTreeSet::new();
        for id in &item_ids {
            if !seen.insert(id) {
                return Err(CliError::validation(format!(
                    "{}: duplicate item id {id:?}",
                    path.display()
                )));
            }
        }
    }

    let mut respondent_ids = Vec::new();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::validation(format!(
                "{}: line {}: malformed record: {e}",
                path.display(),
                row_idx + 2
            ))
        })?;
        if record.len() != headers.len() {
            return Err(CliError::validation(format!(
                "{}: line {}: expected {} fields, found {}",
                path.display(),
                row_idx + 2,
                headers.len(),
                record.len()
            )));
        }
        let id = record.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(CliError::validation(format!(
                "{}: line {}: empty respondent id",
                path.display(),
                row_idx + 2
            )));
        }
        let mut row = Vec::with_capacity(item_ids.len());
        for (col, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                row.push(None);
            } else {
                let value: f64 = field.parse().map_err(|_| {
                    CliError::validation(format!(
                        "{}: respondent {id}, column {}: cannot parse {field:?} as a number",
                        path.display(),
                        item_ids[col]
                    ))
                })?;
                row.push(Some(value));
            }
        }
        respondent_ids.push(id);
        rows.push(row);
    }
    {
        let mut seen = std::collections::BTreeSet::new();
        for id in &respondent_ids {
            if !seen.insert(id) {
                return Err(CliError::validation(format!(
                    "{}: duplicate respondent id {id:?}",
                    path.display()
                )));
            }
        }
    }
    let n = respondent_ids.len();
    let k = item_ids.len();
    if n == 0 {
        return Err(CliError::validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let mut cells = Grid::filled(n, k, None);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            cells[(i, j)] = v;
        }
    }
    Ok(ParsedCsv {
        respondent_ids,
        item_ids,
        cells,
    })
}

fn is_integral(x: f64) -> bool {
    x.fract() == 0.0 && x.is_finite()
}

/// Loads an ordinal survey table, validating every rating against 1..=levels.
pub fn load_csv(path: &Path, levels: u32) -> CliResult<RawSurveyTable> {
    let parsed = parse_csv(path)?;
    let n = parsed.respondent_ids.len();
    let k = parsed.item_ids.len();
    let mut ratings = Grid::filled(n, k, None);
    for i in 0..n {
        for j in 0..k {
            if let Some(v) = parsed.cells[(i, j)] {
                if !is_integral(v) || v < 1.0 || v > levels as f64 {
                    return Err(CliError::validation(format!(
                        "{}: rating {v} for respondent {}, column {} is outside 1..={levels}",
                        path.display(),
                        parsed.respondent_ids[i],
                        parsed.item_ids[j]
                    )));
                }
                ratings[(i, j)] = Some(v as u32);
            }
        }
    }
    Ok(RawSurveyTable {
        respondent_ids: parsed.respondent_ids,
        item_ids: parsed.item_ids,
        ratings,
        levels,
    })
}

/// Maps ordinal ratings into the open unit interval.
///
/// The midpoint rule sends rating r to (r - 0.5) / R, treating levels as bin
/// midpoints: symmetric about one half and never touching the endpoints.
pub fn rescale(table: &RawSurveyTable, rule: &RescaleRule) -> CliResult<ResponseMatrix> {
    rule.validate().map_err(CliError::from)?;
    let r_levels = table.levels as f64;
    let n = table.respondent_ids.len();
    let k = table.item_ids.len();
    let mut values = Grid::filled(n, k, f64::NAN);
    let mut mask = Grid::filled(n, k, false);
    for i in 0..n {
        for j in 0..k {
            if let Some(r) = table.ratings[(i, j)] {
                if r < 1 || r > table.levels {
                    return Err(CliError::validation(format!(
                        "rating {r} for respondent {}, column {} is outside 1..={}",
                        table.respondent_ids[i], table.item_ids[j], table.levels
                    )));
                }
                let r = r as f64;
                values[(i, j)] = match *rule {
                    RescaleRule::Midpoint => (r - 0.5) / r_levels,
                    RescaleRule::Affine { epsilon } => {
                        epsilon + (r - 1.0) * (1.0 - 2.0 * epsilon) / (r_levels - 1.0)
                    }
                };
                mask[(i, j)] = true;
            }
        }
    }
    ResponseMatrix::new(
        values,
        mask,
        table.respondent_ids.clone(),
        table.item_ids.clone(),
    )
    .map_err(CliError::from)
}

/// Loads a survey file, auto-detecting ordinal versus continuous values, and
/// returns an analysis-ready matrix.
pub fn load_response_csv(
    path: &Path,
    levels: u32,
    rule: &RescaleRule,
) -> CliResult<ResponseMatrix> {
    match classify_survey(path, levels)? {
        LoadedSurvey::Ordinal(table) => rescale(&table, rule),
        LoadedSurvey::Continuous(matrix) => Ok(matrix),
    }
}

/// Parses a survey file and decides which value convention it uses.
pub fn classify_survey(path: &Path, levels: u32) -> CliResult<LoadedSurvey> {
    let parsed = parse_csv(path)?;
    let observed: Vec<f64> = parsed.cells.iter().filter_map(|&c| c).collect();
    if observed.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no observed responses",
            path.display()
        )));
    }
    let all_integral = observed.iter().all(|&v| is_integral(v));
    if all_integral {
        let table = load_csv(path, levels)?;
        return Ok(LoadedSurvey::Ordinal(table));
    }
    if let Some(&bad) = observed
        .iter()
        .find(|&&v| !(v > 0.0 && v < 1.0))
    {
        return Err(CliError::validation(format!(
            "{}: value {bad} is neither an ordinal rating in 1..={levels} nor inside (0, 1)",
            path.display()
        )));
    }
    let n = parsed.respondent_ids.len();
    let k = parsed.item_ids.len();
    let mut values = Grid::filled(n, k, f64::NAN);
    let mut mask = Grid::filled(n, k, false);
    for i in 0..n {
        for j in 0..k {
            if let Some(v) = parsed.cells[(i, j)] {
                values[(i, j)] = v;
                mask[(i, j)] = true;
            }
        }
    }
    ResponseMatrix::new(values, mask, parsed.respondent_ids, parsed.item_ids)
        .map(LoadedSurvey::Continuous)
        .map_err(CliError::from)
}

/// Writes a response matrix as a continuous survey CSV. Values are printed
/// with shortest round-trip precision, so load-after-write reproduces the
/// matrix bit for bit.
pub fn write_response_csv(path: &Path, matrix: &ResponseMatrix) -> CliResult<()> {
    let mut out = Vec::new();
    {
        let mut w = csv_writer(&mut out);
        let mut header = vec!["respondent_id".to_string()];
        header.extend(matrix.item_ids().iter().cloned());
        w.write_record(&header).map_err(write_err)?;
        for i in 0..matrix.n_respondents() {
            let mut record = vec![matrix.respondent_ids()[i].clone()];
            for j in 0..matrix.n_items() {
                if matrix.is_observed(i, j) {
                    record.push(format!("{}", matrix.value(i, j)));
                } else {
                    record.push(String::new());
                }
            }
            w.write_record(&record).map_err(write_err)?;
        }
        w.flush().map_err(|e| CliError::runtime(e.to_string()))?;
    }
    write_atomic(path, &out)
}

/// Per-respondent categorical covariates: id column plus one column per
/// covariate. Returns (respondent ids, [(covariate name, labels)]).
pub fn load_covariates(path: &Path) -> CliResult<(Vec<String>, Vec<(String, Vec<String>)>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::validation(format!("{}: bad header: {e}", path.display())))?
        .clone();
    if headers.len() < 2 {
        return Err(CliError::validation(format!(
            "{}: need a respondent id column plus at least one covariate column",
            path.display()
        )));
    }
    let names: Vec<String> = headers.iter().skip(1).map(String::from).collect();
    let mut ids = Vec::new();
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::validation(format!(
                "{}: line {}: malformed record: {e}",
                path.display(),
                row_idx + 2
            ))
        })?;
        let id = record.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(CliError::validation(format!(
                "{}: line {}: empty respondent id",
                path.display(),
                row_idx + 2
            )));
        }
        for (c, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                return Err(CliError::validation(format!(
                    "{}: respondent {id}: empty {} label",
                    path.display(),
                    names[c]
                )));
            }
            columns[c].push(field.to_string());
        }
        ids.push(id);
    }
    Ok((ids, names.into_iter().zip(columns).collect()))
}

pub(crate) fn csv_writer<W: std::io::Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(inner)
}

pub(crate) fn write_err(e: csv::Error) -> CliError {
    CliError::runtime(e.to_string())
}
