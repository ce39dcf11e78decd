//! Dataset ingestion: svmlight/libsvm text, dense CSV, and degree-2
//! feature expansion.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use volsamp_core::linalg::{rank, Matrix};
use volsamp_core::FiniteDesign;

use crate::error::{CliError, Result};

/// One svmlight line: a label and 1-based sparse features.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmlightRecord {
    pub label: f64,
    pub features: Vec<(usize, f64)>,
}

fn parse_number(token: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| CliError::Parse {
        line,
        message: format!("non-numeric {what} `{token}`"),
    })?;
    if !v.is_finite() {
        return Err(CliError::Parse {
            line,
            message: format!("non-finite {what} `{token}`"),
        });
    }
    Ok(v)
}

/// Parses one non-comment line. `line` is 1-based and only used in errors.
pub fn parse_record(text: &str, line: usize) -> Result<SvmlightRecord> {
    let mut tokens = text.split_whitespace();
    let label = tokens.next().ok_or(CliError::Parse {
        line,
        message: "missing label".into(),
    })?;
    let label = parse_number(label, line, "label")?;
    let mut features: Vec<(usize, f64)> = Vec::new();
    for tok in tokens {
        let (idx, val) = tok.split_once(':').ok_or_else(|| CliError::Parse {
            line,
            message: format!("expected index:value, got `{tok}`"),
        })?;
        let idx: usize = idx.parse().map_err(|_| CliError::Parse {
            line,
            message: format!("bad feature index `{idx}`"),
        })?;
        if idx == 0 {
            return Err(CliError::Parse {
                line,
                message: "feature indices start at 1".into(),
            });
        }
        if let Some(&(prev, _)) = features.last() {
            if idx <= prev {
                return Err(CliError::Parse {
                    line,
                    message: format!("index {idx} does not increase after {prev}"),
                });
            }
        }
        features.push((idx, parse_number(val, line, "feature value")?));
    }
    Ok(SvmlightRecord { label, features })
}

/// Reads records, skipping blank lines and lines starting with `#`.
pub fn read_svmlight_records<R: Read>(reader: R) -> Result<Vec<SvmlightRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_record(trimmed, i + 1)?);
    }
    Ok(out)
}

/// Densifies records; `d` is the largest feature index seen.
pub fn records_to_design(records: &[SvmlightRecord]) -> Result<FiniteDesign> {
    let d = records
        .iter()
        .filter_map(|r| r.features.last().map(|f| f.0))
        .max()
        .ok_or_else(|| CliError::Data("no features in any record".into()))?;
    let mut x = Matrix::zeros(records.len(), d);
    for (i, r) in records.iter().enumerate() {
        for &(j, v) in &r.features {
            x[(i, j - 1)] = v;
        }
    }
    let y = records.iter().map(|r| r.label).collect();
    Ok(FiniteDesign::new(x, y)?)
}

pub fn parse_svmlight(path: &Path) -> Result<FiniteDesign> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let records = read_svmlight_records(file).map_err(|e| match e {
        CliError::Io { source, .. } => CliError::io(path, source),
        other => other,
    })?;
    if records.is_empty() {
        return Err(CliError::EmptyFile(path.to_path_buf()));
    }
    records_to_design(&records)
}

/// Writes nonzero entries only. Values use the shortest round-trip
/// representation, so parsing the output restores the design exactly as
/// long as the last column has a nonzero entry somewhere.
pub fn write_svmlight<W: Write>(fd: &FiniteDesign, mut w: W) -> Result<()> {
    let x = fd.x();
    for i in 0..x.rows() {
        write!(w, "{}", fd.y()[i])?;
        for (j, v) in x.row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(w, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Dense CSV with a header row; the last column is the response.
pub fn read_csv_design<R: Read>(reader: R) -> Result<FiniteDesign> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = rdr.headers()?.len();
    if width < 2 {
        return Err(CliError::Data(
            "CSV needs at least one feature column and a response".into(),
        ));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut vals = rec
            .iter()
            .map(|t| parse_number(t, line, "value"))
            .collect::<Result<Vec<f64>>>()?;
        y.push(vals.pop().unwrap_or_default());
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(CliError::Data("CSV has no data rows".into()));
    }
    Ok(FiniteDesign::new(Matrix::from_rows(&rows), y.into())?)
}

pub fn parse_csv(path: &Path) -> Result<FiniteDesign> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv_design(file)
}

/// `.csv` files are dense; anything else is read as svmlight.
pub fn load_design(path: &Path) -> Result<FiniteDesign> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => parse_csv(path),
        _ => parse_svmlight(path),
    }
}

/// Appends all products `x_i x_j` (`i <= j`), then drops all-zero columns
/// and exact duplicates (first occurrence wins).
pub fn expand_degree2(fd: &FiniteDesign) -> Result<FiniteDesign> {
    let x = fd.x();
    let (n, d) = (x.rows(), x.cols());
    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| x.col(j).into_inner()).collect();
    for i in 0..d {
        for j in i..d {
            cols.push((0..n).map(|r| x[(r, i)] * x[(r, j)]).collect());
        }
    }
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        if c.iter().all(|v| *v == 0.0) || kept.contains(&c) {
            continue;
        }
        kept.push(c);
    }
    let m = Matrix::from_fn(n, kept.len(), |r, c| kept[c][r]);
    let rk = rank(&m);
    if rk < m.cols() {
        return Err(CliError::RankDeficientAfterExpansion {
            rank: rk,
            cols: m.cols(),
        });
    }
    Ok(FiniteDesign::new(m, fd.y().clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sparse_line() {
        let r = parse_record("1.5 1:2 3:4", 1).unwrap();
        assert_eq!(r.label, 1.5);
        let fd = records_to_design(&[r]).unwrap();
        assert_eq!(fd.x().row(0), &[2.0, 0.0, 4.0]);
    }

    #[test]
    fn rejects_bad_lines_with_line_numbers() {
        let text = "# header\n\n1 1:1\n1 3:1 2:1\n";
        match read_svmlight_records(text.as_bytes()) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        for bad in ["x 1:1", "1 1:abc", "1 0:1", "1 1-2", "1 2:1 2:3"] {
            assert!(
                matches!(parse_record(bad, 7), Err(CliError::Parse { line: 7, .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn expansion_enumerates_monomials() {
        let fd = FiniteDesign::new(
            Matrix::from_rows(&[
                [1.0, 2.0],
                [3.0, -1.0],
                [0.5, 0.25],
                [2.0, 2.0],
                [-1.0, 4.0],
            ]),
            vec![0.0; 5].into(),
        )
        .unwrap();
        let e = expand_degree2(&fd).unwrap();
        assert_eq!(e.x().cols(), 5);
        assert_eq!(e.x().row(0), &[1.0, 2.0, 1.0, 2.0, 4.0]);
    }
}
