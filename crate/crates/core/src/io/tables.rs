//! Comma-separated design and output tables.
//!
//! ```text
//! # amrpc design
//! # provenance kind=qmc skip=1
//! beta_sj,k_gamma,mu_eff,alpha_bj,k_pm
//! 5,0.0001,...
//! ```
//!
//! Output tables are row = run, column = cell, and may carry
//! `# grid rows=R cols=C components=u,v`. Lines starting with `#` are
//! comments; unknown comment lines are ignored.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::qmc::{DesignMatrix, Provenance};
use crate::surrogate::Grid;

/// Shortest representation that parses back to the same `f64`; exponent
/// form outside `[1e-4, 1e15)`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn push_row(out: &mut String, row: &[f64]) {
    for (j, v) in row.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&format_f64(*v));
    }
    out.push('\n');
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains([',', '\n', '\r', '"']) || name.starts_with('#') {
        return Err(Error::Parse(format!("column name {name:?} cannot be written")));
    }
    Ok(())
}

pub fn write_design(design: &DesignMatrix) -> Result<String> {
    let mut out = String::from("# amrpc design\n");
    out.push_str(&match design.provenance {
        Provenance::Qmc { skip } => format!("# provenance kind=qmc skip={skip}\n"),
        Provenance::Mc { seed } => format!("# provenance kind=mc seed={seed}\n"),
        Provenance::External => "# provenance kind=external\n".to_string(),
    });
    design.names.iter().try_for_each(|n| check_name(n))?;
    out.push_str(&design.names.join(","));
    out.push('\n');
    design.values.rows().for_each(|r| push_row(&mut out, r));
    Ok(out)
}

/// Parsed output table.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    pub values: Matrix,
    pub names: Vec<String>,
    pub grid: Option<Grid>,
}

pub fn write_outputs(values: &Matrix, names: &[String], grid: Option<&Grid>) -> Result<String> {
    if names.len() != values.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{} names for {} columns",
            names.len(),
            values.ncols()
        )));
    }
    let mut out = String::from("# amrpc outputs\n");
    if let Some(g) = grid {
        g.components.iter().try_for_each(|c| check_name(c))?;
        out.push_str(&format!(
            "# grid rows={} cols={} components={}\n",
            g.rows,
            g.cols,
            g.components.join(",")
        ));
    }
    names.iter().try_for_each(|n| check_name(n))?;
    out.push_str(&names.join(","));
    out.push('\n');
    values.rows().for_each(|r| push_row(&mut out, r));
    Ok(out)
}

/// `key=value` pairs of the first comment line starting with `keyword`.
fn comment_fields<'a>(text: &'a str, keyword: &str) -> Option<Vec<(&'a str, &'a str)>> {
    text.lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .map(str::trim)
        .find_map(|l| {
            let rest = l.strip_prefix(keyword)?;
            if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                return None;
            }
            Some(rest.split_whitespace().filter_map(|kv| kv.split_once('=')).collect())
        })
}

fn field<'a>(fields: &[(&'a str, &'a str)], key: &str) -> Option<&'a str> {
    fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn parse_num<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("missing or invalid {what}")))
}

fn parse_provenance(text: &str) -> Result<Provenance> {
    let Some(fields) = comment_fields(text, "provenance") else {
        return Ok(Provenance::External);
    };
    match field(&fields, "kind") {
        Some("qmc") => Ok(Provenance::Qmc {
            skip: parse_num(field(&fields, "skip"), "provenance skip")?,
        }),
        Some("mc") => Ok(Provenance::Mc {
            seed: parse_num(field(&fields, "seed"), "provenance seed")?,
        }),
        Some("external") | None => Ok(Provenance::External),
        Some(other) => Err(Error::Parse(format!("unknown provenance kind {other:?}"))),
    }
}

fn parse_grid(text: &str) -> Result<Option<Grid>> {
    let Some(fields) = comment_fields(text, "grid") else {
        return Ok(None);
    };
    let rows: usize = parse_num(field(&fields, "rows"), "grid rows")?;
    let cols: usize = parse_num(field(&fields, "cols"), "grid cols")?;
    let components = field(&fields, "components")
        .map(|c| c.split(',').map(str::to_string).collect())
        .unwrap_or_else(|| vec!["y".to_string()]);
    rows.checked_mul(cols)
        .and_then(|rc| rc.checked_mul(Vec::len(&components)))
        .ok_or_else(|| Error::Parse("grid size overflows".into()))?;
    Grid::new(rows, cols, components)
        .map(Some)
        .map_err(|e| Error::Parse(e.to_string()))
}

/// Header names and numeric rows of a `#`-commented CSV.
fn parse_table(text: &str) -> Result<(Vec<String>, Matrix)> {
    let mut reader = ::csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(::csv::Trim::All)
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(format!("header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.iter().all(String::is_empty) {
        return Err(Error::Parse("missing header row".into()));
    }
    if let Some(n) = names.iter().find(|n| n.is_empty()) {
        return Err(Error::Parse(format!("empty column name in header {n:?}")));
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Parse(format!("duplicate column {n:?}")));
        }
    }
    let mut data = Vec::new();
    let mut nrows = 0usize;
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("data row {r}: {e}")))?;
        if rec.len() != names.len() {
            return Err(Error::Parse(format!(
                "data row {r} has {} fields, header has {}",
                rec.len(),
                names.len()
            )));
        }
        for (c, f) in rec.iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::Parse(format!("data row {r}, column {}: {f:?} is not a number", names[c])))?;
            data.push(v);
        }
        nrows += 1;
    }
    Ok((names.clone(), Matrix::from_vec(nrows, names.len(), data)?))
}

pub fn parse_design(text: &str) -> Result<DesignMatrix> {
    let provenance = parse_provenance(text)?;
    let (names, values) = parse_table(text)?;
    DesignMatrix::new(values, names, provenance)
}

pub fn parse_outputs(text: &str) -> Result<OutputTable> {
    let grid = parse_grid(text)?;
    let (names, values) = parse_table(text)?;
    if let Some(g) = &grid {
        if g.cells() != values.ncols() {
            return Err(Error::Parse(format!(
                "grid declares {} cells but the table has {} columns",
                g.cells(),
                values.ncols()
            )));
        }
    }
    Ok(OutputTable { values, names, grid })
}
