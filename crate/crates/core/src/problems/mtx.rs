//! Matrix Market reader and writer, plus the on-disk system directory layout
//! `{M.mtx, A.mtx, b.mtx, [b1.mtx], [meta.json]}`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{ProblemSpec, SaddleSystem};
use crate::error::Result;
use crate::linalg::SparseMatrixCSR;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixMarketError {
    #[error("{file}:{line}: malformed header: {detail}")]
    MalformedHeader {
        file: String,
        line: usize,
        detail: String,
    },

    #[error("{file}:{line}: unsupported format: {detail}")]
    Unsupported {
        file: String,
        line: usize,
        detail: String,
    },

    #[error("{file}:{line}: malformed entry: {detail}")]
    MalformedEntry {
        file: String,
        line: usize,
        detail: String,
    },

    #[error("{file}:{line}: index ({row}, {col}) outside {nrows}x{ncols} (1-based)")]
    IndexOutOfRange {
        file: String,
        line: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("{file}:{line}: expected {expected} entries, found {found}")]
    EntryCount {
        file: String,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{file}:{line}: {what} is {found}, expected {expected}")]
    DimensionMismatch {
        file: String,
        line: usize,
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// A parsed file together with the line its size record sits on.
#[derive(Debug)]
struct Parsed {
    matrix: SparseMatrixCSR,
    size_line: usize,
}

fn parse(text: &str, file: &str) -> std::result::Result<Parsed, MatrixMarketError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header_err = |line, detail: &str| MatrixMarketError::MalformedHeader {
        file: file.to_string(),
        line,
        detail: detail.to_string(),
    };

    let (hline, header) = lines.next().ok_or_else(|| header_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(header_err(hline, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let unsupported = |detail: String| MatrixMarketError::Unsupported {
        file: file.to_string(),
        line: hline,
        detail,
    };
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(unsupported(format!("layout '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(unsupported(format!("field '{other}'"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(unsupported(format!("symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| header_err(hline + 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| header_err(size_line, "size line must hold non-negative integers"))?;
    let entry_err = |line, detail: String| MatrixMarketError::MalformedEntry {
        file: file.to_string(),
        line,
        detail,
    };
    let parse_value = |line, tok: Option<&str>| -> std::result::Result<f64, MatrixMarketError> {
        let tok = tok.ok_or_else(|| entry_err(line, "missing value".into()))?;
        tok.parse::<f64>()
            .map_err(|_| entry_err(line, format!("bad value '{tok}'")))
    };

    let (nrows, ncols, trips, last_line) = match layout {
        Layout::Coordinate => {
            let [nrows, ncols, nnz] = dims[..] else {
                return Err(header_err(size_line, "coordinate size line needs 'rows cols nnz'"));
            };
            let mut trips = Vec::with_capacity(nnz);
            let mut last = size_line;
            let mut stored = 0usize;
            for (line, entry) in body.by_ref() {
                last = line;
                if stored == nnz {
                    return Err(MatrixMarketError::EntryCount {
                        file: file.to_string(),
                        line,
                        expected: nnz,
                        found: nnz + 1,
                    });
                }
                let mut it = entry.split_whitespace();
                let mut index = |what: &str| -> std::result::Result<usize, MatrixMarketError> {
                    let tok = it
                        .next()
                        .ok_or_else(|| entry_err(line, format!("missing {what} index")))?;
                    tok.parse::<usize>()
                        .map_err(|_| entry_err(line, format!("bad {what} index '{tok}'")))
                };
                let r = index("row")?;
                let c = index("column")?;
                let v = parse_value(line, it.next())?;
                if it.next().is_some() {
                    return Err(entry_err(line, "trailing tokens".into()));
                }
                if r == 0 || c == 0 || r > nrows || c > ncols {
                    return Err(MatrixMarketError::IndexOutOfRange {
                        file: file.to_string(),
                        line,
                        row: r,
                        col: c,
                        nrows,
                        ncols,
                    });
                }
                stored += 1;
                trips.push((r - 1, c - 1, v));
                if symmetry == Symmetry::Symmetric && r != c {
                    trips.push((c - 1, r - 1, v));
                }
            }
            if stored != nnz {
                return Err(MatrixMarketError::EntryCount {
                    file: file.to_string(),
                    line: last,
                    expected: nnz,
                    found: stored,
                });
            }
            (nrows, ncols, trips, last)
        }
        Layout::Array => {
            let [nrows, ncols] = dims[..] else {
                return Err(header_err(size_line, "array size line needs 'rows cols'"));
            };
            if symmetry == Symmetry::Symmetric && nrows != ncols {
                return Err(header_err(size_line, "symmetric array must be square"));
            }
            // column-major; symmetric arrays store the lower triangle only
            let positions: Vec<(usize, usize)> = (0..ncols)
                .flat_map(|c| {
                    let start = if symmetry == Symmetry::Symmetric { c } else { 0 };
                    (start..nrows).map(move |r| (r, c))
                })
                .collect();
            let mut trips = Vec::with_capacity(positions.len());
            let mut last = size_line;
            let mut seen = 0usize;
            for (line, entry) in body.by_ref() {
                last = line;
                let mut it = entry.split_whitespace();
                let v = parse_value(line, it.next())?;
                if it.next().is_some() {
                    return Err(entry_err(line, "array entries hold a single value".into()));
                }
                let Some(&(r, c)) = positions.get(seen) else {
                    return Err(MatrixMarketError::EntryCount {
                        file: file.to_string(),
                        line,
                        expected: positions.len(),
                        found: seen + 1,
                    });
                };
                seen += 1;
                if v != 0.0 {
                    trips.push((r, c, v));
                    if symmetry == Symmetry::Symmetric && r != c {
                        trips.push((c, r, v));
                    }
                }
            }
            if seen != positions.len() {
                return Err(MatrixMarketError::EntryCount {
                    file: file.to_string(),
                    line: last,
                    expected: positions.len(),
                    found: seen,
                });
            }
            (nrows, ncols, trips, last)
        }
    };
    let matrix = SparseMatrixCSR::from_triplets(nrows, ncols, &trips).map_err(|e| {
        entry_err(last_line, e.to_string())
    })?;
    Ok(Parsed { matrix, size_line })
}

fn file_label(path: &Path) -> String {
    path.display().to_string()
}

fn load_parsed(path: &Path) -> Result<Parsed> {
    let text = fs::read_to_string(path)?;
    Ok(parse(&text, &file_label(path))?)
}

pub fn parse_matrix_market(text: &str) -> Result<SparseMatrixCSR> {
    Ok(parse(text, "<input>")?.matrix)
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrixCSR> {
    Ok(load_parsed(path.as_ref())?.matrix)
}

/// Reads a dense vector stored as an `n x 1` matrix in either layout.
pub fn load_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let parsed = load_parsed(path)?;
    column_vector(parsed, path)
}

fn column_vector(parsed: Parsed, path: &Path) -> Result<Vec<f64>> {
    let mat = parsed.matrix;
    if mat.ncols() != 1 {
        return Err(MatrixMarketError::DimensionMismatch {
            file: file_label(path),
            line: parsed.size_line,
            what: "column count of a vector file",
            expected: 1,
            found: mat.ncols(),
        }
        .into());
    }
    let mut v = vec![0.0; mat.nrows()];
    for (r, _, x) in mat.triplets() {
        v[r] = x;
    }
    Ok(v)
}

/// Matrix Market text for `a` in coordinate/general layout. Values use the
/// shortest round-tripping representation, so save then load is exact.
pub fn format_matrix_market(a: &SparseMatrixCSR) -> String {
    let mut out = String::with_capacity(32 * (a.nnz() + 2));
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", a.nrows(), a.ncols(), a.nnz()));
    for (r, c, v) in a.triplets() {
        out.push_str(&format!("{} {} {:e}\n", r + 1, c + 1, v));
    }
    out
}

pub fn save_matrix_market(path: impl AsRef<Path>, a: &SparseMatrixCSR) -> Result<()> {
    fs::write(path, format_matrix_market(a))?;
    Ok(())
}

/// Writes a dense vector in array layout.
pub fn save_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(24 * (v.len() + 2));
    out.push_str("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} 1\n", v.len()));
    for x in v {
        out.push_str(&format!("{x:e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub const META_FILE: &str = "meta.json";

/// Loads a system directory. `meta.json` is optional; when present its
/// `ProblemSpec` is returned alongside the system.
pub fn load_system(dir: impl AsRef<Path>) -> Result<(SaddleSystem, Option<ProblemSpec>)> {
    let dir = dir.as_ref();
    let m_path = dir.join("M.mtx");
    let a_path = dir.join("A.mtx");
    let b_path = dir.join("b.mtx");
    let m = load_parsed(&m_path)?;
    let a = load_parsed(&a_path)?;
    let b_parsed = load_parsed(&b_path)?;
    let b_line = b_parsed.size_line;
    let b = column_vector(b_parsed, &b_path)?;

    let mismatch = |path: &PathBuf, line, what, expected, found| {
        crate::Error::from(MatrixMarketError::DimensionMismatch {
            file: file_label(path),
            line,
            what,
            expected,
            found,
        })
    };
    let mm = m.matrix.nrows();
    if m.matrix.ncols() != mm {
        return Err(mismatch(&m_path, m.size_line, "column count of M", mm, m.matrix.ncols()));
    }
    if a.matrix.nrows() != mm {
        return Err(mismatch(&a_path, a.size_line, "row count of A", mm, a.matrix.nrows()));
    }
    if b.len() != a.matrix.ncols() {
        return Err(mismatch(&b_path, b_line, "length of b", a.matrix.ncols(), b.len()));
    }
    let b1_path = dir.join("b1.mtx");
    let b1 = if b1_path.exists() {
        let parsed = load_parsed(&b1_path)?;
        let line = parsed.size_line;
        let b1 = column_vector(parsed, &b1_path)?;
        if b1.len() != mm {
            return Err(mismatch(&b1_path, line, "length of b1", mm, b1.len()));
        }
        Some(b1)
    } else {
        None
    };
    let meta_path = dir.join(META_FILE);
    let spec = if meta_path.exists() {
        Some(serde_json::from_str(&fs::read_to_string(meta_path)?)?)
    } else {
        None
    };
    let sys = SaddleSystem {
        m: m.matrix,
        a: a.matrix,
        b,
        b1,
    };
    sys.check()?;
    Ok((sys, spec))
}

pub fn save_system(
    dir: impl AsRef<Path>,
    sys: &SaddleSystem,
    spec: Option<&ProblemSpec>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    save_matrix_market(dir.join("M.mtx"), &sys.m)?;
    save_matrix_market(dir.join("A.mtx"), &sys.a)?;
    save_vector(dir.join("b.mtx"), &sys.b)?;
    if let Some(b1) = &sys.b1 {
        save_vector(dir.join("b1.mtx"), b1)?;
    }
    if let Some(spec) = spec {
        fs::write(dir.join(META_FILE), serde_json::to_string_pretty(spec)?)?;
    }
    Ok(())
}
