//! Reader for real Matrix Market files (`coordinate` or `array`,
//! `general` or `symmetric`).

use std::path::Path;

use hcx_core::linalg::Matrix;

use crate::error::{CliError, Result};

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

fn err(line: usize, message: impl Into<String>) -> CliError {
    CliError::MatrixMarket { line, message: message.into() }
}

pub fn read_matrix_market(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let (layout, symmetry) = parse_header(header)?;

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(size_line, format!("bad size entry {t:?}"))))
        .collect::<Result<_>>()?;

    let (rows, cols) = match (layout, dims.as_slice()) {
        (Layout::Coordinate, [r, c, _]) | (Layout::Array, [r, c]) => (*r, *c),
        _ => return Err(err(size_line, "size line has the wrong number of entries")),
    };
    if rows == 0 || cols == 0 {
        return Err(err(size_line, "matrix must be non-empty"));
    }
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(err(size_line, "symmetric matrix must be square"));
    }
    let mut m = Matrix::zeros(rows, cols);

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (ln, l) in body {
                let t: Vec<&str> = l.split_whitespace().collect();
                let [i, j, v] = t.as_slice() else {
                    return Err(err(ln, "coordinate entry needs `row col value`"));
                };
                let i: usize = i.parse().map_err(|_| err(ln, "bad row index"))?;
                let j: usize = j.parse().map_err(|_| err(ln, "bad column index"))?;
                let v = parse_value(ln, v)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(err(ln, format!("index ({i}, {j}) out of range")));
                }
                m.set(i - 1, j - 1, m.get(i - 1, j - 1) + v);
                if symmetry == Symmetry::Symmetric && i != j {
                    m.set(j - 1, i - 1, m.get(j - 1, i - 1) + v);
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(err(size_line, format!("expected {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // column-major; symmetric stores the lower triangle only
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = if symmetry == Symmetry::Symmetric { j } else { 0 };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut k = 0;
            for (ln, l) in body {
                for tok in l.split_whitespace() {
                    let &(i, j) = slots.get(k).ok_or_else(|| err(ln, "too many array entries"))?;
                    let v = parse_value(ln, tok)?;
                    m.set(i, j, v);
                    if symmetry == Symmetry::Symmetric {
                        m.set(j, i, v);
                    }
                    k += 1;
                }
            }
            if k != slots.len() {
                return Err(err(size_line, format!("expected {} array entries, found {k}", slots.len())));
            }
        }
    }
    Ok(m)
}

fn parse_header(header: &str) -> Result<(Layout, Symmetry)> {
    let t: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if t.len() != 5 || t[0] != "%%matrixmarket" || t[1] != "matrix" {
        return Err(err(1, "expected `%%MatrixMarket matrix <layout> <field> <symmetry>`"));
    }
    let layout = match t[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(err(1, format!("unsupported layout {other:?}"))),
    };
    if t[3] != "real" && t[3] != "integer" {
        return Err(err(1, format!("unsupported field {:?}; only real data is accepted", t[3])));
    }
    let symmetry = match t[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(err(1, format!("unsupported symmetry {other:?}"))),
    };
    Ok((layout, symmetry))
}

fn parse_value(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| err(line, format!("bad value {tok:?}")))?;
    if !v.is_finite() {
        return Err(err(line, "non-finite value"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_general() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 3\n1 1 1.5\n2 3 -2\n1 2 4e0\n",
        )
        .unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.5, 4.0, 0.0], vec![0.0, 0.0, -2.0]]);
    }

    #[test]
    fn coordinate_symmetric_mirrors() {
        let m = parse_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 -1\n2 1 3\n").unwrap();
        assert_eq!(m.to_rows(), vec![vec![-1.0, 3.0], vec![3.0, 0.0]]);
    }

    #[test]
    fn array_general_is_column_major() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
    }

    #[test]
    fn array_symmetric_lower_triangle() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real symmetric\n2 2\n1 2\n5\n").unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, 2.0], vec![2.0, 5.0]]);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            "",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix array real general\n2 2\n1 2 3\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 3 0\n",
            "%%MatrixMarket matrix array real general\n1 1\nnan\n",
        ] {
            assert!(parse_matrix_market(text).is_err(), "{text:?}");
        }
    }
}
