use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use super::{CsrMatrix, LinalgError};

const BANNER: &str = "%%MatrixMarket matrix coordinate real general";

/// Writes `a` in MatrixMarket coordinate format (1-based indices).
pub fn write_matrix_market<W: Write>(a: &CsrMatrix, mut out: W) -> std::io::Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "{BANNER}");
    let _ = writeln!(text, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(text, "{} {} {:e}", i + 1, j + 1, v);
    }
    out.write_all(text.as_bytes())
}

/// Reads a `coordinate real general` (or `symmetric`) MatrixMarket file.
pub fn read_matrix_market<R: Read>(input: R) -> Result<CsrMatrix, LinalgError> {
    let err = |msg: String| LinalgError::MatrixMarket(msg);
    let mut lines = BufReader::new(input).lines().enumerate();

    let (_, banner) = lines.next().ok_or_else(|| err("empty input".into()))?;
    let banner = banner.map_err(|e| err(e.to_string()))?;
    let lower = banner.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate") {
        return Err(err(format!("unsupported banner `{banner}`")));
    }
    let symmetric = lower.contains("symmetric");
    if !(lower.contains("real") || lower.contains("integer")) {
        return Err(err("only real or integer fields are supported".into()));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| err(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("line {}: bad integer `{s}`", lineno + 1)))
        };
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(err(format!("line {}: expected size line", lineno + 1)));
                }
                size = Some((
                    parse_usize(fields[0])?,
                    parse_usize(fields[1])?,
                    parse_usize(fields[2])?,
                ));
            }
            Some(_) => {
                if fields.len() != 3 {
                    return Err(err(format!("line {}: expected `i j value`", lineno + 1)));
                }
                let i = parse_usize(fields[0])?;
                let j = parse_usize(fields[1])?;
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|_| err(format!("line {}: bad value `{}`", lineno + 1, fields[2])))?;
                if i == 0 || j == 0 {
                    return Err(err(format!("line {}: indices are 1-based", lineno + 1)));
                }
                entries.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    entries.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nrows, ncols, nnz) = size.ok_or_else(|| err("missing size line".into()))?;
    let stored = if symmetric {
        entries.iter().filter(|e| e.0 >= e.1).count()
    } else {
        entries.len()
    };
    if stored != nnz {
        return Err(err(format!("declared {nnz} entries, found {stored}")));
    }
    CsrMatrix::from_triplets(nrows, ncols, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a = CsrMatrix::from_triplets(3, 2, &[(0, 0, 1.5), (2, 1, -2.0e-7), (1, 0, 3.0)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(BANNER));
        assert_eq!(read_matrix_market(buf.as_slice()).unwrap(), a);
    }

    #[test]
    fn symmetric_storage_is_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1\n";
        let a = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 4\n";
        assert!(read_matrix_market(text.as_bytes()).is_err());
    }
}
