use std::io::{BufRead, Write};

use super::format_float;
use crate::data::{Dataset, Rows, SparseRow};
use crate::error::{Error, Result};
use crate::objectives::Rating;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read_lines(reader: impl BufRead) -> impl Iterator<Item = (usize, Result<String>)> {
    reader.lines().enumerate().map(|(k, l)| {
        (
            k + 1,
            l.map_err(|e| parse_err(k + 1, format!("read failed: {e}"))),
        )
    })
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parses `<label> <idx>:<val> ...` lines with 1-based, strictly increasing
/// indices. Blank lines and `#` comments are skipped. The dimension is the
/// largest index seen unless `dim` overrides it.
pub fn parse_libsvm(reader: impl BufRead, dim: Option<usize>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    let mut last_line = 0;
    for (lineno, line) in read_lines(reader) {
        last_line = lineno;
        let line = line?;
        let body = strip_comment(&line);
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid label `{label_tok}`")))?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected `index:value`, got `{tok}`")))?;
            let i: usize = i
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid index in `{tok}`")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid value in `{tok}`")))?;
            if i == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            if indices.last().is_some_and(|&prev| i - 1 <= prev) {
                return Err(parse_err(lineno, format!("index {i} is not increasing")));
            }
            if !v.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value in `{tok}`")));
            }
            max_index = max_index.max(i);
            indices.push(i - 1);
            values.push(v);
        }
        if !label.is_finite() {
            return Err(parse_err(lineno, "non-finite label"));
        }
        rows.push(SparseRow::new(indices, values).map_err(|e| parse_err(lineno, e.to_string()))?);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(parse_err(last_line.max(1), "no data rows"));
    }
    let d = match dim {
        Some(d) if d < max_index => {
            return Err(Error::invalid(format!(
                "dimension override {d} is smaller than the largest index {max_index}"
            )))
        }
        Some(d) => d,
        None => max_index.max(1),
    };
    Dataset::sparse(rows, labels, d)
}

/// Writes a dataset in LIBSVM format, emitting stored entries of sparse rows
/// and nonzeros of dense rows.
pub fn write_libsvm(data: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    for i in 0..data.len() {
        write!(out, "{}", format_float(data.label(i)))?;
        match data.rows() {
            Rows::Sparse(rows) => {
                for (j, v) in rows[i].iter() {
                    write!(out, " {}:{}", j + 1, format_float(v))?;
                }
            }
            Rows::Dense(_) => {
                for (j, v) in data.row(i).to_dense(data.dim()).into_iter().enumerate() {
                    if v != 0.0 {
                        write!(out, " {}:{}", j + 1, format_float(v))?;
                    }
                }
            }
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses whitespace-separated `i j rating` triples with 0-based indices.
pub fn parse_ratings(reader: impl BufRead) -> Result<Vec<Rating>> {
    let mut out = Vec::new();
    let mut last_line = 0;
    for (lineno, line) in read_lines(reader) {
        last_line = lineno;
        let line = line?;
        let body = strip_comment(&line);
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, format!("expected `i j rating`, got {} fields", fields.len())));
        }
        let row = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid row index `{}`", fields[0])))?;
        let col = fields[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid column index `{}`", fields[1])))?;
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid rating `{}`", fields[2])))?;
        if !value.is_finite() {
            return Err(parse_err(lineno, "non-finite rating"));
        }
        out.push(Rating { row, col, value });
    }
    if out.is_empty() {
        return Err(parse_err(last_line.max(1), "no ratings"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<Dataset> {
        parse_libsvm(s.as_bytes(), None)
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn single_row() {
        let d = parse("1 1:0.5 3:2.0").unwrap();
        assert_eq!((d.len(), d.dim()), (1, 3));
        assert_eq!(d.label(0), 1.0);
        assert_eq!(d.row(0).to_dense(3), vec![0.5, 0.0, 2.0]);
    }

    #[test]
    fn signed_labels_and_comments() {
        let d = parse("# header\n-1 2:1.0\n\n+1 1:1.0 # trailing\n").unwrap();
        assert_eq!(d.labels(), &[-1.0, 1.0]);
        assert_eq!(d.dim(), 2);
    }

    #[test]
    fn errors_carry_lines() {
        assert_eq!(line_of(parse("1 3:1 2:1").unwrap_err()), 1);
        assert_eq!(line_of(parse("1 1:1\n1 1:x").unwrap_err()), 2);
        assert_eq!(line_of(parse("1 1:1\nabc 1:1").unwrap_err()), 2);
        assert_eq!(line_of(parse("1 0:1").unwrap_err()), 1);
        assert_eq!(line_of(parse("1 2:1 2:3").unwrap_err()), 1);
        assert!(matches!(parse(""), Err(Error::Parse { .. })));
        assert!(matches!(parse("# only\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn dimension_override() {
        assert_eq!(parse_libsvm("1 2:1".as_bytes(), Some(5)).unwrap().dim(), 5);
        assert!(parse_libsvm("1 6:1".as_bytes(), Some(5)).is_err());
    }

    #[test]
    fn dense_writes_nonzeros() {
        let d = Dataset::dense(vec![0.0, 2.5, 1e-7, 0.0], vec![1.0, -1.0], 2).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&d, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1 2:2.5\n-1 1:1e-7\n");
    }

    #[test]
    fn ratings() {
        let r = parse_ratings("0 1 4.5\n# c\n2 0 -1\n".as_bytes()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!((r[1].row, r[1].col, r[1].value), (2, 0, -1.0));
        assert!(matches!(parse_ratings("0 1".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(parse_ratings("".as_bytes()).is_err());
    }

    fn canonical() -> impl Strategy<Value = (Vec<(Vec<usize>, Vec<f64>)>, Vec<f64>)> {
        let row = prop::collection::btree_map(0usize..20, -1e6f64..1e6, 1..6).prop_map(|m| {
            let (i, v): (Vec<usize>, Vec<f64>) = m.into_iter().filter(|(_, v)| *v != 0.0).unzip();
            (i, v)
        });
        (1usize..8).prop_flat_map(move |n| {
            (
                prop::collection::vec(row.clone(), n),
                prop::collection::vec(-10f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity((rows, labels) in canonical()) {
            let rows: Vec<SparseRow> = rows
                .into_iter()
                .map(|(i, v)| SparseRow::new(i, v).unwrap())
                .collect();
            let data = Dataset::sparse(rows, labels, 20).unwrap();
            let mut buf = Vec::new();
            write_libsvm(&data, &mut buf).unwrap();
            let back = parse_libsvm(buf.as_slice(), Some(20)).unwrap();
            prop_assert_eq!(back, data);
        }
    }
}
