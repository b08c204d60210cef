//! Delimited-text ingestion of feature files and seed lists.
//!
//! Feature files hold one transaction per line, fields separated by commas or
//! tabs. Blank lines and lines starting with `#` are skipped.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Skip the first non-comment line.
    pub header: bool,
    /// First field of each row is an integer transaction ID.
    pub id_column: bool,
}

/// Mapping between external transaction IDs and internal 0-based row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeIds {
    /// External ID = row index + base.
    Offset { base: i64, n: usize },
    /// IDs read from the file's leading column.
    Explicit(Vec<i64>),
}

impl NodeIds {
    pub fn len(&self) -> usize {
        match self {
            NodeIds::Offset { n, .. } => *n,
            NodeIds::Explicit(ids) => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn external(&self, index: usize) -> i64 {
        match self {
            NodeIds::Offset { base, .. } => index as i64 + base,
            NodeIds::Explicit(ids) => ids[index],
        }
    }

    pub fn index_of(&self, id: i64) -> Result<usize> {
        let found = match self {
            NodeIds::Offset { base, n } => {
                let i = id - base;
                (i >= 0 && (i as usize) < *n).then_some(i as usize)
            }
            NodeIds::Explicit(ids) => ids.iter().position(|&x| x == id),
        };
        found.ok_or_else(|| Error::Validation(format!("seed ID {id} does not match any row")))
    }
}

#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub features: FeatureMatrix,
    /// IDs from the leading column, when requested.
    pub ids: Option<Vec<i64>>,
}

fn split_fields(line: &str) -> Vec<&str> {
    let sep = if line.contains('\t') { '\t' } else { ',' };
    line.split(sep).map(str::trim).collect()
}

pub fn read_features<R: BufRead>(
    reader: R,
    opts: ReadOptions,
    source: &str,
) -> Result<FeatureTable> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let mut values = Vec::new();
    let mut ids = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0usize;
    let mut header_pending = opts.header;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let mut fields = split_fields(trimmed);
        if opts.id_column {
            let id = fields.remove(0);
            ids.push(
                id.parse::<i64>()
                    .map_err(|_| parse_err(lineno, format!("invalid ID '{id}'")))?,
            );
        }
        match cols {
            None => cols = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(parse_err(
                    lineno,
                    format!("expected {c} feature columns, found {}", fields.len()),
                ))
            }
            _ => {}
        }
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| {
                parse_err(lineno, format!("column {}: invalid number '{f}'", c + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    lineno,
                    format!("column {}: non-finite value", c + 1),
                ));
            }
            values.push(v);
        }
        rows += 1;
    }

    let features =
        FeatureMatrix::new(rows, cols.unwrap_or(0), values).map_err(|e| Error::Parse {
            path: source.to_string(),
            line: 0,
            message: e.to_string(),
        })?;
    if opts.id_column {
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(parse_err(0, format!("duplicate ID {}", w[0])));
        }
    }
    Ok(FeatureTable {
        features,
        ids: opts.id_column.then_some(ids),
    })
}

pub fn read_features_path(path: &Path, opts: ReadOptions) -> Result<FeatureTable> {
    let file = File::open(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    read_features(BufReader::new(file), opts, &path.display().to_string())
}

/// Parses IDs separated by commas and/or whitespace.
pub fn parse_seed_list(text: &str) -> Result<Vec<i64>> {
    let ids = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::Validation(format!("invalid seed ID '{t}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if ids.is_empty() {
        return Err(Error::Validation("no seed IDs given".into()));
    }
    Ok(ids)
}

/// Writes rows as comma-separated values using shortest round-trip formatting.
pub fn write_features<W: Write>(x: &FeatureMatrix, mut out: W) -> io::Result<()> {
    for i in 0..x.rows() {
        let line: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, opts: ReadOptions) -> Result<FeatureTable> {
        read_features(text.as_bytes(), opts, "mem")
    }

    #[test]
    fn comma_and_tab() {
        let t = read("1,2\n3,4\n", ReadOptions::default()).unwrap();
        assert_eq!(t.features.row(1), &[3.0, 4.0]);
        let t = read("1\t2\n3\t4\n", ReadOptions::default()).unwrap();
        assert_eq!(t.features.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn header_and_ids() {
        let t = read(
            "id,a,b\n# comment\n7,1,2\n\n9,3,4\n",
            ReadOptions {
                header: true,
                id_column: true,
            },
        )
        .unwrap();
        assert_eq!(t.ids, Some(vec![7, 9]));
        assert_eq!(t.features.rows(), 2);
    }

    #[test]
    fn errors_name_the_line() {
        match read("1,2\n3,x\n", ReadOptions::default()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("'x'"));
            }
            other => panic!("{other:?}"),
        }
        match read("1,2\n3\n", ReadOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(read("1,2\n", ReadOptions::default()).is_err());
        assert!(read("1,nan\n2,3\n", ReadOptions::default()).is_err());
    }

    #[test]
    fn node_ids() {
        let one = NodeIds::Offset { base: 1, n: 390 };
        assert_eq!(one.index_of(5).unwrap(), 4);
        assert_eq!(one.external(368), 369);
        assert!(one.index_of(0).is_err());
        assert!(one.index_of(391).is_err());
        let ex = NodeIds::Explicit(vec![10, 20, 30]);
        assert_eq!(ex.index_of(20).unwrap(), 1);
        assert!(ex.index_of(5).is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seed_list("5,53, 369").unwrap(), vec![5, 53, 369]);
        assert_eq!(parse_seed_list("5\n53\n").unwrap(), vec![5, 53]);
        assert!(parse_seed_list("").is_err());
        assert!(parse_seed_list("a").is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let x = FeatureMatrix::from_rows(&[vec![0.1, -3.25], vec![1e-300, 7.0]]).unwrap();
        let mut buf = Vec::new();
        write_features(&x, &mut buf).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap(), ReadOptions::default()).unwrap();
        assert_eq!(back.features, x);
    }
}
