use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::PointSet;
use crate::error::{Error, Result};

/// Reads one point per row, `d` comma-separated decimal columns. Lines
/// starting with `#` and blank lines are skipped.
pub fn read_csv<R: Read>(reader: R, origin: &Path) -> Result<PointSet> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut dim = None;
    let mut coords = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = 0;
        for field in trimmed.split(',') {
            let field = field.trim();
            let x: f64 = field
                .parse()
                .map_err(|_| parse_err(lineno, format!("cannot parse {field:?} as a number")))?;
            if !x.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value {field:?}")));
            }
            coords.push(x);
            cols += 1;
        }
        match dim {
            None => dim = Some(cols),
            Some(d) if d != cols => {
                return Err(parse_err(lineno, format!("expected {d} columns, found {cols}")));
            }
            Some(_) => {}
        }
    }
    let dim = dim.ok_or_else(|| parse_err(0, "no data rows".into()))?;
    PointSet::new(dim, coords)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, path)
}

/// Writes a `#`-prefixed header and one row per point. `{:?}` formatting is the
/// shortest decimal that parses back to the same bits.
pub fn write_csv<W: Write>(ps: &PointSet, mut out: W) -> std::io::Result<()> {
    let header: Vec<String> = (1..=ps.dim()).map(|i| format!("x{i}")).collect();
    writeln!(out, "# {}", header.join(","))?;
    for p in ps.iter() {
        for (i, x) in p.iter().enumerate() {
            if i > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{x:?}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_csv(ps: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: PathBuf::from(path),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv(ps, BufWriter::new(file)).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<PointSet> {
        read_csv(text.as_bytes(), Path::new("test.csv"))
    }

    #[test]
    fn header_and_blank_lines_are_skipped() {
        let ps = parse("# x,y\n0,0.25\n\n1e-3, -2\n").unwrap();
        assert_eq!(ps.to_rows(), vec![vec![0.0, 0.25], vec![0.001, -2.0]]);
    }

    #[test]
    fn malformed_rows_are_reported_with_line_numbers() {
        match parse("0,1\n2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("0,abc\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("0,inf\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("# only a header\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        let ps = PointSet::from_rows(&[[0.1, 1.0 / 3.0], [-0.0, 5e-324]]).unwrap();
        save_csv(&ps, &path).unwrap();
        let back = load_csv(&path).unwrap();
        let bits = |p: &PointSet| p.coords().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&ps));
        assert!(matches!(
            load_csv(dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            rows in prop::collection::vec(prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 2), 1..20)
        ) {
            let ps = PointSet::from_rows(&rows).unwrap();
            let mut buf = Vec::new();
            write_csv(&ps, &mut buf).unwrap();
            let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
            let bits = |p: &PointSet| p.coords().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&ps));
        }
    }
}
