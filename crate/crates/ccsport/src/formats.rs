//! Benchmark file formats and result CSVs.
//!
//! Instance files come in two layouts. The OR-Library layout is
//!
//! ```text
//! N
//! mu_1 sigma_1
//! ...
//! mu_N sigma_N
//! i j rho_ij        (1-based, at least the upper triangle)
//! ```
//!
//! The dense layout keeps the first N + 1 lines and replaces the triples by
//! N rows of N correlations each. [`InstanceLayout::Auto`] picks the
//! OR-Library layout when every correlation line is a triple whose first
//! two tokens are integers in `1..=N`, and the dense layout otherwise.
//!
//! Frontier files hold one `return variance` pair per line.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use ccsport_core::instance::InstanceError;
use ccsport_core::{FrontPoint, Instance, ReferenceFront};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag written into every result CSV header.
pub const CSV_VERSION: u32 = 1;

/// Tolerance for the two triangles of a correlation matrix to agree.
const TRIANGLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: asset index {index} outside 1..={n_assets}")]
    Bounds { line: usize, index: usize, n_assets: usize },
    #[error("correlation between assets {i} and {j} is missing")]
    Missing { i: usize, j: usize },
    #[error("line {line}: rho({i},{j}) = {given} disagrees with the earlier value {earlier}")]
    Disagreement {
        line: usize,
        i: usize,
        j: usize,
        given: f64,
        earlier: f64,
    },
    #[error("file is empty")]
    Empty,
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceLayout {
    #[default]
    Auto,
    #[serde(rename = "orlibrary")]
    OrLibrary,
    Dense,
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
}

fn number(token: &str, line: usize) -> Result<f64, FormatError> {
    let v: f64 = token.parse().map_err(|_| FormatError::Parse {
        line,
        message: format!("expected a number, found {token:?}"),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FormatError::Parse {
            line,
            message: format!("non-finite value {token:?}"),
        })
    }
}

fn index(token: &str, line: usize, n: usize) -> Result<usize, FormatError> {
    let i: usize = token.parse().map_err(|_| FormatError::Parse {
        line,
        message: format!("expected an asset index, found {token:?}"),
    })?;
    if i == 0 || i > n {
        return Err(FormatError::Bounds { line, index: i, n_assets: n });
    }
    Ok(i - 1)
}

fn arity(tokens: &[&str], want: usize, line: usize) -> Result<(), FormatError> {
    if tokens.len() != want {
        return Err(FormatError::Parse {
            line,
            message: format!("expected {want} fields, found {}", tokens.len()),
        });
    }
    Ok(())
}

fn is_triple(tokens: &[&str], n: usize) -> bool {
    tokens.len() == 3
        && tokens[..2]
            .iter()
            .all(|t| t.parse::<usize>().is_ok_and(|i| (1..=n).contains(&i)))
}

/// Parses an instance file. Missing off-diagonal correlations are an error;
/// the diagonal is set to one whether or not it is present.
pub fn parse_instance(name: &str, text: &str, layout: InstanceLayout) -> Result<Instance, FormatError> {
    let mut it = lines(text);
    let (first_line, head) = it.next().ok_or(FormatError::Empty)?;
    arity(&head, 1, first_line)?;
    let n: usize = head[0].parse().map_err(|_| FormatError::Parse {
        line: first_line,
        message: format!("expected the asset count, found {:?}", head[0]),
    })?;
    if n == 0 {
        return Err(FormatError::Parse {
            line: first_line,
            message: "asset count is zero".into(),
        });
    }
    let mut mu = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for k in 0..n {
        let (line, t) = it.next().ok_or(FormatError::Parse {
            line: first_line,
            message: format!("expected {n} return/deviation lines, found {k}"),
        })?;
        arity(&t, 2, line)?;
        mu.push(number(t[0], line)?);
        sigma.push(number(t[1], line)?);
    }
    let rest: Vec<(usize, Vec<&str>)> = it.collect();
    let layout = match layout {
        InstanceLayout::Auto if rest.iter().all(|(_, t)| is_triple(t, n)) => InstanceLayout::OrLibrary,
        InstanceLayout::Auto => InstanceLayout::Dense,
        other => other,
    };
    let rho = match layout {
        InstanceLayout::Dense => dense_block(&rest, n)?,
        _ => triples(&rest, n)?,
    };
    Ok(Instance::new(name, mu, sigma, rho)?)
}

fn triples(rest: &[(usize, Vec<&str>)], n: usize) -> Result<Vec<f64>, FormatError> {
    let mut rho: Vec<Option<f64>> = vec![None; n * n];
    for (line, t) in rest {
        let line = *line;
        arity(t, 3, line)?;
        let i = index(t[0], line, n)?;
        let j = index(t[1], line, n)?;
        let v = number(t[2], line)?;
        if i == j {
            continue;
        }
        for (a, b) in [(i, j), (j, i)] {
            match rho[a * n + b] {
                Some(earlier) if (earlier - v).abs() > TRIANGLE_TOLERANCE => {
                    return Err(FormatError::Disagreement {
                        line,
                        i: i + 1,
                        j: j + 1,
                        given: v,
                        earlier,
                    })
                }
                Some(_) => {}
                None => rho[a * n + b] = Some(v),
            }
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = if i == j {
                1.0
            } else {
                rho[i * n + j].ok_or(FormatError::Missing { i: i.min(j) + 1, j: i.max(j) + 1 })?
            };
        }
    }
    Ok(out)
}

fn dense_block(rest: &[(usize, Vec<&str>)], n: usize) -> Result<Vec<f64>, FormatError> {
    if rest.len() < n {
        return Err(FormatError::Missing {
            i: rest.len() + 1,
            j: 1,
        });
    }
    if let Some((line, _)) = rest.get(n) {
        return Err(FormatError::Parse {
            line: *line,
            message: format!("dense layout expects exactly {n} correlation rows"),
        });
    }
    let mut out = vec![0.0; n * n];
    for (i, (line, t)) in rest.iter().enumerate() {
        arity(t, n, *line)?;
        for (j, tok) in t.iter().enumerate() {
            out[i * n + j] = if i == j { 1.0 } else { number(tok, *line)? };
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (out[i * n + j], out[j * n + i]);
            if (a - b).abs() > TRIANGLE_TOLERANCE {
                return Err(FormatError::Disagreement {
                    line: rest[j].0,
                    i: j + 1,
                    j: i + 1,
                    given: b,
                    earlier: a,
                });
            }
            out[j * n + i] = a;
        }
    }
    Ok(out)
}

/// Parses the OR-Library layout.
pub fn parse_orlibrary(name: &str, text: &str) -> Result<Instance, FormatError> {
    parse_instance(name, text, InstanceLayout::OrLibrary)
}

/// Reads an instance file; the instance is named after the file stem.
pub fn read_instance(path: &Path, layout: InstanceLayout) -> Result<Instance, FormatError> {
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_instance(name, &text, layout)
}

/// Serializes in the OR-Library layout with the full upper triangle,
/// diagonal included.
pub fn write_orlibrary(inst: &Instance) -> String {
    let n = inst.n_assets();
    let mut out = String::new();
    let _ = writeln!(out, "{n}");
    for i in 0..n {
        let _ = writeln!(out, "{} {}", inst.mu()[i], inst.sigma()[i]);
    }
    for i in 0..n {
        for j in i..n {
            let _ = writeln!(out, "{} {} {}", i + 1, j + 1, inst.rho(i, j));
        }
    }
    out
}

/// Serializes in the dense layout.
pub fn write_dense(inst: &Instance) -> String {
    let n = inst.n_assets();
    let mut out = String::new();
    let _ = writeln!(out, "{n}");
    for i in 0..n {
        let _ = writeln!(out, "{} {}", inst.mu()[i], inst.sigma()[i]);
    }
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| inst.rho(i, j).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Parses `return variance` lines into a cleaned reference front. Also
/// returns how many points were dropped as dominated or duplicated.
pub fn parse_frontier(text: &str) -> Result<(ReferenceFront, usize), FormatError> {
    let mut points = Vec::new();
    for (line, t) in lines(text) {
        arity(&t, 2, line)?;
        points.push(FrontPoint::new(number(t[0], line)?, number(t[1], line)?));
    }
    if points.is_empty() {
        return Err(FormatError::Empty);
    }
    Ok(ReferenceFront::from_points(points)?)
}

pub fn read_frontier(path: &Path) -> Result<(ReferenceFront, usize), FormatError> {
    parse_frontier(&std::fs::read_to_string(path)?)
}

pub fn write_frontier(points: &[FrontPoint]) -> String {
    let mut out = String::new();
    for p in points {
        let _ = writeln!(out, "{} {}", p.ret, p.risk);
    }
    out
}

/// `key=value` pairs carried on the header comment line of a result CSV.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CsvMeta {
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl CsvMeta {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            fields: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn header_line(&self) -> String {
        let mut s = format!("# ccsport {} v{CSV_VERSION}", self.kind);
        for (k, v) in &self.fields {
            let _ = write!(s, " {k}={v}");
        }
        s
    }

    pub fn parse_header(line: &str) -> Option<Self> {
        let mut t = line.strip_prefix("# ccsport ")?.split_whitespace();
        let kind = t.next()?.to_string();
        let version = t.next()?.strip_prefix('v')?.parse::<u32>().ok()?;
        if version != CSV_VERSION {
            return None;
        }
        let fields = t
            .filter_map(|kv| kv.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Some(Self { kind, fields })
    }
}

/// One member of an obtained front.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub risk: f64,
    pub ret: f64,
    /// `(asset, lots)` with 0-based assets.
    pub holdings: Vec<(usize, u32)>,
}

fn holdings_field(holdings: &[(usize, u32)], lots_per_unit: u32) -> String {
    holdings
        .iter()
        .map(|&(a, l)| format!("{}:{}", a + 1, l as f64 / lots_per_unit as f64))
        .collect::<Vec<_>>()
        .join(";")
}

fn lots_field(holdings: &[(usize, u32)]) -> String {
    holdings
        .iter()
        .map(|&(a, l)| format!("{}:{}", a + 1, l))
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes a front CSV: the header comment, then `risk,return,weights,lots`
/// where both lists are sparse `asset:value` pairs (1-based assets).
pub fn write_front<W: Write>(
    out: W,
    meta: &CsvMeta,
    rows: &[FrontRow],
    lots_per_unit: u32,
) -> Result<(), FormatError> {
    let mut out = out;
    writeln!(out, "{}", meta.header_line())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["risk", "return", "weights", "lots"])?;
    for r in rows {
        w.write_record([
            r.risk.to_string(),
            r.ret.to_string(),
            holdings_field(&r.holdings, lots_per_unit),
            lots_field(&r.holdings),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_front`].
pub fn read_front<R: BufRead>(mut input: R) -> Result<(CsvMeta, Vec<FrontRow>), FormatError> {
    let mut header = String::new();
    input.read_line(&mut header)?;
    let meta = CsvMeta::parse_header(header.trim_end()).ok_or(FormatError::Parse {
        line: 1,
        message: "missing or unsupported ccsport header".into(),
    })?;
    let mut rows = Vec::new();
    let mut r = csv::Reader::from_reader(input);
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 3;
        if rec.len() != 4 {
            return Err(FormatError::Parse {
                line,
                message: format!("expected 4 fields, found {}", rec.len()),
            });
        }
        let mut holdings = Vec::new();
        for pair in rec[3].split(';').filter(|s| !s.is_empty()) {
            let (a, l) = pair.split_once(':').ok_or(FormatError::Parse {
                line,
                message: format!("bad holding {pair:?}"),
            })?;
            let a: usize = a.parse().ok().filter(|&a| a > 0).ok_or(FormatError::Parse {
                line,
                message: format!("bad asset {a:?}"),
            })?;
            let l: u32 = l.parse().map_err(|_| FormatError::Parse {
                line,
                message: format!("bad lot count {l:?}"),
            })?;
            holdings.push((a - 1, l));
        }
        rows.push(FrontRow {
            risk: number(&rec[0], line)?,
            ret: number(&rec[1], line)?,
            holdings,
        });
    }
    Ok((meta, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "3\n0.01 0.05\n0.02 0.06\n0.005 0.03\n1 1 1.0\n1 2 0.3\n1 3 0.1\n2 2 1\n2 3 -0.2\n3 3 1\n";

    #[test]
    fn minimal_instance() {
        let inst = parse_orlibrary("one", "1\n0.001 0.02\n1 1 1.0").unwrap();
        assert_eq!(inst.n_assets(), 1);
        assert_eq!(inst.mu(), &[0.001]);
        assert_eq!(inst.sigma(), &[0.02]);
        assert_eq!(inst.rho(0, 0), 1.0);
    }

    #[test]
    fn triples_are_mirrored() {
        let inst = parse_orlibrary("tiny", TINY).unwrap();
        assert_eq!(inst.rho(1, 0), 0.3);
        assert_eq!(inst.rho(2, 1), -0.2);
        assert_eq!(inst.cov(0, 1), 0.3 * 0.05 * 0.06);
    }

    #[test]
    fn diagonal_is_forced_to_one() {
        let text = TINY.replace("2 2 1\n", "2 2 0.97\n");
        assert_eq!(parse_orlibrary("t", &text).unwrap().rho(1, 1), 1.0);
        let text = TINY.replace("1 1 1.0\n", "");
        assert_eq!(parse_orlibrary("t", &text).unwrap().rho(0, 0), 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = TINY.replace("0.02 0.06", "0.02 abc");
        match parse_orlibrary("t", &text) {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = TINY.replace("2 3 -0.2", "2 4 -0.2");
        assert!(matches!(
            parse_orlibrary("t", &text),
            Err(FormatError::Bounds { line: 9, index: 4, n_assets: 3 })
        ));
        let text = TINY.replace("1 3 0.1\n", "");
        assert!(matches!(parse_orlibrary("t", &text), Err(FormatError::Missing { i: 1, j: 3 })));
        let text = format!("{TINY}3 1 0.2\n");
        assert!(matches!(parse_orlibrary("t", &text), Err(FormatError::Disagreement { .. })));
        let text = format!("{TINY}3 1 0.1000000001\n");
        assert!(parse_orlibrary("t", &text).is_ok());
        assert!(matches!(parse_orlibrary("t", ""), Err(FormatError::Empty)));
    }

    #[test]
    fn dense_layout_and_detection() {
        let inst = parse_orlibrary("tiny", TINY).unwrap();
        let dense = write_dense(&inst);
        let back = parse_instance("tiny", &dense, InstanceLayout::Auto).unwrap();
        let again = parse_instance("tiny", &dense, InstanceLayout::Dense).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.rho(i, j), inst.rho(i, j));
                assert_eq!(again.rho(i, j), inst.rho(i, j));
            }
        }
        let auto = parse_instance("tiny", TINY, InstanceLayout::Auto).unwrap();
        assert_eq!(auto.rho(0, 2), 0.1);
    }

    #[test]
    fn frontier_sorting_and_cleaning() {
        let (f, removed) = parse_frontier("0.005 0.0002\n0.004 0.0001\n").unwrap();
        assert_eq!(removed, 0);
        assert_eq!(f.points()[0], FrontPoint::new(0.004, 0.0001));
        let (f, removed) = parse_frontier("0.005 0.0002\n0.004 0.0001\n0.0045 0.0003\n").unwrap();
        assert_eq!((f.len(), removed), (2, 1));
        assert!(matches!(parse_frontier("\n\n"), Err(FormatError::Empty)));
        assert!(matches!(parse_frontier("0.1 x\n"), Err(FormatError::Parse { line: 1, .. })));
    }

    #[test]
    fn front_csv_round_trip() {
        let meta = CsvMeta::new("front").with("seed", 42u64).with("config_hash", "abcd");
        let rows = vec![
            FrontRow {
                risk: 0.1 + 0.2,
                ret: -1e-300,
                holdings: vec![(0, 3), (7, 122)],
            },
            FrontRow {
                risk: 1.0 / 3.0,
                ret: 0.004,
                holdings: vec![(29, 125)],
            },
        ];
        let mut buf = Vec::new();
        write_front(&mut buf, &meta, &rows, 125).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# ccsport front v1 seed=42 config_hash=abcd\n"));
        assert!(text.contains("1:0.024;8:0.976"));
        let (m, back) = read_front(&buf[..]).unwrap();
        assert_eq!(m, meta);
        assert_eq!(back, rows);
    }
}
