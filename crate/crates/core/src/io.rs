//! Text formats.
//!
//! Hypergraph file: a header line `n m`, then `m` lines `i j k` with 0-based
//! vertex indices. State file: a header line `n t`, then `n` lines holding
//! one real each, written with 17 significant digits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph3, StateVector};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Yields `(line_number, trimmed_line)` for non-blank lines.
fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l.trim().to_string())).map_err(Error::from))
        .filter(|r| !matches!(r, Ok((_, l)) if l.is_empty()))
}

fn fields<const N: usize, T: std::str::FromStr>(line: usize, text: &str, what: &str) -> Result<[T; N]> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != N {
        return Err(parse_err(line, format!("expected {N} fields for {what}, found {}", parts.len())));
    }
    let mut out = Vec::with_capacity(N);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| parse_err(line, format!("cannot parse {p:?} in {what}")))?);
    }
    out.try_into().map_err(|_| unreachable!())
}

pub fn write_hypergraph<W: Write>(h: &Hypergraph3, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", h.n(), h.num_triples())?;
    for [a, b, c] in h.triples() {
        writeln!(out, "{a} {b} {c}")?;
    }
    Ok(())
}

pub fn hypergraph_to_string(h: &Hypergraph3) -> String {
    let mut buf = Vec::new();
    write_hypergraph(h, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads a hypergraph file, returning the canonical hypergraph and the
/// number of duplicate triples that were collapsed.
pub fn read_hypergraph<R: BufRead>(reader: R) -> Result<(Hypergraph3, usize)> {
    let mut lines = content_lines(reader);
    let (hl, header) = lines.next().transpose()?.ok_or_else(|| parse_err(1, "missing header"))?;
    let [n, m] = fields::<2, usize>(hl, &header, "header \"n m\"")?;
    let mut triples = Vec::with_capacity(m);
    for item in lines {
        let (ln, text) = item?;
        let t = fields::<3, i64>(ln, &text, "triple")?;
        triples.push((ln, t));
    }
    if triples.len() != m {
        return Err(parse_err(hl, format!("header declares {m} triples, found {}", triples.len())));
    }
    Hypergraph3::from_edge_list(n, triples.iter().map(|(_, t)| *t)).map_err(|e| match e {
        Error::OutOfRange { triple, .. } | Error::DegenerateTriple { triple, .. } => {
            parse_err(triples[triple].0, e.to_string())
        }
        other => other,
    })
}

pub fn write_state<W: Write>(x: &StateVector, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", x.len(), x.time)?;
    for v in &x.values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

pub fn state_to_string(x: &StateVector) -> String {
    let mut buf = Vec::new();
    write_state(x, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_state<R: BufRead>(reader: R) -> Result<StateVector> {
    let mut lines = content_lines(reader);
    let (hl, header) = lines.next().transpose()?.ok_or_else(|| parse_err(1, "missing header"))?;
    let [n, t] = fields::<2, u64>(hl, &header, "header \"n t\"")?;
    let mut values = Vec::with_capacity(n as usize);
    for item in lines {
        let (ln, text) = item?;
        let [v] = fields::<1, f64>(ln, &text, "state value")?;
        values.push(v);
    }
    if values.len() as u64 != n {
        return Err(parse_err(hl, format!("header declares {n} values, found {}", values.len())));
    }
    Ok(StateVector { values, time: t, seed: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::generate_torus;

    #[test]
    fn hypergraph_file_layout() {
        let h = generate_torus(5, 1).unwrap();
        assert_eq!(hypergraph_to_string(&h), "5 5\n0 1 2\n0 1 4\n0 3 4\n1 2 3\n2 3 4\n");
    }

    #[test]
    fn reads_unsorted_input_with_blank_lines() {
        let (h, dup) = read_hypergraph("4 3\n\n2 1 0\n3 0 1\n0 1 2\n".as_bytes()).unwrap();
        assert_eq!(dup, 1);
        assert_eq!(h.triples(), &[[0, 1, 2], [0, 1, 3]]);
    }

    #[test]
    fn line_numbered_errors() {
        let err = read_hypergraph("4 2\n0 1 2\n0 1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_hypergraph("4 2\n0 1 2\n0 1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_hypergraph("4 3\n0 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn state_round_trip_is_exact() {
        let x = StateVector {
            values: vec![1.0, -1.0, 1.0 / 3.0, f64::MIN_POSITIVE, -0.1 + 0.2, 1e300],
            time: 12,
            seed: None,
        };
        let back = read_state(state_to_string(&x).as_bytes()).unwrap();
        assert_eq!(back, x);
    }
}
