//! Plain-text interchange format for cone programs.
//!
//! Layout (whitespace-delimited, floats printed with 17 significant
//! digits):
//!
//! ```text
//! CONIC v1
//! <nvars> <neq_rows> <nnz> <nblocks>
//! <nnz lines:  row col value>
//! <neq_rows values of b>
//! <nvars values of c>
//! <nblocks lines:  free|nonneg|soc N   or   psd SIDE>
//! ```

use std::fmt::Write as _;

use super::{ConeBlock, ConicError, ConicProblem, SparseMatrix};

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize a problem to the CONIC v1 text format.
pub fn write_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    out.push_str("CONIC v1\n");
    let _ = writeln!(
        out,
        "{} {} {} {}",
        p.num_vars(),
        p.a.nrows,
        p.a.entries.len(),
        p.blocks.len()
    );
    for &(i, j, v) in &p.a.entries {
        let _ = writeln!(out, "{} {} {}", i, j, fmt_f64(v));
    }
    for v in &p.b {
        let _ = writeln!(out, "{}", fmt_f64(*v));
    }
    for v in &p.c {
        let _ = writeln!(out, "{}", fmt_f64(*v));
    }
    for b in &p.blocks {
        let line = match *b {
            ConeBlock::Free(n) => format!("free {n}"),
            ConeBlock::NonNeg(n) => format!("nonneg {n}"),
            ConeBlock::Soc(n) => format!("soc {n}"),
            ConeBlock::Psd(s) => format!("psd {s}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parse the CONIC v1 text format.
pub fn read_problem(text: &str) -> Result<ConicProblem, ConicError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim();
    if header != "CONIC v1" {
        return Err(ConicError::Parse(format!("bad header: {header:?}")));
    }
    let rest: Vec<&str> = lines.flat_map(|l| l.split_whitespace()).collect();
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<&str, ConicError> {
        let tok = rest
            .get(pos)
            .ok_or_else(|| ConicError::Parse(format!("unexpected end of file at {what}")))?;
        pos += 1;
        Ok(tok)
    };
    let parse_usize = |tok: &str, what: &str| -> Result<usize, ConicError> {
        tok.parse()
            .map_err(|_| ConicError::Parse(format!("bad {what}: {tok:?}")))
    };
    let parse_f64 = |tok: &str, what: &str| -> Result<f64, ConicError> {
        tok.parse()
            .map_err(|_| ConicError::Parse(format!("bad {what}: {tok:?}")))
    };

    let nvars = parse_usize(next("nvars")?, "nvars")?;
    let neq = parse_usize(next("neq")?, "neq")?;
    let nnz = parse_usize(next("nnz")?, "nnz")?;
    let nblocks = parse_usize(next("nblocks")?, "nblocks")?;

    let mut a = SparseMatrix::new(neq, nvars);
    for _ in 0..nnz {
        let i = parse_usize(next("entry row")?, "row")?;
        let j = parse_usize(next("entry col")?, "col")?;
        let v = parse_f64(next("entry value")?, "value")?;
        if i >= neq || j >= nvars {
            return Err(ConicError::Parse(format!("entry ({i}, {j}) out of range")));
        }
        a.entries.push((i, j, v));
    }
    let mut b = Vec::with_capacity(neq);
    for _ in 0..neq {
        b.push(parse_f64(next("b value")?, "b")?);
    }
    let mut c = Vec::with_capacity(nvars);
    for _ in 0..nvars {
        c.push(parse_f64(next("c value")?, "c")?);
    }
    let mut blocks = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let kind = next("block kind")?.to_string();
        let size = parse_usize(next("block size")?, "block size")?;
        blocks.push(match kind.as_str() {
            "free" => ConeBlock::Free(size),
            "nonneg" => ConeBlock::NonNeg(size),
            "soc" => ConeBlock::Soc(size),
            "psd" => ConeBlock::Psd(size),
            other => return Err(ConicError::Parse(format!("unknown block kind {other:?}"))),
        });
    }
    let p = ConicProblem::new(c, a, b, blocks);
    p.validate()?;
    Ok(p)
}
