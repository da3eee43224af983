//! Plain-text matrix format.
//!
//! ```text
//! m n d dp
//! <m lines of n characters in {0,1}>
//! ```
//!
//! Every line, including the last, ends with `\n`. Several matrices in one
//! file are separated by a single blank line.
//!
//! Two looser variants are written for samples that are not biregular 0/1
//! matrices and are never accepted by [`parse_matrix`]: Erdős–Rényi samples
//! use the header `m n - -`, and permutation-model multiplicity matrices use
//! `n n d d` followed by rows of space-separated integers.

use super::{BiregularBitMatrix, BitMatrix};
use crate::error::{Error, Result};
use crate::samplers::PermutationTuple;

pub fn format_matrix(m: &BiregularBitMatrix) -> String {
    let mut out = format!("{} {} {} {}\n", m.m(), m.n(), m.d(), m.dp());
    push_rows(&mut out, m.bits());
    out
}

pub fn format_matrices<'a>(ms: impl IntoIterator<Item = &'a BiregularBitMatrix>) -> String {
    ms.into_iter().map(format_matrix).collect::<Vec<_>>().join("\n")
}

/// Header `m n - -`; no margin constraint.
pub fn format_plain(bits: &BitMatrix) -> String {
    let mut out = format!("{} {} - -\n", bits.rows(), bits.cols());
    push_rows(&mut out, bits);
    out
}

pub fn format_multiplicity(perms: &PermutationTuple) -> String {
    let (n, d) = (perms.n(), perms.d());
    let mut out = format!("{n} {n} {d} {d}\n");
    for row in perms.multiplicity() {
        let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn push_rows(out: &mut String, bits: &BitMatrix) {
    for i in 0..bits.rows() {
        out.extend((0..bits.cols()).map(|j| if bits.get(i, j) { '1' } else { '0' }));
        out.push('\n');
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parse exactly one matrix.
pub fn parse_matrix(text: &str) -> Result<BiregularBitMatrix> {
    let mut all = parse_matrices(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        k => Err(parse_err(1, format!("expected one matrix, found {k}"))),
    }
}

/// Parse one or more blank-line separated matrices.
pub fn parse_matrices(text: &str) -> Result<Vec<BiregularBitMatrix>> {
    if text.is_empty() {
        return Err(parse_err(1, "empty input"));
    }
    if !text.ends_with('\n') {
        return Err(parse_err(text.lines().count(), "missing trailing newline"));
    }
    let lines: Vec<&str> = text.split('\n').collect();
    // `split` leaves one empty element after the final newline.
    let lines = &lines[..lines.len() - 1];
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < lines.len() {
        let (m, consumed) = parse_block(lines, pos)?;
        out.push(m);
        pos += consumed;
        if pos < lines.len() {
            if !lines[pos].is_empty() {
                return Err(parse_err(pos + 1, "expected a blank line between matrices"));
            }
            pos += 1;
            if pos == lines.len() {
                return Err(parse_err(pos, "trailing blank line"));
            }
        }
    }
    Ok(out)
}

fn parse_block(lines: &[&str], start: usize) -> Result<(BiregularBitMatrix, usize)> {
    let header_line = start + 1;
    let fields: Vec<&str> = lines[start].split(' ').collect();
    if fields.len() != 4 {
        return Err(parse_err(header_line, "header must be `m n d dp`"));
    }
    let mut nums = [0usize; 4];
    for (k, f) in fields.iter().enumerate() {
        nums[k] = f.parse().map_err(|_| parse_err(header_line, format!("bad header field `{f}`")))?;
    }
    let [m, n, d, dp] = nums;
    if start + 1 + m > lines.len() {
        return Err(parse_err(lines.len(), format!("expected {m} rows after header")));
    }
    let mut bits = BitMatrix::zeros(m, n);
    for i in 0..m {
        let line_no = start + 2 + i;
        let row = lines[start + 1 + i].as_bytes();
        if row.len() != n {
            return Err(parse_err(line_no, format!("row {i} has {} characters, expected {n}", row.len())));
        }
        for (j, &c) in row.iter().enumerate() {
            match c {
                b'0' => {}
                b'1' => bits.set(i, j, true),
                _ => return Err(parse_err(line_no, format!("invalid character at column {j}"))),
            }
        }
    }
    let matrix = BiregularBitMatrix::new(bits, d, dp)?;
    Ok((matrix, 1 + m))
}
