//! Plain-text matrix format.
//!
//! ```text
//! # optional comment lines
//! 2
//! 1 0.5
//! 0.5 1
//! ```
//!
//! The first non-comment line holds `n`, followed by `n` rows of `n` reals.
//! The writer prints 17 significant digits so values survive a round trip.

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use std::fmt::Write as _;
use std::path::Path;

pub fn load_graphon(path: impl AsRef<Path>) -> Result<StepGraphon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_graphon(&text, path)
}

/// Parses the matrix format; `origin` is only used in error messages.
pub fn parse_graphon(text: &str, origin: &Path) -> Result<StepGraphon> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| perr(hl, format!("expected cell count, found {header:?}")))?;
    if n == 0 {
        return Err(perr(hl, "cell count must be positive".into()));
    }

    let mut values = Vec::with_capacity(n * n);
    for row in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| perr(hl + row + 1, format!("missing row {row}")))?;
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| perr(ln, format!("not a number: {tok:?}")))?;
            values.push(v);
        }
        let got = values.len() - before;
        if got != n {
            return Err(perr(ln, format!("row {row} has {got} entries, expected {n}")));
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, format!("trailing data after {n} rows")));
    }
    StepGraphon::new(n, values)
}

pub fn format_graphon(w: &StepGraphon) -> String {
    let n = w.n();
    let mut out = String::with_capacity(n * n * 24 + 8);
    let _ = writeln!(out, "{n}");
    for i in 0..n {
        for (j, v) in w.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn save_graphon(w: &StepGraphon, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_graphon(w)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
