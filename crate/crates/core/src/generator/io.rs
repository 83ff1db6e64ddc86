//! Plain-text dataset format.
//!
//! ```text
//! dim3-dataset 1
//! name sampson
//! n 3
//! T 2
//! nodes a b c          (optional)
//! times t1 t2          (optional)
//! block 0
//! - 1 0
//! 0 - 1
//! 1 1 -
//! block 1
//! ...
//! truth                (optional section)
//! case 1               (optional)
//! membership 3
//! 0.8 0.2 0
//! ...                  (n rows)
//! compat 3
//! ...                  (K rows)
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Floats are written in
//! shortest round-trip form so save/load is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::generator::{DatasetBundle, GroundTruth};
use crate::model::{CompatibilityMatrix, RelationTensor};

const MAGIC: &str = "dim3-dataset";
const VERSION: &str = "1";

pub fn save_dataset(bundle: &DatasetBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_dataset(bundle)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<DatasetBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, path)
}

pub fn format_dataset(bundle: &DatasetBundle) -> String {
    let d = &bundle.data;
    let n = d.n();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "name {}", bundle.name);
    let _ = writeln!(out, "n {n}");
    let _ = writeln!(out, "T {}", d.times());
    if !bundle.node_labels.is_empty() {
        let _ = writeln!(out, "nodes {}", bundle.node_labels.join(" "));
    }
    if !bundle.time_labels.is_empty() {
        let _ = writeln!(out, "times {}", bundle.time_labels.join(" "));
    }
    for t in 0..d.times() {
        let _ = writeln!(out, "block {t}");
        for i in 0..n {
            let row: Vec<&str> = (0..n)
                .map(|j| match (i == j, i != j && d.get(i, j, t)) {
                    (true, _) => "-",
                    (false, true) => "1",
                    (false, false) => "0",
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    if let Some(truth) = &bundle.truth {
        out.push_str("truth\n");
        if let Some(c) = truth.case_id {
            let _ = writeln!(out, "case {c}");
        }
        let _ = writeln!(out, "membership {}", truth.k());
        for row in &truth.membership {
            let _ = writeln!(out, "{}", join_floats(row));
        }
        let _ = writeln!(out, "compat {}", truth.k());
        for row in truth.compat.rows() {
            let _ = writeln!(out, "{}", join_floats(&row));
        }
    }
    out
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self {
            path,
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((no, l)) => {
                self.last = no;
                Ok((no, l))
            }
            None => Err(self.err(self.last + 1, "unexpected end of file")),
        }
    }

    fn peek_key(&mut self) -> Option<&'a str> {
        self.inner
            .peek()
            .map(|(_, l)| l.split_whitespace().next().unwrap_or(""))
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// Reads `key value` and returns the value (rest of the line).
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (no, line) = self.next()?;
        match line.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((no, v.trim())),
            _ if line == key => Ok((no, "")),
            _ => Err(self.err(no, format!("expected '{key} ...', found '{line}'"))),
        }
    }

    fn keyed_usize(&mut self, key: &str) -> Result<usize> {
        let (no, v) = self.keyed(key)?;
        v.parse()
            .map_err(|_| self.err(no, format!("'{key}' needs a non-negative integer, found '{v}'")))
    }

    fn floats(&mut self, expect: usize) -> Result<Vec<f64>> {
        let (no, line) = self.next()?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|x| {
                x.parse::<f64>()
                    .map_err(|_| self.err(no, format!("'{x}' is not a number")))
            })
            .collect::<Result<_>>()?;
        if row.len() != expect {
            return Err(self.err(no, format!("expected {expect} values, found {}", row.len())));
        }
        Ok(row)
    }
}

pub fn parse_dataset(text: &str, path: &Path) -> Result<DatasetBundle> {
    let mut lines = Lines::new(text, path);
    let (no, header) = lines.next()?;
    if header != format!("{MAGIC} {VERSION}") {
        return Err(lines.err(no, format!("expected header '{MAGIC} {VERSION}'")));
    }
    let (_, name) = lines.keyed("name")?;
    let n = lines.keyed_usize("n")?;
    let t = lines.keyed_usize("T")?;
    let mut node_labels = Vec::new();
    let mut time_labels = Vec::new();
    if lines.peek_key() == Some("nodes") {
        let (no, v) = lines.keyed("nodes")?;
        node_labels = v.split_whitespace().map(str::to_string).collect();
        if node_labels.len() != n {
            return Err(lines.err(no, format!("{} node labels for n = {n}", node_labels.len())));
        }
    }
    if lines.peek_key() == Some("times") {
        let (no, v) = lines.keyed("times")?;
        time_labels = v.split_whitespace().map(str::to_string).collect();
        if time_labels.len() != t {
            return Err(lines.err(no, format!("{} time labels for T = {t}", time_labels.len())));
        }
    }
    let mut data = RelationTensor::zeros(n, t);
    for tt in 0..t {
        let (no, v) = lines.keyed("block")?;
        if v != tt.to_string() {
            return Err(lines.err(no, format!("expected block {tt}, found block {v}")));
        }
        for i in 0..n {
            let (no, row) = lines.next()?;
            let cells: Vec<&str> = row.split_whitespace().collect();
            if cells.len() != n {
                return Err(lines.err(
                    no,
                    format!("row {i} of block {tt} has {} entries, expected {n}", cells.len()),
                ));
            }
            for (j, cell) in cells.into_iter().enumerate() {
                match (i == j, cell) {
                    (true, "-" | "0") => {}
                    (false, "0") => {}
                    (false, "1") => data.set(i, j, tt, true),
                    (true, other) => {
                        return Err(lines.err(no, format!("diagonal entry must be '-', found '{other}'")));
                    }
                    (false, other) => {
                        return Err(lines.err(no, format!("entry ({i},{j}) must be 0 or 1, found '{other}'")));
                    }
                }
            }
        }
    }
    let mut truth = None;
    if lines.peek_key() == Some("truth") {
        lines.next()?;
        let mut case_id = None;
        if lines.peek_key() == Some("case") {
            let (no, v) = lines.keyed("case")?;
            case_id = Some(
                v.parse::<u8>()
                    .map_err(|_| lines.err(no, format!("bad case id '{v}'")))?,
            );
        }
        let k = lines.keyed_usize("membership")?;
        let membership = (0..n).map(|_| lines.floats(k)).collect::<Result<Vec<_>>>()?;
        let (no, v) = lines.keyed("compat")?;
        if v != k.to_string() {
            return Err(lines.err(no, format!("compat size {v} differs from membership size {k}")));
        }
        let rows = (0..k).map(|_| lines.floats(k)).collect::<Result<Vec<_>>>()?;
        let compat = CompatibilityMatrix::from_rows(&rows).map_err(|e| lines.err(no, e.to_string()))?;
        truth = Some(GroundTruth::new(membership, compat, case_id).map_err(|e| lines.err(no, e.to_string()))?);
    }
    if let Some((no, extra)) = lines.inner.next() {
        return Err(lines.err(no, format!("unexpected trailing content '{extra}'")));
    }
    let bundle = DatasetBundle {
        name: name.to_string(),
        data,
        truth,
        node_labels,
        time_labels,
        latent: None,
    };
    bundle.validate()?;
    Ok(bundle)
}
