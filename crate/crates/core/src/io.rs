//! Line-oriented text formats for representations, cocycles and matrices.
//!
//! Every file starts with a `goldman-<kind> v1` line followed by
//! `key: value` lines. A matrix block is a `matrix: <label>` line followed by
//! one line per row of `[re, im]` pairs. Floats are written with 17
//! significant digits, which reads back to the same double.
//!
//! Representation and cocycle files end with `hash: <sha256>` over every
//! preceding byte. Cocycle files carry the hash of their base representation
//! as `base-hash`, so that a cocycle is never paired over the wrong base.
//!
//! ```text
//! goldman-representation v1
//! genus: 2
//! rank: 1
//! flavor: unitary
//! seed: 7
//! matrix: a1
//! [6.2348980185873348e-1, 7.8183148246802980e-1]
//! ...
//! hash: 5f1c...
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::rep::{Flavor, Representation};
use crate::word::Presentation;

const REPRESENTATION_HEADER: &str = "goldman-representation v1";
const COCYCLE_HEADER: &str = "goldman-cocycle v1";
const MATRIX_HEADER: &str = "goldman-matrix v1";

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_row(m: &CMat, i: usize) -> String {
    (0..m.ncols())
        .map(|j| format!("[{}, {}]", format_float(m[(i, j)].re), format_float(m[(i, j)].im)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_matrix_rows(out: &mut String, m: &CMat) {
    for i in 0..m.nrows() {
        out.push_str(&format_row(m, i));
        out.push('\n');
    }
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Schema(format!("not a number: {s:?}")))
}

fn parse_row(line: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('[')
            .ok_or_else(|| Error::Schema(format!("expected '[' in row {line:?}")))?;
        let close = body.find(']').ok_or_else(|| Error::Schema(format!("unclosed pair in row {line:?}")))?;
        let (re, im) = body[..close]
            .split_once(',')
            .ok_or_else(|| Error::Schema(format!("pair without comma in row {line:?}")))?;
        out.push(Complex64::new(parse_float(re)?, parse_float(im)?));
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Line cursor with schema errors that name the line number.
struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { lines: text.lines().collect(), pos: 0 }
    }

    fn next(&mut self) -> Result<&'a str> {
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::Schema("unexpected end of file".into()))?;
        self.pos += 1;
        Ok(line)
    }

    fn expect_exact(&mut self, want: &str) -> Result<()> {
        let line = self.next()?;
        if line.trim() != want {
            return Err(Error::Schema(format!("line {}: expected {want:?}, found {line:?}", self.pos)));
        }
        Ok(())
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.split_once(':') {
            Some((k, v)) if k.trim() == key => Ok(v.trim()),
            _ => Err(Error::Schema(format!("line {}: expected '{key}:', found {line:?}", self.pos))),
        }
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<CMat> {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            let row = parse_row(self.next()?)?;
            if row.len() != cols {
                return Err(Error::Schema(format!("line {}: expected {cols} entries, found {}", self.pos, row.len())));
            }
            for (j, z) in row.into_iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }

    fn generator_matrices(&mut self, presentation: &Presentation, n: usize) -> Result<Vec<CMat>> {
        presentation
            .generators()
            .map(|g| {
                let label = self.field("matrix")?;
                if label != g.to_string() {
                    return Err(Error::Schema(format!("expected matrix {g}, found {label}")));
                }
                self.matrix(n, n)
            })
            .collect()
    }

    /// Checks the trailing hash line against the bytes before it.
    fn verify_hash(&mut self, text: &str) -> Result<String> {
        let hash_line_start = text
            .rfind("hash: ")
            .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
            .ok_or_else(|| Error::Schema("missing hash line".into()))?;
        let stated = self.field("hash")?.to_string();
        let actual = sha256_hex(&text[..hash_line_start]);
        if stated != actual {
            return Err(Error::Schema(format!("content hash mismatch: file says {stated}, content gives {actual}")));
        }
        if self.lines[self.pos..].iter().any(|l| !l.trim().is_empty()) {
            return Err(Error::Schema("content after the hash line".into()));
        }
        Ok(actual)
    }
}

fn header_fields(out: &mut String, header: &str, rep: &Representation) {
    out.push_str(header);
    out.push('\n');
    let _ = writeln!(out, "genus: {}", rep.genus());
    let _ = writeln!(out, "rank: {}", rep.rank());
    let _ = writeln!(out, "flavor: {}", rep.flavor());
}

fn seal(mut body: String) -> String {
    let hash = sha256_hex(&body);
    let _ = writeln!(body, "hash: {hash}");
    body
}

pub fn write_representation(rep: &Representation) -> String {
    let mut out = String::new();
    header_fields(&mut out, REPRESENTATION_HEADER, rep);
    match rep.seed() {
        Some(s) => {
            let _ = writeln!(out, "seed: {s}");
        }
        None => out.push_str("seed: none\n"),
    }
    for (g, m) in rep.presentation().generators().zip(rep.images()) {
        let _ = writeln!(out, "matrix: {g}");
        write_matrix_rows(&mut out, m);
    }
    seal(out)
}

/// Content hash that cocycle files use to refer to `rep`.
pub fn representation_hash(rep: &Representation) -> String {
    let text = write_representation(rep);
    let body = &text[..text.rfind("hash: ").expect("written with a hash line")];
    sha256_hex(body)
}

struct Header {
    presentation: Presentation,
    rank: usize,
    flavor: Flavor,
}

fn read_header(lines: &mut Lines<'_>, header: &str) -> Result<Header> {
    lines.expect_exact(header)?;
    let genus: usize = lines
        .field("genus")?
        .parse()
        .map_err(|_| Error::Schema("genus is not an integer".into()))?;
    let rank: usize = lines
        .field("rank")?
        .parse()
        .map_err(|_| Error::Schema("rank is not an integer".into()))?;
    if rank == 0 {
        return Err(Error::Schema("rank must be positive".into()));
    }
    let flavor: Flavor = lines.field("flavor")?.parse()?;
    Ok(Header { presentation: Presentation::new(genus)?, rank, flavor })
}

pub fn read_representation(text: &str) -> Result<Representation> {
    let mut lines = Lines::new(text);
    let h = read_header(&mut lines, REPRESENTATION_HEADER)?;
    let seed = match lines.field("seed")? {
        "none" => None,
        s => Some(s.parse::<u64>().map_err(|_| Error::Schema(format!("bad seed {s:?}")))?),
    };
    let images = lines.generator_matrices(&h.presentation, h.rank)?;
    lines.verify_hash(text)?;
    Representation::new(h.presentation, h.flavor, images, seed)
}

pub fn write_cocycle(chi: &Cocycle) -> String {
    let base = chi.base();
    let mut out = String::new();
    header_fields(&mut out, COCYCLE_HEADER, base);
    let _ = writeln!(out, "base-hash: {}", representation_hash(base));
    for (g, m) in base.presentation().generators().zip(chi.values()) {
        let _ = writeln!(out, "matrix: {g}");
        write_matrix_rows(&mut out, m);
    }
    seal(out)
}

/// Reads a cocycle over `base`; the file's `base-hash` must match.
pub fn read_cocycle(text: &str, base: &Arc<Representation>) -> Result<Cocycle> {
    let mut lines = Lines::new(text);
    let h = read_header(&mut lines, COCYCLE_HEADER)?;
    let stated = lines.field("base-hash")?.to_string();
    let expected = representation_hash(base);
    if stated != expected {
        return Err(Error::BaseMismatch(format!("cocycle refers to base {stated}, given base is {expected}")));
    }
    if h.presentation != *base.presentation() || h.rank != base.rank() {
        return Err(Error::Schema("cocycle header disagrees with its base".into()));
    }
    let values = lines.generator_matrices(&h.presentation, h.rank)?;
    lines.verify_hash(text)?;
    Cocycle::new(base.clone(), values)
}

/// A labelled matrix with free-form `key: value` metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub label: String,
    pub metadata: Vec<(String, String)>,
    pub matrix: CMat,
}

pub fn write_matrix(file: &MatrixFile) -> String {
    let mut out = String::new();
    out.push_str(MATRIX_HEADER);
    out.push('\n');
    let _ = writeln!(out, "label: {}", file.label);
    let _ = writeln!(out, "rows: {}", file.matrix.nrows());
    let _ = writeln!(out, "cols: {}", file.matrix.ncols());
    for (k, v) in &file.metadata {
        let _ = writeln!(out, "{k}: {v}");
    }
    out.push_str("data:\n");
    write_matrix_rows(&mut out, &file.matrix);
    out
}

pub fn read_matrix(text: &str) -> Result<MatrixFile> {
    let mut lines = Lines::new(text);
    lines.expect_exact(MATRIX_HEADER)?;
    let label = lines.field("label")?.to_string();
    let parse_dim = |s: &str| s.parse::<usize>().map_err(|_| Error::Schema(format!("bad dimension {s:?}")));
    let rows = parse_dim(lines.field("rows")?)?;
    let cols = parse_dim(lines.field("cols")?)?;
    let mut metadata = Vec::new();
    loop {
        let line = lines.next()?;
        if line.trim() == "data:" {
            break;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| Error::Schema(format!("line {}: expected 'key: value'", lines.pos)))?;
        metadata.push((k.trim().to_string(), v.trim().to_string()));
    }
    let matrix = lines.matrix(rows, cols)?;
    Ok(MatrixFile { label, metadata, matrix })
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}
