//! File formats for matrices and spectra.
//!
//! - `JSAB` v1: little-endian binary complex matrix. Layout: magic `"JSAB"`,
//!   `u32` version = 1, `u32` n₁, `u32` n₂, `f64` centre₁, `f64` Δω₁, `f64`
//!   centre₂, `f64` Δω₂, then n₁·n₂ `(re, im)` `f64` pairs in row-major order.
//! - `JSH3` v1: little-endian binary real 3D histogram. Layout: magic
//!   `"JSH3"`, `u32` version = 1, `u32` n_h, `u32` n₁, `u32` n₂, `f64` centre and
//!   spacing for the herald, first and second axes, then n_h·n₁·n₂ `f64`
//!   counts ordered `[h][i][j]`.
//! - Matrix CSV: `#`-prefixed metadata lines followed by one row per `ω₁` bin;
//!   complex rows alternate `re,im`.
//! - Mode CSV: metadata lines, a header row, then `detuning,re,im` per bin.
//!
//! Binary files may end with an optional 36-byte trailer, `"CFGH"` followed by
//! a 32-byte configuration digest. Centres and spacings are absolute angular
//! frequencies in rad/fs.

use std::fmt::Write as _;

use ndarray::{Array2, Array3};

use crate::{
    grid::FrequencyGrid, interferogram::HeraldedInterferogram, jsa::Jsa, mode::SpectralMode,
    Error, Interferogram, Result, C64,
};

pub const JSAB_MAGIC: &[u8; 4] = b"JSAB";
pub const JSH3_MAGIC: &[u8; 4] = b"JSH3";
pub const TRAILER_MAGIC: &[u8; 4] = b"CFGH";
pub const FORMAT_VERSION: u32 = 1;

/// SHA-256 digest of the configuration that produced a file.
pub type ConfigHash = [u8; 32];

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.bytes.len() as u64,
                format!("truncated while reading {what}"),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let m = self.take(4, "magic")?;
        if m != expected {
            return Err(Error::format(
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(m),
                    String::from_utf8_lossy(expected)
                ),
            ));
        }
        Ok(())
    }

    fn version(&mut self) -> Result<()> {
        let at = self.pos as u64;
        let v = self.u32("version")?;
        if v != FORMAT_VERSION {
            return Err(Error::format(at, format!("unsupported version {v}, expected {FORMAT_VERSION}")));
        }
        Ok(())
    }

    fn grid(&mut self, n: u32, axis: &str) -> Result<FrequencyGrid> {
        let at = self.pos as u64;
        let center = self.f64("grid centre")?;
        let spacing = self.f64("grid spacing")?;
        FrequencyGrid::from_spacing(center, spacing, n as usize)
            .map_err(|e| Error::format(at, format!("invalid {axis} grid: {e}")))
    }

    /// Consumes the optional digest trailer; anything else left over is an error.
    fn finish(&mut self) -> Result<Option<ConfigHash>> {
        let rest = &self.bytes[self.pos..];
        match rest.len() {
            0 => Ok(None),
            36 if &rest[..4] == TRAILER_MAGIC => Ok(Some(rest[4..].try_into().unwrap())),
            _ => Err(Error::format(
                self.pos as u64,
                format!("{} unexpected trailing bytes", rest.len()),
            )),
        }
    }
}

fn push_trailer(out: &mut Vec<u8>, hash: Option<&ConfigHash>) {
    if let Some(h) = hash {
        out.extend_from_slice(TRAILER_MAGIC);
        out.extend_from_slice(h);
    }
}

fn push_grid(out: &mut Vec<u8>, g: &FrequencyGrid) {
    out.extend_from_slice(&g.center().to_le_bytes());
    out.extend_from_slice(&g.spacing().to_le_bytes());
}

fn dim_u32(n: usize) -> u32 {
    u32::try_from(n).expect("grid dimension fits in u32")
}

/// Encodes a complex matrix in the `JSAB` layout.
pub fn encode_complex_matrix(
    grid1: &FrequencyGrid,
    grid2: &FrequencyGrid,
    m: &Array2<C64>,
    hash: Option<&ConfigHash>,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(40 + 16 * m.len() + 36);
    out.extend_from_slice(JSAB_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&dim_u32(grid1.len()).to_le_bytes());
    out.extend_from_slice(&dim_u32(grid2.len()).to_le_bytes());
    push_grid(&mut out, grid1);
    push_grid(&mut out, grid2);
    for z in m.iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    push_trailer(&mut out, hash);
    out
}

/// Decoded `JSAB` payload.
#[derive(Debug, Clone)]
pub struct ComplexMatrixFile {
    pub grid1: FrequencyGrid,
    pub grid2: FrequencyGrid,
    pub matrix: Array2<C64>,
    pub hash: Option<ConfigHash>,
}

pub fn decode_complex_matrix(bytes: &[u8]) -> Result<ComplexMatrixFile> {
    let mut c = Cursor { bytes, pos: 0 };
    c.magic(JSAB_MAGIC)?;
    c.version()?;
    let n1 = c.u32("n1")?;
    let n2 = c.u32("n2")?;
    let grid1 = c.grid(n1, "first")?;
    let grid2 = c.grid(n2, "second")?;
    let count = n1 as usize * n2 as usize;
    let body = c.take(16 * count, "matrix body")?;
    let values: Vec<C64> = body
        .chunks_exact(16)
        .map(|ch| {
            C64::new(
                f64::from_le_bytes(ch[..8].try_into().unwrap()),
                f64::from_le_bytes(ch[8..].try_into().unwrap()),
            )
        })
        .collect();
    let hash = c.finish()?;
    let matrix = Array2::from_shape_vec((n1 as usize, n2 as usize), values).expect("shape matches count");
    Ok(ComplexMatrixFile {
        grid1,
        grid2,
        matrix,
        hash,
    })
}

pub fn encode_jsa(jsa: &Jsa, hash: Option<&ConfigHash>) -> Vec<u8> {
    encode_complex_matrix(jsa.grid1(), jsa.grid2(), jsa.matrix(), hash)
}

pub fn decode_jsa(bytes: &[u8]) -> Result<(Jsa, Option<ConfigHash>)> {
    let f = decode_complex_matrix(bytes)?;
    let jsa = Jsa::new(f.grid1, f.grid2, f.matrix).map_err(|e| Error::format(40, e.to_string()))?;
    Ok((jsa, f.hash))
}

/// A 2D interferogram in the `JSAB` layout with zero imaginary parts.
pub fn encode_interferogram(g: &Interferogram, hash: Option<&ConfigHash>) -> Vec<u8> {
    let m = g.counts().mapv(|v| C64::new(v, 0.0));
    encode_complex_matrix(g.grid1(), g.grid2(), &m, hash)
}

pub fn decode_interferogram(bytes: &[u8]) -> Result<(Interferogram, Option<ConfigHash>)> {
    let f = decode_complex_matrix(bytes)?;
    if f.matrix.iter().any(|z| z.im != 0.0) {
        return Err(Error::format(40, "interferogram has non-zero imaginary parts"));
    }
    let g = Interferogram::new(f.grid1, f.grid2, f.matrix.mapv(|z| z.re))
        .map_err(|e| Error::format(40, e.to_string()))?;
    Ok((g, f.hash))
}

pub fn encode_heralded(h: &HeraldedInterferogram, hash: Option<&ConfigHash>) -> Vec<u8> {
    let mut out = Vec::with_capacity(68 + 8 * h.counts().len() + 36);
    out.extend_from_slice(JSH3_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&dim_u32(h.herald_grid().len()).to_le_bytes());
    out.extend_from_slice(&dim_u32(h.grid1().len()).to_le_bytes());
    out.extend_from_slice(&dim_u32(h.grid2().len()).to_le_bytes());
    push_grid(&mut out, h.herald_grid());
    push_grid(&mut out, h.grid1());
    push_grid(&mut out, h.grid2());
    for v in h.counts().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    push_trailer(&mut out, hash);
    out
}

pub fn decode_heralded(bytes: &[u8]) -> Result<(HeraldedInterferogram, Option<ConfigHash>)> {
    let mut c = Cursor { bytes, pos: 0 };
    c.magic(JSH3_MAGIC)?;
    c.version()?;
    let nh = c.u32("n_h")?;
    let n1 = c.u32("n1")?;
    let n2 = c.u32("n2")?;
    let gh = c.grid(nh, "herald")?;
    let g1 = c.grid(n1, "first")?;
    let g2 = c.grid(n2, "second")?;
    let count = nh as usize * n1 as usize * n2 as usize;
    let body = c.take(8 * count, "histogram body")?;
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|ch| f64::from_le_bytes(ch.try_into().unwrap()))
        .collect();
    let hash = c.finish()?;
    let counts = Array3::from_shape_vec((nh as usize, n1 as usize, n2 as usize), values).expect("shape");
    let h = HeraldedInterferogram::new(gh, g1, g2, counts).map_err(|e| Error::format(68, e.to_string()))?;
    Ok((h, hash))
}

fn grid_meta(name: &str, g: &FrequencyGrid) -> String {
    format!("# {name} center={} spacing={} n={}\n", g.center(), g.spacing(), g.len())
}

fn hash_meta(hash: Option<&ConfigHash>) -> String {
    match hash {
        Some(h) => format!("# config_hash={}\n", to_hex(h)),
        None => String::new(),
    }
}

pub fn to_hex(h: &ConfigHash) -> String {
    h.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn from_hex(s: &str) -> Option<ConfigHash> {
    if s.len() != 64 {
        return None;
    }
    let mut out = [0u8; 32];
    for (i, o) in out.iter_mut().enumerate() {
        *o = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).ok()?;
    }
    Some(out)
}

/// Writes a complex (`complex = true`) or real matrix as CSV.
pub fn complex_matrix_to_csv(
    grid1: &FrequencyGrid,
    grid2: &FrequencyGrid,
    m: &Array2<C64>,
    hash: Option<&ConfigHash>,
) -> String {
    let mut s = String::from("# jsamode-matrix v1\n# kind=complex\n");
    s += &grid_meta("grid1", grid1);
    s += &grid_meta("grid2", grid2);
    s += &hash_meta(hash);
    for row in m.rows() {
        let line: Vec<String> = row.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        s += &line.join(",");
        s.push('\n');
    }
    s
}

pub fn real_matrix_to_csv(
    grid1: &FrequencyGrid,
    grid2: &FrequencyGrid,
    m: &Array2<f64>,
    hash: Option<&ConfigHash>,
) -> String {
    let mut s = String::from("# jsamode-matrix v1\n# kind=real\n");
    s += &grid_meta("grid1", grid1);
    s += &grid_meta("grid2", grid2);
    s += &hash_meta(hash);
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s += &line.join(",");
        s.push('\n');
    }
    s
}

/// Parsed `#`-metadata of a CSV file.
#[derive(Debug, Default)]
struct CsvMeta {
    kind: Option<String>,
    grids: Vec<(String, FrequencyGrid)>,
    hash: Option<ConfigHash>,
}

fn parse_meta(text: &str) -> Result<CsvMeta> {
    let mut meta = CsvMeta::default();
    let mut offset = 0u64;
    for line in text.lines() {
        let Some(body) = line.strip_prefix('#') else {
            offset += line.len() as u64 + 1;
            continue;
        };
        let mut parts = body.split_whitespace();
        let Some(head) = parts.next() else { continue };
        if let Some(kind) = head.strip_prefix("kind=") {
            meta.kind = Some(kind.to_string());
        } else if let Some(h) = head.strip_prefix("config_hash=") {
            meta.hash = Some(from_hex(h).ok_or_else(|| Error::format(offset, "malformed config hash"))?);
        } else if head.starts_with("grid") {
            let (mut c, mut sp, mut n) = (None, None, None);
            for kv in parts {
                match kv.split_once('=') {
                    Some(("center", v)) => c = v.parse::<f64>().ok(),
                    Some(("spacing", v)) => sp = v.parse::<f64>().ok(),
                    Some(("n", v)) => n = v.parse::<usize>().ok(),
                    _ => {}
                }
            }
            let (Some(c), Some(sp), Some(n)) = (c, sp, n) else {
                return Err(Error::format(offset, format!("incomplete grid metadata in {line:?}")));
            };
            let g = FrequencyGrid::from_spacing(c, sp, n).map_err(|e| Error::format(offset, e.to_string()))?;
            meta.grids.push((head.to_string(), g));
        }
        offset += line.len() as u64 + 1;
    }
    Ok(meta)
}

fn csv_rows(text: &str, skip_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(skip_header)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let off = e.position().map(|p| p.byte()).unwrap_or(0);
            Error::format(off, e.to_string())
        })?;
        let off = rec.position().map(|p| p.byte()).unwrap_or(0);
        let row = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(off, format!("not a number: {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn find_grid(meta: &CsvMeta, name: &str) -> Result<FrequencyGrid> {
    meta.grids
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, g)| *g)
        .ok_or_else(|| Error::format(0, format!("missing {name} metadata")))
}

/// Parsed matrix CSV.
#[derive(Debug, Clone)]
pub struct CsvMatrix {
    pub grid1: FrequencyGrid,
    pub grid2: FrequencyGrid,
    pub matrix: Array2<C64>,
    pub hash: Option<ConfigHash>,
}

/// Reads a matrix CSV of either kind; real matrices come back with zero
/// imaginary parts.
pub fn matrix_from_csv(text: &str) -> Result<CsvMatrix> {
    let meta = parse_meta(text)?;
    let grid1 = find_grid(&meta, "grid1")?;
    let grid2 = find_grid(&meta, "grid2")?;
    let complex = match meta.kind.as_deref() {
        Some("complex") => true,
        Some("real") => false,
        other => return Err(Error::format(0, format!("unknown matrix kind {other:?}"))),
    };
    let rows = csv_rows(text, false)?;
    if rows.len() != grid1.len() {
        return Err(Error::format(
            text.len() as u64,
            format!("expected {} rows, found {}", grid1.len(), rows.len()),
        ));
    }
    let width = if complex { 2 * grid2.len() } else { grid2.len() };
    let mut m = Array2::zeros((grid1.len(), grid2.len()));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::format(0, format!("row {i} has {} fields, expected {width}", row.len())));
        }
        for j in 0..grid2.len() {
            m[[i, j]] = if complex {
                C64::new(row[2 * j], row[2 * j + 1])
            } else {
                C64::new(row[j], 0.0)
            };
        }
    }
    Ok(CsvMatrix {
        grid1,
        grid2,
        matrix: m,
        hash: meta.hash,
    })
}

pub fn mode_to_csv(mode: &SpectralMode, hash: Option<&ConfigHash>) -> String {
    let mut s = String::from("# jsamode-mode v1\n");
    s += &grid_meta("grid", mode.grid());
    s += &hash_meta(hash);
    s += "detuning_rad_per_fs,re,im\n";
    for (k, a) in mode.amplitudes().iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", mode.grid().detuning(k), a.re, a.im);
    }
    s
}

pub fn mode_from_csv(text: &str) -> Result<SpectralMode> {
    let meta = parse_meta(text)?;
    let grid = find_grid(&meta, "grid")?;
    let rows = csv_rows(text, true)?;
    if rows.len() != grid.len() {
        return Err(Error::format(
            text.len() as u64,
            format!("expected {} spectrum rows, found {}", grid.len(), rows.len()),
        ));
    }
    let amp = rows
        .iter()
        .enumerate()
        .map(|(k, r)| {
            if r.len() != 3 {
                return Err(Error::format(0, format!("spectrum row {k} needs 3 fields")));
            }
            Ok(C64::new(r[1], r[2]))
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralMode::new(grid, amp).map_err(|e| Error::format(0, e.to_string()))
}
