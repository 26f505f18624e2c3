//! On-disk formats: per-step trace CSV and a raw binary matrix format.
//!
//! Snapshot files start with a 16-byte header
//!
//! ```text
//! bytes 0..4   b"ROMS"
//! bytes 4..6   version (u16, little-endian)
//! bytes 6..10  rows n (u32 LE)
//! bytes 10..14 columns m (u32 LE)
//! bytes 14..16 zero padding
//! ```
//!
//! followed by `n * m` little-endian `f64` values in column-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Result, RomError};
use crate::hybrid::{StepFlag, Trace};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"ROMS";
pub const SNAPSHOT_VERSION: u16 = 1;
const HEADER_LEN: usize = 16;

/// One trace CSV row. Optional columns are present for every row or none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub t: f64,
    pub flag: StepFlag,
    pub delta: f64,
    pub y: f64,
    pub y_ref: Option<f64>,
    pub true_err: Option<f64>,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceFile {
    pub records: Vec<TraceRecord>,
}

impl TraceFile {
    /// Rows of `trace`, with reference outputs when given and the diagnostic
    /// columns when every row carries them.
    pub fn from_trace(trace: &Trace, reference: Option<&Trace>) -> Result<Self> {
        if let Some(r) = reference {
            if r.rows.len() != trace.rows.len() {
                return Err(RomError::LengthMismatch(trace.rows.len(), r.rows.len()));
            }
        }
        // ROM-flagged rows always carry diagnostics when they were requested
        let diag = trace.rows.iter().any(|r| r.true_error.is_some());
        let records = trace
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| TraceRecord {
                k: r.k,
                t: r.t,
                flag: r.flag,
                delta: r.delta,
                y: r.y,
                y_ref: reference.map(|rf| rf.rows[i].y),
                true_err: diag.then(|| r.true_error.unwrap_or(f64::NAN)),
                rho: diag.then(|| r.rho.unwrap_or(f64::NAN)),
            })
            .collect();
        Ok(Self { records })
    }

    fn columns(&self) -> (bool, bool, bool) {
        match self.records.first() {
            Some(r) => (r.y_ref.is_some(), r.true_err.is_some(), r.rho.is_some()),
            None => (false, false, false),
        }
    }

    pub fn header(&self) -> Vec<&'static str> {
        let (y_ref, te, rho) = self.columns();
        let mut h = vec!["k", "t", "flag", "delta", "y"];
        if y_ref {
            h.push("y_ref");
        }
        if te {
            h.push("true_err");
        }
        if rho {
            h.push("rho");
        }
        h
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let (y_ref, te, rho) = self.columns();
        for r in &self.records {
            if (r.y_ref.is_some(), r.true_err.is_some(), r.rho.is_some()) != (y_ref, te, rho) {
                return Err(RomError::Format(format!("row {} has a different column set", r.k)));
            }
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header()).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                r.k.to_string(),
                fmt_float(r.t),
                r.flag.code().to_string(),
                fmt_float(r.delta),
                fmt_float(r.y),
            ];
            row.extend([r.y_ref, r.true_err, r.rho].into_iter().flatten().map(fmt_float));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let pos = |name: &str| header.iter().position(|h| h == name);
        let need = |name: &str| pos(name).ok_or_else(|| RomError::Format(format!("missing column {name}")));
        let (ik, it, iflag, idelta, iy) = (need("k")?, need("t")?, need("flag")?, need("delta")?, need("y")?);
        let (iref, ite, irho) = (pos("y_ref"), pos("true_err"), pos("rho"));
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let field = |i: usize| rec.get(i).ok_or_else(|| RomError::Format("short row".into()));
            let float = |i: usize| -> Result<f64> {
                let s = field(i)?;
                s.parse::<f64>().map_err(|_| RomError::Format(format!("bad number {s:?}")))
            };
            let opt = |i: Option<usize>| i.map(float).transpose();
            let code: u8 = field(iflag)?
                .parse()
                .map_err(|_| RomError::Format("bad flag".into()))?;
            records.push(TraceRecord {
                k: field(ik)?
                    .parse()
                    .map_err(|_| RomError::Format("bad step index".into()))?,
                t: float(it)?,
                flag: StepFlag::from_code(code).ok_or_else(|| RomError::Format(format!("unknown flag {code}")))?,
                delta: float(idelta)?,
                y: float(iy)?,
                y_ref: opt(iref)?,
                true_err: opt(ite)?,
                rho: opt(irho)?,
            });
        }
        Ok(Self { records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn csv_err(e: csv::Error) -> RomError {
    RomError::Format(e.to_string())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_matrix_to<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    let n = u32::try_from(m.nrows()).map_err(|_| RomError::Format("too many rows".into()))?;
    let c = u32::try_from(m.ncols()).map_err(|_| RomError::Format("too many columns".into()))?;
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(SNAPSHOT_MAGIC);
    header[4..6].copy_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    header[6..10].copy_from_slice(&n.to_le_bytes());
    header[10..14].copy_from_slice(&c.to_le_bytes());
    w.write_all(&header)?;
    // nalgebra storage is already column-major
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_from<R: Read>(mut r: R) -> Result<DMatrix<f64>> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| RomError::Format("truncated snapshot header".into()))?;
    if &header[0..4] != SNAPSHOT_MAGIC {
        return Err(RomError::Format("not a snapshot file (bad magic)".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != SNAPSHOT_VERSION {
        return Err(RomError::Format(format!("unsupported snapshot version {version}")));
    }
    let n = u32::from_le_bytes(header[6..10].try_into().unwrap()) as usize;
    let m = u32::from_le_bytes(header[10..14].try_into().unwrap()) as usize;
    let count = n
        .checked_mul(m)
        .ok_or_else(|| RomError::Format("snapshot size overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(RomError::Format(format!(
            "expected {} data bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(DMatrix::from_vec(n, m, data))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_matrix_to(BufWriter::new(File::create(path)?), m)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    read_matrix_from(BufReader::new(File::open(path)?))
}
