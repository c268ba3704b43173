//! Binary snapshots and CSV text.
//!
//! A field block is little-endian: magic `SQGF`, version, `kmax`, mode count,
//! then one `(k1: i32, k2: i32, re: f64, im: f64)` record per positive-half
//! mode of the box `|k|_inf <= kmax`, sorted lexicographically.
//!
//! Trajectories (`SQGT`) and controls (`SQGC`) carry magic and version, a
//! length-prefixed key-value parameter block, a snapshot count and then
//! `(t: f64, field block)` per snapshot.

use std::fmt::Write as _;
use std::path::Path;

use sqg_core::galerkin::{ControlPath, SqgParams, Trajectory};
use sqg_core::spectral::{ModeIndex, SpectralField};
use sqg_core::Complex64;

use crate::config::{params_from_kv, params_to_kv};
use crate::error::{Error, Result};

pub const FIELD_MAGIC: [u8; 4] = *b"SQGF";
pub const TRAJECTORY_MAGIC: [u8; 4] = *b"SQGT";
pub const CONTROL_MAGIC: [u8; 4] = *b"SQGC";
pub const VERSION: u32 = 1;

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn encode_field(f: &SpectralField, out: &mut Vec<u8>) {
    out.extend_from_slice(&FIELD_MAGIC);
    put_u32(out, VERSION);
    put_u32(out, f.kmax() as u32);
    put_u32(out, f.len() as u32);
    // Storage order is already lexicographic in (k1, k2).
    for (k, c) in f.modes() {
        out.extend_from_slice(&k.k1.to_le_bytes());
        out.extend_from_slice(&k.k2.to_le_bytes());
        put_f64(out, c.re);
        put_f64(out, c.im);
    }
}

pub fn field_bytes(f: &SpectralField) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 24 * f.len());
    encode_field(f, &mut out);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> std::result::Result<i32, String> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: [u8; 4]) -> std::result::Result<(), String> {
        let m = self.take(4)?;
        if m != magic {
            return Err(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(m),
                String::from_utf8_lossy(&magic)
            ));
        }
        let v = self.u32()?;
        if v != VERSION {
            return Err(format!("unsupported version {v}"));
        }
        Ok(())
    }

    fn field(&mut self) -> std::result::Result<SpectralField, String> {
        self.header(FIELD_MAGIC)?;
        let kmax = self.u32()? as usize;
        let count = self.u32()? as usize;
        let mut f = SpectralField::zeros(kmax);
        if count != f.len() {
            return Err(format!("kmax {kmax} needs {} modes, header says {count}", f.len()));
        }
        for i in 0..count {
            let k = ModeIndex::new(self.i32()?, self.i32()?);
            if k != f.mode_at(i) {
                return Err(format!("record {i} has mode {k}, expected {}", f.mode_at(i)));
            }
            let c = Complex64::new(self.f64()?, self.f64()?);
            f.coeffs_mut()[i] = c;
        }
        Ok(f)
    }

    fn finish(&self) -> std::result::Result<(), String> {
        if self.pos != self.buf.len() {
            return Err(format!("{} trailing bytes", self.buf.len() - self.pos));
        }
        Ok(())
    }
}

pub fn decode_field(bytes: &[u8]) -> std::result::Result<SpectralField, String> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let f = r.field()?;
    r.finish()?;
    Ok(f)
}

fn encode_series(magic: [u8; 4], params: &SqgParams, times: &[f64], fields: &[SpectralField]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&magic);
    put_u32(&mut out, VERSION);
    let kv = params_to_kv(params);
    put_u32(&mut out, kv.len() as u32);
    out.extend_from_slice(kv.as_bytes());
    put_u32(&mut out, fields.len() as u32);
    for (t, f) in times.iter().zip(fields) {
        put_f64(&mut out, *t);
        encode_field(f, &mut out);
    }
    out
}

type Series = (SqgParams, Vec<f64>, Vec<SpectralField>);

fn decode_series(bytes: &[u8], magic: [u8; 4]) -> std::result::Result<Series, String> {
    let mut r = Reader { buf: bytes, pos: 0 };
    r.header(magic)?;
    let len = r.u32()? as usize;
    let text = std::str::from_utf8(r.take(len)?).map_err(|e| format!("parameter block: {e}"))?;
    let params = params_from_kv(text)?;
    let n = r.u32()? as usize;
    let mut times = Vec::with_capacity(n);
    let mut fields = Vec::with_capacity(n);
    for _ in 0..n {
        times.push(r.f64()?);
        fields.push(r.field()?);
    }
    r.finish()?;
    Ok((params, times, fields))
}

pub fn trajectory_bytes(traj: &Trajectory) -> Vec<u8> {
    encode_series(TRAJECTORY_MAGIC, &traj.params, &traj.times, &traj.states)
}

pub fn decode_trajectory(bytes: &[u8]) -> std::result::Result<Trajectory, String> {
    let (params, times, states) = decode_series(bytes, TRAJECTORY_MAGIC)?;
    Trajectory::new(params, times, states).map_err(|e| e.to_string())
}

/// Controls carry the parameters of the run they were built for.
pub fn control_bytes(params: &SqgParams, g: &ControlPath) -> Vec<u8> {
    encode_series(CONTROL_MAGIC, params, &g.times, &g.values)
}

pub fn decode_control(bytes: &[u8]) -> std::result::Result<(SqgParams, ControlPath), String> {
    let (params, times, values) = decode_series(bytes, CONTROL_MAGIC)?;
    let g = ControlPath::new(times, values).map_err(|e| e.to_string())?;
    Ok((params, g))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    decode_field(&read_bytes(path)?).map_err(|r| Error::format(path, r))
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    decode_trajectory(&read_bytes(path)?).map_err(|r| Error::format(path, r))
}

pub fn read_control(path: &Path) -> Result<(SqgParams, ControlPath)> {
    decode_control(&read_bytes(path)?).map_err(|r| Error::format(path, r))
}

/// Comma-separated text with a fixed header.
#[derive(Debug, Clone)]
pub struct Csv {
    width: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { width: header.len(), text: format!("{}\n", header.join(",")) }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.width, "csv row width");
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// One row per stored mode: `k1,k2,re,im`.
pub fn field_csv(f: &SpectralField) -> Csv {
    let mut csv = Csv::new(&["k1", "k2", "re", "im"]);
    for (k, c) in f.modes() {
        csv.row(&[k.k1.to_string(), k.k2.to_string(), fmt_f64(c.re), fmt_f64(c.im)]);
    }
    csv
}
