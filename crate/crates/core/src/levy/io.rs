//! Binary and CSV record files for jump streams and path dumps.
//!
//! Binary layout, little endian:
//!
//! | field    | type       |
//! |----------|------------|
//! | magic    | `b"LVHJ"`  |
//! | version  | u32 = 1    |
//! | kind     | u32 (0 jump stream, 1 path) |
//! | alpha    | f64        |
//! | dim      | u32        |
//! | delta    | f64        |
//! | horizon  | f64        |
//! | seed     | u64        |
//! | stream   | u64        |
//! | width    | u32, number of f64 per record |
//! | count    | u64        |
//!
//! followed by `count` records of `width` f64 values. A jump stream record is
//! `(t, y₀[, y₁])`; a path record is `(t, x₀[, x₁], Y)`.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::{CompensationPolicy, JumpEvent, JumpStream};
use crate::error::{Error, Result};
use crate::MAX_DIM;

const MAGIC: &[u8; 4] = b"LVHJ";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub kind: u32,
    pub alpha: f64,
    pub dim: u32,
    pub delta: f64,
    pub horizon: f64,
    pub seed: u64,
    pub stream: u64,
    pub width: u32,
}

pub fn write_records<W: Write>(w: &mut W, header: &RecordHeader, rows: &[Vec<f64>]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(1)?;
    w.write_u32::<LittleEndian>(header.kind)?;
    w.write_f64::<LittleEndian>(header.alpha)?;
    w.write_u32::<LittleEndian>(header.dim)?;
    w.write_f64::<LittleEndian>(header.delta)?;
    w.write_f64::<LittleEndian>(header.horizon)?;
    w.write_u64::<LittleEndian>(header.seed)?;
    w.write_u64::<LittleEndian>(header.stream)?;
    w.write_u32::<LittleEndian>(header.width)?;
    w.write_u64::<LittleEndian>(rows.len() as u64)?;
    for r in rows {
        if r.len() != header.width as usize {
            return Err(Error::Parse("record width mismatch".into()));
        }
        for &v in r {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    Ok(())
}

pub fn read_records<R: Read>(r: &mut R) -> Result<(RecordHeader, Vec<Vec<f64>>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != 1 {
        return Err(Error::Parse(format!("unsupported version {version}")));
    }
    let header = RecordHeader {
        kind: r.read_u32::<LittleEndian>()?,
        alpha: r.read_f64::<LittleEndian>()?,
        dim: r.read_u32::<LittleEndian>()?,
        delta: r.read_f64::<LittleEndian>()?,
        horizon: r.read_f64::<LittleEndian>()?,
        seed: r.read_u64::<LittleEndian>()?,
        stream: r.read_u64::<LittleEndian>()?,
        width: r.read_u32::<LittleEndian>()?,
    };
    let count = r.read_u64::<LittleEndian>()? as usize;
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let mut row = Vec::with_capacity(header.width as usize);
        for _ in 0..header.width {
            row.push(r.read_f64::<LittleEndian>()?);
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_csv(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", columns.join(","))?;
    for r in rows {
        let s: Vec<String> = r.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{}", s.join(","))?;
    }
    Ok(())
}

impl JumpStream {
    fn header(&self) -> RecordHeader {
        RecordHeader {
            kind: 0,
            alpha: self.alpha,
            dim: self.dim as u32,
            delta: self.delta,
            horizon: self.horizon,
            seed: self.seed,
            stream: self.stream,
            width: 1 + self.dim as u32,
        }
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.events
            .iter()
            .map(|e| {
                let mut r = vec![e.t];
                r.extend_from_slice(&e.y[..self.dim]);
                r
            })
            .collect()
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_records(&mut f, &self.header(), &self.rows())
    }

    pub fn read_binary(path: &Path) -> Result<JumpStream> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let (h, rows) = read_records(&mut f)?;
        if h.kind != 0 {
            return Err(Error::Parse("not a jump stream file".into()));
        }
        let dim = h.dim as usize;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Parse(format!("bad dimension {dim}")));
        }
        let events = rows
            .into_iter()
            .map(|r| {
                let mut y = [0.0; MAX_DIM];
                y[..dim].copy_from_slice(&r[1..1 + dim]);
                JumpEvent { t: r[0], y }
            })
            .collect();
        Ok(JumpStream {
            alpha: h.alpha,
            dim,
            delta: h.delta,
            horizon: h.horizon,
            policy: CompensationPolicy::GaussianCorrection,
            seed: h.seed,
            stream: h.stream,
            events,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let cols: Vec<&str> = ["t", "y0", "y1"][..1 + self.dim].to_vec();
        write_csv(path, &cols, &self.rows())
    }
}
