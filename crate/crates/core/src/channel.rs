//! Per-transmission per-element time-sampled RF records and the MBCD
//! binary file format.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array3;

use crate::array::VirtualAperture;
use crate::error::{Error, Result};

pub const MBCD_MAGIC: &[u8; 4] = b"MBCD";
pub const MBCD_VERSION: u16 = 1;

/// Real-valued RF channel data, indexed `[transmission][receiver][time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelData {
    pub samples: Array3<f64>,
    pub sampling_rate: f64,
    pub start_time: f64,
    pub center_frequency: f64,
}

impl ChannelData {
    pub fn n_transmissions(&self) -> usize {
        self.samples.shape()[0]
    }

    pub fn n_receivers(&self) -> usize {
        self.samples.shape()[1]
    }

    pub fn n_samples(&self) -> usize {
        self.samples.shape()[2]
    }

    /// Serialize to the MBCD format: magic, version u16, dims u32 x3,
    /// sampling_rate f64, start_time f64, f0 f64, then row-major
    /// little-endian f32 samples.
    pub fn write_mbcd<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MBCD_MAGIC)?;
        w.write_u16::<LittleEndian>(MBCD_VERSION)?;
        for &d in self.samples.shape() {
            w.write_u32::<LittleEndian>(d as u32)?;
        }
        w.write_f64::<LittleEndian>(self.sampling_rate)?;
        w.write_f64::<LittleEndian>(self.start_time)?;
        w.write_f64::<LittleEndian>(self.center_frequency)?;
        let flat = self
            .samples
            .as_slice()
            .expect("channel data is stored contiguously");
        let mut buf = Vec::with_capacity(flat.len() * 4);
        for &v in flat {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_mbcd<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MBCD_MAGIC {
            return Err(Error::Data(format!(
                "bad channel-data magic {magic:?}, expected {MBCD_MAGIC:?}"
            )));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != MBCD_VERSION {
            return Err(Error::Data(format!(
                "unsupported channel-data version {version}"
            )));
        }
        let n_tx = r.read_u32::<LittleEndian>()? as usize;
        let n_rx = r.read_u32::<LittleEndian>()? as usize;
        let n_t = r.read_u32::<LittleEndian>()? as usize;
        let sampling_rate = r.read_f64::<LittleEndian>()?;
        let start_time = r.read_f64::<LittleEndian>()?;
        let center_frequency = r.read_f64::<LittleEndian>()?;
        let total = n_tx
            .checked_mul(n_rx)
            .and_then(|v| v.checked_mul(n_t))
            .ok_or_else(|| Error::Data("channel-data dims overflow".into()))?;
        let mut buf = vec![0u8; total * 4];
        r.read_exact(&mut buf)?;
        let flat: Vec<f64> = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let samples = Array3::from_shape_vec((n_tx, n_rx, n_t), flat)
            .map_err(|e| Error::Data(format!("channel-data shape: {e}")))?;
        Ok(Self {
            samples,
            sampling_rate,
            start_time,
            center_frequency,
        })
    }

    pub fn write_mbcd_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_mbcd(std::io::BufWriter::new(f))
    }

    pub fn read_mbcd_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_mbcd(std::io::BufReader::new(f))
    }
}

/// Merge the four per-quadrant acquisitions of a virtual aperture into one
/// dataset whose receiver order is the global row-major block grid.
pub fn fuse_quadrants(vla: &VirtualAperture, parts: &[ChannelData]) -> Result<ChannelData> {
    if parts.len() != 4 {
        return Err(Error::Data(format!(
            "virtual aperture fusion needs 4 quadrant datasets, got {}",
            parts.len()
        )));
    }
    let brows = vla.quadrants[0].1.block_rows();
    let bcols = vla.quadrants[0].1.block_cols();
    let per_quadrant = brows * bcols;
    let first = &parts[0];
    for (q, p) in parts.iter().enumerate() {
        if p.n_receivers() != per_quadrant {
            return Err(Error::Data(format!(
                "quadrant {q} has {} receivers, expected {per_quadrant}",
                p.n_receivers()
            )));
        }
        if p.n_transmissions() != first.n_transmissions()
            || p.n_samples() != first.n_samples()
            || p.sampling_rate != first.sampling_rate
            || p.start_time != first.start_time
            || p.center_frequency != first.center_frequency
        {
            return Err(Error::Data(format!(
                "quadrant {q} metadata or shape differs from quadrant 0"
            )));
        }
    }
    let n_tx = first.n_transmissions();
    let n_t = first.n_samples();
    let mut samples = Array3::<f64>::zeros((n_tx, 4 * per_quadrant, n_t));
    for row in 0..2 * brows {
        let (qr, lr) = (row / brows, row % brows);
        for col in 0..2 * bcols {
            let (qc, lc) = (col / bcols, col % bcols);
            let part = &parts[qr * 2 + qc];
            let local = lr * bcols + lc;
            let global = row * 2 * bcols + col;
            for k in 0..n_tx {
                for t in 0..n_t {
                    samples[[k, global, t]] = part.samples[[k, local, t]];
                }
            }
        }
    }
    Ok(ChannelData {
        samples,
        sampling_rate: first.sampling_rate,
        start_time: first.start_time,
        center_frequency: first.center_frequency,
    })
}
