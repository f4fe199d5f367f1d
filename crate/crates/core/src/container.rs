//! Versioned, length-prefixed binary container for realization dumps.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"DWZ2"
//! version u32            (currently 1)
//! seed    u64
//! t_max   f64
//! count   u64            number of step indices
//! per index: len u32, then len records of (tau f64, direction u8)
//! ```
//!
//! Dumps materialize the lazily generated timelines so a reader needs no
//! knowledge of the generator.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::point::Direction;
use crate::process::{DynamicalWalkRealization, RefreshTimeline};

const MAGIC: &[u8; 4] = b"DWZ2";
const VERSION: u32 = 1;

pub fn write_realization<W: Write>(w: &mut W, r: &DynamicalWalkRealization) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&r.seed().to_le_bytes())?;
    w.write_all(&r.t_max().to_le_bytes())?;
    w.write_all(&(r.n_steps() as u64).to_le_bytes())?;
    for n in 1..=r.n_steps() {
        let tl = r.timeline(n).expect("index within realization");
        w.write_all(&(tl.times().len() as u32).to_le_bytes())?;
        for (tau, dir) in tl.times().iter().zip(tl.directions()) {
            w.write_all(&tau.to_le_bytes())?;
            w.write_all(&[*dir as u8])?;
        }
    }
    Ok(())
}

pub fn read_realization<R: Read>(r: &mut R) -> Result<DynamicalWalkRealization> {
    let bad = |reason: &str| Error::BadContainer {
        reason: reason.into(),
    };
    let io_err = |e: io::Error| Error::BadContainer {
        reason: format!("read failed: {e}"),
    };

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = read_u32(r).map_err(io_err)?;
    if version != VERSION {
        return Err(Error::BadContainer {
            reason: format!("unsupported version {version}"),
        });
    }
    let seed = read_u64(r).map_err(io_err)?;
    let t_max = f64::from_le_bytes(read_array(r).map_err(io_err)?);
    let count = read_u64(r).map_err(io_err)? as usize;
    let mut timelines = Vec::with_capacity(count);
    for _ in 0..count {
        let len = read_u32(r).map_err(io_err)? as usize;
        let mut times = Vec::with_capacity(len);
        let mut dirs = Vec::with_capacity(len);
        for _ in 0..len {
            times.push(f64::from_le_bytes(read_array(r).map_err(io_err)?));
            let mut b = [0u8; 1];
            r.read_exact(&mut b).map_err(io_err)?;
            if b[0] > 3 {
                return Err(bad("direction byte out of range"));
            }
            dirs.push(Direction::from_bits(b[0]));
        }
        timelines.push(RefreshTimeline::from_parts(times, dirs)?);
    }
    Ok(DynamicalWalkRealization::from_timelines(
        timelines, t_max, seed,
    ))
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}
