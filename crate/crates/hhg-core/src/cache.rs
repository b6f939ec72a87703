//! On-disk archive of converged dressed eigenstates.
//!
//! A Floquet solve at production resolution costs minutes; rerunning a sweep
//! should not repeat it. Entries are keyed by a digest of the full resolved
//! problem description, so any change to the atom, grid, scaling angle, drive,
//! basis truncation, or solver target lands on a different file.
//!
//! The format is deliberately dumb: fixed magic, format version, the key the
//! entry was stored under, then a length-prefixed little-endian payload with
//! its own digest. Every f64 round-trips through `to_bits`, making a cache
//! hit *bit-identical* to the solve that produced it — reruns stay
//! byte-for-byte reproducible whether they hit or miss. Anything unexpected
//! (short file, stale version, checksum mismatch, nonsense values) is
//! reported as [`CacheLookup::Corrupt`] so the caller can warn and recompute
//! instead of failing the run.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::floquet::{DriveField, FloquetEigenstate, StateLabel, SymmetryLabel};
use crate::grid::SpatialGrid;
use crate::C64;

/// Leading bytes of every archive file.
pub const CACHE_MAGIC: &[u8; 8] = b"FLQCACHE";
/// Bumped whenever the payload layout changes; older files read as corrupt.
pub const CACHE_VERSION: u32 = 1;

/// Digest of a serializable problem description; the cache key.
pub fn cache_key<T: serde::Serialize>(descriptor: &T) -> Result<[u8; 32]> {
    let bytes = serde_json::to_vec(descriptor)?;
    Ok(Sha256::digest(&bytes).into())
}

/// File name an entry with this key lives under.
pub fn cache_file_name(key: &[u8; 32]) -> String {
    let mut name = String::with_capacity(68);
    for byte in key {
        name.push_str(&format!("{byte:02x}"));
    }
    name.push_str(".flq");
    name
}

/// Outcome of a cache probe.
#[derive(Debug)]
pub enum CacheLookup {
    /// Entry found and intact; the state is bit-identical to what was stored.
    Hit(FloquetEigenstate),
    /// No entry under this key.
    Miss,
    /// An entry exists but cannot be trusted; recompute and overwrite.
    Corrupt(String),
}

/// Writes `state` under `key`, creating the directory if needed. The write
/// goes through a sibling temp file and a rename so a crashed run never
/// leaves a half-written archive under the real name.
pub fn store_state(dir: &Path, key: &[u8; 32], state: &FloquetEigenstate) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let final_path = dir.join(cache_file_name(key));

    let payload = encode_state(state);
    let mut bytes = Vec::with_capacity(payload.len() + 84);
    bytes.extend_from_slice(CACHE_MAGIC);
    bytes.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    bytes.extend_from_slice(key);
    bytes.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&payload);
    let digest: [u8; 32] = Sha256::digest(&payload).into();
    bytes.extend_from_slice(&digest);

    let tmp_path = final_path.with_extension("flq.partial");
    fs::write(&tmp_path, &bytes).map_err(|e| Error::io(tmp_path.display().to_string(), e))?;
    fs::rename(&tmp_path, &final_path)
        .map_err(|e| Error::io(final_path.display().to_string(), e))?;
    Ok(final_path)
}

/// Probes the cache. Only a complete, current-version, checksum-clean entry
/// under the same key is a hit; a missing file is a miss; everything else is
/// corrupt with a reason.
pub fn load_state(dir: &Path, key: &[u8; 32]) -> CacheLookup {
    let path = dir.join(cache_file_name(key));
    let bytes = match fs::read(&path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return CacheLookup::Miss,
        Err(e) => return CacheLookup::Corrupt(format!("unreadable: {e}")),
    };
    match decode_archive(&bytes, key) {
        Ok(state) => CacheLookup::Hit(state),
        Err(reason) => CacheLookup::Corrupt(reason),
    }
}

fn decode_archive(bytes: &[u8], key: &[u8; 32]) -> std::result::Result<FloquetEigenstate, String> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.take(8)?;
    if magic != CACHE_MAGIC {
        return Err("bad magic".to_string());
    }
    let version = cur.u32()?;
    if version != CACHE_VERSION {
        return Err(format!(
            "format version {version}, this build writes {CACHE_VERSION}"
        ));
    }
    let stored_key = cur.take(32)?;
    if stored_key != key {
        return Err("entry was stored under a different key".to_string());
    }
    let payload_len = cur.u64()? as usize;
    let payload = cur.take(payload_len)?;
    let digest = cur.take(32)?;
    if cur.remaining() != 0 {
        return Err(format!("{} trailing bytes", cur.remaining()));
    }
    let expected: [u8; 32] = Sha256::digest(payload).into();
    if digest != expected {
        return Err("payload checksum mismatch".to_string());
    }
    decode_state(payload)
}

fn encode_state(state: &FloquetEigenstate) -> Vec<u8> {
    let mut out = Vec::new();
    put_c64(&mut out, state.quasienergy);
    put_f64(&mut out, state.symmetry_residual);
    put_c64(&mut out, state.target_overlap);
    put_f64(&mut out, state.eigen_residual);
    out.push(match state.symmetry {
        SymmetryLabel::Plus => 0,
        SymmetryLabel::Minus => 1,
    });
    out.push(match state.label {
        StateLabel::FLg => 0,
        StateLabel::FLe => 1,
        StateLabel::Other => 2,
    });
    put_f64(&mut out, state.grid.extent());
    put_u64(&mut out, state.grid.points() as u64);
    put_f64(&mut out, state.drive.amplitude);
    put_f64(&mut out, state.drive.frequency);
    put_u64(&mut out, state.channels.len() as u64);
    for (&n, phi) in &state.channels {
        out.extend_from_slice(&n.to_le_bytes());
        put_u64(&mut out, phi.len() as u64);
        for &v in phi {
            put_c64(&mut out, v);
        }
    }
    out
}

fn decode_state(payload: &[u8]) -> std::result::Result<FloquetEigenstate, String> {
    let mut cur = Cursor::new(payload);
    let quasienergy = cur.c64()?;
    let symmetry_residual = cur.f64()?;
    let target_overlap = cur.c64()?;
    let eigen_residual = cur.f64()?;
    let symmetry = match cur.u8()? {
        0 => SymmetryLabel::Plus,
        1 => SymmetryLabel::Minus,
        other => return Err(format!("unknown symmetry tag {other}")),
    };
    let label = match cur.u8()? {
        0 => StateLabel::FLg,
        1 => StateLabel::FLe,
        2 => StateLabel::Other,
        other => return Err(format!("unknown state tag {other}")),
    };
    let extent = cur.f64()?;
    let points = cur.u64()? as usize;
    let grid = SpatialGrid::new(extent, points).map_err(|e| format!("stored grid: {e}"))?;
    let amplitude = cur.f64()?;
    let frequency = cur.f64()?;
    let drive =
        DriveField::new(amplitude, frequency).map_err(|e| format!("stored drive: {e}"))?;
    let num_channels = cur.u64()? as usize;
    let mut channels = BTreeMap::new();
    let mut previous: Option<i32> = None;
    for _ in 0..num_channels {
        let n = cur.i32()?;
        if previous.is_some_and(|p| p >= n) {
            return Err("channel indices out of order".to_string());
        }
        previous = Some(n);
        let len = cur.u64()? as usize;
        if len != points {
            return Err(format!(
                "channel {n} holds {len} samples on a {points}-point grid"
            ));
        }
        let mut phi = Vec::with_capacity(len);
        for _ in 0..len {
            phi.push(cur.c64()?);
        }
        channels.insert(n, phi);
    }
    if cur.remaining() != 0 {
        return Err(format!("{} trailing payload bytes", cur.remaining()));
    }
    if channels.is_empty() {
        return Err("entry holds no channels".to_string());
    }
    Ok(FloquetEigenstate {
        quasienergy,
        channels,
        symmetry,
        symmetry_residual,
        target_overlap,
        label,
        grid,
        drive,
        eigen_residual,
    })
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_bits().to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_c64(out: &mut Vec<u8>, v: C64) {
    put_f64(out, v.re);
    put_f64(out, v.im);
}

/// Bounds-checked little-endian reader over the raw archive bytes.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        if self.remaining() < n {
            return Err(format!(
                "truncated: wanted {n} bytes at offset {}, {} left",
                self.pos,
                self.remaining()
            ));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> std::result::Result<i32, String> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn c64(&mut self) -> std::result::Result<C64, String> {
        Ok(C64::new(self.f64()?, self.f64()?))
    }
}
