//! Deterministic workload generation and the run file format.
//!
//! A [`WorkloadSpec`] pins every free parameter (seed, lengths, overlap,
//! universe), so identical specs give byte-identical runs on every platform.
//! The exact intersection size is known by construction: a sampled universe
//! is partitioned into shared, a-only and b-only pools.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::driver::SortedRun;
use crate::error::{Error, Result};
use crate::geometry::LaneWidth;

/// Magic bytes opening a run file.
pub const RUN_FILE_MAGIC: [u8; 4] = *b"VSEC";
/// Current run file version.
pub const RUN_FILE_VERSION: u16 = 1;
/// Header: magic (4) + version (2) + lane_bits (2) + count (8).
pub const RUN_FILE_HEADER_LEN: u64 = 16;

/// Everything that determines a generated workload.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub seed: u64,
    pub lane_bits: u16,
    pub len_a: u64,
    pub len_b: u64,
    /// Target shared fraction of the shorter run, in [0, 1].
    pub overlap_fraction: f64,
    /// Values are drawn from [0, universe_max].
    pub universe_max: u64,
}

impl WorkloadSpec {
    /// A spec with the full lane-width universe.
    pub fn new(seed: u64, lane_bits: u16, len_a: u64, len_b: u64, overlap_fraction: f64) -> Self {
        let universe_max = match lane_bits {
            16 => u16::MAX as u64,
            32 => u32::MAX as u64,
            _ => u64::MAX,
        };
        Self {
            seed,
            lane_bits,
            len_a,
            len_b,
            overlap_fraction,
            universe_max,
        }
    }

    /// Number of values shared by both runs.
    pub fn target_shared(&self) -> u64 {
        (self.overlap_fraction * self.len_a.min(self.len_b) as f64).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        LaneWidth::from_bits(self.lane_bits)?;
        if !self.overlap_fraction.is_finite() || !(0.0..=1.0).contains(&self.overlap_fraction) {
            return Err(Error::InvalidWorkload {
                reason: format!("overlap_fraction {} outside [0, 1]", self.overlap_fraction),
            });
        }
        let lane_max = match self.lane_bits {
            16 => u16::MAX as u64,
            32 => u32::MAX as u64,
            _ => u64::MAX,
        };
        if self.universe_max > lane_max {
            return Err(Error::InvalidWorkload {
                reason: format!(
                    "universe_max {:#x} exceeds {}-bit lanes",
                    self.universe_max, self.lane_bits
                ),
            });
        }
        let needed = self.len_a as u128 + self.len_b as u128 - self.target_shared() as u128;
        let universe = self.universe_max as u128 + 1;
        if needed > universe {
            return Err(Error::InfeasibleWorkload { needed, universe });
        }
        Ok(())
    }
}

/// Draws `needed` distinct values from [0, universe_max], deterministically.
fn sample_distinct(rng: &mut ChaCha8Rng, needed: u64, universe_max: u64) -> Vec<u64> {
    let universe = universe_max as u128 + 1;
    if universe <= 1 << 22 {
        // partial Fisher-Yates over the materialized universe
        let mut all: Vec<u64> = (0..=universe_max).collect();
        let n = needed as usize;
        for i in 0..n.min(all.len().saturating_sub(1)) {
            let j = rng.random_range(i as u64..universe as u64) as usize;
            all.swap(i, j);
        }
        all.truncate(n);
        all
    } else {
        // universe overwhelmingly larger than the draw; rejection is cheap
        let mut seen = HashSet::with_capacity(needed as usize);
        let mut out = Vec::with_capacity(needed as usize);
        while out.len() < needed as usize {
            let v = rng.random_range(0..=universe_max);
            if seen.insert(v) {
                out.push(v);
            }
        }
        out
    }
}

fn build_run(lane_bits: u16, mut values: Vec<u64>) -> Result<SortedRun> {
    values.sort_unstable();
    match lane_bits {
        16 => SortedRun::from_u16(values.into_iter().map(|v| v as u16).collect()),
        32 => SortedRun::from_u32(values.into_iter().map(|v| v as u32).collect()),
        _ => SortedRun::from_u64(values),
    }
}

/// Two strictly increasing runs whose exact intersection size equals the
/// returned value. Identical specs produce identical output across runs and
/// platforms.
pub fn generate_runs(spec: &WorkloadSpec) -> Result<(SortedRun, SortedRun, u64)> {
    spec.validate()?;
    let shared = spec.target_shared();
    let needed = spec.len_a + spec.len_b - shared;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pool = sample_distinct(&mut rng, needed, spec.universe_max);

    let shared_pool = &pool[..shared as usize];
    let a_only = &pool[shared as usize..spec.len_a as usize];
    let b_only = &pool[spec.len_a as usize..];
    debug_assert_eq!(b_only.len() as u64, spec.len_b - shared);

    let mut a_vals = Vec::with_capacity(spec.len_a as usize);
    a_vals.extend_from_slice(shared_pool);
    a_vals.extend_from_slice(a_only);
    let mut b_vals = Vec::with_capacity(spec.len_b as usize);
    b_vals.extend_from_slice(shared_pool);
    b_vals.extend_from_slice(b_only);

    Ok((
        build_run(spec.lane_bits, a_vals)?,
        build_run(spec.lane_bits, b_vals)?,
        shared,
    ))
}

/// Writes a run as little-endian binary: 16-byte header (magic `VSEC`,
/// version u16, lane_bits u16, count u64) followed by the lanes.
pub fn write_run_file(path: &Path, run: &SortedRun) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&RUN_FILE_MAGIC)?;
    w.write_all(&RUN_FILE_VERSION.to_le_bytes())?;
    w.write_all(&run.lane_bits().to_le_bytes())?;
    w.write_all(&(run.len() as u64).to_le_bytes())?;
    match run.data() {
        crate::driver::RunData::U16(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        crate::driver::RunData::U32(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        crate::driver::RunData::U64(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn malformed(offset: u64, reason: impl Into<String>) -> Error {
    Error::MalformedRunFile {
        offset,
        reason: reason.into(),
    }
}

/// Reads and fully validates a run file; strict-increase violations report
/// the byte offset of the offending lane.
pub fn read_run_file(path: &Path) -> Result<SortedRun> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| malformed(0, "truncated header"))?;
    if header[0..4] != RUN_FILE_MAGIC {
        return Err(malformed(0, "bad magic (expected VSEC)"));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != RUN_FILE_VERSION {
        return Err(malformed(4, format!("unsupported version {version}")));
    }
    let lane_bits = u16::from_le_bytes([header[6], header[7]]);
    LaneWidth::from_bits(lane_bits).map_err(|_| malformed(6, format!("lane_bits {lane_bits}")))?;
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap());

    let lane_bytes = (lane_bits / 8) as u64;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let expected_len = count
        .checked_mul(lane_bytes)
        .ok_or_else(|| malformed(8, "lane count overflows payload size"))?;
    if (payload.len() as u64) < expected_len {
        return Err(malformed(
            RUN_FILE_HEADER_LEN + payload.len() as u64,
            format!("payload truncated: expected {count} lanes"),
        ));
    }
    if payload.len() as u64 > expected_len {
        return Err(malformed(
            RUN_FILE_HEADER_LEN + expected_len,
            "trailing bytes after last lane",
        ));
    }

    fn decode<T, F: Fn(&[u8]) -> T>(payload: &[u8], size: usize, f: F) -> Vec<T> {
        payload.chunks_exact(size).map(f).collect()
    }

    let offset_of = |index: usize| RUN_FILE_HEADER_LEN + index as u64 * lane_bytes;
    macro_rules! finish {
        ($vals:expr, $ctor:path) => {{
            let vals = $vals;
            for i in 1..vals.len() {
                if vals[i - 1] >= vals[i] {
                    return Err(malformed(offset_of(i), "values not strictly increasing"));
                }
            }
            Ok($ctor(vals).expect("validated above"))
        }};
    }

    match lane_bits {
        16 => finish!(
            decode(&payload, 2, |c| u16::from_le_bytes([c[0], c[1]])),
            SortedRun::from_u16
        ),
        32 => finish!(
            decode(&payload, 4, |c| u32::from_le_bytes(c.try_into().unwrap())),
            SortedRun::from_u32
        ),
        _ => finish!(
            decode(&payload, 8, |c| u64::from_le_bytes(c.try_into().unwrap())),
            SortedRun::from_u64
        ),
    }
}
