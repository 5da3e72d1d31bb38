//! Streaming set intersection over two sorted runs: a block-at-a-time loop
//! with dual cursor advance, finished by a scalar merge tail.
//!
//! The block loop runs while at least L lanes remain in both runs, so it
//! never reads outside either buffer; the scalar tail handles the rest.

use crate::dispatch::{resolve_kernel, BlockKernel, KernelChoice, KernelLane};
use crate::error::{Error, Result};
use crate::geometry::{KernelGeometry, Lane, LaneWidth};
use crate::kernels::scalar;
use crate::kernels::LaneVector;

/// A strictly increasing array of lane-width integers; the canonical set
/// representation consumed by the driver. Strict increase is enforced at
/// construction, so duplicates cannot reach the block loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortedRun {
    data: RunData,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunData {
    U16(Vec<u16>),
    U32(Vec<u32>),
    U64(Vec<u64>),
}

fn validate_sorted<T: Lane>(values: &[T]) -> Result<()> {
    for (i, pair) in values.windows(2).enumerate() {
        if pair[0] >= pair[1] {
            return Err(Error::NotStrictlyIncreasing { index: i + 1 });
        }
    }
    Ok(())
}

impl SortedRun {
    pub fn from_u16(values: Vec<u16>) -> Result<Self> {
        validate_sorted(&values)?;
        Ok(Self {
            data: RunData::U16(values),
        })
    }

    pub fn from_u32(values: Vec<u32>) -> Result<Self> {
        validate_sorted(&values)?;
        Ok(Self {
            data: RunData::U32(values),
        })
    }

    pub fn from_u64(values: Vec<u64>) -> Result<Self> {
        validate_sorted(&values)?;
        Ok(Self {
            data: RunData::U64(values),
        })
    }

    pub(crate) fn from_sorted_unchecked<T: RunLane>(values: Vec<T>) -> Self {
        debug_assert!(validate_sorted(&values).is_ok());
        T::wrap_run(values)
    }

    pub fn data(&self) -> &RunData {
        &self.data
    }

    pub fn lane_bits(&self) -> u16 {
        match &self.data {
            RunData::U16(_) => 16,
            RunData::U32(_) => 32,
            RunData::U64(_) => 64,
        }
    }

    pub fn lane_width(&self) -> LaneWidth {
        LaneWidth::from_bits(self.lane_bits()).unwrap()
    }

    pub fn len(&self) -> usize {
        match &self.data {
            RunData::U16(v) => v.len(),
            RunData::U32(v) => v.len(),
            RunData::U64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_u16(&self) -> Option<&[u16]> {
        match &self.data {
            RunData::U16(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_u32(&self) -> Option<&[u32]> {
        match &self.data {
            RunData::U32(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_u64(&self) -> Option<&[u64]> {
        match &self.data {
            RunData::U64(v) => Some(v),
            _ => None,
        }
    }

    /// Widened view for width-agnostic consumers.
    pub fn iter_u64(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.data {
            RunData::U16(v) => Box::new(v.iter().map(|&x| x as u64)),
            RunData::U32(v) => Box::new(v.iter().map(|&x| x as u64)),
            RunData::U64(v) => Box::new(v.iter().copied()),
        }
    }
}

// Lets generic code wrap a typed vector back into a SortedRun.
pub(crate) trait RunLane: Lane {
    fn wrap_run(values: Vec<Self>) -> SortedRun;
    fn run_slice(run: &SortedRun) -> Option<&[Self]>;
}

impl RunLane for u16 {
    fn wrap_run(values: Vec<Self>) -> SortedRun {
        SortedRun {
            data: RunData::U16(values),
        }
    }
    fn run_slice(run: &SortedRun) -> Option<&[Self]> {
        run.as_u16()
    }
}

impl RunLane for u32 {
    fn wrap_run(values: Vec<Self>) -> SortedRun {
        SortedRun {
            data: RunData::U32(values),
        }
    }
    fn run_slice(run: &SortedRun) -> Option<&[Self]> {
        run.as_u32()
    }
}

impl RunLane for u64 {
    fn wrap_run(values: Vec<Self>) -> SortedRun {
        SortedRun {
            data: RunData::U64(values),
        }
    }
    fn run_slice(run: &SortedRun) -> Option<&[Self]> {
        run.as_u64()
    }
}

/// The materialized (or counted) intersection of two runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionResult {
    /// Present only when materializing.
    pub values: Option<SortedRun>,
    pub count: u64,
}

/// Per-call instrumentation of the block loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DriverStats {
    /// Iterations of the vector block loop (the tail is excluded).
    pub block_iterations: u64,
    /// Block iterations where neither cursor advanced a full block.
    pub progress_violations: u64,
    /// Advance masks that were not a ones-prefix (impossible on sorted input).
    pub prefix_violations: u64,
    /// Remainder lengths handed to the scalar tail.
    pub tail_len_a: usize,
    pub tail_len_b: usize,
}

/// Lanes of each block with value <= the other block's last lane, via the
/// popcount of the <= comparison masks.
pub fn advance_counts(va: &LaneVector, vb: &LaneVector) -> Result<(usize, usize)> {
    if va.geometry() != vb.geometry() {
        return Err(Error::GeometryMismatch {
            left: va.geometry(),
            right: vb.geometry(),
        });
    }
    let l = va.geometry().lane_count();
    let (da, _) = scalar::advance_block(va.lanes(), vb.lanes()[l - 1]);
    let (db, _) = scalar::advance_block(vb.lanes(), va.lanes()[l - 1]);
    Ok((da as usize, db as usize))
}

/// Two-pointer merge intersection of two short remainders, appended to
/// `sink`; returns the number of matches.
pub fn scalar_tail_intersect<T: Lane>(a: &[T], b: &[T], sink: &mut Vec<T>) -> u64 {
    merge_tail(a, b, Some(sink))
}

fn merge_tail<T: Lane>(a: &[T], b: &[T], mut sink: Option<&mut Vec<T>>) -> u64 {
    let (mut i, mut j, mut count) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if let Some(out) = sink.as_deref_mut() {
                    out.push(a[i]);
                }
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn intersect_core<T: KernelLane>(
    a: &[T],
    b: &[T],
    kernel: &BlockKernel<T>,
    mut sink: Option<&mut Vec<T>>,
) -> (u64, DriverStats) {
    let l = kernel.choice().geometry.lane_count();
    let mut stats = DriverStats::default();
    let (mut i, mut j, mut count) = (0usize, 0usize, 0u64);

    while a.len() - i >= l && b.len() - j >= l {
        stats.block_iterations += 1;
        let wa = &a[i..i + l];
        let wb = &b[j..j + l];

        let mask = kernel.first_mask(wa, wb);
        count += mask.count_ones() as u64;
        if let Some(out) = sink.as_deref_mut() {
            // compress-store: mask-selected lanes of the a block, in order
            let mut m = mask;
            while m != 0 {
                out.push(wa[m.trailing_zeros() as usize]);
                m &= m - 1;
            }
        }

        let (da, db) = match kernel.advance(wa, wb) {
            Some((da, db)) => {
                #[cfg(debug_assertions)]
                {
                    let (sda, ok_a) = scalar::advance_block(wa, wb[l - 1]);
                    let (sdb, ok_b) = scalar::advance_block(wb, wa[l - 1]);
                    debug_assert!(ok_a && ok_b);
                    debug_assert_eq!((sda, sdb), (da, db));
                }
                (da, db)
            }
            None => {
                let (da, ok_a) = scalar::advance_block(wa, wb[l - 1]);
                let (db, ok_b) = scalar::advance_block(wb, wa[l - 1]);
                if !ok_a || !ok_b {
                    stats.prefix_violations += 1;
                }
                (da, db)
            }
        };

        if da.max(db) as usize != l {
            stats.progress_violations += 1;
        }
        i += da as usize;
        j += db as usize;
    }

    stats.tail_len_a = a.len() - i;
    stats.tail_len_b = b.len() - j;
    count += merge_tail(&a[i..], &b[j..], sink);
    (count, stats)
}

fn check_widths(a: &SortedRun, b: &SortedRun, geometry: KernelGeometry) -> Result<()> {
    if a.lane_bits() != geometry.lane_bits() {
        return Err(Error::LaneWidthMismatch {
            expected: geometry.lane_bits(),
            got: a.lane_bits(),
        });
    }
    if b.lane_bits() != geometry.lane_bits() {
        return Err(Error::LaneWidthMismatch {
            expected: geometry.lane_bits(),
            got: b.lane_bits(),
        });
    }
    Ok(())
}

fn run_typed<T: KernelLane + RunLane>(
    a: &SortedRun,
    b: &SortedRun,
    choice: &KernelChoice,
    materialize: bool,
) -> Result<(Option<SortedRun>, u64, DriverStats)> {
    let kernel = resolve_kernel::<T>(*choice)?;
    let xa = T::run_slice(a).expect("width checked");
    let xb = T::run_slice(b).expect("width checked");
    if materialize {
        let mut out: Vec<T> = Vec::with_capacity(xa.len().min(xb.len()));
        let (count, stats) = intersect_core(xa, xb, &kernel, Some(&mut out));
        Ok((Some(SortedRun::from_sorted_unchecked(out)), count, stats))
    } else {
        let (count, stats) = intersect_core(xa, xb, &kernel, None);
        Ok((None, count, stats))
    }
}

fn dispatch_run(
    a: &SortedRun,
    b: &SortedRun,
    choice: &KernelChoice,
    materialize: bool,
) -> Result<(Option<SortedRun>, u64, DriverStats)> {
    check_widths(a, b, choice.geometry)?;
    match a.lane_width() {
        LaneWidth::W16 => run_typed::<u16>(a, b, choice, materialize),
        LaneWidth::W32 => run_typed::<u32>(a, b, choice, materialize),
        LaneWidth::W64 => run_typed::<u64>(a, b, choice, materialize),
    }
}

/// Sorted intersection of two runs, equal to a two-pointer merge.
pub fn intersect_runs(
    a: &SortedRun,
    b: &SortedRun,
    choice: &KernelChoice,
) -> Result<IntersectionResult> {
    intersect_runs_with_stats(a, b, choice).map(|(r, _)| r)
}

pub fn intersect_runs_with_stats(
    a: &SortedRun,
    b: &SortedRun,
    choice: &KernelChoice,
) -> Result<(IntersectionResult, DriverStats)> {
    let (values, count, stats) = dispatch_run(a, b, choice, true)?;
    Ok((IntersectionResult { values, count }, stats))
}

/// Intersection size without materializing: per block, the popcount of the
/// first mask.
pub fn intersect_size(a: &SortedRun, b: &SortedRun, choice: &KernelChoice) -> Result<u64> {
    intersect_size_with_stats(a, b, choice).map(|(n, _)| n)
}

pub fn intersect_size_with_stats(
    a: &SortedRun,
    b: &SortedRun,
    choice: &KernelChoice,
) -> Result<(u64, DriverStats)> {
    let (_, count, stats) = dispatch_run(a, b, choice, false)?;
    Ok((count, stats))
}
