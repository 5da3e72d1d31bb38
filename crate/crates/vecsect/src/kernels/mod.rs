//! Intersection-mask kernels over fixed-geometry lane vectors.
//!
//! [`oracle_two_masks`] is the ground truth every other kernel is tested
//! against: bit i of the first mask is set iff lane i of the first argument
//! appears anywhere in the second. The rotate-and-compare kernels
//! ([`fast_first_mask`], [`strict_two_masks`]) rest on the rotation algebra
//! exposed here ([`rotate_blocks`], [`rotate_within_blocks`],
//! [`mask_rotate_left`]).
//!
//! Everything in this module is the portable formulation; the vector
//! backends in [`crate::dispatch`] must agree with it bit for bit.

pub(crate) mod scalar;
#[cfg(target_arch = "x86_64")]
pub(crate) mod x86;

use crate::error::{Error, Result};
use crate::geometry::{KernelGeometry, MAX_LANES};

/// A fixed-length vector of unsigned integer lanes; the register abstraction.
/// Lane 0 is the lowest lane. Values are unrestricted within the lane width;
/// duplicates and any ordering are permitted at kernel level.
#[derive(Clone, Copy)]
pub struct LaneVector {
    geometry: KernelGeometry,
    lanes: [u64; MAX_LANES],
}

impl LaneVector {
    pub fn new(geometry: KernelGeometry, values: &[u64]) -> Result<Self> {
        if values.len() != geometry.lane_count() {
            return Err(Error::LaneCountMismatch {
                expected: geometry.lane_count(),
                got: values.len(),
            });
        }
        let max = geometry.lane_value_max();
        let mut lanes = [0u64; MAX_LANES];
        for (i, &v) in values.iter().enumerate() {
            if v > max {
                return Err(Error::LaneValueOutOfRange {
                    value: v,
                    lane_bits: geometry.lane_bits(),
                });
            }
            lanes[i] = v;
        }
        Ok(Self { geometry, lanes })
    }

    /// All lanes set to the same value.
    pub fn splat(geometry: KernelGeometry, value: u64) -> Result<Self> {
        let values = vec![value; geometry.lane_count()];
        Self::new(geometry, &values)
    }

    pub fn geometry(&self) -> KernelGeometry {
        self.geometry
    }

    pub fn lanes(&self) -> &[u64] {
        &self.lanes[..self.geometry.lane_count()]
    }
}

impl PartialEq for LaneVector {
    fn eq(&self, other: &Self) -> bool {
        self.geometry == other.geometry && self.lanes() == other.lanes()
    }
}

impl Eq for LaneVector {}

impl std::fmt::Debug for LaneVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LaneVector({} {:?})", self.geometry, self.lanes())
    }
}

/// An L-bit intersection mask; bit i corresponds to lane i of the first
/// kernel argument. Holds no bits above the geometry's lane count.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct IntersectMask {
    geometry: KernelGeometry,
    bits: u32,
}

impl IntersectMask {
    pub fn new(geometry: KernelGeometry, bits: u32) -> Result<Self> {
        if bits & !geometry.mask_bits() != 0 {
            return Err(Error::MaskOutOfRange {
                bits,
                lane_count: geometry.lane_count(),
            });
        }
        Ok(Self { geometry, bits })
    }

    fn from_kernel(geometry: KernelGeometry, bits: u32) -> Self {
        debug_assert_eq!(bits & !geometry.mask_bits(), 0);
        Self { geometry, bits }
    }

    pub fn geometry(&self) -> KernelGeometry {
        self.geometry
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn popcount(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl std::fmt::Debug for IntersectMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "IntersectMask({} {:0width$b})",
            self.geometry,
            self.bits,
            width = self.geometry.lane_count()
        )
    }
}

/// A read-only window of lane values addressed by index; the in-memory
/// second operand of [`memory_first_mask`].
#[derive(Clone, Copy, Debug)]
pub struct MemoryOperand<'a> {
    lanes: &'a [u64],
}

impl<'a> MemoryOperand<'a> {
    pub fn new(lanes: &'a [u64]) -> Self {
        Self { lanes }
    }

    pub fn lanes(&self) -> &[u64] {
        self.lanes
    }
}

fn check_same_geometry(a: &LaneVector, b: &LaneVector) -> Result<KernelGeometry> {
    if a.geometry != b.geometry {
        return Err(Error::GeometryMismatch {
            left: a.geometry,
            right: b.geometry,
        });
    }
    Ok(a.geometry)
}

/// Reference two-mask semantics: the quadratic scalar double loop.
///
/// First mask bit i is set iff some j has `a.lanes[i] == b.lanes[j]`; second
/// mask bit j is set iff some i has `a.lanes[i] == b.lanes[j]`.
pub fn oracle_two_masks(a: &LaneVector, b: &LaneVector) -> Result<(IntersectMask, IntersectMask)> {
    let geom = check_same_geometry(a, b)?;
    let (ka, kb) = scalar::oracle_two_masks(a.lanes(), b.lanes());
    Ok((
        IntersectMask::from_kernel(geom, ka),
        IntersectMask::from_kernel(geom, kb),
    ))
}

/// Rotation of whole 128-bit blocks toward lower lane indices: output lane i
/// equals input lane (i + k_blocks * g) mod L.
pub fn rotate_blocks(a: &LaneVector, k_blocks: usize) -> Result<LaneVector> {
    let geom = a.geometry;
    if k_blocks >= geom.block_count() {
        return Err(Error::RotationOutOfRange {
            kind: "block",
            amount: k_blocks,
            limit: geom.block_count(),
        });
    }
    let mut out = *a;
    scalar::rotate_blocks(
        a.lanes(),
        &mut out.lanes[..geom.lane_count()],
        geom.lanes_per_block(),
        k_blocks,
    );
    Ok(out)
}

/// Rotation of lanes within each 128-bit block independently; blocks never
/// exchange lanes.
pub fn rotate_within_blocks(b: &LaneVector, j_lanes: usize) -> Result<LaneVector> {
    let geom = b.geometry;
    if j_lanes >= geom.lanes_per_block() {
        return Err(Error::RotationOutOfRange {
            kind: "within-block",
            amount: j_lanes,
            limit: geom.lanes_per_block(),
        });
    }
    let mut out = *b;
    scalar::rotate_within_blocks(
        b.lanes(),
        &mut out.lanes[..geom.lane_count()],
        geom.lanes_per_block(),
        j_lanes,
    );
    Ok(out)
}

/// L-bit left bit-rotation of the mask. Amounts >= L are rejected rather
/// than reduced mod L, to surface geometry bugs early.
pub fn mask_rotate_left(m: IntersectMask, k: usize) -> Result<IntersectMask> {
    let l = m.geometry.lane_count();
    if k >= l {
        return Err(Error::RotationOutOfRange {
            kind: "mask",
            amount: k,
            limit: l,
        });
    }
    Ok(IntersectMask::from_kernel(
        m.geometry,
        scalar::mask_rol(m.bits, k, l),
    ))
}

/// Broadcast-compare kernel: broadcast each lane of `b`, compare for
/// equality against `a`, OR the L resulting masks.
pub fn naive_first_mask(a: &LaneVector, b: &LaneVector) -> Result<IntersectMask> {
    let geom = check_same_geometry(a, b)?;
    Ok(IntersectMask::from_kernel(
        geom,
        scalar::naive_first_mask(a.lanes(), b.lanes()),
    ))
}

/// Rotate-and-compare kernel in the chained not-equal form: G block rotations
/// of `a` against g within-block rotations of `b`, per-rotation chains
/// un-rotated by i*g bits, ANDed, and complemented.
pub fn fast_first_mask(a: &LaneVector, b: &LaneVector) -> Result<IntersectMask> {
    let geom = check_same_geometry(a, b)?;
    Ok(IntersectMask::from_kernel(
        geom,
        scalar::fast_first_mask(a.lanes(), b.lanes(), geom),
    ))
}

/// The OR-combining formulation of [`fast_first_mask`]; kept as the
/// reference side of the De Morgan identity between the two forms.
pub fn fast_first_mask_or_combine(a: &LaneVector, b: &LaneVector) -> Result<IntersectMask> {
    let geom = check_same_geometry(a, b)?;
    Ok(IntersectMask::from_kernel(
        geom,
        scalar::fast_first_mask_or_combine(a.lanes(), b.lanes(), geom),
    ))
}

/// Broadcast kernel with the second operand in memory: chained not-equal
/// comparisons in blocks of three, final complement of the last three masks.
pub fn memory_first_mask(a: &LaneVector, b: &MemoryOperand<'_>) -> Result<IntersectMask> {
    let geom = a.geometry;
    if b.lanes.len() != geom.lane_count() {
        return Err(Error::WindowLengthMismatch {
            expected: geom.lane_count(),
            got: b.lanes.len(),
        });
    }
    let max = geom.lane_value_max();
    for &v in b.lanes {
        if v > max {
            return Err(Error::LaneValueOutOfRange {
                value: v,
                lane_bits: geom.lane_bits(),
            });
        }
    }
    Ok(IntersectMask::from_kernel(
        geom,
        scalar::memory_first_mask(a.lanes(), b.lanes),
    ))
}

/// Both output masks, bitwise-identical to [`oracle_two_masks`]. Implemented
/// for 512-bit vectors of 32-bit lanes only; the second-mask bit
/// reconstruction does not generalize to other block shapes.
pub fn strict_two_masks(a: &LaneVector, b: &LaneVector) -> Result<(IntersectMask, IntersectMask)> {
    let geom = check_same_geometry(a, b)?;
    if (geom.vector_bits(), geom.lane_bits()) != (512, 32) {
        return Err(Error::UnsupportedGeometry {
            operation: "strict_two_masks",
            geometry: geom,
        });
    }
    let (ka, kb) = scalar::strict_two_masks_512x32(a.lanes(), b.lanes());
    Ok((
        IntersectMask::from_kernel(geom, ka),
        IntersectMask::from_kernel(geom, kb),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(v: u16, l: u16) -> KernelGeometry {
        KernelGeometry::new(v, l).unwrap()
    }

    fn vector(v: u16, l: u16, values: &[u64]) -> LaneVector {
        LaneVector::new(geom(v, l), values).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let a = vector(512, 32, &(0..16).collect::<Vec<_>>());
        let (ka, kb) = oracle_two_masks(&a, &a).unwrap();
        assert_eq!((ka.bits(), kb.bits()), (0xFFFF, 0xFFFF));

        let evens = vector(512, 32, &(0..16).map(|i| 2 * i).collect::<Vec<_>>());
        let odds = vector(512, 32, &(0..16).map(|i| 2 * i + 1).collect::<Vec<_>>());
        let (ka, kb) = oracle_two_masks(&evens, &odds).unwrap();
        assert_eq!((ka.bits(), kb.bits()), (0, 0));

        let a = vector(128, 32, &[5, 5, 9, 9]);
        let b = vector(128, 32, &[9, 1, 2, 5]);
        let (ka, kb) = oracle_two_masks(&a, &b).unwrap();
        assert_eq!((ka.bits(), kb.bits()), (0b1111, 0b1001));
    }

    #[test]
    fn geometry_mismatch_rejected() {
        let a = vector(512, 32, &(0..16).collect::<Vec<_>>());
        let b = vector(256, 32, &(0..8).collect::<Vec<_>>());
        assert!(matches!(
            oracle_two_masks(&a, &b),
            Err(Error::GeometryMismatch { .. })
        ));
        assert!(matches!(
            naive_first_mask(&a, &b),
            Err(Error::GeometryMismatch { .. })
        ));
        assert!(matches!(
            fast_first_mask(&a, &b),
            Err(Error::GeometryMismatch { .. })
        ));
    }

    #[test]
    fn lane_vector_validation() {
        assert!(matches!(
            LaneVector::new(geom(512, 32), &[0; 15]),
            Err(Error::LaneCountMismatch { .. })
        ));
        assert!(matches!(
            LaneVector::new(geom(512, 16), &[0x1_0000; 32]),
            Err(Error::LaneValueOutOfRange { .. })
        ));
    }

    #[test]
    fn rotate_blocks_examples() {
        let v = vector(512, 32, &(0..16).collect::<Vec<_>>());
        let r = rotate_blocks(&v, 1).unwrap();
        let expect: Vec<u64> = (0..16).map(|i| (i + 4) % 16).collect();
        assert_eq!(r.lanes(), &expect[..]);
        assert_eq!(rotate_blocks(&v, 0).unwrap(), v);
        // full rotation composes back to the identity
        let back = rotate_blocks(&rotate_blocks(&v, 1).unwrap(), 3).unwrap();
        assert_eq!(back, v);
        assert!(rotate_blocks(&v, 4).is_err());
    }

    #[test]
    fn rotate_within_blocks_examples() {
        let v = vector(512, 32, &(0..16).collect::<Vec<_>>());
        let r = rotate_within_blocks(&v, 1).unwrap();
        assert_eq!(
            r.lanes(),
            &[1, 2, 3, 0, 5, 6, 7, 4, 9, 10, 11, 8, 13, 14, 15, 12]
        );
        assert_eq!(rotate_within_blocks(&v, 0).unwrap(), v);
        assert!(rotate_within_blocks(&v, 4).is_err());
    }

    #[test]
    fn mask_rotate_left_examples() {
        let g = geom(512, 32);
        let m = IntersectMask::new(g, 0x0001).unwrap();
        assert_eq!(mask_rotate_left(m, 4).unwrap().bits(), 0x0010);
        assert_eq!(mask_rotate_left(m, 0).unwrap(), m);
        assert!(mask_rotate_left(m, 16).is_err());
        // rol 12 == ror 4 at L=16
        let m = IntersectMask::new(g, 0x8421).unwrap();
        assert_eq!(
            mask_rotate_left(m, 12).unwrap().bits(),
            (0x8421u32 >> 4 | 0x8421u32 << 12) & 0xFFFF
        );
    }

    #[test]
    fn naive_trivial_cases() {
        let a = vector(512, 32, &(0..16).collect::<Vec<_>>());
        assert_eq!(naive_first_mask(&a, &a).unwrap().bits(), 0xFFFF);
        let b = LaneVector::splat(geom(512, 32), 0).unwrap();
        assert_eq!(naive_first_mask(&a, &b).unwrap().bits(), 0b1);
    }

    #[test]
    fn fast_constant_vectors() {
        for (v, l) in [(512u16, 32u16), (256, 16), (128, 64)] {
            let a = LaneVector::splat(geom(v, l), 42).unwrap();
            let m = fast_first_mask(&a, &a).unwrap();
            assert_eq!(m.bits(), geom(v, l).mask_bits());
        }
    }

    #[test]
    fn memory_operand_window_checked() {
        let a = vector(512, 32, &(0..16).collect::<Vec<_>>());
        let short = [1u64, 2, 3];
        assert!(matches!(
            memory_first_mask(&a, &MemoryOperand::new(&short)),
            Err(Error::WindowLengthMismatch { .. })
        ));
        // reversed b over the same values -> full mask
        let rev: Vec<u64> = (0..16).rev().collect();
        let m = memory_first_mask(&a, &MemoryOperand::new(&rev)).unwrap();
        assert_eq!(m.bits(), 0xFFFF);
        // single shared value at lane k
        let mut only = vec![1000u64; 16];
        only[0] = 11;
        let a = vector(512, 32, &(10..26).collect::<Vec<_>>());
        let m = memory_first_mask(&a, &MemoryOperand::new(&only)).unwrap();
        assert_eq!(m.bits(), 1 << 1);
    }

    #[test]
    fn strict_geometry_gate() {
        let a = vector(256, 32, &(0..8).collect::<Vec<_>>());
        assert!(matches!(
            strict_two_masks(&a, &a),
            Err(Error::UnsupportedGeometry { .. })
        ));
        let a = vector(512, 32, &(0..16).collect::<Vec<_>>());
        let (ka, kb) = strict_two_masks(&a, &a).unwrap();
        assert_eq!((ka.bits(), kb.bits()), (0xFFFF, 0xFFFF));
    }

    #[test]
    fn mask_new_rejects_stray_bits() {
        assert!(IntersectMask::new(geom(128, 64), 0b100).is_err());
        assert!(IntersectMask::new(geom(128, 64), 0b11).is_ok());
    }
}
