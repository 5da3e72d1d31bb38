//! Portable reference implementations of every kernel, generic over the lane
//! type. These compile unconditionally and define the observable behavior the
//! vector backends must match bit for bit.

// Lanes are compared in lockstep by position; indexed loops keep the mask
// bit <-> lane index correspondence visible.
#![allow(clippy::needless_range_loop)]

use crate::geometry::{KernelGeometry, Lane, MAX_LANES};

#[inline]
fn ones(l: usize) -> u32 {
    (((1u64) << l) - 1) as u32
}

/// L-bit left rotation; bit i of the result is bit (i - k) mod L of the input.
#[inline]
pub(crate) fn mask_rol(bits: u32, k: usize, l: usize) -> u32 {
    debug_assert!((2..=32).contains(&l) && k < l);
    if k == 0 {
        return bits & ones(l);
    }
    let wide = bits as u64;
    (((wide << k) | (wide >> (l - k))) as u32) & ones(l)
}

/// L-bit right rotation.
#[inline]
pub(crate) fn mask_ror(bits: u32, k: usize, l: usize) -> u32 {
    mask_rol(bits, (l - k) % l, l)
}

#[inline]
fn eq_mask<T: Lane>(x: &[T], y: &[T]) -> u32 {
    let mut m = 0u32;
    for p in 0..x.len() {
        m |= ((x[p] == y[p]) as u32) << p;
    }
    m
}

#[inline]
fn neq_mask<T: Lane>(x: &[T], y: &[T]) -> u32 {
    let mut m = 0u32;
    for p in 0..x.len() {
        m |= ((x[p] != y[p]) as u32) << p;
    }
    m
}

/// Ground truth: the quadratic double loop. Bit i of the first mask is set
/// iff lane i of `a` equals any lane of `b`; bit j of the second mask is set
/// iff lane j of `b` equals any lane of `a`.
pub(crate) fn oracle_two_masks<T: Lane>(a: &[T], b: &[T]) -> (u32, u32) {
    debug_assert_eq!(a.len(), b.len());
    let mut ka = 0u32;
    let mut kb = 0u32;
    for i in 0..a.len() {
        for j in 0..b.len() {
            if a[i] == b[j] {
                ka |= 1 << i;
                kb |= 1 << j;
            }
        }
    }
    (ka, kb)
}

/// Rotation of whole 128-bit blocks toward lower lane indices:
/// output lane p = input lane (p + k_blocks * g) mod L.
pub(crate) fn rotate_blocks<T: Lane>(src: &[T], dst: &mut [T], g: usize, k_blocks: usize) {
    let l = src.len();
    debug_assert_eq!(dst.len(), l);
    let shift = k_blocks * g;
    for p in 0..l {
        dst[p] = src[(p + shift) % l];
    }
}

/// Rotation of lanes within each 128-bit block independently:
/// within a block, output lane p = input lane (p + j_lanes) mod g.
pub(crate) fn rotate_within_blocks<T: Lane>(src: &[T], dst: &mut [T], g: usize, j_lanes: usize) {
    let l = src.len();
    debug_assert_eq!(dst.len(), l);
    for block in 0..l / g {
        let base = block * g;
        for p in 0..g {
            dst[base + p] = src[base + (p + j_lanes) % g];
        }
    }
}

/// Broadcast-compare kernel: for each lane of `b`, broadcast it, compare for
/// equality against `a`, and OR the resulting masks.
pub(crate) fn naive_first_mask<T: Lane>(a: &[T], b: &[T]) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0u32;
    for j in 0..b.len() {
        let bj = b[j];
        let mut m = 0u32;
        for p in 0..a.len() {
            m |= ((a[p] == bj) as u32) << p;
        }
        acc |= m;
    }
    acc
}

/// Rotate-and-compare kernel, chained not-equal form. For each block rotation
/// `i` of `a`, a chain of masked not-equal comparisons runs across all
/// within-block rotations of `b`; each chain result is un-rotated by `i * g`
/// bits, the G chains are ANDed, and the complement is the first mask.
pub(crate) fn fast_first_mask<T: Lane>(a: &[T], b: &[T], geom: KernelGeometry) -> u32 {
    let l = geom.lane_count();
    let g = geom.lanes_per_block();
    debug_assert_eq!(a.len(), l);
    debug_assert_eq!(b.len(), l);

    let mut brot = [[T::ZERO; MAX_LANES]; 8];
    for j in 0..g {
        rotate_within_blocks(b, &mut brot[j][..l], g, j);
    }

    let mut abuf = [T::ZERO; MAX_LANES];
    let mut acc = ones(l);
    for i in 0..geom.block_count() {
        rotate_blocks(a, &mut abuf[..l], g, i);
        let ai = &abuf[..l];
        let mut chain = neq_mask(ai, &brot[0][..l]);
        for j in 1..g {
            // A masked not-equal comparison: fresh mask ANDed with the chain.
            chain &= neq_mask(ai, &brot[j][..l]);
        }
        acc &= mask_rol(chain, i * g, l);
    }
    !acc & ones(l)
}

/// OR-combining formulation of the rotate-and-compare kernel: per block
/// rotation, OR the equality masks over all `b` rotations, un-rotate, and OR
/// the groups. De Morgan's laws make this equal to [`fast_first_mask`].
pub(crate) fn fast_first_mask_or_combine<T: Lane>(a: &[T], b: &[T], geom: KernelGeometry) -> u32 {
    let l = geom.lane_count();
    let g = geom.lanes_per_block();
    debug_assert_eq!(a.len(), l);
    debug_assert_eq!(b.len(), l);

    let mut brot = [[T::ZERO; MAX_LANES]; 8];
    for j in 0..g {
        rotate_within_blocks(b, &mut brot[j][..l], g, j);
    }

    let mut abuf = [T::ZERO; MAX_LANES];
    let mut acc = 0u32;
    for i in 0..geom.block_count() {
        rotate_blocks(a, &mut abuf[..l], g, i);
        let ai = &abuf[..l];
        let mut group = 0u32;
        for j in 0..g {
            group |= eq_mask(ai, &brot[j][..l]);
        }
        acc |= mask_rol(group, i * g, l);
    }
    acc
}

/// Broadcast kernel for an in-memory second operand: L broadcast not-equal
/// comparisons where comparison t >= 3 chains the mask of comparison t - 3;
/// the first mask is the complement of the AND of the last three masks
/// (of all masks when L < 4).
pub(crate) fn memory_first_mask<T: Lane>(a: &[T], b: &[T]) -> u32 {
    let l = a.len();
    debug_assert_eq!(b.len(), l);
    let mut masks = [0u32; MAX_LANES];
    for t in 0..l {
        let bt = b[t];
        let mut m = 0u32;
        for p in 0..l {
            m |= ((a[p] != bt) as u32) << p;
        }
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    let mut acc = ones(l);
    for t in l.saturating_sub(3)..l {
        acc &= masks[t];
    }
    !acc & ones(l)
}

/// Both output masks for 512-bit vectors of 32-bit lanes (L=16, g=G=4).
/// The first mask comes from OR-and-rotate over the block-rotation groups;
/// the second is reassembled from the per-`b`-rotation OR masks with
/// within-nibble shifts.
pub(crate) fn strict_two_masks_512x32<T: Lane>(a: &[T], b: &[T]) -> (u32, u32) {
    debug_assert_eq!(a.len(), 16);
    debug_assert_eq!(b.len(), 16);
    let g = 4usize;

    let mut brot = [[T::ZERO; 16]; 4];
    for j in 0..g {
        rotate_within_blocks(b, &mut brot[j], g, j);
    }
    let mut e = [[0u32; 4]; 4];
    let mut abuf = [T::ZERO; 16];
    for (i, row) in e.iter_mut().enumerate() {
        rotate_blocks(a, &mut abuf, g, i);
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = eq_mask(&abuf, &brot[j]);
        }
    }

    let row = |i: usize| e[i][0] | e[i][1] | e[i][2] | e[i][3];
    let ka = row(0) | mask_rol(row(1), 4, 16) | mask_rol(row(2), 8, 16) | mask_ror(row(3), 4, 16);

    let col = |j: usize| e[0][j] | e[1][j] | e[2][j] | e[3][j];
    let (m1, m2, m3) = (col(1), col(2), col(3));
    let kb = col(0)
        | ((0x7777 & m1) << 1)
        | ((m1 >> 3) & 0x1111)
        | ((0x3333 & m2) << 2)
        | ((m2 >> 2) & 0x3333)
        | ((m3 >> 1) & 0x7777)
        | ((m3 & 0x1111) << 3);

    (ka & 0xFFFF, kb & 0xFFFF)
}

/// The plain portable kernel used by dispatch when no vector ISA is
/// requested: double loop with early exit per lane of `a`.
pub(crate) fn reference_first_mask<T: Lane>(a: &[T], b: &[T]) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    let mut m = 0u32;
    for (i, av) in a.iter().enumerate() {
        for bv in b {
            if av == bv {
                m |= 1 << i;
                break;
            }
        }
    }
    m
}

/// Number of lanes of `block` with value <= `bound`, computed as the popcount
/// of the <= comparison mask, plus whether that mask is a ones-prefix (always
/// true for sorted blocks).
pub(crate) fn advance_block<T: Lane>(block: &[T], bound: T) -> (u32, bool) {
    let mut m = 0u64;
    for (p, v) in block.iter().enumerate() {
        m |= ((*v <= bound) as u64) << p;
    }
    let count = m.count_ones();
    let prefix_ok = m == (1u64 << count) - 1;
    (count, prefix_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::KernelGeometry;

    fn g512x32() -> KernelGeometry {
        KernelGeometry::new(512, 32).unwrap()
    }

    #[test]
    fn oracle_identity_and_disjoint() {
        let a: Vec<u32> = (0..16).collect();
        assert_eq!(oracle_two_masks(&a, &a), (0xFFFF, 0xFFFF));
        let evens: Vec<u32> = (0..16).map(|i| 2 * i).collect();
        let odds: Vec<u32> = (0..16).map(|i| 2 * i + 1).collect();
        assert_eq!(oracle_two_masks(&evens, &odds), (0, 0));
    }

    #[test]
    fn oracle_with_duplicates_128x32() {
        let a = [5u32, 5, 9, 9];
        let b = [9u32, 1, 2, 5];
        assert_eq!(oracle_two_masks(&a, &b), (0b1111, 0b1001));
    }

    #[test]
    fn rotate_blocks_512x32() {
        let v: Vec<u32> = (0..16).collect();
        let mut out = [0u32; 16];
        rotate_blocks(&v, &mut out, 4, 1);
        let expect: Vec<u32> = (0..16).map(|i| (i + 4) % 16).collect();
        assert_eq!(&out[..], &expect[..]);
    }

    #[test]
    fn rotate_within_blocks_512x32() {
        let v: Vec<u32> = (0..16).collect();
        let mut out = [0u32; 16];
        rotate_within_blocks(&v, &mut out, 4, 1);
        assert_eq!(
            &out[..],
            &[1, 2, 3, 0, 5, 6, 7, 4, 9, 10, 11, 8, 13, 14, 15, 12]
        );
    }

    #[test]
    fn mask_rotations() {
        assert_eq!(mask_rol(0x0001, 4, 16), 0x0010);
        assert_eq!(mask_rol(0x8000, 1, 16), 0x0001);
        assert_eq!(mask_rol(0xdead, 0, 16), 0xdead);
        // rol by 12 is ror by 4 at L=16
        for m in [0x0001u32, 0x8421, 0xffff, 0x1234] {
            assert_eq!(mask_rol(m, 12, 16), mask_ror(m, 4, 16));
        }
    }

    #[test]
    fn fast_matches_oracle_on_dup_case() {
        let geom = g512x32();
        let a: Vec<u32> = vec![7, 7, 3, 1, 9, 2, 2, 4, 0, 5, 6, 8, 1, 1, 3, 3];
        let b: Vec<u32> = vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 0, 0, 0, 7, 7, 2, 1];
        let (ka, _) = oracle_two_masks(&a, &b);
        assert_eq!(fast_first_mask(&a, &b, geom), ka);
        assert_eq!(fast_first_mask_or_combine(&a, &b, geom), ka);
        assert_eq!(naive_first_mask(&a, &b), ka);
        assert_eq!(memory_first_mask(&a, &b), ka);
        assert_eq!(reference_first_mask(&a, &b), ka);
    }

    #[test]
    fn memory_kernel_degenerate_lengths() {
        // L = 2 (128x64): chain depth degenerates to ANDing both masks.
        let a = [10u64, 20];
        let b = [20u64, 30];
        let (ka, _) = oracle_two_masks(&a, &b);
        assert_eq!(memory_first_mask(&a, &b), ka);
        // L = 4
        let a = [1u64, 2, 3, 4];
        let b = [4u64, 4, 1, 9];
        let (ka, _) = oracle_two_masks(&a, &b);
        assert_eq!(memory_first_mask(&a, &b), ka);
    }

    #[test]
    fn strict_identity() {
        let v: Vec<u32> = (0..16).collect();
        assert_eq!(strict_two_masks_512x32(&v, &v), (0xFFFF, 0xFFFF));
    }

    #[test]
    fn strict_single_match_kb_bit7() {
        // a contains only b[7]; Kb must be exactly 0x0080.
        let b: Vec<u32> = (100..116).collect();
        let a: Vec<u32> = vec![b[7]; 16];
        let (ka, kb) = strict_two_masks_512x32(&a, &b);
        assert_eq!(kb, 0x0080);
        assert_eq!(ka, 0xFFFF);
        assert_eq!(oracle_two_masks(&a, &b), (ka, kb));
    }

    #[test]
    fn advance_block_counts() {
        let block: Vec<u32> = (0..16).map(|i| 2 * i).collect(); // 0,2,..,30
        let (da, ok) = advance_block(&block, 20);
        assert_eq!(da, 11);
        assert!(ok);
        let (da, ok) = advance_block(&block, 1000);
        assert_eq!(da, 16);
        assert!(ok);
        let (da, ok) = advance_block(&block, 0);
        assert_eq!(da, 1);
        assert!(ok);
    }
}
