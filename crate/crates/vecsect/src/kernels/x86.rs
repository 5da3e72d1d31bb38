//! AVX-512 kernel backends. Every function here must produce bit-identical
//! masks to its portable counterpart in [`super::scalar`]; the differential
//! suite enforces that on machines exposing the features.
//!
//! Callers guarantee the required target features are present and that each
//! pointer addresses at least L lanes.
//!
//! Shuffle immediates: 0x39 rotates dwords within each 128-bit block by one
//! position toward lower indices, 0x4E by two, 0x93 by three.

#![allow(clippy::missing_safety_doc)]

use core::arch::asm;
use core::arch::x86_64::*;

#[inline(always)]
fn rol4(m: u8, k: u32) -> u8 {
    ((m << k) | (m >> (4 - k))) & 0xF
}

// ---------------------------------------------------------------------------
// 512-bit vectors
// ---------------------------------------------------------------------------

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn fast_512x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let b0 = _mm512_loadu_si512(b as *const _);
    let a1 = _mm512_alignr_epi32(a0, a0, 4);
    let a2 = _mm512_alignr_epi32(a0, a0, 8);
    let a3 = _mm512_alignr_epi32(a0, a0, 12);
    let b1 = _mm512_shuffle_epi32::<0x39>(b0);
    let b2 = _mm512_shuffle_epi32::<0x4E>(b0);
    let b3 = _mm512_shuffle_epi32::<0x93>(b0);

    let nm00 = _mm512_cmpneq_epi32_mask(a0, b0);
    let nm01 = _mm512_cmpneq_epi32_mask(a1, b0);
    let nm02 = _mm512_cmpneq_epi32_mask(a2, b0);
    let nm03 = _mm512_cmpneq_epi32_mask(a3, b0);

    let nm10 = _mm512_mask_cmpneq_epi32_mask(nm00, a0, b1);
    let nm11 = _mm512_mask_cmpneq_epi32_mask(nm01, a1, b1);
    let nm12 = _mm512_mask_cmpneq_epi32_mask(nm02, a2, b1);
    let nm13 = _mm512_mask_cmpneq_epi32_mask(nm03, a3, b1);

    let nm20 = _mm512_mask_cmpneq_epi32_mask(nm10, a0, b2);
    let nm21 = _mm512_mask_cmpneq_epi32_mask(nm11, a1, b2);
    let nm22 = _mm512_mask_cmpneq_epi32_mask(nm12, a2, b2);
    let nm23 = _mm512_mask_cmpneq_epi32_mask(nm13, a3, b2);

    let c0 = _mm512_mask_cmpneq_epi32_mask(nm20, a0, b3);
    let c1 = _mm512_mask_cmpneq_epi32_mask(nm21, a1, b3);
    let c2 = _mm512_mask_cmpneq_epi32_mask(nm22, a2, b3);
    let c3 = _mm512_mask_cmpneq_epi32_mask(nm23, a3, b3);

    !(c0 & c1.rotate_left(4) & c2.rotate_left(8) & c3.rotate_right(4)) as u32
}

#[target_feature(enable = "avx512f,avx512bw")]
pub(crate) unsafe fn fast_512x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let b0 = _mm512_loadu_si512(b as *const _);
    let a1 = _mm512_alignr_epi32(a0, a0, 4);
    let a2 = _mm512_alignr_epi32(a0, a0, 8);
    let a3 = _mm512_alignr_epi32(a0, a0, 12);
    // one 16-bit lane = two bytes; per-block byte rotations
    let b1 = _mm512_alignr_epi8(b0, b0, 2);
    let b2 = _mm512_alignr_epi8(b0, b0, 4);
    let b3 = _mm512_alignr_epi8(b0, b0, 6);
    let b4 = _mm512_alignr_epi8(b0, b0, 8);
    let b5 = _mm512_alignr_epi8(b0, b0, 10);
    let b6 = _mm512_alignr_epi8(b0, b0, 12);
    let b7 = _mm512_alignr_epi8(b0, b0, 14);

    let mut c0 = _mm512_cmpneq_epi16_mask(a0, b0);
    let mut c1 = _mm512_cmpneq_epi16_mask(a1, b0);
    let mut c2 = _mm512_cmpneq_epi16_mask(a2, b0);
    let mut c3 = _mm512_cmpneq_epi16_mask(a3, b0);
    for bj in [b1, b2, b3, b4, b5, b6, b7] {
        c0 = _mm512_mask_cmpneq_epi16_mask(c0, a0, bj);
        c1 = _mm512_mask_cmpneq_epi16_mask(c1, a1, bj);
        c2 = _mm512_mask_cmpneq_epi16_mask(c2, a2, bj);
        c3 = _mm512_mask_cmpneq_epi16_mask(c3, a3, bj);
    }

    !(c0 & c1.rotate_left(8) & c2.rotate_left(16) & c3.rotate_right(8))
}

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn fast_512x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let b0 = _mm512_loadu_si512(b as *const _);
    let a1 = _mm512_alignr_epi32(a0, a0, 4);
    let a2 = _mm512_alignr_epi32(a0, a0, 8);
    let a3 = _mm512_alignr_epi32(a0, a0, 12);
    let b1 = _mm512_shuffle_epi32::<0x4E>(b0);

    let c0 = _mm512_mask_cmpneq_epi64_mask(_mm512_cmpneq_epi64_mask(a0, b0), a0, b1);
    let c1 = _mm512_mask_cmpneq_epi64_mask(_mm512_cmpneq_epi64_mask(a1, b0), a1, b1);
    let c2 = _mm512_mask_cmpneq_epi64_mask(_mm512_cmpneq_epi64_mask(a2, b0), a2, b1);
    let c3 = _mm512_mask_cmpneq_epi64_mask(_mm512_cmpneq_epi64_mask(a3, b0), a3, b1);

    !(c0 & c1.rotate_left(2) & c2.rotate_left(4) & c3.rotate_right(2)) as u32
}

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn naive_512x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let b0 = _mm512_loadu_si512(b as *const _);
    let mut m: __mmask16 = 0;
    for j in 0..16 {
        let bj = _mm512_permutexvar_epi32(_mm512_set1_epi32(j), b0);
        m |= _mm512_cmpeq_epi32_mask(a0, bj);
    }
    m as u32
}

#[target_feature(enable = "avx512f,avx512bw")]
pub(crate) unsafe fn naive_512x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let b0 = _mm512_loadu_si512(b as *const _);
    let mut m: __mmask32 = 0;
    for j in 0..32i16 {
        let bj = _mm512_permutexvar_epi16(_mm512_set1_epi16(j), b0);
        m |= _mm512_cmpeq_epi16_mask(a0, bj);
    }
    m
}

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn naive_512x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let b0 = _mm512_loadu_si512(b as *const _);
    let mut m: __mmask8 = 0;
    for j in 0..8i64 {
        let bj = _mm512_permutexvar_epi64(_mm512_set1_epi64(j), b0);
        m |= _mm512_cmpeq_epi64_mask(a0, bj);
    }
    m as u32
}

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn memory_512x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let mut masks = [0u16; 16];
    for t in 0..16 {
        let bt = _mm512_set1_epi32(*b.add(t) as i32);
        let mut m = _mm512_cmpneq_epi32_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    !(masks[13] & masks[14] & masks[15]) as u32
}

#[target_feature(enable = "avx512f,avx512bw")]
pub(crate) unsafe fn memory_512x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let mut masks = [0u32; 32];
    for t in 0..32 {
        let bt = _mm512_set1_epi16(*b.add(t) as i16);
        let mut m = _mm512_cmpneq_epi16_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    !(masks[29] & masks[30] & masks[31])
}

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn memory_512x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm512_loadu_si512(a as *const _);
    let mut masks = [0u8; 8];
    for t in 0..8 {
        let bt = _mm512_set1_epi64(*b.add(t) as i64);
        let mut m = _mm512_cmpneq_epi64_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    !(masks[5] & masks[6] & masks[7]) as u32
}

/// Both output masks via sixteen equality comparisons; the second mask is
/// reassembled with within-nibble shifts.
#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn strict_512x32(a: *const u32, b: *const u32) -> (u16, u16) {
    let a0 = _mm512_loadu_si512(a as *const _);
    let b0 = _mm512_loadu_si512(b as *const _);
    let a1 = _mm512_alignr_epi32(a0, a0, 4);
    let a2 = _mm512_alignr_epi32(a0, a0, 8);
    let a3 = _mm512_alignr_epi32(a0, a0, 12);
    let b1 = _mm512_shuffle_epi32::<0x39>(b0);
    let b2 = _mm512_shuffle_epi32::<0x4E>(b0);
    let b3 = _mm512_shuffle_epi32::<0x93>(b0);

    let m00 = _mm512_cmpeq_epi32_mask(a0, b0);
    let m01 = _mm512_cmpeq_epi32_mask(a0, b1);
    let m02 = _mm512_cmpeq_epi32_mask(a0, b2);
    let m03 = _mm512_cmpeq_epi32_mask(a0, b3);
    let m10 = _mm512_cmpeq_epi32_mask(a1, b0);
    let m11 = _mm512_cmpeq_epi32_mask(a1, b1);
    let m12 = _mm512_cmpeq_epi32_mask(a1, b2);
    let m13 = _mm512_cmpeq_epi32_mask(a1, b3);
    let m20 = _mm512_cmpeq_epi32_mask(a2, b0);
    let m21 = _mm512_cmpeq_epi32_mask(a2, b1);
    let m22 = _mm512_cmpeq_epi32_mask(a2, b2);
    let m23 = _mm512_cmpeq_epi32_mask(a2, b3);
    let m30 = _mm512_cmpeq_epi32_mask(a3, b0);
    let m31 = _mm512_cmpeq_epi32_mask(a3, b1);
    let m32 = _mm512_cmpeq_epi32_mask(a3, b2);
    let m33 = _mm512_cmpeq_epi32_mask(a3, b3);

    let ka = (m00 | m01 | m02 | m03)
        | (m10 | m11 | m12 | m13).rotate_left(4)
        | (m20 | m21 | m22 | m23).rotate_left(8)
        | (m30 | m31 | m32 | m33).rotate_right(4);

    let m_1 = m01 | m11 | m21 | m31;
    let m_2 = m02 | m12 | m22 | m32;
    let m_3 = m03 | m13 | m23 | m33;
    let kb = (m00 | m10 | m20 | m30)
        | ((0x7777 & m_1) << 1)
        | ((m_1 >> 3) & 0x1111)
        | ((0x3333 & m_2) << 2)
        | ((m_2 >> 2) & 0x3333)
        | ((m_3 >> 1) & 0x7777)
        | ((m_3 & 0x1111) << 3);

    (ka, kb)
}

#[target_feature(enable = "avx512f,avx512vp2intersect")]
pub(crate) unsafe fn native_512x32(a: *const u32, b: *const u32) -> (u16, u16) {
    let va = _mm512_loadu_si512(a as *const _);
    let vb = _mm512_loadu_si512(b as *const _);
    let ka: u16;
    let kb: u16;
    asm!(
        "vp2intersectd k2, {0}, {1}",
        in(zmm_reg) va,
        in(zmm_reg) vb,
        out("k2") ka,
        out("k3") kb,
        options(pure, nomem, nostack),
    );
    (ka, kb)
}

#[target_feature(enable = "avx512f,avx512vp2intersect")]
pub(crate) unsafe fn native_512x64(a: *const u64, b: *const u64) -> (u8, u8) {
    let va = _mm512_loadu_si512(a as *const _);
    let vb = _mm512_loadu_si512(b as *const _);
    let ka: u8;
    let kb: u8;
    asm!(
        "vp2intersectq k2, {0}, {1}",
        in(zmm_reg) va,
        in(zmm_reg) vb,
        out("k2") ka,
        out("k3") kb,
        options(pure, nomem, nostack),
    );
    (ka, kb)
}

#[target_feature(enable = "avx512f,avx512bw")]
pub(crate) unsafe fn advance_512x16(a: *const u16, b: *const u16) -> (u32, u32) {
    let va = _mm512_loadu_si512(a as *const _);
    let vb = _mm512_loadu_si512(b as *const _);
    let a_last = _mm512_set1_epi16(*a.add(31) as i16);
    let b_last = _mm512_set1_epi16(*b.add(31) as i16);
    let da = _mm512_cmple_epu16_mask(va, b_last).count_ones();
    let db = _mm512_cmple_epu16_mask(vb, a_last).count_ones();
    (da, db)
}

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn advance_512x32(a: *const u32, b: *const u32) -> (u32, u32) {
    let va = _mm512_loadu_si512(a as *const _);
    let vb = _mm512_loadu_si512(b as *const _);
    let a_last = _mm512_set1_epi32(*a.add(15) as i32);
    let b_last = _mm512_set1_epi32(*b.add(15) as i32);
    let da = _mm512_cmple_epu32_mask(va, b_last).count_ones();
    let db = _mm512_cmple_epu32_mask(vb, a_last).count_ones();
    (da, db)
}

#[target_feature(enable = "avx512f")]
pub(crate) unsafe fn advance_512x64(a: *const u64, b: *const u64) -> (u32, u32) {
    let va = _mm512_loadu_si512(a as *const _);
    let vb = _mm512_loadu_si512(b as *const _);
    let a_last = _mm512_set1_epi64(*a.add(7) as i64);
    let b_last = _mm512_set1_epi64(*b.add(7) as i64);
    let da = _mm512_cmple_epu64_mask(va, b_last).count_ones();
    let db = _mm512_cmple_epu64_mask(vb, a_last).count_ones();
    (da, db)
}

// ---------------------------------------------------------------------------
// 256-bit vectors (AVX512VL)
// ---------------------------------------------------------------------------

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn fast_256x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let b0 = _mm256_loadu_si256(b as *const _);
    let a1 = _mm256_alignr_epi32(a0, a0, 4);
    let b1 = _mm256_shuffle_epi32::<0x39>(b0);
    let b2 = _mm256_shuffle_epi32::<0x4E>(b0);
    let b3 = _mm256_shuffle_epi32::<0x93>(b0);

    let nm00 = _mm256_cmpneq_epi32_mask(a0, b0);
    let nm01 = _mm256_cmpneq_epi32_mask(a1, b0);
    let nm10 = _mm256_mask_cmpneq_epi32_mask(nm00, a0, b1);
    let nm11 = _mm256_mask_cmpneq_epi32_mask(nm01, a1, b1);
    let nm20 = _mm256_mask_cmpneq_epi32_mask(nm10, a0, b2);
    let nm21 = _mm256_mask_cmpneq_epi32_mask(nm11, a1, b2);
    let c0 = _mm256_mask_cmpneq_epi32_mask(nm20, a0, b3);
    let c1 = _mm256_mask_cmpneq_epi32_mask(nm21, a1, b3);

    !(c0 & c1.rotate_left(4)) as u32
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn fast_256x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let b0 = _mm256_loadu_si256(b as *const _);
    let a1 = _mm256_alignr_epi32(a0, a0, 4);
    let b1 = _mm256_alignr_epi8(b0, b0, 2);
    let b2 = _mm256_alignr_epi8(b0, b0, 4);
    let b3 = _mm256_alignr_epi8(b0, b0, 6);
    let b4 = _mm256_alignr_epi8(b0, b0, 8);
    let b5 = _mm256_alignr_epi8(b0, b0, 10);
    let b6 = _mm256_alignr_epi8(b0, b0, 12);
    let b7 = _mm256_alignr_epi8(b0, b0, 14);

    let mut c0 = _mm256_cmpneq_epi16_mask(a0, b0);
    let mut c1 = _mm256_cmpneq_epi16_mask(a1, b0);
    for bj in [b1, b2, b3, b4, b5, b6, b7] {
        c0 = _mm256_mask_cmpneq_epi16_mask(c0, a0, bj);
        c1 = _mm256_mask_cmpneq_epi16_mask(c1, a1, bj);
    }

    !(c0 & c1.rotate_left(8)) as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn fast_256x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let b0 = _mm256_loadu_si256(b as *const _);
    let a1 = _mm256_alignr_epi32(a0, a0, 4);
    let b1 = _mm256_shuffle_epi32::<0x4E>(b0);

    let c0 = _mm256_mask_cmpneq_epi64_mask(_mm256_cmpneq_epi64_mask(a0, b0), a0, b1);
    let c1 = _mm256_mask_cmpneq_epi64_mask(_mm256_cmpneq_epi64_mask(a1, b0), a1, b1);

    (0xF ^ (c0 & rol4(c1, 2))) as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn naive_256x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let b0 = _mm256_loadu_si256(b as *const _);
    let mut m: __mmask8 = 0;
    for j in 0..8 {
        let bj = _mm256_permutexvar_epi32(_mm256_set1_epi32(j), b0);
        m |= _mm256_cmpeq_epi32_mask(a0, bj);
    }
    m as u32
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn naive_256x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let b0 = _mm256_loadu_si256(b as *const _);
    let mut m: __mmask16 = 0;
    for j in 0..16i16 {
        let bj = _mm256_permutexvar_epi16(_mm256_set1_epi16(j), b0);
        m |= _mm256_cmpeq_epi16_mask(a0, bj);
    }
    m as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn naive_256x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let b0 = _mm256_loadu_si256(b as *const _);
    let mut m: __mmask8 = 0;
    for j in 0..4i64 {
        let bj = _mm256_permutexvar_epi64(_mm256_set1_epi64x(j), b0);
        m |= _mm256_cmpeq_epi64_mask(a0, bj);
    }
    m as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn memory_256x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let mut masks = [0u8; 8];
    for t in 0..8 {
        let bt = _mm256_set1_epi32(*b.add(t) as i32);
        let mut m = _mm256_cmpneq_epi32_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    !(masks[5] & masks[6] & masks[7]) as u32
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn memory_256x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let mut masks = [0u16; 16];
    for t in 0..16 {
        let bt = _mm256_set1_epi16(*b.add(t) as i16);
        let mut m = _mm256_cmpneq_epi16_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    !(masks[13] & masks[14] & masks[15]) as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn memory_256x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm256_loadu_si256(a as *const _);
    let mut masks = [0u8; 4];
    for t in 0..4 {
        let bt = _mm256_set1_epi64x(*b.add(t) as i64);
        let mut m = _mm256_cmpneq_epi64_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    (!(masks[1] & masks[2] & masks[3]) & 0xF) as u32
}

#[target_feature(enable = "avx512f,avx512vl,avx512vp2intersect")]
pub(crate) unsafe fn native_256x32(a: *const u32, b: *const u32) -> (u8, u8) {
    let va = _mm256_loadu_si256(a as *const _);
    let vb = _mm256_loadu_si256(b as *const _);
    let ka: u8;
    let kb: u8;
    asm!(
        "vp2intersectd k2, {0}, {1}",
        in(ymm_reg) va,
        in(ymm_reg) vb,
        out("k2") ka,
        out("k3") kb,
        options(pure, nomem, nostack),
    );
    (ka, kb)
}

#[target_feature(enable = "avx512f,avx512vl,avx512vp2intersect")]
pub(crate) unsafe fn native_256x64(a: *const u64, b: *const u64) -> (u8, u8) {
    let va = _mm256_loadu_si256(a as *const _);
    let vb = _mm256_loadu_si256(b as *const _);
    let ka: u8;
    let kb: u8;
    asm!(
        "vp2intersectq k2, {0}, {1}",
        in(ymm_reg) va,
        in(ymm_reg) vb,
        out("k2") ka,
        out("k3") kb,
        options(pure, nomem, nostack),
    );
    (ka & 0xF, kb & 0xF)
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn advance_256x16(a: *const u16, b: *const u16) -> (u32, u32) {
    let va = _mm256_loadu_si256(a as *const _);
    let vb = _mm256_loadu_si256(b as *const _);
    let a_last = _mm256_set1_epi16(*a.add(15) as i16);
    let b_last = _mm256_set1_epi16(*b.add(15) as i16);
    let da = _mm256_cmple_epu16_mask(va, b_last).count_ones();
    let db = _mm256_cmple_epu16_mask(vb, a_last).count_ones();
    (da, db)
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn advance_256x32(a: *const u32, b: *const u32) -> (u32, u32) {
    let va = _mm256_loadu_si256(a as *const _);
    let vb = _mm256_loadu_si256(b as *const _);
    let a_last = _mm256_set1_epi32(*a.add(7) as i32);
    let b_last = _mm256_set1_epi32(*b.add(7) as i32);
    let da = _mm256_cmple_epu32_mask(va, b_last).count_ones();
    let db = _mm256_cmple_epu32_mask(vb, a_last).count_ones();
    (da, db)
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn advance_256x64(a: *const u64, b: *const u64) -> (u32, u32) {
    let va = _mm256_loadu_si256(a as *const _);
    let vb = _mm256_loadu_si256(b as *const _);
    let a_last = _mm256_set1_epi64x(*a.add(3) as i64);
    let b_last = _mm256_set1_epi64x(*b.add(3) as i64);
    let da = _mm256_cmple_epu64_mask(va, b_last).count_ones();
    let db = _mm256_cmple_epu64_mask(vb, a_last).count_ones();
    (da, db)
}

// ---------------------------------------------------------------------------
// 128-bit vectors (AVX512VL)
// ---------------------------------------------------------------------------

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn fast_128x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let b0 = _mm_loadu_si128(b as *const _);
    let b1 = _mm_shuffle_epi32::<0x39>(b0);
    let b2 = _mm_shuffle_epi32::<0x4E>(b0);
    let b3 = _mm_shuffle_epi32::<0x93>(b0);

    let nm0 = _mm_cmpneq_epi32_mask(a0, b0);
    let nm1 = _mm_mask_cmpneq_epi32_mask(nm0, a0, b1);
    let nm2 = _mm_mask_cmpneq_epi32_mask(nm1, a0, b2);
    let c = _mm_mask_cmpneq_epi32_mask(nm2, a0, b3);

    (0xF ^ c) as u32
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn fast_128x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let b0 = _mm_loadu_si128(b as *const _);

    let mut c = _mm_cmpneq_epi16_mask(a0, b0);
    c = _mm_mask_cmpneq_epi16_mask(c, a0, _mm_alignr_epi8(b0, b0, 2));
    c = _mm_mask_cmpneq_epi16_mask(c, a0, _mm_alignr_epi8(b0, b0, 4));
    c = _mm_mask_cmpneq_epi16_mask(c, a0, _mm_alignr_epi8(b0, b0, 6));
    c = _mm_mask_cmpneq_epi16_mask(c, a0, _mm_alignr_epi8(b0, b0, 8));
    c = _mm_mask_cmpneq_epi16_mask(c, a0, _mm_alignr_epi8(b0, b0, 10));
    c = _mm_mask_cmpneq_epi16_mask(c, a0, _mm_alignr_epi8(b0, b0, 12));
    c = _mm_mask_cmpneq_epi16_mask(c, a0, _mm_alignr_epi8(b0, b0, 14));

    !c as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn fast_128x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let b0 = _mm_loadu_si128(b as *const _);
    let b1 = _mm_shuffle_epi32::<0x4E>(b0);

    let nm0 = _mm_cmpneq_epi64_mask(a0, b0);
    let c = _mm_mask_cmpneq_epi64_mask(nm0, a0, b1);

    (0x3 ^ (c & 0x3)) as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn naive_128x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let b0 = _mm_loadu_si128(b as *const _);
    let m = _mm_cmpeq_epi32_mask(a0, _mm_shuffle_epi32::<0x00>(b0))
        | _mm_cmpeq_epi32_mask(a0, _mm_shuffle_epi32::<0x55>(b0))
        | _mm_cmpeq_epi32_mask(a0, _mm_shuffle_epi32::<0xAA>(b0))
        | _mm_cmpeq_epi32_mask(a0, _mm_shuffle_epi32::<0xFF>(b0));
    m as u32
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn naive_128x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let b0 = _mm_loadu_si128(b as *const _);
    let mut m: __mmask8 = 0;
    for j in 0..8i16 {
        let bj = _mm_permutexvar_epi16(_mm_set1_epi16(j), b0);
        m |= _mm_cmpeq_epi16_mask(a0, bj);
    }
    m as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn naive_128x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let b0 = _mm_loadu_si128(b as *const _);
    let m = _mm_cmpeq_epi64_mask(a0, _mm_shuffle_epi32::<0x44>(b0))
        | _mm_cmpeq_epi64_mask(a0, _mm_shuffle_epi32::<0xEE>(b0));
    (m & 0x3) as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn memory_128x32(a: *const u32, b: *const u32) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let mut masks = [0u8; 4];
    for t in 0..4 {
        let bt = _mm_set1_epi32(*b.add(t) as i32);
        let mut m = _mm_cmpneq_epi32_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    (!(masks[1] & masks[2] & masks[3]) & 0xF) as u32
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn memory_128x16(a: *const u16, b: *const u16) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let mut masks = [0u8; 8];
    for t in 0..8 {
        let bt = _mm_set1_epi16(*b.add(t) as i16);
        let mut m = _mm_cmpneq_epi16_mask(a0, bt);
        if t >= 3 {
            m &= masks[t - 3];
        }
        masks[t] = m;
    }
    !(masks[5] & masks[6] & masks[7]) as u32
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn memory_128x64(a: *const u64, b: *const u64) -> u32 {
    let a0 = _mm_loadu_si128(a as *const _);
    let m0 = _mm_cmpneq_epi64_mask(a0, _mm_set1_epi64x(*b as i64));
    let m1 = _mm_cmpneq_epi64_mask(a0, _mm_set1_epi64x(*b.add(1) as i64));
    (!(m0 & m1) & 0x3) as u32
}

#[target_feature(enable = "avx512f,avx512vl,avx512vp2intersect")]
pub(crate) unsafe fn native_128x32(a: *const u32, b: *const u32) -> (u8, u8) {
    let va = _mm_loadu_si128(a as *const _);
    let vb = _mm_loadu_si128(b as *const _);
    let ka: u8;
    let kb: u8;
    asm!(
        "vp2intersectd k2, {0}, {1}",
        in(xmm_reg) va,
        in(xmm_reg) vb,
        out("k2") ka,
        out("k3") kb,
        options(pure, nomem, nostack),
    );
    (ka & 0xF, kb & 0xF)
}

#[target_feature(enable = "avx512f,avx512vl,avx512vp2intersect")]
pub(crate) unsafe fn native_128x64(a: *const u64, b: *const u64) -> (u8, u8) {
    let va = _mm_loadu_si128(a as *const _);
    let vb = _mm_loadu_si128(b as *const _);
    let ka: u8;
    let kb: u8;
    asm!(
        "vp2intersectq k2, {0}, {1}",
        in(xmm_reg) va,
        in(xmm_reg) vb,
        out("k2") ka,
        out("k3") kb,
        options(pure, nomem, nostack),
    );
    (ka & 0x3, kb & 0x3)
}

#[target_feature(enable = "avx512f,avx512bw,avx512vl")]
pub(crate) unsafe fn advance_128x16(a: *const u16, b: *const u16) -> (u32, u32) {
    let va = _mm_loadu_si128(a as *const _);
    let vb = _mm_loadu_si128(b as *const _);
    let a_last = _mm_set1_epi16(*a.add(7) as i16);
    let b_last = _mm_set1_epi16(*b.add(7) as i16);
    let da = _mm_cmple_epu16_mask(va, b_last).count_ones();
    let db = _mm_cmple_epu16_mask(vb, a_last).count_ones();
    (da, db)
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn advance_128x32(a: *const u32, b: *const u32) -> (u32, u32) {
    let va = _mm_loadu_si128(a as *const _);
    let vb = _mm_loadu_si128(b as *const _);
    let a_last = _mm_set1_epi32(*a.add(3) as i32);
    let b_last = _mm_set1_epi32(*b.add(3) as i32);
    let da = _mm_cmple_epu32_mask(va, b_last).count_ones();
    let db = _mm_cmple_epu32_mask(vb, a_last).count_ones();
    (da, db)
}

#[target_feature(enable = "avx512f,avx512vl")]
pub(crate) unsafe fn advance_128x64(a: *const u64, b: *const u64) -> (u32, u32) {
    let va = _mm_loadu_si128(a as *const _);
    let vb = _mm_loadu_si128(b as *const _);
    let a_last = _mm_set1_epi64x(*a.add(1) as i64);
    let b_last = _mm_set1_epi64x(*b.add(1) as i64);
    let da = _mm_cmple_epu64_mask(va, b_last).count_ones();
    let db = _mm_cmple_epu64_mask(vb, a_last).count_ones();
    (da, db)
}

// ---------------------------------------------------------------------------
// first-mask entry points for kernels whose primary form returns both masks
// ---------------------------------------------------------------------------

pub(crate) unsafe fn strict_512x32_first(a: *const u32, b: *const u32) -> u32 {
    strict_512x32(a, b).0 as u32
}

pub(crate) unsafe fn native_512x32_first(a: *const u32, b: *const u32) -> u32 {
    native_512x32(a, b).0 as u32
}

pub(crate) unsafe fn native_512x64_first(a: *const u64, b: *const u64) -> u32 {
    native_512x64(a, b).0 as u32
}

pub(crate) unsafe fn native_256x32_first(a: *const u32, b: *const u32) -> u32 {
    native_256x32(a, b).0 as u32
}

pub(crate) unsafe fn native_256x64_first(a: *const u64, b: *const u64) -> u32 {
    native_256x64(a, b).0 as u32
}

pub(crate) unsafe fn native_128x32_first(a: *const u32, b: *const u32) -> u32 {
    native_128x32(a, b).0 as u32
}

pub(crate) unsafe fn native_128x64_first(a: *const u64, b: *const u64) -> u32 {
    native_128x64(a, b).0 as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::KernelGeometry;
    use crate::kernels::scalar;

    fn have(features: &[&str]) -> bool {
        features.iter().all(|f| match *f {
            "avx512f" => std::arch::is_x86_feature_detected!("avx512f"),
            "avx512bw" => std::arch::is_x86_feature_detected!("avx512bw"),
            "avx512vl" => std::arch::is_x86_feature_detected!("avx512vl"),
            _ => false,
        })
    }

    fn xorshift(state: &mut u64) -> u64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        *state
    }

    macro_rules! check_kernel {
        ($name:ident, $ty:ty, $l:expr, $geom:expr, $features:expr, $vec:expr, $scalar:expr) => {
            #[test]
            fn $name() {
                if !have($features) {
                    eprintln!("skipping: missing target features");
                    return;
                }
                let geom = KernelGeometry::new($geom.0, $geom.1).unwrap();
                let mut state = 0x5eed_5eed_5eedu64;
                for round in 0..5000u64 {
                    // alternate a tiny alphabet (collisions) with full-width values
                    let mut a = [0 as $ty; $l];
                    let mut b = [0 as $ty; $l];
                    for p in 0..$l {
                        let (ra, rb) = (xorshift(&mut state), xorshift(&mut state));
                        if round % 2 == 0 {
                            a[p] = (ra % 8) as $ty;
                            b[p] = (rb % 8) as $ty;
                        } else {
                            a[p] = ra as $ty;
                            b[p] = rb as $ty;
                        }
                    }
                    let expect = $scalar(&a, &b, geom);
                    let got = unsafe { $vec(a.as_ptr(), b.as_ptr()) };
                    assert_eq!(
                        got, expect,
                        "round {round}: a={a:?} b={b:?} got {got:#x} expect {expect:#x}"
                    );
                }
            }
        };
    }

    fn sc_fast<T: crate::geometry::Lane>(a: &[T], b: &[T], g: KernelGeometry) -> u32 {
        scalar::fast_first_mask(a, b, g)
    }
    fn sc_naive<T: crate::geometry::Lane>(a: &[T], b: &[T], _g: KernelGeometry) -> u32 {
        scalar::naive_first_mask(a, b)
    }
    fn sc_memory<T: crate::geometry::Lane>(a: &[T], b: &[T], _g: KernelGeometry) -> u32 {
        scalar::memory_first_mask(a, b)
    }

    check_kernel!(
        fast_512x32_matches,
        u32,
        16,
        (512, 32),
        &["avx512f"],
        fast_512x32,
        sc_fast
    );
    check_kernel!(
        fast_512x16_matches,
        u16,
        32,
        (512, 16),
        &["avx512f", "avx512bw"],
        fast_512x16,
        sc_fast
    );
    check_kernel!(
        fast_512x64_matches,
        u64,
        8,
        (512, 64),
        &["avx512f"],
        fast_512x64,
        sc_fast
    );
    check_kernel!(
        fast_256x32_matches,
        u32,
        8,
        (256, 32),
        &["avx512f", "avx512vl"],
        fast_256x32,
        sc_fast
    );
    check_kernel!(
        fast_256x16_matches,
        u16,
        16,
        (256, 16),
        &["avx512f", "avx512bw", "avx512vl"],
        fast_256x16,
        sc_fast
    );
    check_kernel!(
        fast_256x64_matches,
        u64,
        4,
        (256, 64),
        &["avx512f", "avx512vl"],
        fast_256x64,
        sc_fast
    );
    check_kernel!(
        fast_128x32_matches,
        u32,
        4,
        (128, 32),
        &["avx512f", "avx512vl"],
        fast_128x32,
        sc_fast
    );
    check_kernel!(
        fast_128x16_matches,
        u16,
        8,
        (128, 16),
        &["avx512f", "avx512bw", "avx512vl"],
        fast_128x16,
        sc_fast
    );
    check_kernel!(
        fast_128x64_matches,
        u64,
        2,
        (128, 64),
        &["avx512f", "avx512vl"],
        fast_128x64,
        sc_fast
    );

    check_kernel!(
        naive_512x32_matches,
        u32,
        16,
        (512, 32),
        &["avx512f"],
        naive_512x32,
        sc_naive
    );
    check_kernel!(
        naive_512x16_matches,
        u16,
        32,
        (512, 16),
        &["avx512f", "avx512bw"],
        naive_512x16,
        sc_naive
    );
    check_kernel!(
        naive_512x64_matches,
        u64,
        8,
        (512, 64),
        &["avx512f"],
        naive_512x64,
        sc_naive
    );
    check_kernel!(
        naive_256x32_matches,
        u32,
        8,
        (256, 32),
        &["avx512f", "avx512vl"],
        naive_256x32,
        sc_naive
    );
    check_kernel!(
        naive_256x16_matches,
        u16,
        16,
        (256, 16),
        &["avx512f", "avx512bw", "avx512vl"],
        naive_256x16,
        sc_naive
    );
    check_kernel!(
        naive_256x64_matches,
        u64,
        4,
        (256, 64),
        &["avx512f", "avx512vl"],
        naive_256x64,
        sc_naive
    );
    check_kernel!(
        naive_128x32_matches,
        u32,
        4,
        (128, 32),
        &["avx512f", "avx512vl"],
        naive_128x32,
        sc_naive
    );
    check_kernel!(
        naive_128x16_matches,
        u16,
        8,
        (128, 16),
        &["avx512f", "avx512bw", "avx512vl"],
        naive_128x16,
        sc_naive
    );
    check_kernel!(
        naive_128x64_matches,
        u64,
        2,
        (128, 64),
        &["avx512f", "avx512vl"],
        naive_128x64,
        sc_naive
    );

    check_kernel!(
        memory_512x32_matches,
        u32,
        16,
        (512, 32),
        &["avx512f"],
        memory_512x32,
        sc_memory
    );
    check_kernel!(
        memory_512x16_matches,
        u16,
        32,
        (512, 16),
        &["avx512f", "avx512bw"],
        memory_512x16,
        sc_memory
    );
    check_kernel!(
        memory_512x64_matches,
        u64,
        8,
        (512, 64),
        &["avx512f"],
        memory_512x64,
        sc_memory
    );
    check_kernel!(
        memory_256x32_matches,
        u32,
        8,
        (256, 32),
        &["avx512f", "avx512vl"],
        memory_256x32,
        sc_memory
    );
    check_kernel!(
        memory_256x16_matches,
        u16,
        16,
        (256, 16),
        &["avx512f", "avx512bw", "avx512vl"],
        memory_256x16,
        sc_memory
    );
    check_kernel!(
        memory_256x64_matches,
        u64,
        4,
        (256, 64),
        &["avx512f", "avx512vl"],
        memory_256x64,
        sc_memory
    );
    check_kernel!(
        memory_128x32_matches,
        u32,
        4,
        (128, 32),
        &["avx512f", "avx512vl"],
        memory_128x32,
        sc_memory
    );
    check_kernel!(
        memory_128x16_matches,
        u16,
        8,
        (128, 16),
        &["avx512f", "avx512bw", "avx512vl"],
        memory_128x16,
        sc_memory
    );
    check_kernel!(
        memory_128x64_matches,
        u64,
        2,
        (128, 64),
        &["avx512f", "avx512vl"],
        memory_128x64,
        sc_memory
    );

    #[test]
    fn strict_512x32_matches() {
        if !have(&["avx512f"]) {
            eprintln!("skipping: missing target features");
            return;
        }
        let mut state = 0xabcdefu64;
        for _ in 0..5000 {
            let mut a = [0u32; 16];
            let mut b = [0u32; 16];
            for p in 0..16 {
                a[p] = (xorshift(&mut state) % 8) as u32;
                b[p] = (xorshift(&mut state) % 8) as u32;
            }
            let expect = scalar::strict_two_masks_512x32(&a, &b);
            let got = unsafe { strict_512x32(a.as_ptr(), b.as_ptr()) };
            assert_eq!((got.0 as u32, got.1 as u32), expect, "a={a:?} b={b:?}");
        }
    }

    #[test]
    fn native_pairs_match_oracle() {
        if !std::arch::is_x86_feature_detected!("avx512vp2intersect") {
            eprintln!("skipping: no native two-way intersection");
            return;
        }
        let vl = std::arch::is_x86_feature_detected!("avx512vl");
        let mut state = 0x714eu64;
        for _ in 0..5000 {
            let mut a = [0u64; 16];
            let mut b = [0u64; 16];
            for p in 0..16 {
                a[p] = xorshift(&mut state) % 8;
                b[p] = xorshift(&mut state) % 8;
            }
            let a32: Vec<u32> = a.iter().map(|&x| x as u32).collect();
            let b32: Vec<u32> = b.iter().map(|&x| x as u32).collect();

            let expect = scalar::oracle_two_masks(&a32, &b32);
            let got = unsafe { native_512x32(a32.as_ptr(), b32.as_ptr()) };
            assert_eq!((got.0 as u32, got.1 as u32), expect);

            let expect = scalar::oracle_two_masks(&a, &b);
            let got = unsafe { native_512x64(a.as_ptr(), b.as_ptr()) };
            assert_eq!((got.0 as u32 & 0xFF, got.1 as u32 & 0xFF), expect);

            if vl {
                let expect = scalar::oracle_two_masks(&a32[..8], &b32[..8]);
                let got = unsafe { native_256x32(a32.as_ptr(), b32.as_ptr()) };
                assert_eq!((got.0 as u32, got.1 as u32), expect);

                let expect = scalar::oracle_two_masks(&a[..4], &b[..4]);
                let got = unsafe { native_256x64(a.as_ptr(), b.as_ptr()) };
                assert_eq!((got.0 as u32, got.1 as u32), expect);

                let expect = scalar::oracle_two_masks(&a32[..4], &b32[..4]);
                let got = unsafe { native_128x32(a32.as_ptr(), b32.as_ptr()) };
                assert_eq!((got.0 as u32, got.1 as u32), expect);

                let expect = scalar::oracle_two_masks(&a[..2], &b[..2]);
                let got = unsafe { native_128x64(a.as_ptr(), b.as_ptr()) };
                assert_eq!((got.0 as u32, got.1 as u32), expect);
            }
        }
    }

    #[test]
    fn advance_matches_scalar() {
        if !have(&["avx512f", "avx512bw", "avx512vl"]) {
            eprintln!("skipping: missing target features");
            return;
        }
        let mut state = 7u64;
        for _ in 0..2000 {
            let mut a = [0u32; 16];
            let mut b = [0u32; 16];
            for p in 0..16 {
                a[p] = (xorshift(&mut state) % 64) as u32;
                b[p] = (xorshift(&mut state) % 64) as u32;
            }
            a.sort_unstable();
            b.sort_unstable();
            let (da, _) = scalar::advance_block(&a, b[15]);
            let (db, _) = scalar::advance_block(&b, a[15]);
            assert_eq!(unsafe { advance_512x32(a.as_ptr(), b.as_ptr()) }, (da, db));
            let (da, _) = scalar::advance_block(&a[..8], b[7]);
            let (db, _) = scalar::advance_block(&b[..8], a[7]);
            assert_eq!(unsafe { advance_256x32(a.as_ptr(), b.as_ptr()) }, (da, db));
            let (da, _) = scalar::advance_block(&a[..4], b[3]);
            let (db, _) = scalar::advance_block(&b[..4], a[3]);
            assert_eq!(unsafe { advance_128x32(a.as_ptr(), b.as_ptr()) }, (da, db));
        }
    }
}
