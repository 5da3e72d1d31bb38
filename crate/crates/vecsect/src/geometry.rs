//! Kernel geometries: (vector width, lane width) pairs and the lane/block
//! counts derived from them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest lane count over all geometries (512-bit vectors of 16-bit lanes).
pub const MAX_LANES: usize = 32;

/// A (vector width, lane width) pair. Nine combinations are valid:
/// {128, 256, 512} x {16, 32, 64}.
///
/// Derived quantities: `lane_count` L = vector_bits / lane_bits,
/// `lanes_per_block` g = 128 / lane_bits, `block_count` G = vector_bits / 128,
/// with L = G * g.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KernelGeometry {
    vector_bits: u16,
    lane_bits: u16,
}

impl KernelGeometry {
    pub fn new(vector_bits: u16, lane_bits: u16) -> Result<Self> {
        match (vector_bits, lane_bits) {
            (128 | 256 | 512, 16 | 32 | 64) => Ok(Self {
                vector_bits,
                lane_bits,
            }),
            _ => Err(Error::InvalidGeometry {
                vector_bits,
                lane_bits,
            }),
        }
    }

    /// All nine geometries in report order: vector width descending,
    /// lane width ascending.
    pub fn all() -> [KernelGeometry; 9] {
        let mut out = [KernelGeometry {
            vector_bits: 512,
            lane_bits: 16,
        }; 9];
        let mut idx = 0;
        for vector_bits in [512u16, 256, 128] {
            for lane_bits in [16u16, 32, 64] {
                out[idx] = KernelGeometry {
                    vector_bits,
                    lane_bits,
                };
                idx += 1;
            }
        }
        out
    }

    pub fn vector_bits(&self) -> u16 {
        self.vector_bits
    }

    pub fn lane_bits(&self) -> u16 {
        self.lane_bits
    }

    /// L: lanes per vector.
    pub fn lane_count(&self) -> usize {
        (self.vector_bits / self.lane_bits) as usize
    }

    /// g: lanes per 128-bit block.
    pub fn lanes_per_block(&self) -> usize {
        (128 / self.lane_bits) as usize
    }

    /// G: 128-bit blocks per vector.
    pub fn block_count(&self) -> usize {
        (self.vector_bits / 128) as usize
    }

    /// All-ones mask over the L lane bits.
    pub fn mask_bits(&self) -> u32 {
        (((1u64) << self.lane_count()) - 1) as u32
    }

    /// Largest value representable in one lane.
    pub fn lane_value_max(&self) -> u64 {
        match self.lane_bits {
            64 => u64::MAX,
            bits => (1u64 << bits) - 1,
        }
    }
}

impl fmt::Display for KernelGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.vector_bits, self.lane_bits)
    }
}

impl fmt::Debug for KernelGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelGeometry({self})")
    }
}

impl FromStr for KernelGeometry {
    type Err = Error;

    /// Parses `"<vector_bits>x<lane_bits>"`, e.g. `"512x32"`.
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidGeometry {
            vector_bits: 0,
            lane_bits: 0,
        };
        let (v, l) = s.split_once(['x', 'X']).ok_or_else(invalid)?;
        let vector_bits = v.trim().parse::<u16>().map_err(|_| invalid())?;
        let lane_bits = l.trim().parse::<u16>().map_err(|_| invalid())?;
        KernelGeometry::new(vector_bits, lane_bits)
    }
}

/// An unsigned integer type usable as a vector lane.
pub trait Lane:
    Copy + Ord + Eq + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    const BITS: u16;
    const ZERO: Self;
    const MAX: Self;

    fn to_u64(self) -> u64;
    fn from_u64(v: u64) -> Self;
}

macro_rules! impl_lane {
    ($ty:ty, $bits:expr) => {
        impl Lane for $ty {
            const BITS: u16 = $bits;
            const ZERO: Self = 0;
            const MAX: Self = <$ty>::MAX;

            #[inline(always)]
            fn to_u64(self) -> u64 {
                self as u64
            }

            #[inline(always)]
            fn from_u64(v: u64) -> Self {
                debug_assert!(v <= <$ty>::MAX as u64);
                v as $ty
            }
        }
    };
}

impl_lane!(u16, 16);
impl_lane!(u32, 32);
impl_lane!(u64, 64);

/// Runtime tag for the three supported lane widths.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LaneWidth {
    W16,
    W32,
    W64,
}

impl LaneWidth {
    pub fn bits(self) -> u16 {
        match self {
            LaneWidth::W16 => 16,
            LaneWidth::W32 => 32,
            LaneWidth::W64 => 64,
        }
    }

    pub fn from_bits(bits: u16) -> Result<Self> {
        match bits {
            16 => Ok(LaneWidth::W16),
            32 => Ok(LaneWidth::W32),
            64 => Ok(LaneWidth::W64),
            _ => Err(Error::InvalidGeometry {
                vector_bits: 0,
                lane_bits: bits,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_valid_geometries() {
        let all = KernelGeometry::all();
        assert_eq!(all.len(), 9);
        for g in all {
            assert_eq!(g.lane_count(), g.block_count() * g.lanes_per_block());
            assert!(matches!(g.lane_count(), 2 | 4 | 8 | 16 | 32));
        }
        assert!(KernelGeometry::new(1024, 32).is_err());
        assert!(KernelGeometry::new(512, 8).is_err());
        assert!(KernelGeometry::new(0, 0).is_err());
    }

    #[test]
    fn report_order() {
        let all = KernelGeometry::all();
        assert_eq!(all[0].to_string(), "512x16");
        assert_eq!(all[4].to_string(), "256x32");
        assert_eq!(all[8].to_string(), "128x64");
    }

    #[test]
    fn parse_round_trip() {
        for g in KernelGeometry::all() {
            assert_eq!(g.to_string().parse::<KernelGeometry>().unwrap(), g);
        }
        assert!("512".parse::<KernelGeometry>().is_err());
        assert!("512x12".parse::<KernelGeometry>().is_err());
    }

    #[test]
    fn mask_bits_fit() {
        let g = KernelGeometry::new(512, 16).unwrap();
        assert_eq!(g.lane_count(), 32);
        assert_eq!(g.mask_bits(), u32::MAX);
        let g = KernelGeometry::new(128, 64).unwrap();
        assert_eq!(g.mask_bits(), 0b11);
    }
}
