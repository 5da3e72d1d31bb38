//! Sorted-integer set intersection built on two-way vector intersection
//! masks.
//!
//! The kernel layer computes, for two fixed-length lane vectors, a bit mask
//! of the first vector's lanes that appear anywhere in the second. The
//! driver streams that kernel over two strictly increasing runs block by
//! block, advancing each cursor by the number of its lanes at or below the
//! other block's last lane. Dispatch picks the implementation at runtime:
//! the native two-way intersection instruction where the CPU has it, an
//! AVX-512 rotate-and-compare emulation where 512/256/128-bit vectors are
//! available, and a portable scalar kernel everywhere.
//!
//! ```
//! use vecsect::driver::{intersect_size, SortedRun};
//! use vecsect::dispatch::{detect_capabilities, select_kernel, Policy};
//! use vecsect::geometry::KernelGeometry;
//!
//! let a = SortedRun::from_u32((0..100).collect()).unwrap();
//! let b = SortedRun::from_u32((50..150).collect()).unwrap();
//! let geometry = KernelGeometry::new(512, 32).unwrap();
//! let choice = select_kernel(geometry, Policy::Auto, &detect_capabilities()).unwrap();
//! assert_eq!(intersect_size(&a, &b, &choice).unwrap(), 50);
//! ```

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod dispatch;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod selftest;

pub use error::{Error, Result};
pub use geometry::{KernelGeometry, Lane, LaneWidth, MAX_LANES};
