//! Runtime CPU capability detection and kernel selection.
//!
//! Selection happens in two steps: [`select_kernel`] maps a policy to a
//! [`KernelChoice`] (pure in its arguments), and [`resolve_kernel`] binds the
//! choice to a concrete block-kernel function, vector-backed when the CPU
//! allows and portable otherwise. Every resolvable implementation for a
//! geometry produces identical masks on identical inputs.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{KernelGeometry, Lane};
use crate::kernels::scalar;
#[cfg(target_arch = "x86_64")]
use crate::kernels::x86;

/// Environment variable overriding kernel policy: `native`, `emulated` or
/// `scalar`. `scalar` also blanks capability detection so every selection
/// degrades to the portable kernels.
pub const FORCE_ENV_VAR: &str = "VECSECT_FORCE";

/// What the executing CPU offers for kernel selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CapabilitySet {
    pub has_512bit_vectors: bool,
    pub has_256bit_vectors: bool,
    pub has_128bit_vectors: bool,
    pub has_native_2intersect: bool,
}

impl CapabilitySet {
    pub const NONE: Self = Self {
        has_512bit_vectors: false,
        has_256bit_vectors: false,
        has_128bit_vectors: false,
        has_native_2intersect: false,
    };

    pub const ALL: Self = Self {
        has_512bit_vectors: true,
        has_256bit_vectors: true,
        has_128bit_vectors: true,
        has_native_2intersect: true,
    };

    /// The native instruction is part of the 512-bit ISA surface.
    fn normalized(mut self) -> Self {
        if !self.has_512bit_vectors {
            self.has_native_2intersect = false;
        }
        self
    }

    pub fn supports_width(&self, vector_bits: u16) -> bool {
        match vector_bits {
            512 => self.has_512bit_vectors,
            256 => self.has_256bit_vectors,
            128 => self.has_128bit_vectors,
            _ => false,
        }
    }

    fn native_for(&self, geometry: KernelGeometry) -> bool {
        self.has_native_2intersect && self.supports_width(geometry.vector_bits())
    }
}

fn raw_detect() -> CapabilitySet {
    if std::env::var(FORCE_ENV_VAR).as_deref() == Ok("scalar") {
        return CapabilitySet::NONE;
    }
    #[cfg(target_arch = "x86_64")]
    {
        let f = std::arch::is_x86_feature_detected!("avx512f");
        let bw = std::arch::is_x86_feature_detected!("avx512bw");
        let vl = std::arch::is_x86_feature_detected!("avx512vl");
        let native = std::arch::is_x86_feature_detected!("avx512vp2intersect");
        CapabilitySet {
            has_512bit_vectors: f && bw,
            has_256bit_vectors: f && bw && vl,
            has_128bit_vectors: f && bw && vl,
            has_native_2intersect: native,
        }
        .normalized()
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        CapabilitySet::NONE
    }
}

/// Detects once per process; deterministic thereafter.
pub fn detect_capabilities() -> CapabilitySet {
    static CAPS: OnceLock<CapabilitySet> = OnceLock::new();
    *CAPS.get_or_init(raw_detect)
}

/// Kernel implementations a [`KernelChoice`] can name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Implementation {
    Native,
    EmulatedFast,
    EmulatedNaive,
    EmulatedMemory,
    Strict,
    Scalar,
}

impl Implementation {
    pub const ALL: [Implementation; 6] = [
        Implementation::Native,
        Implementation::EmulatedFast,
        Implementation::EmulatedNaive,
        Implementation::EmulatedMemory,
        Implementation::Strict,
        Implementation::Scalar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Implementation::Native => "native",
            Implementation::EmulatedFast => "fast",
            Implementation::EmulatedNaive => "naive",
            Implementation::EmulatedMemory => "memory",
            Implementation::Strict => "strict",
            Implementation::Scalar => "scalar",
        }
    }
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Implementation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(Implementation::Native),
            "fast" => Ok(Implementation::EmulatedFast),
            "naive" => Ok(Implementation::EmulatedNaive),
            "memory" => Ok(Implementation::EmulatedMemory),
            "strict" => Ok(Implementation::Strict),
            "scalar" => Ok(Implementation::Scalar),
            other => Err(Error::InvalidPolicy {
                value: other.to_string(),
            }),
        }
    }
}

/// Selection policy for [`select_kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Auto,
    ForceNative,
    ForceEmulated,
    ForceScalar,
}

/// Reads the [`FORCE_ENV_VAR`] override, if any.
pub fn policy_from_env() -> Result<Option<Policy>> {
    match std::env::var(FORCE_ENV_VAR) {
        Ok(v) => match v.as_str() {
            "native" => Ok(Some(Policy::ForceNative)),
            "emulated" => Ok(Some(Policy::ForceEmulated)),
            "scalar" => Ok(Some(Policy::ForceScalar)),
            other => Err(Error::InvalidPolicy {
                value: other.to_string(),
            }),
        },
        Err(_) => Ok(None),
    }
}

/// A geometry paired with the implementation that will serve it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelChoice {
    pub geometry: KernelGeometry,
    pub implementation: Implementation,
}

impl KernelChoice {
    /// Validates the pairing: the native instruction exists only for 32- and
    /// 64-bit lanes on capable CPUs, and the strict kernel only for 512-bit
    /// vectors of 32-bit lanes.
    pub fn validated(
        geometry: KernelGeometry,
        implementation: Implementation,
        caps: &CapabilitySet,
    ) -> Result<Self> {
        match implementation {
            Implementation::Native => {
                if geometry.lane_bits() == 16 {
                    return Err(Error::UnsupportedGeometry {
                        operation: "native two-way intersection",
                        geometry,
                    });
                }
                if !caps.native_for(geometry) {
                    return Err(Error::UnsupportedCapability {
                        what: format!("native two-way intersection at {geometry}"),
                    });
                }
            }
            Implementation::Strict
                if (geometry.vector_bits(), geometry.lane_bits()) != (512, 32) =>
            {
                return Err(Error::UnsupportedGeometry {
                    operation: "strict two-mask emulation",
                    geometry,
                });
            }
            _ => {}
        }
        Ok(Self {
            geometry,
            implementation,
        })
    }
}

/// Picks an implementation for `geometry` under `policy`. Pure in its three
/// arguments. `auto` prefers the fast emulation when the geometry's vector
/// width is available and falls back to the portable scalar kernel.
pub fn select_kernel(
    geometry: KernelGeometry,
    policy: Policy,
    caps: &CapabilitySet,
) -> Result<KernelChoice> {
    let implementation = match policy {
        Policy::Auto => {
            if caps.supports_width(geometry.vector_bits()) {
                Implementation::EmulatedFast
            } else {
                Implementation::Scalar
            }
        }
        Policy::ForceNative => Implementation::Native,
        Policy::ForceEmulated => Implementation::EmulatedFast,
        Policy::ForceScalar => Implementation::Scalar,
    };
    KernelChoice::validated(geometry, implementation, caps)
}

/// Which code path backs a resolved kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Vector,
    Portable,
}

pub type MaskFn<T> = unsafe fn(*const T, *const T) -> u32;
pub type AdvanceFn<T> = unsafe fn(*const T, *const T) -> (u32, u32);

/// A block kernel bound to a concrete function for lane type `T`.
#[derive(Clone, Copy)]
pub struct BlockKernel<T: Lane> {
    choice: KernelChoice,
    backend: Backend,
    mask_fn: MaskFn<T>,
    advance_fn: Option<AdvanceFn<T>>,
}

impl<T: KernelLane> BlockKernel<T> {
    pub fn choice(&self) -> KernelChoice {
        self.choice
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// First intersection mask of two exactly-L-lane windows.
    #[inline]
    pub fn first_mask(&self, a: &[T], b: &[T]) -> u32 {
        let l = self.choice.geometry.lane_count();
        assert_eq!(a.len(), l);
        assert_eq!(b.len(), l);
        // Window lengths checked above; vector variants were resolved only
        // after runtime feature detection.
        unsafe { (self.mask_fn)(a.as_ptr(), b.as_ptr()) }
    }

    /// Vector-accelerated cursor advance, when the backend provides one.
    #[inline]
    pub(crate) fn advance(&self, a: &[T], b: &[T]) -> Option<(u32, u32)> {
        let f = self.advance_fn?;
        debug_assert_eq!(a.len(), self.choice.geometry.lane_count());
        debug_assert_eq!(b.len(), self.choice.geometry.lane_count());
        Some(unsafe { f(a.as_ptr(), b.as_ptr()) })
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for u16 {}
    impl Sealed for u32 {}
    impl Sealed for u64 {}
}

/// Lane types the dispatcher can bind vector kernels for.
pub trait KernelLane: Lane + sealed::Sealed {
    #[doc(hidden)]
    fn vector_mask_fn(vector_bits: u16, implementation: Implementation) -> Option<MaskFn<Self>>;
    #[doc(hidden)]
    fn vector_advance_fn(vector_bits: u16) -> Option<AdvanceFn<Self>>;
}

#[cfg(target_arch = "x86_64")]
mod feat {
    #[inline]
    pub fn avx512f() -> bool {
        std::arch::is_x86_feature_detected!("avx512f")
    }
    #[inline]
    pub fn avx512bw() -> bool {
        std::arch::is_x86_feature_detected!("avx512bw")
    }
    #[inline]
    pub fn avx512vl() -> bool {
        std::arch::is_x86_feature_detected!("avx512vl")
    }
    #[inline]
    pub fn avx512vp2intersect() -> bool {
        std::arch::is_x86_feature_detected!("avx512vp2intersect")
    }
}

impl KernelLane for u16 {
    #[cfg(target_arch = "x86_64")]
    fn vector_mask_fn(vector_bits: u16, implementation: Implementation) -> Option<MaskFn<u16>> {
        use Implementation::*;
        let wide = feat::avx512f() && feat::avx512bw();
        let narrow = wide && feat::avx512vl();
        match (vector_bits, implementation) {
            (512, EmulatedFast) if wide => Some(x86::fast_512x16 as MaskFn<u16>),
            (512, EmulatedNaive) if wide => Some(x86::naive_512x16 as MaskFn<u16>),
            (512, EmulatedMemory) if wide => Some(x86::memory_512x16 as MaskFn<u16>),
            (256, EmulatedFast) if narrow => Some(x86::fast_256x16 as MaskFn<u16>),
            (256, EmulatedNaive) if narrow => Some(x86::naive_256x16 as MaskFn<u16>),
            (256, EmulatedMemory) if narrow => Some(x86::memory_256x16 as MaskFn<u16>),
            (128, EmulatedFast) if narrow => Some(x86::fast_128x16 as MaskFn<u16>),
            (128, EmulatedNaive) if narrow => Some(x86::naive_128x16 as MaskFn<u16>),
            (128, EmulatedMemory) if narrow => Some(x86::memory_128x16 as MaskFn<u16>),
            _ => None,
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    fn vector_mask_fn(_vector_bits: u16, _implementation: Implementation) -> Option<MaskFn<u16>> {
        None
    }

    #[cfg(target_arch = "x86_64")]
    fn vector_advance_fn(vector_bits: u16) -> Option<AdvanceFn<u16>> {
        let wide = feat::avx512f() && feat::avx512bw();
        let narrow = wide && feat::avx512vl();
        match vector_bits {
            512 if wide => Some(x86::advance_512x16 as AdvanceFn<u16>),
            256 if narrow => Some(x86::advance_256x16 as AdvanceFn<u16>),
            128 if narrow => Some(x86::advance_128x16 as AdvanceFn<u16>),
            _ => None,
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    fn vector_advance_fn(_vector_bits: u16) -> Option<AdvanceFn<u16>> {
        None
    }
}

impl KernelLane for u32 {
    #[cfg(target_arch = "x86_64")]
    fn vector_mask_fn(vector_bits: u16, implementation: Implementation) -> Option<MaskFn<u32>> {
        use Implementation::*;
        let wide = feat::avx512f();
        let narrow = wide && feat::avx512vl();
        let native = feat::avx512vp2intersect();
        match (vector_bits, implementation) {
            (512, EmulatedFast) if wide => Some(x86::fast_512x32 as MaskFn<u32>),
            (512, EmulatedNaive) if wide => Some(x86::naive_512x32 as MaskFn<u32>),
            (512, EmulatedMemory) if wide => Some(x86::memory_512x32 as MaskFn<u32>),
            (512, Strict) if wide => Some(x86::strict_512x32_first as MaskFn<u32>),
            (512, Native) if wide && native => Some(x86::native_512x32_first as MaskFn<u32>),
            (256, EmulatedFast) if narrow => Some(x86::fast_256x32 as MaskFn<u32>),
            (256, EmulatedNaive) if narrow => Some(x86::naive_256x32 as MaskFn<u32>),
            (256, EmulatedMemory) if narrow => Some(x86::memory_256x32 as MaskFn<u32>),
            (256, Native) if narrow && native => Some(x86::native_256x32_first as MaskFn<u32>),
            (128, EmulatedFast) if narrow => Some(x86::fast_128x32 as MaskFn<u32>),
            (128, EmulatedNaive) if narrow => Some(x86::naive_128x32 as MaskFn<u32>),
            (128, EmulatedMemory) if narrow => Some(x86::memory_128x32 as MaskFn<u32>),
            (128, Native) if narrow && native => Some(x86::native_128x32_first as MaskFn<u32>),
            _ => None,
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    fn vector_mask_fn(_vector_bits: u16, _implementation: Implementation) -> Option<MaskFn<u32>> {
        None
    }

    #[cfg(target_arch = "x86_64")]
    fn vector_advance_fn(vector_bits: u16) -> Option<AdvanceFn<u32>> {
        let wide = feat::avx512f();
        let narrow = wide && feat::avx512vl();
        match vector_bits {
            512 if wide => Some(x86::advance_512x32 as AdvanceFn<u32>),
            256 if narrow => Some(x86::advance_256x32 as AdvanceFn<u32>),
            128 if narrow => Some(x86::advance_128x32 as AdvanceFn<u32>),
            _ => None,
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    fn vector_advance_fn(_vector_bits: u16) -> Option<AdvanceFn<u32>> {
        None
    }
}

impl KernelLane for u64 {
    #[cfg(target_arch = "x86_64")]
    fn vector_mask_fn(vector_bits: u16, implementation: Implementation) -> Option<MaskFn<u64>> {
        use Implementation::*;
        let wide = feat::avx512f();
        let narrow = wide && feat::avx512vl();
        let native = feat::avx512vp2intersect();
        match (vector_bits, implementation) {
            (512, EmulatedFast) if wide => Some(x86::fast_512x64 as MaskFn<u64>),
            (512, EmulatedNaive) if wide => Some(x86::naive_512x64 as MaskFn<u64>),
            (512, EmulatedMemory) if wide => Some(x86::memory_512x64 as MaskFn<u64>),
            (512, Native) if wide && native => Some(x86::native_512x64_first as MaskFn<u64>),
            (256, EmulatedFast) if narrow => Some(x86::fast_256x64 as MaskFn<u64>),
            (256, EmulatedNaive) if narrow => Some(x86::naive_256x64 as MaskFn<u64>),
            (256, EmulatedMemory) if narrow => Some(x86::memory_256x64 as MaskFn<u64>),
            (256, Native) if narrow && native => Some(x86::native_256x64_first as MaskFn<u64>),
            (128, EmulatedFast) if narrow => Some(x86::fast_128x64 as MaskFn<u64>),
            (128, EmulatedNaive) if narrow => Some(x86::naive_128x64 as MaskFn<u64>),
            (128, EmulatedMemory) if narrow => Some(x86::memory_128x64 as MaskFn<u64>),
            (128, Native) if narrow && native => Some(x86::native_128x64_first as MaskFn<u64>),
            _ => None,
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    fn vector_mask_fn(_vector_bits: u16, _implementation: Implementation) -> Option<MaskFn<u64>> {
        None
    }

    #[cfg(target_arch = "x86_64")]
    fn vector_advance_fn(vector_bits: u16) -> Option<AdvanceFn<u64>> {
        let wide = feat::avx512f();
        let narrow = wide && feat::avx512vl();
        match vector_bits {
            512 if wide => Some(x86::advance_512x64 as AdvanceFn<u64>),
            256 if narrow => Some(x86::advance_256x64 as AdvanceFn<u64>),
            128 if narrow => Some(x86::advance_128x64 as AdvanceFn<u64>),
            _ => None,
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    fn vector_advance_fn(_vector_bits: u16) -> Option<AdvanceFn<u64>> {
        None
    }
}

// Portable trampolines: reconstruct the geometry from constants so they fit
// the plain function-pointer kernel type.

unsafe fn portable_fast<T: Lane, const VB: u16>(a: *const T, b: *const T) -> u32 {
    let geom = KernelGeometry::new(VB, T::BITS).unwrap();
    let l = geom.lane_count();
    scalar::fast_first_mask(
        std::slice::from_raw_parts(a, l),
        std::slice::from_raw_parts(b, l),
        geom,
    )
}

unsafe fn portable_naive<T: Lane, const VB: u16>(a: *const T, b: *const T) -> u32 {
    let l = KernelGeometry::new(VB, T::BITS).unwrap().lane_count();
    scalar::naive_first_mask(
        std::slice::from_raw_parts(a, l),
        std::slice::from_raw_parts(b, l),
    )
}

unsafe fn portable_memory<T: Lane, const VB: u16>(a: *const T, b: *const T) -> u32 {
    let l = KernelGeometry::new(VB, T::BITS).unwrap().lane_count();
    scalar::memory_first_mask(
        std::slice::from_raw_parts(a, l),
        std::slice::from_raw_parts(b, l),
    )
}

unsafe fn portable_reference<T: Lane, const VB: u16>(a: *const T, b: *const T) -> u32 {
    let l = KernelGeometry::new(VB, T::BITS).unwrap().lane_count();
    scalar::reference_first_mask(
        std::slice::from_raw_parts(a, l),
        std::slice::from_raw_parts(b, l),
    )
}

unsafe fn portable_strict_first<T: Lane>(a: *const T, b: *const T) -> u32 {
    scalar::strict_two_masks_512x32(
        std::slice::from_raw_parts(a, 16),
        std::slice::from_raw_parts(b, 16),
    )
    .0
}

fn portable_mask_fn<T: Lane>(vector_bits: u16, implementation: Implementation) -> MaskFn<T> {
    macro_rules! by_width {
        ($f:ident) => {
            match vector_bits {
                512 => $f::<T, 512>,
                256 => $f::<T, 256>,
                _ => $f::<T, 128>,
            }
        };
    }
    match implementation {
        Implementation::EmulatedFast => by_width!(portable_fast),
        Implementation::EmulatedNaive => by_width!(portable_naive),
        Implementation::EmulatedMemory => by_width!(portable_memory),
        Implementation::Scalar => by_width!(portable_reference),
        Implementation::Strict => portable_strict_first::<T>,
        Implementation::Native => unreachable!("native has no portable backend"),
    }
}

/// Binds a choice to a callable block kernel using the process capability
/// set. Vector backends are used for emulated/strict kernels when available;
/// the native implementation has no portable fallback.
pub fn resolve_kernel<T: KernelLane>(choice: KernelChoice) -> Result<BlockKernel<T>> {
    resolve_kernel_with(choice, &detect_capabilities())
}

pub fn resolve_kernel_with<T: KernelLane>(
    choice: KernelChoice,
    caps: &CapabilitySet,
) -> Result<BlockKernel<T>> {
    let geometry = choice.geometry;
    if T::BITS != geometry.lane_bits() {
        return Err(Error::LaneWidthMismatch {
            expected: geometry.lane_bits(),
            got: T::BITS,
        });
    }
    // Re-run the pairing rules; choices can be built from public fields.
    let choice = KernelChoice::validated(geometry, choice.implementation, caps)?;

    let vector_allowed = caps.supports_width(geometry.vector_bits());
    let vector_fn = if vector_allowed || choice.implementation == Implementation::Native {
        T::vector_mask_fn(geometry.vector_bits(), choice.implementation)
    } else {
        None
    };

    let (mask_fn, backend) = match (choice.implementation, vector_fn) {
        (Implementation::Native, Some(f)) => (f, Backend::Vector),
        (Implementation::Native, None) => {
            return Err(Error::UnsupportedCapability {
                what: format!("native two-way intersection at {geometry}"),
            });
        }
        (Implementation::Scalar, _) => (
            portable_mask_fn::<T>(geometry.vector_bits(), Implementation::Scalar),
            Backend::Portable,
        ),
        (_, Some(f)) => (f, Backend::Vector),
        (imp, None) => (
            portable_mask_fn::<T>(geometry.vector_bits(), imp),
            Backend::Portable,
        ),
    };

    let advance_fn = match backend {
        Backend::Vector => T::vector_advance_fn(geometry.vector_bits()),
        Backend::Portable => None,
    };

    Ok(BlockKernel {
        choice,
        backend,
        mask_fn,
        advance_fn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(v: u16, l: u16) -> KernelGeometry {
        KernelGeometry::new(v, l).unwrap()
    }

    #[test]
    fn auto_prefers_fast_emulation() {
        let c = select_kernel(geom(512, 32), Policy::Auto, &CapabilitySet::ALL).unwrap();
        assert_eq!(c.implementation, Implementation::EmulatedFast);
    }

    #[test]
    fn auto_falls_back_to_scalar() {
        let c = select_kernel(geom(512, 32), Policy::Auto, &CapabilitySet::NONE).unwrap();
        assert_eq!(c.implementation, Implementation::Scalar);
    }

    #[test]
    fn force_native_requires_capability_and_geometry() {
        assert!(matches!(
            select_kernel(geom(512, 16), Policy::ForceNative, &CapabilitySet::ALL),
            Err(Error::UnsupportedGeometry { .. })
        ));
        assert!(matches!(
            select_kernel(geom(512, 32), Policy::ForceNative, &CapabilitySet::NONE),
            Err(Error::UnsupportedCapability { .. })
        ));
        let c = select_kernel(geom(512, 32), Policy::ForceNative, &CapabilitySet::ALL).unwrap();
        assert_eq!(c.implementation, Implementation::Native);
    }

    #[test]
    fn force_scalar_always_selectable() {
        for g in KernelGeometry::all() {
            let c = select_kernel(g, Policy::ForceScalar, &CapabilitySet::NONE).unwrap();
            assert_eq!(c.implementation, Implementation::Scalar);
        }
    }

    #[test]
    fn native_implies_512() {
        let caps = CapabilitySet {
            has_512bit_vectors: false,
            has_256bit_vectors: false,
            has_128bit_vectors: false,
            has_native_2intersect: true,
        }
        .normalized();
        assert!(!caps.has_native_2intersect);
    }

    #[test]
    fn strict_gated_to_512x32() {
        assert!(KernelChoice::validated(
            geom(512, 32),
            Implementation::Strict,
            &CapabilitySet::NONE
        )
        .is_ok());
        assert!(matches!(
            KernelChoice::validated(geom(256, 32), Implementation::Strict, &CapabilitySet::NONE),
            Err(Error::UnsupportedGeometry { .. })
        ));
    }

    #[test]
    fn resolve_checks_lane_width() {
        let choice =
            KernelChoice::validated(geom(512, 32), Implementation::Scalar, &CapabilitySet::NONE)
                .unwrap();
        assert!(matches!(
            resolve_kernel_with::<u16>(choice, &CapabilitySet::NONE),
            Err(Error::LaneWidthMismatch { .. })
        ));
        assert!(resolve_kernel_with::<u32>(choice, &CapabilitySet::NONE).is_ok());
    }

    #[test]
    fn portable_backends_cover_all_nonnative() {
        for g in KernelGeometry::all() {
            for imp in [
                Implementation::EmulatedFast,
                Implementation::EmulatedNaive,
                Implementation::EmulatedMemory,
                Implementation::Scalar,
            ] {
                let choice = KernelChoice::validated(g, imp, &CapabilitySet::NONE).unwrap();
                let ok = match g.lane_bits() {
                    16 => resolve_kernel_with::<u16>(choice, &CapabilitySet::NONE)
                        .map(|k| k.backend()),
                    32 => resolve_kernel_with::<u32>(choice, &CapabilitySet::NONE)
                        .map(|k| k.backend()),
                    _ => resolve_kernel_with::<u64>(choice, &CapabilitySet::NONE)
                        .map(|k| k.backend()),
                };
                assert_eq!(ok.unwrap(), Backend::Portable, "{g} {imp}");
            }
        }
    }

    #[test]
    fn kernel_masks_agree_with_reference() {
        // every resolvable implementation must produce the reference mask
        let caps = detect_capabilities();
        let geometry = geom(512, 32);
        let a: Vec<u32> = vec![3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3];
        let b: Vec<u32> = vec![2, 7, 1, 8, 2, 8, 1, 8, 2, 8, 4, 5, 9, 0, 4, 5];
        let expect = scalar::reference_first_mask(&a, &b);
        for imp in Implementation::ALL {
            let Ok(choice) = KernelChoice::validated(geometry, imp, &caps) else {
                continue;
            };
            let kernel = resolve_kernel_with::<u32>(choice, &caps).unwrap();
            assert_eq!(kernel.first_mask(&a, &b), expect, "{imp}");
        }
    }
}
