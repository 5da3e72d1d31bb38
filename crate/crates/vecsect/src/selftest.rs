//! Desk-scale self-check: kernel/oracle equivalence and driver differentials
//! against an independent two-pointer merge, across every implementation the
//! machine can select. Backs the `selftest` CLI subcommand; the full-size
//! suites live in the integration tests.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datagen::{generate_runs, WorkloadSpec};
use crate::dispatch::{
    detect_capabilities, resolve_kernel_with, CapabilitySet, Implementation, KernelChoice,
    KernelLane,
};
use crate::driver::intersect_runs_with_stats;
use crate::geometry::{KernelGeometry, Lane};
use crate::kernels::scalar;

fn reference_merge(a: &[u64], b: &[u64]) -> Vec<u64> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn random_lanes<T: Lane>(rng: &mut ChaCha8Rng, l: usize, wide: bool) -> Vec<T> {
    (0..l)
        .map(|_| {
            let v = rng.random::<u64>();
            let v = if wide { v } else { v % 8 };
            T::from_u64(v & T::MAX.to_u64())
        })
        .collect()
}

fn kernel_pairs_for<T: KernelLane>(
    geometry: KernelGeometry,
    caps: &CapabilitySet,
    pairs: u64,
    failures: &mut u64,
    checks: &mut u64,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(
        geometry.vector_bits() as u64 * 131 + geometry.lane_bits() as u64,
    );
    let l = geometry.lane_count();

    let mut kernels = Vec::new();
    for imp in Implementation::ALL {
        if imp == Implementation::Scalar {
            continue; // the reference side
        }
        if let Ok(choice) = KernelChoice::validated(geometry, imp, caps) {
            if let Ok(k) = resolve_kernel_with::<T>(choice, caps) {
                kernels.push(k);
            }
        }
    }

    for round in 0..pairs {
        let a = random_lanes::<T>(&mut rng, l, round % 4 == 3);
        let b = random_lanes::<T>(&mut rng, l, round % 4 == 3);
        let (expect, _) = scalar::oracle_two_masks(&a, &b);
        for k in &kernels {
            *checks += 1;
            if k.first_mask(&a, &b) != expect {
                *failures += 1;
            }
        }
        // strict pair at the one geometry that has it
        if (geometry.vector_bits(), geometry.lane_bits()) == (512, 32) {
            *checks += 1;
            if scalar::strict_two_masks_512x32(&a, &b) != scalar::oracle_two_masks(&a, &b) {
                *failures += 1;
            }
        }
    }
}

fn driver_workloads(caps: &CapabilitySet, workloads: u64, failures: &mut u64, checks: &mut u64) {
    for w in 0..workloads {
        let lane_bits = [16u16, 32, 64][(w % 3) as usize];
        let overlap = [0.0, 0.01, 0.5, 1.0][(w % 4) as usize];
        let len_a = (w * 977) % 9000;
        let len_b = (w * 613) % 7000;
        let spec = WorkloadSpec::new(w, lane_bits, len_a, len_b, overlap);
        let (a, b, expected) = match generate_runs(&spec) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let expect_values = reference_merge(
            &a.iter_u64().collect::<Vec<_>>(),
            &b.iter_u64().collect::<Vec<_>>(),
        );

        for vector_bits in [512u16, 256, 128] {
            let geometry = KernelGeometry::new(vector_bits, lane_bits).unwrap();
            for imp in Implementation::ALL {
                let Ok(choice) = KernelChoice::validated(geometry, imp, caps) else {
                    continue;
                };
                if imp == Implementation::Native && !caps.has_native_2intersect {
                    continue;
                }
                let Ok((result, stats)) = intersect_runs_with_stats(&a, &b, &choice) else {
                    *failures += 1;
                    continue;
                };
                *checks += 1;
                let got: Vec<u64> = result
                    .values
                    .as_ref()
                    .map(|r| r.iter_u64().collect())
                    .unwrap_or_default();
                if got != expect_values
                    || result.count != expected
                    || stats.progress_violations != 0
                    || stats.prefix_violations != 0
                {
                    *failures += 1;
                }
            }
        }
    }
}

/// Runs both suites, writing one status line per suite. Returns true when
/// every check passed.
pub fn run(pairs: u64, workloads: u64, out: &mut dyn Write) -> bool {
    let caps = detect_capabilities();
    let mut all_ok = true;

    let mut failures = 0u64;
    let mut checks = 0u64;
    for geometry in KernelGeometry::all() {
        match geometry.lane_bits() {
            16 => kernel_pairs_for::<u16>(geometry, &caps, pairs, &mut failures, &mut checks),
            32 => kernel_pairs_for::<u32>(geometry, &caps, pairs, &mut failures, &mut checks),
            _ => kernel_pairs_for::<u64>(geometry, &caps, pairs, &mut failures, &mut checks),
        }
    }
    writeln!(
        out,
        "{} kernel oracle equivalence: {checks} checks, {failures} failures",
        if failures == 0 { "ok " } else { "FAIL" }
    )
    .ok();
    all_ok &= failures == 0;

    let mut failures = 0u64;
    let mut checks = 0u64;
    driver_workloads(&caps, workloads, &mut failures, &mut checks);
    writeln!(
        out,
        "{} driver differential vs merge: {checks} checks, {failures} failures",
        if failures == 0 { "ok " } else { "FAIL" }
    )
    .ok();
    all_ok &= failures == 0;

    all_ok
}
