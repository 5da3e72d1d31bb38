//! Per-inner-loop-iteration cost measurement and the report table.
//!
//! Each cell times `intersect_size` over a generated workload and divides by
//! the driver's actual block-loop iteration count. One untimed warm-up pass
//! precedes at least twenty timed repetitions; the median is reported.
//! Cycle counts appear only when the timestamp counter is invariant.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use crate::datagen::{generate_runs, WorkloadSpec};
use crate::dispatch::{detect_capabilities, Implementation, KernelChoice};
use crate::driver::intersect_size_with_stats;
use crate::error::{Error, Result};
use crate::geometry::KernelGeometry;

/// Default number of timed repetitions per cell.
pub const DEFAULT_REPS: usize = 20;

/// One measured cell of the report grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub geometry: KernelGeometry,
    pub implementation: Implementation,
    pub ns_per_iter: f64,
    /// Absent when no invariant timestamp counter is available.
    pub cycles_per_iter: Option<f64>,
    /// Block-loop iterations of one pass, as counted by the driver.
    pub iterations: u64,
    pub workload: WorkloadSpec,
}

#[cfg(target_arch = "x86_64")]
fn rdtsc() -> u64 {
    // Plain rdtsc; serialization is unnecessary at whole-pass granularity.
    unsafe { core::arch::x86_64::_rdtsc() }
}

/// Best-effort pinning of the measuring thread to its current CPU for the
/// lifetime of the returned guard.
#[cfg(target_os = "linux")]
mod affinity {
    pub struct Pinned {
        previous: libc::cpu_set_t,
    }

    pub fn pin_to_current_cpu() -> Option<Pinned> {
        unsafe {
            let size = std::mem::size_of::<libc::cpu_set_t>();
            let mut previous: libc::cpu_set_t = std::mem::zeroed();
            if libc::sched_getaffinity(0, size, &mut previous) != 0 {
                return None;
            }
            let cpu = libc::sched_getcpu();
            if cpu < 0 {
                return None;
            }
            let mut set: libc::cpu_set_t = std::mem::zeroed();
            libc::CPU_SET(cpu as usize, &mut set);
            if libc::sched_setaffinity(0, size, &set) != 0 {
                return None;
            }
            Some(Pinned { previous })
        }
    }

    impl Drop for Pinned {
        fn drop(&mut self) {
            unsafe {
                libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &self.previous);
            }
        }
    }
}

/// Whether elapsed-cycle readings are meaningful on this machine.
pub fn invariant_tsc_available() -> bool {
    static AVAILABLE: OnceLock<bool> = OnceLock::new();
    *AVAILABLE.get_or_init(|| {
        #[cfg(all(target_arch = "x86_64", target_os = "linux"))]
        {
            if let Ok(info) = std::fs::read_to_string("/proc/cpuinfo") {
                return info.contains("constant_tsc") && info.contains("nonstop_tsc");
            }
            false
        }
        #[cfg(not(all(target_arch = "x86_64", target_os = "linux")))]
        {
            false
        }
    })
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Measures one (geometry, implementation) cell over the given workload.
pub fn measure_cell(
    geometry: KernelGeometry,
    implementation: Implementation,
    spec: &WorkloadSpec,
    reps: usize,
) -> Result<BenchRecord> {
    if spec.lane_bits != geometry.lane_bits() {
        return Err(Error::LaneWidthMismatch {
            expected: geometry.lane_bits(),
            got: spec.lane_bits,
        });
    }
    let caps = detect_capabilities();
    let choice = KernelChoice::validated(geometry, implementation, &caps)?;
    let (a, b, expected) = generate_runs(spec)?;

    #[cfg(target_os = "linux")]
    let _pinned = affinity::pin_to_current_cpu();

    // warm-up, also the correctness anchor for the timed passes
    let (count, stats) = intersect_size_with_stats(&a, &b, &choice)?;
    if stats.block_iterations == 0 {
        return Err(Error::EmptyBenchWorkload);
    }
    assert_eq!(count, expected, "kernel disagreed with generator");

    let reps = reps.max(1);
    let use_tsc = cfg!(target_arch = "x86_64") && invariant_tsc_available();
    let mut ns = Vec::with_capacity(reps);
    let mut cycles = Vec::with_capacity(reps);
    let mut checksum = 0u64;
    for _ in 0..reps {
        #[cfg(target_arch = "x86_64")]
        let c0 = if use_tsc { rdtsc() } else { 0 };
        let t0 = Instant::now();
        let (count, st) = intersect_size_with_stats(&a, &b, &choice)?;
        let dt = t0.elapsed();
        #[cfg(target_arch = "x86_64")]
        if use_tsc {
            cycles.push((rdtsc() - c0) as f64 / st.block_iterations as f64);
        }
        checksum = checksum.wrapping_add(count);
        ns.push(dt.as_nanos() as f64 / st.block_iterations as f64);
    }
    // consume the result sink after timing
    if std::hint::black_box(checksum) != expected.wrapping_mul(reps as u64) {
        return Err(Error::UnsupportedCapability {
            what: "inconsistent intersection sizes across benchmark passes".into(),
        });
    }

    Ok(BenchRecord {
        geometry,
        implementation,
        ns_per_iter: median(&mut ns),
        cycles_per_iter: if cycles.is_empty() {
            None
        } else {
            Some(median(&mut cycles))
        },
        iterations: stats.block_iterations,
        workload: *spec,
    })
}

/// The three report columns, in order.
pub const TABLE_COLUMNS: [Implementation; 3] = [
    Implementation::Native,
    Implementation::EmulatedFast,
    Implementation::EmulatedMemory,
];

/// Output encoding for [`emit_table`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            other => Err(Error::InvalidPolicy {
                value: other.to_string(),
            }),
        }
    }
}

fn geometry_rank(g: &KernelGeometry) -> usize {
    KernelGeometry::all()
        .iter()
        .position(|x| x == g)
        .unwrap_or(usize::MAX)
}

fn implementation_rank(i: Implementation) -> usize {
    Implementation::ALL.iter().position(|x| *x == i).unwrap()
}

fn sorted_records(records: &[BenchRecord]) -> Vec<&BenchRecord> {
    let mut rs: Vec<&BenchRecord> = records.iter().collect();
    rs.sort_by_key(|r| {
        (
            geometry_rank(&r.geometry),
            implementation_rank(r.implementation),
        )
    });
    rs
}

fn render_cell(record: Option<&&BenchRecord>) -> String {
    match record {
        None => "-".to_string(),
        Some(r) => match r.cycles_per_iter {
            Some(c) => format!("{:.3} ({:.2}c)", r.ns_per_iter, c),
            None => format!("{:.3}", r.ns_per_iter),
        },
    }
}

/// Renders records into a deterministic byte stream: a text grid with one
/// row per geometry (vector width descending, lane width ascending, `-` for
/// missing cells), or a CSV with one row per record.
pub fn emit_table(records: &[BenchRecord], format: TableFormat) -> Vec<u8> {
    let mut out = Vec::new();
    match format {
        TableFormat::Text => emit_text(records, &mut out),
        TableFormat::Csv => emit_csv(records, &mut out),
    }
    out
}

fn emit_text(records: &[BenchRecord], out: &mut Vec<u8>) {
    let rs = sorted_records(records);
    let mut rows: Vec<KernelGeometry> = Vec::new();
    for r in &rs {
        if !rows.contains(&r.geometry) {
            rows.push(r.geometry);
        }
    }

    let header = [
        "geometry",
        "native",
        "emulation",
        "emulation (memory operand)",
    ];
    let mut grid: Vec<[String; 4]> = Vec::new();
    for g in &rows {
        let cell = |imp: Implementation| {
            render_cell(
                rs.iter()
                    .find(|r| r.geometry == *g && r.implementation == imp),
            )
        };
        grid.push([
            g.to_string(),
            cell(TABLE_COLUMNS[0]),
            cell(TABLE_COLUMNS[1]),
            cell(TABLE_COLUMNS[2]),
        ]);
    }

    let mut widths = [0usize; 4];
    for c in 0..4 {
        widths[c] = header[c].len();
        for row in &grid {
            widths[c] = widths[c].max(row[c].len());
        }
    }

    let write_row = |out: &mut Vec<u8>, cells: [&str; 4]| {
        let line = format!(
            "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}\n",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3],
        );
        out.extend_from_slice(line.as_bytes());
    };

    writeln!(out, "ns per inner-loop iteration (cycles in parentheses)").unwrap();
    write_row(out, [header[0], header[1], header[2], header[3]]);
    for row in &grid {
        write_row(out, [&row[0], &row[1], &row[2], &row[3]]);
    }

    // informational: does emulation beat the native instruction per row?
    for g in &rows {
        let find = |imp| {
            rs.iter()
                .find(|r| r.geometry == *g && r.implementation == imp)
        };
        if let (Some(native), Some(emulated)) = (
            find(Implementation::Native),
            find(Implementation::EmulatedFast),
        ) {
            writeln!(
                out,
                "# {g}: emulated<=native {}",
                if emulated.ns_per_iter <= native.ns_per_iter {
                    "yes"
                } else {
                    "no"
                }
            )
            .unwrap();
        }
    }
}

fn emit_csv(records: &[BenchRecord], out: &mut Vec<u8>) {
    out.extend_from_slice(
        b"vector_bits,lane_bits,implementation,ns_per_iter,cycles_per_iter,iterations,seed\r\n",
    );
    for r in sorted_records(records) {
        let cycles = r
            .cycles_per_iter
            .map(|c| format!("{c:.6}"))
            .unwrap_or_default();
        let line = format!(
            "{},{},{},{:.6},{},{},{}\r\n",
            r.geometry.vector_bits(),
            r.geometry.lane_bits(),
            r.implementation,
            r.ns_per_iter,
            cycles,
            r.iterations,
            r.workload.seed,
        );
        out.extend_from_slice(line.as_bytes());
    }
}
