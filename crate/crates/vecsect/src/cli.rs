//! Command-line interface: intersect, size, gen, bench and selftest.
//!
//! Exit codes: 0 success, 1 validation error (bad arguments, malformed or
//! mismatched inputs, unsupported forced implementation), 2 internal failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    emit_table, measure_cell, BenchRecord, TableFormat, DEFAULT_REPS, TABLE_COLUMNS,
};
use crate::datagen::{generate_runs, read_run_file, write_run_file, WorkloadSpec};
use crate::dispatch::{
    detect_capabilities, policy_from_env, select_kernel, Implementation, KernelChoice, Policy,
};
use crate::driver::{intersect_runs, intersect_size};
use crate::error::{Error, Result};
use crate::geometry::KernelGeometry;
use crate::selftest;

#[derive(Parser)]
#[command(
    name = "vecsect",
    about = "Sorted-integer set intersection on emulated vector intersection masks",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct KernelArgs {
    /// Kernel geometry as <vector_bits>x<lane_bits>.
    #[arg(long, default_value = "512x32")]
    geometry: String,

    /// Implementation: auto, native, fast, naive, memory or scalar.
    #[arg(long = "impl", default_value = "auto")]
    implementation: String,
}

impl KernelArgs {
    fn geometry(&self) -> Result<KernelGeometry> {
        self.geometry.parse()
    }

    /// Resolves the requested implementation, honoring VECSECT_FORCE.
    fn choice(&self) -> Result<KernelChoice> {
        let geometry = self.geometry()?;
        let caps = detect_capabilities();
        if let Some(policy) = policy_from_env()? {
            return select_kernel(geometry, policy, &caps);
        }
        match self.implementation.as_str() {
            "auto" => select_kernel(geometry, Policy::Auto, &caps),
            "native" => select_kernel(geometry, Policy::ForceNative, &caps),
            "scalar" => select_kernel(geometry, Policy::ForceScalar, &caps),
            name => KernelChoice::validated(geometry, name.parse()?, &caps),
        }
    }
}

#[derive(Args)]
struct WorkloadArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long = "len-a", default_value_t = 32_768)]
    len_a: u64,

    #[arg(long = "len-b", default_value_t = 32_768)]
    len_b: u64,

    /// Shared fraction of the shorter run, in [0, 1].
    #[arg(long, default_value_t = 0.3)]
    overlap: f64,

    /// Largest generated value; defaults to the lane maximum.
    #[arg(long = "universe-max")]
    universe_max: Option<u64>,
}

impl WorkloadArgs {
    fn spec(&self, lane_bits: u16) -> WorkloadSpec {
        let mut spec =
            WorkloadSpec::new(self.seed, lane_bits, self.len_a, self.len_b, self.overlap);
        if let Some(max) = self.universe_max {
            spec.universe_max = max;
        }
        spec
    }
}

#[derive(Subcommand)]
enum Command {
    /// Intersect two run files into a third.
    Intersect {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Print the intersection size of two run files.
    Size {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Generate a seeded workload into two run files.
    Gen {
        out_a: PathBuf,
        out_b: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        workload: WorkloadArgs,
    },
    /// Measure the per-iteration cost grid and print the table.
    Bench {
        /// Restrict to one geometry; default is all nine.
        #[arg(long)]
        geometry: Option<String>,
        /// Restrict to one implementation; default is the three table columns.
        #[arg(long = "impl")]
        implementation: Option<String>,
        #[arg(long, default_value_t = DEFAULT_REPS)]
        reps: usize,
        #[arg(long, default_value = "text")]
        format: String,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        workload: WorkloadArgs,
    },
    /// Run the oracle-equivalence and driver-differential suites.
    Selftest {
        /// Random pairs per geometry.
        #[arg(long, default_value_t = 20_000)]
        pairs: u64,
        /// Seeded driver workloads.
        #[arg(long, default_value_t = 120)]
        workloads: u64,
    },
}

fn check_run_width(geometry: KernelGeometry, lane_bits: u16) -> Result<()> {
    if geometry.lane_bits() != lane_bits {
        return Err(Error::LaneWidthMismatch {
            expected: geometry.lane_bits(),
            got: lane_bits,
        });
    }
    Ok(())
}

fn cmd_intersect(a: &Path, b: &Path, out: &Path, kernel: &KernelArgs) -> Result<()> {
    let choice = kernel.choice()?;
    let run_a = read_run_file(a)?;
    let run_b = read_run_file(b)?;
    check_run_width(choice.geometry, run_a.lane_bits())?;
    check_run_width(choice.geometry, run_b.lane_bits())?;
    let result = intersect_runs(&run_a, &run_b, &choice)?;
    write_run_file(out, result.values.as_ref().expect("materialized"))?;
    println!("{}", result.count);
    Ok(())
}

fn cmd_size(a: &Path, b: &Path, kernel: &KernelArgs) -> Result<()> {
    let choice = kernel.choice()?;
    let run_a = read_run_file(a)?;
    let run_b = read_run_file(b)?;
    check_run_width(choice.geometry, run_a.lane_bits())?;
    check_run_width(choice.geometry, run_b.lane_bits())?;
    println!("{}", intersect_size(&run_a, &run_b, &choice)?);
    Ok(())
}

fn cmd_gen(
    out_a: &Path,
    out_b: &Path,
    kernel: &KernelArgs,
    workload: &WorkloadArgs,
) -> Result<()> {
    let geometry = kernel.geometry()?;
    let spec = workload.spec(geometry.lane_bits());
    let (a, b, expected) = generate_runs(&spec)?;
    write_run_file(out_a, &a)?;
    write_run_file(out_b, &b)?;
    println!("{expected}");
    Ok(())
}

fn bench_grid(
    geometry: Option<KernelGeometry>,
    implementation: Option<Implementation>,
) -> Vec<(KernelGeometry, Implementation)> {
    let geometries: Vec<KernelGeometry> = match geometry {
        Some(g) => vec![g],
        None => KernelGeometry::all().to_vec(),
    };
    let implementations: Vec<Implementation> = match implementation {
        Some(i) => vec![i],
        None => TABLE_COLUMNS.to_vec(),
    };
    let mut grid = Vec::new();
    for g in &geometries {
        for imp in &implementations {
            grid.push((*g, *imp));
        }
    }
    grid
}

fn cmd_bench(
    geometry: &Option<String>,
    implementation: &Option<String>,
    reps: usize,
    format: &str,
    out: &Option<PathBuf>,
    workload: &WorkloadArgs,
) -> Result<()> {
    let geometry = geometry.as_deref().map(str::parse).transpose()?;
    let implementation = implementation.as_deref().map(str::parse).transpose()?;
    let format: TableFormat = format.parse()?;

    let caps = detect_capabilities();
    eprintln!(
        "# vectors: 512={} 256={} 128={} native={}",
        caps.has_512bit_vectors,
        caps.has_256bit_vectors,
        caps.has_128bit_vectors,
        caps.has_native_2intersect
    );

    let mut records: Vec<BenchRecord> = Vec::new();
    for (g, imp) in bench_grid(geometry, implementation) {
        let spec = workload.spec(g.lane_bits());
        match measure_cell(g, imp, &spec, reps) {
            Ok(r) => {
                eprintln!("# measured {g} {imp}: {:.3} ns/iter", r.ns_per_iter);
                records.push(r);
            }
            // unavailable cells render as dashes
            Err(Error::UnsupportedCapability { .. }) | Err(Error::UnsupportedGeometry { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let bytes = emit_table(&records, format);
    match out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

fn classify(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 2,
        _ => 1,
    }
}

/// Parses argv and runs the selected command; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Intersect { a, b, out, kernel } => cmd_intersect(a, b, out, kernel),
        Command::Size { a, b, kernel } => cmd_size(a, b, kernel),
        Command::Gen {
            out_a,
            out_b,
            kernel,
            workload,
        } => cmd_gen(out_a, out_b, kernel, workload),
        Command::Bench {
            geometry,
            implementation,
            reps,
            format,
            out,
            workload,
        } => cmd_bench(geometry, implementation, *reps, format, out, workload),
        Command::Selftest { pairs, workloads } => {
            let mut stdout = std::io::stdout();
            return if selftest::run(*pairs, *workloads, &mut stdout) {
                0
            } else {
                1
            };
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}
