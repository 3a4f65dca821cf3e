//! cgra-estim: functional simulation plus characterization-driven
//! latency/power estimation for time-multiplexed CGRA kernels.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use cgra_core::asm::render_kernel;
use cgra_core::bitstream::encode_bitstream;
use cgra_core::charmodel::FidelityCase;
use clap::{Parser, Subcommand, ValueEnum};

use cgra_estim::error::{CliError, CliResult};
use cgra_estim::files;
use cgra_estim::pipeline::{self, OutputFormat, PreparedRun};
use cgra_estim::report::{self, CompareRow};

#[derive(Parser)]
#[command(
    name = "cgra-estim",
    version,
    about = "Simulate time-multiplexed CGRA kernels and estimate latency, power, and energy"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn parse_case(s: &str) -> Result<FidelityCase, String> {
    s.parse::<FidelityCase>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Svg,
    All,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Svg => OutputFormat::Svg,
            FormatArg::All => OutputFormat::All,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a kernel functionally and dump the trace and final memory
    Simulate {
        /// Kernel file (.cgra text, or .cgrk/.bin bitstream)
        kernel: PathBuf,
        /// Architecture description JSON
        #[arg(long)]
        arch: PathBuf,
        /// Initial memory image ("0xADDR: value" lines); zeroed if absent
        #[arg(long)]
        mem: Option<PathBuf>,
        /// Abort runaway kernels after this many executed steps
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u32,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Estimate latency, energy, and power for one kernel run
    Estimate {
        /// Kernel file (.cgra text, or .cgrk/.bin bitstream)
        kernel: PathBuf,
        /// Architecture description JSON
        #[arg(long)]
        arch: PathBuf,
        /// Characterization file with per-op latency/power tables
        #[arg(long = "char")]
        char_file: PathBuf,
        /// Initial memory image ("0xADDR: value" lines); zeroed if absent
        #[arg(long)]
        mem: Option<PathBuf>,
        /// Fidelity case i..vi (cumulative model terms)
        #[arg(long, default_value = "vi", value_parser = parse_case)]
        case: FidelityCase,
        /// Abort runaway kernels after this many executed steps
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u32,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Artifact formats to write alongside report.json
        #[arg(long, value_enum, default_value_t = FormatArg::All)]
        format: FormatArg,
    },
    /// Run a kernel across named hardware variants and compare them
    Sweep {
        /// Kernel file (.cgra text, or .cgrk/.bin bitstream)
        kernel: PathBuf,
        /// Sweep spec JSON: named arch variants, first entry is baseline
        #[arg(long)]
        spec: PathBuf,
        /// Characterization file with per-op latency/power tables
        #[arg(long = "char")]
        char_file: PathBuf,
        /// Initial memory image ("0xADDR: value" lines); zeroed if absent
        #[arg(long)]
        mem: Option<PathBuf>,
        /// Fidelity case i..vi (cumulative model terms)
        #[arg(long, default_value = "vi", value_parser = parse_case)]
        case: FidelityCase,
        /// Abort runaway kernels after this many executed steps
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u32,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Artifact formats to write alongside report.json
        #[arg(long, value_enum, default_value_t = FormatArg::All)]
        format: FormatArg,
        /// Worker threads for variant runs (default: available cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Normalize existing run reports against a baseline
    Compare {
        /// report.json files produced by estimate or sweep
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Baseline run id (default: the first report)
        #[arg(long)]
        baseline: Option<String>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Encode a kernel into its configuration bitstream
    Encode {
        /// Kernel file (.cgra text, or .cgrk/.bin bitstream)
        kernel: PathBuf,
        /// Architecture description JSON
        #[arg(long)]
        arch: PathBuf,
        /// Output bitstream file
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a bitstream back into canonical kernel text
    Decode {
        /// Bitstream file to decode
        bitstream: PathBuf,
        /// Architecture description JSON
        #[arg(long)]
        arch: PathBuf,
        /// Output text file (stdout if absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate input files without running anything
    Lint {
        /// Architecture description JSON
        #[arg(long)]
        arch: Option<PathBuf>,
        /// Characterization file with per-op latency/power tables
        #[arg(long = "char")]
        char_file: Option<PathBuf>,
        /// Kernel to check (requires --arch)
        #[arg(long)]
        kernel: Option<PathBuf>,
    },
}

/// Prints to stdout, exiting quietly when the reader has gone away
/// (e.g. the output is piped through `head`).
fn say(text: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if out.write_fmt(text).is_err() {
        std::process::exit(0);
    }
}

macro_rules! sayln {
    ($($arg:tt)*) => { say(format_args!("{}\n", format_args!($($arg)*))) };
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // clap's own exit code for bad usage is 2; this tool reserves
            // 2 for input validation, so usage errors map to 1.
            std::process::exit(if err.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(err) = dispatch(cli.cmd) {
        match &err {
            CliError::Usage(msg) => eprintln!("usage error: {msg}"),
            CliError::Input(e) => eprintln!("error: {e:#}"),
            CliError::Runtime(e) => eprintln!("error: {e:#}"),
        }
        std::process::exit(err.exit_code());
    }
}

fn print_warnings(warnings: &[String]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

fn dispatch(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Simulate { kernel, arch, mem, max_steps, out } => {
            simulate(&kernel, &arch, mem.as_deref(), max_steps, &out)
        }
        Cmd::Estimate { kernel, arch, char_file, mem, case, max_steps, out, format } => {
            estimate(&kernel, &arch, &char_file, mem.as_deref(), case, max_steps, &out, format.into())
        }
        Cmd::Sweep { kernel, spec, char_file, mem, case, max_steps, out, format, jobs } => sweep(
            &kernel,
            &spec,
            &char_file,
            mem.as_deref(),
            case,
            max_steps,
            &out,
            format.into(),
            jobs,
        ),
        Cmd::Compare { reports, baseline, out } => compare(&reports, baseline.as_deref(), &out),
        Cmd::Encode { kernel, arch, out } => encode(&kernel, &arch, &out),
        Cmd::Decode { bitstream, arch, out } => decode(&bitstream, &arch, out.as_deref()),
        Cmd::Lint { arch, char_file, kernel } => {
            lint(arch.as_deref(), char_file.as_deref(), kernel.as_deref())
        }
    }
}

fn write_out(path: &Path, content: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))
            .map_err(CliError::runtime)?;
    }
    std::fs::write(path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::runtime)
}

fn simulate(
    kernel_path: &Path,
    arch_path: &Path,
    mem_path: Option<&Path>,
    max_steps: u32,
    out_dir: &Path,
) -> CliResult<()> {
    let arch = files::load_arch(arch_path)?;
    let (kernel, mut warnings) = files::load_kernel(kernel_path, &arch)?;
    let (mem, mem_warnings) = files::load_mem(mem_path, &arch)?;
    warnings.extend(mem_warnings);

    let out = cgra_core::sim::run(&kernel, &arch, mem, max_steps)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("running \"{}\"", kernel.name))
        .map_err(CliError::runtime)?;
    warnings.extend(out.warnings.iter().map(|w| format!("run {}: {w}", kernel.name)));
    print_warnings(&warnings);

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(CliError::runtime)?;
    write_out(&out_dir.join("trace.jsonl"), &pipeline::trace_jsonl(&out))?;
    write_out(&out_dir.join("final-mem.txt"), &cgra_core::sim::dump_memory_image(&out.final_mem))?;

    sayln!(
        "{}: steps={} termination={} semantics={} out={}",
        kernel.name,
        out.trace.records.len(),
        report::termination_str(out.trace.termination),
        report::digest_semantics(&out.final_mem, &out.trace),
        out_dir.display(),
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    kernel_path: &Path,
    arch_path: &Path,
    char_path: &Path,
    mem_path: Option<&Path>,
    case: FidelityCase,
    max_steps: u32,
    out_dir: &Path,
    format: OutputFormat,
) -> CliResult<()> {
    let arch = files::load_arch(arch_path)?;
    let model = files::load_char(char_path)?;
    let (kernel, mut warnings) = files::load_kernel(kernel_path, &arch)?;
    let (mem, mem_warnings) = files::load_mem(mem_path, &arch)?;
    warnings.extend(mem_warnings);

    let run_id = format!("{}-case-{}", kernel.name, case.as_str());
    let prepared = PreparedRun { run_id, kernel, arch, model, mem, warnings };
    let run = pipeline::execute_run(prepared, case, max_steps)?;
    print_warnings(&run.warnings);
    let report_value = pipeline::write_run_outputs(&run, out_dir, format)?;
    sayln!("{}", report::summary_line(&report_value));
    sayln!("report: {}", out_dir.join("report.json").display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    kernel_path: &Path,
    spec_path: &Path,
    char_path: &Path,
    mem_path: Option<&Path>,
    case: FidelityCase,
    max_steps: u32,
    out_dir: &Path,
    format: OutputFormat,
    jobs: Option<usize>,
) -> CliResult<()> {
    let variants = files::load_sweep(spec_path, char_path)?;
    let mut prepared = Vec::with_capacity(variants.len());
    for variant in variants {
        // Kernel and memory are re-validated against each variant's
        // architecture; capacities may differ between variants.
        let (kernel, mut warnings) = files::load_kernel(kernel_path, &variant.arch)?;
        let (mem, mem_warnings) = files::load_mem(mem_path, &variant.arch)?;
        warnings.extend(mem_warnings);
        prepared.push(PreparedRun {
            run_id: variant.name,
            kernel,
            arch: variant.arch,
            model: variant.char_model,
            mem,
            warnings,
        });
    }

    let jobs = jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let results = pipeline::execute_runs(prepared, case, max_steps, jobs);

    let mut rows = Vec::with_capacity(results.len());
    for result in results {
        let run = result?;
        print_warnings(&run.warnings);
        let report_value = pipeline::write_run_outputs(&run, &out_dir.join(&run.run_id), format)?;
        sayln!("{}", report::summary_line(&report_value));
        rows.push(CompareRow::from_report(&report_value).map_err(CliError::runtime)?);
    }

    let comparison = report::build_comparison(&rows, 0);
    print_warnings(&comparison.warnings);
    write_out(&out_dir.join("comparison.json"), &report::to_json_string(&comparison.json))?;
    write_out(&out_dir.join("comparison.csv"), &comparison.csv)?;
    sayln!("comparison: {}", out_dir.join("comparison.json").display());
    Ok(())
}

fn compare(report_paths: &[PathBuf], baseline: Option<&str>, out_dir: &Path) -> CliResult<()> {
    let mut rows = Vec::with_capacity(report_paths.len());
    for path in report_paths {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(CliError::input)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(CliError::input)?;
        let row = CompareRow::from_report(&value)
            .with_context(|| format!("reading report {}", path.display()))
            .map_err(CliError::input)?;
        rows.push(row);
    }
    let baseline_idx = match baseline {
        None => 0,
        Some(id) => rows
            .iter()
            .position(|r| r.run_id == id)
            .ok_or_else(|| CliError::usage(format!("baseline run id \"{id}\" not among the reports")))?,
    };

    let comparison = report::build_comparison(&rows, baseline_idx);
    print_warnings(&comparison.warnings);
    write_out(&out_dir.join("comparison.json"), &report::to_json_string(&comparison.json))?;
    write_out(&out_dir.join("comparison.csv"), &comparison.csv)?;
    sayln!("comparison: {}", out_dir.join("comparison.json").display());
    Ok(())
}

fn encode(kernel_path: &Path, arch_path: &Path, out_path: &Path) -> CliResult<()> {
    let arch = files::load_arch(arch_path)?;
    let (kernel, warnings) = files::load_kernel(kernel_path, &arch)?;
    print_warnings(&warnings);
    let bytes = encode_bitstream(&kernel, &arch)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("encoding {}", kernel_path.display()))
        .map_err(CliError::input)?;
    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))
            .map_err(CliError::runtime)?;
    }
    std::fs::write(out_path, &bytes)
        .with_context(|| format!("writing {}", out_path.display()))
        .map_err(CliError::runtime)?;
    sayln!(
        "{}: {} instructions, {} bytes -> {}",
        kernel.name,
        kernel.len(),
        bytes.len(),
        out_path.display(),
    );
    Ok(())
}

fn decode(bitstream_path: &Path, arch_path: &Path, out_path: Option<&Path>) -> CliResult<()> {
    let arch = files::load_arch(arch_path)?;
    let bytes = std::fs::read(bitstream_path)
        .with_context(|| format!("reading {}", bitstream_path.display()))
        .map_err(CliError::input)?;
    let (kernel, warnings) = cgra_core::bitstream::decode_bitstream(&bytes, &arch)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("decoding {}", bitstream_path.display()))
        .map_err(CliError::input)?;
    print_warnings(&warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>());
    let text = render_kernel(&kernel);
    match out_path {
        Some(path) => {
            write_out(path, &text)?;
            sayln!("{} instructions -> {}", kernel.len(), path.display());
        }
        None => say(format_args!("{text}")),
    }
    Ok(())
}

fn lint(
    arch_path: Option<&Path>,
    char_path: Option<&Path>,
    kernel_path: Option<&Path>,
) -> CliResult<()> {
    if arch_path.is_none() && char_path.is_none() && kernel_path.is_none() {
        return Err(CliError::usage(
            "nothing to lint: pass --arch, --char, and/or --kernel",
        ));
    }
    if kernel_path.is_some() && arch_path.is_none() {
        return Err(CliError::usage("--kernel needs --arch to check the grid shape"));
    }
    let arch = match arch_path {
        Some(path) => {
            let arch = files::load_arch(path)?;
            sayln!("{}: ok", path.display());
            Some(arch)
        }
        None => None,
    };
    if let Some(path) = char_path {
        files::load_char(path)?;
        sayln!("{}: ok", path.display());
    }
    if let Some(path) = kernel_path {
        let arch = arch.as_ref().expect("checked above");
        let (kernel, warnings) = files::load_kernel(path, arch)?;
        print_warnings(&warnings);
        sayln!("{}: ok ({} instructions)", path.display(), kernel.len());
    }
    Ok(())
}
