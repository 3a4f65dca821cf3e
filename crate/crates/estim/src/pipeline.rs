//! Run orchestration: execute kernels, collect model outputs, write
//! report artifacts. Every run is isolated; sweeps fan out over a
//! bounded worker pool and results keep the input order.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Context};
use cgra_core::charmodel::FidelityCase;
use cgra_core::power::{kernel_energy, step_power_heatmap, EnergySummary, Heatmap};
use cgra_core::sim::{run, RunOutput};
use cgra_core::timing::{kernel_timings, StepTiming};
use cgra_core::{Architecture, CharacterizationModel, EffectiveModel, Kernel, MemoryImage};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report;
use crate::svg::heatmap_svg;

#[derive(Debug, Clone)]
pub struct Digests {
    pub kernel: String,
    pub arch: String,
    pub characterization: String,
    pub memory_in: String,
    pub semantics: String,
}

/// Everything needed to execute one run.
pub struct PreparedRun {
    pub run_id: String,
    pub kernel: Kernel,
    pub arch: Architecture,
    pub model: CharacterizationModel,
    pub mem: MemoryImage,
    /// Load-time warnings carried into the report.
    pub warnings: Vec<String>,
}

/// A finished run with every model output.
pub struct RunData {
    pub run_id: String,
    pub case: FidelityCase,
    pub max_steps: u32,
    pub kernel: Kernel,
    pub arch: Architecture,
    pub model: CharacterizationModel,
    pub eff: EffectiveModel,
    pub out: RunOutput,
    pub timings: Vec<StepTiming>,
    pub energy: EnergySummary,
    pub digests: Digests,
    pub warnings: Vec<String>,
}

pub fn execute_run(
    prepared: PreparedRun,
    case: FidelityCase,
    max_steps: u32,
) -> CliResult<RunData> {
    let PreparedRun { run_id, kernel, arch, model, mem, mut warnings } = prepared;
    let kernel_warnings = kernel
        .validate(&arch)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("kernel \"{}\" vs architecture", kernel.name))
        .map_err(CliError::input)?;
    warnings.extend(kernel_warnings.iter().map(|w| format!("kernel {}: {w}", kernel.name)));

    let memory_in = report::digest_memory(&mem);
    let out = run(&kernel, &arch, mem, max_steps)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("running \"{run_id}\""))
        .map_err(CliError::runtime)?;
    warnings.extend(out.warnings.iter().map(|w| format!("run {run_id}: {w}")));

    let eff = model.resolve(case);
    let timings = kernel_timings(&out.trace, &arch, &eff);
    let energy = kernel_energy(&out.trace, &timings, &arch, &eff);
    let digests = Digests {
        kernel: report::digest_kernel(&kernel, &arch),
        arch: report::digest_arch(&arch),
        characterization: report::digest_char(&model),
        memory_in,
        semantics: report::digest_semantics(&out.final_mem, &out.trace),
    };
    Ok(RunData {
        run_id,
        case,
        max_steps,
        kernel,
        arch,
        model,
        eff,
        out,
        timings,
        energy,
        digests,
        warnings,
    })
}

/// Executes runs on up to `jobs` worker threads; the result vector keeps
/// the input order regardless of completion order.
pub fn execute_runs(
    prepared: Vec<PreparedRun>,
    case: FidelityCase,
    max_steps: u32,
    jobs: usize,
) -> Vec<CliResult<RunData>> {
    let n = prepared.len();
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return prepared.into_iter().map(|p| execute_run(p, case, max_steps)).collect();
    }

    let queue: Vec<Mutex<Option<PreparedRun>>> =
        prepared.into_iter().map(|p| Mutex::new(Some(p))).collect();
    let slots: Vec<Mutex<Option<CliResult<RunData>>>> =
        (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let p = queue[i].lock().unwrap().take().expect("each run taken once");
                let result = execute_run(p, case, max_steps);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });

    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every slot filled"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
    All,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::All)
    }
    fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::All)
    }
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::runtime)
}

/// Writes the report artifacts for one run and returns the report value.
/// The JSON report is always written; CSVs and SVGs follow the format.
pub fn write_run_outputs(run: &RunData, dir: &Path, format: OutputFormat) -> CliResult<Value> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(CliError::runtime)?;
    let report_value = report::build_report(run);
    write_file(&dir.join("report.json"), &report::to_json_string(&report_value))?;

    if format.csv() {
        write_file(&dir.join("timing.csv"), &report::timing_csv(run))?;
        write_file(&dir.join("energy.csv"), &report::energy_csv(run))?;
        write_file(
            &dir.join("heatmap-kernel.csv"),
            &report::heatmap_csv(&run.energy.kernel_heatmap),
        )?;
        for (pc, map) in &run.energy.instruction_heatmaps {
            write_file(&dir.join(format!("heatmap-instr-{pc}.csv")), &report::heatmap_csv(map))?;
        }
    }
    if format.svg() {
        write_file(&dir.join("heatmap-kernel.svg"), &heatmap_svg(&run.energy.kernel_heatmap))?;
        for (pc, map) in &run.energy.instruction_heatmaps {
            write_file(&dir.join(format!("heatmap-instr-{pc}.svg")), &heatmap_svg(map))?;
        }
    }
    Ok(report_value)
}

/// The per-step power heatmap of one step, for callers that drill in.
pub fn step_heatmap(run: &RunData, step: usize) -> Option<Heatmap> {
    run.energy
        .per_step
        .get(step)
        .map(|s| step_power_heatmap(s, run.arch.clock_period_ns))
}

/// Trace dump: one JSON object per line, one line per step.
pub fn trace_jsonl(out: &RunOutput) -> String {
    let mut text = String::new();
    for record in &out.trace.records {
        let pes: Vec<Value> = record
            .pes
            .iter()
            .map(|((row, col), exec)| {
                let mem = exec.mem.map(|m| {
                    json!({
                        "kind": match m.kind {
                            cgra_core::sim::AccessKind::Load => "load",
                            cgra_core::sim::AccessKind::Store => "store",
                        },
                        "byte_addr": m.byte_addr,
                    })
                });
                json!({
                    "row": row,
                    "col": col,
                    "op": exec.op.mnemonic(),
                    "a": exec.a,
                    "b": exec.b,
                    "result": exec.result,
                    "switched": exec.switched,
                    "mem": mem,
                })
            })
            .collect();
        let line = json!({"step": record.step, "pc": record.pc, "pes": pes});
        text.push_str(&serde_json::to_string(&line).expect("trace serializes"));
        text.push('\n');
    }
    text
}
