//! Report rendering. The JSON report is the single source of truth;
//! CSVs, SVGs, and the printed summary are projections of the same
//! rounded values, so every artifact shows identical digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cgra_core::bitstream::encode_bitstream;
use cgra_core::power::{HeatScope, HeatUnit, Heatmap};
use cgra_core::sim::Trace;
use cgra_core::{Architecture, CharacterizationModel, Kernel, MemoryImage, Termination};
use serde_json::{json, Value};
use sha2::{Digest as _, Sha256};

use crate::pipeline::RunData;

/// Fixed formatting at 6 significant digits. Uses plain decimal notation
/// for exponents -4..=5 and scientific outside, trailing zeros stripped.
/// Every output parses as a JSON number.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    assert!(x.is_finite(), "report values must be finite, got {x}");
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always carries an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-4..6).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        // Explicit exponent sign, matching serde_json's Number rendering so
        // the same value prints identically in CSV and JSON artifacts.
        return format!("{mantissa}e{exp:+}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

/// 6-significant-digit JSON number.
pub fn num6(x: f64) -> Value {
    Value::Number(fmt_sig6(x).parse().expect("fmt_sig6 yields JSON numbers"))
}

fn sha_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    let mut out = String::with_capacity(64 + 7);
    out.push_str("sha256:");
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// Digest of the kernel's canonical bitstream; independent of its name.
pub fn digest_kernel(kernel: &Kernel, arch: &Architecture) -> String {
    let bytes = encode_bitstream(kernel, arch).expect("loaded kernels encode");
    sha_hex(&bytes)
}

pub fn digest_arch(arch: &Architecture) -> String {
    let text = format!(
        "arch;rows={};cols={};torus={};regs={};word_bytes={};clock_ns={};mul_cc={:?};\
         bus={:?};n_banks={};bank_words={};dma={:?};mem_cc={}",
        arch.rows,
        arch.cols,
        arch.torus,
        arch.registers_per_pe,
        arch.word_bytes,
        fmt_sig6(arch.clock_period_ns),
        arch.mul_latency_cc,
        arch.mem.bus,
        arch.mem.n_banks,
        arch.mem.bank_words,
        arch.mem.dma,
        arch.mem.mem_latency_cc,
    );
    sha_hex(text.as_bytes())
}

pub fn digest_char(model: &CharacterizationModel) -> String {
    let join_f = |xs: &[f64]| xs.iter().map(|x| fmt_sig6(*x)).collect::<Vec<_>>().join(",");
    let join_u = |xs: &[u32]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let text = format!(
        "char;ulat={};upow={};lat=[{}];pow=[{}];idle={};decp={};decc={};switch={};adders=[{}];mz={}",
        model.uniform_latency_cc,
        fmt_sig6(model.uniform_power_mw),
        join_u(&model.op_latency_cc),
        join_f(&model.op_power_mw),
        fmt_sig6(model.idle_power_mw),
        fmt_sig6(model.decode_power_mw),
        model.decode_cycles,
        fmt_sig6(model.switch_energy_pj),
        join_f(&model.src_adder_mw),
        fmt_sig6(model.mul_zero_power_mw),
    );
    sha_hex(text.as_bytes())
}

pub fn digest_memory(mem: &MemoryImage) -> String {
    let mut bytes = Vec::with_capacity(mem.words().len() * 4);
    for word in mem.words() {
        bytes.extend_from_slice(&word.to_le_bytes());
    }
    sha_hex(&bytes)
}

/// Digest of what the run DID: final memory, pc path, termination.
/// Identical across fidelity cases and hardware variants of one kernel.
pub fn digest_semantics(final_mem: &MemoryImage, trace: &Trace) -> String {
    let mut bytes = Vec::with_capacity(final_mem.words().len() * 4 + trace.records.len() * 4 + 1);
    for word in final_mem.words() {
        bytes.extend_from_slice(&word.to_le_bytes());
    }
    for record in &trace.records {
        bytes.extend_from_slice(&record.pc.to_le_bytes());
    }
    bytes.push(match trace.termination {
        Termination::Exited => 0,
        Termination::MaxSteps => 1,
    });
    sha_hex(&bytes)
}

pub fn termination_str(t: Termination) -> &'static str {
    match t {
        Termination::Exited => "exited",
        Termination::MaxSteps => "max_steps",
    }
}

fn unit_str(unit: HeatUnit) -> &'static str {
    match unit {
        HeatUnit::AvgPowerMw => "avg_power_mw",
        HeatUnit::EnergyPj => "energy_pj",
    }
}

fn scope_str(scope: HeatScope) -> String {
    match scope {
        HeatScope::Kernel => "kernel".to_string(),
        HeatScope::Step(n) => format!("step:{n}"),
        HeatScope::Instruction(pc) => format!("instruction:{pc}"),
    }
}

fn grid_json(map: &Heatmap) -> Value {
    let rows: Vec<Value> = (0..map.grid.rows())
        .map(|r| {
            Value::Array((0..map.grid.cols()).map(|c| num6(*map.grid.get(r, c))).collect())
        })
        .collect();
    Value::Array(rows)
}

/// Aggregates of the per-step table keyed by pc, in pc order.
struct InstructionRow {
    pc: u32,
    visits: u64,
    cycles: u64,
    energy_pj: f64,
}

fn instruction_rows(run: &RunData) -> Vec<InstructionRow> {
    let mut by_pc: BTreeMap<u32, InstructionRow> = BTreeMap::new();
    for step in &run.energy.per_step {
        let row = by_pc.entry(step.pc).or_insert(InstructionRow {
            pc: step.pc,
            visits: 0,
            cycles: 0,
            energy_pj: 0.0,
        });
        row.visits += 1;
        row.cycles += step.total_cc as u64;
        row.energy_pj += step.total_pj();
    }
    by_pc.into_values().collect()
}

pub fn build_report(run: &RunData) -> Value {
    let clk = run.arch.clock_period_ns;
    let mut totals = [0.0f64; 5];
    for step in &run.energy.per_step {
        for b in step.per_pe.cells() {
            totals[0] += b.decode_pj;
            totals[1] += b.active_pj;
            totals[2] += b.idle_pj;
            totals[3] += b.switch_pj;
            totals[4] += b.operand_adder_pj;
        }
    }

    let per_step: Vec<Value> = run
        .energy
        .per_step
        .iter()
        .map(|s| {
            let span_ns = s.total_cc as f64 * clk;
            json!({
                "step": s.step,
                "pc": s.pc,
                "cycles": s.total_cc,
                "energy_pj": num6(s.total_pj()),
                "avg_power_mw": num6(if span_ns > 0.0 { s.total_pj() / span_ns } else { 0.0 }),
            })
        })
        .collect();

    let per_instruction: Vec<Value> = instruction_rows(run)
        .iter()
        .map(|row| {
            let span_ns = row.cycles as f64 * clk;
            json!({
                "pc": row.pc,
                "visits": row.visits,
                "cycles": row.cycles,
                "energy_pj": num6(row.energy_pj),
                "avg_power_mw": num6(if span_ns > 0.0 { row.energy_pj / span_ns } else { 0.0 }),
            })
        })
        .collect();

    let instr_heatmaps: Vec<Value> = run
        .energy
        .instruction_heatmaps
        .iter()
        .map(|(pc, map)| json!({"pc": pc, "unit": unit_str(map.unit), "grid": grid_json(map)}))
        .collect();

    json!({
        "schema": "cgra-estim-report/1",
        "run_id": run.run_id,
        "fidelity_case": run.case.as_str(),
        "kernel": {
            "name": run.kernel.name,
            "instructions": run.kernel.len(),
            "grid": format!("{}x{}", run.kernel.rows, run.kernel.cols),
        },
        "digests": {
            "kernel": run.digests.kernel,
            "arch": run.digests.arch,
            "characterization": run.digests.characterization,
            "memory_in": run.digests.memory_in,
            "semantics": run.digests.semantics,
        },
        "execution": {
            "steps": run.out.trace.records.len(),
            "termination": termination_str(run.out.trace.termination),
            "max_steps": run.max_steps,
        },
        "latency": {
            "cycles": run.energy.total_cc,
            "ns": num6(run.energy.total_ns),
        },
        "energy_pj": {
            "total": num6(run.energy.total_pj),
            "decode": num6(totals[0]),
            "active": num6(totals[1]),
            "idle": num6(totals[2]),
            "switch": num6(totals[3]),
            "operand_adder": num6(totals[4]),
        },
        "avg_power_mw": num6(run.energy.avg_power_mw),
        "per_step": per_step,
        "per_instruction": per_instruction,
        "heatmaps": {
            "kernel": {
                "unit": unit_str(run.energy.kernel_heatmap.unit),
                "grid": grid_json(&run.energy.kernel_heatmap),
            },
            "per_instruction": instr_heatmaps,
        },
        "warnings": run.warnings,
    })
}

/// One-line summary whose digits are pulled from the report itself.
pub fn summary_line(report: &Value) -> String {
    let s = |v: &Value| match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    format!(
        "{}: case={} steps={} cycles={} time_ns={} energy_pj={} avg_power_mw={} ({})",
        s(&report["run_id"]),
        s(&report["fidelity_case"]),
        s(&report["execution"]["steps"]),
        s(&report["latency"]["cycles"]),
        s(&report["latency"]["ns"]),
        s(&report["energy_pj"]["total"]),
        s(&report["avg_power_mw"]),
        s(&report["execution"]["termination"]),
    )
}

pub fn timing_csv(run: &RunData) -> String {
    let mut out = String::from("step,pc,pe_row,pe_col,decode_cc,stall_cc,exec_cc,idle_cc,total_cc\n");
    for (record, timing) in run.out.trace.records.iter().zip(&run.timings) {
        for ((row, col), t) in timing.per_pe.iter() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                record.step, record.pc, row, col, t.decode_cc, t.stall_cc, t.exec_cc, t.idle_cc,
                t.total_cc(),
            );
        }
    }
    out
}

pub fn energy_csv(run: &RunData) -> String {
    let mut out = String::from(
        "step,pc,pe_row,pe_col,decode_cc,stall_cc,exec_cc,idle_cc,total_cc,\
         decode_pj,active_pj,idle_pj,switch_pj,operand_adder_pj,total_pj\n",
    );
    for ((record, timing), step_energy) in run
        .out
        .trace
        .records
        .iter()
        .zip(&run.timings)
        .zip(&run.energy.per_step)
    {
        for ((row, col), t) in timing.per_pe.iter() {
            let b = step_energy.per_pe.get(row, col);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                record.step,
                record.pc,
                row,
                col,
                t.decode_cc,
                t.stall_cc,
                t.exec_cc,
                t.idle_cc,
                t.total_cc(),
                fmt_sig6(b.decode_pj),
                fmt_sig6(b.active_pj),
                fmt_sig6(b.idle_pj),
                fmt_sig6(b.switch_pj),
                fmt_sig6(b.operand_adder_pj),
                fmt_sig6(b.total_pj()),
            );
        }
    }
    out
}

pub fn heatmap_csv(map: &Heatmap) -> String {
    let mut out = format!("# unit={} scope={}\n", unit_str(map.unit), scope_str(map.scope));
    for row in 0..map.grid.rows() {
        let cells: Vec<String> =
            (0..map.grid.cols()).map(|col| fmt_sig6(*map.grid.get(row, col))).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Totals of one run, as comparison input.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub run_id: String,
    pub semantics_digest: String,
    pub latency_cc: u64,
    pub latency_ns: f64,
    pub energy_pj: f64,
    pub avg_power_mw: f64,
}

impl CompareRow {
    pub fn from_report(report: &Value) -> anyhow::Result<CompareRow> {
        let field = |v: &Value, what: &str| -> anyhow::Result<f64> {
            v.as_f64().ok_or_else(|| anyhow::anyhow!("report field {what} is not a number"))
        };
        Ok(CompareRow {
            run_id: report["run_id"]
                .as_str()
                .ok_or_else(|| anyhow::anyhow!("report has no run_id"))?
                .to_string(),
            semantics_digest: report["digests"]["semantics"].as_str().unwrap_or("").to_string(),
            latency_cc: report["latency"]["cycles"]
                .as_u64()
                .ok_or_else(|| anyhow::anyhow!("report field latency.cycles is not an integer"))?,
            latency_ns: field(&report["latency"]["ns"], "latency.ns")?,
            energy_pj: field(&report["energy_pj"]["total"], "energy_pj.total")?,
            avg_power_mw: field(&report["avg_power_mw"], "avg_power_mw")?,
        })
    }
}

pub struct Comparison {
    pub json: Value,
    pub csv: String,
    pub warnings: Vec<String>,
}

/// Normalizes every run to the baseline row. Ratios are variant/baseline;
/// reductions are (baseline - variant)/baseline in percent.
pub fn build_comparison(rows: &[CompareRow], baseline_idx: usize) -> Comparison {
    let base = &rows[baseline_idx];
    let mut warnings = Vec::new();
    for row in rows {
        if row.semantics_digest != base.semantics_digest {
            warnings.push(format!(
                "run {} has a different semantics digest than baseline {}; \
                 the kernels do not compute the same thing",
                row.run_id, base.run_id
            ));
        }
    }

    let ratio = |v: f64, b: f64| if b != 0.0 { v / b } else { 0.0 };
    let reduction = |v: f64, b: f64| if b != 0.0 { (b - v) / b * 100.0 } else { 0.0 };

    let mut csv = String::from(
        "run_id,latency_cc,latency_ns,energy_pj,avg_power_mw,latency_ratio,energy_ratio,\
         power_ratio,latency_reduction_pct,energy_reduction_pct,power_reduction_pct\n",
    );
    let mut runs = Vec::with_capacity(rows.len());
    for row in rows {
        let lat_ratio = ratio(row.latency_ns, base.latency_ns);
        let energy_ratio = ratio(row.energy_pj, base.energy_pj);
        let power_ratio = ratio(row.avg_power_mw, base.avg_power_mw);
        let lat_red = reduction(row.latency_ns, base.latency_ns);
        let energy_red = reduction(row.energy_pj, base.energy_pj);
        let power_red = reduction(row.avg_power_mw, base.avg_power_mw);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.run_id,
            row.latency_cc,
            fmt_sig6(row.latency_ns),
            fmt_sig6(row.energy_pj),
            fmt_sig6(row.avg_power_mw),
            fmt_sig6(lat_ratio),
            fmt_sig6(energy_ratio),
            fmt_sig6(power_ratio),
            fmt_sig6(lat_red),
            fmt_sig6(energy_red),
            fmt_sig6(power_red),
        );
        runs.push(json!({
            "run_id": row.run_id,
            "latency_cc": row.latency_cc,
            "latency_ns": num6(row.latency_ns),
            "energy_pj": num6(row.energy_pj),
            "avg_power_mw": num6(row.avg_power_mw),
            "latency_ratio": num6(lat_ratio),
            "energy_ratio": num6(energy_ratio),
            "power_ratio": num6(power_ratio),
            "latency_reduction_pct": num6(lat_red),
            "energy_reduction_pct": num6(energy_red),
            "power_reduction_pct": num6(power_red),
        }));
    }

    let json = json!({
        "schema": "cgra-estim-comparison/1",
        "baseline": base.run_id,
        "runs": runs,
        "warnings": warnings,
    });
    Comparison { json, csv, warnings }
}

/// Serialized form used for every JSON artifact.
pub fn to_json_string(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report values serialize");
    text.push('\n');
    text
}
