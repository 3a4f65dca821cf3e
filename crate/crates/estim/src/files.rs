//! On-disk formats: architecture, characterization, sweep spec, kernels
//! (text or bitstream), and memory images. Unknown JSON keys are rejected
//! everywhere to catch typos early.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context};
use cgra_core::asm::{parse_kernel, DEFAULT_KERNEL_NAME};
use cgra_core::bitstream::decode_bitstream;
use cgra_core::charmodel::CharSpec;
use cgra_core::sim::parse_memory_image;
use cgra_core::{
    Architecture, BusKind, CharacterizationModel, DmaPlacement, Kernel, MemoryImage,
    MemorySubsystem,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::input)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchFile {
    rows: u8,
    cols: u8,
    #[serde(default = "default_torus")]
    torus: bool,
    #[serde(default = "default_registers")]
    registers_per_pe: u8,
    #[serde(default = "default_word_bytes")]
    word_bytes: u32,
    clock_period_ns: f64,
    #[serde(default)]
    mul_latency_cc: Option<u32>,
    mem: MemFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemFile {
    bus: BusFile,
    n_banks: u32,
    bank_words: u32,
    dma: DmaFile,
    mem_latency_cc: u32,
}

#[derive(Debug, Clone, Copy, Deserialize)]
enum BusFile {
    #[serde(rename = "one_to_m")]
    OneToM,
    #[serde(rename = "n_to_m")]
    NToM,
    #[serde(rename = "interleaved")]
    Interleaved,
}

#[derive(Debug, Clone, Copy, Deserialize)]
enum DmaFile {
    #[serde(rename = "per_column")]
    PerColumn,
    #[serde(rename = "per_pe")]
    PerPe,
}

fn default_torus() -> bool {
    true
}
fn default_registers() -> u8 {
    4
}
fn default_word_bytes() -> u32 {
    4
}

fn arch_from_value(value: serde_json::Value, origin: &str) -> CliResult<Architecture> {
    let file: ArchFile = serde_json::from_value(value)
        .with_context(|| format!("parsing architecture {origin}"))
        .map_err(CliError::input)?;
    let arch = Architecture {
        rows: file.rows,
        cols: file.cols,
        torus: file.torus,
        registers_per_pe: file.registers_per_pe,
        word_bytes: file.word_bytes,
        clock_period_ns: file.clock_period_ns,
        mem: MemorySubsystem {
            bus: match file.mem.bus {
                BusFile::OneToM => BusKind::OneToM,
                BusFile::NToM => BusKind::NToM,
                BusFile::Interleaved => BusKind::Interleaved,
            },
            n_banks: file.mem.n_banks,
            bank_words: file.mem.bank_words,
            dma: match file.mem.dma {
                DmaFile::PerColumn => DmaPlacement::PerColumn,
                DmaFile::PerPe => DmaPlacement::PerPE,
            },
            mem_latency_cc: file.mem.mem_latency_cc,
        },
        mul_latency_cc: file.mul_latency_cc,
    };
    arch.validate()
        .with_context(|| format!("validating architecture {origin}"))
        .map_err(CliError::input)?;
    Ok(arch)
}

pub fn load_arch(path: &Path) -> CliResult<Architecture> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(CliError::input)?;
    arch_from_value(value, &path.display().to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CharFile {
    uniform_latency_cc: u32,
    uniform_power_mw: f64,
    #[serde(default)]
    op_latency_cc: BTreeMap<String, u32>,
    #[serde(default)]
    op_power_mw: BTreeMap<String, f64>,
    #[serde(default)]
    idle_power_mw: Option<f64>,
    #[serde(default)]
    decode_power_mw: Option<f64>,
    #[serde(default)]
    decode_cycles: Option<u32>,
    #[serde(default)]
    switch_energy_pj: Option<f64>,
    #[serde(default)]
    src_power_adder_mw: Option<SrcAdderFile>,
    #[serde(default)]
    mul_zero_power_mw: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SrcAdderFile {
    #[serde(default)]
    imm: Option<f64>,
    #[serde(default)]
    reg: Option<f64>,
    #[serde(default)]
    neighbor: Option<f64>,
}

fn opcode_keyed<T: Copy>(
    map: &BTreeMap<String, T>,
    table: &str,
) -> CliResult<BTreeMap<cgra_core::Opcode, T>> {
    let mut out = BTreeMap::new();
    for (name, value) in map {
        let op = cgra_core::Opcode::from_mnemonic(name)
            .ok_or_else(|| CliError::input(anyhow!("{table}: unknown mnemonic \"{name}\"")))?;
        out.insert(op, *value);
    }
    Ok(out)
}

fn char_from_value(value: serde_json::Value, origin: &str) -> CliResult<CharacterizationModel> {
    let file: CharFile = serde_json::from_value(value)
        .with_context(|| format!("parsing characterization {origin}"))
        .map_err(CliError::input)?;
    let adders = file.src_power_adder_mw.as_ref();
    let spec = CharSpec {
        uniform_latency_cc: file.uniform_latency_cc,
        uniform_power_mw: file.uniform_power_mw,
        op_latency_cc: opcode_keyed(&file.op_latency_cc, "op_latency_cc")?,
        op_power_mw: opcode_keyed(&file.op_power_mw, "op_power_mw")?,
        idle_power_mw: file.idle_power_mw,
        decode_power_mw: file.decode_power_mw,
        decode_cycles: file.decode_cycles,
        switch_energy_pj: file.switch_energy_pj,
        src_adder_imm_mw: adders.and_then(|a| a.imm),
        src_adder_reg_mw: adders.and_then(|a| a.reg),
        src_adder_neighbor_mw: adders.and_then(|a| a.neighbor),
        mul_zero_power_mw: file.mul_zero_power_mw,
    };
    spec.build()
        .with_context(|| format!("validating characterization {origin}"))
        .map_err(CliError::input)
}

pub fn load_char(path: &Path) -> CliResult<CharacterizationModel> {
    let value = char_value(path)?;
    char_from_value(value, &path.display().to_string())
}

/// Raw characterization JSON, for sweeps that overlay per-variant edits.
pub fn char_value(path: &Path) -> CliResult<serde_json::Value> {
    serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(CliError::input)
}

/// Characterization built from base JSON plus a variant overlay.
pub fn char_with_overrides(
    base: &serde_json::Value,
    overrides: Option<&serde_json::Value>,
    origin: &str,
) -> CliResult<CharacterizationModel> {
    let mut merged = base.clone();
    if let Some(over) = overrides {
        deep_merge(&mut merged, over);
    }
    char_from_value(merged, origin)
}

/// Recursive object merge: overlay keys replace base keys, except that
/// two objects merge key-by-key. Arrays and scalars replace wholesale.
pub fn deep_merge(base: &mut serde_json::Value, overlay: &serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(base_map), serde_json::Value::Object(over_map)) => {
            for (key, over_value) in over_map {
                match base_map.get_mut(key) {
                    Some(base_value) if base_value.is_object() && over_value.is_object() => {
                        deep_merge(base_value, over_value);
                    }
                    _ => {
                        base_map.insert(key.clone(), over_value.clone());
                    }
                }
            }
        }
        (base, overlay) => *base = overlay.clone(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub variants: Vec<SweepVariant>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepVariant {
    pub name: String,
    /// Architecture file path, relative to the sweep spec's directory.
    pub arch: String,
    /// JSON fragment merged over the base characterization.
    #[serde(default)]
    pub char_overrides: Option<serde_json::Value>,
}

pub struct LoadedVariant {
    pub name: String,
    pub arch: Architecture,
    pub char_model: CharacterizationModel,
}

/// Loads a sweep spec and resolves every variant's architecture and
/// characterization. The first variant is the baseline.
pub fn load_sweep(spec_path: &Path, char_path: &Path) -> CliResult<Vec<LoadedVariant>> {
    let spec: SweepSpec = serde_json::from_str(&read(spec_path)?)
        .with_context(|| format!("parsing sweep spec {}", spec_path.display()))
        .map_err(CliError::input)?;
    if spec.variants.is_empty() {
        return Err(CliError::input(anyhow!(
            "sweep spec {} lists no variants",
            spec_path.display()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for v in &spec.variants {
        if !seen.insert(v.name.as_str()) {
            return Err(CliError::input(anyhow!(
                "sweep spec {}: duplicate variant name \"{}\"",
                spec_path.display(),
                v.name
            )));
        }
    }
    let base_dir = spec_path.parent().unwrap_or_else(|| Path::new("."));
    let base_char = char_value(char_path)?;
    let mut out = Vec::with_capacity(spec.variants.len());
    for variant in spec.variants {
        let arch_path = base_dir.join(&variant.arch);
        let arch = load_arch(&arch_path)?;
        let origin = format!("{} (variant \"{}\")", char_path.display(), variant.name);
        let char_model =
            char_with_overrides(&base_char, variant.char_overrides.as_ref(), &origin)?;
        out.push(LoadedVariant { name: variant.name, arch, char_model });
    }
    Ok(out)
}

/// Kernel loader: `.cgrk` / `.bin` are decoded as bitstream, everything
/// else parses as kernel text. The kernel takes the file stem as name.
/// Returns human-readable warnings alongside.
pub fn load_kernel(path: &Path, arch: &Architecture) -> CliResult<(Kernel, Vec<String>)> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let (mut kernel, warnings) = if matches!(ext, "cgrk" | "bin") {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(CliError::input)?;
        decode_bitstream(&bytes, arch)
            .map_err(|e| anyhow!("{e}"))
            .with_context(|| format!("decoding {}", path.display()))
            .map_err(CliError::input)?
    } else {
        parse_kernel(&read(path)?, arch)
            .map_err(|e| anyhow!("{e}"))
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(CliError::input)?
    };
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        kernel.name = stem.to_string();
    } else {
        kernel.name = DEFAULT_KERNEL_NAME.to_string();
    }
    let warnings = warnings
        .iter()
        .map(|w| format!("{}: {w}", path.display()))
        .collect();
    Ok((kernel, warnings))
}

/// Memory image loader; `None` path means an all-zero image.
pub fn load_mem(
    path: Option<&Path>,
    arch: &Architecture,
) -> CliResult<(MemoryImage, Vec<String>)> {
    match path {
        None => Ok((MemoryImage::zeroed(arch), Vec::new())),
        Some(path) => {
            let (image, warnings) = parse_memory_image(&read(path)?, arch)
                .map_err(|e| anyhow!("{e}"))
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(CliError::input)?;
            let warnings = warnings
                .iter()
                .map(|w| format!("{}: {w}", path.display()))
                .collect();
            Ok((image, warnings))
        }
    }
}
