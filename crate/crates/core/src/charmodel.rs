//! Characterization profile and the cumulative fidelity ladder that selects
//! which of its terms are live.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::isa::{Opcode, SrcClass};

/// Model fidelity, lowest to highest. Each case keeps everything the
/// previous one models and adds one non-ideality:
/// I uniform latency and power, II per-op latency, III memory contention,
/// IV per-op power, V idle and decode power, VI switch energy, operand-source
/// adders, and multiply-by-zero power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FidelityCase {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl FidelityCase {
    pub const ALL: [FidelityCase; 6] = [
        FidelityCase::I,
        FidelityCase::II,
        FidelityCase::III,
        FidelityCase::IV,
        FidelityCase::V,
        FidelityCase::VI,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FidelityCase::I => "i",
            FidelityCase::II => "ii",
            FidelityCase::III => "iii",
            FidelityCase::IV => "iv",
            FidelityCase::V => "v",
            FidelityCase::VI => "vi",
        }
    }
}

impl fmt::Display for FidelityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFidelityError(pub String);

impl fmt::Display for ParseFidelityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}' is not a fidelity case (expected i, ii, iii, iv, v, or vi)", self.0)
    }
}

impl core::error::Error for ParseFidelityError {}

impl FromStr for FidelityCase {
    type Err = ParseFidelityError;

    /// Accepts roman (i..vi, any case) and arabic (1..6) spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let case = match lower.as_str() {
            "i" | "1" => FidelityCase::I,
            "ii" | "2" => FidelityCase::II,
            "iii" | "3" => FidelityCase::III,
            "iv" | "4" => FidelityCase::IV,
            "v" | "5" => FidelityCase::V,
            "vi" | "6" => FidelityCase::VI,
            _ => return Err(ParseFidelityError(String::from(s))),
        };
        Ok(case)
    }
}

/// Fully populated characterization. Values are peak-fidelity inputs; a
/// [`FidelityCase`] decides which of them the models actually read.
/// Units: latencies in clock cycles, powers in mW, switch energy in pJ.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationModel {
    pub uniform_latency_cc: u32,
    /// Case I power for every op; calibrated to the cost of executing a NOP.
    pub uniform_power_mw: f64,
    pub op_latency_cc: [u32; Opcode::COUNT],
    pub op_power_mw: [f64; Opcode::COUNT],
    pub idle_power_mw: f64,
    pub decode_power_mw: f64,
    pub decode_cycles: u32,
    /// Charged once when a PE's opcode differs from its previous step.
    pub switch_energy_pj: f64,
    /// Routing-cost adder per used operand, indexed by [`SrcClass`]; the
    /// ZeroSelf entry is pinned to 0.
    pub src_adder_mw: [f64; SrcClass::COUNT],
    /// SMUL power when either operand is zero.
    pub mul_zero_power_mw: f64,
}

/// Unvalidated profile as read from a file. Missing per-op latencies default
/// (SMUL 3 cc, everything else 1 cc); per-op power has no defaults and any
/// hole is a lint error. Optional scalars default to 0, except
/// `mul_zero_power_mw` which falls back to the SMUL power.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CharSpec {
    pub uniform_latency_cc: u32,
    pub uniform_power_mw: f64,
    pub op_latency_cc: BTreeMap<Opcode, u32>,
    pub op_power_mw: BTreeMap<Opcode, f64>,
    pub idle_power_mw: Option<f64>,
    pub decode_power_mw: Option<f64>,
    pub decode_cycles: Option<u32>,
    pub switch_energy_pj: Option<f64>,
    pub src_adder_imm_mw: Option<f64>,
    pub src_adder_reg_mw: Option<f64>,
    pub src_adder_neighbor_mw: Option<f64>,
    pub mul_zero_power_mw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LintError {
    /// Every opcode missing from op_power_mw, reported in one pass.
    MissingOpPower(Vec<Opcode>),
    /// A strictly-positive field is zero, negative, or not finite.
    NonPositive { field: String },
    /// A non-negative field is negative or not finite.
    Negative { field: String },
}

impl fmt::Display for LintError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LintError::MissingOpPower(ops) => {
                write!(f, "op_power_mw is missing entries for:")?;
                for op in ops {
                    write!(f, " {}", op.mnemonic())?;
                }
                Ok(())
            }
            LintError::NonPositive { field } => write!(f, "{field} must be > 0"),
            LintError::Negative { field } => write!(f, "{field} must be >= 0"),
        }
    }
}

impl core::error::Error for LintError {}

fn default_latency(op: Opcode) -> u32 {
    if op == Opcode::Smul { 3 } else { 1 }
}

impl CharSpec {
    pub fn build(self) -> Result<CharacterizationModel, LintError> {
        let positive = |field: &str, v: f64| -> Result<f64, LintError> {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(LintError::NonPositive { field: String::from(field) })
            }
        };
        let non_negative = |field: &str, v: f64| -> Result<f64, LintError> {
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(LintError::Negative { field: String::from(field) })
            }
        };

        if self.uniform_latency_cc == 0 {
            return Err(LintError::NonPositive { field: String::from("uniform_latency_cc") });
        }
        let uniform_power_mw = positive("uniform_power_mw", self.uniform_power_mw)?;

        let mut op_latency_cc = [0u32; Opcode::COUNT];
        for op in Opcode::ALL {
            let cc = self.op_latency_cc.get(&op).copied().unwrap_or(default_latency(op));
            if cc == 0 {
                return Err(LintError::NonPositive {
                    field: alloc::format!("op_latency_cc.{}", op.mnemonic()),
                });
            }
            op_latency_cc[op.code() as usize] = cc;
        }

        let missing: Vec<Opcode> = Opcode::ALL
            .iter()
            .copied()
            .filter(|op| !self.op_power_mw.contains_key(op))
            .collect();
        if !missing.is_empty() {
            return Err(LintError::MissingOpPower(missing));
        }
        let mut op_power_mw = [0f64; Opcode::COUNT];
        for op in Opcode::ALL {
            op_power_mw[op.code() as usize] = positive(
                &alloc::format!("op_power_mw.{}", op.mnemonic()),
                self.op_power_mw[&op],
            )?;
        }

        let mut src_adder_mw = [0f64; SrcClass::COUNT];
        src_adder_mw[SrcClass::Imm.index()] =
            non_negative("src_power_adder_mw.imm", self.src_adder_imm_mw.unwrap_or(0.0))?;
        src_adder_mw[SrcClass::Reg.index()] =
            non_negative("src_power_adder_mw.reg", self.src_adder_reg_mw.unwrap_or(0.0))?;
        src_adder_mw[SrcClass::Neighbor.index()] = non_negative(
            "src_power_adder_mw.neighbor",
            self.src_adder_neighbor_mw.unwrap_or(0.0),
        )?;

        let mul_zero_power_mw = positive(
            "mul_zero_power_mw",
            self.mul_zero_power_mw
                .unwrap_or(op_power_mw[Opcode::Smul.code() as usize]),
        )?;

        Ok(CharacterizationModel {
            uniform_latency_cc: self.uniform_latency_cc,
            uniform_power_mw,
            op_latency_cc,
            op_power_mw,
            idle_power_mw: non_negative("idle_power_mw", self.idle_power_mw.unwrap_or(0.0))?,
            decode_power_mw: non_negative("decode_power_mw", self.decode_power_mw.unwrap_or(0.0))?,
            decode_cycles: self.decode_cycles.unwrap_or(0),
            switch_energy_pj: non_negative(
                "switch_energy_pj",
                self.switch_energy_pj.unwrap_or(0.0),
            )?,
            src_adder_mw,
            mul_zero_power_mw,
        })
    }
}

/// Parameter set with every term disabled by the case collapsed to its
/// inert value, so the timing and power models can read fields directly.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    pub case: FidelityCase,
    pub op_latency_cc: [u32; Opcode::COUNT],
    pub op_power_mw: [f64; Opcode::COUNT],
    /// Memory accesses go through the bus/bank scheduler (case III+).
    pub contention: bool,
    pub idle_power_mw: f64,
    pub decode_power_mw: f64,
    pub decode_cycles: u32,
    pub switch_energy_pj: f64,
    pub src_adder_mw: [f64; SrcClass::COUNT],
    /// None below case VI: operand zero-ness is ignored.
    pub mul_zero_power_mw: Option<f64>,
}

impl EffectiveModel {
    pub fn op_latency(&self, op: Opcode) -> u32 {
        self.op_latency_cc[op.code() as usize]
    }

    pub fn op_power(&self, op: Opcode) -> f64 {
        self.op_power_mw[op.code() as usize]
    }

    /// Decode and idle power are billed separately from case V up; below
    /// that the op power runs flat over the whole instruction.
    pub fn split_profile(&self) -> bool {
        self.case >= FidelityCase::V
    }
}

impl CharacterizationModel {
    /// Projects the profile onto a fidelity case. Terms above the case
    /// collapse: latency uniform below II, contention off below III, power
    /// uniform below IV, idle/decode zero below V, switch/adders/mul-zero
    /// off below VI.
    pub fn resolve(&self, case: FidelityCase) -> EffectiveModel {
        use FidelityCase as C;
        EffectiveModel {
            case,
            op_latency_cc: if case >= C::II {
                self.op_latency_cc
            } else {
                [self.uniform_latency_cc; Opcode::COUNT]
            },
            contention: case >= C::III,
            op_power_mw: if case >= C::IV {
                self.op_power_mw
            } else {
                [self.uniform_power_mw; Opcode::COUNT]
            },
            idle_power_mw: if case >= C::V { self.idle_power_mw } else { 0.0 },
            decode_power_mw: if case >= C::V { self.decode_power_mw } else { 0.0 },
            decode_cycles: if case >= C::V { self.decode_cycles } else { 0 },
            switch_energy_pj: if case >= C::VI { self.switch_energy_pj } else { 0.0 },
            src_adder_mw: if case >= C::VI {
                self.src_adder_mw
            } else {
                [0.0; SrcClass::COUNT]
            },
            mul_zero_power_mw: if case >= C::VI {
                Some(self.mul_zero_power_mw)
            } else {
                None
            },
        }
    }
}
