//! Acceptance gate: ten end-to-end checks, one test and one printed
//! verdict line each. Run with `--nocapture` to see the lines as they
//! print; test names mirror the criteria.

mod des_ref;
mod isa_vectors;
mod support;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cgra_core::asm::{parse_kernel, render_kernel};
use cgra_core::bitstream::{decode_bitstream, encode_bitstream};
use cgra_core::charmodel::{CharSpec, FidelityCase};
use cgra_core::sim::{self, AccessKind, MemoryImage};
use cgra_core::timing::{schedule_memory_accesses, AccessRequest};
use cgra_core::{
    Architecture, BusKind, Dest, DmaPlacement, Grid, Kernel, MemorySubsystem, Opcode, OperandSrc,
    PECoord, PESlot, Termination,
};
use cgra_estim::files;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use support::{
    arch, asset, estimate, exit_instr, instr, kernel, kernel_of, memory, sample_char, slot,
    KERNELS,
};

/// Output words of the shipped convolution, computed independently from
/// the input/weight definitions (byte address, value).
const CONV_OUTPUTS: [(usize, i32); 36] = [
    (0x340, -33),
    (0x344, -38),
    (0x348, 25),
    (0x34C, -48),
    (0x350, 83),
    (0x354, -24),
    (0x358, 25),
    (0x35C, -48),
    (0x360, 83),
    (0x364, -24),
    (0x368, -29),
    (0x36C, 34),
    (0x370, 83),
    (0x374, -24),
    (0x378, -29),
    (0x37C, 34),
    (0x380, -39),
    (0x384, 92),
    (0x388, -29),
    (0x38C, 34),
    (0x390, -39),
    (0x394, 92),
    (0x398, -15),
    (0x39C, 31),
    (0x3A0, -39),
    (0x3A4, 92),
    (0x3A8, -15),
    (0x3AC, 31),
    (0x3B0, -25),
    (0x3B4, -47),
    (0x3B8, -15),
    (0x3BC, 31),
    (0x3C0, -25),
    (0x3C4, -47),
    (0x3C8, 16),
    (0x3CC, -57),
];

#[test]
fn criterion_01_convolution_reference_output() {
    support::criterion(1, "convolution reference output", || {
        let arch = arch("arch/openedge-baseline.json");
        let kernel = kernel("kernels/conv_wp.cgra", &arch);
        let mem = memory(Some("mem/conv-8x8.mem"), &arch);

        // Expected image: the inputs untouched, plus exactly the 36 sums.
        let mut want = mem.words().to_vec();
        for (byte_addr, value) in CONV_OUTPUTS {
            want[byte_addr / 4] = value;
        }

        let started = Instant::now();
        let out = sim::run(&kernel, &arch, mem, 1_000_000).expect("convolution terminates");
        let elapsed = started.elapsed();

        assert_eq!(out.trace.termination, Termination::Exited);
        assert_eq!(out.trace.records.len(), 268, "dynamic step count");
        assert_eq!(out.final_mem.words(), &want[..], "final memory must be bit-identical");
        assert!(out.warnings.is_empty(), "unexpected warnings: {:?}", out.warnings);
        assert!(elapsed < Duration::from_secs(1), "simulation took {elapsed:?}");
    });
}

#[test]
fn criterion_02_isa_golden_vectors() {
    support::criterion(2, "golden vectors pin the datapath", || {
        let arch = arch("arch/openedge-baseline.json");
        let mut checked = 0usize;

        for vector in isa_vectors::VECTORS {
            let got = isa_vectors::run_vector(vector, &arch);
            assert_eq!(
                got, vector.expect,
                "vector {}: {:?}({}, {})",
                vector.name, vector.op, vector.a, vector.b
            );
            checked += 1;
        }

        // Loads: address is base register plus the signed immediate.
        let mut mem = MemoryImage::zeroed(&arch);
        mem.store(0x40, 77).unwrap();
        let k = kernel_of(vec![
            instr(&[((0, 0), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::R0, 0x38))]),
            instr(&[((0, 0), slot(Opcode::Lw, OperandSrc::R0, OperandSrc::Zero, Dest::OutOnly, 8))]),
            exit_instr(),
        ]);
        let out = sim::run(&k, &arch, mem, 16).unwrap();
        assert_eq!(out.trace.records[1].pes.get(0, 0).result, 77, "lw_base_plus_offset");
        checked += 1;

        // Stores: the b operand lands at a + imm.
        let k = kernel_of(vec![
            instr(&[((0, 0), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::R0, 0x104))]),
            instr(&[((0, 0), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::R1, 999))]),
            instr(&[((0, 0), slot(Opcode::Sw, OperandSrc::R0, OperandSrc::R1, Dest::OutOnly, 0))]),
            exit_instr(),
        ]);
        let out = sim::run(&k, &arch, MemoryImage::zeroed(&arch), 16).unwrap();
        assert_eq!(out.final_mem.load(0x104).unwrap(), 999, "sw_writes_b_operand");
        checked += 1;

        // A store is not visible to a load in the same step.
        let mut mem = MemoryImage::zeroed(&arch);
        mem.store(0x40, 5).unwrap();
        let k = kernel_of(vec![
            instr(&[((0, 1), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::R1, 888))]),
            instr(&[
                ((0, 0), slot(Opcode::Lw, OperandSrc::Zero, OperandSrc::Zero, Dest::OutOnly, 0x40)),
                ((0, 1), slot(Opcode::Sw, OperandSrc::Zero, OperandSrc::R1, Dest::OutOnly, 0x40)),
            ]),
            exit_instr(),
        ]);
        let out = sim::run(&k, &arch, mem, 16).unwrap();
        assert_eq!(out.trace.records[1].pes.get(0, 0).result, 5, "same_step_store_invisible");
        assert_eq!(out.final_mem.load(0x40).unwrap(), 888);
        checked += 1;

        // Branches: taken and fall-through, and the immediate doubling as
        // the comparison operand when IMM is a source.
        let pcs = |k: &Kernel, mem: MemoryImage| -> Vec<u32> {
            let out = sim::run(k, &arch, mem, 16).unwrap();
            out.trace.records.iter().map(|r| r.pc).collect()
        };
        let branch_kernel = |seed: i16, op: Opcode, a: OperandSrc, b: OperandSrc| {
            kernel_of(vec![
                instr(&[((0, 0), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::R0, seed))]),
                instr(&[((0, 0), slot(op, a, b, Dest::OutOnly, 3))]),
                exit_instr(),
                exit_instr(),
            ])
        };
        let k = branch_kernel(3, Opcode::Beq, OperandSrc::R0, OperandSrc::Imm);
        assert_eq!(pcs(&k, MemoryImage::zeroed(&arch)), [0, 1, 3], "beq_taken_on_imm_match");
        checked += 1;
        let k = branch_kernel(4, Opcode::Beq, OperandSrc::R0, OperandSrc::Imm);
        assert_eq!(pcs(&k, MemoryImage::zeroed(&arch)), [0, 1, 2], "beq_falls_through");
        checked += 1;
        let k = branch_kernel(1, Opcode::Bne, OperandSrc::R0, OperandSrc::Zero);
        assert_eq!(pcs(&k, MemoryImage::zeroed(&arch)), [0, 1, 3], "bne_taken");
        checked += 1;
        let k = branch_kernel(0, Opcode::Bne, OperandSrc::R0, OperandSrc::Zero);
        assert_eq!(pcs(&k, MemoryImage::zeroed(&arch)), [0, 1, 2], "bne_falls_through");
        checked += 1;

        let k = kernel_of(vec![
            instr(&[((0, 0), slot(Opcode::Jump, OperandSrc::Zero, OperandSrc::Zero, Dest::OutOnly, 2))]),
            exit_instr(),
            exit_instr(),
        ]);
        assert_eq!(pcs(&k, MemoryImage::zeroed(&arch)), [0, 2], "jump_unconditional");
        checked += 1;

        // Work issued alongside EXIT still commits.
        let k = kernel_of(vec![
            instr(&[((0, 1), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::R0, 0x80))]),
            instr(&[((0, 1), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::R1, 55))]),
            instr(&[
                ((0, 0), slot(Opcode::Exit, OperandSrc::Zero, OperandSrc::Zero, Dest::OutOnly, 0)),
                ((0, 1), slot(Opcode::Sw, OperandSrc::R0, OperandSrc::R1, Dest::OutOnly, 0)),
            ]),
        ]);
        let out = sim::run(&k, &arch, MemoryImage::zeroed(&arch), 16).unwrap();
        assert_eq!(out.final_mem.load(0x80).unwrap(), 55, "exit_commits_same_step");
        checked += 1;

        // NOP leaves the output latch alone.
        let k = kernel_of(vec![
            instr(&[((0, 0), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, Dest::OutOnly, 9))]),
            instr(&[]),
            exit_instr(),
        ]);
        let out = sim::run(&k, &arch, MemoryImage::zeroed(&arch), 16).unwrap();
        assert_eq!(out.trace.records[1].pes.get(0, 0).result, 9, "nop_preserves_latch");
        checked += 1;

        assert!(checked >= 30, "only {checked} vectors");
    });
}

#[test]
fn criterion_03_scheduler_matches_cycle_reference() {
    support::criterion(3, "scheduler matches the cycle-stepped reference", || {
        let topologies = [
            (BusKind::OneToM, DmaPlacement::PerColumn),
            (BusKind::NToM, DmaPlacement::PerColumn),
            (BusKind::Interleaved, DmaPlacement::PerColumn),
            (BusKind::NToM, DmaPlacement::PerPE),
        ];
        let mut rng = StdRng::seed_from_u64(0xACCE_55ED);

        for set in 0..1000 {
            let (bus, dma) = topologies[set % topologies.len()];
            let arch = Architecture {
                rows: 4,
                cols: 4,
                torus: true,
                registers_per_pe: 4,
                word_bytes: 4,
                clock_period_ns: 10.0,
                mem: MemorySubsystem {
                    bus,
                    n_banks: rng.gen_range(1..=8),
                    bank_words: rng.gen_range(1..=64),
                    dma,
                    mem_latency_cc: rng.gen_range(1..=6),
                },
                mul_latency_cc: None,
            };
            let capacity = arch.mem.capacity_words();

            let n_reqs = rng.gen_range(0..=32);
            let mut reqs = Vec::with_capacity(n_reqs);
            for _ in 0..n_reqs {
                let pe = PECoord { row: rng.gen_range(0..4), col: rng.gen_range(0..4) };
                let word_addr = rng.gen_range(0..capacity);
                reqs.push(AccessRequest {
                    pe,
                    kind: if rng.gen_bool(0.5) { AccessKind::Load } else { AccessKind::Store },
                    word_addr,
                    bank: arch.mem.bank_of(word_addr).unwrap(),
                    channel: arch.channel_of(pe),
                });
            }

            let got = schedule_memory_accesses(&reqs, &arch.mem);
            let pairs: Vec<(u32, u32)> = reqs.iter().map(|r| (r.bank, r.channel)).collect();
            let want = des_ref::schedule(&pairs, arch.mem.mem_latency_cc);
            assert_eq!(got, want, "set {set}: {bus:?}/{dma:?} requests {pairs:?}");
        }
    });
}

#[test]
fn criterion_04_latency_orderings() {
    support::criterion(4, "latency orderings across cases and topologies", || {
        let model = sample_char();
        let base = arch("arch/openedge-baseline.json");
        let one_to_m = arch("arch/sweep/baseline.json");
        let ntom = arch("arch/sweep/b-ntom.json");
        let perpe = arch("arch/sweep/d-ntom-perpe.json");

        for &(kernel_rel, mem_rel) in KERNELS {
            let cycles = |arch: &Architecture, case: FidelityCase| -> u64 {
                let k = kernel(kernel_rel, arch);
                let mem = memory(mem_rel, arch);
                estimate(&k, arch, &model, mem, case).cycles
            };
            let (ii, iii) = (cycles(&base, FidelityCase::II), cycles(&base, FidelityCase::III));
            assert!(iii >= ii, "{kernel_rel}: contention must not shorten ({iii} < {ii})");

            let serial = cycles(&one_to_m, FidelityCase::III);
            let banked = cycles(&ntom, FidelityCase::III);
            assert!(banked <= serial, "{kernel_rel}: banked bus slower ({banked} > {serial})");

            let per_pe = cycles(&perpe, FidelityCase::III);
            assert!(per_pe <= banked, "{kernel_rel}: per-PE DMA slower ({per_pe} > {banked})");
        }

        // A lone multiply step runs at the characterized multiplier latency.
        let k = kernel_of(vec![
            instr(&[((0, 0), slot(Opcode::Smul, OperandSrc::Zero, OperandSrc::Zero, Dest::OutOnly, 0))]),
            exit_instr(),
        ]);
        let est = estimate(&k, &base, &model, MemoryImage::zeroed(&base), FidelityCase::II);
        assert_eq!(est.timings[0].total_cc, 3, "multiply step at its table latency");
    });
}

#[test]
fn criterion_05_energy_accounting_closes() {
    support::criterion(5, "per-PE, per-step, and total energy agree", || {
        let model = sample_char();
        let base = arch("arch/openedge-baseline.json");
        let close = |a: f64, b: f64, what: &str| {
            let tolerance = 1e-9 * b.abs().max(1.0);
            assert!((a - b).abs() <= tolerance, "{what}: {a} vs {b}");
        };

        for &(kernel_rel, mem_rel) in KERNELS {
            let k = kernel(kernel_rel, &base);
            for case in FidelityCase::ALL {
                let est = estimate(&k, &base, &model, memory(mem_rel, &base), case);
                let heat: f64 = est.energy.kernel_heatmap.grid.cells().iter().sum();
                let steps: f64 = est.energy.per_step.iter().map(|s| s.total_pj()).sum();
                let label = format!("{kernel_rel} case {}", case.as_str());
                close(heat, est.energy.total_pj, &format!("{label}: heatmap total"));
                close(steps, est.energy.total_pj, &format!("{label}: per-step total"));
            }
        }
    });
}

#[test]
fn criterion_06_topology_sweep_tradeoffs() {
    support::criterion(6, "topology sweep reproduces the expected trade-offs", || {
        let started = Instant::now();
        let variants =
            files::load_sweep(&asset("sweeps/hw-topology.json"), &asset("char/openedge-sample.json"))
                .expect("sweep spec loads");
        assert_eq!(variants[0].name, "baseline");

        let mut stats: BTreeMap<String, (u64, f64, f64)> = BTreeMap::new();
        for variant in &variants {
            let k = kernel("kernels/conv_wp.cgra", &variant.arch);
            let mem = memory(Some("mem/conv-8x8.mem"), &variant.arch);
            let est = estimate(&k, &variant.arch, &variant.char_model, mem, FidelityCase::VI);
            assert_eq!(est.out.trace.termination, Termination::Exited, "{}", variant.name);
            stats.insert(
                variant.name.clone(),
                (est.cycles, est.energy.total_pj, est.energy.avg_power_mw),
            );
        }

        let (base_cc, base_pj, base_mw) = stats["baseline"];
        let (fast_cc, fast_pj, _) = stats["a-fast-mul"];
        let (best_cc, ..) = stats["d-ntom-perpe"];

        for (name, &(cc, ..)) in &stats {
            if name != "d-ntom-perpe" {
                assert!(best_cc < cc, "d-ntom-perpe not strictly fastest vs {name}");
            }
        }
        assert!(fast_cc < base_cc, "faster multiplier must cut latency");
        let energy_shift = (fast_pj - base_pj).abs() / base_pj;
        assert!(energy_shift <= 0.05, "fast-mul energy moved {:.2}%", energy_shift * 100.0);
        for name in ["b-ntom", "c-interleaved", "d-ntom-perpe"] {
            let (_, pj, mw) = stats[name];
            assert!(pj < base_pj, "{name} must save energy");
            assert!(mw > base_mw, "{name} must raise average power");
        }
        assert!(started.elapsed() < Duration::from_secs(10));
    });
}

#[test]
fn criterion_07_step_energy_comparisons() {
    support::criterion(7, "step energy comparisons behave", || {
        let model = sample_char();
        let base = arch("arch/openedge-baseline.json");

        // Packing memory ops into one instruction beats splitting them once
        // fetch/decode is billed.
        for case in [FidelityCase::V, FidelityCase::VI] {
            let packed = kernel("kernels/nop_cluster.cgra", &base);
            let split = kernel("kernels/nop_split.cgra", &base);
            let packed_pj =
                estimate(&packed, &base, &model, MemoryImage::zeroed(&base), case).energy.total_pj;
            let split_pj =
                estimate(&split, &base, &model, MemoryImage::zeroed(&base), case).energy.total_pj;
            assert!(
                packed_pj < split_pj,
                "case {}: packed {packed_pj} pJ vs split {split_pj} pJ",
                case.as_str()
            );
        }

        // The convolution's load step and multiply step stay within 2x of
        // each other: long stalls are idle-priced, not active-priced.
        let k = kernel("kernels/conv_wp.cgra", &base);
        let mem = memory(Some("mem/conv-8x8.mem"), &base);
        let est = estimate(&k, &base, &model, mem, FidelityCase::VI);
        let mut by_pc: BTreeMap<u32, f64> = BTreeMap::new();
        for step in &est.energy.per_step {
            *by_pc.entry(step.pc).or_insert(0.0) += step.total_pj();
        }
        let (loads, muls) = (by_pc[&3], by_pc[&4]);
        let ratio = (loads / muls).max(muls / loads);
        assert!(ratio < 2.0, "load step {loads} pJ vs multiply step {muls} pJ");
    });
}

#[test]
fn criterion_08_fidelity_degeneracies() {
    support::criterion(8, "degenerate profiles collapse the cases exactly", || {
        let base = arch("arch/openedge-baseline.json");

        // Per-op power pinned to the uniform value: the per-op case must
        // reproduce the uniform-power energy bit for bit.
        let flat_power = CharSpec {
            uniform_latency_cc: 1,
            uniform_power_mw: 0.2,
            op_latency_cc: [(Opcode::Smul, 1)].into_iter().collect(),
            op_power_mw: Opcode::ALL.iter().map(|&op| (op, 0.2)).collect(),
            ..CharSpec::default()
        }
        .build()
        .expect("flat power profile lints");
        let alu = kernel("kernels/alu_mix.cgra", &base);
        let uniform = estimate(&alu, &base, &flat_power, MemoryImage::zeroed(&base), FidelityCase::I);
        let per_op = estimate(&alu, &base, &flat_power, MemoryImage::zeroed(&base), FidelityCase::IV);
        assert_eq!(uniform.energy.total_pj, per_op.energy.total_pj, "energy must match exactly");
        assert_eq!(uniform.cycles, per_op.cycles);

        // Per-op latency pinned to the uniform value: per-op latency must
        // reproduce the uniform-latency cycle count exactly.
        let flat_latency = CharSpec {
            uniform_latency_cc: 1,
            uniform_power_mw: 0.1,
            op_latency_cc: [(Opcode::Smul, 1)].into_iter().collect(),
            op_power_mw: Opcode::ALL
                .iter()
                .enumerate()
                .map(|(i, &op)| (op, 0.1 + 0.01 * i as f64))
                .collect(),
            ..CharSpec::default()
        }
        .build()
        .expect("flat latency profile lints");
        let conv = kernel("kernels/conv_wp.cgra", &base);
        let cycles = |case: FidelityCase| {
            let mem = memory(Some("mem/conv-8x8.mem"), &base);
            estimate(&conv, &base, &flat_latency, mem, case).cycles
        };
        assert_eq!(cycles(FidelityCase::I), cycles(FidelityCase::II), "cycles must match exactly");
    });
}

#[test]
fn criterion_09_bitstream_codec_roundtrips() {
    support::criterion(9, "codec round-trips and the all-NOP floor", || {
        let arch = arch("arch/openedge-baseline.json");
        let mut rng = StdRng::seed_from_u64(0xB175);

        for iteration in 0..1000 {
            let k = random_kernel(&mut rng);
            let bytes = encode_bitstream(&k, &arch)
                .unwrap_or_else(|e| panic!("iteration {iteration}: encode fails: {e}"));
            let (decoded, _) = decode_bitstream(&bytes, &arch)
                .unwrap_or_else(|e| panic!("iteration {iteration}: decode fails: {e}"));
            assert!(decoded.same_program(&k), "iteration {iteration}: bitstream round-trip");

            let text = render_kernel(&k);
            let (reparsed, _) = parse_kernel(&text, &arch)
                .unwrap_or_else(|e| panic!("iteration {iteration}: reparse fails: {e}"));
            assert!(reparsed.same_program(&k), "iteration {iteration}: text round-trip");
        }

        // An all-NOP instruction is the zero word, 16 times, after the header.
        let nop_kernel = kernel_of(vec![Grid::filled(4, 4, PESlot::nop())]);
        let bytes = encode_bitstream(&nop_kernel, &arch).unwrap();
        assert_eq!(bytes.len(), 8 + 16 * 4);
        assert!(bytes[8..].iter().all(|&b| b == 0), "all-NOP body must be all zeros");
    });
}

fn random_kernel(rng: &mut StdRng) -> Kernel {
    let len = rng.gen_range(1..=6usize);
    let mut instructions = Vec::with_capacity(len);
    for _ in 0..len {
        let mut cells = Vec::with_capacity(16);
        let mut control_seen = false;
        for _ in 0..16 {
            let mut s = PESlot {
                op: Opcode::ALL[rng.gen_range(0..Opcode::COUNT)],
                src_a: OperandSrc::ALL[rng.gen_range(0..OperandSrc::COUNT)],
                src_b: OperandSrc::ALL[rng.gen_range(0..OperandSrc::COUNT)],
                dest: Dest::ALL[rng.gen_range(0..Dest::COUNT)],
                imm: rng.gen(),
            };
            if s.op.is_control_flow() {
                // One control op per instruction; branch targets in range.
                if control_seen {
                    s.op = Opcode::Nop;
                } else {
                    control_seen = true;
                    if matches!(s.op, Opcode::Beq | Opcode::Bne | Opcode::Jump) {
                        s.imm = (s.imm as i32).rem_euclid(len as i32) as i16;
                    }
                }
            }
            cells.push(s);
        }
        instructions.push(Grid::from_vec(4, 4, cells));
    }
    Kernel { name: "random".into(), rows: 4, cols: 4, instructions }
}

#[test]
fn criterion_10_binary_runs_are_byte_identical() {
    support::criterion(10, "repeated binary runs emit identical bytes", || {
        let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
        let dirs = [tmp.join("determinism-a"), tmp.join("determinism-b")];
        let mut stdouts = Vec::new();

        for dir in &dirs {
            let _ = std::fs::remove_dir_all(dir);
            let run = Command::new(env!("CARGO_BIN_EXE_cgra-estim"))
                .arg("estimate")
                .arg(asset("kernels/conv_wp.cgra"))
                .arg("--arch")
                .arg(asset("arch/openedge-baseline.json"))
                .arg("--char")
                .arg(asset("char/openedge-sample.json"))
                .arg("--mem")
                .arg(asset("mem/conv-8x8.mem"))
                .args(["--case", "vi", "--format", "all"])
                .arg("--out")
                .arg(dir)
                .output()
                .expect("binary launches");
            assert!(
                run.status.success(),
                "estimate failed: {}",
                String::from_utf8_lossy(&run.stderr)
            );
            stdouts.push(run.stdout);
        }

        // The summary line must repeat verbatim; the report path line
        // differs by design (different --out).
        let first_line = |bytes: &[u8]| bytes.split(|&b| b == b'\n').next().unwrap().to_vec();
        assert_eq!(first_line(&stdouts[0]), first_line(&stdouts[1]), "summary line differs");

        let snapshot = |dir: &Path| -> BTreeMap<String, Vec<u8>> {
            std::fs::read_dir(dir)
                .expect("output dir exists")
                .map(|entry| {
                    let entry = entry.unwrap();
                    let name = entry.file_name().into_string().unwrap();
                    (name, std::fs::read(entry.path()).unwrap())
                })
                .collect()
        };
        let (a, b) = (snapshot(&dirs[0]), snapshot(&dirs[1]));
        let names: Vec<&String> = a.keys().collect();
        assert_eq!(names, b.keys().collect::<Vec<_>>(), "file sets differ");
        assert!(a.contains_key("report.json") && a.contains_key("timing.csv"));
        for (name, bytes) in &a {
            assert_eq!(bytes, &b[name], "{name} differs between runs");
        }
    });
}
