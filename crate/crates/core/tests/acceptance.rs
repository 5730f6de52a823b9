//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! `[PASS]`/`[FAIL]` line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubesim::encoding::{Codebook, HALF};
use tubesim::graph::{cycle_edges, RppInstance};
use tubesim::oracle::{bruteforce, enumerate_closed_walks};
use tubesim::pipeline::{dry_run, prepare, solve, Decision, Pipeline, PipelineConfig};
use tubesim::script::{parse, Region, ScriptEnv, Statement, TubeProgram};
use tubesim::strand::{Nucleotide, Strand};
use tubesim::tube::{AnnealMode, DEFAULT_CAP};

use common::*;

struct Report {
    failures: Vec<String>,
    detail: String,
}

impl Report {
    fn new() -> Report {
        Report {
            failures: Vec::new(),
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn cfg(witness: bool, trace: bool) -> PipelineConfig {
    PipelineConfig {
        witness,
        trace,
        ..PipelineConfig::default()
    }
}

/// Instances of the exhaustive family: every connected graph on 3 to 5
/// vertices up to isomorphism, unit lengths, every non-empty required set,
/// and three budgets around the optimum.
fn exhaustive_family() -> Vec<RppInstance> {
    let mut out = Vec::new();
    for v in 3..=5 {
        for g in connected_graphs(v) {
            for req in nonempty_subsets(&g) {
                let probe = unit(v, &g, &req, 0);
                let centre = bruteforce(&probe).unwrap().min_cost.unwrap_or(v as u64);
                for b in [centre - 1, centre, centre + 1] {
                    out.push(probe.with_budget(b));
                }
            }
        }
    }
    out
}

/// Length and witness checks on a YES decision.
fn ledger(inst: &RppInstance, d: &Decision, report: &mut Report) {
    let strand = match &d.detected {
        Some(s) => s,
        None => {
            report.failures.push(format!("YES without a detected strand on {inst:?}"));
            return;
        }
    };
    let cb = d.codebook.as_ref().unwrap();
    let relabel = d.relabeling.as_ref().unwrap();
    let Some(walk) = cb.decode_walk(strand) else {
        report.failures.push(format!("undecodable strand on {inst:?}"));
        return;
    };
    let original = relabel.to_original(&walk);
    let free_cost: u64 = cycle_edges(&original)
        .into_iter()
        .filter(|e| !inst.is_required(*e))
        .map(|e| inst.length(e).unwrap_or(0))
        .sum();
    let v = inst.vertex_count();
    report.check(strand.len() as u64 == 20 * v as u64 + 20 + free_cost, || {
        format!("strand length {} != {} on {inst:?}", strand.len(), 20 * v as u64 + 20 + free_cost)
    });
    let ok = match (&d.witness, d.cost) {
        (Some(w), Some(c)) => inst.is_rural_postman_circuit(w) && inst.cycle_cost(w) == Some(c) && c <= inst.budget(),
        _ => false,
    };
    report.check(ok, || format!("bad witness {:?} on {inst:?}", d.witness));
}

fn agreement(instances: &[RppInstance], report: &mut Report, yes: &mut usize) {
    for inst in instances {
        let expect = bruteforce(inst).unwrap().decision;
        let d = solve(inst, &cfg(true, false)).unwrap();
        report.check(d.answer.is_yes() == expect, || {
            format!("solve says {} but the oracle says {expect} on {inst:?}", d.answer.as_str())
        });
        if d.answer.is_yes() {
            *yes += 1;
            ledger(inst, &d, report);
        }
    }
}

fn criterion_1(report: &mut Report) {
    let family = exhaustive_family();
    let mut yes = 0;
    agreement(&family, report, &mut yes);
    report.detail = format!("{} instances, {yes} YES", family.len());
}

fn random_family() -> Vec<RppInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..200).map(|_| random_instance(&mut rng)).collect()
}

fn criterion_2(report: &mut Report) {
    let family = random_family();
    let mut yes = 0;
    agreement(&family, report, &mut yes);
    report.detail = format!("{} instances, {yes} YES", family.len());
}

fn phase1_env(inst: &RppInstance, mode: AnnealMode) -> (RppInstance, Codebook, ScriptEnv) {
    let config = PipelineConfig { mode, ..PipelineConfig::default() };
    let (renumbered, _, cb) = prepare(inst, &config).unwrap();
    let env = ScriptEnv::new(Some(cb.clone()), mode, DEFAULT_CAP);
    let mut run = Pipeline::new(&renumbered, &cb, env);
    run.phase1_generate().unwrap();
    let env = run.lab().clone();
    (renumbered, cb, env)
}

fn tube_contents(env: &ScriptEnv) -> BTreeMap<String, String> {
    env.tubes().map(|(n, t)| (n.to_string(), t.dump())).collect()
}

fn criterion_3(report: &mut Report) {
    let mut cases = 0;
    for v in 2..=4 {
        for g in labeled_connected_graphs(v) {
            for &anchor in &g {
                let inst = unit(v, &g, &[anchor], v as u64);
                let (_, _, lit) = phase1_env(&inst, AnnealMode::Literal);
                let (_, _, asm) = phase1_env(&inst, AnnealMode::Assembly);
                cases += 1;
                report.check(tube_contents(&lit) == tube_contents(&asm), || {
                    format!("modes differ on {g:?} with anchor {anchor:?}")
                });
            }
        }
    }
    report.detail = format!("{cases} graph/anchor pairs");
}

fn criterion_4(report: &mut Report) {
    let mut cases = 0;
    let mut walks = 0;
    for v in 3..=5 {
        for g in connected_graphs(v) {
            for &anchor in &g {
                let inst = unit(v, &g, &[anchor], v as u64);
                let (renumbered, cb, env) = phase1_env(&inst, AnnealMode::Assembly);
                let tube = env.tube("R").unwrap();
                let mut decoded = Vec::new();
                for (s, count) in tube.strands() {
                    report.check(count == 1u32.into(), || format!("multiplicity {count} on {g:?}"));
                    match cb.decode_walk(&s) {
                        Some(w) => decoded.push(w),
                        None => report.failures.push(format!("undecodable phase-1 strand on {g:?}")),
                    }
                }
                decoded.sort();
                let a = cb.anchor().unwrap();
                let expect = enumerate_closed_walks(&renumbered, v, a).unwrap();
                cases += 1;
                walks += expect.len();
                report.check(decoded == expect, || {
                    format!("phase 1 on {g:?}/{anchor:?}: {} strands, {} walks", decoded.len(), expect.len())
                });
            }
        }
    }
    report.detail = format!("{cases} graph/anchor pairs, {walks} walks");
}

fn criterion_5(report: &mut Report) {
    // Budget fixed across sizes; the sweep is excluded from the count.
    let budget = 10;
    let count = |n: usize, live: bool| -> u64 {
        let inst = complete(n, &[(1, 2), (3, 4)], budget);
        let d = if live {
            solve(&inst, &PipelineConfig::default()).unwrap()
        } else {
            dry_run(&inst, &PipelineConfig::default()).unwrap()
        };
        d.stats.operations.total()
    };
    let mut counts = BTreeMap::new();
    for n in 4..=10 {
        let dry = count(n, false);
        // Live tubes are affordable up to K8; beyond that the dry lab, which
        // issues the same statements without holding strands, gives the count.
        if n <= 8 {
            let live = count(n, true);
            report.check(live == dry, || format!("K{n}: live count {live} != dry count {dry}"));
        }
        counts.insert(n, dry);
    }
    let (c4, c5) = (counts[&4] as i128, counts[&5] as i128);
    // a = (c5 - c4) / 9, b = c4 - 16a; compare 9 * count with 9 * (a n^2 + b).
    let a9 = c5 - c4;
    let b9 = 9 * c4 - 16 * a9;
    for n in 6..=10 {
        let lhs = 9 * counts[&n] as i128;
        let rhs = a9 * (n * n) as i128 + b9;
        report.check(lhs <= rhs, || format!("K{n}: {} operations exceed the fitted bound", counts[&n]));
    }
    let listed: Vec<String> = counts.iter().map(|(n, c)| format!("K{n}={c}")).collect();
    report.detail = format!(
        "a={:.3} b={:.3}; {}",
        a9 as f64 / 9.0,
        b9 as f64 / 9.0,
        listed.join(" ")
    );
}

fn criterion_6(report: &mut Report) {
    // Runs the ledger over both families' YES instances.
    let mut yes = 0;
    for inst in exhaustive_family().iter().chain(random_family().iter()) {
        let d = solve(inst, &cfg(true, false)).unwrap();
        if d.answer.is_yes() {
            yes += 1;
            ledger(inst, &d, report);
        }
    }
    report.detail = format!("{yes} YES instances");
}

fn criterion_7(report: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_tubesim");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..20 {
        let inst = if i < 4 {
            complete(3 + i, &[(1, 2)], 3 + i as u64)
        } else {
            random_instance(&mut rng)
        };
        let path = dir.path().join(format!("inst{i}.json"));
        std::fs::write(&path, serde_json::to_string(&inst.to_raw()).unwrap()).unwrap();
        let trace = dir.path().join(format!("inst{i}.tube"));
        let seed = (i * 31).to_string();
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = Command::new(bin)
                .args(["solve", path.to_str().unwrap(), "--seed", &seed, "--witness", "--trace"])
                .arg(&trace)
                .output()
                .unwrap();
            let script = std::fs::read(&trace).unwrap();
            let mut cb_path = trace.clone().into_os_string();
            cb_path.push(".codebook");
            let codebook = std::fs::read(cb_path).unwrap();
            outputs.push((out.status.code(), out.stdout, script, codebook));
        }
        report.check(outputs[0] == outputs[1], || format!("run {i} differs between invocations"));
        report.check(outputs[0].0 == Some(0), || format!("run {i} exited with {:?}", outputs[0].0));
    }
    report.detail = "20 instances, JSON, trace and codebook compared byte for byte".into();
}

fn random_strand(rng: &mut ChaCha8Rng, max: usize) -> Strand {
    let len = rng.gen_range(0..=max);
    Strand::from_nucleotides((0..len).map(|_| Nucleotide::ALL[rng.gen_range(0..4)]))
}

fn nonempty_strand(rng: &mut ChaCha8Rng, max: usize) -> Strand {
    loop {
        let s = random_strand(rng, max);
        if !s.is_empty() {
            return s;
        }
    }
}

/// A random program that declares every tube before use.
fn random_program(rng: &mut ChaCha8Rng, index: usize) -> TubeProgram {
    let names = ["P", "Q", "R", "L_1", "Temp", "Z_9", "N"];
    let mut declared: Vec<&str> = Vec::new();
    let mut statements = Vec::new();
    let len = rng.gen_range(1..=25);
    for k in 0..len {
        // Cycle through every statement kind before choosing freely.
        let kind = if k < 10 { (k + index) % 10 } else { rng.gen_range(0..10) };
        let pick = |rng: &mut ChaCha8Rng| names[rng.gen_range(0..names.len())];
        if declared.is_empty() && kind != 0 {
            let t = pick(rng);
            statements.push(Statement::Input {
                tube: t.into(),
                contents: vec![(1u32.into(), nonempty_strand(rng, 8))],
            });
            declared.push(t);
        }
        let used = |rng: &mut ChaCha8Rng, declared: &[&str]| declared[rng.gen_range(0..declared.len())].to_string();
        let stmt = match kind {
            0 => {
                let contents = (0..rng.gen_range(0..4))
                    .map(|_| (rng.gen_range(1u32..1000).into(), random_strand(rng, 12)))
                    .collect();
                Statement::Input { tube: pick(rng).into(), contents }
            }
            1 => Statement::Merge { into: pick(rng).into(), from: used(rng, &declared) },
            2 => Statement::Copy { src: used(rng, &declared), dst: pick(rng).into() },
            3 => Statement::Detect { tube: used(rng, &declared) },
            4 => Statement::Separate {
                src: used(rng, &declared),
                patterns: (0..rng.gen_range(1..4)).map(|_| random_strand(rng, 6)).collect(),
                dst: pick(rng).into(),
                region: if rng.gen_bool(0.5) { Region::Whole } else { Region::PreMarker },
            },
            5 => Statement::Select { src: used(rng, &declared), len: rng.gen_range(0..200), dst: pick(rng).into() },
            6 => Statement::Anneal { tube: used(rng, &declared) },
            7 => Statement::Denature { tube: used(rng, &declared) },
            8 => Statement::Discard { tube: used(rng, &declared) },
            _ => Statement::Append { tube: used(rng, &declared), strand: random_strand(rng, 20) },
        };
        if let Some(d) = stmt.destination() {
            let d = names.iter().find(|n| **n == d).unwrap();
            if !declared.contains(d) {
                declared.push(d);
            }
        }
        statements.push(stmt);
    }
    let header = rng.gen_bool(0.5).then(|| format!("cb{index}.codebook"));
    TubeProgram::new(header, statements)
}

fn criterion_8(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut kinds = BTreeSet::new();
    let mut corpus: Vec<TubeProgram> = (0..40).map(|i| random_program(&mut rng, i)).collect();
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    for entry in std::fs::read_dir(fixtures).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "tube") {
            corpus.push(parse(&std::fs::read_to_string(&path).unwrap()).unwrap());
        }
    }
    for p in &corpus {
        kinds.extend(p.statements.iter().map(Statement::keyword));
        let text = p.print();
        match parse(&text) {
            Ok(q) => {
                report.check(&q == p, || format!("round trip changed the program:\n{text}"));
                report.check(q.print() == text, || format!("printing is not idempotent:\n{text}"));
            }
            Err(d) => report.failures.push(format!("canonical text fails to parse: {d}\n{text}")),
        }
    }
    report.check(kinds.len() == 10, || format!("corpus covers only {kinds:?}"));

    // Replays go through the printed script and the codebook dump, as a file
    // based replay would.
    let mut replays = 0;
    for inst in exhaustive_family() {
        let d = solve(&inst, &cfg(false, true)).unwrap();
        let (Some(trace), Some(cb)) = (&d.trace, &d.codebook) else {
            continue;
        };
        let program = parse(&trace.print()).unwrap();
        let cb = Codebook::parse_dump(&cb.dump()).unwrap();
        let mut env = ScriptEnv::new(Some(cb), AnnealMode::Assembly, DEFAULT_CAP);
        env.execute(&program).unwrap();
        replays += 1;
        report.check(env.detect_log() == &d.detect_log[..], || format!("replay differs on {inst:?}"));
    }
    report.detail = format!("{} programs, {replays} replayed traces", corpus.len());
}

fn criterion_9(report: &mut Report) {
    let mut max_v = 0;
    for seed in 0..100u64 {
        let v = 1 + (seed as usize * 7) % 50;
        max_v = max_v.max(v);
        // A ring plus chords from vertex 1 gives a connected graph with
        // edges in both label orders.
        let mut edges: Vec<(usize, usize, u64)> = (1..v).map(|i| (i, i + 1, 1)).collect();
        if v > 2 {
            edges.push((1, v, 1));
            edges.extend((3..v).step_by(3).map(|j| (1, j, 1)));
        }
        let required: Vec<(usize, usize)> = edges.iter().take(1).map(|e| (e.0, e.1)).collect();
        let inst = RppInstance::new(v, &edges, &required, 0).unwrap();
        let cb = Codebook::build(&inst, seed).unwrap();

        let mut values = HashSet::new();
        for i in 1..=v {
            values.insert(cb.half(i).clone());
            values.insert(cb.half(i).complement());
        }
        report.check(values.len() == 2 * v, || format!("seed {seed}: half-mers collide"));
        let blocks: HashSet<&[u8]> = values.iter().map(|s| s.as_bytes()).collect();
        for i in 1..=v {
            let code = cb.vertex_code(i);
            report.check(code.slice(0, HALF) == code.slice(HALF, 2 * HALF), || {
                format!("seed {seed}: vertex {i} halves differ")
            });
            report.check(code.slice(0, HALF) == *cb.half(i), || format!("seed {seed}: vertex {i} code"));
        }
        for e in inst.edges() {
            for (a, b) in [(e.lo, e.hi), (e.hi, e.lo)] {
                let expect = Strand::concat([cb.half(a), cb.half(b)]).complement();
                report.check(cb.edge_code(a, b) == expect, || format!("seed {seed}: edge ({a},{b}) code"));
            }
        }
        // No half-mer or complement reads across a junction of two halves.
        for x in cb.halves() {
            for y in cb.halves() {
                let xy = Strand::concat([x, y]);
                for off in 1..HALF {
                    report.check(!blocks.contains(&xy.as_bytes()[off..off + HALF]), || {
                        format!("seed {seed}: junction window collides")
                    });
                }
            }
        }
        let m = cb.marker().as_bytes();
        for off in 0..=m.len() - HALF {
            report.check(!blocks.contains(&m[off..off + HALF]), || format!("seed {seed}: marker window collides"));
        }
        for k in 1..m.len() {
            report.check(m[..k] != m[m.len() - k..], || format!("seed {seed}: marker overlaps itself"));
        }
    }
    report.detail = format!("100 codebooks, v up to {max_v}");
}

fn main() {
    type Criterion = (&'static str, fn(&mut Report));
    let criteria: [Criterion; 9] = [
        ("oracle equivalence, exhaustive graphs on 3 to 5 vertices", criterion_1),
        ("oracle equivalence, 200 random instances", criterion_2),
        ("literal and assembly annealing agree for v <= 4", criterion_3),
        ("phase-1 strands equal the closed-walk enumeration", criterion_4),
        ("operation count within a fitted quadratic on K4..K10", criterion_5),
        ("length ledger and witness validity on YES instances", criterion_6),
        ("byte-identical output across repeated runs", criterion_7),
        ("script round trip and trace replay", criterion_8),
        ("codebook separation properties", criterion_9),
    ];
    let only: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let mut report = Report::new();
        run(&mut report);
        let secs = start.elapsed().as_secs_f64();
        let status = if report.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("[{status}] {n}. {name} ({}; {secs:.1}s)", report.detail);
        for f in report.failures.iter().take(5) {
            println!("       {f}");
        }
        if report.failures.len() > 5 {
            println!("       ... {} more", report.failures.len() - 5);
        }
        if !report.failures.is_empty() {
            failed += 1;
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
