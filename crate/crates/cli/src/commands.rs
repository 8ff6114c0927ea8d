use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qe_teleport::entanglement::CorrelationReport;
use qe_teleport::linalg::{partial_trace, uhlmann_fidelity};
use qe_teleport::model::{BellOutcome, BlockState, PureQubit};
use qe_teleport::protocol::{bell_coherence, qubit_coherence, Engine, SecondDephasing, StageTrace};
use qe_teleport::scenarios::{fig1_table, fig2_table, Fig1Params, Fig2Params};
use qe_teleport::verify::{run_all, SuiteReport, Tolerances, VerifyConfig};

use crate::config::{ConfigError, CustomRun};
use crate::table::{number, Table};

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Rejected input; exit code 2.
    Config(String),
    /// A check exceeded its tolerance or the run itself failed; exit code 1.
    Check(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<qe_teleport::Error> for Failure {
    fn from(e: qe_teleport::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Check(m) => write!(f, "{m}"),
        }
    }
}

fn write_table(table: &Table, path: &Path) -> Result<(), Failure> {
    table
        .write(path)
        .map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))
}

fn gate(name: &str, residual: f64, tol: f64) -> Result<(), Failure> {
    println!("max engine vs closed-form residual: {residual:.3e} (tol {tol:.1e})");
    if residual <= tol {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{name}: residual {residual:.3e} exceeds tolerance {tol:.1e}"
        )))
    }
}

pub fn fig1(params: &Fig1Params, engine: &Engine, tol: &Tolerances, out: &Path) -> Result<(), Failure> {
    let rows = fig1_table(params, engine)?;
    let mut table = Table::new(&["x2", "phib_t", "abs_c_phi", "abs_c_psi"]);
    let mut worst: f64 = 0.0;
    for r in &rows {
        table.numeric_row(&[r.x2, r.phib_t, r.abs_c_phi, r.abs_c_psi]);
        worst = worst.max(r.residual);
    }
    write_table(&table, out)?;
    println!("fig1: wrote {} rows to {}", rows.len(), out.display());
    gate("fig1", worst, tol.engine)
}

pub fn fig2(params: &Fig2Params, engine: &Engine, tol: &Tolerances, out: &Path) -> Result<(), Failure> {
    let rows = fig2_table(params, engine)?;
    let mut table = Table::new(&["c0", "phase_t", "E_phi", "E_psi", "E_diff"]);
    let mut worst: f64 = 0.0;
    for r in &rows {
        table.numeric_row(&[r.c0, r.phase_t, r.e_phi, r.e_psi, r.e_diff]);
        worst = worst.max(r.residual);
    }
    write_table(&table, out)?;
    println!("fig2: wrote {} rows to {}", rows.len(), out.display());
    gate("fig2", worst, tol.engine)
}

fn run(engine: &Engine, setup: &CustomRun, o1: BellOutcome, o2: BellOutcome) -> qe_teleport::Result<StageTrace> {
    let second = setup.second.as_ref().map(|(interaction, t)| SecondDephasing {
        interaction,
        duration: *t,
    });
    engine.run(&setup.psi, &setup.env, &setup.interaction1, setup.tau, second, o1, o2)
}

/// Draws one outcome from the engine's own branch probabilities.
fn sample(rng: &mut ChaCha8Rng, probabilities: &[(BellOutcome, f64)]) -> BellOutcome {
    let total: f64 = probabilities.iter().map(|(_, p)| p).sum();
    let mut u = rng.random_range(0.0..total);
    for &(o, p) in probabilities {
        if u < p {
            return o;
        }
        u -= p;
    }
    probabilities.last().expect("four outcomes").0
}

fn sampled_outcomes(engine: &Engine, setup: &CustomRun, seed: u64) -> qe_teleport::Result<[BellOutcome; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stage_p = |trace: &StageTrace, name: &str| trace.get(name).map_or(0.0, |s| s.probability);
    let mut forward = Vec::new();
    for o in BellOutcome::ALL {
        forward.push((o, stage_p(&run(engine, setup, o, BellOutcome::PhiPlus)?, "step1")));
    }
    let o1 = sample(&mut rng, &forward);
    let mut back = Vec::new();
    for o in BellOutcome::ALL {
        back.push((o, stage_p(&run(engine, setup, o1, o)?, "step2_clean")));
    }
    Ok([o1, sample(&mut rng, &back)])
}

fn complex(z: Complex64) -> String {
    format!("{:+.12e}{:+.12e}i", z.re, z.im)
}

/// Fidelity of the qubit part of a one-qubit-plus-environment state with `psi`.
fn qubit_fidelity(state: &BlockState, psi: &PureQubit) -> qe_teleport::Result<f64> {
    let d = state.env_dim();
    let qubit = partial_trace(&state.to_full(), &[2, d], &[0])?;
    uhlmann_fidelity(&qubit, &psi.density())
}

pub fn custom(
    setup: &CustomRun,
    engine: &Engine,
    tol: &Tolerances,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let [o1, o2] = match setup.outcomes {
        Some(o) => o,
        None => {
            let o = sampled_outcomes(engine, setup, seed)?;
            println!("outcomes sampled with seed {seed}");
            o
        }
    };
    let trace = run(engine, setup, o1, o2)?;
    println!("custom run: d_E = {}, outcomes {o1} then {o2}", setup.env.dim());

    println!("stages:");
    let mut problems = Vec::new();
    for stage in &trace.stages {
        let outcome = stage.outcome.map_or("-".to_string(), |o| o.to_string());
        println!(
            "  {:<12} outcome {:<5} probability {}",
            stage.name,
            outcome,
            number(stage.probability)
        );
        if stage.outcome.is_some() && (stage.probability - 0.25).abs() > tol.probability {
            problems.push(format!(
                "{} probability {} differs from 1/4",
                stage.name, stage.probability
            ));
        }
    }

    let dephased = &trace.get("dephased").expect("always recorded").state;
    match bell_coherence(dephased, ["B", "C"]) {
        Ok(c) => println!("coherence of the dephased B,C pair: {}", complex(c)),
        Err(e) => println!("coherence of the dephased B,C pair: n/a ({e})"),
    }

    let qubit_stages = [("step1", "C"), ("step2_clean", "A"), ("step2_noisy", "A")];
    println!("qubit-environment correlations:");
    for (name, qubit) in qubit_stages {
        let Some(stage) = trace.get(name) else { continue };
        let reduced = stage.state.reduce(&[qubit])?;
        let coherence = qubit_coherence(&reduced, &setup.psi).map_or_else(|e| format!("n/a ({e})"), complex);
        print!("  {name:<12} qubit {qubit}: coherence {coherence}");
        match CorrelationReport::of(&reduced, tol.separability) {
            Ok(r) => println!(
                ", entanglement {}, separable {}, separability residual {:.3e}",
                number(r.entanglement),
                r.separable,
                r.condition_residual
            ),
            Err(e) => println!(", correlations n/a ({e})"),
        }
    }

    for name in ["step2_clean", "step2_noisy"] {
        if let Some(stage) = trace.get(name) {
            let f = qubit_fidelity(&stage.state.reduce(&["A"])?, &setup.psi)?;
            println!("fidelity of returned qubit A with psi after {name}: {}", number(f));
        }
    }

    if let Some(path) = out {
        let mut table = Table::new(&["stage", "row", "col", "re", "im"]);
        for stage in &trace.stages {
            let m = stage.state.to_full();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let z = m[(i, j)];
                    table.row(vec![
                        stage.name.to_string(),
                        i.to_string(),
                        j.to_string(),
                        number(z.re),
                        number(z.im),
                    ]);
                }
            }
        }
        write_table(&table, path)?;
        println!("per-stage density matrices written to {}", path.display());
    }

    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(problems.join("; ")))
    }
}

#[derive(Serialize)]
struct SuiteSummary<'a> {
    name: &'a str,
    passed: bool,
    checks: usize,
    max_residual: f64,
    tolerance: f64,
    failure: Option<&'a str>,
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    seed: u64,
    count: usize,
    env_dims: &'a [usize],
    passed: bool,
    suites: Vec<SuiteSummary<'a>>,
}

pub fn verify(cfg: &VerifyConfig, out: Option<&Path>) -> Result<(), Failure> {
    println!(
        "verify: seed {} count {} env dims {:?} convention {:?}",
        cfg.seed, cfg.count, cfg.env_dims, cfg.convention
    );
    let reports: Vec<SuiteReport> = run_all(cfg);
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if let Some(path) = out {
        let summary = VerifySummary {
            seed: cfg.seed,
            count: cfg.count,
            env_dims: &cfg.env_dims,
            passed: failed.is_empty(),
            suites: reports
                .iter()
                .map(|r| SuiteSummary {
                    name: r.name,
                    passed: r.passed,
                    checks: r.checks,
                    max_residual: r.max_residual,
                    tolerance: r.tolerance,
                    failure: r.failure.as_deref(),
                })
                .collect(),
        };
        let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))?;
    }
    if failed.is_empty() {
        println!("all {} suites passed", reports.len());
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "suites failed with seed {}: {}",
            cfg.seed,
            failed.join(", ")
        )))
    }
}
