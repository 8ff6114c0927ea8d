//! Randomized self-checks, grouped into named suites.
//!
//! Each suite draws `count` seeded instances (environment dimensions cycle
//! through `env_dims`) and records the worst residual against its tolerance.
//! The suites check the physics as it actually is. A `Ψ` outcome of the
//! forward step swaps which environment operators sit on which pointer label,
//! so forward states agree exactly only within the `Φ±` and `Ψ±` families; across
//! families they agree up to that relabeling.

use std::fmt;

use crate::entanglement::{dephasing_entanglement, separability_check};
use crate::error::{Error, Result};
use crate::linalg::{trace_distance, uhlmann_fidelity, ComplexMatrix};
use crate::model::{initial_state, BellOutcome, BlockState, DephasingInteraction, PureQubit};
use crate::oracle::{full_run, random_interaction, RandomInstance};
use crate::protocol::{
    bell_coherence, bell_measure, dephase, qubit_coherence, CorrectionConvention, Engine, SecondDephasing,
};
use crate::scenarios::{fig1_table, fig2_table, Fig1Params, Fig2Params};

/// Named tolerances; every one can be overridden from the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Block engine versus closed forms.
    pub engine: f64,
    /// Block engine versus the dense oracle (operator norm).
    pub oracle: f64,
    /// Operator-norm threshold of the separability condition.
    pub separability: f64,
    /// Trace distance of states that must coincide.
    pub roundtrip: f64,
    /// Deviation of outcome probabilities from 1/4.
    pub probability: f64,
    /// Coherence factors that must coincide.
    pub coherence: f64,
    /// Entanglement values that must coincide.
    pub entanglement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            engine: 1e-10,
            oracle: 1e-10,
            separability: 1e-9,
            roundtrip: 1e-12,
            probability: 1e-12,
            coherence: 1e-12,
            entanglement: 1e-10,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 7] = [
        "engine",
        "oracle",
        "separability",
        "roundtrip",
        "probability",
        "coherence",
        "entanglement",
    ];

    /// Overrides one tolerance by name; values must be positive and finite.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {name} must be positive, got {value}"
            )));
        }
        let slot = match name {
            "engine" => &mut self.engine,
            "oracle" => &mut self.oracle,
            "separability" => &mut self.separability,
            "roundtrip" => &mut self.roundtrip,
            "probability" => &mut self.probability,
            "coherence" => &mut self.coherence,
            "entanglement" => &mut self.entanglement,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown tolerance `{other}` (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub count: usize,
    pub env_dims: Vec<usize>,
    pub tolerances: Tolerances,
    pub convention: CorrectionConvention,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 2020,
            count: 100,
            env_dims: vec![2, 3, 4],
            tolerances: Tolerances::default(),
            convention: CorrectionConvention::Standard,
        }
    }
}

impl VerifyConfig {
    fn instances(&self) -> impl Iterator<Item = RandomInstance> + '_ {
        (0..self.count).map(move |i| {
            let seed = self.seed.wrapping_add(i as u64);
            RandomInstance::generate(seed, self.env_dims[i % self.env_dims.len()])
        })
    }
}

/// Result of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// First failing check, if any.
    pub failure: Option<String>,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} checks={:<6} max_residual={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            self.max_residual,
            self.tolerance
        )?;
        if let Some(failure) = &self.failure {
            write!(f, "  first failure: {failure}")?;
        }
        Ok(())
    }
}

/// Accumulates residuals; a residual above tolerance or an error fails the suite.
struct Tally {
    report: SuiteReport,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            report: SuiteReport {
                name,
                passed: true,
                checks: 0,
                max_residual: 0.0,
                tolerance,
                failure: None,
            },
        }
    }

    fn fail(&mut self, context: impl FnOnce() -> String) {
        self.report.passed = false;
        if self.report.failure.is_none() {
            self.report.failure = Some(context());
        }
    }

    fn residual(&mut self, value: f64, context: impl FnOnce() -> String) {
        self.report.checks += 1;
        self.report.max_residual = self.report.max_residual.max(value);
        // written negated so that a NaN residual counts as a failure
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(value <= self.report.tolerance) {
            self.fail(|| format!("{} (residual {value:.3e})", context()));
        }
    }

    fn holds(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.report.checks += 1;
        if !ok {
            self.fail(context);
        }
    }

    fn run(mut self, body: impl FnOnce(&mut Self) -> Result<()>) -> SuiteReport {
        if let Err(e) = body(&mut self) {
            self.fail(|| format!("error: {e}"));
        }
        self.report
    }
}

fn pairs() -> impl Iterator<Item = (BellOutcome, BellOutcome)> {
    BellOutcome::ALL
        .into_iter()
        .flat_map(|a| BellOutcome::ALL.into_iter().map(move |b| (a, b)))
}

fn full(state: &BlockState, keep: &str) -> Result<ComplexMatrix> {
    Ok(state.reduce(&[keep])?.to_full())
}

/// The interaction with pointer labels complemented (`00 <-> 11`, `01 <-> 10`).
fn complemented(interaction: &DephasingInteraction, duration: f64) -> Result<DephasingInteraction> {
    let ops = ["11", "10", "01", "00"].map(|l| interaction.conditional_unitary(l, duration));
    let [a, b, c, d] = ops;
    DephasingInteraction::from_pair_unitaries([a?, b?, c?, d?])
}

/// Forward then clean return: the A ⊗ E state must equal the C ⊗ E state.
pub fn suite_round_trip(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    Tally::new("round_trip", cfg.tolerances.roundtrip).run(|tally| {
        for inst in cfg.instances() {
            for (o1, o2) in pairs() {
                let (_, sigma) = engine.step1(&inst.psi, &inst.env, &inst.interaction1, inst.tau, o1)?;
                let (_, back) = engine.step2(&sigma, o1, o2)?;
                let d = trace_distance(&full(&sigma, "C")?, &full(&back, "A")?)?;
                tally.residual(d, || format!("seed {} outcomes {o1},{o2}", inst.seed));
            }
        }
        Ok(())
    })
}

/// Corrected states per outcome: identical within families and for every
/// return outcome; `Ψ` forward states equal the `Φ+` state of the
/// label-complemented coupling.
pub fn suite_outcome_equivalence(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    Tally::new("outcome_equivalence", cfg.tolerances.roundtrip).run(|tally| {
        for inst in cfg.instances() {
            let forward = |inter: &DephasingInteraction, o| -> Result<BlockState> {
                Ok(engine.step1(&inst.psi, &inst.env, inter, inst.tau, o)?.1)
            };
            let states: Vec<ComplexMatrix> = BellOutcome::ALL
                .iter()
                .map(|&o| full(&forward(&inst.interaction1, o)?, "C"))
                .collect::<Result<_>>()?;
            let swapped = full(
                &forward(&complemented(&inst.interaction1, inst.tau)?, BellOutcome::PhiPlus)?,
                "C",
            )?;
            let seed = inst.seed;
            tally.residual(trace_distance(&states[0], &states[1])?, || {
                format!("seed {seed} forward phi+ vs phi-")
            });
            tally.residual(trace_distance(&states[2], &states[3])?, || {
                format!("seed {seed} forward psi+ vs psi-")
            });
            tally.residual(trace_distance(&states[2], &swapped)?, || {
                format!("seed {seed} forward psi+ vs relabeled phi+")
            });

            for o1 in BellOutcome::ALL {
                let sigma = forward(&inst.interaction1, o1)?;
                let reference = full(&engine.step2(&sigma, o1, BellOutcome::PhiPlus)?.1, "A")?;
                for o2 in &BellOutcome::ALL[1..] {
                    let other = full(&engine.step2(&sigma, o1, *o2)?.1, "A")?;
                    tally.residual(trace_distance(&reference, &other)?, || {
                        format!("seed {seed} return {o1},{o2}")
                    });
                }
            }
        }
        Ok(())
    })
}

/// Every Bell outcome of every measurement has probability 1/4.
pub fn suite_probabilities(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    Tally::new("probabilities", cfg.tolerances.probability).run(|tally| {
        for inst in cfg.instances() {
            let dephased = dephase(
                &initial_state(&inst.psi, &inst.env),
                &inst.interaction1,
                ["B", "C"],
                inst.tau,
            )?;
            for o1 in BellOutcome::ALL {
                let (p, _) = bell_measure(&dephased, ["A", "B"], o1)?;
                tally.residual((p - 0.25).abs(), || format!("seed {} forward {o1}", inst.seed));
            }
            let (_, sigma) = engine.step1(&inst.psi, &inst.env, &inst.interaction1, inst.tau, BellOutcome::PhiPlus)?;
            let noisy = dephase(&sigma, &inst.interaction2, ["A", "B"], inst.t)?;
            for state in [&sigma, &noisy] {
                for o2 in BellOutcome::ALL {
                    let (p, _) = bell_measure(state, ["B", "C"], o2)?;
                    tally.residual((p - 0.25).abs(), || format!("seed {} return {o2}", inst.seed));
                }
            }
        }
        Ok(())
    })
}

/// Coherence of the teleported qubit versus that of the dephased pair:
/// equal for `Φ±`, complex conjugate for `Ψ±`.
pub fn suite_coherence_transfer(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    Tally::new("coherence_transfer", cfg.tolerances.coherence).run(|tally| {
        for inst in cfg.instances() {
            let dephased = dephase(
                &initial_state(&inst.psi, &inst.env),
                &inst.interaction1,
                ["B", "C"],
                inst.tau,
            )?;
            let pair = bell_coherence(&dephased, ["B", "C"])?;
            for o in BellOutcome::ALL {
                let (_, sigma) = engine.step1(&inst.psi, &inst.env, &inst.interaction1, inst.tau, o)?;
                let c = qubit_coherence(&sigma.reduce(&["C"])?, &inst.psi)?;
                let expected = if o.is_phi() { pair } else { pair.conj() };
                tally.residual((c - expected).norm(), || format!("seed {} outcome {o}", inst.seed));
            }
        }
        Ok(())
    })
}

/// `E_CE = 4|α|²|β|² E_BCE`, including `|0>` and `|1>` inputs.
pub fn suite_entanglement_ratio(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    Tally::new("entanglement_ratio", cfg.tolerances.entanglement).run(|tally| {
        for (i, inst) in cfg.instances().enumerate() {
            let inst = match i % 10 {
                0 => inst.with_psi(PureQubit::zero()),
                1 => inst.with_psi(PureQubit::one()),
                _ => inst,
            };
            let dephased = dephase(
                &initial_state(&inst.psi, &inst.env),
                &inst.interaction1,
                ["B", "C"],
                inst.tau,
            )?;
            let e_bce = dephasing_entanglement(&dephased.reduce(&["B", "C"])?)?;
            for o in BellOutcome::ALL {
                let (_, sigma) = engine.step1(&inst.psi, &inst.env, &inst.interaction1, inst.tau, o)?;
                let e_ce = dephasing_entanglement(&sigma.reduce(&["C"])?)?;
                let gap = (e_ce - inst.psi.entanglement_weight() * e_bce).abs();
                tally.residual(gap, || format!("seed {} outcome {o}", inst.seed));
            }
        }
        Ok(())
    })
}

/// Separability verdict agrees with vanishing entanglement on forward states
/// and both noisy return branches; separable forward states give equal
/// entanglement in both branches.
pub fn suite_separability(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    let tol = cfg.tolerances;
    Tally::new("separability", tol.entanglement).run(|tally| {
        for (i, generic) in cfg.instances().enumerate() {
            let inst = if i % 2 == 0 {
                generic
            } else {
                RandomInstance::generate_separable(generic.seed, generic.env.dim())
            };
            let second = SecondDephasing {
                interaction: &inst.interaction2,
                duration: inst.t,
            };
            let mut branch_e = Vec::new();
            let mut forward_separable = false;
            for o2 in [BellOutcome::PhiPlus, BellOutcome::PsiPlus] {
                let trace = engine.run(
                    &inst.psi,
                    &inst.env,
                    &inst.interaction1,
                    inst.tau,
                    Some(second),
                    BellOutcome::PhiPlus,
                    o2,
                )?;
                let ce = trace.get("step1").expect("always recorded").state.reduce(&["C"])?;
                let ae = trace
                    .get("step2_noisy")
                    .expect("second window given")
                    .state
                    .reduce(&["A"])?;
                forward_separable = separability_check(&ce, tol.separability)?.0;
                for (name, state) in [("forward", &ce), ("return", &ae)] {
                    let (separable, residual) = separability_check(state, tol.separability)?;
                    let e = dephasing_entanglement(state)?;
                    tally.holds(separable == (e < 1e-9), || {
                        format!(
                            "seed {} {name} {o2}: separable={separable} residual={residual:.3e} E={e:.3e}",
                            inst.seed
                        )
                    });
                }
                branch_e.push(dephasing_entanglement(&ae)?);
            }
            if forward_separable {
                tally.residual((branch_e[0] - branch_e[1]).abs(), || {
                    format!("seed {} branch entanglement", inst.seed)
                });
            }
        }
        Ok(())
    })
}

/// Every stage of the block engine against the dense oracle.
pub fn suite_oracle(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    Tally::new("oracle_equivalence", cfg.tolerances.oracle).run(|tally| {
        for (i, inst) in cfg.instances().enumerate() {
            // four outcome pairs per instance, cycling through all sixteen
            for (o1, o2) in pairs().skip(4 * (i % 4)).take(4) {
                let second = SecondDephasing {
                    interaction: &inst.interaction2,
                    duration: inst.t,
                };
                let blocks = engine.run(&inst.psi, &inst.env, &inst.interaction1, inst.tau, Some(second), o1, o2)?;
                let dense = full_run(
                    &inst.psi,
                    &inst.env,
                    &inst.interaction1,
                    inst.tau,
                    Some(&inst.interaction2),
                    inst.t,
                    o1,
                    o2,
                )?;
                for stage in &blocks.stages {
                    let reference = dense
                        .get(stage.name)
                        .ok_or_else(|| Error::InvalidStructure(format!("oracle did not emit stage {}", stage.name)))?;
                    let gap = (&stage.state.to_full() - &reference.state.matrix).op_norm();
                    tally.residual(gap, || {
                        format!(
                            "seed {} d_E {} {o1},{o2} stage {}",
                            inst.seed,
                            inst.env.dim(),
                            stage.name
                        )
                    });
                }
            }
        }
        Ok(())
    })
}

/// Identity couplings give textbook teleportation; a zero-length second
/// window changes nothing.
pub fn suite_degenerate(cfg: &VerifyConfig) -> SuiteReport {
    use rand::SeedableRng;
    let engine = Engine::new(cfg.convention);
    Tally::new("degenerate", cfg.tolerances.roundtrip).run(|tally| {
        for inst in cfg.instances() {
            let d = inst.env.dim();
            let id = DephasingInteraction::identity(2, d);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(inst.seed);
            let generated = random_interaction(&mut rng, d, true);
            for (o1, o2) in pairs() {
                let ident = SecondDephasing {
                    interaction: &id,
                    duration: 1.0,
                };
                let trace = engine.run(&inst.psi, &inst.env, &id, inst.tau, Some(ident), o1, o2)?;
                for stage in ["step2_clean", "step2_noisy"] {
                    let a = trace.get(stage).expect("recorded").state.reduce(&["A"])?.to_full();
                    let qubit = crate::linalg::partial_trace(&a, &[2, d], &[0])?;
                    let f = uhlmann_fidelity(&qubit, &inst.psi.density())?;
                    tally.residual(1.0 - f, || format!("seed {} {o1},{o2} {stage} fidelity {f}", inst.seed));
                }

                let zero = SecondDephasing {
                    interaction: &generated,
                    duration: 0.0,
                };
                let trace = engine.run(&inst.psi, &inst.env, &inst.interaction1, inst.tau, Some(zero), o1, o2)?;
                let clean = trace.get("step2_clean").expect("recorded").state.to_full();
                let noisy = trace.get("step2_noisy").expect("recorded").state.to_full();
                tally.residual(trace_distance(&clean, &noisy)?, || {
                    format!("seed {} {o1},{o2} t = 0", inst.seed)
                });
            }
        }
        Ok(())
    })
}

/// The two figure sweeps at their default grids.
pub fn suite_figures(cfg: &VerifyConfig) -> SuiteReport {
    let engine = Engine::new(cfg.convention);
    Tally::new("figures", cfg.tolerances.engine).run(|tally| {
        for row in fig1_table(&Fig1Params::default(), &engine)? {
            tally.residual(row.residual, || {
                format!("coherence sweep |x|^2={} phase={}", row.x2, row.phib_t)
            });
        }
        for row in fig2_table(&Fig2Params::default(), &engine)? {
            tally.residual(row.residual, || {
                format!("entanglement sweep c0={} phase={}", row.c0, row.phase_t)
            });
        }
        Ok(())
    })
}

/// Runs every suite in a fixed order.
pub fn run_all(cfg: &VerifyConfig) -> Vec<SuiteReport> {
    vec![
        suite_round_trip(cfg),
        suite_outcome_equivalence(cfg),
        suite_probabilities(cfg),
        suite_coherence_transfer(cfg),
        suite_entanglement_ratio(cfg),
        suite_separability(cfg),
        suite_oracle(cfg),
        suite_degenerate(cfg),
        suite_figures(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig {
            count: 4,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn all_suites_pass_on_a_small_sample() {
        let cfg = small();
        for report in run_all(&cfg) {
            assert!(report.passed, "{report}");
            assert!(report.checks > 0, "{report}");
        }
    }

    #[test]
    fn corrupted_convention_breaks_the_round_trip() {
        let cfg = VerifyConfig {
            convention: CorrectionConvention::Corrupted,
            ..small()
        };
        let report = suite_round_trip(&cfg);
        assert!(!report.passed);
        assert!(report.failure.unwrap().contains("phi-"));
    }

    #[test]
    fn tolerance_overrides() {
        let mut tol = Tolerances::default();
        tol.set("oracle", 1e-8).unwrap();
        assert_eq!(tol.oracle, 1e-8);
        assert!(tol.set("oracle", -1.0).is_err());
        assert!(tol.set("nonsense", 1.0).is_err());
    }
}
