//! Subcommand drivers. Each reads the config, builds the core objects, runs
//! one module and writes its artifacts into the output directory.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mergo_core::criteria::{bipartition, validate_symmetric, Bipartition, SymmetryValidation};
use mergo_core::evolution::{autocorrelation, default_steps, propagate, propagate_pure_tracked, PropagatorCache};
use mergo_core::hamiltonian::{BlockTag, OperatorBlock};
use mergo_core::linalg::HermitianEigen;
use mergo_core::lzcost::{
    alpha_factors, contact_point, d_e_mol, lcu_query_model, log_space, omega_eff_sq, sweep_velocity, CostParams,
};
use mergo_core::spectrum::{spectrum, Window};
use mergo_core::spin::spin_sector_project;
use mergo_core::symmetry::{antisymmetrize_vector, symmetry_check, SymmetryDeclaration};
use mergo_core::tree::{plan_tree, run_tree, Child, NodeSpec, ScatterTree, ScheduledChannel, SyntheticChannel, TreeRunReport};
use mergo_core::units::{unit_convert, Unit};
use mergo_core::weakmeas::{analyze, lambda_coefficients, weak_measure};
use mergo_core::{Basis, CVector, DensityMatrix, ScheduledHamiltonian, C64};

use crate::config::{
    ChannelConfig, CostConfig, Format, InitialConfig, LzConfig, RunConfig, SystemConfig, WindowConfig,
};
use crate::io::{format_matrix, read_matrix, write_atomic, write_json, write_jsonl, Cell, Table};
use crate::CliError;

/// Synthetic tree nodes act on `2^leaves` states; keep that dense.
const SYNTHETIC_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Propagate a state through the schedule
    Evolve,
    /// Weak measurement of the criterion-accepted subspace
    Measure,
    /// Run a scattering tree
    Tree,
    /// Landau-Zener velocity sweep
    Lz,
    /// Block-encoding cost table
    Cost,
    /// Check a criterion against the declared exchange symmetry
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Measure => "measure",
            Command::Tree => "tree",
            Command::Lz => "lz",
            Command::Cost => "cost",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    /// Relative paths inside the config resolve against this directory.
    pub config_dir: PathBuf,
    /// For `tree`: also run this many consecutive seeds and report the mean.
    pub sweep: Option<usize>,
}

/// Run one subcommand; returns the files written.
pub fn run(cmd: Command, cfg: Option<&RunConfig>, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let need = || cfg.ok_or_else(|| CliError::Config(format!("'{}' needs --config", cmd.name())));
    match cmd {
        Command::Evolve => evolve(need()?, opts),
        Command::Measure => measure(need()?, opts),
        Command::Tree => tree(need()?, opts),
        Command::Validate => validate(need()?, opts),
        Command::Lz => {
            let lz = cfg.and_then(|c| c.lz.clone()).unwrap_or_else(LzConfig::rb_cs);
            lz_sweep(&lz, opts)
        }
        Command::Cost => {
            let c = cfg.and_then(|c| c.cost.clone()).unwrap_or_else(CostConfig::example);
            cost_table(&c, opts)
        }
    }
}

fn system(cfg: &RunConfig) -> Result<&SystemConfig, CliError> {
    RunConfig::require(&cfg.system, "system")
}

fn hamiltonian(cfg: &RunConfig, basis: &Basis, config_dir: &Path) -> Result<ScheduledHamiltonian, CliError> {
    let sys = system(cfg)?;
    let h = RunConfig::require(&cfg.hamiltonian, "hamiltonian")?;
    let schedule = RunConfig::require(&cfg.schedule, "schedule")?.schedule()?;
    if h.external_only {
        let rel = h.external.as_ref().ok_or_else(|| CliError::Config("external_only needs 'external'".into()))?;
        let zero = || OperatorBlock::zeros(basis.size(), BlockTag::External);
        let sh = ScheduledHamiltonian::new(zero(), zero(), zero(), zero(), schedule).map_err(CliError::config)?;
        return sh.with_external(external_block(&config_dir.join(rel))?).map_err(CliError::config);
    }
    let trap = sys.trap(RunConfig::require(&cfg.trap, "trap")?)?;
    let softening = h.softening.atomic(mergo_core::units::Dimension::Length)?;
    let sh = ScheduledHamiltonian::from_partition(
        basis,
        &sys.registers(&h.fragment_a)?,
        &sys.registers(&h.fragment_b)?,
        softening,
        &trap,
        schedule,
    )
    .map_err(CliError::config)?;
    match &h.external {
        None => Ok(sh),
        Some(rel) => sh.with_external(external_block(&config_dir.join(rel))?).map_err(CliError::config),
    }
}

fn external_block(path: &Path) -> Result<OperatorBlock, CliError> {
    let (m, tag) = read_matrix(path)?;
    if tag != "external" {
        return Err(CliError::Config(format!("external matrix is tagged '{tag}'")));
    }
    OperatorBlock::external(m).map_err(CliError::config)
}

/// The density matrix and, for pure inputs, its state vector.
fn initial_state(
    init: &InitialConfig,
    sys: &SystemConfig,
    basis: &Basis,
    decl: Option<&SymmetryDeclaration>,
    sh: Option<&ScheduledHamiltonian>,
) -> Result<(DensityMatrix, Option<CVector>), CliError> {
    let psi = match init {
        InitialConfig::Configuration { sites, spins, symmetrize } => {
            let idx = basis.index_of(&sys.configuration(sites, spins)?).map_err(CliError::config)?;
            let mut v = CVector::zeros(basis.size());
            v[idx] = C64::new(1.0, 0.0);
            if *symmetrize {
                let decl = decl.ok_or_else(|| CliError::Config("symmetrize needs a symmetry declaration".into()))?;
                v = antisymmetrize_vector(&v, decl, basis)?;
            }
            v
        }
        InitialConfig::Eigenstate { index, s } => {
            let sh = sh.ok_or_else(|| CliError::Config("an eigenstate needs a hamiltonian".into()))?;
            let h = sh.evaluate(*s).map_err(CliError::config)?;
            if *index >= basis.size() {
                return Err(CliError::Config(format!("eigenstate {index} out of range for dimension {}", basis.size())));
            }
            HermitianEigen::new(h.matrix()).vectors.column(*index).into_owned()
        }
        InitialConfig::BasisIndex(k) => {
            if *k >= basis.size() {
                return Err(CliError::Config(format!("basis index {k} out of range for dimension {}", basis.size())));
            }
            let mut v = CVector::zeros(basis.size());
            v[*k] = C64::new(1.0, 0.0);
            v
        }
        InitialConfig::MaximallyMixed => return Ok((DensityMatrix::maximally_mixed(basis.size()), None)),
    };
    Ok((DensityMatrix::from_pure(&psi)?, Some(psi)))
}

#[derive(Serialize)]
struct EvolveReport {
    command: &'static str,
    seed: u64,
    dim: usize,
    s_from: f64,
    s_to: f64,
    steps: usize,
    norm_drift: f64,
    trace: f64,
    purity: f64,
    energy_initial: f64,
    energy_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry_deviation: Option<f64>,
    final_populations: Vec<f64>,
}

fn evolve(cfg: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let sys = system(cfg)?;
    let ev = RunConfig::require(&cfg.evolve, "evolve")?;
    let basis = sys.basis()?;
    let decl = sys.symmetry()?;
    let sh = hamiltonian(cfg, &basis, &opts.config_dir)?;
    let (rho0, psi0) = initial_state(&ev.initial, sys, &basis, decl.as_ref(), Some(&sh))?;
    let s_to = ev.s_to.unwrap_or(sh.schedule.s1());
    let steps = ev.steps.unwrap_or_else(|| default_steps(&sh, ev.s_from, s_to));
    // pure inputs step the vector; the density route costs two products per step
    let (final_state, norm_drift) = match &psi0 {
        Some(psi) => {
            let (v, drift) = propagate_pure_tracked(psi, &sh, ev.s_from, s_to, steps, &mut PropagatorCache::new())?;
            (DensityMatrix::new_unchecked(&v * v.adjoint()), drift)
        }
        None => {
            let out = propagate(&rho0, &sh, ev.s_from, s_to, steps)?;
            (out.final_state, out.norm_drift)
        }
    };
    let h_from = sh.evaluate(ev.s_from)?;
    let h_to = sh.evaluate(s_to)?;
    let rho = &final_state;
    let report = EvolveReport {
        command: "evolve",
        seed: opts.seed,
        dim: basis.size(),
        s_from: ev.s_from,
        s_to,
        steps,
        norm_drift,
        trace: rho.trace(),
        purity: rho.purity(),
        energy_initial: rho0.expectation(h_from.matrix()),
        energy_final: rho.expectation(h_to.matrix()),
        symmetry_deviation: decl.as_ref().map(|d| symmetry_check(rho, d, &basis)).transpose()?.map(|r| r.max_deviation),
        final_populations: rho.populations(),
    };
    let mut files = Vec::new();
    let path = opts.out.join("evolve_report.json");
    write_json(&path, &report)?;
    files.push(path);
    if ev.write_state {
        let path = opts.out.join("final_state.txt");
        write_atomic(&path, format_matrix(rho.matrix(), "density").as_bytes())?;
        files.push(path);
    }
    if let Some(c) = &ev.correlation {
        let psi = psi0.ok_or_else(|| CliError::Config("correlation needs a pure initial state".into()))?;
        let h = sh.evaluate(c.s)?;
        let series = autocorrelation(&psi, h.matrix(), c.t_max, c.samples)?;
        let mut t = Table::new(&["t[au_time]", "re_c", "im_c", "abs_c"]);
        for (time, z) in &series {
            t.push(vec![Cell::Num(*time), Cell::Num(z.re), Cell::Num(z.im), Cell::Num(z.norm())]);
        }
        files.push(t.write(&opts.out, "correlation", opts.format)?);
        if c.spectrum {
            let window = match c.window {
                WindowConfig::Hann => Window::Hann,
                WindowConfig::Rectangular => Window::Rectangular,
            };
            let mut t = Table::new(&["omega[hartree]", "intensity"]);
            for (w, i) in spectrum(&series, window)? {
                t.push(vec![Cell::Num(w), Cell::Num(i)]);
            }
            files.push(t.write(&opts.out, "spectrum", opts.format)?);
        }
    }
    Ok(files)
}

#[derive(Serialize)]
struct Lambdas {
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Serialize)]
struct SpinReport {
    target: f64,
    probability: f64,
}

#[derive(Serialize)]
struct MeasureReport {
    command: &'static str,
    seed: u64,
    dim: usize,
    delta: f64,
    set_a: usize,
    set_b: usize,
    p_suc: f64,
    p1: f64,
    p0: f64,
    flag: bool,
    probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Lambdas>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry_deviation_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry_deviation_after: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spin: Option<SpinReport>,
    post_populations: Vec<f64>,
}

fn measure(cfg: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let sys = system(cfg)?;
    let m = RunConfig::require(&cfg.measure, "measure")?;
    let basis = sys.basis()?;
    let decl = sys.symmetry()?;
    let criterion = sys.criterion(RunConfig::require(&cfg.criterion, "criterion")?)?;
    let bp = bipartition(&criterion, &basis).map_err(CliError::config)?;
    let needs_h = m.propagate || matches!(m.initial, InitialConfig::Eigenstate { .. });
    let sh = if needs_h { Some(hamiltonian(cfg, &basis, &opts.config_dir)?) } else { None };
    let (mut rho, _) = initial_state(&m.initial, sys, &basis, decl.as_ref(), sh.as_ref())?;
    if m.propagate {
        let sh = sh.as_ref().expect("built above");
        let s1 = sh.schedule.s1();
        let steps = m.steps.unwrap_or_else(|| default_steps(sh, 0.0, s1));
        rho = propagate(&rho, sh, 0.0, s1, steps)?.final_state;
    }
    let analytic = analyze(&rho, &bp, m.delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let out = weak_measure(&rho, &bp, m.delta, &mut rng)?;
    let lambda = lambda_coefficients(m.delta, analytic.p_suc).ok().map(|(a, b, c)| Lambdas { a, b, c });
    let spin = match &m.spin {
        None => None,
        Some(s) => {
            let regs = sys.registers(&s.particles)?;
            let target = s.target.target();
            let probability = match spin_sector_project(&out.post_state, &basis, &regs, target) {
                Ok((p, _)) => p,
                Err(mergo_core::Error::EmptySector(p)) => p,
                Err(e) => return Err(e.into()),
            };
            let value = match target {
                mergo_core::spin::SpinTarget::Singlet => 0.0,
                mergo_core::spin::SpinTarget::Triplet => 1.0,
                mergo_core::spin::SpinTarget::Total(s) => s,
            };
            Some(SpinReport { target: value, probability })
        }
    };
    let dev = |r: &DensityMatrix| -> Result<Option<f64>, CliError> {
        Ok(decl.as_ref().map(|d| symmetry_check(r, d, &basis)).transpose()?.map(|r| r.max_deviation))
    };
    let report = MeasureReport {
        command: "measure",
        seed: opts.seed,
        dim: basis.size(),
        delta: m.delta,
        set_a: bp.set_a.len(),
        set_b: bp.set_b.len(),
        p_suc: analytic.p_suc,
        p1: analytic.p1,
        p0: analytic.p0,
        flag: out.flag,
        probability: out.probability,
        lambda,
        symmetry_deviation_before: dev(&rho)?,
        symmetry_deviation_after: dev(&out.post_state)?,
        spin,
        post_populations: out.post_state.populations(),
    };
    let path = opts.out.join("measure_report.json");
    write_json(&path, &report)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct NodeJson {
    node_id: usize,
    children: Vec<String>,
    dim: usize,
    iterations: usize,
    succeeded: bool,
    p_suc: f64,
    p1: f64,
    steps: usize,
}

#[derive(Serialize)]
struct TraceJson {
    node_id: usize,
    iteration: usize,
    delta: f64,
    flag: bool,
    p1: f64,
    p_suc_before: f64,
}

#[derive(Serialize)]
struct TreeJson {
    command: &'static str,
    seed: u64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed_node: Option<usize>,
    n_leaves: usize,
    n_nodes: usize,
    depth: usize,
    total_repetitions: usize,
    nodes: Vec<NodeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_populations: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SweepJson {
    command: &'static str,
    first_seed: u64,
    runs: usize,
    exhausted_runs: usize,
    mean_total_repetitions: f64,
    totals: Vec<usize>,
}

struct TreeSetup {
    tree: ScatterTree,
    leaves: Vec<DensityMatrix>,
    make_specs: Box<dyn Fn() -> Result<Vec<NodeSpec>, CliError>>,
}

fn tree_setup(cfg: &RunConfig, opts: &Options) -> Result<TreeSetup, CliError> {
    let t = RunConfig::require(&cfg.tree, "tree")?;
    let tree = plan_tree(t.leaves, t.arity).map_err(CliError::config)?;
    let deltas = t.delta.schedule();
    deltas.validate().map_err(CliError::config)?;
    let (max_iters, renaturalize) = (t.max_iters, t.renaturalize);
    if max_iters == 0 {
        return Err(CliError::Config("max_iters must be >= 1".into()));
    }
    match &t.channel {
        ChannelConfig::Synthetic { p, per_node } => {
            let probs: Vec<f64> = match (p, per_node) {
                (Some(p), None) => vec![*p; tree.nodes().len()],
                (None, Some(v)) if v.len() == tree.nodes().len() => v.clone(),
                (None, Some(v)) => {
                    return Err(CliError::Config(format!("per_node lists {} values for {} nodes", v.len(), tree.nodes().len())))
                }
                _ => return Err(CliError::Config("synthetic channel needs exactly one of p and per_node".into())),
            };
            if t.leaves > 12 || 1usize << t.leaves > SYNTHETIC_DIM_CAP {
                return Err(CliError::Config(format!("synthetic trees are limited to {SYNTHETIC_DIM_CAP} root states")));
            }
            let dims: Vec<usize> =
                tree.nodes().iter().map(|n| 1usize << tree.leaves_under(Child::Node(n.id)).len()).collect();
            for (&p, &d) in probs.iter().zip(&dims) {
                SyntheticChannel::new(p, d).map_err(CliError::config)?;
            }
            let leaves = vec![DensityMatrix::basis_state(2, 1); t.leaves];
            let make_specs = Box::new(move || {
                Ok(probs
                    .iter()
                    .zip(&dims)
                    .map(|(&p, &d)| NodeSpec {
                        channel: Box::new(SyntheticChannel::new(p, d).expect("validated")),
                        deltas,
                        max_iters,
                        renaturalize,
                    })
                    .collect())
            });
            Ok(TreeSetup { tree, leaves, make_specs })
        }
        ChannelConfig::Scheduled { steps, escalation } => {
            if t.leaves != 2 {
                return Err(CliError::Config("the scheduled channel merges exactly two leaves".into()));
            }
            let sys = system(cfg)?;
            let h = RunConfig::require(&cfg.hamiltonian, "hamiltonian")?;
            let basis = sys.basis()?;
            let a = sys.registers(&h.fragment_a)?;
            if a != (0..a.len()).collect::<Vec<_>>() {
                return Err(CliError::Config("fragment A must be the leading particles".into()));
            }
            let sh = hamiltonian(cfg, &basis, &opts.config_dir)?;
            let criterion = sys.criterion(RunConfig::require(&cfg.criterion, "criterion")?)?;
            let bp: Bipartition = bipartition(&criterion, &basis).map_err(CliError::config)?;
            let init = t.initial.as_ref().ok_or_else(|| CliError::Config("scheduled tree needs 'initial'".into()))?;
            let idx = match init {
                InitialConfig::Configuration { sites, spins, symmetrize: false } => {
                    basis.index_of(&sys.configuration(sites, spins)?).map_err(CliError::config)?
                }
                InitialConfig::BasisIndex(k) if *k < basis.size() => *k,
                _ => return Err(CliError::Config("tree leaves need an unsymmetrized configuration".into())),
            };
            let dim_a: usize = (0..a.len()).map(|r| basis.local_dim(r)).product();
            let dim_b = basis.size() / dim_a;
            let leaves = vec![DensityMatrix::basis_state(dim_a, idx / dim_b), DensityMatrix::basis_state(dim_b, idx % dim_b)];
            let n_steps = steps.unwrap_or_else(|| default_steps(&sh, 0.0, sh.schedule.s1()));
            let channel = ScheduledChannel::new(sh, n_steps, *escalation, bp).map_err(CliError::config)?;
            let make_specs = Box::new(move || {
                Ok(vec![NodeSpec { channel: Box::new(channel.clone()), deltas, max_iters, renaturalize }])
            });
            Ok(TreeSetup { tree, leaves, make_specs })
        }
    }
}

fn child_name(c: &Child) -> String {
    match c {
        Child::Leaf(l) => format!("leaf:{l}"),
        Child::Node(n) => format!("node:{n}"),
    }
}

fn tree_json(setup: &TreeSetup, report: &TreeRunReport, seed: u64, failed_node: Option<usize>) -> TreeJson {
    TreeJson {
        command: "tree",
        seed,
        status: if failed_node.is_some() { "node_exhausted" } else { "ok" },
        failed_node,
        n_leaves: setup.tree.n_leaves(),
        n_nodes: setup.tree.nodes().len(),
        depth: setup.tree.depth(),
        total_repetitions: report.total_repetitions,
        nodes: report
            .nodes
            .iter()
            .map(|r| NodeJson {
                node_id: r.node_id,
                children: setup.tree.nodes()[r.node_id].children.iter().map(child_name).collect(),
                dim: r.dim,
                iterations: r.iterations,
                succeeded: r.succeeded,
                p_suc: r.p_suc,
                p1: r.p1,
                steps: r.steps,
            })
            .collect(),
        final_populations: report.final_state.as_ref().map(|s| s.populations()),
    }
}

fn tree(cfg: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let setup = tree_setup(cfg, opts)?;
    let mut specs = (setup.make_specs)()?;
    let (report, failure) = match run_tree(&setup.tree, &setup.leaves, &mut specs, opts.seed) {
        Ok(r) => (r, None),
        Err(f) => (f.report, Some(f.error)),
    };
    let failed_node = match &failure {
        Some(mergo_core::Error::NodeExhausted { node_id }) => Some(*node_id),
        Some(e) => return Err(e.clone().into()),
        None => None,
    };
    let mut files = Vec::new();
    let path = opts.out.join("tree_report.json");
    write_json(&path, &tree_json(&setup, &report, opts.seed, failed_node))?;
    files.push(path);
    let trace: Vec<TraceJson> = report
        .trace
        .iter()
        .map(|r| TraceJson {
            node_id: r.node_id,
            iteration: r.iteration,
            delta: r.delta,
            flag: r.flag,
            p1: r.p1,
            p_suc_before: r.p_suc_before,
        })
        .collect();
    let path = opts.out.join("trace.jsonl");
    write_jsonl(&path, &trace)?;
    files.push(path);
    if let Some(runs) = opts.sweep {
        let mut totals = Vec::with_capacity(runs);
        let mut exhausted = 0;
        for k in 0..runs as u64 {
            let mut specs = (setup.make_specs)()?;
            match run_tree(&setup.tree, &setup.leaves, &mut specs, opts.seed.wrapping_add(k)) {
                Ok(r) => totals.push(r.total_repetitions),
                Err(f) if matches!(f.error, mergo_core::Error::NodeExhausted { .. }) => {
                    exhausted += 1;
                    totals.push(f.report.total_repetitions);
                }
                Err(f) => return Err(f.error.into()),
            }
        }
        let mean = totals.iter().sum::<usize>() as f64 / runs.max(1) as f64;
        let path = opts.out.join("tree_sweep.json");
        write_json(
            &path,
            &SweepJson {
                command: "tree",
                first_seed: opts.seed,
                runs,
                exhausted_runs: exhausted,
                mean_total_repetitions: mean,
                totals,
            },
        )?;
        files.push(path);
    }
    match failed_node {
        Some(node_id) => Err(CliError::NodeExhausted { node_id }),
        None => Ok(files),
    }
}

#[derive(Serialize)]
struct LzSummary {
    command: &'static str,
    mu: f64,
    omega: f64,
    omega_a: f64,
    relative_binding: f64,
    harmonic_length: f64,
    contact_point: f64,
    omega_eff_sq: f64,
    d_e_mol: f64,
    in_regime: bool,
    points: usize,
}

fn lz_sweep(lz: &LzConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let (base, v_min, v_max) = lz.params()?;
    let speeds = log_space(v_min, v_max, lz.per_decade).map_err(CliError::config)?;
    let rows = sweep_velocity(&base, &speeds)?;
    let mut t = Table::new(&["v[m/s]", "v[au_velocity]", "p_lz", "p_lz_bound", "p_suc", "in_regime"]);
    for (v, r) in &rows {
        let si = unit_convert(*v, Unit::AuVelocity, Unit::MetersPerSecond)?;
        t.push(vec![Cell::Num(si), Cell::Num(*v), Cell::Num(r.p_lz), Cell::Num(r.p_lz_bound), Cell::Num(r.p_suc), Cell::Bool(r.in_regime)]);
    }
    let mut files = vec![t.write(&opts.out, "lz", opts.format)?];
    let summary = LzSummary {
        command: "lz",
        mu: base.mu,
        omega: base.omega,
        omega_a: base.omega_a,
        relative_binding: base.relative_binding(),
        harmonic_length: base.harmonic_length(),
        contact_point: contact_point(&base),
        omega_eff_sq: omega_eff_sq(&base),
        d_e_mol: d_e_mol(&base),
        in_regime: base.relative_binding() >= 1.0,
        points: rows.len(),
    };
    let path = opts.out.join("lz_summary.json");
    write_json(&path, &summary)?;
    files.push(path);
    Ok(files)
}

fn cost_table(c: &CostConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let base = c.params();
    let mut rows: Vec<(&str, CostParams)> = vec![
        ("base", base),
        ("double_n_grid", CostParams { n_grid: 2.0 * base.n_grid, ..base }),
        ("double_box_volume", CostParams { box_volume: 2.0 * base.box_volume, ..base }),
        ("double_omega_max", CostParams { omega_max: 2.0 * base.omega_max, ..base }),
        ("double_n_nuc", CostParams { n_nuc: 2 * base.n_nuc, ..base }),
    ];
    if let Some(w) = c.omega_per_nucleus {
        rows.push(("omega_per_nucleus", CostParams { omega_max: w * base.n_nuc as f64, ..base }));
        rows.push(("omega_per_nucleus_double_n_nuc", CostParams { n_nuc: 2 * base.n_nuc, omega_max: w * 2.0 * base.n_nuc as f64, ..base }));
    }
    let mut t = Table::new(&[
        "row",
        "n_el",
        "n_nuc",
        "n_grid",
        "box_volume[bohr^3]",
        "trap_volume[bohr^3]",
        "omega_max[hartree]",
        "m_max[m_e]",
        "alpha_t[scaling]",
        "alpha_v[scaling]",
        "alpha_u[scaling]",
        "alpha_trap[scaling]",
        "alpha_trap_bound[scaling]",
        "prep_branches",
        "sel_ancillas[qubits]",
        "repetitions[scaling]",
        "schedule_oracle_calls[scaling]",
    ]);
    for (name, p) in rows {
        let a = alpha_factors(&p).map_err(CliError::config)?;
        let l = lcu_query_model(&p, c.bits, c.axes).map_err(CliError::config)?;
        t.push(vec![
            Cell::Text(name.to_string()),
            Cell::Int(p.n_el as u64),
            Cell::Int(p.n_nuc as u64),
            Cell::Num(p.n_grid),
            Cell::Num(p.box_volume),
            Cell::Num(p.trap_volume),
            Cell::Num(p.omega_max),
            Cell::Num(p.m_max),
            Cell::Num(a.alpha_t),
            Cell::Num(a.alpha_v),
            Cell::Num(a.alpha_u),
            Cell::Num(a.alpha_trap),
            Cell::Num(a.alpha_trap_bound),
            Cell::Int(l.prep_branches as u64),
            Cell::Int(l.sel_ancillas as u64),
            Cell::Num(l.repetitions),
            Cell::Num(l.schedule_oracle_calls),
        ]);
    }
    Ok(vec![t.write(&opts.out, "cost", opts.format)?])
}

#[derive(Serialize)]
struct Counterexample {
    permutation: Vec<usize>,
    index: usize,
    sites: Vec<[i64; 3]>,
}

#[derive(Serialize)]
struct ValidateReport {
    command: &'static str,
    symmetric: bool,
    checked: usize,
    exhaustive: bool,
    set_a: usize,
    set_b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<Counterexample>,
}

fn validate(cfg: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let sys = system(cfg)?;
    let basis = sys.basis()?;
    let decl = sys.symmetry()?.ok_or_else(|| CliError::Config("validate needs a symmetry declaration".into()))?;
    let c = sys.criterion(RunConfig::require(&cfg.criterion, "criterion")?)?;
    let bp = bipartition(&c, &basis).map_err(CliError::config)?;
    let report = match validate_symmetric(&c, &decl, &basis, opts.seed)? {
        SymmetryValidation::Symmetric { checked, exhaustive } => ValidateReport {
            command: "validate",
            symmetric: true,
            checked,
            exhaustive,
            set_a: bp.set_a.len(),
            set_b: bp.set_b.len(),
            counterexample: None,
        },
        SymmetryValidation::Counterexample { permutation, index } => ValidateReport {
            command: "validate",
            symmetric: false,
            checked: 0,
            exhaustive: false,
            set_a: bp.set_a.len(),
            set_b: bp.set_b.len(),
            counterexample: Some(Counterexample {
                permutation: permutation.map().to_vec(),
                index,
                sites: basis.configuration_at(index).sites.iter().map(|s| s.0).collect(),
            }),
        },
    };
    let path = opts.out.join("validate_report.json");
    write_json(&path, &report)?;
    Ok(vec![path])
}
