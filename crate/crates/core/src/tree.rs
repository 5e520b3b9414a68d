//! Scattering trees: leaves hold atomic input states, every internal node
//! merges its children's outputs with a channel and heralds success with
//! repeated weak measurements.
//!
//! Node ids grow level by level, so visiting nodes in id order is a valid
//! post-order. A node that exhausts its retries stops the run, but states
//! of completed subtrees are never recomputed.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criteria::Bipartition;
use crate::evolution::{propagate_cached, PropagatorCache};
use crate::hamiltonian::ScheduledHamiltonian;
use crate::linalg::frobenius;
use crate::state::DensityMatrix;
use crate::weakmeas::{blocks, run_until_success, DeltaSchedule};
use crate::{Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Child {
    Leaf(usize),
    Node(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub id: usize,
    /// Left to right; the leftmost child is the most significant tensor
    /// factor.
    pub children: Vec<Child>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatterTree {
    n_leaves: usize,
    nodes: Vec<TreeNode>,
}

impl ScatterTree {
    /// Explicit layout. Node `i` must have id `i`, at least two children,
    /// and only reference nodes with smaller ids; every leaf and every
    /// non-root node is used exactly once. The last node is the root.
    pub fn from_parts(n_leaves: usize, nodes: Vec<TreeNode>) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::InvalidTree("a tree needs at least one leaf".into()));
        }
        if nodes.is_empty() && n_leaves > 1 {
            return Err(Error::InvalidTree(format!("{n_leaves} leaves but no nodes")));
        }
        let mut leaf_used = vec![false; n_leaves];
        let mut node_used = vec![false; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidTree(format!("node at position {i} has id {}", node.id)));
            }
            if node.children.len() < 2 {
                return Err(Error::InvalidTree(format!("node {i} has fewer than two children")));
            }
            for &c in &node.children {
                let slot = match c {
                    Child::Leaf(l) if l < n_leaves => &mut leaf_used[l],
                    Child::Node(n) if n < i => &mut node_used[n],
                    _ => return Err(Error::InvalidTree(format!("node {i} has invalid child {c:?}"))),
                };
                if core::mem::replace(slot, true) {
                    return Err(Error::InvalidTree(format!("child {c:?} used twice")));
                }
            }
        }
        if let Some(l) = leaf_used.iter().position(|u| !u) {
            if !nodes.is_empty() {
                return Err(Error::InvalidTree(format!("leaf {l} is never merged")));
            }
        }
        if let Some(n) = node_used.iter().take(nodes.len().saturating_sub(1)).position(|u| !u) {
            return Err(Error::InvalidTree(format!("node {n} has no parent")));
        }
        Ok(Self { n_leaves, nodes })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> Child {
        match self.nodes.last() {
            Some(n) => Child::Node(n.id),
            None => Child::Leaf(0),
        }
    }

    /// Number of node levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for n in &self.nodes {
            depth[n.id] = 1 + n
                .children
                .iter()
                .map(|c| match c {
                    Child::Leaf(_) => 0,
                    Child::Node(k) => depth[*k],
                })
                .max()
                .unwrap_or(0);
        }
        depth.last().copied().unwrap_or(0)
    }

    /// Leaves under `child`, left to right.
    pub fn leaves_under(&self, child: Child) -> Vec<usize> {
        match child {
            Child::Leaf(l) => vec![l],
            Child::Node(n) => self.nodes[n].children.iter().flat_map(|&c| self.leaves_under(c)).collect(),
        }
    }
}

/// Balanced tree merging `arity` participants at a time, level by level.
/// A lone remainder at the end of a level moves up unchanged.
pub fn plan_tree(n_leaves: usize, arity: usize) -> Result<ScatterTree> {
    if arity < 2 {
        return Err(Error::InvalidTree(format!("arity must be >= 2, got {arity}")));
    }
    if n_leaves == 0 {
        return Err(Error::InvalidTree("a tree needs at least one leaf".into()));
    }
    let mut level: Vec<Child> = (0..n_leaves).map(Child::Leaf).collect();
    let mut nodes = Vec::new();
    while level.len() > 1 {
        let mut next = Vec::new();
        for group in level.chunks(arity) {
            if group.len() == 1 {
                next.push(group[0]);
            } else {
                let id = nodes.len();
                nodes.push(TreeNode { id, children: group.to_vec() });
                next.push(Child::Node(id));
            }
        }
        level = next;
    }
    ScatterTree::from_parts(n_leaves, nodes)
}

/// The merge channel of one node.
pub trait NodeChannel {
    /// Apply the channel; `level` counts failed attempts so far (0 for the
    /// first application), so implementations can escalate.
    fn apply(&mut self, state: &DensityMatrix, level: usize) -> Result<DensityMatrix>;

    /// Success subspace on the node's merged basis.
    fn bipartition(&self) -> &Bipartition;

    /// Integration steps per application, for reporting.
    fn steps_per_application(&self) -> usize {
        0
    }
}

/// Replaces any input by `P|0⟩⟨0| + (1 − P)|d−1⟩⟨d−1|`, with success
/// subspace `{0}`. Escalation leaves `P` unchanged.
#[derive(Debug, Clone)]
pub struct SyntheticChannel {
    p: f64,
    bp: Bipartition,
}

impl SyntheticChannel {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || dim < 2 {
            return Err(Error::InvalidParameter(format!("synthetic channel needs P in [0, 1] and dim >= 2 (P={p}, dim={dim})")));
        }
        let mut mask = vec![false; dim];
        mask[0] = true;
        Ok(Self { p, bp: Bipartition::from_mask(mask) })
    }
}

impl NodeChannel for SyntheticChannel {
    fn apply(&mut self, state: &DensityMatrix, _level: usize) -> Result<DensityMatrix> {
        let d = self.bp.dim();
        if state.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: state.dim() });
        }
        let mut m = crate::CMatrix::zeros(d, d);
        m[(0, 0)] = C64::new(self.p, 0.0);
        m[(d - 1, d - 1)] += C64::new(1.0 - self.p, 0.0);
        Ok(DensityMatrix::new_unchecked(m))
    }

    fn bipartition(&self) -> &Bipartition {
        &self.bp
    }
}

/// Propagation over the full schedule `[0, s1]`. Retry `k` multiplies every
/// trap frequency by `escalation^k`.
#[derive(Debug, Clone)]
pub struct ScheduledChannel {
    sh: ScheduledHamiltonian,
    n_steps: usize,
    escalation: f64,
    bp: Bipartition,
    caches: BTreeMap<u64, (ScheduledHamiltonian, PropagatorCache)>,
}

impl ScheduledChannel {
    pub fn new(sh: ScheduledHamiltonian, n_steps: usize, escalation: f64, bp: Bipartition) -> Result<Self> {
        if bp.dim() != sh.dim() {
            return Err(Error::DimensionMismatch { expected: sh.dim(), got: bp.dim() });
        }
        if !(escalation >= 1.0 && escalation.is_finite()) || n_steps == 0 {
            return Err(Error::InvalidParameter("need escalation >= 1 and n_steps >= 1".into()));
        }
        Ok(Self { sh, n_steps, escalation, bp, caches: BTreeMap::new() })
    }
}

impl NodeChannel for ScheduledChannel {
    fn apply(&mut self, state: &DensityMatrix, level: usize) -> Result<DensityMatrix> {
        // keyed by the factor so levels with equal traps share propagators
        let factor = self.escalation.powi(level as i32);
        let (sh, cache) = self
            .caches
            .entry(factor.to_bits())
            .or_insert_with(|| (self.sh.with_trap_frequency_factor(factor), PropagatorCache::new()));
        let s1 = sh.schedule.s1();
        Ok(propagate_cached(state, sh, 0.0, s1, self.n_steps, cache)?.final_state)
    }

    fn bipartition(&self) -> &Bipartition {
        &self.bp
    }

    fn steps_per_application(&self) -> usize {
        self.n_steps
    }
}

/// Per-node execution settings.
pub struct NodeSpec {
    pub channel: Box<dyn NodeChannel>,
    pub deltas: DeltaSchedule,
    pub max_iters: usize,
    /// Apply the channel once more after a success flag.
    pub renaturalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub node_id: usize,
    pub iteration: usize,
    pub delta: f64,
    pub flag: bool,
    pub p1: f64,
    pub p_suc_before: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub node_id: usize,
    pub dim: usize,
    pub iterations: usize,
    pub succeeded: bool,
    /// Success weight before the final measurement.
    pub p_suc: f64,
    /// Born probability of the final flag.
    pub p1: f64,
    /// Propagation steps spent at this node.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeRunReport {
    pub nodes: Vec<NodeRecord>,
    pub total_repetitions: usize,
    pub trace: Vec<TraceRecord>,
    /// Root output; `None` after a failure.
    pub final_state: Option<DensityMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeFailure {
    pub error: Error,
    /// Nodes completed before the failure, plus the failing node's record.
    pub report: TreeRunReport,
}

/// Per-node generator: the global seed selects the key, the node id the
/// stream.
pub fn node_rng(global_seed: u64, node_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(global_seed);
    rng.set_stream(node_id as u64);
    rng
}

/// Run every node in post-order.
// the failure carries the partial report, so it is as large as a success
#[allow(clippy::result_large_err)]
pub fn run_tree(
    tree: &ScatterTree,
    leaves: &[DensityMatrix],
    specs: &mut [NodeSpec],
    global_seed: u64,
) -> core::result::Result<TreeRunReport, TreeFailure> {
    let mut report = TreeRunReport { nodes: Vec::new(), total_repetitions: 0, trace: Vec::new(), final_state: None };
    let fail = |error: Error, report: TreeRunReport| Err(TreeFailure { error, report });
    if leaves.len() != tree.n_leaves() {
        return fail(Error::InvalidTree(format!("{} leaf states for {} leaves", leaves.len(), tree.n_leaves())), report);
    }
    if specs.len() != tree.nodes().len() {
        return fail(Error::InvalidTree(format!("{} node specs for {} nodes", specs.len(), tree.nodes().len())), report);
    }
    let mut outputs: Vec<Option<DensityMatrix>> = vec![None; tree.nodes().len()];
    for node in tree.nodes() {
        let mut input: Option<DensityMatrix> = None;
        for &c in &node.children {
            let part = match c {
                Child::Leaf(l) => leaves[l].clone(),
                Child::Node(n) => outputs[n].take().expect("children run first"),
            };
            input = Some(match input {
                None => part,
                Some(acc) => acc.kron(&part),
            });
        }
        let input = input.expect("at least two children");
        let spec = &mut specs[node.id];
        let steps = spec.channel.steps_per_application();
        let mut record = NodeRecord {
            node_id: node.id,
            dim: input.dim(),
            iterations: 0,
            succeeded: false,
            p_suc: 0.0,
            p1: 0.0,
            steps: 0,
        };
        let merged = match spec.channel.apply(&input, 0) {
            Ok(m) => m,
            Err(e) => {
                report.nodes.push(record);
                return fail(e, report);
            }
        };
        let bp = spec.channel.bipartition().clone();
        let mut rng = node_rng(global_seed, node.id);
        let mut applications = 1usize;
        let channel = &mut spec.channel;
        let mut escalate = |rho: &DensityMatrix, k: usize| {
            applications += 1;
            channel.apply(rho, k + 1)
        };
        let rus = run_until_success(&merged, &bp, &spec.deltas, &mut escalate, spec.max_iters, &mut rng);
        let rus = match rus {
            Ok(r) => r,
            Err(e) => {
                report.nodes.push(record);
                return fail(e, report);
            }
        };
        for r in &rus.records {
            report.trace.push(TraceRecord {
                node_id: node.id,
                iteration: r.iteration,
                delta: r.delta,
                flag: r.flag,
                p1: r.p1,
                p_suc_before: r.p_suc_before,
            });
        }
        if let Some(last) = rus.records.last() {
            record.p_suc = last.p_suc_before;
            record.p1 = last.p1;
        }
        record.iterations = rus.iterations;
        record.succeeded = rus.succeeded;
        report.total_repetitions += rus.iterations;
        if !rus.succeeded {
            record.steps = applications * steps;
            report.nodes.push(record);
            return fail(Error::NodeExhausted { node_id: node.id }, report);
        }
        let mut out = rus.state;
        if spec.renaturalize {
            applications += 1;
            out = match spec.channel.apply(&out, 0) {
                Ok(o) => o,
                Err(e) => {
                    report.nodes.push(record);
                    return fail(e, report);
                }
            };
        }
        record.steps = applications * steps;
        report.nodes.push(record);
        outputs[node.id] = Some(out);
    }
    report.final_state = match tree.root() {
        Child::Leaf(l) => Some(leaves[l].clone()),
        Child::Node(n) => outputs[n].take(),
    };
    Ok(report)
}

/// Block decomposition of a channel output by a bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDecomposition {
    /// Weight of the success block.
    pub p0: f64,
    pub rho_suc: Option<DensityMatrix>,
    pub rho_not: Option<DensityMatrix>,
    /// Frobenius norm of the off-diagonal blocks.
    pub coherence_norm: f64,
    /// The off-diagonal blocks themselves.
    pub coherence: crate::CMatrix,
}

pub fn channel_decompose(state: &DensityMatrix, bp: &Bipartition) -> Result<ChannelDecomposition> {
    if state.dim() != bp.dim() {
        return Err(Error::DimensionMismatch { expected: bp.dim(), got: state.dim() });
    }
    let (aa, bb, cross) = blocks(state, bp);
    let p0: f64 = bp.set_a.iter().map(|&i| state.matrix()[(i, i)].re).sum();
    let q = 1.0 - p0;
    Ok(ChannelDecomposition {
        p0,
        rho_suc: (p0 > 0.0).then(|| DensityMatrix::new_unchecked(aa / C64::new(p0, 0.0))),
        rho_not: (q > 0.0).then(|| DensityMatrix::new_unchecked(bb / C64::new(q, 0.0))),
        coherence_norm: frobenius(&cross),
        coherence: cross,
    })
}
