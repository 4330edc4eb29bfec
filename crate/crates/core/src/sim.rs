//! Walker dynamics on a decomposition `H = ⊕_v H_v`: finding probabilities,
//! Cesàro averages, limit distributions, localization reports, the induced
//! digraph `G_U`, the block unitarity criterion, unitary equivalence, and the
//! homogeneous two-component walk on a cycle.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::GeneratorDecomposition;
use crate::graph::Graph;
use crate::linop::{self, distance, Operator, State};
use crate::report::ValidationReport;
use crate::spectral_map::SubspaceAtlas;
use crate::szegedy::WalkInstance;

/// Gap below which eigenvalues of `H` are treated as one eigenvalue.
pub const CLUSTER_GAP: f64 = 1e-8;
/// Default relative block-norm threshold for arcs of `G_U`.
pub const TOL_BLOCK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub label: String,
    pub indices: Vec<usize>,
}

/// Decomposition of the coordinates `0..dim` into labelled blocks.
///
/// Blocks are arbitrary index sets: for graph walks, `H_v` is spanned by the
/// arcs leaving `v`, and those are interleaved in arc order.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    dim: usize,
    blocks: Vec<Block>,
}

impl Partition {
    pub fn new(dim: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut owner: Vec<Option<usize>> = vec![None; dim];
        let mut labels = BTreeSet::new();
        for (b, block) in blocks.iter().enumerate() {
            if block.indices.is_empty() {
                return Err(Error::Structural(format!("block {:?} is empty", block.label)));
            }
            if !labels.insert(block.label.as_str()) {
                return Err(Error::Structural(format!("duplicate block label {:?}", block.label)));
            }
            for &i in &block.indices {
                match owner.get_mut(i) {
                    None => {
                        return Err(Error::Structural(format!(
                            "block {:?} references coordinate {i} of a {dim}-dimensional space",
                            block.label
                        )))
                    }
                    Some(Some(prev)) => {
                        return Err(Error::Structural(format!(
                            "coordinate {i} belongs to blocks {:?} and {:?}",
                            blocks[*prev].label, block.label
                        )))
                    }
                    Some(slot) => *slot = Some(b),
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::Structural(format!("coordinate {i} is not covered")));
        }
        Ok(Partition { dim, blocks })
    }

    /// Consecutive blocks of the given sizes.
    pub fn contiguous(sizes: &[(String, usize)]) -> Result<Self> {
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(sizes.len());
        for (label, size) in sizes {
            blocks.push(Block { label: label.clone(), indices: (offset..offset + size).collect() });
            offset += size;
        }
        Partition::new(offset, blocks)
    }

    pub fn singletons(dim: usize) -> Self {
        let blocks = (0..dim).map(|i| Block { label: i.to_string(), indices: vec![i] }).collect();
        Partition { dim, blocks }
    }

    /// `H_v = span{ delta_e : o(e) = v }`.
    pub fn by_origin(g: &Graph) -> Self {
        let blocks = (0..g.num_vertices())
            .map(|v| Block {
                label: g.vertices()[v].clone(),
                indices: g.out_arcs(v).map(|a| a.id).collect(),
            })
            .collect();
        Partition { dim: g.num_arcs(), blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn labels(&self) -> Vec<String> {
        self.blocks.iter().map(|b| b.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.label == label)
    }

    /// `P_x` as a diagonal matrix.
    pub fn projector(&self, block: usize) -> Operator {
        let mut p = Operator::zeros(self.dim, self.dim);
        for &i in &self.blocks[block].indices {
            p[(i, i)] = linop::re(1.0);
        }
        p
    }

    /// `||P_x psi||^2` for every block.
    pub fn distribution(&self, psi: &State) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| b.indices.iter().map(|&i| psi[i].norm_sqr()).sum())
            .collect()
    }

    /// `W_uv = P_u W P_v` restricted to the block coordinates.
    pub fn sub_block(&self, w: &Operator, u: usize, v: usize) -> Operator {
        w.select_rows(&self.blocks[u].indices)
            .select_columns(&self.blocks[v].indices)
    }
}

/// States `Psi_0..Psi_N` and their finding probabilities.
#[derive(Debug, Clone)]
pub struct WalkTrace {
    pub labels: Vec<String>,
    pub states: Vec<State>,
    /// `distributions[n][x] = nu_n(x)`.
    pub distributions: Vec<Vec<f64>>,
}

impl WalkTrace {
    /// Number of steps `N`; the trace holds `N + 1` states.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Cesàro mean over `n = 0..N-1` for every block.
    pub fn cesaro(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 || n > self.distributions.len() {
            return Err(Error::Domain(format!(
                "Cesàro window of {n} steps needs 1..={} recorded steps",
                self.distributions.len()
            )));
        }
        let mut avg = vec![0.0; self.labels.len()];
        for dist in &self.distributions[..n] {
            for (a, p) in avg.iter_mut().zip(dist) {
                *a += p;
            }
        }
        avg.iter_mut().for_each(|a| *a /= n as f64);
        Ok(avg)
    }

    /// Probability conservation and non-negativity.
    pub fn check_invariants(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        for (n, dist) in self.distributions.iter().enumerate() {
            let total: f64 = dist.iter().sum();
            r.check("probability-conservation", format!("n={n}"), (total - 1.0).abs(), 1e-10);
            let low = dist.iter().cloned().fold(0.0f64, f64::min);
            r.check("probability-nonnegative", format!("n={n}"), -low, 1e-14);
        }
        r
    }
}

fn check_state(u: &Operator, part: &Partition, psi0: &State) -> Result<()> {
    let n = u.nrows();
    if u.ncols() != n || part.dim() != n || psi0.len() != n {
        return Err(Error::Dimension(format!(
            "evolution {}x{}, partition over {}, state of length {}",
            u.nrows(),
            u.ncols(),
            part.dim(),
            psi0.len()
        )));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("initial state has norm {norm:.17}, expected 1")));
    }
    Ok(())
}

/// Runs `Psi_{n+1} = U Psi_n` for `n < steps`, calling `visit(n, Psi_n, nu_n)`.
fn stream<F>(u: &Operator, part: &Partition, psi0: &State, steps: usize, mut visit: F)
where
    F: FnMut(usize, &State, Vec<f64>),
{
    let mut psi = psi0.clone();
    for n in 0..=steps {
        let dist = part.distribution(&psi);
        visit(n, &psi, dist);
        if n < steps {
            psi = u * psi;
        }
    }
}

/// `Psi_n = U^n Psi_0` and `nu_n(x) = ||P_x Psi_n||^2` for `n = 0..=steps`.
pub fn evolve_and_measure(
    u: &Operator,
    part: &Partition,
    psi0: &State,
    steps: usize,
) -> Result<WalkTrace> {
    check_state(u, part, psi0)?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut distributions = Vec::with_capacity(steps + 1);
    stream(u, part, psi0, steps, |_, psi, dist| {
        states.push(psi.clone());
        distributions.push(dist);
    });
    Ok(WalkTrace { labels: part.labels(), states, distributions })
}

/// `(1/N) sum_{n<N} nu_n(R)` for a set of block labels `R`.
pub fn time_average(trace: &WalkTrace, region: &[&str], n: usize) -> Result<f64> {
    let idx = region
        .iter()
        .map(|l| {
            trace
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::Domain(format!("unknown block label {l:?}")))
        })
        .collect::<Result<BTreeSet<_>>>()?;
    let avg = trace.cesaro(n)?;
    Ok(idx.iter().map(|&i| avg[i]).sum())
}

/// Groups sorted eigenvalues into runs whose consecutive gaps are at most `gap`.
pub(crate) fn cluster_indices(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(c) if values[i] - values[*c.last().unwrap()] <= gap => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Limit of the Cesàro averages: `sum_j ||P_x Pi_j Psi_0||^2` over the
/// eigenprojections `Pi_j` of `H` onto distinct eigenvalues.
pub fn limit_distribution(
    gen: &GeneratorDecomposition,
    part: &Partition,
    psi0: &State,
) -> Result<Vec<f64>> {
    if part.dim() != gen.h.nrows() || psi0.len() != gen.h.nrows() {
        return Err(Error::Dimension("partition, state and generator sizes differ".into()));
    }
    let (values, basis) = gen.eigenpairs();
    let mut limit = vec![0.0; part.len()];
    for cluster in cluster_indices(&values, CLUSTER_GAP) {
        let b = basis.select_columns(&cluster);
        let component = &b * (b.adjoint() * psi0);
        for (acc, p) in limit.iter_mut().zip(part.distribution(&component)) {
            *acc += p;
        }
    }
    Ok(limit)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub labels: Vec<String>,
    /// `nu_bar_infinity(x)` per block.
    pub limit: Vec<f64>,
    /// `max_x nu_bar_infinity(x)`, a lower bound for `max_x limsup nu_n(x)`.
    pub certified_lower_bound: f64,
    pub argmax: String,
    /// `||P_p(H) Psi_0||^2`; all of `H` is point spectrum in finite dimension.
    pub point_overlap: f64,
    pub discriminant_has_eigenvalues: bool,
    pub d_perp_dim: usize,
    pub localizes: bool,
    pub window: (usize, usize),
    /// Empirical `max_{n in window} nu_n(x)`; an estimate, not a certificate.
    pub window_max: Vec<f64>,
}

/// Localization diagnostics for one initial state.
pub fn localization_report(
    inst: &WalkInstance,
    atlas: &SubspaceAtlas,
    gen: &GeneratorDecomposition,
    part: &Partition,
    psi0: &State,
    window: (usize, usize),
) -> Result<LocalizationReport> {
    check_state(inst.u(), part, psi0)?;
    if window.0 > window.1 {
        return Err(Error::Domain(format!("empty window {window:?}")));
    }
    let limit = limit_distribution(gen, part, psi0)?;
    let (arg, &best) = limit
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("partition has at least one block");
    let (_, basis) = gen.eigenpairs();
    let point_overlap = (basis.adjoint() * psi0).norm_squared();
    let mut window_max = vec![0.0f64; part.len()];
    stream(inst.u(), part, psi0, window.1, |n, _, dist| {
        if n >= window.0 {
            for (m, p) in window_max.iter_mut().zip(dist) {
                *m = m.max(p);
            }
        }
    });
    let discriminant_has_eigenvalues = inst.dim_k() > 0;
    let d_perp_dim = atlas.d_perp.dim();
    Ok(LocalizationReport {
        labels: part.labels(),
        limit,
        certified_lower_bound: best,
        argmax: part.blocks()[arg].label.clone(),
        point_overlap,
        discriminant_has_eigenvalues,
        d_perp_dim,
        localizes: discriminant_has_eigenvalues || d_perp_dim > 0,
        window,
        window_max,
    })
}

/// Digraph induced by an operator and a partition: arc `v -> u` whenever
/// the block `P_u W P_v` is nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredGraph {
    pub labels: Vec<String>,
    /// `(from, to)` block indices, sorted.
    pub arcs: Vec<(usize, usize)>,
}

impl InferredGraph {
    pub fn has_arc(&self, from: &str, to: &str) -> bool {
        let f = self.labels.iter().position(|l| l == from);
        let t = self.labels.iter().position(|l| l == to);
        matches!((f, t), (Some(f), Some(t)) if self.arcs.binary_search(&(f, t)).is_ok())
    }

    /// Arcs as label pairs.
    pub fn labelled_arcs(&self) -> Vec<(String, String)> {
        self.arcs
            .iter()
            .map(|&(f, t)| (self.labels[f].clone(), self.labels[t].clone()))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.arcs.iter().all(|&(f, t)| self.arcs.binary_search(&(t, f)).is_ok())
    }
}

/// `G_U` with the block threshold `tol_block * ||W||_2`.
pub fn infer_graph(w: &Operator, part: &Partition, tol_block: f64) -> InferredGraph {
    let threshold = tol_block * linop::spectral_norm(w);
    let mut arcs = Vec::new();
    for v in 0..part.len() {
        for u in 0..part.len() {
            if part.sub_block(w, u, v).norm() > threshold {
                arcs.push((v, u));
            }
        }
    }
    arcs.sort_unstable();
    InferredGraph { labels: part.labels(), arcs }
}

/// For a graph walk, `G_U` never has an arc missing from the symmetric
/// digraph of the graph, and coincides with it for simple graphs.
pub fn check_graph_support(inst: &WalkInstance) -> ValidationReport {
    let mut r = ValidationReport::new();
    let (Some(g), Some(part)) = (inst.graph(), inst.partition()) else {
        return r;
    };
    let inferred = infer_graph(inst.u(), part, TOL_BLOCK);
    let allowed: BTreeSet<(usize, usize)> =
        g.arcs().iter().map(|a| (a.origin, a.terminal)).collect();
    for &(f, t) in &inferred.arcs {
        r.require(
            "support-subgraph",
            format!("{} -> {}", inferred.labels[f], inferred.labels[t]),
            allowed.contains(&(f, t)),
        );
    }
    if g.is_simple() {
        r.require(
            "support-isomorphic",
            "G_U vs G",
            inferred.arcs.iter().copied().collect::<BTreeSet<_>>() == allowed,
        );
    }
    r
}

/// `sum_x W_ux (W^*)_xv = sum_x (W^*)_ux W_xv = delta_uv P_v` for all `u, v`,
/// cross-checked against `||W^*W - I||` and `||WW^* - I||`.
pub fn block_unitarity_check(w: &Operator, part: &Partition) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = part.dim();
    let tol = 1e-10 * n as f64;
    let wa = w.adjoint();
    let mut blocks_ok = true;
    for u in 0..part.len() {
        for v in 0..part.len() {
            let (ru, cv) = (part.blocks()[u].indices.len(), part.blocks()[v].indices.len());
            let mut left = Operator::zeros(ru, cv);
            let mut right = Operator::zeros(ru, cv);
            for x in 0..part.len() {
                left += part.sub_block(w, u, x) * part.sub_block(&wa, x, v);
                right += part.sub_block(&wa, u, x) * part.sub_block(w, x, v);
            }
            let target = if u == v { Operator::identity(ru, cv) } else { Operator::zeros(ru, cv) };
            let loc = format!("({}, {})", part.blocks()[u].label, part.blocks()[v].label);
            blocks_ok &= r.check("block-ww*", &loc, distance(&left, &target), tol);
            blocks_ok &= r.check("block-w*w", &loc, distance(&right, &target), tol);
        }
    }
    let id = Operator::identity(n, n);
    let global = distance(&(&wa * w), &id).max(distance(&(w * &wa), &id));
    r.require("block-criterion-agreement", "global unitarity", blocks_ok == (global <= tol));
    r
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `max_{n, x} |nu_n(x) - nu~_n(x)|`.
    pub max_deviation: f64,
    /// Whether `W_2` maps every block onto itself, so the second walk uses
    /// the same coordinate partition.
    pub partition_preserved: bool,
    pub report: ValidationReport,
}

/// Compares `(W_1 W_2, {H_v}, Psi_0)` with `(W_2 W_1, {W_2 H_v}, W_2 Psi_0)`.
pub fn equivalence_transform(
    w1: &Operator,
    w2: &Operator,
    part: &Partition,
    psi0: &State,
    steps: usize,
) -> Result<EquivalenceReport> {
    for (name, w) in [("W1", w1), ("W2", w2)] {
        if w.nrows() != w.ncols() || w.nrows() != part.dim() {
            return Err(Error::Dimension(format!("{name} does not act on the partitioned space")));
        }
        let defect = linop::unitarity_defect(w).max(linop::unitarity_defect(&w.adjoint()));
        if defect > 1e-9 {
            return Err(Error::Domain(format!("{name} is not unitary (defect {defect:.3e})")));
        }
    }
    let u = w1 * w2;
    let u_tilde = w2 * w1;
    let first = evolve_and_measure(&u, part, psi0, steps)?;
    let moved: Vec<Operator> = (0..part.len())
        .map(|x| w2 * part.projector(x) * w2.adjoint())
        .collect();
    let mut psi = w2 * psi0;
    let mut max_dev = 0.0f64;
    let mut report = ValidationReport::new();
    for n in 0..=steps {
        for (x, q) in moved.iter().enumerate() {
            let p = (q * &psi).norm_squared();
            let dev = (p - first.distributions[n][x]).abs();
            max_dev = max_dev.max(dev);
        }
        psi = &u_tilde * psi;
    }
    report.check("equivalent-distributions", format!("n <= {steps}"), max_dev, 1e-10);
    let partition_preserved = (0..part.len()).all(|x| {
        let p = part.projector(x);
        distance(&(w2 * &p), &(&p * w2)) <= 1e-10
    });
    Ok(EquivalenceReport { max_deviation: max_dev, partition_preserved, report })
}

/// The translation-invariant walk on `Z / n Z` with internal space `C^2`:
/// `U = sum_x |x+1><x| ⊗ Q + |x-1><x| ⊗ P`.
#[derive(Debug, Clone)]
pub struct HomogeneousWalk {
    pub u: Operator,
    pub partition: Partition,
}

/// Builds `U` without checking that `P` and `Q` give a unitary.
pub fn homogeneous_cycle_operator(p: &Operator, q: &Operator, n_sites: usize) -> Operator {
    let mut u = Operator::zeros(2 * n_sites, 2 * n_sites);
    for x in 0..n_sites {
        let left = (x + n_sites - 1) % n_sites;
        let right = (x + 1) % n_sites;
        for a in 0..2 {
            for b in 0..2 {
                u[(2 * left + a, 2 * x + b)] += p[(a, b)];
                u[(2 * right + a, 2 * x + b)] += q[(a, b)];
            }
        }
    }
    u
}

/// Residuals of `PP^* + QQ^* = P^*P + Q^*Q = 1` and `PQ^* = Q^*P = 0`.
pub fn pq_conditions(p: &Operator, q: &Operator) -> Vec<(&'static str, f64)> {
    let id = Operator::identity(2, 2);
    let (pa, qa) = (p.adjoint(), q.adjoint());
    vec![
        ("PP^* + QQ^* = 1", distance(&(p * &pa + q * &qa), &id)),
        ("P^*P + Q^*Q = 1", distance(&(&pa * p + &qa * q), &id)),
        ("PQ^* = 0", (p * &qa).norm()),
        ("Q^*P = 0", (&qa * p).norm()),
    ]
}

pub fn homogeneous_cycle_walk(p: &Operator, q: &Operator, n_sites: usize) -> Result<HomogeneousWalk> {
    if p.shape() != (2, 2) || q.shape() != (2, 2) {
        return Err(Error::Dimension("P and Q must be 2x2".into()));
    }
    if n_sites < 3 {
        return Err(Error::Domain(format!("cycle walk needs at least 3 sites, got {n_sites}")));
    }
    for (name, residual) in pq_conditions(p, q) {
        if residual > 1e-10 {
            return Err(Error::Domain(format!("{name} violated by {residual:.3e}")));
        }
    }
    let sizes: Vec<(String, usize)> = (0..n_sites).map(|x| (x.to_string(), 2)).collect();
    Ok(HomogeneousWalk {
        u: homogeneous_cycle_operator(p, q, n_sites),
        partition: Partition::contiguous(&sizes)?,
    })
}

/// Ways to pick `Psi_0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// `delta_i` for a coordinate index.
    Basis(usize),
    /// Equal amplitudes on the coordinates of one block.
    BlockUniform(String),
    /// Normalized complex Gaussian vector from a ChaCha8 stream.
    Random(u64),
    Explicit(Vec<Complex64>),
}

impl InitialState {
    /// Parses `arc:<i>`, `vertex-uniform:<label>`, `random:<seed>`, or a JSON
    /// array of `[re, im]` pairs.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("malformed initial-state spec {spec:?}"));
        let spec = spec.trim();
        if spec.starts_with('[') {
            let pairs: Vec<[f64; 2]> = serde_json::from_str(spec)?;
            return Ok(InitialState::Explicit(
                pairs.into_iter().map(|[x, y]| Complex64::new(x, y)).collect(),
            ));
        }
        let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "arc" => arg.parse().map(InitialState::Basis).map_err(|_| bad()),
            "vertex-uniform" => Ok(InitialState::BlockUniform(arg.to_string())),
            "random" => arg.parse().map(InitialState::Random).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }

    pub fn build(&self, part: &Partition) -> Result<State> {
        let n = part.dim();
        let mut psi = State::zeros(n);
        match self {
            InitialState::Basis(i) => {
                if *i >= n {
                    return Err(Error::Domain(format!("coordinate {i} out of range 0..{n}")));
                }
                psi[*i] = linop::re(1.0);
            }
            InitialState::BlockUniform(label) => {
                let b = part
                    .index_of(label)
                    .ok_or_else(|| Error::Domain(format!("unknown block label {label:?}")))?;
                let idx = &part.blocks()[b].indices;
                let amp = 1.0 / (idx.len() as f64).sqrt();
                for &i in idx {
                    psi[i] = linop::re(amp);
                }
            }
            InitialState::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for z in psi.iter_mut() {
                    *z = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                }
                let norm = psi.norm();
                psi /= linop::re(norm);
            }
            InitialState::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::Dimension(format!("state has {} entries, expected {n}", v.len())));
                }
                psi = State::from_vec(v.clone());
            }
        }
        Ok(psi)
    }
}
