//! The operator family of an abstract Szegedy walk.
//!
//! From a coisometry `d_A: H -> K` and a unitary involution `S` on `H`:
//! coin `C = 2 d_A^* d_A - 1`, evolution `U = S C`, second boundary
//! `d_B = d_A S` and discriminant `T = d_A d_B^* = d_A S d_A^*`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{grover_weight, validate_structures, Graph, GraphJson, OneForm, Weight};
use crate::linop::{self, distance, hermiticity_defect, re, Operator, OperatorJson};
use crate::report::ValidationReport;
use crate::sim::Partition;

/// Tolerance used when accepting `d_A` and `S` at assembly time.
pub const ASSEMBLY_TOL: f64 = 1e-9;

/// An assembled walk. Immutable; `d_B` is derived on demand.
#[derive(Debug, Clone)]
pub struct WalkInstance {
    d_a: Operator,
    s: Operator,
    c: Operator,
    u: Operator,
    t: Operator,
    graph: Option<Graph>,
    partition: Option<Partition>,
}

impl WalkInstance {
    pub fn dim_h(&self) -> usize {
        self.d_a.ncols()
    }

    pub fn dim_k(&self) -> usize {
        self.d_a.nrows()
    }

    pub fn d_a(&self) -> &Operator {
        &self.d_a
    }

    pub fn d_b(&self) -> Operator {
        &self.d_a * &self.s
    }

    pub fn s(&self) -> &Operator {
        &self.s
    }

    pub fn c(&self) -> &Operator {
        &self.c
    }

    pub fn u(&self) -> &Operator {
        &self.u
    }

    pub fn t(&self) -> &Operator {
        &self.t
    }

    pub fn graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    /// The vertex decomposition `H = ⊕ H_v`, if one is attached.
    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    /// Attaches a caller-supplied decomposition of `H`.
    pub fn with_partition(mut self, partition: Partition) -> Result<Self> {
        if partition.dim() != self.dim_h() {
            return Err(Error::Dimension(format!(
                "partition covers {} coordinates, walk space has {}",
                partition.dim(),
                self.dim_h()
            )));
        }
        self.partition = Some(partition);
        Ok(self)
    }

    /// Twisted Szegedy walk of a weighted graph with a 1-form.
    pub fn twisted_szegedy(g: &Graph, w: &Weight, theta: &OneForm) -> Result<Self> {
        let d_a = boundary_operator(g, w)?;
        let s = shift_operator(g, theta)?;
        assemble_walk(d_a, s, Some(g.clone()))
    }

    /// Grover walk: Grover weight and zero 1-form.
    pub fn grover(g: &Graph) -> Result<Self> {
        Self::twisted_szegedy(g, &grover_weight(g), &OneForm::zero(g))
    }

    /// All structural invariants at their tight tolerances.
    pub fn check_invariants(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        let (nh, nk) = (self.dim_h(), self.dim_k());
        let (fh, fk) = (nh as f64, nk as f64);
        let id_h = Operator::identity(nh, nh);
        let id_k = Operator::identity(nk, nk);
        let d_b = self.d_b();

        r.check(
            "coisometry",
            "d_A d_A^* - I",
            distance(&(&self.d_a * self.d_a.adjoint()), &id_k),
            1e-11 * fk,
        );
        r.check("shift-selfadjoint", "S - S^*", hermiticity_defect(&self.s), 1e-11 * fh);
        r.check("shift-involution", "S^2 - I", distance(&(&self.s * &self.s), &id_h), 1e-11 * fh);
        r.check("evolution-unitary", "U^*U - I", linop::unitarity_defect(&self.u), 1e-10 * fh);
        r.check(
            "discriminant-selfadjoint",
            "T - T^*",
            hermiticity_defect(&self.t),
            1e-11 * fk,
        );
        r.check(
            "discriminant-factorization",
            "T - d_A d_B^*",
            distance(&self.t, &(&self.d_a * d_b.adjoint())),
            1e-11 * fk,
        );
        r.check(
            "intertwine-a",
            "U d_A^* - d_B^*",
            distance(&(&self.u * self.d_a.adjoint()), &d_b.adjoint()),
            1e-10 * fh,
        );
        r.check(
            "intertwine-b",
            "U d_B^* - (2 d_B^* T - d_A^*)",
            distance(
                &(&self.u * d_b.adjoint()),
                &(d_b.adjoint() * &self.t * re(2.0) - self.d_a.adjoint()),
            ),
            1e-10 * fh,
        );
        match linop::hermitian_eig(&self.t) {
            Ok(dec) => {
                let top = dec.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                r.check("discriminant-contraction", "max |eig T| - 1", (top - 1.0).max(0.0), 1e-9);
            }
            Err(e) => r.violate("discriminant-contraction", e.to_string(), f64::INFINITY),
        }
        r
    }

    pub fn to_json(&self, include_derived: bool) -> WalkJson {
        WalkJson {
            graph: self.graph.as_ref().map(GraphJson::from_graph),
            d_a: OperatorJson::from(&self.d_a),
            s: OperatorJson::from(&self.s),
            c: include_derived.then(|| OperatorJson::from(&self.c)),
            u: include_derived.then(|| OperatorJson::from(&self.u)),
            t: include_derived.then(|| OperatorJson::from(&self.t)),
        }
    }

    /// Reassembles an instance; derived operators, if present, must agree.
    pub fn from_json(j: &WalkJson) -> Result<Self> {
        let graph = match &j.graph {
            Some(g) => Some(g.clone().into_data()?.graph),
            None => None,
        };
        let inst = assemble_walk(Operator::try_from(&j.d_a)?, Operator::try_from(&j.s)?, graph)?;
        let derived = [(&j.c, &inst.c, "C"), (&j.u, &inst.u, "U"), (&j.t, &inst.t, "T")];
        for (stored, computed, name) in derived {
            if let Some(stored) = stored {
                let stored = Operator::try_from(stored)?;
                if stored.shape() != computed.shape() || distance(&stored, computed) > ASSEMBLY_TOL {
                    return Err(Error::Consistency(format!(
                        "stored {name} disagrees with the one rebuilt from d_A and S"
                    )));
                }
            }
        }
        Ok(inst)
    }
}

/// Serialized walk: graph (if any), `d_A`, `S`, and optionally `C`, `U`, `T`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
    pub d_a: OperatorJson,
    pub s: OperatorJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<OperatorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<OperatorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<OperatorJson>,
}

/// `(d_A psi)(v) = sum_{o(e) = v} psi(e) conj(w(e))`.
pub fn boundary_operator(g: &Graph, w: &Weight) -> Result<Operator> {
    let report = validate_structures(g, Some(w), None);
    if !report.passed {
        return Err(Error::Domain(format!("invalid weight: {report}")));
    }
    let mut d = Operator::zeros(g.num_vertices(), g.num_arcs());
    for a in g.arcs() {
        d[(a.origin, a.id)] = w.get(a.id).conj();
    }
    Ok(d)
}

/// `(S psi)(e) = e^{-i theta(e)} psi(inv e)`.
pub fn shift_operator(g: &Graph, theta: &OneForm) -> Result<Operator> {
    let report = validate_structures(g, None, Some(theta));
    if !report.passed {
        return Err(Error::Domain(format!("invalid 1-form: {report}")));
    }
    let mut s = Operator::zeros(g.num_arcs(), g.num_arcs());
    for a in g.arcs() {
        s[(a.id, a.inverse)] = Complex64::from_polar(1.0, -theta.get(a.id));
    }
    Ok(s)
}

/// Builds `C`, `U`, `T` from a coisometry and a unitary involution.
pub fn assemble_walk(d_a: Operator, s: Operator, graph: Option<Graph>) -> Result<WalkInstance> {
    let (nk, nh) = d_a.shape();
    if s.shape() != (nh, nh) {
        return Err(Error::Dimension(format!(
            "shift is {}x{} but d_A is {nk}x{nh}",
            s.nrows(),
            s.ncols()
        )));
    }
    if nk == 0 || nk > nh {
        return Err(Error::Dimension(format!("need 1 <= dim K <= dim H, got {nk} and {nh}")));
    }
    let id_h = Operator::identity(nh, nh);
    let coiso = distance(&(&d_a * d_a.adjoint()), &Operator::identity(nk, nk));
    if coiso > ASSEMBLY_TOL {
        return Err(Error::Domain(format!("d_A is not a coisometry: ||d_A d_A^* - I|| = {coiso:.3e}")));
    }
    let herm = hermiticity_defect(&s);
    if herm > ASSEMBLY_TOL {
        return Err(Error::Domain(format!("S is not self-adjoint: ||S - S^*|| = {herm:.3e}")));
    }
    let invol = distance(&(&s * &s), &id_h);
    if invol > ASSEMBLY_TOL {
        return Err(Error::Domain(format!("S is not an involution: ||S^2 - I|| = {invol:.3e}")));
    }
    let partition = match &graph {
        Some(g) => {
            if g.num_arcs() != nh || g.num_vertices() != nk {
                return Err(Error::Dimension(format!(
                    "graph has {} arcs and {} vertices, operators act on {nh} and {nk}",
                    g.num_arcs(),
                    g.num_vertices()
                )));
            }
            Some(Partition::by_origin(g))
        }
        None => None,
    };
    let c = d_a.adjoint() * &d_a * re(2.0) - &id_h;
    let u = &s * &c;
    let t = &d_a * &s * d_a.adjoint();
    Ok(WalkInstance { d_a, s, c, u, t, graph, partition })
}

/// Seeded random abstract instance (ChaCha8 stream seeded with `seed`).
///
/// `d_A` is the first `dim_k` rows of a random unitary; `S = V diag(±1) V^*`
/// with a second random unitary `V` and fair random signs.
pub fn random_instance(dim_h: usize, dim_k: usize, seed: u64) -> Result<WalkInstance> {
    if dim_k == 0 || dim_k > dim_h {
        return Err(Error::Dimension(format!(
            "random instance needs 1 <= dim_k <= dim_h, got dim_k = {dim_k}, dim_h = {dim_h}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = linop::random_unitary(dim_h, &mut rng);
    let d_a = q.rows(0, dim_k).into_owned();
    let v = linop::random_unitary(dim_h, &mut rng);
    let mut signs = Operator::zeros(dim_h, dim_h);
    for i in 0..dim_h {
        signs[(i, i)] = re(if rng.gen::<bool>() { 1.0 } else { -1.0 });
    }
    let s = &v * signs * v.adjoint();
    let s = (&s + s.adjoint()) * re(0.5);
    assemble_walk(d_a, s, None)
}
