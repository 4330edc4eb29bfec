//! Finite symmetric digraphs with arc inversion, weights and 1-forms.
//!
//! Every undirected edge `k` contributes two arcs: `2k` runs from `u` to `v`
//! (label `"k:f"`) and `2k + 1` runs back (label `"k:b"`). A loop at `v`
//! therefore yields two mutually inverse arcs from `v` to `v`. The arc order
//! fixes the basis of `l^2(D)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

pub type VertexId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub id: ArcId,
    pub origin: VertexId,
    pub terminal: VertexId,
    pub inverse: ArcId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<(VertexId, VertexId)>,
    arcs: Vec<Arc>,
}

impl Graph {
    /// Builds the symmetric digraph of an undirected multigraph.
    ///
    /// Multi-edges and loops are allowed; dangling endpoints and isolated
    /// vertices are rejected.
    pub fn from_edges(vertices: Vec<String>, edges: &[(VertexId, VertexId)]) -> Result<Graph> {
        let n = vertices.len();
        if n == 0 {
            return Err(Error::Structural("graph has no vertices".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::Structural(format!("duplicate vertex id {v:?}")));
            }
        }
        let mut arcs = Vec::with_capacity(2 * edges.len());
        for (k, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Structural(format!(
                    "edge {k} references vertex index {} but only {n} vertices exist",
                    u.max(v)
                )));
            }
            arcs.push(Arc { id: 2 * k, origin: u, terminal: v, inverse: 2 * k + 1 });
            arcs.push(Arc { id: 2 * k + 1, origin: v, terminal: u, inverse: 2 * k });
        }
        let g = Graph { vertices, edges: edges.to_vec(), arcs };
        if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
            return Err(Error::Structural(format!(
                "vertex {:?} is isolated",
                g.vertices[v]
            )));
        }
        Ok(g)
    }

    /// Same as [`Graph::from_edges`] with endpoints given by vertex name.
    pub fn from_named_edges(vertices: Vec<String>, edges: &[(String, String)]) -> Result<Graph> {
        let index: BTreeMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Structural(format!("edge references unknown vertex {name:?}")))
        };
        let pairs = edges
            .iter()
            .map(|(u, v)| Ok((lookup(u)?, lookup(v)?)))
            .collect::<Result<Vec<_>>>()?;
        Graph::from_edges(vertices, &pairs)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.arcs.iter().filter(|a| a.origin == v).count()
    }

    /// Arcs leaving `v`, in arc order.
    pub fn out_arcs(&self, v: VertexId) -> impl Iterator<Item = &Arc> + '_ {
        self.arcs.iter().filter(move |a| a.origin == v)
    }

    /// `"k:f"` or `"k:b"`.
    pub fn arc_label(&self, id: ArcId) -> String {
        format!("{}:{}", id / 2, if id.is_multiple_of(2) { "f" } else { "b" })
    }

    pub fn parse_arc_label(&self, label: &str) -> Result<ArcId> {
        let bad = || Error::Structural(format!("malformed arc id {label:?}"));
        let (edge, dir) = label.split_once(':').ok_or_else(bad)?;
        let edge: usize = edge.parse().map_err(|_| bad())?;
        let id = match dir {
            "f" => 2 * edge,
            "b" => 2 * edge + 1,
            _ => return Err(bad()),
        };
        if id >= self.arcs.len() {
            return Err(Error::Structural(format!("arc id {label:?} out of range")));
        }
        Ok(id)
    }

    pub fn vertex_index(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name)
    }

    /// No loops and no parallel edges.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges
            .iter()
            .all(|&(u, v)| u != v && seen.insert((u.min(v), u.max(v))))
    }
}

/// Standard constructions accepted by [`build_graph`].
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Cycle on `n >= 3` vertices.
    Cycle(usize),
    /// Complete graph on `n >= 2` vertices.
    Complete(usize),
    /// Path on `n >= 2` vertices with one loop at each end, so every vertex
    /// has degree 2.
    PathWithLoops(usize),
    /// Star with `k >= 1` leaves; vertex 0 is the center.
    Star(usize),
    EdgeList {
        vertices: Vec<String>,
        edges: Vec<(VertexId, VertexId)>,
    },
}

fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

fn require_min(kind: &str, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Domain(format!("{kind} needs n >= {min}, got {n}")));
    }
    Ok(())
}

pub fn build_graph(spec: &GraphSpec) -> Result<Graph> {
    match spec {
        GraphSpec::Cycle(n) => {
            require_min("cycle", *n, 3)?;
            let edges: Vec<_> = (0..*n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(numbered(*n), &edges)
        }
        GraphSpec::Complete(n) => {
            require_min("complete graph", *n, 2)?;
            let mut edges = Vec::new();
            for i in 0..*n {
                for j in (i + 1)..*n {
                    edges.push((i, j));
                }
            }
            Graph::from_edges(numbered(*n), &edges)
        }
        GraphSpec::PathWithLoops(n) => {
            require_min("path with loops", *n, 2)?;
            let mut edges = vec![(0, 0)];
            edges.extend((0..n - 1).map(|i| (i, i + 1)));
            edges.push((n - 1, n - 1));
            Graph::from_edges(numbered(*n), &edges)
        }
        GraphSpec::Star(k) => {
            require_min("star", *k, 1)?;
            let edges: Vec<_> = (1..=*k).map(|i| (0, i)).collect();
            Graph::from_edges(numbered(k + 1), &edges)
        }
        GraphSpec::EdgeList { vertices, edges } => Graph::from_edges(vertices.clone(), edges),
    }
}

/// Arc weight `w: D -> C \ {0}`; normalized when `sum_{o(e)=v} |w(e)|^2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    values: Vec<Complex64>,
}

impl Weight {
    /// Raw per-arc values; normalization is checked by [`validate_structures`].
    pub fn from_arc_values(values: Vec<Complex64>) -> Self {
        Weight { values }
    }

    pub fn get(&self, arc: ArcId) -> Complex64 {
        self.values[arc]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Real 1-form on arcs with `theta(inv e) = -theta(e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    values: Vec<f64>,
}

impl OneForm {
    pub fn zero(g: &Graph) -> Self {
        OneForm { values: vec![0.0; g.num_arcs()] }
    }

    /// One value per undirected edge, assigned to its forward arc; the
    /// backward arc gets the negation, so antisymmetry holds exactly.
    pub fn from_edge_values(g: &Graph, per_edge: &[f64]) -> Result<Self> {
        if per_edge.len() != g.num_edges() {
            return Err(Error::Dimension(format!(
                "one-form needs {} edge values, got {}",
                g.num_edges(),
                per_edge.len()
            )));
        }
        let values = (0..g.num_arcs())
            .map(|a| if a % 2 == 0 { per_edge[a / 2] } else { -per_edge[a / 2] })
            .collect();
        Ok(OneForm { values })
    }

    /// Raw per-arc values, possibly violating antisymmetry.
    pub fn from_arc_values(values: Vec<f64>) -> Self {
        OneForm { values }
    }

    pub fn get(&self, arc: ArcId) -> f64 {
        self.values[arc]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `w(e) = 1 / sqrt(deg(o(e)))`.
pub fn grover_weight(g: &Graph) -> Weight {
    let values = g
        .arcs()
        .iter()
        .map(|a| Complex64::new(1.0 / (g.degree(a.origin) as f64).sqrt(), 0.0))
        .collect();
    Weight { values }
}

/// Normalization tolerance per vertex, scaled by its degree.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Antisymmetry tolerance for 1-forms.
pub const ONE_FORM_TOL: f64 = 1e-12;

/// Checks graph, weight and 1-form invariants and reports every violation.
pub fn validate_structures(
    g: &Graph,
    w: Option<&Weight>,
    theta: Option<&OneForm>,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let n = g.num_vertices();
    for (i, a) in g.arcs().iter().enumerate() {
        let loc = g.arc_label(i);
        report.require("arc-index", &loc, a.id == i);
        let valid_inv = a.inverse < g.num_arcs();
        report.require("arc-inverse-range", &loc, valid_inv);
        if !valid_inv {
            continue;
        }
        let inv = g.arc(a.inverse);
        report.require("arc-involution", &loc, inv.inverse == a.id && a.inverse != a.id);
        report.require(
            "arc-endpoints",
            &loc,
            inv.origin == a.terminal && inv.terminal == a.origin,
        );
        report.require("arc-vertex-range", &loc, a.origin < n && a.terminal < n);
    }
    for v in 0..n {
        report.require("isolated-vertex", &g.vertices()[v], g.degree(v) >= 1);
    }

    if let Some(w) = w {
        if w.len() != g.num_arcs() {
            report.violate(
                "weight-length",
                "weight",
                (w.len() as f64 - g.num_arcs() as f64).abs(),
            );
        } else {
            for (i, z) in w.values().iter().enumerate() {
                report.require("weight-nonzero", g.arc_label(i), z.norm() > 0.0);
            }
            for v in 0..n {
                let deg = g.degree(v) as f64;
                let total: f64 = g.out_arcs(v).map(|a| w.get(a.id).norm_sqr()).sum();
                report.check(
                    "weight-normalization",
                    &g.vertices()[v],
                    (total - 1.0).abs(),
                    WEIGHT_TOL * deg.max(1.0),
                );
            }
        }
    }

    if let Some(theta) = theta {
        if theta.values().len() != g.num_arcs() {
            report.violate(
                "one-form-length",
                "one_form",
                (theta.values().len() as f64 - g.num_arcs() as f64).abs(),
            );
        } else {
            for a in g.arcs().iter().filter(|a| a.id < a.inverse) {
                let defect = (theta.get(a.id) + theta.get(a.inverse)).abs();
                report.check("one-form-antisymmetry", g.arc_label(a.id), defect, ONE_FORM_TOL);
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub u: String,
    pub v: String,
}

/// On-disk graph description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
    /// Arc id (`"k:f"`/`"k:b"`) to `[re, im]`; must cover every arc.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, [f64; 2]>>,
    /// Edge index to the angle on its forward arc; missing edges get 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_form: Option<BTreeMap<String, f64>>,
}

/// A graph with the optional weight and 1-form read from JSON.
#[derive(Debug, Clone)]
pub struct GraphData {
    pub graph: Graph,
    pub weight: Option<Weight>,
    pub one_form: Option<OneForm>,
}

impl GraphJson {
    pub fn from_graph(g: &Graph) -> Self {
        GraphJson {
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|&(u, v)| EdgeJson {
                    u: g.vertices()[u].clone(),
                    v: g.vertices()[v].clone(),
                })
                .collect(),
            weights: None,
            one_form: None,
        }
    }

    pub fn with_weight(mut self, g: &Graph, w: &Weight) -> Self {
        self.weights = Some(
            (0..g.num_arcs())
                .map(|a| (g.arc_label(a), [w.get(a).re, w.get(a).im]))
                .collect(),
        );
        self
    }

    pub fn with_one_form(mut self, g: &Graph, theta: &OneForm) -> Self {
        self.one_form = Some(
            (0..g.num_edges())
                .map(|k| (k.to_string(), theta.get(2 * k)))
                .collect(),
        );
        self
    }

    pub fn into_data(self) -> Result<GraphData> {
        let edges: Vec<(String, String)> =
            self.edges.into_iter().map(|e| (e.u, e.v)).collect();
        let graph = Graph::from_named_edges(self.vertices, &edges)?;
        let weight = match self.weights {
            None => None,
            Some(map) => {
                let mut values = vec![None; graph.num_arcs()];
                for (label, [x, y]) in &map {
                    values[graph.parse_arc_label(label)?] = Some(Complex64::new(*x, *y));
                }
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(a, z)| {
                        z.ok_or_else(|| {
                            Error::Structural(format!("weight missing for arc {}", graph.arc_label(a)))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(Weight::from_arc_values(values))
            }
        };
        let one_form = match self.one_form {
            None => None,
            Some(map) => {
                let mut per_edge = vec![0.0; graph.num_edges()];
                for (key, theta) in &map {
                    let k: usize = key
                        .parse()
                        .ok()
                        .filter(|&k| k < graph.num_edges())
                        .ok_or_else(|| Error::Structural(format!("bad one-form edge index {key:?}")))?;
                    per_edge[k] = *theta;
                }
                Some(OneForm::from_edge_values(&graph, &per_edge)?)
            }
        };
        Ok(GraphData { graph, weight, one_form })
    }
}

pub fn parse_graph_json(text: &str) -> Result<GraphData> {
    let raw: GraphJson = serde_json::from_str(text)?;
    raw.into_data()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_and_complete_counts() {
        let c3 = build_graph(&GraphSpec::Cycle(3)).unwrap();
        assert_eq!((c3.num_vertices(), c3.num_arcs()), (3, 6));
        assert!((0..3).all(|v| c3.degree(v) == 2));
        let k3 = build_graph(&GraphSpec::Complete(3)).unwrap();
        assert_eq!((k3.num_vertices(), k3.num_arcs()), (3, 6));
        assert!((0..3).all(|v| k3.degree(v) == 2));
    }

    #[test]
    fn edge_with_loop() {
        let g = build_graph(&GraphSpec::EdgeList {
            vertices: vec!["u".into(), "v".into()],
            edges: vec![(0, 1), (1, 1)],
        })
        .unwrap();
        assert_eq!((g.num_vertices(), g.num_arcs()), (2, 4));
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 3);
        // the loop's two arcs are mutually inverse
        assert_eq!(g.arc(2).inverse, 3);
        assert_eq!((g.arc(2).origin, g.arc(2).terminal), (1, 1));
        assert!(!g.is_simple());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(build_graph(&GraphSpec::Cycle(2)), Err(Error::Domain(_))));
        assert!(matches!(build_graph(&GraphSpec::Complete(1)), Err(Error::Domain(_))));
        let dangling = GraphSpec::EdgeList { vertices: vec!["a".into()], edges: vec![(0, 3)] };
        assert!(matches!(build_graph(&dangling), Err(Error::Structural(_))));
        let isolated = GraphSpec::EdgeList {
            vertices: vec!["a".into(), "b".into(), "c".into()],
            edges: vec![(0, 1)],
        };
        assert!(matches!(build_graph(&isolated), Err(Error::Structural(_))));
    }

    #[test]
    fn grover_weight_examples() {
        let c4 = build_graph(&GraphSpec::Cycle(4)).unwrap();
        let w = grover_weight(&c4);
        assert!(w.values().iter().all(|z| (z.re - 0.5f64.sqrt()).abs() < 1e-15 && z.im == 0.0));

        let edge = build_graph(&GraphSpec::Complete(2)).unwrap();
        assert!(grover_weight(&edge).values().iter().all(|z| *z == Complex64::new(1.0, 0.0)));

        let star = build_graph(&GraphSpec::Star(3)).unwrap();
        let w = grover_weight(&star);
        for a in star.arcs() {
            let want = if a.origin == 0 { 1.0 / 3f64.sqrt() } else { 1.0 };
            assert!((w.get(a.id).re - want).abs() < 1e-16);
        }
    }

    #[test]
    fn validation_examples() {
        let c5 = build_graph(&GraphSpec::Cycle(5)).unwrap();
        assert!(validate_structures(&c5, Some(&grover_weight(&c5)), Some(&OneForm::zero(&c5))).passed);

        let c3 = build_graph(&GraphSpec::Cycle(3)).unwrap();
        let ones = Weight::from_arc_values(vec![Complex64::new(1.0, 0.0); 6]);
        let r = validate_structures(&c3, Some(&ones), None);
        let norm: Vec<_> = r.violations.iter().filter(|v| v.rule == "weight-normalization").collect();
        assert_eq!(norm.len(), 3);
        assert!(norm.iter().all(|v| (v.magnitude - 1.0).abs() < 1e-15));

        let edge = build_graph(&GraphSpec::Complete(2)).unwrap();
        let theta = OneForm::from_arc_values(vec![0.3, 0.3]);
        let r = validate_structures(&edge, None, Some(&theta));
        assert!(!r.passed);
        assert!((r.max_magnitude("one-form-antisymmetry").unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn arc_count_matches_degree_sum() {
        for spec in [
            GraphSpec::Cycle(7),
            GraphSpec::Complete(5),
            GraphSpec::PathWithLoops(4),
            GraphSpec::Star(4),
        ] {
            let g = build_graph(&spec).unwrap();
            let deg_sum: usize = (0..g.num_vertices()).map(|v| g.degree(v)).sum();
            assert_eq!(g.num_arcs(), deg_sum);
            if g.is_simple() {
                assert_eq!(g.num_arcs(), 2 * g.num_edges());
            }
            for a in g.arcs() {
                assert_ne!(a.inverse, a.id);
                assert_eq!(g.arc(a.inverse).inverse, a.id);
            }
            assert!(validate_structures(&g, Some(&grover_weight(&g)), None).passed);
        }
    }

    #[test]
    fn json_round_trip_and_errors() {
        let g = build_graph(&GraphSpec::Cycle(3)).unwrap();
        let w = grover_weight(&g);
        let theta = OneForm::from_edge_values(&g, &[0.1, -0.2, 0.3]).unwrap();
        let text = serde_json::to_string(&GraphJson::from_graph(&g).with_weight(&g, &w).with_one_form(&g, &theta)).unwrap();
        let data = parse_graph_json(&text).unwrap();
        assert_eq!(data.graph, g);
        assert_eq!(data.weight.unwrap(), w);
        assert_eq!(data.one_form.unwrap(), theta);

        let dangling = r#"{"vertices":["a"],"edges":[{"u":"a","v":"b"}]}"#;
        assert!(matches!(parse_graph_json(dangling), Err(Error::Structural(_))));
        let unknown = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b"}],"colour":1}"#;
        assert!(matches!(parse_graph_json(unknown), Err(Error::Json(_))));
        let partial = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b"}],"weights":{"0:f":[1,0]}}"#;
        assert!(matches!(parse_graph_json(partial), Err(Error::Structural(_))));
    }
}
