//! Named walk instances used by the CLI, the tests and the acceptance run.
//!
//! Names: `single-edge`, `cycle:N`, `complete:N`, `path-loops:N`, `star:N`
//! (Grover walks on the named graph) and `random:H,K,SEED`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph, GraphSpec};
use crate::linop::Operator;
use crate::szegedy::{random_instance, WalkInstance};

pub fn fixture_graph(name: &str) -> Result<Graph> {
    let bad = || Error::Domain(format!("unknown fixture {name:?}"));
    if name == "single-edge" {
        return build_graph(&GraphSpec::EdgeList {
            vertices: vec!["v0".into(), "v1".into()],
            edges: vec![(0, 1)],
        });
    }
    let (kind, arg) = name.split_once(':').ok_or_else(bad)?;
    let n: usize = arg.parse().map_err(|_| bad())?;
    let spec = match kind {
        "cycle" => GraphSpec::Cycle(n),
        "complete" => GraphSpec::Complete(n),
        "path-loops" => GraphSpec::PathWithLoops(n),
        "star" => GraphSpec::Star(n),
        _ => return Err(bad()),
    };
    build_graph(&spec)
}

pub fn fixture(name: &str) -> Result<WalkInstance> {
    if let Some(arg) = name.strip_prefix("random:") {
        let parts: Vec<&str> = arg.split(',').collect();
        let bad = || Error::Domain(format!("random fixture must be random:H,K,SEED, got {name:?}"));
        let [h, k, seed] = parts[..] else { return Err(bad()) };
        return random_instance(
            h.parse().map_err(|_| bad())?,
            k.parse().map_err(|_| bad())?,
            seed.parse().map_err(|_| bad())?,
        );
    }
    WalkInstance::grover(&fixture_graph(name)?)
}

/// `(dim_H, dim_K)` for a corpus seed: `2 <= dim_H <= 40`, `1 <= dim_K <= dim_H`.
pub fn random_dims(seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d1a5);
    let h = rng.gen_range(2..=40);
    (h, rng.gen_range(1..=h))
}

pub fn random_corpus_name(seed: u64) -> String {
    let (h, k) = random_dims(seed);
    format!("random:{h},{k},{seed}")
}

/// Grover walks on `cycle:3..=8` and `complete:3..=5`.
pub fn graph_corpus_names() -> Vec<String> {
    let mut names: Vec<String> = (3..=8).map(|n| format!("cycle:{n}")).collect();
    names.extend((3..=5).map(|n| format!("complete:{n}")));
    names
}

/// Graph corpus followed by random instances for seeds `1..=50`.
pub fn acceptance_corpus_names() -> Vec<String> {
    let mut names = graph_corpus_names();
    names.extend((1..=50).map(random_corpus_name));
    names
}

/// The 3 x 3 unitary whose induced digraph depends on the chosen partition.
pub fn three_by_three_unitary() -> Operator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_row_slice(
        3,
        3,
        &[h, h, 0.0, 0.0, 0.0, 1.0, -h, h, 0.0].map(crate::linop::re),
    )
}
