//! Small hand-checked inputs shared by tests, examples and the CLI demo.

use crate::graph::{DemandMatrix, Edge, Matching, WeightedGraph};

fn matching(pairs: &[(usize, usize)]) -> Matching {
    Matching::new(pairs.iter().map(|&(u, v)| Edge::new(u, v))).expect("fixture is a matching")
}

/// Six-node demand matrix built from four matchings with weights
/// 0.1, 0.2, 0.3 and 0.4. Nodes are zero-based.
pub fn six_node_example() -> (DemandMatrix, Vec<(Matching, f64)>) {
    let graph = WeightedGraph::new(
        6,
        [
            (0, 3, 0.4),
            (0, 4, 0.6),
            (1, 2, 0.1),
            (1, 3, 0.3),
            (1, 4, 0.4),
            (1, 5, 0.2),
            (2, 3, 0.2),
            (2, 5, 0.7),
            (3, 5, 0.1),
        ],
    )
    .expect("fixture graph is valid");
    let demand = DemandMatrix::new(graph).expect("fixture is substochastic");
    let entries = vec![
        (matching(&[(0, 4), (1, 2), (3, 5)]), 0.1),
        (matching(&[(0, 4), (1, 5), (2, 3)]), 0.2),
        (matching(&[(0, 4), (1, 3), (2, 5)]), 0.3),
        (matching(&[(0, 3), (1, 4), (2, 5)]), 0.4),
    ];
    (demand, entries)
}
