//! Max-product belief propagation for maximum weight independent set on
//! sparse random graphs, with the exact oracles used to check it: the edge
//! LP relaxation, branch-and-bound, tree dynamic programming and computation
//! tree unrolling. The [`experiments`] module runs the Monte Carlo studies.
//!
//! ```
//! use mwis_core::{build_graph, mp_run, NodeWeights, TriState};
//!
//! let g = build_graph(3, [(0, 1), (1, 2)]).unwrap();
//! let w = NodeWeights::new(vec![1.0, 3.0, 1.0]).unwrap();
//! let run = mp_run(&g, &w, 5, 1e-9);
//! let last = run.trace.last().unwrap();
//! assert_eq!(last.estimate, vec![TriState::Zero, TriState::One, TriState::Zero]);
//! ```

pub mod ball;
pub mod comptree;
pub mod ensembles;
pub mod exact;
pub mod experiments;
pub mod graph;
pub mod half;
pub mod io;
pub mod lp;
pub mod maxproduct;
pub mod weights;

pub use ball::{ball, ball_is_tree, Ball};
pub use comptree::{classify_root, tree_size, unroll, CompTreeError, ComputationTree};
pub use ensembles::{
    gen_erdos_renyi, gen_limit_tree, gen_poisson_tree, gen_random_regular, gen_regular_tree,
    sample_exp_weights, Ensemble, EnsembleError, EnsembleSpec,
};
pub use exact::{mwis_exact, tree_mwis_classify, ExactError, Membership, MwisResult};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentKind, RunReport};
pub use graph::{build_graph, Graph, GraphError, RootedTree};
pub use half::Half;
pub use io::{load_graph, parse_graph, save_graph, GraphFile, IoError};
pub use lp::{enumerate_lp_optima, solve_edge_lp, LpError, LpSolution};
pub use maxproduct::{
    bonus_and_estimate, extract_stable_set, mp_run, mp_run_tree_boundary, mp_run_with, mp_step,
    BoundaryCondition, MaxProductError, MessageState, MpConfig, MpRun, Trace, TraceMode, TriState,
};
pub use weights::{NodeWeights, ScaledWeights, WeightError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/max_product.md")]
    mod max_product {}
    #[doc = include_str!("../../../book/src/lp.md")]
    mod lp {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/computation_trees.md")]
    mod computation_trees {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
