//! Time-expanded networks and the flow algorithms run on them.

pub mod extract;
pub mod ilp;
pub mod network;
pub mod solver;

pub use extract::extract_paths;
pub use ilp::export_ilp;
pub use network::{
    build_network, expected_size, Arc, ArcKind, BiasTable, NetworkOptions, NetworkRequest,
    NodeKind, TimeExpandedNetwork,
};
pub use solver::{max_flow, max_flow_until, min_cost_max_flow, min_cost_max_flow_until, FlowResult};
