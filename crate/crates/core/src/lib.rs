//! Dantzig-Wolfe and Arc-Flow root relaxations of the VRPTW under one roof.
//!
//! The library solves the linear relaxation of the vehicle routing problem
//! with time windows two ways: a route-based restricted master driven by
//! column generation ([`master::dw`]), and an arc-based restricted master over
//! an unfolded state-transition DAG driven by arc-and-node generation
//! ([`master::af`]). Both share the same ng-route pricing relaxation, the same
//! cut pool and the same LP engine, so their bounds can be compared under
//! identical conditions. [`strengthen`] refines the relaxation towards the
//! elementary bound, either globally (growing ng-sets) or locally (splitting
//! DAG states), and [`bench`] runs the comparison experiments.

pub mod bench;
pub mod cuts;
pub mod dag;
pub mod instance;
pub mod master;
pub mod pricing;
pub mod simplex;
pub mod strengthen;

/// Vertex index: `0` is the source depot, `1..=n` the customers and `n + 1`
/// the sink depot.
pub type Vertex = usize;

/// A route as its customer sequence; the depot endpoints are implicit.
pub type Route = Vec<Vertex>;

/// `0 -> 1 -> 2 -> 0` style rendering of a route.
pub fn format_route(route: &[Vertex]) -> String {
    let mut s = String::from("0");
    for &v in route {
        s.push_str(&format!("->{v}"));
    }
    s.push_str("->0");
    s
}
