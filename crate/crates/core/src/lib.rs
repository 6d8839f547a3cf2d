//! Multi-robot on-line coverage path planning on occupancy grids.
//!
//! Robots start with no map, sense within a short range and must drive over
//! every reachable square. Two team planners are provided: one Monte Carlo
//! tree per robot ([`mcts`]) and an on-line Boustrophedon decomposition with
//! a cell auction ([`boustro`]). [`sim`] runs the epoch loop and
//! [`experiments`] batches trials and summarizes them.
//!
//! ```
//! use covergrid::mapgen::{generate, MapGenConfig};
//! use covergrid::sim::{run, PlannerKind, SimConfig};
//!
//! let map = generate(&MapGenConfig::standard(0.10, 42)).unwrap().map;
//! let config = SimConfig { planner: PlannerKind::Boustrophedon, robots: 3, ..SimConfig::default() };
//! let record = run(&config, &map).unwrap();
//! assert!(!record.is_timeout());
//! assert_eq!(record.covered, record.target);
//! ```

pub mod boustro;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod mapgen;
pub mod mcts;
pub mod mcts_team;
pub mod rng;
pub mod sensing;
pub mod sim;

// Book chapters are compiled and run as doctests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid-world.md")]
    mod grid_world {}
    #[doc = include_str!("../../../book/src/maps.md")]
    mod maps {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/mcts.md")]
    mod mcts {}
    #[doc = include_str!("../../../book/src/boustrophedon.md")]
    mod boustrophedon {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
