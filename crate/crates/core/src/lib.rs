//! Best proximity points and common fixed points for cyclic maps on finite
//! metric spaces carrying a directed graph.
//!
//! The crate is organised around the objects a user actually manipulates:
//!
//! * [`metric_graph`]: a finite metric space with a directed edge set and an
//!   `A`/`B` side labelling, plus the geometric predicates (proximal pairs,
//!   property UC, the transitivity surrogate of property (*), components of
//!   the symmetrised graph).
//! * [`cyclic_contraction`]: gauge functions and the verifier for graph
//!   constrained cyclic contractions.
//! * [`bpp_solver`]: orbit iteration, best proximity point search,
//!   enumeration and the component/cardinality checks.
//! * [`fixed_point`]: `ψ`-contraction pairs and common fixed points with the
//!   geometric a-priori error bound.
//! * [`pbvp`]: the periodic Green's kernel, the integral operator and Picard
//!   iteration for periodic boundary value problems.
//! * [`corpus`]: executable builders for the worked examples, with their
//!   expected results.
//!
//! Sweeps over point pairs and over quadrature rows run on rayon when the
//! `parallel` feature is enabled (the default); see [`par::Execution`].

pub mod bpp_solver;
pub mod corpus;
pub mod cyclic_contraction;
pub mod fixed_point;
pub mod formats;
pub mod metric_graph;
pub mod par;
pub mod pbvp;
pub mod synth;
mod verdict;

pub use verdict::Verdict;
