//! Causal knowledge graphs over discrete causal Bayesian networks.
//!
//! The pipeline: a [`cbn::CausalBayesianNetwork`] (given, or fitted from
//! data) and an [`ontology::RoleMapping`] yield exact effect reports
//! ([`mediation`]), which [`kg::build_kg`] assembles into a hyper-relational
//! graph serialized as Turtle-star by [`rdfstar`]. [`query`] answers
//! associational, interventional and counterfactual questions against the
//! network and explains the answers with paths from the graph.

pub mod cbn;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod intervention;
pub mod kg;
pub mod mediation;
pub mod ontology;
pub mod query;
pub mod rdfstar;

pub use error::{Error, Result};
