//! Nonlinear semidefinite programming through squared slack variables.
//!
//! A problem `min f(x) s.t. G(x) ⪰ 0` is rewritten as the equality-constrained
//! NLP `min f(x) s.t. G(x) = Y∘Y`, solved by an augmented-Lagrangian method,
//! and its solutions are checked against first- and second-order optimality
//! certificates of both formulations.
//!
//! | module | contents |
//! |---|---|
//! | [`symalg`] | symmetric matrices, Jordan product, Lyapunov solves, packing |
//! | [`model`] | NSDP problem trait, derivative checks, problem registry |
//! | [`reformulate`] | the slack NLP and point/multiplier maps |
//! | [`solver`] | augmented-Lagrangian solver for bound-constrained equality NLPs |
//! | [`verify`] | KKT, constraint qualification and second-order checkers |
//! | [`bench`] | benchmark problems, reference oracle, suite runner |

pub mod bench;
pub mod error;
pub mod model;
pub mod nlp;
pub mod reformulate;
pub mod solver;
pub mod symalg;
pub mod verify;

pub use error::{Error, Result};
pub use model::NsdpProblem;
pub use nlp::{Bounds, EqualityNlp};
pub use reformulate::{SlackNlp, SlackPoint};
pub use symalg::SymMatrix;

// The guide under book/ is compiled here so its snippets run as doc-tests,
// one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/symmetric-algebra.md")]
    mod symmetric_algebra {}
    #[doc = include_str!("../../../book/src/slack-reformulation.md")]
    mod slack_reformulation {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
