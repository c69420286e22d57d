//! Exact oracles, conservative numerical bounds and certificate checkers for
//! tail probabilities of Rademacher sums `X = Σ aᵢεᵢ`.
//!
//! The layers, from the bottom:
//!
//! * [`surd`] and [`exact`]: arithmetic in `ℚ(√m)` and exact tail
//!   probabilities by sign-pattern enumeration.
//! * [`prawitz`]: a certified lower bound on `inf P(X ≥ x)` over sums whose
//!   largest weight is at most `a`.
//! * [`dp`]: the table `D(a, x)` seeded from that bound and refined by
//!   eliminating one variable at a time.
//! * [`search`] and [`casefile`]: branch-and-bound over boxes of leading
//!   weights, pruning with the table and linear constraints.
//! * [`certs`]: scripted, exactly checked certificates for the special
//!   configurations the search cannot prune.

pub mod casefile;
pub mod certs;
pub mod constraint;
pub mod dp;
pub mod error;
pub mod exact;
pub mod interval;
pub mod jet;
pub mod prawitz;
pub mod search;
pub mod surd;

pub use casefile::{CaseFile, Expectation};
pub use certs::{run_all, run_case, CaseContext, CaseId, CaseReport, Verdict};
pub use constraint::LinearConstraint;
pub use dp::{DPGrid, GridSpec};
pub use error::{Error, Result};
pub use exact::{tail_probability, TailProbability, WeightVector};
pub use interval::Interval;
pub use prawitz::{prawitz_lower_bound, solve_theta, PrawitzConfig, PrawitzParams};
pub use search::{feedback_iterate, search, test_box, BoxVerdict, ConstraintSet, SearchConfig, SearchResult, WeightBox};
pub use surd::Surd;
