//! Checkers for the hand-proved steps that the box search cannot settle: each
//! re-derives its counts, probabilities and inequality thresholds exactly.

pub mod cases;
pub mod pairing;
pub mod probs;
pub mod report;
pub mod small_sum;
pub mod variance;

pub use cases::{run_all, run_case, CaseContext, CaseId, CaseReport, Step, StepVerdict, Verdict};
pub use pairing::{pairing_certificate, PairingCert, SignedSumBound};
pub use probs::{structured_interval_probs, IntervalProbs};
pub use small_sum::{small_sum_certificate, SmallSumCert};
pub use variance::{large_variance_conclusion, sum_squares_bound, LargeVarianceCert, LargeVarianceOutcome, VariancePoly};
pub use report::{render_summary, render_text, summarize, summarize_dir, write_report, Summary};
