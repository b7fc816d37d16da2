//! Posterior summaries: consensus tables, allocation entropy, controversy
//! and difficulty rankings, covariate crosstabs, and clustering scores.

pub mod ari;
pub mod controversy;
pub mod crosstab;
pub mod difficulty;
pub mod entropy;
pub mod summary;

pub use ari::adjusted_rand_index;
pub use controversy::{controversy_ranking, ControversyRow, ControversyTable};
pub use crosstab::{covariate_crosstab, Crosstab};
pub use difficulty::{difficulty_ranking, DifficultyRanking};
pub use entropy::{allocation_entropy, AllocationEntropy};
pub use summary::{consensus_summary, ConsensusSummary, CultureSummary};
