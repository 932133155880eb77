//! Fused edge, gradient and height-extrema scoring of two tactile
//! profiles, and the pose search that maximises it.

pub mod histogram;
pub mod params;
pub mod profile;
pub mod scene;
pub mod scores;
pub mod search;

pub use histogram::{bin_of, histogram_from_samples, orientation_histogram, window_samples, OrientationHistogram};
pub use params::{validate_weights, MatchParams, WEIGHT_SUM_TOL};
pub use profile::{TactileProfile, CORE_FRACTION};
pub use scene::{pairwise_search, rank_mates, sample_profile, transform_error, MateRanking, TransformError};
pub use scores::{
    edge_score, edge_score_points, fuse, height_score, local_grad_score, region_grad_score, score_prepared, score_transform, GradScore, HeightScore,
    PreparedProfile, ScoreBreakdown,
};
pub use search::{search_transform, Candidate, SearchResult, REFINE_DIVISIONS};
