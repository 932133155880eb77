//! Fragment database: stored records, visual retrieval with an ambiguity
//! fallback, material-restricted tactile rematching, a nearest-centroid
//! material classifier and greedy assembly planning.

pub mod assembly;
pub mod classify;
pub mod eval;
pub mod mixed;
pub mod query;
pub mod record;
pub mod store;

pub use assembly::{plan_assembly, AssemblyPlan, PairScore, PlanStep};
pub use classify::{classify_material, leave_one_out_accuracy, synth_training_set, MaterialFeatures, NearestCentroid, FEATURE_LEN};
pub use eval::{eval_csv, evaluate, EvalQuery, EvalRow, EvalSummary, EVAL_CSV_HEADER};
pub use mixed::{mixed_queries, mixed_records, press_profile};
pub use query::{
    fallback_decision, rematch_with_tactile, FallbackReason, QueryHit, QueryResult, FALLBACK_MIN_IOU, FALLBACK_REL_GAP, UNKNOWN_FLOOR,
};
pub use record::{validate_id, FragmentRecord};
pub use store::{FragmentDb, FORMAT_VERSION};
