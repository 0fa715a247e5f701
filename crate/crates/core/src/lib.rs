//! Uncertain nearest neighbor classification.
//!
//! Training and test objects are probability densities over Euclidean space.
//! The classifier assigns a query to the class most likely to contain its
//! k-th nearest neighbor across all outcomes of the uncertain training set.
//! That class is computed from one-dimensional distance distributions rather
//! than by enumerating outcomes.

pub mod baselines;
pub mod cdf;
pub mod class_cdf;
pub mod classifier;
pub mod datagen;
pub mod error;
pub mod io;
pub mod manet;
pub mod object;
pub mod pdf;
pub mod point;
pub mod pruning;
pub mod search;
pub mod seed;
pub mod support;

pub use baselines::{
    certain_knn, eknn, most_probable_class_oracle, naive_uncertain_nn, nearest_distance_rule,
    NaiveMetric, OutcomeVote,
};
pub use cdf::{estimate_object_cdf, exact_object_cdf, DistanceCdf, RadiusGrid};
pub use class_cdf::{brute_force_class_cdf, class_cdf_at_radius};
pub use classifier::{
    build_candidate_set, classify, classify_uncertain, nn_class_probability, radius_for_class,
    CandidateSet, CdfMode, ClassificationResult, Classifier, PairProbability, SlotRule, UnnParams,
};
pub use datagen::{
    border_queries, inject_gaussian_uncertainty, inject_uncertainty, midpoint_queries, ten_fold_cv,
    CvReport, FoldClassifier, SpreadConfig,
};
pub use error::{Result, UnnError};
pub use io::CertainDataset;
pub use manet::{network_power, run_manet_experiment, ManetParams, ManetReport, ManetScenario};
pub use object::{Dataset, UncertainObject};
pub use pdf::{Factor, Pdf, WaypointPdf};
pub use point::Point;
pub use pruning::PivotTable;
pub use search::{CandidateSearch, LinearScan};
pub use support::{maxdist, mindist, support_ball, SupportBall};
