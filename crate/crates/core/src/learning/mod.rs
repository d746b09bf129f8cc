//! Feature-weight learning from team performances and match outcomes.

mod metrics;
mod svm;
mod training;

pub use metrics::{f1_and_accuracy, roc_auc};
pub use svm::{train_svm, LinearModel, SolverConfig};
pub use training::{
    build_role_training_set, build_training_set, compute_nrmse, cross_validate,
    evaluate_classifier, train_scoped_weights, train_weights, CostReport, EvalReport, ScopeKind,
    TrainConfig, TrainingExample, TrainingScope, WeightVector,
};
