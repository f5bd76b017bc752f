//! Base learners, meta-learners and evaluation metrics.

mod forest;
mod linear;
mod logistic;
mod metrics;
pub mod tree;

pub use forest::{
    fit_forest_classifier, fit_forest_regressor, predict, train_forest, FeatureRule, ForestModel,
    ForestParams, ForestRegressor,
};
pub use linear::{fit_linear_regression, LinearModel};
pub use logistic::{fit_logistic_regression, LogisticModel, LogisticParams};
pub use metrics::{f1_macro, metric_vector, r2_score, MetricVector};
