//! Componentwise shrinkage for many normal means.
//!
//! Estimate a vector of means μ from independent noisy observations
//! Xᵢ ~ N(μᵢ, σ²) by shrinking each component toward zero with ridge,
//! lasso, or pretest rules, with the regularization strength chosen by
//! Stein unbiased risk estimation (SURE) or cross-validation, or by
//! fitting a nonparametric discrete mixture to the means (NPEB).
//!
//! Modules:
//! - [`numerics`]: regularization parameters, seeding, normal special
//!   functions, scalar minimization, Gauss-Hermite quadrature.
//! - [`estimators`]: shrinkage rules m(x, λ) and posterior-mean rules.
//! - [`risk`]: exact componentwise and integrated risks, oracle
//!   parameters, risk surfaces, and the compound-risk decomposition.
//! - [`density`]: kernel density estimation with standard bandwidths.
//! - [`sure`]: SURE criteria and parameter selection.
//! - [`cv`]: hold-out and leave-one-out cross-validation on panels.
//! - [`npeb`]: EM fitting of discrete mixing distributions.
//! - [`simulate`]: Monte Carlo study harness with deterministic seeding.
//! - [`ingest`]: studentization and regression orthogonalization.
//! - [`io`]: CSV readers and writers for every external file format.

pub mod cv;
pub mod density;
pub mod estimators;
pub mod ingest;
pub mod io;
pub mod npeb;
pub mod numerics;
pub mod risk;
pub mod simulate;
pub mod sure;

pub use cv::{select_cv, CvCriterion, CvError, PanelSample};
pub use density::{bandwidth, BandwidthRule, DensityError, KernelDensity};
pub use estimators::{Kind, ShrinkageRule, SpikeNormal};
pub use ingest::{orthogonalize, studentize, IngestError, RawEstimates, RegressionProblem};
pub use npeb::{fit_em, fit_em_default, DiscreteMixture, EmFit};
pub use numerics::{minimize_scalar, NumericsError, RegParam, SeedSpec};
pub use risk::{
    compound_risk, cw_risk, int_risk, oracle_lambda, risk_surface, RiskCurve, RiskError,
    RiskSurface,
};
pub use simulate::{run_study, SimConfig, SimResult, StudyEstimator};
pub use sure::{select_sure, Sample, SureCriterion, SureError};
