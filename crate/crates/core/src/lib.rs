//! Generating families, generating objects and Legendre transformations over
//! affine Minkowski space-time.

pub mod bundle;
pub mod error;
pub mod family;
pub mod homogeneity;
pub mod legendre;
pub mod linalg;
pub mod minkowski;
mod newton;
pub mod object;
pub mod relativity;
pub mod report;
pub mod suites;

pub use bundle::{
    alpha_q, alpha_q_inv, beta, beta_inv, chi_tq, chi_tstar_q, eval_dt_theta, eval_it_dtheta, kappa_q, TQPoint,
    TStarQPoint, TStarTQPoint, TStarTStarQPoint, TTQPoint, TTStarQPoint, TTTStarQPoint,
};
pub use error::{Error, Result};
pub use family::{
    check_gradient, classify_at, kappa_map, n_membership, solve_critical, solve_critical_along, vertical_gradient,
    w_matrix, Classification, SmoothMap, CriticalPoint, FamilyOfFunctions, GradientCheck, MembershipResult,
    SolverConfig,
};
pub use minkowski::{pair, Covector, MinkowskiSpace, Point, Vector};
pub use object::{
    a_membership, compose, reduce_by_fibration, reduce_by_section, tts, ConstraintSet, DynamicsCandidate, FamilySign,
    FibrationReduction, GeneratingObject, SectionReduction, Side, Structure,
};
pub use legendre::{
    hyperregular_at, inverse_legendre, inverse_legendre_object, lambda1_membership, lambda2_membership,
    legendre_object, legendre_transform, omega1_membership, omega2_membership, HamiltonianSystem, LagrangianSystem,
};
pub use homogeneity::{
    check_critical_set_homogeneous, check_family_homogeneous, check_set_homogeneous, hat_kappa,
    lifted_cotangent_action, sample_scale, HomogeneityReport, ScalingAction,
};
pub use relativity::{
    trajectory_sample, FamilyFixture, ModelKind, OpticsModel, OpticsSystems, ParticleModel, ParticleSystems,
};
pub use report::{CheckRecord, Summary, VerificationReport};
pub use suites::{run, Suite, SuiteConfig};
