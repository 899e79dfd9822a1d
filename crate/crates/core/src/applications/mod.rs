//! System identification, space-time covariance and reporting metrics.

pub mod era;
pub mod metrics;
pub mod spacetime;

pub use era::{
    compressed_hankel, era_identify_compressed, hankel_pattern_from_markov, hausdorff_eigs, random_stable_system,
    CompressedHankel, HankelMode, LtiSystem, MarkovSequence,
};
pub use metrics::{report_metrics, spsd_storage_ratio, trace_relerr, Metrics, SourceInfo};
pub use spacetime::{grid_points, spacetime_build, KernelConfig, KernelFamily};
