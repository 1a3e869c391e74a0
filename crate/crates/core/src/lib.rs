//! Multiscale cross-correlation analysis of return panels.
//!
//! Returns are decomposed into dyadic scales with the maximal overlap discrete
//! wavelet transform ([`modwt`]). Per-scale correlation matrices ([`wavestats`])
//! are analysed through their eigenvalue spectra ([`eigen`]), either once over a
//! full sample or over sliding windows ([`windows`]). The resulting eigenvalue
//! series feed the drawdown partition and one-factor diagnostics in
//! [`analysis`], and the per-scale correlation matrices feed the unconstrained
//! mean-variance frontiers in [`portfolio`].

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod ingest;
pub mod modwt;
pub mod portfolio;
pub mod wavestats;
pub mod windows;

pub use error::{Error, ErrorClass, Result};

pub use analysis::{
    aggregate_window_returns, index_returns, one_factor_check, partition_by_sdu, OneFactorCheck,
    PartitionReport, PartitionSide,
};
pub use eigen::{spectrum, to_sdu, EigenRecord, ScaleLabel, SduSeries, Spectrum};
pub use ingest::{
    generate_synthetic, load_prices, load_returns, to_returns, LoadOptions, PricePanel,
    ReturnKind, ReturnsPanel, SyntheticModel, SyntheticSpec, Timestamp,
};
pub use modwt::{decompose, make_filter, max_level, WaveletDecomposition, WaveletFilter};
pub use portfolio::{
    build_covariance, frontier_by_scale, min_variance_frontier, Frontier, FrontierPoint,
    ScaleCovariance, ScaleFrontier,
};
pub use wavestats::{
    normalize_window, raw_correlation, wavelet_correlation_matrix, wavelet_covariance,
    RawCorrelationMatrix, ScaleCorrelationSet,
};
pub use windows::{epps_summary, run_dynamics, DynamicsResult, EppsRow, FailurePolicy, WindowPlan};
