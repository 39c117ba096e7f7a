//! Magnification sampling for multi-scale representation learning.
//!
//! Similarity kernels over microns-per-pixel, the accumulated training signal
//! a sampling distribution delivers to each target magnification, optimized
//! sampling distributions, crop-and-resize plans for continuous magnification
//! training, and RankMe effective-rank profiling of embeddings.

pub mod cli;
pub mod distribution;
pub mod error;
pub mod image;
pub mod kernels;
pub mod lp;
pub mod manifest;
pub mod optimize;
pub mod range;
pub mod rankme;
pub mod rng;
pub mod sampler;
pub mod signal;

pub use distribution::{Atom, SamplingDistribution};
pub use error::{Error, Result};
pub use kernels::{eval_kernel, transfer_potential, transfer_potential_curve, KernelSpec, TransferPotentialCurve};
pub use optimize::{entropy, optimize_max_avg, optimize_max_min, regularized_objective, MaxMinSolution, Objective, OptimizationConfig};
pub use image::{apply_crop, Image};
pub use manifest::RunManifest;
pub use range::MagRange;
pub use rankme::{centroid_similarity, rankme, rankme_profile, EmbeddingSet, RankMeProfile, SimilarityMatrix};
pub use rng::SplitMix64;
pub use sampler::{generate_plan, CropPlanEntry, SamplerConfig};
pub use signal::{accumulated_signal, signal_summary, total_signal, SignalProfile, SignalSummary};
