//! Chemistry features: a fixed descriptor schema, min-max scaling, Pearson
//! selection, and Morgan fingerprints with Tanimoto similarity.

mod descriptors;
mod fingerprint;
mod stats;

pub use descriptors::{
    compute_descriptors, subgroup_descriptors, DescriptorVector, DESCRIPTOR_COUNT, DESCRIPTOR_NAMES,
};
pub use fingerprint::{
    atom_environments, morgan_fingerprint, tanimoto, FingerprintBits, FingerprintError, FP_BITS,
    FP_RADIUS,
};
pub use stats::{apply_scaler, fit_scaler, pearson, select_descriptors, ScalerParams, StatsError};
