//! Texture-based classification of lung-ultrasound images.
//!
//! The library covers the whole desk-scale pipeline:
//!
//! * [`imaging`] — grayscale image type, PNG/PGM loading, artifact removal,
//!   size normalization and half-splitting;
//! * [`dtcwt`] — 2-D dual-tree complex wavelet transform with six oriented
//!   complex subbands per level, plus a plain separable DWT baseline;
//! * [`texture`] — statistical, GLCM, GLRLM and rotation-invariant-uniform
//!   LBP feature families;
//! * [`pipeline`] — per-image feature vectors and dataset assembly from a
//!   CSV manifest;
//! * [`learn`] — chi-square univariate feature ranking and an LDA classifier;
//! * [`eval`] — leave-one-out / leave-one-subject-out cross-validation with
//!   in-fold feature selection, confusion matrices and feature-count sweeps.

pub mod dtcwt;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod learn;
pub mod pipeline;
pub mod texture;

pub use error::{Error, Result};
