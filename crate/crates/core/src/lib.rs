//! Cantor-type convex planar domains built from Sidon and Λ(p) frequency sets,
//! with exact combinatorial certificates and numerical Fourier diagnostics.
//!
//! The pipeline runs bottom-up:
//!
//! - [`sidon`]: B_m / B_m^*[g] integer sets (Bose–Chowla, greedy, gluing) and
//!   brute-force certification of their representation counts.
//! - [`lambdap`]: Λ(p) norm estimates for finite frequency sets and the point
//!   set that seeds the Cantor construction.
//! - [`cantor`]: the seed interval family, its iterated levels and the scale
//!   partition at a given δ, all in exact rational arithmetic.
//! - [`domain`]: the convex domain over the Cantor set, its gauge, supporting
//!   lines and δ-cap coverings.
//! - [`energy`]: sweep-line overlap counts of interval sumsets and the
//!   additive-energy bookkeeping of the cap partition.
//! - [`fourier`]: bump functions, the dyadic partition of unity, multiplier
//!   kernels on FFT grids and decoupling probes.
//! - [`regions`]: exponent thresholds of the boundedness theorems.
//! - [`experiment`]: config-driven pipeline with a deterministic manifest.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the default
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod cantor;
pub mod config;
pub mod domain;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod export;
pub mod fourier;
pub mod lambdap;
pub mod par;
pub mod rational;
pub mod regions;
pub mod rng;
pub mod sidon;

pub use error::{Error, Result};
