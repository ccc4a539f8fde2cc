//! Batch front end for the Monge-Ampere laboratory: config parsing,
//! experiment pipelines, reports, manifests, and comparison tables.

pub mod config;
pub mod json;
pub mod manifest;
pub mod pipelines;
pub mod table;
