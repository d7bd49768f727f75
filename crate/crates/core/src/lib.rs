//! Periodic travelling waves of KdV-like Hamiltonian PDEs and their stability.
//!
//! The pipeline runs `models` → `profile` → `action` → `criteria`, with
//! `spectral` supplying negative counts and Evans-function scans and
//! `directsim` providing an independent time-domain check.

pub mod action;
pub mod criteria;
pub mod directsim;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod models;
pub mod numerics;
pub mod ode;
pub mod poly;
pub mod profile;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use models::{Family, Model, WaveParams};
pub use numerics::Numerics;
pub use poly::Poly;
