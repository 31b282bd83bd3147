//! Robust Fortin operators on simplices and the ultraweak DPG method for
//! singularly perturbed reaction–diffusion problems.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod bubbles;
pub mod dpg;
pub mod error;
pub mod field;
pub mod fortin;
pub mod geometry;
pub mod helmholtz;
pub mod linalg;
pub mod polyspace;
pub mod quadrature;
pub mod stability;

pub use error::{Error, Result};
pub use geometry::{barycentric, criss_cross_mesh, reference_simplex, unit_square_mesh, AffineMap, Mesh, Simplex};
pub use linalg::Mat;
pub use quadrature::{exp_moment, layer_rule, simplex_rule, Layers, QuadratureRule};
pub use dpg::{Manufactured, TestChoice};
pub use fortin::{FortinOperator, FortinVariant, Probe};
pub use helmholtz::{helmholtz_split, HelmholtzSplit};
pub use polyspace::{dim_report, DimReport};
