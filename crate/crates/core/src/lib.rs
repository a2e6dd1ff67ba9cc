//! Magnetic fractional Sobolev and BV functionals, and numerical checks of
//! the magnetic Bourgain–Brezis–Mironescu limit.

pub mod bv;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod field;
pub mod functionals;
pub mod grid_csv;
pub mod harness;
pub mod kernels;
pub mod norm;
pub mod perimeter;
pub mod potential;
pub mod quadrature;
pub mod shape;
pub mod sphere;

pub use domain::Domain;
pub use error::{Error, Result};
pub use field::{ComplexField, Interp, Profile};
pub use norm::{modulation_phase, pnorm, ComplexVector};
pub use potential::MagneticPotential;
pub use shape::ShapeSet;
