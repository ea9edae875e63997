//! Globular workbench: trees, globular sets, the category Θ, coherators
//! and cylinders for weak higher groupoids.

pub mod cli;
pub mod cylinder;
pub mod globset;
pub mod theta;
pub mod theory;
pub mod tree;
