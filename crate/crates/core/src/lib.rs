pub mod datagen;
pub mod error;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod points;
pub mod project;
pub mod robust;
pub mod triangle;
pub mod vertices;

pub use error::{Error, Result};
pub use points::{ConvexCombination, DiameterMode, PointSet, RobustnessParams};
