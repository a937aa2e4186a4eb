pub mod caps;
pub mod compiler;
pub mod error;
pub mod examples;
pub mod linalg;
pub mod lowering;
pub mod ltl;
pub mod predicate;
pub mod rational;
pub mod sampling;
pub mod scalar;
pub mod size;
pub mod vm;

pub use caps::Caps;
pub use error::{Error, Result};
pub use scalar::{FieldKind, QuadRat, Rat, Scalar};
