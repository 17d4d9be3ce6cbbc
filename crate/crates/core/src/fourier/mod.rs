pub mod bump;
pub mod grid;
pub mod kernel;
pub mod partition;
pub mod probe;
