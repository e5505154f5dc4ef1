//! Exact enumeration of self-avoiding walks on the square lattice by a
//! finite-lattice transfer-matrix sweep, with a brute-force reference
//! enumerator and tools for analysing the resulting series.

pub mod modseries;
pub mod pruning;
pub mod signature;
pub mod tm;
pub mod oracle;
pub mod flm;
pub mod analysis;
