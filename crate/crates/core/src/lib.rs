//! Koornwinder polynomials on the triangle `x, y >= 0, x + y <= 1`:
//! evaluation, ladder operators, sparse coefficient-space operators,
//! quadrature transforms and seeded verification sweeps.

pub mod dual;
pub mod error;
mod gauss;
pub mod jacobi;
pub mod koornwinder;
pub mod ladders;
pub mod operators;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use gauss::{beta_fn, gauss_jacobi_rule, GaussJacobiRule};
pub use jacobi::{JacobiLadder, JacobiParams, Jet1, LadderStep};
pub use koornwinder::{Jet2, Residual, TriIndex, TriParams, TriPoint};
pub use ladders::{Axis, CompositionId, LadderId, TriLadderStep};
pub use operators::{BasisTag, Builder, CoeffVec, CoordAxis, SparseOp, Triplet};
pub use transform::QuadRule;
pub use verify::{Suite, Tolerances, VerificationReport};
