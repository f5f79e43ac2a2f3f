//! Continued fractions of irrationals in `(0, 1)`: partial quotients, convergents,
//! rational enclosures and the norms `‖kα‖`.

mod expr;
mod handle;
mod interval;
mod spec;

pub use expr::{factorial, Expr};
pub use handle::{AlphaHandle, NormValue, DEFAULT_MAX_DEPTH, PRECISION_CAP_ENV};
pub use interval::RationalInterval;
pub use spec::{AlphaSpec, GrowthRule, SparseRule};
