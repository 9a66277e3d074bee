//! Refuting type declarations in an untyped functional language by searching
//! for inputs that drive an instrumented program to an error.

pub mod concolic;
pub mod corpus;
pub mod instrument;
pub mod interp;
pub mod oracle;
pub mod solver;
pub mod syntax;

pub use concolic::{search, Report, SearchConfig, SearchError, Verdict};
pub use instrument::{InstrumentConfig, PrepareError, Program};
pub use interp::{replay, Feed, Outcome};
pub use oracle::{exhaustive_refute, fuzz_refute, EnumBounds, EnumVerdict, FuzzVerdict};
pub use solver::SolverChoice;
pub use syntax::{parse, Expr, TypeExpr};
