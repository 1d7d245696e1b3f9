//! Exact triangulation engine: geometry kernel, flip graph, objectives,
//! classical search and the lattice-polytope FRST pipeline.

pub mod error;
pub mod exact;
pub mod fixtures;
pub mod flips;
pub mod frst;
pub mod geom;
pub mod io;
pub mod lp;
pub mod objective;
pub mod par;
pub mod polygen;
pub mod search;
pub mod tri;
pub mod vset;

pub use error::{DatasetError, FormatError, FrstError, GapError, GenError, GeomError, ParseError, TriError};
pub use exact::Rational;
pub use flips::{apply_flip, enumerate_component, CircuitTable, Component, FlipAction, Side};
pub use geom::{Point, PointConfig};
pub use objective::{relative_gap, GapReport, Objective, Sense};
pub use par::Exec;
pub use search::{run_budgeted, AcceptPolicy, ActionMode, FlipPolicy, Schedule, SearchTrace, Strategy};
pub use tri::{regular_from_heights, Heights, TriKey, Triangulation};
pub use vset::VertexSet;
