mod plapplied;
mod plgge;

pub use plapplied::{CorPlApplied, CorPlApplied2};
pub use plgge::{admissibility, CorLpComplex, CorPlggecor, ThmPlgge};
