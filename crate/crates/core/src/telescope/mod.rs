//! Gosper's algorithm, Zeilberger's creative telescoping and the recurrence
//! type they produce.

pub mod gosper;
pub mod recurrence;
pub mod zeilberger;

pub use gosper::gosper;
pub use recurrence::{zeta3_recurrence, Recurrence, RhsKind};
pub use zeilberger::{check_certificate, zeilberger, Certificate, DEFAULT_MAX_ORDER};
