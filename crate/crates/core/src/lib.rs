//! Multi-execution enforcement for information-flow control over programs
//! whose inputs and outputs are sets of labeled values.

pub mod bench;
pub mod blackbox;
pub mod dsl;
pub mod enforce;
pub mod error;
pub mod labeled;
pub mod lattice;
pub mod oracle;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/labels.md")]
    mod labels {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/multi-execution.md")]
    mod multi_execution {}
    #[doc = include_str!("../../../book/src/mest.md")]
    mod mest {}
    #[doc = include_str!("../../../book/src/level-assignments.md")]
    mod level_assignments {}
    #[doc = include_str!("../../../book/src/black-box.md")]
    mod black_box {}
}
