//! Word problems of finitely generated groups of computable permutations:
//! words and their reduction, lazily evaluated permutations of `ℤ × ℕ`, the
//! `Π⁰₁` coding group, the truth-table decider for the `co-c.e.` construction,
//! and abelian invariants of finite presentations.

pub mod abelian;
pub mod coener;
pub mod exec;
pub mod perms;
pub mod pi01;
pub mod sweep;
pub mod ttwp;
pub mod words;

use thiserror::Error;

pub use exec::ExecMode;
pub use words::{parse_word, Generator, GroupElement, Letter, Word};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Word(#[from] words::WordError),
    #[error(transparent)]
    Perm(#[from] perms::PermError),
    #[error(transparent)]
    Schedule(#[from] coener::ScheduleError),
    #[error(transparent)]
    Table(#[from] pi01::TableError),
    #[error(transparent)]
    Truth(#[from] ttwp::TtError),
    #[error(transparent)]
    Oracle(#[from] ttwp::OracleParseError),
    #[error(transparent)]
    Presentation(#[from] abelian::PresentationError),
}
