//! Guide chapters, compiled as doc-tests so the book cannot drift from the
//! library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/data-model.md")]
pub mod data_model {}
#[doc = include_str!("../../../book/src/rules.md")]
pub mod rules {}
#[doc = include_str!("../../../book/src/expressions.md")]
pub mod expressions {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/minimality.md")]
pub mod minimality {}
#[doc = include_str!("../../../book/src/exclusive.md")]
pub mod exclusive {}
#[doc = include_str!("../../../book/src/witnesses.md")]
pub mod witnesses {}
#[doc = include_str!("../../../book/src/finite-data.md")]
pub mod finite_data {}
#[doc = include_str!("../../../book/src/reductions.md")]
pub mod reductions {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
