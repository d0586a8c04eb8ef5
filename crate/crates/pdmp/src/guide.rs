//! The user guide, compiled as doc-tests.
//!
//! The mdbook sources under `book/src/` are included here as module docs so
//! that every Rust snippet in the book is built and run by `cargo test`;
//! the book cannot drift from the API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/pdmp.md")]
pub mod pdmp_framework {}

#[doc = include_str!("../../../book/src/event-times.md")]
pub mod event_times {}

#[doc = include_str!("../../../book/src/samplers.md")]
pub mod samplers {}

#[doc = include_str!("../../../book/src/targets.md")]
pub mod targets {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/benchmarks.md")]
pub mod benchmarks {}
