//! Runs the guide's code samples as doc-tests so the book stays in sync with the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/contacts.md")]
pub mod contacts {}
#[doc = include_str!("../../../book/src/context.md")]
pub mod context {}
#[doc = include_str!("../../../book/src/sorting.md")]
pub mod sorting {}
#[doc = include_str!("../../../book/src/sleep.md")]
pub mod sleep {}
#[doc = include_str!("../../../book/src/battery.md")]
pub mod battery {}
#[doc = include_str!("../../../book/src/radiation.md")]
pub mod radiation {}
#[doc = include_str!("../../../book/src/tracker.md")]
pub mod tracker {}
#[doc = include_str!("../../../book/src/forwarding.md")]
pub mod forwarding {}
#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
