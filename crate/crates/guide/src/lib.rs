//! Code listings of the guide in `book/`, compiled and run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/distributions.md")]
pub mod distributions {}

#[doc = include_str!("../../../book/src/divergences.md")]
pub mod divergences {}

#[doc = include_str!("../../../book/src/kcuts.md")]
pub mod kcuts {}

#[doc = include_str!("../../../book/src/regions.md")]
pub mod regions {}

#[doc = include_str!("../../../book/src/conversions.md")]
pub mod conversions {}

#[doc = include_str!("../../../book/src/mechanisms.md")]
pub mod mechanisms {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
