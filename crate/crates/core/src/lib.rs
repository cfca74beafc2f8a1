pub mod bases;
pub mod cli;
pub mod coherence;
pub mod decompose;
pub mod error;
pub mod linalg;
pub mod mmv;
pub mod sispace;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sispace.md")]
    mod sispace {}
    #[doc = include_str!("../../../book/src/bases.md")]
    mod bases {}
    #[doc = include_str!("../../../book/src/coherence.md")]
    mod coherence {}
    #[doc = include_str!("../../../book/src/mmv.md")]
    mod mmv {}
    #[doc = include_str!("../../../book/src/decompose.md")]
    mod decompose {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
