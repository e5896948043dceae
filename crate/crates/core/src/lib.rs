//! Equivariant operator algebras on fuzzy spheres of arbitrary dimension.
//!
//! The crate builds, for any dimension `D >= 2` and cutoff `Lambda`, the
//! finite dimensional algebra generated by truncated coordinate operators
//! `xbar` and rotation generators `Lbar` acting on a direct sum of traceless
//! symmetric tensor representations of so(D).  Every identity the
//! construction is supposed to satisfy is checkable as a finite matrix
//! identity at a pinned tolerance; the `report` module and the `fsk` binary
//! expose those checks as suites.

pub mod algebra;
pub mod basis;
pub mod budget;
pub mod embedding;
pub mod error;
pub mod index;
pub mod linalg;
pub mod products;
pub mod projector;
pub mod radial;
pub mod report;
pub mod special;
pub mod sphere;

pub use budget::TensorBudget;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    //! Runs every code fence in the guide as a doctest so the book cannot
    //! drift from the public API.

    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/projectors.md")]
    mod projectors {}
    #[doc = include_str!("../../../book/src/harmonic-basis.md")]
    mod harmonic_basis {}
    #[doc = include_str!("../../../book/src/fuzzy-algebra.md")]
    mod fuzzy_algebra {}
    #[doc = include_str!("../../../book/src/products-and-convergence.md")]
    mod products_and_convergence {}
    #[doc = include_str!("../../../book/src/embedding.md")]
    mod embedding {}
    #[doc = include_str!("../../../book/src/radial.md")]
    mod radial {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
