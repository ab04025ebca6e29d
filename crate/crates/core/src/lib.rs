//! Exact homology, logical-algebra and anyon computations for Kitaev-type
//! models on CW complexes with coefficients in a finite abelian group.

pub mod chains;
pub mod complex;
pub mod css;
pub mod error;
pub mod excitations;
pub mod groups;
pub mod homology;
pub mod linalg;
pub mod logical;
pub mod oracle;
pub mod reduce;

pub use complex::{CatalogSpec, EndedComplex, FiniteComplex};
pub use error::{Error, Result};
pub use groups::{AbelianCoefficients, GroupElement, PhaseQZ};
pub use chains::{Chain, Cochain, LfChain, LfCochain};
pub use excitations::{Excitation, TransportData};
pub use homology::{GroupKind, HomologyClass, HomologyContext, Representative};
pub use logical::LogicalReport;
pub use css::StabilizerSet;
pub use oracle::DenseModel;
