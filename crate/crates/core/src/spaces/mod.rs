//! Norms: `L^p`, Littlewood–Paley/Besov, BMO/bmo and Orlicz.

pub mod besov;
pub mod bmo;
pub mod littlewood_paley;
pub mod lp;
pub mod orlicz;
pub mod report;

pub use besov::{besov_norm, BesovIndex};
pub use bmo::{bmo_norm, bmo_of_values};
pub use littlewood_paley::{lp_decompose, LpDecomposition};
pub use lp::{linf_norm, lp_norm};
pub use orlicz::{legendre_fenchel, orlicz_norm, Conjugate, OrliczDomain, OrliczKind, OrliczSpec};
pub use report::NormReport;
