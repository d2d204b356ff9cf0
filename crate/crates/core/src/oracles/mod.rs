//! Categorical frequency oracles over the `m_o` input bins.

mod bits;
mod grr;
mod hash;
mod hst;
mod olh;
mod oue;

pub use bits::BitRows;
pub use grr::GrrParams;
pub use hash::{hash_map, hst_vector};
pub use hst::HstParams;
pub use olh::OlhParams;
pub use oue::OueParams;

pub(crate) use hash::{vector_sign, vector_word};
