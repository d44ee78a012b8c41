//! Airy functions, Gauss-Legendre rules and deterministic random streams.

pub mod airy;
pub(crate) mod dd;
pub mod quadrature;
pub mod rng;

pub use airy::{airy, airy_ai, airy_ai_prime, airy_tail, AiryPair, AiryTail};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use rng::{rng_stream, RngStream};
