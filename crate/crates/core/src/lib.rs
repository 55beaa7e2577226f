//! Szegő projection on the distinguished boundary of the model worm domain
//! `D_β`, written as a sum of Mellin–Fourier multiplier operators, together
//! with the numerical experiments that reproduce its sharp `L^p` and Sobolev
//! regularity thresholds.
//!
//! Layout:
//!
//! * [`geometry`]: worm parameters, boundary sheets, surface weights, the
//!   biholomorphism `φ`, the weight `ψ_p` and the isometry `Λ`.
//! * [`field`]: sampled boundary fields and the log-radial grid.
//! * [`transforms`]: `C_p` conjugation, Mellin–Fourier transform, Hilbert
//!   transform.
//! * [`multipliers`]: closed-form symbols and sampled multiplier tables.
//! * [`szego`]: block operators, the assembled projection, the truncated
//!   sinh-kernel operators and the model operators `P_a`, `Q_a`.
//! * [`norms`]: boundary, Bessel, Gagliardo and weighted norms, power-law fits.
//! * [`experiments`]: counterexample, oracle, decay fits and threshold sweeps.

pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod multipliers;
pub mod norms;
pub mod quad;
pub mod szego;
pub mod transforms;

mod par;

pub use error::{Error, Result};
pub use field::{BoundaryField, LogGrid, SheetField};
pub use geometry::{Sheet, WormParams};
pub use num_complex::Complex64;
pub use transforms::Spectrum;
