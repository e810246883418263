//! Exact Lambert-W solution of the planar two-point function equation of the
//! noncommutative quartic model in two dimensions, together with everything
//! needed to check it independently:
//!
//! * [`special`]: branch-complete Lambert W, dilogarithm, Nielsen polylogarithms.
//! * [`quadrature`]: adaptive Gauss–Kronrod, principal values, half-line Hilbert transforms.
//! * [`closedform`]: `K`, `L`, `I_λ`, the angle function `τ`, `N_λ(a,b)` and `G_λ(a,b)`.
//! * [`series`]: Stirling numbers and the perturbative coefficients of `I_λ`, `G` and `N`.
//! * [`oracle`]: a finite-cutoff fixed-point solver and a residual evaluator for the
//!   integral equation itself.
//! * [`identities`]: numeric checks of the Lambert-W integral identities.
//! * [`domains`]: branch boundaries and holomorphy domains in the coupling plane.
//!
//! The integral equation, for `a, b ≥ 0`:
//!
//! ```text
//! (1+a+b) G(a,b) = 1 + λ ∫dp [ (G(p,b)-G(a,b))/(p-a) + G(a,b)/(1+p) ]
//!                    + λ ∫dq [ (G(a,q)-G(a,b))/(q-b) + G(a,b)/(1+q) ]
//!                    - λ² ∫∫dp dq (G(a,b)G(p,q) - G(a,q)G(p,b)) / ((p-a)(q-b))
//! ```

pub mod cli;
pub mod closedform;
pub mod domains;
pub mod error;
pub mod identities;
pub mod oracle;
pub mod quadrature;
pub mod series;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `1/log 4`. Real couplings must exceed `-1/log 4`; it is also the radius of convergence of `N_λ` in `λ` at `a = b = 0`.
pub const INV_LOG4: f64 = 0.721_347_520_444_481_7;
