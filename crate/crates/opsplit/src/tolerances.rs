//! Numerical tolerances shared across the crate.
//!
//! All values sit roughly 1e3 to 1e6 above double-precision epsilon, scaled by
//! the conditioning expected of the operation they guard.

/// Relative distance below which two computed roots are treated as one pole.
pub const CLUSTER_REL: f64 = 1e-8;

/// Loose relative radius used to propose multiple-root clusters before they are
/// verified against the polynomial's derivatives.
pub const CLUSTER_CANDIDATE_REL: f64 = 5e-2;

/// Relative size of `p^(j)(μ)/j!` (against its absolute-value evaluation) under
/// which `μ` is accepted as a root of multiplicity greater than `j`.
pub const MULTIPLICITY_REL: f64 = 1e-11;

/// Reconstruction accuracy of a partial-fraction expansion, relative to `1 + |r(z)|`.
pub const RECONSTRUCTION_REL: f64 = 1e-9;

/// Algebraic identities such as the residue sums.
pub const ALGEBRAIC: f64 = 1e-10;

/// Value and derivative of `r` at the origin, computed from coefficients.
pub const COEFFICIENT: f64 = 1e-12;

/// Minimum distance between an evaluation point and a pole.
pub const POLE_PROXIMITY: f64 = 1e-12;

/// Relative residual of the numerator at a denominator root that marks a common root.
pub const ROOT_MATCH: f64 = 1e-10;

/// Poles must satisfy `Re λ > RHP_MARGIN`.
pub const RHP_MARGIN: f64 = 1e-10;

/// Allowed imaginary residue of a real-coefficient resolvent sum, relative to `1 + ‖result‖`.
pub const IMAGINARY_RESIDUE: f64 = 1e-9;

/// Largest accepted condition estimate of the residue least-squares system.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative disagreement allowed between the derivative-formula residues and the
/// least-squares cross-check.
pub const RESIDUE_CROSS_CHECK: f64 = 1e-6;

/// Largest eigenvalue real part accepted for a dissipative operator.
pub const SPECTRUM_MARGIN: f64 = 1e-10;

/// Commutator size with the cyclic shift that still counts as circulant.
pub const CIRCULANT: f64 = 1e-12;

/// Number of points of the reference grid on which function-space norms are taken.
pub const REFERENCE_GRID: usize = 4096;

/// Largest grid size for which dense operator norms are computed.
pub const MAX_DENSE_SIZE: usize = 256;

/// Largest power in a stability scan.
pub const MAX_POWER: usize = 1024;

/// Slack of the fitted stability constants.
pub const STABILITY_FIT: f64 = 1e-8;
