//! Global tolerance ladder.

/// Relator defect and reconstruction error accepted when building objects.
pub const CONSTRUCTION: f64 = 1e-10;
/// Residuals accepted when checking identities on computed objects.
pub const VERIFICATION: f64 = 1e-8;
/// Residuals accepted for finite-difference quantities.
pub const FINITE_DIFFERENCE: f64 = 1e-4;
