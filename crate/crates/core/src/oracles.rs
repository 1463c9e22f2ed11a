//! Closed-form references used to validate the solvers and reconstructions:
//! the dilute spherical-inclusion interior strain and the two-phase
//! variational (Hashin-Shtrikman type) effective moduli with their phase-wise
//! second strain moments.
//!
//! Everything here is analytic; nothing calls the numerical solvers. That
//! independence is the point: tests compare solver output against these
//! formulas, never the other way around.

use crate::error::{Error, Result};
use crate::green::ReferenceMedium;
use crate::tensor::{Dim, SymTensor2};

/// A modulus estimate produced by a bulk-branch or shear-branch identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RecoveredModulus {
    Bulk(f64),
    Shear(f64),
}

impl RecoveredModulus {
    pub fn value(&self) -> f64 {
        match self {
            RecoveredModulus::Bulk(v) | RecoveredModulus::Shear(v) => *v,
        }
    }
}

enum LoadBranch {
    Spherical,
    Deviatoric,
}

/// Classifies a macroscopic strain as purely spherical or purely deviatoric.
fn load_branch(eps_bar: &SymTensor2) -> Result<LoadBranch> {
    let norm = eps_bar.norm();
    if norm == 0.0 {
        return Err(Error::ZeroMacroStrain);
    }
    let (sph, dev) = eps_bar.sph_dev();
    let tol = 1e-12 * norm;
    match (sph.norm() > tol, dev.norm() > tol) {
        (true, false) => Ok(LoadBranch::Spherical),
        (false, true) => Ok(LoadBranch::Deviatoric),
        _ => Err(Error::MixedMacroStrain),
    }
}

/// Shear interaction factor of an isotropic medium,
/// `mu (d^2 kappa + 2 (d+1)(d-2) mu) / (2 d (kappa + 2 mu))`.
pub fn theta0(dim: Dim, kappa: f64, mu: f64) -> f64 {
    let d = dim.size() as f64;
    mu * (d * d * kappa + 2.0 * (d + 1.0) * (d - 2.0) * mu) / (2.0 * d * (kappa + 2.0 * mu))
}

/// Interior strain of a single dilute spherical inclusion `(kappa1, mu1)`
/// embedded in the matrix `medium`, under remote mean strain `eps_bar`.
///
/// The interior field is uniform:
/// `e = (1 - ks) sph(e_bar) + (1 - ms) dev(e_bar)` with
/// `ks = dkappa / (kappa1 + 2 (d-1) mu0 / d)` and
/// `ms = dmu / (mu1 + theta0)`.
///
/// # Panics
///
/// Panics if the strain dimension differs from the medium's.
pub fn eshelby_interior(
    medium: &ReferenceMedium,
    inclusion: (f64, f64),
    eps_bar: &SymTensor2,
) -> SymTensor2 {
    assert_eq!(medium.dim(), eps_bar.dim(), "dimension mismatch");
    let d = medium.dim().size() as f64;
    let (k0, m0) = (medium.kappa0(), medium.mu0());
    let (k1, m1) = inclusion;
    let ks = (k1 - k0) / (k1 + 2.0 * (d - 1.0) * m0 / d);
    let ms = (m1 - m0) / (m1 + theta0(medium.dim(), k0, m0));
    let (sph, dev) = eps_bar.sph_dev();
    sph * (1.0 - ks) + dev * (1.0 - ms)
}

/// First-order modulus estimate from an inclusion-interior strain.
///
/// Under a spherical load the bulk branch applies
/// `kappa0 + (d kappa0 + 2 (d-1) mu0)/d * [1 - tr(e) tr(e_bar)/(d |e_bar|^2)]`;
/// under a deviatoric load the shear branch applies
/// `mu0 + (d+2) mu0 (d kappa0 + 2 (d-1) mu0)/(2 d (kappa0 + 2 mu0)) *
/// [1 - dev(e) : dev(e_bar)/|e_bar|^2]`.
///
/// Errors with [`Error::ZeroMacroStrain`] or [`Error::MixedMacroStrain`] for
/// loads that fit neither branch.
pub fn eshelby_first_order_check(
    interior: &SymTensor2,
    eps_bar: &SymTensor2,
    medium: &ReferenceMedium,
) -> Result<RecoveredModulus> {
    let d = medium.dim().size() as f64;
    let (k0, m0) = (medium.kappa0(), medium.mu0());
    let norm_sq = eps_bar.ddot(eps_bar);
    match load_branch(eps_bar)? {
        LoadBranch::Spherical => {
            let prefactor = (d * k0 + 2.0 * (d - 1.0) * m0) / d;
            let ratio = interior.trace() * eps_bar.trace() / (d * norm_sq);
            Ok(RecoveredModulus::Bulk(k0 + prefactor * (1.0 - ratio)))
        }
        LoadBranch::Deviatoric => {
            let prefactor =
                (d + 2.0) * m0 * (d * k0 + 2.0 * (d - 1.0) * m0) / (2.0 * d * (k0 + 2.0 * m0));
            let (_, dev_e) = interior.sph_dev();
            let (_, dev_b) = eps_bar.sph_dev();
            let ratio = dev_e.ddot(&dev_b) / norm_sq;
            Ok(RecoveredModulus::Shear(m0 + prefactor * (1.0 - ratio)))
        }
    }
}

/// Effective moduli of the two-phase variational estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsModuli {
    pub kappa: f64,
    pub mu: f64,
}

/// Partial derivatives of the effective moduli with respect to the phase-1
/// moduli, holding `f1` and the phase-2 moduli fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsDerivatives {
    pub dkappa_dkappa1: f64,
    pub dkappa_dmu1: f64,
    pub dmu_dkappa1: f64,
    pub dmu_dmu1: f64,
}

/// Two-phase effective moduli:
///
/// ```text
/// kappa_eff = <kappa> - f1 f2 (kappa1 - kappa2)^2 / (<kappa>* + 2 (d-1) mu1 / d)
/// mu_eff    = <mu>    - f1 f2 (mu1 - mu2)^2 / (<mu>* + theta0(kappa1, mu1))
/// ```
///
/// where `<a> = f1 a1 + f2 a2` and `<a>* = f2 a1 + f1 a2`.
///
/// # Panics
///
/// Panics if `f1` is not strictly inside `(0, 1)`.
pub fn hs_effective(dim: Dim, f1: f64, kappas: (f64, f64), mus: (f64, f64)) -> HsModuli {
    assert!(f1 > 0.0 && f1 < 1.0, "phase fraction must lie in (0, 1)");
    let d = dim.size() as f64;
    let f2 = 1.0 - f1;
    let (k1, k2) = kappas;
    let (m1, m2) = mus;
    let dk = f2 * k1 + f1 * k2 + 2.0 * (d - 1.0) * m1 / d;
    let dm = f2 * m1 + f1 * m2 + theta0(dim, k1, m1);
    HsModuli {
        kappa: f1 * k1 + f2 * k2 - f1 * f2 * (k1 - k2) * (k1 - k2) / dk,
        mu: f1 * m1 + f2 * m2 - f1 * f2 * (m1 - m2) * (m1 - m2) / dm,
    }
}

/// Hand-derived derivatives of [`hs_effective`] with respect to `kappa1` and
/// `mu1`. Unit tests pin these against central finite differences.
///
/// # Panics
///
/// Panics if `f1` is not strictly inside `(0, 1)`.
pub fn hs_derivatives(dim: Dim, f1: f64, kappas: (f64, f64), mus: (f64, f64)) -> HsDerivatives {
    assert!(f1 > 0.0 && f1 < 1.0, "phase fraction must lie in (0, 1)");
    let d = dim.size() as f64;
    let f2 = 1.0 - f1;
    let (k1, k2) = kappas;
    let (m1, m2) = mus;
    let b = 2.0 * (d + 1.0) * (d - 2.0);

    let dk = f2 * k1 + f1 * k2 + 2.0 * (d - 1.0) * m1 / d;
    let qk = k1 - k2;
    let dkappa_dkappa1 = f1 - f1 * f2 * (2.0 * qk * dk - qk * qk * f2) / (dk * dk);
    let dkappa_dmu1 = f1 * f2 * qk * qk * (2.0 * (d - 1.0) / d) / (dk * dk);

    // theta0 partials at the phase-1 moduli.
    let denom = k1 + 2.0 * m1;
    let dtheta_dk1 = (d + 2.0) * m1 * m1 / (d * denom * denom);
    let dtheta_dm1 =
        (d * d * k1 * k1 + 2.0 * b * k1 * m1 + 2.0 * b * m1 * m1) / (2.0 * d * denom * denom);

    let dm = f2 * m1 + f1 * m2 + theta0(dim, k1, m1);
    let qm = m1 - m2;
    let dmu_dkappa1 = f1 * f2 * qm * qm * dtheta_dk1 / (dm * dm);
    let dmu_dmu1 = f1 - f1 * f2 * (2.0 * qm * dm - qm * qm * (f2 + dtheta_dm1)) / (dm * dm);

    HsDerivatives {
        dkappa_dkappa1,
        dkappa_dmu1,
        dmu_dkappa1,
        dmu_dmu1,
    }
}

/// Phase-1 second moments `(<e0^2>_1, <e_eq^2>_1)` of the hydrostatic and
/// equivalent strains, from the sensitivities of the effective moduli:
///
/// ```text
/// f1 <e0^2>_1   = e0_bar^2 dK/dk1 + 2 / (d (d-1)) eq_bar^2 dM/dk1
/// f1 <e_eq^2>_1 = d (d-1) / 2 e0_bar^2 dK/dm1 + eq_bar^2 dM/dm1
/// ```
///
/// Errors with [`Error::ZeroMacroStrain`] on a zero load. Mixed loads are
/// fine here; purity only matters for the recovery step.
pub fn hs_second_moments(
    dim: Dim,
    f1: f64,
    kappas: (f64, f64),
    mus: (f64, f64),
    eps_bar: &SymTensor2,
) -> Result<(f64, f64)> {
    if eps_bar.norm() == 0.0 {
        return Err(Error::ZeroMacroStrain);
    }
    let d = dim.size() as f64;
    let inv = eps_bar.invariants();
    let e0_sq = inv.hydrostatic * inv.hydrostatic;
    let eq_sq = inv.equivalent * inv.equivalent;
    let der = hs_derivatives(dim, f1, kappas, mus);
    let m0_sq = (e0_sq * der.dkappa_dkappa1 + 2.0 / (d * (d - 1.0)) * eq_sq * der.dmu_dkappa1) / f1;
    let meq_sq = (d * (d - 1.0) / 2.0 * e0_sq * der.dkappa_dmu1 + eq_sq * der.dmu_dmu1) / f1;
    Ok((m0_sq, meq_sq))
}

/// First-order phase-1 modulus recovery from second moments:
///
/// ```text
/// kappa1 = kappa0 + (d kappa0 + 2 (d-1) mu0)/(2 d) [1 - <e0^2>_1 / e0_bar^2]
/// mu1    = mu0 + (d+2) mu0 (d kappa0 + 2 (d-1) mu0)/(4 d (kappa0 + 2 mu0))
///              * [1 - <e_eq^2>_1 / eq_bar^2]
/// ```
///
/// The load selects the branch; its relevant invariant must not vanish.
/// Errors with [`Error::ZeroMacroStrain`] or [`Error::MixedMacroStrain`].
pub fn hs_recover_moduli(
    moments: (f64, f64),
    eps_bar: &SymTensor2,
    medium: &ReferenceMedium,
) -> Result<RecoveredModulus> {
    let d = medium.dim().size() as f64;
    let (k0, m0) = (medium.kappa0(), medium.mu0());
    let inv = eps_bar.invariants();
    match load_branch(eps_bar)? {
        LoadBranch::Spherical => {
            let prefactor = (d * k0 + 2.0 * (d - 1.0) * m0) / (2.0 * d);
            let ratio = moments.0 / (inv.hydrostatic * inv.hydrostatic);
            Ok(RecoveredModulus::Bulk(k0 + prefactor * (1.0 - ratio)))
        }
        LoadBranch::Deviatoric => {
            let prefactor =
                (d + 2.0) * m0 * (d * k0 + 2.0 * (d - 1.0) * m0) / (4.0 * d * (k0 + 2.0 * m0));
            let ratio = moments.1 / (inv.equivalent * inv.equivalent);
            Ok(RecoveredModulus::Shear(m0 + prefactor * (1.0 - ratio)))
        }
    }
}
