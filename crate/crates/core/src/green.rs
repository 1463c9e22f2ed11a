//! Periodic Green operator of an isotropic reference medium, evaluated in
//! Fourier space.
//!
//! For a reference stiffness `L0 = d kappa0 J + 2 mu0 K` the strain Green
//! tensor at an integer frequency vector `xi != 0` is
//!
//! ```text
//! G(xi) = alpha0 / |xi|^2 * sum_i psi_i (x) psi_i  +  beta0 / |xi|^4 * psi (x) psi
//! psi   = xi (x) xi
//! psi_i = xi (x) e_i + e_i (x) xi
//! ```
//!
//! with scalar coefficients depending only on the reference moduli. `G` is
//! homogeneous of degree zero in `xi` and even, so it is constant on rays;
//! its isotropic projection is the same constant pair at every frequency,
//! which is what makes pointwise modulus reconstruction possible.

use crate::error::{Error, Result};
use crate::tensor::{projector_dims, Dim, FullTensor4, IsoTensor4, SymTensor2};

/// Isotropic reference medium `(d, kappa0, mu0)` with positive moduli.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceMedium {
    dim: Dim,
    kappa0: f64,
    mu0: f64,
}

impl ReferenceMedium {
    /// Errors with [`Error::NonPositiveModulus`] unless both moduli are
    /// strictly positive.
    pub fn new(dim: Dim, kappa0: f64, mu0: f64) -> Result<Self> {
        if kappa0 <= 0.0 {
            return Err(Error::NonPositiveModulus(kappa0));
        }
        if mu0 <= 0.0 {
            return Err(Error::NonPositiveModulus(mu0));
        }
        Ok(ReferenceMedium { dim, kappa0, mu0 })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    /// Reference stiffness `L0 = d kappa0 J + 2 mu0 K`.
    pub fn stiffness(&self) -> IsoTensor4 {
        IsoTensor4::stiffness(self.dim, self.kappa0, self.mu0)
    }
}

/// Scalar coefficients of the Green tensor and of its isotropic projection.
///
/// `lambda_j` and `lambda_k` are the projections `G :: J` and `G :: K`; they
/// are independent of the frequency direction and obey the closed forms
///
/// ```text
/// 1 / lambda_j = d kappa0 + 2 (d - 1) mu0
/// 1 / lambda_k = 2 mu0 (d kappa0 + 2 (d - 1) mu0) / (d (d - 1) (kappa0 + 2 mu0))
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenCoefficients {
    pub alpha0: f64,
    pub beta0: f64,
    pub lambda_j: f64,
    pub lambda_k: f64,
}

/// Evaluates the frequency-independent Green coefficients of a reference
/// medium.
pub fn green_coeffs(medium: &ReferenceMedium) -> GreenCoefficients {
    let d = medium.dim.size() as f64;
    let (k0, m0) = (medium.kappa0, medium.mu0);
    let alpha0 = 1.0 / (4.0 * m0);
    let beta0 = -(d * k0 + (d - 2.0) * m0) / (m0 * (d * k0 + 2.0 * (d - 1.0) * m0));
    let lambda_j = (4.0 * alpha0 + beta0) / d;
    let lambda_k = ((2.0 * d * (d + 1.0) - 4.0) * alpha0 + (d - 1.0) * beta0) / d;
    GreenCoefficients {
        alpha0,
        beta0,
        lambda_j,
        lambda_k,
    }
}

/// Evaluates the Green tensor at one integer frequency vector.
///
/// `xi.len()` must equal the medium's dimension; out of convention the zero
/// frequency maps to the zero tensor (the operator removes the mean).
///
/// # Panics
///
/// Panics if `xi.len()` does not match the medium's dimension.
pub fn green_hat(xi: &[i64], medium: &ReferenceMedium) -> FullTensor4 {
    let dim = medium.dim;
    let d = dim.size();
    assert_eq!(xi.len(), d, "frequency vector length");
    if xi.iter().all(|&k| k == 0) {
        return FullTensor4::zero(dim);
    }
    let coeffs = green_coeffs(medium);
    let xf: [f64; 3] = [
        xi[0] as f64,
        xi[1] as f64,
        if d == 3 { xi[2] as f64 } else { 0.0 },
    ];
    let norm_sq: f64 = xf[..d].iter().map(|x| x * x).sum();

    // psi = xi (x) xi
    let mut psi = SymTensor2::zero(dim);
    for i in 0..d {
        for j in i..d {
            psi.set(i, j, xf[i] * xf[j]);
        }
    }
    let mut out = psi.dyad(&psi) * (coeffs.beta0 / (norm_sq * norm_sq));

    // psi_i = xi (x) e_i + e_i (x) xi
    for i in 0..d {
        let mut psi_i = SymTensor2::zero(dim);
        for j in 0..d {
            let v = if i == j { 2.0 * xf[j] } else { xf[j] };
            psi_i.set(i, j, v);
        }
        out = out + psi_i.dyad(&psi_i) * (coeffs.alpha0 / norm_sq);
    }
    out
}

/// Isotropic part of the Green tensor, `(lambda_j / n_J) J + (lambda_k / n_K) K`.
///
/// This equals `iso_project(green_hat(xi))` for every nonzero frequency.
pub fn green_iso(medium: &ReferenceMedium) -> IsoTensor4 {
    let coeffs = green_coeffs(medium);
    let dims = projector_dims(medium.dim);
    IsoTensor4::new(
        medium.dim,
        coeffs.lambda_j / dims.n_j as f64,
        coeffs.lambda_k / dims.n_k as f64,
    )
}

/// Direction-dependent remainder `green_hat(xi) - green_iso`, orthogonal to
/// both projectors.
///
/// Errors with [`Error::ZeroFrequency`] at `xi = 0`, where no direction
/// exists.
pub fn green_orthogonal(xi: &[i64], medium: &ReferenceMedium) -> Result<FullTensor4> {
    if xi.iter().all(|&k| k == 0) {
        return Err(Error::ZeroFrequency);
    }
    Ok(green_hat(xi, medium) - green_iso(medium).to_full())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_medium(dim: Dim) -> ReferenceMedium {
        ReferenceMedium::new(dim, 1.0, 1.0).unwrap()
    }

    #[test]
    fn coefficients_2d_unit_moduli() {
        let c = green_coeffs(&unit_medium(Dim::Two));
        assert_abs_diff_eq!(c.alpha0, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(c.beta0, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lambda_j, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lambda_k, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn coefficients_3d_unit_moduli() {
        let c = green_coeffs(&unit_medium(Dim::Three));
        assert_abs_diff_eq!(c.alpha0, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(c.beta0, -4.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lambda_j, 1.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lambda_k, 9.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn lambda_closed_forms() {
        // The projections admit closed forms in the reference moduli; the
        // direct coefficient evaluation must reproduce them.
        for dim in [Dim::Two, Dim::Three] {
            let d = dim.size() as f64;
            for (k0, m0) in [(1.0, 1.0), (2.3, 0.7), (0.4, 1.9)] {
                let medium = ReferenceMedium::new(dim, k0, m0).unwrap();
                let c = green_coeffs(&medium);
                let denom = d * k0 + 2.0 * (d - 1.0) * m0;
                assert_abs_diff_eq!(c.lambda_j, 1.0 / denom, epsilon = 1e-14);
                let lk = d * (d - 1.0) * (k0 + 2.0 * m0) / (2.0 * m0 * denom);
                assert_abs_diff_eq!(c.lambda_k, lk, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn green_hat_mandel_matrix_at_e1() {
        // xi = (1, 0), unit moduli: the Mandel matrix is diag(1/2, 0, 1/2).
        let g = green_hat(&[1, 0], &unit_medium(Dim::Two));
        let expect = [[0.5, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(g.get(i, j), expect[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn green_hat_is_homogeneous_and_even() {
        let medium = unit_medium(Dim::Three);
        let xi = [2i64, -1, 3];
        let g = green_hat(&xi, &medium);
        let g3 = green_hat(&[6, -3, 9], &medium);
        let gm = green_hat(&[-2, 1, -3], &medium);
        assert!((g - g3).norm() < 1e-13);
        assert!((g - gm).norm() < 1e-13);
    }

    #[test]
    fn green_hat_is_symmetric() {
        let medium = ReferenceMedium::new(Dim::Three, 1.7, 0.6).unwrap();
        let g = green_hat(&[1, -4, 2], &medium);
        assert!(g.major_sym_error() < 1e-14);
    }

    #[test]
    fn iso_projection_constant_over_frequencies() {
        for dim in [Dim::Two, Dim::Three] {
            let medium = ReferenceMedium::new(dim, 1.3, 0.9).unwrap();
            let iso_ref = green_iso(&medium);
            let freqs_2d: [&[i64]; 4] = [&[1, 0], &[0, 7], &[3, -2], &[-5, 11]];
            let freqs_3d: [&[i64]; 4] = [&[1, 0, 0], &[0, -2, 5], &[3, 3, 3], &[-7, 1, 2]];
            let freqs: &[&[i64]] = match dim {
                Dim::Two => &freqs_2d,
                Dim::Three => &freqs_3d,
            };
            for xi in freqs {
                let (iso, _) = green_hat(xi, &medium).iso_project();
                assert_abs_diff_eq!(iso.a, iso_ref.a, epsilon = 1e-13);
                assert_abs_diff_eq!(iso.b, iso_ref.b, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn orthogonal_part_has_no_isotropic_content() {
        let medium = ReferenceMedium::new(Dim::Two, 0.8, 1.4).unwrap();
        let j = FullTensor4::proj_spherical(Dim::Two);
        let k = FullTensor4::proj_deviatoric(Dim::Two);
        for xi in [[1i64, 0], [2, 3], [-1, 4]] {
            let rest = green_orthogonal(&xi, &medium).unwrap();
            assert_abs_diff_eq!(rest.ddot4(&j), 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!(rest.ddot4(&k), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn orthogonal_part_rejects_zero_frequency() {
        let err = green_orthogonal(&[0, 0], &unit_medium(Dim::Two)).unwrap_err();
        assert!(matches!(err, crate::error::Error::ZeroFrequency));
    }

    #[test]
    fn green_strain_is_compatible_and_balances_the_polarization() {
        // For any polarization the Green strain must derive from a
        // displacement (compatibility) and that displacement must satisfy the
        // reference equilibrium driven by the polarization divergence.
        let medium = ReferenceMedium::new(Dim::Three, 1.9, 0.7).unwrap();
        let d = 3;
        let xi = [2i64, -1, 4];
        let xf: Vec<f64> = xi.iter().map(|&k| k as f64).collect();
        let norm_sq: f64 = xf.iter().map(|x| x * x).sum();

        let tau = SymTensor2::from_mandel(Dim::Three, &[0.4, -1.2, 0.8, 0.3, -0.5, 0.9]);
        let e = green_hat(&xi, &medium).apply(&tau).unwrap();

        // Recover v (the scaled displacement amplitude) from e = -sym(v x xi):
        // xi . e . xi fixes v . xi, then e . xi fixes v.
        let mut e_xi = [0.0f64; 3];
        for i in 0..d {
            for j in 0..d {
                e_xi[i] += e.get(i, j) * xf[j];
            }
        }
        let xi_e_xi: f64 = (0..d).map(|i| xf[i] * e_xi[i]).sum();
        let v_dot_xi = -xi_e_xi / norm_sq;
        let v: Vec<f64> = (0..d)
            .map(|i| (-2.0 * e_xi[i] - v_dot_xi * xf[i]) / norm_sq)
            .collect();

        // Compatibility: e equals -sym(v x xi) exactly.
        for i in 0..d {
            for j in 0..d {
                let sym = -0.5 * (v[i] * xf[j] + v[j] * xf[i]);
                assert_abs_diff_eq!(e.get(i, j), sym, epsilon = 1e-12);
            }
        }

        // Equilibrium: omega0 (v . xi) xi + mu0 |xi|^2 v = -tau . xi.
        let (k0, m0) = (medium.kappa0(), medium.mu0());
        let omega0 = k0 + (d as f64 - 2.0) * m0 / d as f64;
        for i in 0..d {
            let mut tau_xi = 0.0;
            for j in 0..d {
                tau_xi += tau.get(i, j) * xf[j];
            }
            let lhs = omega0 * v_dot_xi * xf[i] + m0 * norm_sq * v[i];
            assert_abs_diff_eq!(lhs, -tau_xi, epsilon = 1e-12);
        }
    }
}
