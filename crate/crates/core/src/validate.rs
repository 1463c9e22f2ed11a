//! Self-contained validation checks against closed-form values: frozen
//! Green-operator coefficients, projector assembly, the dilute-inclusion
//! chain, and the two-phase moment chain. The command-line `validate`
//! subcommand prints one line per check.

use crate::green::{green_coeffs, green_hat, green_iso, ReferenceMedium};
use crate::oracles::{
    eshelby_first_order_check, eshelby_interior, hs_derivatives, hs_effective, hs_recover_moduli,
    hs_second_moments, RecoveredModulus,
};
use crate::reconstruct::{make_load_basis, Projector};
use crate::tensor::{projector_dims, Dim, SymTensor2};

/// One named pass/fail result with a human-readable detail string.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationSummary {
    pub checks: Vec<Check>,
}

impl ValidationSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn add(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

fn unit_medium(dim: Dim) -> ReferenceMedium {
    ReferenceMedium::new(dim, 1.0, 1.0).unwrap()
}

/// Runs every oracle check; pure computation, no I/O.
pub fn run_validation() -> ValidationSummary {
    let mut summary = ValidationSummary::default();

    // Frozen Green coefficients for unit media.
    {
        let c2 = green_coeffs(&unit_medium(Dim::Two));
        let c3 = green_coeffs(&unit_medium(Dim::Three));
        let expect2 = (0.25, -0.5, 0.25, 0.75);
        let expect3 = (0.25, -4.0 / 7.0, 1.0 / 7.0, 9.0 / 7.0);
        let err = (c2.alpha0 - expect2.0)
            .abs()
            .max((c2.beta0 - expect2.1).abs())
            .max((c2.lambda_j - expect2.2).abs())
            .max((c2.lambda_k - expect2.3).abs())
            .max((c3.alpha0 - expect3.0).abs())
            .max((c3.beta0 - expect3.1).abs())
            .max((c3.lambda_j - expect3.2).abs())
            .max((c3.lambda_k - expect3.3).abs());
        summary.add(
            "green coefficients frozen values",
            err < 1e-15,
            format!("max deviation {err:.3e}"),
        );
    }

    // The isotropic projection of the Green operator is the same at every
    // nonzero frequency.
    {
        let mut worst: f64 = 0.0;
        for dim in [Dim::Two, Dim::Three] {
            let medium = ReferenceMedium::new(dim, 1.7, 0.6).unwrap();
            let iso = green_iso(&medium);
            let freqs: &[&[i64]] = match dim {
                Dim::Two => &[&[1, 0], &[0, 3], &[2, -5], &[7, 11]],
                Dim::Three => &[&[1, 0, 0], &[0, 2, -1], &[3, 5, -7], &[1, 1, 1]],
            };
            for xi in freqs {
                let (proj, _) = green_hat(xi, &medium).iso_project();
                worst = worst
                    .max((proj.a - iso.a).abs())
                    .max((proj.b - iso.b).abs());
            }
        }
        summary.add(
            "green isotropic part frequency-independent",
            worst < 1e-13,
            format!("max deviation {worst:.3e}"),
        );
    }

    // Load bases assemble their projectors.
    {
        let mut worst: f64 = 0.0;
        for dim in [Dim::Two, Dim::Three] {
            for projector in [Projector::Spherical, Projector::Deviatoric] {
                let basis = make_load_basis(projector, dim);
                let target = basis.projector_tensor();
                let got = basis.assembly();
                let m = dim.mandel_len();
                for i in 0..m {
                    for j in 0..m {
                        worst = worst.max((got.get(i, j) - target.get(i, j)).abs());
                    }
                }
            }
        }
        summary.add(
            "load basis projector assembly",
            worst < 1e-14,
            format!("max entry deviation {worst:.3e}"),
        );
    }

    // Dilute-inclusion chain: interior strain, then first-order recovery
    // whose defect is exactly ks * dkappa.
    {
        let medium = unit_medium(Dim::Three);
        let eps_bar = SymTensor2::identity(Dim::Three);
        let interior = eshelby_interior(&medium, (1.1, 1.0), &eps_bar);
        let ks = 0.1 / (1.1 + 4.0 / 3.0);
        let rec = eshelby_first_order_check(&interior, &eps_bar, &medium);
        let (passed, detail) = match rec {
            Ok(RecoveredModulus::Bulk(kappa)) => {
                let defect = ((kappa - 1.1).abs() - ks * 0.1).abs();
                (
                    (kappa - 1.0958904109589).abs() < 1e-12 && defect < 1e-12,
                    format!("kappa_rec = {kappa:.10}, defect error {defect:.3e}"),
                )
            }
            other => (false, format!("unexpected branch: {other:?}")),
        };
        summary.add("dilute inclusion bulk recovery", passed, detail);
    }

    // Two-phase chain: frozen effective value, derivative cross-check, and
    // near-exact recovery at weak contrast.
    {
        let hs = hs_effective(Dim::Three, 0.5, (0.95, 1.05), (1.0, 1.0));
        let frozen = (hs.kappa - 0.998928571428571).abs();
        summary.add(
            "two-phase effective bulk frozen value",
            frozen < 1e-12,
            format!("kappa_eff = {}, deviation {frozen:.3e}", hs.kappa),
        );

        let dim = Dim::Three;
        let f1 = 0.4;
        let kappas = (1.05, 0.9);
        let mus = (0.85, 1.1);
        let der = hs_derivatives(dim, f1, kappas, mus);
        let h = 1e-6 * kappas.0;
        let fd = (hs_effective(dim, f1, (kappas.0 + h, kappas.1), mus).kappa
            - hs_effective(dim, f1, (kappas.0 - h, kappas.1), mus).kappa)
            / (2.0 * h);
        let dev = (der.dkappa_dkappa1 - fd).abs();
        summary.add(
            "two-phase derivative vs finite difference",
            dev < 1e-8 * (1.0 + fd.abs()),
            format!("analytic {} vs fd {fd}", der.dkappa_dkappa1),
        );

        let delta = 0.01;
        let kappas = (1.0 - 0.5 * delta, 1.0 + 0.5 * delta);
        let mus = kappas;
        let eps_bar = SymTensor2::identity(dim);
        let moments = hs_second_moments(dim, 0.5, kappas, mus, &eps_bar).unwrap();
        let rec = hs_recover_moduli(moments, &eps_bar, &unit_medium(dim)).unwrap();
        let err = (rec.value() - kappas.0).abs();
        summary.add(
            "two-phase moment recovery weak contrast",
            err <= 1e-4,
            format!("kappa1_rec = {}, error {err:.3e}", rec.value()),
        );
    }

    // Projector dimensions recorded for reference in the detail string.
    {
        let p2 = projector_dims(Dim::Two);
        let p3 = projector_dims(Dim::Three);
        summary.add(
            "projector dimensions",
            p2.n_j == 1 && p2.n_k == 2 && p3.n_j == 1 && p3.n_k == 5,
            format!(
                "2d (n_J, n_K) = ({}, {}), 3d = ({}, {})",
                p2.n_j, p2.n_k, p3.n_j, p3.n_k
            ),
        );
    }

    summary
}
