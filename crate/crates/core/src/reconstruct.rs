//! Pointwise modulus reconstruction from full strain-field maps.
//!
//! The frequency-independent isotropic part of the periodic Green operator
//! makes the first-order strain-to-modulus relation local: each formula here
//! reads the strain at a point and returns the modulus at that same point,
//! with no integration or smoothing. Three families are provided:
//!
//! * generic linear identities using one spherical load (bulk) or the full
//!   orthogonal deviatoric basis (shear),
//! * quadratic single-load variants using only strain invariants, valid for
//!   macroscopically isotropic media,
//! * bounded-domain particular solutions, defined up to a biharmonic field
//!   and therefore anchored (by default) to a prescribed spatial mean.

use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField};
use crate::green::{green_coeffs, ReferenceMedium};
use crate::tensor::{projector_dims, Dim, FullTensor4, SymTensor2};

/// The two isotropic projectors a load basis can span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projector {
    /// Spherical projector (1/d) I (x) I.
    Spherical,
    /// Deviatoric projector, identity minus the spherical one.
    Deviatoric,
}

/// An orthogonal family of macroscopic strains spanning one projector.
///
/// Invariant: the normalized dyad sum over the loads reproduces the
/// projector entrywise, and distinct loads are orthogonal.
#[derive(Clone, Debug)]
pub struct LoadBasis {
    projector: Projector,
    dim: Dim,
    strains: Vec<SymTensor2>,
}

/// Builds the canonical load basis for a projector.
///
/// * Spherical: the single load `I`.
/// * Deviatoric, d = 2: the symmetric shear `e1 (x) e2 + e2 (x) e1` and
///   `diag(1, -1)`.
/// * Deviatoric, d = 3: the three symmetric shears plus `diag(1, -1, 0)`
///   and `diag(1, 1, -2)`.
pub fn make_load_basis(projector: Projector, dim: Dim) -> LoadBasis {
    let strains = match (projector, dim) {
        (Projector::Spherical, _) => vec![SymTensor2::identity(dim)],
        (Projector::Deviatoric, Dim::Two) => {
            let mut shear = SymTensor2::zero(dim);
            shear.set(0, 1, 1.0);
            let mut axial = SymTensor2::zero(dim);
            axial.set(0, 0, 1.0);
            axial.set(1, 1, -1.0);
            vec![shear, axial]
        }
        (Projector::Deviatoric, Dim::Three) => {
            let mut loads = Vec::with_capacity(5);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let mut shear = SymTensor2::zero(dim);
                shear.set(i, j, 1.0);
                loads.push(shear);
            }
            let mut biaxial = SymTensor2::zero(dim);
            biaxial.set(0, 0, 1.0);
            biaxial.set(1, 1, -1.0);
            loads.push(biaxial);
            let mut uniaxial = SymTensor2::zero(dim);
            uniaxial.set(0, 0, 1.0);
            uniaxial.set(1, 1, 1.0);
            uniaxial.set(2, 2, -2.0);
            loads.push(uniaxial);
            loads
        }
    };
    LoadBasis {
        projector,
        dim,
        strains,
    }
}

impl LoadBasis {
    pub fn projector(&self) -> Projector {
        self.projector
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn strains(&self) -> &[SymTensor2] {
        &self.strains
    }

    pub fn len(&self) -> usize {
        self.strains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strains.is_empty()
    }

    /// Normalized dyad sum over the loads; equals the projector when the
    /// basis is complete and orthogonal.
    pub fn assembly(&self) -> FullTensor4 {
        let mut sum = FullTensor4::zero(self.dim);
        for s in &self.strains {
            sum = sum + s.dyad(s) * (1.0 / s.ddot(s));
        }
        sum
    }

    /// The projector tensor this basis is meant to span.
    pub fn projector_tensor(&self) -> FullTensor4 {
        match self.projector {
            Projector::Spherical => FullTensor4::proj_spherical(self.dim),
            Projector::Deviatoric => FullTensor4::proj_deviatoric(self.dim),
        }
    }
}

/// Strain-field solutions for every load of a basis, plus the reference
/// medium they were solved against.
#[derive(Clone, Debug)]
pub struct ExperimentSet {
    basis: LoadBasis,
    fields: Vec<TensorField>,
    reference: ReferenceMedium,
}

impl ExperimentSet {
    /// Bundles fields with their load basis.
    ///
    /// Errors with [`Error::IncompleteBasis`] when the field count differs
    /// from the basis length, [`Error::GridMismatch`] when fields disagree
    /// on the grid, and [`Error::DimensionMismatch`] on dimension conflicts.
    pub fn new(
        basis: LoadBasis,
        fields: Vec<TensorField>,
        reference: ReferenceMedium,
    ) -> Result<Self> {
        if fields.len() != basis.len() {
            return Err(Error::IncompleteBasis {
                needed: basis.len(),
                got: fields.len(),
            });
        }
        if reference.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim().size(),
                got: reference.dim().size(),
            });
        }
        for f in &fields {
            if f.grid().dim() != basis.dim() {
                return Err(Error::DimensionMismatch {
                    expected: basis.dim().size(),
                    got: f.grid().dim().size(),
                });
            }
            if f.grid().shape() != fields[0].grid().shape() {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self {
            basis,
            fields,
            reference,
        })
    }

    pub fn basis(&self) -> &LoadBasis {
        &self.basis
    }

    pub fn fields(&self) -> &[TensorField] {
        &self.fields
    }

    pub fn reference(&self) -> &ReferenceMedium {
        &self.reference
    }
}

/// Which modulus a reconstruction produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModulusKind {
    Bulk,
    Shear,
}

/// Which identity produced a reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconMethod {
    /// Linear identities on one load (bulk) or the full basis (shear).
    Generic,
    /// Quadratic invariant-based single-load identities.
    Isotropic,
    /// Bounded-domain particular solution.
    Bounded,
}

/// How a bounded-domain map's undetermined additive field was fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchoring {
    /// Shift the map so its spatial mean equals the reference modulus.
    Mean,
    /// Leave the raw particular solution untouched.
    None,
}

/// A reconstructed modulus map with provenance.
#[derive(Clone, Debug)]
pub struct ReconResult {
    pub map: ScalarField,
    pub kind: ModulusKind,
    pub method: ReconMethod,
    /// `Some` only for the bounded method, whose output is defined up to a
    /// biharmonic field and must record how that freedom was fixed.
    pub anchoring: Option<Anchoring>,
}

/// Bulk-modulus map from a single spherical load:
/// `kappa(x) = kappa0 + (1/lambda_J)/d [1 - e0(x)/e0_bar]`.
///
/// Errors with [`Error::ZeroMacroStrain`] when the load has no hydrostatic
/// part.
///
/// # Panics
///
/// Panics if the experiment does not use the spherical basis.
pub fn reconstruct_bulk(exp: &ExperimentSet) -> Result<ReconResult> {
    assert_eq!(
        exp.basis.projector(),
        Projector::Spherical,
        "bulk reconstruction needs the spherical load basis"
    );
    let d = exp.basis.dim().size() as f64;
    let eps_bar = &exp.basis.strains()[0];
    let bar0 = eps_bar.invariants().hydrostatic;
    if bar0 == 0.0 {
        return Err(Error::ZeroMacroStrain);
    }
    let coeff = 1.0 / (green_coeffs(exp.reference()).lambda_j * d);
    let field = &exp.fields[0];
    let mut values = Vec::with_capacity(field.grid().len());
    for flat in 0..field.grid().len() {
        let e0 = field.get(flat).invariants().hydrostatic;
        values.push(exp.reference.kappa0() + coeff * (1.0 - e0 / bar0));
    }
    Ok(ReconResult {
        map: ScalarField::new(field.grid(), values)?,
        kind: ModulusKind::Bulk,
        method: ReconMethod::Generic,
        anchoring: None,
    })
}

/// Shear-modulus map from the complete deviatoric basis:
/// `mu(x) = mu0 + (1/lambda_K)/2 sum_i [1 - e_i(x) : ebar_i / |ebar_i|^2]`.
///
/// The loads are deviatoric, so contracting the raw field with the load
/// already extracts the deviatoric part.
///
/// # Panics
///
/// Panics if the experiment does not use the deviatoric basis.
pub fn reconstruct_shear(exp: &ExperimentSet) -> Result<ReconResult> {
    assert_eq!(
        exp.basis.projector(),
        Projector::Deviatoric,
        "shear reconstruction needs the deviatoric load basis"
    );
    let coeff = 0.5 / green_coeffs(exp.reference()).lambda_k;
    let grid = exp.fields[0].grid();
    let mut values = vec![exp.reference.mu0(); grid.len()];
    for (load, field) in exp.basis.strains().iter().zip(&exp.fields) {
        let norm_sq = load.ddot(load);
        for (flat, v) in values.iter_mut().enumerate() {
            let ratio = field.get(flat).ddot(load) / norm_sq;
            *v += coeff * (1.0 - ratio);
        }
    }
    Ok(ReconResult {
        map: ScalarField::new(grid, values)?,
        kind: ModulusKind::Shear,
        method: ReconMethod::Generic,
        anchoring: None,
    })
}

/// Diagnostic shear map that uses only the load at `index`, rescaled by the
/// basis size so a correct medium still comes out unbiased on average.
/// Expect larger errors than [`reconstruct_shear`]: a single deviatoric
/// projection cannot see the full deviatoric response.
///
/// # Panics
///
/// Panics on a non-deviatoric basis or an out-of-range index.
pub fn reconstruct_shear_diagnostic(exp: &ExperimentSet, index: usize) -> Result<ReconResult> {
    assert_eq!(
        exp.basis.projector(),
        Projector::Deviatoric,
        "shear reconstruction needs the deviatoric load basis"
    );
    assert!(index < exp.basis.len(), "load index out of range");
    let n_k = projector_dims(exp.basis.dim()).n_k as f64;
    let coeff = n_k * 0.5 / green_coeffs(exp.reference()).lambda_k;
    let load = &exp.basis.strains()[index];
    let field = &exp.fields[index];
    let norm_sq = load.ddot(load);
    let mut values = Vec::with_capacity(field.grid().len());
    for flat in 0..field.grid().len() {
        let ratio = field.get(flat).ddot(load) / norm_sq;
        values.push(exp.reference.mu0() + coeff * (1.0 - ratio));
    }
    Ok(ReconResult {
        map: ScalarField::new(field.grid(), values)?,
        kind: ModulusKind::Shear,
        method: ReconMethod::Generic,
        anchoring: None,
    })
}

fn require_pure(eps_bar: &SymTensor2, want_spherical: bool) -> Result<()> {
    let norm = eps_bar.norm();
    if norm == 0.0 {
        return Err(Error::ZeroMacroStrain);
    }
    let (sph, dev) = eps_bar.sph_dev();
    let off = if want_spherical {
        dev.norm()
    } else {
        sph.norm()
    };
    let on = if want_spherical {
        sph.norm()
    } else {
        dev.norm()
    };
    if on <= 1e-12 * norm {
        return Err(Error::ZeroMacroStrain);
    }
    if off > 1e-12 * norm {
        return Err(Error::MixedMacroStrain);
    }
    Ok(())
}

/// Quadratic bulk map from one spherical load, using only the hydrostatic
/// invariant: `kappa(x) = kappa0 + n_J (1/lambda_J)/(2d) [1 - e0(x)^2 / e0_bar^2]`.
///
/// Exact to first order for macroscopically isotropic media; agrees with
/// [`reconstruct_bulk`] up to quadratic terms in the contrast.
pub fn reconstruct_bulk_iso(
    field: &TensorField,
    eps_bar: &SymTensor2,
    reference: &ReferenceMedium,
) -> Result<ReconResult> {
    require_pure(eps_bar, true)?;
    let d = reference.dim().size() as f64;
    let n_j = projector_dims(reference.dim()).n_j as f64;
    let coeff = n_j / (green_coeffs(reference).lambda_j * 2.0 * d);
    let bar_sq = {
        let e = eps_bar.invariants().hydrostatic;
        e * e
    };
    let mut values = Vec::with_capacity(field.grid().len());
    for flat in 0..field.grid().len() {
        let e0 = field.get(flat).invariants().hydrostatic;
        values.push(reference.kappa0() + coeff * (1.0 - e0 * e0 / bar_sq));
    }
    Ok(ReconResult {
        map: ScalarField::new(field.grid(), values)?,
        kind: ModulusKind::Bulk,
        method: ReconMethod::Isotropic,
        anchoring: None,
    })
}

/// Quadratic shear map from one deviatoric load, using only the equivalent
/// invariant: `mu(x) = mu0 + n_K (1/lambda_K)/4 [1 - e_eq(x)^2 / eq_bar^2]`.
pub fn reconstruct_shear_iso(
    field: &TensorField,
    eps_bar: &SymTensor2,
    reference: &ReferenceMedium,
) -> Result<ReconResult> {
    require_pure(eps_bar, false)?;
    let n_k = projector_dims(reference.dim()).n_k as f64;
    let coeff = n_k / (green_coeffs(reference).lambda_k * 4.0);
    let bar_sq = {
        let e = eps_bar.invariants().equivalent;
        e * e
    };
    let mut values = Vec::with_capacity(field.grid().len());
    for flat in 0..field.grid().len() {
        let eq = field.get(flat).invariants().equivalent;
        values.push(reference.mu0() + coeff * (1.0 - eq * eq / bar_sq));
    }
    Ok(ReconResult {
        map: ScalarField::new(field.grid(), values)?,
        kind: ModulusKind::Shear,
        method: ReconMethod::Isotropic,
        anchoring: None,
    })
}

/// Bounded-domain reconstruction from the particular-solution identities
/// `dkappa(x) = -(1/lambda_J)/d (eps - ebar) : ebar / |ebar|^2` and the
/// deviatoric analogue summed over the basis.
///
/// Without periodicity the governing equations fix the modulus only up to a
/// field annihilated by the squared Laplacian; [`Anchoring::Mean`] resolves
/// that freedom by shifting the map so its spatial mean equals the declared
/// reference modulus, while [`Anchoring::None`] returns the raw particular
/// solution.
pub fn reconstruct_bounded(exp: &ExperimentSet, anchoring: Anchoring) -> Result<ReconResult> {
    let d = exp.basis.dim().size() as f64;
    let coeffs = green_coeffs(exp.reference());
    let grid = exp.fields[0].grid();
    let (kind, base) = match exp.basis.projector() {
        Projector::Spherical => (ModulusKind::Bulk, exp.reference.kappa0()),
        Projector::Deviatoric => (ModulusKind::Shear, exp.reference.mu0()),
    };
    let mut values = vec![base; grid.len()];
    for (load, field) in exp.basis.strains().iter().zip(&exp.fields) {
        let coeff = match exp.basis.projector() {
            Projector::Spherical => -1.0 / (coeffs.lambda_j * d),
            Projector::Deviatoric => -0.5 / coeffs.lambda_k,
        };
        let norm_sq = load.ddot(load);
        for (flat, v) in values.iter_mut().enumerate() {
            let delta = field.get(flat) - *load;
            *v += coeff * delta.ddot(load) / norm_sq;
        }
    }
    let mut map = ScalarField::new(grid, values)?;
    if anchoring == Anchoring::Mean {
        map.shift(base - map.mean());
    }
    Ok(ReconResult {
        map,
        kind,
        method: ReconMethod::Bounded,
        anchoring: Some(anchoring),
    })
}

/// Summary statistics of a normalized error map over index windows.
#[derive(Clone, Copy, Debug)]
pub struct WindowStats {
    pub sup: f64,
    pub median: f64,
}

/// Normalized-error statistics: global, central-quarter window, and
/// outermost five-percent boundary band.
#[derive(Clone, Copy, Debug)]
pub struct ErrorStats {
    pub global: WindowStats,
    pub interior: WindowStats,
    pub boundary: WindowStats,
}

fn window_stats(mut values: Vec<f64>) -> WindowStats {
    if values.is_empty() {
        return WindowStats {
            sup: f64::NAN,
            median: f64::NAN,
        };
    }
    values.sort_by(f64::total_cmp);
    let sup = *values.last().unwrap();
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    WindowStats { sup, median }
}

/// Statistics of an existing (already normalized) error field.
///
/// Window membership uses the per-axis index fraction `i / (n - 1)`: the
/// interior window keeps points with every fraction in `[1/4, 3/4]`, the
/// boundary band keeps points with some fraction within 5% of an edge.
pub fn stats_of_error_field(err: &ScalarField) -> ErrorStats {
    let grid = err.grid();
    let d = grid.dim().size();
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for flat in 0..grid.len() {
        let v = err.get(flat);
        let idx = grid.unflat(flat);
        let mut in_interior = true;
        let mut in_boundary = false;
        for axis in 0..d {
            let n = grid.shape()[axis];
            let t = if n > 1 {
                idx[axis] as f64 / (n - 1) as f64
            } else {
                0.5
            };
            if !(0.25..=0.75).contains(&t) {
                in_interior = false;
            }
            if t <= 0.05 || t >= 0.95 {
                in_boundary = true;
            }
        }
        if in_interior {
            interior.push(v);
        }
        if in_boundary {
            boundary.push(v);
        }
    }
    ErrorStats {
        global: window_stats(err.values().to_vec()),
        interior: window_stats(interior),
        boundary: window_stats(boundary),
    }
}

/// Pointwise normalized error `|ref(x) - recon(x)| / c` plus its statistics
/// (see [`stats_of_error_field`] for the window conventions).
///
/// Errors with [`Error::GridMismatch`] when the grids disagree.
///
/// # Panics
///
/// Panics unless `c > 0`.
pub fn error_map(
    ref_map: &ScalarField,
    recon: &ReconResult,
    c: f64,
) -> Result<(ScalarField, ErrorStats)> {
    assert!(c > 0.0, "contrast must be positive");
    let grid = ref_map.grid();
    if grid.shape() != recon.map.grid().shape() || grid.dim() != recon.map.grid().dim() {
        return Err(Error::GridMismatch);
    }
    let mut values = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        values.push((ref_map.get(flat) - recon.map.get(flat)).abs() / c);
    }
    let field = ScalarField::new(grid, values)?;
    let stats = stats_of_error_field(&field);
    Ok((field, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use approx::assert_abs_diff_eq;

    fn unit_medium(dim: Dim) -> ReferenceMedium {
        ReferenceMedium::new(dim, 1.0, 1.0).unwrap()
    }

    fn assembly_error(basis: &LoadBasis) -> f64 {
        let target = basis.projector_tensor();
        let got = basis.assembly();
        let mut worst: f64 = 0.0;
        let len = basis.dim().mandel_len();
        for i in 0..len {
            for j in 0..len {
                worst = worst.max((got.get(i, j) - target.get(i, j)).abs());
            }
        }
        worst
    }

    #[test]
    fn canonical_bases_reproduce_their_projectors() {
        for dim in [Dim::Two, Dim::Three] {
            let dims = projector_dims(dim);
            let j = make_load_basis(Projector::Spherical, dim);
            assert_eq!(j.len(), dims.n_j);
            assert!(assembly_error(&j) < 1e-14);
            let k = make_load_basis(Projector::Deviatoric, dim);
            assert_eq!(k.len(), dims.n_k);
            assert!(assembly_error(&k) < 1e-14);
            for (i, a) in k.strains().iter().enumerate() {
                assert!(a.trace().abs() < 1e-15, "loads must be deviatoric");
                for b in k.strains().iter().skip(i + 1) {
                    assert_abs_diff_eq!(a.ddot(b), 0.0, epsilon = 1e-15);
                }
            }
        }
    }

    fn uniform_experiment(dim: Dim, projector: Projector, scale: f64) -> ExperimentSet {
        // Each field is its own load shrunk by `scale`, on a 2x2(x2) grid.
        let basis = make_load_basis(projector, dim);
        let grid = Grid::cube(dim, 2);
        let fields = basis
            .strains()
            .iter()
            .map(|s| TensorField::uniform(grid, &(*s * scale)))
            .collect();
        ExperimentSet::new(basis, fields, unit_medium(dim)).unwrap()
    }

    #[test]
    fn zero_contrast_returns_reference_exactly() {
        for dim in [Dim::Two, Dim::Three] {
            let bulk =
                reconstruct_bulk(&uniform_experiment(dim, Projector::Spherical, 1.0)).unwrap();
            let shear =
                reconstruct_shear(&uniform_experiment(dim, Projector::Deviatoric, 1.0)).unwrap();
            for flat in 0..bulk.map.grid().len() {
                assert_eq!(bulk.map.get(flat), 1.0);
                assert_eq!(shear.map.get(flat), 1.0);
            }
        }
    }

    #[test]
    fn bulk_point_value_2d() {
        // Unit medium in 2D has 1/lambda_J = 4; a hydrostatic ratio of 0.98
        // gives kappa = 1 + (4/2)(1 - 0.98) = 1.04.
        let exp = uniform_experiment(Dim::Two, Projector::Spherical, 0.98);
        let recon = reconstruct_bulk(&exp).unwrap();
        assert_abs_diff_eq!(recon.map.get(0), 1.04, epsilon = 1e-14);
        assert_eq!(recon.kind, ModulusKind::Bulk);
        assert_eq!(recon.method, ReconMethod::Generic);
        assert!(recon.anchoring.is_none());
    }

    #[test]
    fn shear_point_value_2d() {
        // Unit medium in 2D has 1/lambda_K = 4/3; two projection ratios of
        // 0.99 give mu = 1 + (4/3)/2 * 0.02.
        let exp = uniform_experiment(Dim::Two, Projector::Deviatoric, 0.99);
        let recon = reconstruct_shear(&exp).unwrap();
        assert_abs_diff_eq!(recon.map.get(0), 1.0 + (4.0 / 3.0) * 0.01, epsilon = 1e-14);
    }

    #[test]
    fn bulk_trace_form_agrees() {
        // The hydrostatic-ratio form must match the contraction form
        // 1 - eps : ebar / |ebar|^2.
        let dim = Dim::Two;
        let basis = make_load_basis(Projector::Spherical, dim);
        let grid = Grid::new2(4, 3);
        let mut field = TensorField::zeros(grid);
        for flat in 0..grid.len() {
            let f = flat as f64;
            let t = SymTensor2::from_mandel(
                dim,
                &[
                    1.0 + 0.01 * f.sin(),
                    1.0 - 0.02 * f.cos(),
                    0.03 * (2.0 * f).sin(),
                ],
            );
            field.set(flat, &t);
        }
        let eps_bar = basis.strains()[0];
        let exp = ExperimentSet::new(basis, vec![field.clone()], unit_medium(dim)).unwrap();
        let recon = reconstruct_bulk(&exp).unwrap();
        let norm_sq = eps_bar.ddot(&eps_bar);
        for flat in 0..grid.len() {
            let ratio = field.get(flat).ddot(&eps_bar) / norm_sq;
            let via_trace = 1.0 + 2.0 * (1.0 - ratio);
            assert_abs_diff_eq!(recon.map.get(flat), via_trace, epsilon = 1e-13);
        }
    }

    #[test]
    fn iso_coefficients_2d() {
        let dim = Dim::Two;
        let medium = unit_medium(dim);
        let grid = Grid::cube(dim, 2);
        // Hydrostatic ratio 0.98 squared is 0.9604: kappa = 1 + 1*(1-0.9604).
        let sph = SymTensor2::identity(dim);
        let field = TensorField::uniform(grid, &(sph * 0.98));
        let recon = reconstruct_bulk_iso(&field, &sph, &medium).unwrap();
        assert_abs_diff_eq!(
            recon.map.get(0),
            1.0 + (1.0 - 0.98f64.powi(2)),
            epsilon = 1e-14
        );
        assert_eq!(recon.method, ReconMethod::Isotropic);
        // Shear coefficient n_K (1/lambda_K)/4 = 2*(4/3)/4 = 2/3.
        let mut dev = SymTensor2::zero(dim);
        dev.set(0, 1, 1.0);
        let field = TensorField::uniform(grid, &(dev * 0.99));
        let recon = reconstruct_shear_iso(&field, &dev, &medium).unwrap();
        assert_abs_diff_eq!(
            recon.map.get(0),
            1.0 + (2.0 / 3.0) * (1.0 - 0.99f64.powi(2)),
            epsilon = 1e-14
        );
    }

    #[test]
    fn iso_rejects_wrong_load_types() {
        let dim = Dim::Two;
        let medium = unit_medium(dim);
        let grid = Grid::cube(dim, 2);
        let field = TensorField::zeros(grid);
        let mixed = SymTensor2::from_mandel(dim, &[1.0, 0.5, 0.0]);
        assert!(matches!(
            reconstruct_bulk_iso(&field, &mixed, &medium),
            Err(Error::MixedMacroStrain)
        ));
        assert!(matches!(
            reconstruct_shear_iso(&field, &mixed, &medium),
            Err(Error::MixedMacroStrain)
        ));
        // A pure load of the wrong kind leaves the driving invariant at zero.
        assert!(matches!(
            reconstruct_shear_iso(&field, &SymTensor2::identity(dim), &medium),
            Err(Error::ZeroMacroStrain)
        ));
        assert!(matches!(
            reconstruct_bulk_iso(&field, &SymTensor2::zero(dim), &medium),
            Err(Error::ZeroMacroStrain)
        ));
    }

    #[test]
    fn diagnostic_equals_full_map_when_ratios_match() {
        // With every projection ratio equal, n_K times one bracket equals
        // the sum over the basis.
        let exp = uniform_experiment(Dim::Two, Projector::Deviatoric, 0.95);
        let full = reconstruct_shear(&exp).unwrap();
        for index in 0..2 {
            let single = reconstruct_shear_diagnostic(&exp, index).unwrap();
            for flat in 0..full.map.grid().len() {
                assert_abs_diff_eq!(single.map.get(flat), full.map.get(flat), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn incomplete_basis_is_rejected() {
        let dim = Dim::Two;
        let basis = make_load_basis(Projector::Deviatoric, dim);
        let grid = Grid::cube(dim, 2);
        let fields = vec![TensorField::zeros(grid)];
        match ExperimentSet::new(basis, fields, unit_medium(dim)) {
            Err(Error::IncompleteBasis { needed: 2, got: 1 }) => {}
            other => panic!("expected IncompleteBasis, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let dim = Dim::Two;
        let basis = make_load_basis(Projector::Deviatoric, dim);
        let fields = vec![
            TensorField::zeros(Grid::cube(dim, 2)),
            TensorField::zeros(Grid::cube(dim, 3)),
        ];
        assert!(matches!(
            ExperimentSet::new(basis, fields, unit_medium(dim)),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn bounded_mean_anchoring_matches_generic_on_mean_centered_data() {
        // Fields whose fluctuation averages to zero: the particular solution
        // plus mean anchoring must coincide with the generic formula.
        let dim = Dim::Two;
        let basis = make_load_basis(Projector::Spherical, dim);
        let grid = Grid::new2(4, 4);
        let mut field = TensorField::zeros(grid);
        let eps_bar = basis.strains()[0];
        for flat in 0..grid.len() {
            let x = grid.coords(flat);
            let bump = 0.01 * (2.0 * std::f64::consts::PI * x[0]).cos();
            field.set(flat, &(eps_bar * (1.0 + bump)));
        }
        let exp = ExperimentSet::new(basis, vec![field], unit_medium(dim)).unwrap();
        let generic = reconstruct_bulk(&exp).unwrap();
        let bounded = reconstruct_bounded(&exp, Anchoring::Mean).unwrap();
        let raw = reconstruct_bounded(&exp, Anchoring::None).unwrap();
        assert_eq!(bounded.method, ReconMethod::Bounded);
        assert_eq!(bounded.anchoring, Some(Anchoring::Mean));
        for flat in 0..grid.len() {
            assert_abs_diff_eq!(
                bounded.map.get(flat),
                generic.map.get(flat),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(raw.map.get(flat), generic.map.get(flat), epsilon = 1e-12);
        }
    }

    #[test]
    fn bounded_anchoring_fixes_the_mean() {
        // A constant strain offset is invisible to mean anchoring but not to
        // the raw particular solution.
        let dim = Dim::Two;
        let basis = make_load_basis(Projector::Spherical, dim);
        let grid = Grid::cube(dim, 3);
        let eps_bar = basis.strains()[0];
        let field = TensorField::uniform(grid, &(eps_bar * 1.02));
        let exp = ExperimentSet::new(basis, vec![field], unit_medium(dim)).unwrap();
        let anchored = reconstruct_bounded(&exp, Anchoring::Mean).unwrap();
        let raw = reconstruct_bounded(&exp, Anchoring::None).unwrap();
        assert_abs_diff_eq!(anchored.map.mean(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(raw.map.get(0), 1.0 - 2.0 * 0.02, epsilon = 1e-14);
    }

    #[test]
    fn error_map_values_and_stats() {
        let dim = Dim::Two;
        let grid = Grid::cube(dim, 21);
        let reference = ScalarField::uniform(grid, 1.0);
        let recon = ReconResult {
            map: ScalarField::uniform(grid, 1.005),
            kind: ModulusKind::Bulk,
            method: ReconMethod::Generic,
            anchoring: None,
        };
        let (map, stats) = error_map(&reference, &recon, 0.01).unwrap();
        for flat in 0..grid.len() {
            assert_abs_diff_eq!(map.get(flat), 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(stats.global.sup, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.global.median, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.interior.median, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.boundary.median, 0.5, epsilon = 1e-12);

        let other = ReconResult {
            map: ScalarField::uniform(Grid::cube(dim, 8), 1.0),
            kind: ModulusKind::Bulk,
            method: ReconMethod::Generic,
            anchoring: None,
        };
        assert!(matches!(
            error_map(&reference, &other, 0.01),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn error_map_windows_separate_regions() {
        // Error covering the three-cell boundary band (index fraction within
        // 0.05 of an edge on a 41-grid) shows up there, not in the interior
        // window.
        let dim = Dim::Two;
        let grid = Grid::cube(dim, 41);
        let reference = ScalarField::uniform(grid, 1.0);
        let mut values = vec![1.0; grid.len()];
        for (flat, v) in values.iter_mut().enumerate() {
            let idx = grid.unflat(flat);
            let edge = idx[..2].iter().any(|&i| i <= 2 || i >= 38);
            if edge {
                *v = 1.1;
            }
        }
        let recon = ReconResult {
            map: ScalarField::new(grid, values).unwrap(),
            kind: ModulusKind::Bulk,
            method: ReconMethod::Bounded,
            anchoring: Some(Anchoring::Mean),
        };
        let (_, stats) = error_map(&reference, &recon, 0.1).unwrap();
        assert_abs_diff_eq!(stats.interior.sup, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stats.boundary.sup, 1.0, epsilon = 1e-12);
        assert!(stats.boundary.median > stats.interior.median);
        assert_abs_diff_eq!(stats.global.sup, 1.0, epsilon = 1e-12);
    }
}
