//! Staged experiment pipeline: generate reference maps, solve the forward
//! problem per load, reconstruct modulus maps, and write a text report.
//!
//! Every stage reads its inputs from files in the output directory and
//! writes its outputs there, so stages can be re-run independently. All
//! artifacts are deterministic functions of the configuration: no
//! timestamps, no hash-map iteration, full round-trip number formatting.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{GeneratorKind, LoadSet, RunConfig, SolverKind};
use crate::error::{Error, Result};
use crate::fem::solve_dirichlet;
use crate::field::{Grid, ScalarField};
use crate::green::ReferenceMedium;
use crate::io::{read_field, write_field, write_pgm, FieldData, FieldFile, PgmRange};
use crate::microstructure::{gen_inclusion, gen_smooth_aniso, gen_voronoi, ModulusMaps};
use crate::reconstruct::{
    error_map, make_load_basis, reconstruct_bounded, reconstruct_bulk, reconstruct_shear,
    reconstruct_shear_diagnostic, ExperimentSet, LoadBasis, ModulusKind, Projector, ReconResult,
};
use crate::spectral::{mean_reference, solve_ls, SolverOptions};
use crate::tensor::SymTensor2;

/// Pipeline stages in canonical execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Generate,
    Solve,
    Reconstruct,
    Report,
}

/// Artifact file names (relative to the output directory) written by one
/// [`run_pipeline`] invocation, in creation order.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub files: Vec<String>,
}

impl Manifest {
    fn push(&mut self, name: impl Into<String>) {
        self.files.push(name.into());
    }
}

fn stage_err(stage: &str, err: Error) -> Error {
    match err {
        Error::Config { line, message } => Error::Config {
            line,
            message: format!("{stage}: {message}"),
        },
        other => other,
    }
}

/// Runs the requested stages in order. Creates the output directory if
/// needed and writes `manifest.txt` listing this invocation's artifacts.
pub fn run_pipeline(config: &RunConfig, stages: &[Stage]) -> Result<Manifest> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut manifest = Manifest::default();
    for stage in stages {
        match stage {
            Stage::Generate => {
                generate_stage(config, &mut manifest).map_err(|e| stage_err("generate", e))?
            }
            Stage::Solve => {
                solve_stage(config, &mut manifest).map_err(|e| stage_err("solve", e))?
            }
            Stage::Reconstruct => {
                reconstruct_stage(config, &mut manifest).map_err(|e| stage_err("reconstruct", e))?
            }
            Stage::Report => {
                report_stage(config, &mut manifest).map_err(|e| stage_err("report", e))?
            }
        }
    }
    let listing = manifest.files.join("\n") + "\n";
    std::fs::write(config.output_dir.join("manifest.txt"), listing)?;
    manifest.push("manifest.txt");
    Ok(manifest)
}

fn generator_name(kind: GeneratorKind) -> &'static str {
    match kind {
        GeneratorKind::Smooth => "smooth",
        GeneratorKind::Voronoi => "voronoi",
        GeneratorKind::Inclusion => "inclusion",
    }
}

fn generate_maps(config: &RunConfig) -> Result<ModulusMaps> {
    let grid = Grid::cube(config.dimension, config.grid);
    if config.contrast == 0.0 {
        return Ok(ModulusMaps {
            kappa: ScalarField::uniform(grid, 1.0),
            mu: ScalarField::uniform(grid, 1.0),
            contrast: 0.0,
            seed: config.seed,
        });
    }
    match config.generator {
        GeneratorKind::Smooth => gen_smooth_aniso(
            grid,
            config.contrast,
            config.seed,
            (config.corr_x, config.corr_y),
        ),
        GeneratorKind::Voronoi => {
            // Wrap distances only when the solve will be periodic.
            let wrap = config.solver == SolverKind::Spectral;
            gen_voronoi(grid, config.cells, config.contrast, config.seed, wrap)
        }
        GeneratorKind::Inclusion => {
            let center = vec![0.5; config.dimension.size()];
            let c = config.contrast;
            gen_inclusion(grid, config.radius, &center, (1.0, 1.0), (1.0 + c, 1.0 + c))
        }
    }
}

fn generate_stage(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let maps = generate_maps(config)?;
    for (name, field, nominal) in [
        ("kappa_ref", &maps.kappa, config.kappa0),
        ("mu_ref", &maps.mu, config.mu0),
    ] {
        let mut scaled = field.clone();
        for v in scaled.values_mut() {
            *v *= nominal;
        }
        let metadata = vec![
            ("kind".to_string(), name.to_string()),
            (
                "generator".to_string(),
                generator_name(config.generator).to_string(),
            ),
            ("contrast".to_string(), format!("{}", config.contrast)),
            ("seed".to_string(), format!("{}", config.seed)),
            ("nominal".to_string(), format!("{nominal}")),
        ];
        let file = FieldFile::with_metadata(FieldData::Scalar(scaled), metadata);
        let file_name = format!("{name}.smf");
        write_field(&config.output_dir.join(&file_name), &file)?;
        manifest.push(file_name);
    }
    Ok(())
}

fn read_scalar(dir: &Path, name: &str) -> Result<ScalarField> {
    read_field(&dir.join(name))?.into_scalar()
}

/// Load tags in solve order for a configuration.
fn load_plan(config: &RunConfig) -> Vec<(String, Projector, usize)> {
    let mut plan = Vec::new();
    if matches!(config.loads, LoadSet::Spherical | LoadSet::Both) {
        plan.push(("sph_0".to_string(), Projector::Spherical, 0));
    }
    if matches!(config.loads, LoadSet::Deviatoric | LoadSet::Both) {
        let n_k = make_load_basis(Projector::Deviatoric, config.dimension).len();
        for i in 0..n_k {
            plan.push((format!("dev_{i}"), Projector::Deviatoric, i));
        }
    }
    plan
}

fn load_strain(basis: &LoadBasis, index: usize) -> SymTensor2 {
    basis.strains()[index]
}

fn solve_stage(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let dir = &config.output_dir;
    let kappa = read_scalar(dir, "kappa_ref.smf")?;
    let mu = read_scalar(dir, "mu_ref.smf")?;
    let reference = mean_reference(&kappa, &mu)?;
    let bases = [
        make_load_basis(Projector::Spherical, config.dimension),
        make_load_basis(Projector::Deviatoric, config.dimension),
    ];
    for (tag, projector, index) in load_plan(config) {
        let basis = &bases[if projector == Projector::Spherical {
            0
        } else {
            1
        }];
        let eps_bar = load_strain(basis, index);
        let (strain, iterations, residual) = match config.solver {
            SolverKind::Spectral => {
                let options = SolverOptions {
                    tol: config.tol,
                    max_iter: config.max_iter,
                    reference: Some(reference),
                };
                let (eps, report) = solve_ls(&kappa, &mu, &eps_bar, &options)?;
                let last = report.residual_history.last().copied().unwrap_or(0.0);
                (eps, report.iterations, last)
            }
            SolverKind::Fem => {
                let sol = solve_dirichlet(&kappa, &mu, &eps_bar, config.tol)?;
                (sol.nodal_strain, sol.iterations, sol.residual)
            }
        };
        let metadata = vec![
            ("kind".to_string(), "strain".to_string()),
            ("load".to_string(), tag.clone()),
            (
                "solver".to_string(),
                match config.solver {
                    SolverKind::Spectral => "spectral".to_string(),
                    SolverKind::Fem => "fem".to_string(),
                },
            ),
            ("iterations".to_string(), format!("{iterations}")),
            ("residual".to_string(), format!("{residual}")),
            ("kappa0".to_string(), format!("{}", reference.kappa0())),
            ("mu0".to_string(), format!("{}", reference.mu0())),
        ];
        let file = FieldFile::with_metadata(FieldData::Tensor(strain), metadata);
        let file_name = format!("strain_{tag}.smf");
        write_field(&dir.join(&file_name), &file)?;
        manifest.push(file_name);
    }
    Ok(())
}

fn meta_f64(file: &FieldFile, key: &str) -> Result<f64> {
    file.metadata_value(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Config {
            line: 0,
            message: format!("field file lacks numeric metadata `{key}`"),
        })
}

/// Reads the strain files of one projector family into an experiment set.
fn read_experiment(config: &RunConfig, projector: Projector) -> Result<ExperimentSet> {
    let dir = &config.output_dir;
    let basis = make_load_basis(projector, config.dimension);
    let prefix = match projector {
        Projector::Spherical => "sph",
        Projector::Deviatoric => "dev",
    };
    let mut fields = Vec::new();
    let mut reference = None;
    for i in 0..basis.len() {
        let file = read_field(&dir.join(format!("strain_{prefix}_{i}.smf")))?;
        if reference.is_none() {
            reference = Some(ReferenceMedium::new(
                config.dimension,
                meta_f64(&file, "kappa0")?,
                meta_f64(&file, "mu0")?,
            )?);
        }
        fields.push(file.into_tensor()?);
    }
    ExperimentSet::new(basis, fields, reference.unwrap())
}

fn write_recon(dir: &Path, name: &str, recon: &ReconResult, manifest: &mut Manifest) -> Result<()> {
    let metadata = vec![
        (
            "kind".to_string(),
            match recon.kind {
                ModulusKind::Bulk => "kappa_rec".to_string(),
                ModulusKind::Shear => "mu_rec".to_string(),
            },
        ),
        (
            "method".to_string(),
            format!("{:?}", recon.method).to_lowercase(),
        ),
        (
            "anchoring".to_string(),
            match recon.anchoring {
                Some(a) => format!("{a:?}").to_lowercase(),
                None => "-".to_string(),
            },
        ),
    ];
    let file = FieldFile::with_metadata(FieldData::Scalar(recon.map.clone()), metadata);
    let file_name = format!("{name}.smf");
    write_field(&dir.join(&file_name), &file)?;
    manifest.push(file_name);
    Ok(())
}

/// Normalization constant for error maps; zero contrast reports absolute
/// error instead of dividing by zero.
fn error_scale(config: &RunConfig) -> f64 {
    if config.contrast > 0.0 {
        config.contrast
    } else {
        1.0
    }
}

fn write_error_and_images(
    config: &RunConfig,
    ref_name: &str,
    recon: &ReconResult,
    out_prefix: &str,
    manifest: &mut Manifest,
) -> Result<()> {
    let dir = &config.output_dir;
    let reference = read_scalar(dir, ref_name)?;
    let (err, _) = error_map(&reference, recon, error_scale(config))?;
    let err_name = format!("error_{out_prefix}.smf");
    write_field(
        &dir.join(&err_name),
        &FieldFile::with_metadata(
            FieldData::Scalar(err),
            vec![("kind".to_string(), err_name.clone())],
        ),
    )?;
    manifest.push(err_name);
    if config.dimension.size() == 2 {
        // Reference and reconstruction share one gray scale for comparison.
        let ref_pgm = format!("{out_prefix}_ref.pgm");
        let rec_pgm = format!("{out_prefix}_rec.pgm");
        let (lo, hi) = write_pgm(&reference, &dir.join(&ref_pgm), PgmRange::Auto)?;
        write_pgm(&recon.map, &dir.join(&rec_pgm), PgmRange::Fixed(lo, hi))?;
        manifest.push(format!("{ref_pgm}.scale"));
        manifest.push(ref_pgm);
        manifest.push(format!("{rec_pgm}.scale"));
        manifest.push(rec_pgm);
    }
    Ok(())
}

fn reconstruct_stage(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let dir = &config.output_dir;
    if matches!(config.loads, LoadSet::Spherical | LoadSet::Both) {
        let exp = read_experiment(config, Projector::Spherical)?;
        let recon = match config.solver {
            SolverKind::Spectral => reconstruct_bulk(&exp)?,
            SolverKind::Fem => reconstruct_bounded(&exp, config.anchoring)?,
        };
        write_recon(dir, "kappa_rec", &recon, manifest)?;
        write_error_and_images(config, "kappa_ref.smf", &recon, "kappa", manifest)?;
    }
    if matches!(config.loads, LoadSet::Deviatoric | LoadSet::Both) {
        let exp = read_experiment(config, Projector::Deviatoric)?;
        let recon = match config.solver {
            SolverKind::Spectral => reconstruct_shear(&exp)?,
            SolverKind::Fem => reconstruct_bounded(&exp, config.anchoring)?,
        };
        write_recon(dir, "mu_rec", &recon, manifest)?;
        write_error_and_images(config, "mu_ref.smf", &recon, "mu", manifest)?;
        if config.diagnostics {
            let single = reconstruct_shear_diagnostic(&exp, 0)?;
            write_recon(dir, "mu_rec_single", &single, manifest)?;
            let reference = read_scalar(dir, "mu_ref.smf")?;
            let (err, _) = error_map(&reference, &single, error_scale(config))?;
            let err_name = "error_mu_single.smf".to_string();
            write_field(
                &dir.join(&err_name),
                &FieldFile::with_metadata(
                    FieldData::Scalar(err),
                    vec![("kind".to_string(), err_name.clone())],
                ),
            )?;
            manifest.push(err_name);
        }
    }
    Ok(())
}

fn push_stats(out: &mut String, label: &str, err: &ScalarField) {
    let stats = crate::reconstruct::stats_of_error_field(err);
    let _ = writeln!(out, "{label}.sup = {}", stats.global.sup);
    let _ = writeln!(out, "{label}.median = {}", stats.global.median);
    let _ = writeln!(out, "{label}.interior.sup = {}", stats.interior.sup);
    let _ = writeln!(out, "{label}.interior.median = {}", stats.interior.median);
    let _ = writeln!(out, "{label}.boundary.sup = {}", stats.boundary.sup);
    let _ = writeln!(out, "{label}.boundary.median = {}", stats.boundary.median);
}

fn report_stage(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let dir = &config.output_dir;
    let mut out = String::new();
    let _ = writeln!(out, "dimension = {}", config.dimension.size());
    let _ = writeln!(out, "grid = {}", config.grid);
    let _ = writeln!(out, "contrast = {}", config.contrast);
    let _ = writeln!(out, "seed = {}", config.seed);
    let _ = writeln!(out, "generator = {}", generator_name(config.generator));
    let _ = writeln!(
        out,
        "solver = {}",
        match config.solver {
            SolverKind::Spectral => "spectral",
            SolverKind::Fem => "fem",
        }
    );
    for (tag, _, _) in load_plan(config) {
        let file = read_field(&dir.join(format!("strain_{tag}.smf")))?;
        let _ = writeln!(
            out,
            "solve.{tag}.iterations = {}",
            file.metadata_value("iterations").unwrap_or("?")
        );
        let _ = writeln!(
            out,
            "solve.{tag}.residual = {}",
            file.metadata_value("residual").unwrap_or("?")
        );
    }
    if matches!(config.loads, LoadSet::Spherical | LoadSet::Both) {
        let err = read_scalar(dir, "error_kappa.smf")?;
        push_stats(&mut out, "kappa.error", &err);
    }
    if matches!(config.loads, LoadSet::Deviatoric | LoadSet::Both) {
        let err = read_scalar(dir, "error_mu.smf")?;
        push_stats(&mut out, "mu.error", &err);
        if config.diagnostics {
            let single = read_scalar(dir, "error_mu_single.smf")?;
            push_stats(&mut out, "mu_single.error", &single);
        }
    }
    std::fs::write(dir.join("report.txt"), out)?;
    manifest.push("report.txt");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn base_config(dir: &Path) -> RunConfig {
        RunConfig {
            output_dir: dir.to_path_buf(),
            grid: 16,
            contrast: 0.01,
            cells: 12,
            seed: 3,
            ..RunConfig::default()
        }
    }

    const ALL: [Stage; 4] = [
        Stage::Generate,
        Stage::Solve,
        Stage::Reconstruct,
        Stage::Report,
    ];

    #[test]
    fn full_spectral_run_produces_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = base_config(dir.path());
        let manifest = run_pipeline(&config, &ALL).unwrap();
        for name in [
            "kappa_ref.smf",
            "mu_ref.smf",
            "strain_sph_0.smf",
            "strain_dev_0.smf",
            "strain_dev_1.smf",
            "kappa_rec.smf",
            "mu_rec.smf",
            "mu_rec_single.smf",
            "error_kappa.smf",
            "error_mu.smf",
            "error_mu_single.smf",
            "kappa_ref.pgm",
            "kappa_rec.pgm",
            "report.txt",
            "manifest.txt",
        ] {
            assert!(
                manifest.files.iter().any(|f| f == name),
                "missing {name} in {:?}",
                manifest.files
            );
            assert!(dir.path().join(name).exists(), "{name} not on disk");
        }
        let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report.contains("solve.sph_0.iterations"), "{report}");
        assert!(report.contains("kappa.error.sup"), "{report}");
    }

    #[test]
    fn zero_contrast_reports_zero_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.contrast = 0.0;
        run_pipeline(&config, &ALL).unwrap();
        let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report.contains("kappa.error.sup = 0\n"), "{report}");
        assert!(report.contains("mu.error.sup = 0\n"), "{report}");
        let rec = read_scalar(dir.path(), "kappa_rec.smf").unwrap();
        assert!(rec.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn fem_pipeline_runs_and_reports_boundary_stats() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.solver = SolverKind::Fem;
        config.grid = 12;
        run_pipeline(&config, &ALL).unwrap();
        let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report.contains("kappa.error.interior.median"), "{report}");
        assert!(report.contains("kappa.error.boundary.median"), "{report}");
    }

    #[test]
    fn reruns_are_bit_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut config_a = base_config(dir_a.path());
        config_a.generator = GeneratorKind::Smooth;
        let mut config_b = config_a.clone();
        config_b.output_dir = dir_b.path().to_path_buf();
        let manifest = run_pipeline(&config_a, &ALL).unwrap();
        run_pipeline(&config_b, &ALL).unwrap();
        for name in &manifest.files {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn stage_errors_name_the_stage() {
        let dir = tempfile::tempdir().unwrap();
        let config = base_config(dir.path());
        // Solve without generate: missing input files surface as Io.
        let err = run_pipeline(&config, &[Stage::Solve]).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
