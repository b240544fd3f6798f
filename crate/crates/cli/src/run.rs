//! Executing a [`RunConfig`].

use std::path::PathBuf;
use std::time::Instant;

use casimir_core::corrugation::{
    energy_curvature, lateral_force_from_kernel, pfa_energy_from_curvature, pfa_lateral_force_from_curvature,
    response_kernel, rho_curve, CorrugationSpec, ANCHOR_KAPPA_L,
};
use casimir_core::{casimir_ideal, Geometry, Lifshitz, MirrorPair, CODATA};

use crate::config::{emit, Command, RunConfig};
use crate::output::{emit_plot_data, manifest_hash, sibling, write_atomic, Manifest, Table, Timing};
use crate::CliError;

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub plot: Option<PathBuf>,
    pub rows: usize,
    /// Every row met its tolerance. Results are written either way.
    pub converged: bool,
    pub manifest_hash: String,
}

/// Computed table, plus the columns to emit as plot data, if any.
struct Computed {
    table: Table,
    plot: Option<&'static [&'static str]>,
    converged: bool,
}

fn pair(config: &RunConfig, separation: f64) -> Result<MirrorPair, CliError> {
    let geometry = Geometry::new(separation, config.area, config.temperature)?;
    Ok(MirrorPair::new(config.mirror1.build()?, config.mirror2.build()?, geometry))
}

fn separation(config: &RunConfig) -> Result<f64, CliError> {
    config
        .separation
        .ok_or_else(|| CliError::Invalid("geometry.separation_L is required".into()))
}

fn corrugation(config: &RunConfig) -> Result<(CorrugationSpec, crate::config::Corrugation), CliError> {
    let c = config
        .corrugation
        .ok_or_else(|| CliError::Invalid("corrugation.kappa_C is required".into()))?;
    Ok((CorrugationSpec::new(c.a1, c.a2, c.kappa_c, c.b)?, c))
}

/// Mismatch values: the configured `b`, or `sweep.b_points` nodes over one
/// period starting at zero.
fn mismatches(config: &RunConfig, corr: &CorrugationSpec) -> Vec<f64> {
    match config.b_points {
        Some(n) => (0..n).map(|i| corr.wavelength() * i as f64 / n as f64).collect(),
        None => vec![corr.b],
    }
}

fn perturbative(corr: &CorrugationSpec, pair: &MirrorPair) -> bool {
    let ok = corr.is_perturbative(pair);
    if !ok {
        log::warn!("corrugation amplitudes are not small against min(lambda_C, lambda_P, L); results are outside the perturbative regime");
    }
    ok
}

fn compute(config: &RunConfig) -> Result<Computed, CliError> {
    let spec = config.quadrature;
    match config.command {
        Command::Ideal => {
            let g = Geometry::new(separation(config)?, config.area, 0.0)?;
            let ideal = casimir_ideal(&g, &CODATA);
            let mut t = Table::new(&["L_m", "A_m2", "E_Cas_J", "F_Cas_N", "P_Cas_Pa"]);
            t.push(vec![g.separation().into(), g.area().into(), ideal.energy.into(), ideal.force.into(), ideal.pressure.into()]);
            Ok(Computed { table: t, plot: None, converged: true })
        }
        Command::Lifshitz => {
            let p = pair(config, separation(config)?)?;
            let engine = Lifshitz::new(spec);
            let e = engine.free_energy(&p)?;
            let f = engine.force(&p)?;
            let mut t = Table::new(&[
                "L_m", "T_K", "E_J", "E_err_J", "F_N", "F_err_N", "P_Pa", "eta_F", "converged",
            ]);
            let converged = e.numerics.converged && f.numerics.converged;
            t.push(vec![
                p.geometry.separation().into(),
                p.geometry.temperature().into(),
                e.energy.into(),
                e.error_estimate.into(),
                f.force.into(),
                f.error_estimate.into(),
                f.pressure.into(),
                f.ratio_to_casimir.into(),
                converged.into(),
            ]);
            Ok(Computed { table: t, plot: None, converged })
        }
        Command::EtaSweep => {
            let grid = config
                .separation_grid
                .ok_or_else(|| CliError::Invalid("sweep.L_min is required".into()))?
                .nodes();
            let p = pair(config, grid[0])?;
            let points = Lifshitz::new(spec).eta_curve(&p, &grid)?;
            let mut t = Table::new(&["L_m", "eta_F", "eta_F_err", "converged"]);
            for e in &points {
                t.push(vec![e.separation.into(), e.eta.into(), e.eta_error.into(), e.converged.into()]);
            }
            let converged = points.iter().all(|e| e.converged);
            Ok(Computed { table: t, plot: Some(&["L_m", "eta_F"]), converged })
        }
        Command::LateralPfa => {
            let p = pair(config, separation(config)?)?;
            let (corr, _) = corrugation(config)?;
            let ok = perturbative(&corr, &p);
            let curv = energy_curvature(&p, &spec)?;
            let mut t = Table::new(&[
                "b_m", "dE_PFA_J", "dE_PFA_err_J", "F_lat_PFA_N", "F_lat_PFA_err_N", "perturbative", "converged",
            ]);
            let converged = !curv.noise_limited;
            for b in mismatches(config, &corr) {
                let c = corr.with_mismatch(b)?;
                let e = pfa_energy_from_curvature(&curv, config.area, &c, ok);
                let f = pfa_lateral_force_from_curvature(&curv, config.area, &c, ok);
                t.push(vec![
                    b.into(),
                    e.value.into(),
                    e.error_estimate.into(),
                    f.value.into(),
                    f.error_estimate.into(),
                    ok.into(),
                    converged.into(),
                ]);
            }
            let plot: Option<&'static [&'static str]> = config.b_points.map(|_| &["b_m", "F_lat_PFA_N"][..]);
            Ok(Computed { table: t, plot, converged })
        }
        Command::Kernel => {
            let l = separation(config)?;
            let p = pair(config, l)?;
            let (corr, c) = corrugation(config)?;
            let ok = perturbative(&corr, &p);
            let op = c.operator.build(c.kappa_c)?;
            let k = response_kernel(&p, c.kappa_c, op.as_ref(), op.as_ref(), &spec)?;
            let converged = k.numerics.converged;
            let mut t = Table::new(&[
                "kappa_C_per_m",
                "kappa_C_L",
                "G_C_J_per_m4",
                "G_C_err_J_per_m4",
                "G_0_J_per_m4",
                "G_0_err_J_per_m4",
                "rho_C",
                "rho_C_err",
                "b_m",
                "F_lat_N",
                "F_lat_err_N",
                "F_lat_PFA_N",
                "perturbative",
                "converged",
            ]);
            for b in mismatches(config, &corr) {
                let cb = corr.with_mismatch(b)?;
                let lat = lateral_force_from_kernel(&k, config.area, &cb, ok);
                t.push(vec![
                    k.kappa_c.into(),
                    (k.kappa_c * l).into(),
                    k.g_c.into(),
                    k.g_c_error.into(),
                    k.g_0.into(),
                    k.g_0_error.into(),
                    k.rho_c.into(),
                    k.rho_c_error.into(),
                    b.into(),
                    lat.force.value.into(),
                    lat.force.error_estimate.into(),
                    lat.pfa(config.area, &cb).value.into(),
                    ok.into(),
                    converged.into(),
                ]);
            }
            let plot: Option<&'static [&'static str]> = config.b_points.map(|_| &["b_m", "F_lat_N", "F_lat_PFA_N"][..]);
            Ok(Computed { table: t, plot, converged })
        }
        Command::RhoSweep => {
            let l = separation(config)?;
            let p = pair(config, l)?;
            let grid = config
                .kappa_grid
                .ok_or_else(|| CliError::Invalid("sweep.kappaL_min is required".into()))?;
            let mut kappas: Vec<f64> = grid.nodes().into_iter().map(|x| x / l).collect();
            // The curve is anchored at the proximity force limit.
            if grid.min > ANCHOR_KAPPA_L {
                kappas.insert(0, ANCHOR_KAPPA_L / l);
            }
            let c = config.corrugation.map(|c| c.operator).unwrap_or_default();
            let curve = rho_curve(&p, &kappas, (c, c), &spec)?;
            let mut t = Table::new(&[
                "kappa_C_per_m",
                "kappa_C_L",
                "rho_C",
                "rho_C_err",
                "G_C_J_per_m4",
                "G_C_err_J_per_m4",
                "G_0_J_per_m4",
                "converged",
            ]);
            for k in &curve {
                t.push(vec![
                    k.kappa_c.into(),
                    (k.kappa_c * l).into(),
                    k.rho_c.into(),
                    k.rho_c_error.into(),
                    k.g_c.into(),
                    k.g_c_error.into(),
                    k.g_0.into(),
                    k.numerics.converged.into(),
                ]);
            }
            let converged = curve.iter().all(|k| k.numerics.converged);
            Ok(Computed { table: t, plot: Some(&["kappa_C_per_m", "rho_C", "rho_C_err"]), converged })
        }
        Command::Ingest => {
            let ingest = config
                .ingest
                .as_ref()
                .ok_or_else(|| CliError::Invalid("ingest.input is required".into()))?;
            let table = casimir_core::materials::load_optical_table(&ingest.input, Some(ingest.format))?;
            let mut t = Table::new(&["xi_rad_per_s", "epsilon"]);
            for (&xi, &e) in table.grid().iter().zip(table.values()) {
                t.push(vec![xi.into(), e.into()]);
            }
            Ok(Computed { table: t, plot: None, converged: true })
        }
    }
}

/// Run the configuration, writing the result CSV, optional plot data and
/// the manifest next to `config.output`.
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let text = emit(config);
    let hash = manifest_hash(&text);
    let dir = match config.output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => std::path::Path::new("."),
    };
    if !dir.is_dir() {
        let source = std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist");
        return Err(CliError::Io { path: config.output.clone(), source });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Invalid(format!("run.threads: {e}")))?;
    log::info!("running {} on {} threads", config.command, pool.current_num_threads());
    let computed = pool.install(|| compute(config))?;
    if computed.table.is_empty() {
        return Err(CliError::EmptyTable);
    }

    let comments = vec![
        format!("manifest_hash: {hash}"),
        format!("casimir-cli {} command {}", env!("CARGO_PKG_VERSION"), config.command),
        format!("converged: {}", computed.converged),
    ];
    write_atomic(&config.output, &computed.table.to_csv(&comments)?)?;
    let mut outputs = vec![config.output.clone()];

    let plot = match computed.plot {
        Some(columns) => {
            let path = sibling(&config.output, "plot.csv");
            emit_plot_data(&computed.table.select(columns)?, &path)?;
            outputs.push(path.clone());
            Some(path)
        }
        None => None,
    };

    let manifest_path = sibling(&config.output, "manifest.json");
    let rows = computed.table.rows.len();
    let manifest = Manifest {
        manifest_hash: hash.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.command.to_string(),
        config: text,
        constants: CODATA,
        converged: computed.converged,
        results: computed.table,
        outputs,
        timing: Timing { wall_clock_s: start.elapsed().as_secs_f64() },
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Invalid(format!("manifest encoding: {e}")))?;
    write_atomic(&manifest_path, &json)?;

    Ok(RunReport { csv: config.output.clone(), manifest: manifest_path, plot, rows, converged: computed.converged, manifest_hash: hash })
}

