use std::path::{Path, PathBuf};
use std::process::Command as Process;

use casimir_cli::config::{Command, Corrugation, Grid, Ingest, MaterialSpec, Origin, RawConfig, RunConfig};
use casimir_cli::output::{emit_plot_data, Table};
use casimir_cli::{emit, parse, run, CliError, EXIT_CONFIG, EXIT_IO, EXIT_OK};
use casimir_core::corrugation::OperatorKind;
use casimir_core::materials::TableFormat;
use casimir_core::quadrature::SemiInfiniteMap;
use casimir_core::QuadratureSpec;
use proptest::prelude::*;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_casimir"))
}

fn config(command: Command, out: &Path) -> RunConfig {
    let mut text = format!("command = {command}\noutput.path = {}\n", out.display());
    if command != Command::EtaSweep {
        text.push_str("geometry.separation_L = 1e-6\n");
    }
    parse(&text).unwrap()
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn defaults_are_explicit_in_the_emitted_config() {
    let c = parse("command = lifshitz\ngeometry.separation_L = 1e-6\n").unwrap();
    assert_eq!(c.mirror1, MaterialSpec::GoldPlasma);
    assert_eq!(c.mirror2, MaterialSpec::GoldPlasma);
    assert_eq!(c.area, 1e-4);
    assert_eq!(c.quadrature.rel_tol, 1e-8);
    assert_eq!(c.output, PathBuf::from("lifshitz.csv"));
    let text = emit(&c);
    for key in ["mirror2.model", "geometry.area_A", "quadrature.rel_tol", "output.path", "run.threads"] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
    assert_eq!(parse(&text).unwrap(), c);
}

#[test]
fn errors_name_field_and_line() {
    let e = parse("command = lifshitz\n# comment\ngeometry.separation_L = -1e-6\n").unwrap_err();
    assert_eq!(e.field, "geometry.separation_L");
    assert_eq!(e.origin, Origin::Line(3));
    assert!(e.to_string().contains("separation_L"));

    let e = parse("command = ideal\ngeometry.seperation_L = 1e-6\n").unwrap_err();
    assert_eq!((e.field.as_str(), e.origin), ("geometry.seperation_L", Origin::Line(2)));

    let e = parse("command = ideal\ngeometry.separation_L = 1e-6\ngeometry.separation_L = 2e-6\n").unwrap_err();
    assert_eq!(e.origin, Origin::Line(3));

    let e = parse("command = ideal\nmirror1.model = perfect\nmirror1.lambda_P = 1e-7\ngeometry.separation_L = 1e-6\n")
        .unwrap_err();
    assert_eq!(e.field, "mirror1.lambda_P");

    let e = parse("command = kernel\ngeometry.separation_L = 1e-6\ncorrugation.kappa_C = 1e6\ngeometry.temperature_T = 300\n")
        .unwrap_err();
    assert_eq!(e.field, "geometry.temperature_T");

    let e = parse("command = eta-sweep\nsweep.L_min = 1e-6\nsweep.L_max = 1e-7\nsweep.L_points = 3\n").unwrap_err();
    assert_eq!(e.field, "sweep.L_max");

    let e = parse("geometry.separation_L = 1e-6\n").unwrap_err();
    assert_eq!(e.field, "command");

    let e = parse("command = ideal\nnot a pair\n").unwrap_err();
    assert_eq!(e.origin, Origin::Line(2));
}

#[test]
fn overrides_replace_file_values() {
    let mut raw = RawConfig::parse("command = lifshitz\ngeometry.separation_L = 1e-6\nmirror1.model = plasma\nmirror1.lambda_P = 1e-7\n")
        .unwrap();
    raw.set("geometry.separation_L", "2e-6").unwrap();
    raw.set_material("mirror1", "perfect").unwrap();
    let c = raw.resolve().unwrap();
    assert_eq!(c.separation, Some(2e-6));
    assert_eq!(c.mirror1, MaterialSpec::Perfect);
    assert_eq!(c.mirror2, MaterialSpec::Perfect);

    raw.set("geometry.separation_L", "-1").unwrap();
    let e = raw.resolve().unwrap_err();
    assert_eq!((e.field.as_str(), e.origin), ("geometry.separation_L", Origin::Override));
    assert!(raw.set("nonsense", "1").is_err());
}

fn positive() -> impl Strategy<Value = f64> {
    (1e-12f64..1e3).prop_map(|x| x * 1.000_000_1)
}

fn material() -> impl Strategy<Value = MaterialSpec> {
    prop_oneof![
        Just(MaterialSpec::GoldPlasma),
        Just(MaterialSpec::Perfect),
        positive().prop_map(|lambda_p| MaterialSpec::Plasma { lambda_p }),
        ("[a-z][a-z0-9_/.]{0,12}", any::<bool>()).prop_map(|(p, b)| MaterialSpec::Table {
            path: PathBuf::from(p),
            format: if b { TableFormat::EpsilonImagAxis } else { TableFormat::NAndKRealAxis },
        }),
    ]
}

fn grid() -> impl Strategy<Value = Grid> {
    (positive(), 1.0f64..1e3, 1usize..200).prop_map(|(min, f, points)| Grid { min, max: min * (1.0 + f), points })
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    let geometry = (prop::option::of(positive()), positive(), 0.0f64..400.0);
    let corrugation = prop::option::of((0.0f64..1e-8, 0.0f64..1e-8, positive(), -1e-6f64..1e-6, any::<bool>()).prop_map(
        |(a1, a2, kappa_c, b, r)| Corrugation {
            a1,
            a2,
            kappa_c,
            b,
            operator: if r { OperatorKind::Rayleigh } else { OperatorKind::SpecularLimit },
        },
    ));
    let quadrature = (1e-13f64..1e-3, 0.0f64..1e-20, 8usize..100_000);
    let sweeps = (prop::option::of(grid()), prop::option::of(grid()), prop::option::of(1usize..64));
    let rest = (prop::option::of(("[a-z][a-z0-9_]{0,8}\\.txt", any::<bool>())), "[a-z][a-z0-9_]{0,8}\\.csv", 0usize..64);
    (0usize..7, material(), material(), geometry, corrugation, quadrature, sweeps, rest)
        .prop_map(|(ci, mirror1, mirror2, (separation, area, temperature), corrugation, (rel, abs, sub), (lg, kg, bp), (ingest, out, threads))| {
            let command = Command::ALL[ci];
            let zero_t = matches!(command, Command::Kernel | Command::RhoSweep);
            RunConfig {
                command,
                mirror1,
                mirror2,
                separation: if command == Command::EtaSweep || command == Command::Ingest { separation } else { Some(separation.unwrap_or(1e-6)) },
                area,
                temperature: if zero_t { 0.0 } else { temperature },
                corrugation: if matches!(command, Command::LateralPfa | Command::Kernel) {
                    Some(corrugation.unwrap_or(Corrugation { a1: 1e-9, a2: 1e-9, kappa_c: 1e6, b: 0.0, operator: OperatorKind::Rayleigh }))
                } else {
                    corrugation
                },
                quadrature: QuadratureSpec::new(rel, abs, sub, SemiInfiniteMap::default()).unwrap(),
                separation_grid: if command == Command::EtaSweep { Some(lg.unwrap_or(Grid { min: 1e-8, max: 1e-6, points: 3 })) } else { lg },
                kappa_grid: if command == Command::RhoSweep { Some(kg.unwrap_or(Grid { min: 1e-2, max: 1.0, points: 3 })) } else { kg },
                b_points: bp,
                ingest: match (command, ingest) {
                    (_, Some((p, b))) => Some(Ingest { input: PathBuf::from(p), format: if b { TableFormat::EpsilonImagAxis } else { TableFormat::NAndKRealAxis } }),
                    (Command::Ingest, None) => Some(Ingest { input: PathBuf::from("in.txt"), format: TableFormat::EpsilonImagAxis }),
                    _ => None,
                },
                output: PathBuf::from(out),
                threads,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_emit(c in run_config()) {
        let text = emit(&c);
        prop_assert_eq!(parse(&text).unwrap(), c.clone());
        prop_assert_eq!(emit(&parse(&text).unwrap()), text);
    }
}

#[test]
fn ideal_run_writes_closed_form_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ideal.csv");
    let report = run(&config(Command::Ideal, &out)).unwrap();
    assert!(report.converged);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(&format!("# manifest_hash: {}\n", report.manifest_hash)));
    let rows = data_rows(&out);
    assert_eq!(rows[0], "L_m,A_m2,E_Cas_J,F_Cas_N,P_Cas_Pa");
    let values: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
    // hbar c pi^2 / (240 L^4) at 1 um, independently evaluated.
    assert!((values[4] / 1.300_125_772_447_753_4e-3 - 1.0).abs() < 1e-14);
    assert!((values[2] / (-values[3] * 1e-6 / 3.0) - 1.0).abs() < 1e-14);

    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report.manifest).unwrap()).unwrap();
    assert_eq!(manifest["manifest_hash"], report.manifest_hash.as_str());
    assert_eq!(manifest["constants"]["c"], 299_792_458.0);
    assert!(manifest["timing"]["wall_clock_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(parse(manifest["config"].as_str().unwrap()).unwrap(), config(Command::Ideal, &out));
    assert!(report.plot.is_none());
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    let mut c = config(Command::Lifshitz, &out);
    c.quadrature.rel_tol = 1e-7;
    c.temperature = 300.0;
    run(&c).unwrap();
    let first = std::fs::read(&out).unwrap();
    run(&c).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), first);
    let rows = data_rows(&out);
    assert_eq!(rows[0], "L_m,T_K,E_J,E_err_J,F_N,F_err_N,P_Pa,eta_F,converged");
    assert!(rows[1].ends_with(",true"));
}

#[test]
fn eta_sweep_emits_plot_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eta.csv");
    let c = parse(&format!(
        "command = eta-sweep\nmirror1.model = gold-plasma\nsweep.L_min = 1e-8\nsweep.L_max = 1e-6\nsweep.L_points = 5\nquadrature.rel_tol = 1e-6\noutput.path = {}\n",
        out.display()
    ))
    .unwrap();
    let report = run(&c).unwrap();
    let plot = data_rows(report.plot.as_ref().unwrap());
    assert_eq!(plot[0], "L_m,eta_F");
    assert_eq!(plot.len(), 6);
    let eta: Vec<f64> = plot[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(eta.windows(2).all(|w| w[1] > w[0]) && eta.iter().all(|&e| e > 0.0 && e < 1.0));
}

#[test]
fn plot_data_refuses_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.csv");
    let table = Table::new(&["kappa_C_per_m", "rho_C", "rho_C_err"]);
    let err = emit_plot_data(&table, &path).unwrap_err();
    assert!(matches!(err, CliError::EmptyTable));
    assert!(!path.exists());
}

#[test]
fn ingest_copies_table_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("eps.txt");
    std::fs::write(&input, "#format: A\n1e12 9\n1e13 4\n1e14 1.5\n").unwrap();
    let out = dir.path().join("eps.csv");
    let c = parse(&format!("command = ingest\ningest.input = {}\ningest.format = A\noutput.path = {}\n", input.display(), out.display()))
        .unwrap();
    run(&c).unwrap();
    assert_eq!(data_rows(&out), vec!["xi_rad_per_s,epsilon", "1e12,9e0", "1e13,4e0", "1e14,1.5e0"]);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin()
        .args(["ideal", "--L", "1e-6", "--A", "1e-4", "--out"])
        .arg(dir.path().join("i.csv"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK as i32), "{}", String::from_utf8_lossy(&ok.stderr));

    let bad = bin().args(["ideal", "--L", "-1e-6"]).current_dir(dir.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG as i32));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("separation_L"));

    let missing = bin()
        .args(["ingest", "--input", "does-not-exist.txt", "--format", "A"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(EXIT_IO as i32));

    let no_dir = bin().args(["ideal", "--L", "1e-6", "--out", "no/such/dir/x.csv"]).current_dir(dir.path()).output().unwrap();
    assert_eq!(no_dir.status.code(), Some(EXIT_IO as i32));
}

#[test]
fn manifest_reproduces_its_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pfa.csv");
    let status = bin()
        .args(["lateral-pfa", "--L", "2e-7", "--a1", "2e-9", "--a2", "3e-9", "--kappa-C", "5e6", "--points", "4", "--tol", "1e-6", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let first = std::fs::read(&out).unwrap();
    let manifest = dir.path().join("pfa.manifest.json");
    let copy = dir.path().join("saved.json");
    std::fs::copy(&manifest, &copy).unwrap();
    std::fs::remove_file(&out).unwrap();
    let status = bin().arg("lateral-pfa").arg("--config").arg(&copy).output().unwrap();
    assert!(status.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
    let plot = data_rows(&dir.path().join("pfa.plot.csv"));
    assert_eq!(plot[0], "b_m,F_lat_PFA_N");
    assert_eq!(plot.len(), 5);
}
