use std::path::Path;
use std::process::{Command, Output};

use matwave::config::ExperimentConfig;
use matwave::field::GridField;
use matwave::harness::plain_convolution;

fn matwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matwave")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "[dimensions]\nn = 2\nm = 1\nk = 1\nalpha = 0.5\n\n[grid]\npoints = 32\nextent = 8\n\n[sampling]\nsamples = 5000\nframes = 500\n";

#[test]
fn constants_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = matwave(&["constants", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("sigma_{2,1}          6.283185307179586"), "{text}");
    for name in ["Gamma_1(0.5)", "c_{2,1,1}", "c_nu", "d_w(0.5)", "c_w", "c_{u,v}"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn config_errors_name_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[dimensions]\nn = 2\nm = x\n", "line 3", "dimensions.m"),
        ("[dimensions]\nn = 3\nm = 1\nk = 3\n", "line 4", "dimensions.k"),
        ("[dimensions]\nn = 2\nbogus = 1\n", "line 3", "dimensions.bogus"),
    ];
    for (text, line, key) in cases {
        let cfg = write_config(dir.path(), text);
        let o = matwave(&["verify", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        let err = stderr(&o);
        assert!(err.contains(line) && err.contains(key), "{err}");
    }
}

#[test]
fn unknown_names_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().to_str().unwrap();
    let o = matwave(&["verify", "--config", &cfg, "--suite", "nope", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown verification suite `nope`"));
    assert_eq!(matwave(&["transform", "--config", &cfg, "--method", "nope", "--out", out]).status.code(), Some(2));
    assert_eq!(matwave(&["invert", "--config", &cfg, "--method", "nope", "--out", out]).status.code(), Some(2));
    assert_eq!(matwave(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_writes_csv_and_fails_on_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(dir.path(), SMALL);
    let o = matwave(&["verify", "--config", &cfg, "--suite", "projection_slice", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = std::fs::read_to_string(out.join("verify_projection_slice.csv")).unwrap();
    assert!(csv.starts_with("suite,assertion,value,reference,tolerance,pass\n"));
    assert_eq!(csv, stdout(&o));

    // zero tolerance turns the same run into exit code 1
    let strict = write_config(dir.path(), &format!("{SMALL}\n[tolerances]\nprojection_slice = 0\nprojection_slice_grid = 0\n"));
    let o = matwave(&["verify", "--config", &strict, "--suite", "projection_slice", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",false"));

    let negative = write_config(dir.path(), &format!("{SMALL}\n[tolerances]\nprojection_slice = -1\n"));
    let o = matwave(&["verify", "--config", &negative, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tolerances.projection_slice"));
}

#[test]
fn riesz_order_zero_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), &SMALL.replace("alpha = 0.5", "alpha = 0"));
    let o = matwave(&["transform", "--config", &cfg_path, "--method", "riesz", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = ExperimentConfig::load(Path::new(&cfg_path)).unwrap();
    let input = cfg.phantom_field().unwrap().to_grid(cfg.grid().unwrap()).unwrap();
    assert_eq!(std::fs::read(dir.path().join("riesz.bin")).unwrap(), input.to_bytes());
}

#[test]
fn wavelet_at_unit_scale_is_plain_convolution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), &format!("{SMALL}\n[transform]\nscale = 1\n"));
    let o = matwave(&["transform", "--config", &cfg_path, "--method", "wavelet", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = ExperimentConfig::load(Path::new(&cfg_path)).unwrap();
    let written = GridField::read_binary(&dir.path().join("wavelet.bin")).unwrap();
    assert_eq!(written.to_bytes(), plain_convolution(&cfg).unwrap().to_bytes());
}

#[test]
fn radon_of_a_gaussian_matches_its_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[phantom]\nkind = gaussian\nwidth = 0.8\n"));
    let o = matwave(&["transform", "--config", &cfg, "--method", "radon", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("closed_form_max_deviation")).map(str::to_owned).expect("deviation line");
    let dev: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(dev < 1e-10, "{line}");
    let csv = std::fs::read_to_string(dir.path().join("radon.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("closed_form"));
}

#[test]
fn zero_phantom_reconstructs_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[phantom]\nkind = zero\n"));
    let o = matwave(&["invert", "--config", &cfg, "--method", "calderon", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("calderon_report.csv")).unwrap();
    for row in report.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let err: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(err, 0.0, "{row}");
    }
    let rec = GridField::read_binary(&dir.path().join("calderon_reconstruction.bin")).unwrap();
    assert_eq!(rec.max_abs(), 0.0);
}

#[test]
fn captured_band_converges_in_one_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[schedule]\nsteps = 1\nratio = 1e6\n"));
    let o = matwave(&["invert", "--config", &cfg, "--method", "calderon", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("after 1 steps, converged"), "{text}");
}

#[test]
fn wavelet_file_receives_constants() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("band.txt"), "m = 1\ndelta = 0.25\nlambda = 4\nbump_degree = 5\n").unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\n[wavelet]\nfile = band.txt\n"));
    let first = matwave(&["constants", "--config", &cfg]);
    assert!(first.status.success(), "{}", stderr(&first));
    let stored = std::fs::read_to_string(dir.path().join("band.txt")).unwrap();
    assert!(stored.contains("[constants]") && stored.contains("c_nu@2x1 = "), "{stored}");
    // the file stays loadable and a second run leaves it unchanged
    assert!(matwave(&["constants", "--config", &cfg]).status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("band.txt")).unwrap(), stored);
}
