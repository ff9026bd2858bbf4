use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cp_spectra::angular::DipoleSpec;
use cp_spectra::material::MaterialParams;
use cp_spectra::scenario::{parse_config, SweepKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cp-spectra"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "\
atom.omega_mn_rad_s = 1.544e14
atom.dipole_cm = 5.85e-29
cavity.L_m = 1e-6
cavity.v_m_s = 0
material_plus.eta = 2.71
material_plus.omega_T_rad_s = 1.08e14
material_plus.omega_P_rad_s = 1.296e14
material_plus.gamma_rad_s = 2.16e12
material_minus.eta = 2.71
material_minus.omega_T_rad_s = 1.08e14
material_minus.omega_P_rad_s = 1.296e14
material_minus.gamma_rad_s = 2.16e12
sweep.kind = detuning
sweep.min = -5e12
sweep.max = 5e12
sweep.points = 11
";

#[test]
fn bundled_config_is_the_caesium_sapphire_set() {
    let cfg = parse_config(&fs::read_to_string(configs().join("cs_sapphire.cfg")).unwrap()).unwrap();
    assert_eq!(cfg.omega_mn, 1.544e14);
    assert_eq!(cfg.dipole, DipoleSpec::Isotropic(5.85e-29));
    let m = MaterialParams::sapphire();
    for got in [cfg.material_plus, cfg.material_minus] {
        assert_eq!(got.eta, m.eta);
        assert_eq!(got.omega_t, m.omega_t);
        assert!((got.omega_p - m.omega_p).abs() <= 1e-12 * m.omega_p);
        assert!((got.gamma - m.gamma).abs() <= 1e-12 * m.gamma);
    }
    assert_eq!(cfg.separation, 1e-6);
    assert_eq!(cfg.velocity, 0.0);
    assert_eq!(cfg.sweep.unwrap().kind, SweepKind::Detuning);
}

#[test]
fn every_bundled_config_parses() {
    let mut n = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = fs::read_to_string(&path).unwrap();
            parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let outs: Vec<String> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("run{i}.csv"));
            let o = bin()
                .args(["sweep", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap();
            assert!(o.status.success(), "{}", stderr(&o));
            fs::read_to_string(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let mut lines = outs[0].lines();
    assert_eq!(
        lines.next().unwrap(),
        "detuning_rad_s,omega_rad_s,gamma_per_s,gamma_over_gamma0,shift_res_rad_s,flags"
    );
    assert_eq!(lines.count(), 11);
}

#[test]
fn bad_config_exits_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, SMALL.replace("cavity.L_m = 1e-6", "cavity.L_m = -1") + "atom.colour = blue\n").unwrap();
    let out = dir.path().join("never.csv");
    let o = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3: cavity.L_m"), "{err}");
    assert!(err.contains("line 17: atom.colour: unknown key"), "{err}");
    assert!(!out.exists());

    let o = bin().args(["point", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_without_sweep_block_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("point.cfg");
    let text: String = SMALL.lines().filter(|l| !l.starts_with("sweep.")).map(|l| format!("{l}\n")).collect();
    fs::write(&cfg, text).unwrap();
    let o = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no sweep block"));
}

#[test]
fn point_prints_rates() {
    let o = bin()
        .args(["point", "--config"])
        .arg(configs().join("cs_sapphire.cfg"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["gamma induced", "gamma free space", "enhancement", "resonant shift", "config hash"] {
        assert!(text.contains(key), "{text}");
    }
}

#[test]
fn validate_passes() {
    let o = bin().arg("validate").output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("0 failed"));
    assert!(!text.contains("FAIL "));
}

#[test]
fn usage_errors_are_nonzero() {
    assert_eq!(bin().arg("sweep").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
}
