use std::process::Command;

use pstab::charlab::{self, CellStatus, RepFamily};
use pstab::cli::*;
use pstab::settings::{self, NumericSettings};
use pstab::words::{shipped_automorphisms, Presentation};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn pstab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pstab")).args(args).output().unwrap()
}

#[test]
fn shipped_data_matches_builtins() {
    for (file, p) in [("n3.pres", Presentation::nonorientable(3)), ("f2.pres", Presentation::free(2))] {
        let (q, autos) = parse_presentation(&std::fs::read_to_string(format!("{DATA}/{file}")).unwrap()).unwrap();
        assert_eq!(q, p);
        assert_eq!(autos, shipped_automorphisms(&p));
    }
    let rho = parse_representation(&std::fs::read_to_string(format!("{DATA}/anchor_n3.rep")).unwrap()).unwrap();
    let anchor = charlab::anchor(&RepFamily::nec_anchor());
    for (x, y) in rho.gens.iter().zip(&anchor.gens) {
        assert!(x.psl_distance(y) < 1e-14);
    }
}

#[test]
fn presentation_parse_errors_carry_line_numbers() {
    let err = parse_presentation("gens a b\nrelator a x\n").unwrap_err();
    assert!(matches!(err, pstab::Error::Parse { line: 2, .. }), "{err:?}");
    assert!(parse_presentation("gens a b\nauto f: a -> a b\n").is_err());
    assert!(parse_representation("presentation free2\ngen a 1 0 0 0 0 0 1 0\n").is_err());
}

#[test]
fn csv_shapes() {
    assert_eq!(write_csv(&["x", "y"], &[]).unwrap(), b"x,y\n");
    let one = write_csv(&["x", "y"], &[vec!["1".into(), "a,b".into()]]).unwrap();
    assert_eq!(one, b"x,y\n1,\"a,b\"\n");
    assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
}

#[test]
fn ppm_shapes() {
    let one = write_ppm(&[vec![CellStatus::Certified]]).unwrap();
    assert_eq!(one, b"P3\n1 1\n255\n46 139 87\n");
    let grid = vec![
        vec![CellStatus::Certified, CellStatus::Failed],
        vec![CellStatus::Inconclusive, CellStatus::BuildError],
    ];
    let bytes = write_ppm(&grid).unwrap();
    assert_eq!(bytes, b"P3\n2 2\n255\n46 139 87 200 40 40\n230 180 30 60 60 60\n");
    assert_eq!(parse_ppm(&bytes).unwrap(), grid);
    assert!(write_ppm(&[]).is_err());
    assert!(write_ppm(&[vec![CellStatus::Certified; 4097]]).is_err());
}

#[test]
fn config_defaults_are_the_module_defaults() {
    let c = Config::default();
    assert_eq!(c.numeric(), NumericSettings::default());
    assert_eq!(c.ball_radius, settings::BALL_RADIUS);
    assert_eq!(c.max_word_len, settings::SCAN_MAX_LEN);
    assert_eq!(c.conjugator_depth, settings::CONJUGATOR_DEPTH);
    assert_eq!(c.window, settings::WINDOW);
    assert_eq!(c.plane_params(), pstab::pscert::PlaneCriterionParams::default());
    assert_eq!(c.family(), RepFamily::nec_anchor());
    assert_eq!(Config::parse("# nothing\n\n").unwrap(), c);
    // Every schema key is accepted and nothing else is.
    let mut d = Config::default();
    for (k, _) in CONFIG_SCHEMA {
        let v = match k {
            "family" => "f2",
            "stride" => "auto",
            "csv_out" | "ppm_out" => "out.txt",
            _ => "2",
        };
        d.set(k, v).unwrap();
    }
    assert!(Config::parse("bogus = 1").is_err());
    assert!(Config::parse("cert_gap = x").is_err());
}

#[test]
fn exit_codes() {
    let ok = pstab(&["selftest"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let usage = pstab(&["certify", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("cert_gap"));
    let domain = pstab(&["certify", "--rep", "/nonexistent/file"]);
    assert_eq!(domain.status.code(), Some(1));
    let err = String::from_utf8_lossy(&domain.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: io: "));
}

#[test]
fn certify_from_rep_file() {
    let rep = format!("{DATA}/anchor_n3.rep");
    let out = pstab(&["certify", "--rep", &rep, "--max-len", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CERT_HEADER);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let summary = rows.last().unwrap();
    assert_eq!(&summary[0], "summary");
    assert_eq!(&summary[4], "certified");
    assert_eq!(pstab(&["certify", "--rep", &rep, "--max-len", "5"]).stdout, out.stdout);
}

#[test]
fn scan_writes_csv_and_ppm() {
    let dir = std::env::temp_dir().join(format!("pstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("scan.cfg");
    std::fs::write(&cfg, "max_word_len = 4\ngrid_nx = 4\ngrid_ny = 3\ngrid_re_min = -2.5\ngrid_re_max = 0.5\n").unwrap();
    let (csv_path, ppm_path) = (dir.join("s.csv"), dir.join("s.ppm"));
    let out = pstab(&[
        "--config",
        cfg.to_str().unwrap(),
        "scan",
        "--csv",
        csv_path.to_str().unwrap(),
        "--ppm",
        ppm_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), SCAN_HEADER);
    let verdicts: Vec<CellStatus> = rdr.records().map(|r| CellStatus::from_label(&r.unwrap()[5]).unwrap()).collect();
    assert_eq!(verdicts.len(), 12);
    let raster = parse_ppm(&std::fs::read(&ppm_path).unwrap()).unwrap();
    // Bottom raster row is the first CSV row block (smallest Im).
    assert_eq!(raster[2], verdicts[0..4]);
    std::fs::remove_dir_all(&dir).unwrap();
}
