use annuflow::constitutive::ModelKind;
use annuflow::output::{manifest_files, parse_snapshot_csv, write_run, RunManifest, MANIFEST_FILE};
use annuflow::study::{run, StudyConfig};

fn small(kind: ModelKind) -> StudyConfig {
    let mut cfg = StudyConfig::standard(kind, true, &[0.25, 0.5]);
    cfg.n_nodes = 21;
    cfg
}

#[test]
fn snapshot_csv_round_trips_bit_exact() {
    let cfg = small(ModelKind::Model1);
    let out = run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_run(dir.path(), &cfg, &out).unwrap();
    for (entry, snap) in manifest.snapshots.iter().zip(&out.snapshots) {
        let text = std::fs::read_to_string(dir.path().join(&entry.file)).unwrap();
        let cols = parse_snapshot_csv(&text).unwrap();
        for (a, b) in [(&cols.r, &snap.r), (&cols.v, &snap.v), (&cols.w, &snap.w), (&cols.c, &snap.c), (&cols.mu, &snap.mu), (&cols.h, &snap.h)] {
            assert_eq!(a.len(), b.len());
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}

#[test]
fn manifest_lists_existing_files_and_parses_back() {
    let cfg = small(ModelKind::Model2b);
    let out = run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = write_run(dir.path(), &cfg, &out).unwrap();
    for f in manifest_files(dir.path(), &written) {
        assert!(f.is_file(), "{} missing", f.display());
    }
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let back: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back.snapshots, written.snapshots);
    assert_eq!(back.params, written.params);
    assert_eq!(back.status, written.status);
}

#[test]
fn repeated_runs_write_identical_files() {
    let cfg = small(ModelKind::Model2a);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = write_run(a.path(), &cfg, &run(&cfg).unwrap()).unwrap();
    write_run(b.path(), &cfg, &run(&cfg).unwrap()).unwrap();
    for f in manifest_files(a.path(), &ma) {
        let name = f.file_name().unwrap();
        assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn tighter_tolerance_moves_result_less() {
    // The change from rel_tol 1e-6 to 1e-8 must be smaller than from 1e-4 to 1e-6.
    let mid_gap_v = |tol: f64| {
        let mut cfg = StudyConfig::standard(ModelKind::Model1, false, &[1.0]);
        cfg.n_nodes = 41;
        cfg.integrator.rel_tol = tol;
        cfg.integrator.abs_tol = tol * 1e-2;
        let out = run(&cfg).unwrap();
        let s = out.snapshots.last().unwrap();
        s.v[s.v.len() / 2]
    };
    let (a, b, c) = (mid_gap_v(1e-4), mid_gap_v(1e-6), mid_gap_v(1e-8));
    assert!((b - c).abs() < (a - b).abs(), "{a} {b} {c}");
}
