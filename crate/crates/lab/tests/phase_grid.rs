use rwqda_core::arw::ArwParams;
use rwqda_core::classify::Variant;
use rwqda_lab::export::{csv_string, export_results, svg_string, CSV_HEADER};
use rwqda_lab::params::{Axis, KvFile, ParamName};
use rwqda_lab::phase::{run_phase_grid, GridSpec, PhaseResult};
use rwqda_lab::with_threads;

fn spec() -> GridSpec {
    let fixed = ArwParams::new(100, 0.8, 0.3, 0.2, 0.2, 1.2, 0.6).unwrap();
    let a1 = Axis::new(ParamName::Zeta, 0.1, 0.6, 2).unwrap();
    let a2 = Axis::new(ParamName::Theta, 0.1, 0.4, 2).unwrap();
    let mut s = GridSpec::new(
        a1,
        a2,
        fixed,
        vec![Variant::QdaW, Variant::QdaFsPcs],
        vec![100],
    );
    s.reps = 2;
    s.n_test = 50;
    s.seed = 9;
    s
}

#[test]
fn grid_has_one_cell_per_point_classifier_and_dimension() {
    let r = run_phase_grid(&spec()).unwrap();
    assert_eq!(r.cells.len(), 2 * 2 * 2);
    for c in &r.cells {
        assert_eq!(c.reps_ok + c.reps_failed, 2);
        if c.classifier == Variant::QdaW {
            assert_eq!(c.reps_ok, 2, "{:?}", c.first_error);
        }
        if let Some(mr) = c.mr {
            assert!((0.0..=1.0).contains(&mr));
        }
    }
    let pcs_ok: usize = r
        .cells
        .iter()
        .filter(|c| c.classifier == Variant::QdaFsPcs)
        .map(|c| c.reps_ok)
        .sum();
    assert!(pcs_ok > 0);
    let csv = csv_string(&r);
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let a = with_threads(1, || run_phase_grid(&spec()).unwrap());
    let b = with_threads(4, || run_phase_grid(&spec()).unwrap());
    assert_eq!(a, b);
    assert_eq!(csv_string(&a), csv_string(&b));
    assert_eq!(svg_string(&a), svg_string(&b));
}

#[test]
fn classifier_results_do_not_depend_on_the_others() {
    let both = run_phase_grid(&spec()).unwrap();
    let mut s = spec();
    s.classifiers = vec![Variant::QdaFsPcs];
    let alone = run_phase_grid(&s).unwrap();
    let from_both: Vec<_> = both
        .cells
        .iter()
        .filter(|c| c.classifier == Variant::QdaFsPcs)
        .collect();
    assert_eq!(from_both.len(), alone.cells.len());
    for (a, b) in from_both.iter().zip(&alone.cells) {
        assert_eq!(*a, b);
    }
}

#[test]
fn seed_changes_results() {
    let a = run_phase_grid(&spec()).unwrap();
    let mut s = spec();
    s.seed = 10;
    let b = run_phase_grid(&s).unwrap();
    assert_ne!(csv_string(&a), csv_string(&b));
}

#[test]
fn export_writes_identical_bytes_twice() {
    let r = run_phase_grid(&spec()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (c1, s1) = (dir.path().join("a.csv"), dir.path().join("a.svg"));
    let (c2, s2) = (dir.path().join("b.csv"), dir.path().join("b.svg"));
    export_results(&r, &c1, &s1).unwrap();
    export_results(&r, &c2, &s2).unwrap();
    assert_eq!(std::fs::read(&c1).unwrap(), std::fs::read(&c2).unwrap());
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&s2).unwrap());
    let svg = std::fs::read_to_string(&s1).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn empty_result_writes_nothing() {
    let mut r: PhaseResult = run_phase_grid(&spec()).unwrap();
    r.cells.clear();
    let dir = tempfile::tempdir().unwrap();
    let (c, s) = (dir.path().join("e.csv"), dir.path().join("e.svg"));
    assert!(export_results(&r, &c, &s).is_err());
    assert!(!c.exists() && !s.exists());
}

#[test]
fn svg_failure_removes_the_csv() {
    let r = run_phase_grid(&spec()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("ok.csv");
    let s = dir.path().join("missing").join("x.svg");
    assert!(export_results(&r, &c, &s).is_err());
    assert!(!c.exists());
}

#[test]
fn grid_file_drives_the_run() {
    let text = "axis1 = zeta:0.1:0.6:2\naxis2 = theta:0.1:0.4:2\np = 100\ndelta = 0.8\nalpha = 0.2\nbeta = 1.2\ngamma = 0.6\n\
                classifiers = qdaw, qdafs-pcs\nreps = 2\nn_test = 50\nseed = 9\n";
    let kv = KvFile::parse(text, "grid").unwrap();
    let from_file = GridSpec::from_kv(&kv).unwrap();
    assert_eq!(
        run_phase_grid(&from_file).unwrap().cells,
        run_phase_grid(&spec()).unwrap().cells
    );
}
