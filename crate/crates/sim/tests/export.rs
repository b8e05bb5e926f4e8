use proptest::prelude::*;
use quadcable::{ControlInput, FullState, ReducedState, Vec3};
use quadcable_sim::export::{header, read, row, width, CsvSink};

fn reduced() -> ReducedState {
    let mut s = ReducedState::hover(Vec3::new(1.0, 2.0, 3.0));
    s.load.v = Vec3::new(0.1, -0.2, 0.3);
    s
}

#[test]
fn header_layout() {
    for elastic in [false, true] {
        let h = header(elastic);
        assert_eq!(h.len(), width(elastic));
        assert_eq!(h[0], "t");
        assert_eq!(&h[1..4], ["xL_x", "xL_y", "xL_z"]);
        assert_eq!(h[7], "RL_11");
        assert_eq!(h[8], "RL_12");
        assert_eq!(h.last().unwrap(), "V");
        assert_eq!(h.iter().any(|c| c == "l1"), elastic);
    }
    assert_eq!(width(false), 1 + 18 + 24 + 72 + 7);
    assert_eq!(width(true), width(false) + 8);
}

#[test]
fn rows_follow_the_header() {
    let s = reduced();
    let u = ControlInput { thrust: [Vec3::new(0.0, 0.0, 9.0); 4], moment: [Vec3::new(0.01, 0.0, 0.0); 4] };
    let r = row(0.5, &s, &u, &Vec3::new(1.0, 2.0, 3.0), &Vec3::zeros(), 7.0);
    let h = header(false);
    assert_eq!(r.len(), h.len());
    let col = |name: &str| r[h.iter().position(|c| c == name).unwrap()];
    assert_eq!(col("t"), 0.5);
    assert_eq!(col("xL_z"), 3.0);
    assert_eq!(col("vL_y"), -0.2);
    assert_eq!(col("RL_22"), 1.0);
    assert_eq!(col("q3_z"), -1.0);
    assert_eq!(col("u4_z"), 9.0);
    assert_eq!(col("M2_x"), 0.01);
    assert_eq!(col("exL_y"), 2.0);
    assert_eq!(col("V"), 7.0);

    let f = FullState::from_reduced(&s, 1.25);
    let r = row(0.0, &f, &u, &Vec3::zeros(), &Vec3::zeros(), 0.0);
    let h = header(true);
    assert_eq!(r.len(), h.len());
    assert_eq!(r[h.iter().position(|c| c == "l2").unwrap()], 1.25);
}

#[test]
fn empty_log_gives_header_only_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    CsvSink::create(&path, false).unwrap().finish().unwrap();
    let (h, rows) = read(&path).unwrap();
    assert_eq!(h, header(false));
    assert!(rows.is_empty());
}

#[test]
fn wrong_row_width_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut sink = CsvSink::create(&dir.path().join("x.csv"), true).unwrap();
    assert!(sink.write(&[0.0; 3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn values_round_trip_exactly(vals in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO, 1..5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        let w = width(false);
        let rows: Vec<Vec<f64>> = vals.iter().map(|v| (0..w).map(|k| v * (k as f64 + 1.0)).collect()).collect();
        let mut sink = CsvSink::create(&path, false).unwrap();
        for r in &rows {
            sink.write(r).unwrap();
        }
        prop_assert_eq!(sink.rows(), rows.len());
        sink.finish().unwrap();
        let (_, back) = read(&path).unwrap();
        prop_assert_eq!(back, rows);
    }
}
