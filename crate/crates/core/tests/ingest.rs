use chrono::NaiveDate;
use qstab::ingest::{align_all, epoch_slice, fit_epoch_model, load_csv, synth_generate};
use qstab::presets::{january_2022_like, SigmaPreset};
use qstab::{Error, FamilyAssignment, MetricId};

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 1, 1).unwrap()
}

#[test]
fn synthetic_file_round_trips_exactly() {
    let truth = january_2022_like::<f64>(SigmaPreset::WashingtonLike);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    synth_generate(&truth, 38, 3, start(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("date,metric_id,value\n2022-01-01,x0,"));
    assert_eq!(text.lines().count(), 1 + 38 * 16);

    let series = load_csv(&path).unwrap();
    let all = align_all(&series, "all").unwrap();
    let samples = truth.sample(38, 3);
    for (day, x) in samples.iter().enumerate() {
        for id in MetricId::all() {
            assert_eq!(all.columns[id.index()][day], x[id.index()]);
        }
    }
    let jan = epoch_slice(&series, "2022-01").unwrap();
    assert_eq!(jan.days(), 31);
    assert!(matches!(epoch_slice(&series, "2022-02"), Err(Error::InsufficientData { .. })));

    // same seed, same bytes
    let again = dir.path().join("again.csv");
    synth_generate(&truth, 38, 3, start(), &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn fitted_epoch_model_is_close_to_truth() {
    let truth = january_2022_like::<f64>(SigmaPreset::WashingtonLike);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    synth_generate(&truth, 400, 8, start(), &path).unwrap();
    let data = align_all(&load_csv(&path).unwrap(), "2022-01").unwrap();
    let fit = fit_epoch_model(&data, &FamilyAssignment::default()).unwrap();
    assert_eq!(fit.epoch_label(), "2022-01");
    for (a, b) in fit.marginals().iter().zip(truth.marginals()) {
        assert_eq!(a.family(), b.family());
        let sd = b.variance().sqrt();
        assert!((a.mean() - b.mean()).abs() < 0.25 * sd, "{a:?} vs {b:?}");
    }
}

#[test]
fn small_synthetic_requests_fail() {
    let truth = january_2022_like::<f64>(SigmaPreset::Identity);
    let dir = tempfile::tempdir().unwrap();
    assert!(synth_generate(&truth, 5, 1, start(), dir.path().join("x.csv")).is_err());
    assert!(matches!(load_csv(dir.path().join("missing.csv")), Err(Error::Io(_))));
}
