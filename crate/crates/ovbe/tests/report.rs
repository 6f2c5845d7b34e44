use ovbe::config::{Format, Settings};
use ovbe::report::{parse_compute_report, ComputeReport, Document, SCHEMA};
use proptest::prelude::*;
use vbe_core::lab::gen_consensus_collapse_pair;
use vbe_core::model::WindowSpec;
use vbe_core::pipeline::{baselines, window_series, PipelineConfig};

fn report(seed: u64, window: usize, stride: usize) -> ComputeReport {
    let (a, _) = gen_consensus_collapse_pair(seed, 20, 12, 0.5).unwrap();
    let pipeline = PipelineConfig { window: WindowSpec::new(window, stride, true).unwrap(), ..PipelineConfig::default() };
    let series = window_series(&a.votes, &a.balances, &a.proposals, &pipeline).unwrap();
    let base = baselines(&a.balances, &pipeline.measures).unwrap();
    let settings = Settings { window, stride: Some(stride), ..Settings::default() };
    ComputeReport::new(settings, series, Some(base), vec!["note".into()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn json_round_trips(seed in 0u64..1000, window in 1usize..8, stride in 1usize..8) {
        let r = report(seed, window, stride);
        let bytes = r.json();
        let back = parse_compute_report(&bytes).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(back.json(), bytes);
    }

    #[test]
    fn csv_has_header_plus_one_row_per_window(seed in 0u64..1000, window in 1usize..8) {
        let r = report(seed, window, window);
        let text = String::from_utf8(r.encode(Format::Csv).unwrap()).unwrap();
        prop_assert_eq!(text.lines().count(), r.windows.len() + 1);
        let columns = 3 + r.windows[0].values.len() + 2;
        prop_assert!(text.lines().all(|l| l.split(',').count() == columns));
    }
}

#[test]
fn empty_series_is_still_a_valid_document() {
    // a window longer than the dataset yields no full window
    let r = report(3, 50, 50);
    assert!(r.windows.is_empty());
    assert_eq!(r.schema, SCHEMA);
    let back = parse_compute_report(&r.json()).unwrap();
    assert_eq!(back, r);
    let text = String::from_utf8(r.csv().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains("min_entropy"));
}

#[test]
fn warnings_from_the_series_are_kept() {
    let r = report(1, 4, 4);
    assert_eq!(r.warnings.first().map(String::as_str), Some("note"));
    assert_eq!(r.series().results, r.windows);
}
