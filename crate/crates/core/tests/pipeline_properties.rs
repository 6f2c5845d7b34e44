use proptest::prelude::*;
use vbe_core::model::{Choice, Election, TokenMap, VoteRecord, WindowSpec};
use vbe_core::pipeline::{aggregate, window_series, PipelineConfig};

/// (elections, balances, votes as (election, voter, choice code))
type Raw = (usize, Vec<f64>, Vec<(usize, usize, u8)>);

fn raw() -> impl Strategy<Value = Raw> {
    (1usize..30, 1usize..20).prop_flat_map(|(m, n)| {
        (
            Just(m),
            prop::collection::vec(0.0f64..100.0, n).prop_filter("positive", |v| v.iter().sum::<f64>() > 0.0),
            prop::collection::vec((0..m, 0..n + 3, 0u8..3), 0..120),
        )
    })
}

fn build(raw: &Raw) -> (Vec<Election>, TokenMap, Vec<VoteRecord>) {
    let (m, balances, votes) = raw;
    // ordinals deliberately out of list order
    let elections: Vec<Election> = (0..*m).map(|j| Election::binary(format!("p{j}"), ((j * 7) % m) as i64 * 10 + j as i64)).collect();
    let tokens = TokenMap::from_pairs::<_, vbe_core::model::AccountId>(balances.iter().enumerate().map(|(i, b)| (format!("a{i:02}").as_str().into(), *b))).unwrap();
    let records = votes
        .iter()
        .map(|(e, v, c)| {
            let choice = [Choice::For, Choice::Against, Choice::Abstain][*c as usize].clone();
            VoteRecord::new(format!("p{e}"), format!("a{v:02}").as_str(), choice)
        })
        .collect();
    (elections, tokens, records)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn windows_tile_the_ordered_elections(raw in raw(), length in 1usize..8) {
        let (elections, tokens, records) = build(&raw);
        let config = PipelineConfig { window: WindowSpec::new(length, length, true).unwrap(), ..PipelineConfig::default() };
        let series = window_series(&records, &tokens, &elections, &config).unwrap();
        let mut ordered = elections.clone();
        ordered.sort_by_key(|e| e.ordinal);
        prop_assert_eq!(series.results.len(), elections.len() / length);
        let mut seen = std::collections::BTreeSet::new();
        for (i, w) in series.results.iter().enumerate() {
            let expected: Vec<String> = ordered[i * length..(i + 1) * length].iter().map(|e| e.id.clone()).collect();
            prop_assert_eq!(&w.election_ids, &expected);
            prop_assert_eq!(w.first_ordinal, ordered[i * length].ordinal);
            for id in &w.election_ids {
                prop_assert!(seen.insert(id.clone()));
            }
        }
    }

    #[test]
    fn window_values_are_sane(raw in raw(), length in 1usize..6, stride in 1usize..6) {
        let (elections, tokens, records) = build(&raw);
        let config = PipelineConfig { window: WindowSpec::new(length, stride, false).unwrap(), ..PipelineConfig::default() };
        let series = window_series(&records, &tokens, &elections, &config).unwrap();
        for w in &series.results {
            prop_assert!((0.0..=1.0).contains(&w.participation));
            prop_assert!(w.values.iter().all(|v| v.value >= 0.0 && v.value.is_finite()));
            if w.degenerate {
                prop_assert!(w.values.iter().all(|v| v.value == 0.0));
            }
        }
    }

    #[test]
    fn aggregates_recompute_from_windows(raw in raw(), length in 1usize..6) {
        let (elections, tokens, records) = build(&raw);
        let config = PipelineConfig { window: WindowSpec::new(length, 1, true).unwrap(), ..PipelineConfig::default() };
        let series = window_series(&records, &tokens, &elections, &config).unwrap();
        if series.is_empty() {
            prop_assert!(aggregate(&series.results).is_err());
            return Ok(());
        }
        for label in config.measure_labels() {
            let xs: Vec<f64> = series.results.iter().map(|w| w.value(&label).unwrap()).collect();
            let n = xs.len() as f64;
            let avg = xs.iter().sum::<f64>() / n;
            let std = (xs.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() / n).sqrt();
            let agg = series.aggregate_for(&label).unwrap();
            prop_assert!((agg.avg - avg).abs() < 1e-9);
            prop_assert!((agg.std - std).abs() < 1e-9);
            prop_assert_eq!(agg.current, *xs.last().unwrap());
            prop_assert_eq!(agg.min, xs.iter().copied().fold(f64::INFINITY, f64::min));
            prop_assert_eq!(agg.max, xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
    }

    #[test]
    fn dropping_inactive_accounts_never_lowers_participation(raw in raw(), length in 1usize..6) {
        let (elections, tokens, records) = build(&raw);
        prop_assume!(!records.is_empty());
        let window = WindowSpec::new(length, length, true).unwrap();
        let all = window_series(&records, &tokens, &elections, &PipelineConfig { window, ..PipelineConfig::default() }).unwrap();
        let voters = window_series(&records, &tokens, &elections, &PipelineConfig { window, include_inactive: false, ..PipelineConfig::default() }).unwrap();
        for (a, b) in all.results.iter().zip(&voters.results) {
            prop_assert!(b.participation >= a.participation);
        }
    }

    #[test]
    fn same_input_same_series(raw in raw(), seed in any::<u64>()) {
        let (elections, tokens, records) = build(&raw);
        let mut config = PipelineConfig { window: WindowSpec::new(3, 1, true).unwrap(), ..PipelineConfig::default() };
        config.clustering.seed = seed;
        // duplicate (voter, election) pairs resolve by file order, so only
        // permute records that are unique
        let mut seen = std::collections::BTreeSet::new();
        let records: Vec<VoteRecord> = records.into_iter().filter(|r| seen.insert((r.election.clone(), r.voter.clone()))).collect();
        let a = window_series(&records, &tokens, &elections, &config).unwrap();
        prop_assert_eq!(&a, &window_series(&records, &tokens, &elections, &config).unwrap());
        let mut reversed = records.clone();
        reversed.reverse();
        let b = window_series(&reversed, &tokens, &elections, &config).unwrap();
        prop_assert_eq!(a, b);
    }
}
