use proptest::prelude::*;
use vbe_core::metrics::{gini_of, min_entropy, nakamoto_of, renyi_entropy, shannon_entropy, trivial_vbe, vbe, EntropyMeasure};
use vbe_core::model::{bloc_tokens, AccountId, Partition, TokenMap};

fn accounts(n: usize) -> Vec<AccountId> {
    (0..n).map(|i| AccountId::new(format!("a{i:03}")).unwrap()).collect()
}

/// Balances with at least one positive entry and a bloc label per account.
fn balances_and_labels(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![Just(0.0), 0.001f64..1e6], n)
                .prop_filter("some positive balance", |v| v.iter().any(|x| *x > 0.0)),
            prop::collection::vec(0..n, n),
        )
    })
}

fn setup(values: &[f64], labels: &[usize]) -> (Partition, TokenMap) {
    let ids = accounts(values.len());
    let tokens = TokenMap::from_pairs(ids.iter().cloned().zip(values.iter().copied())).unwrap();
    (Partition::from_assignments(&ids, labels).unwrap(), tokens)
}

/// Direct textbook formulas over bloc masses, independent of the crate.
fn oracle_masses(values: &[f64], labels: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; values.len()];
    for (v, l) in values.iter().zip(labels) {
        m[*l] += v;
    }
    m.into_iter().filter(|x| *x > 0.0).collect()
}

fn oracle_min_entropy(masses: &[f64]) -> f64 {
    let t: f64 = masses.iter().sum();
    -(masses.iter().cloned().fold(0.0, f64::max) / t).log2()
}

fn oracle_shannon(masses: &[f64]) -> f64 {
    let t: f64 = masses.iter().sum();
    -masses.iter().map(|m| (m / t) * (m / t).log2()).sum::<f64>()
}

fn oracle_gini(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let pairs: f64 = values.iter().map(|a| values.iter().map(|b| (a - b).abs()).sum::<f64>()).sum();
    pairs / (2.0 * n * n * mean)
}

fn oracle_nakamoto(values: &[f64], threshold: f64) -> usize {
    let n = values.len();
    let total: f64 = values.iter().sum();
    // heaviest subset of each size
    let mut best = vec![0.0f64; n + 1];
    for mask in 0u32..1 << n {
        let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).sum();
        let k = mask.count_ones() as usize;
        best[k] = best[k].max(s);
    }
    (1..=n).find(|&k| best[k] > threshold * total).unwrap_or(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn entropies_match_direct_formulas((values, labels) in balances_and_labels(40)) {
        let (partition, tokens) = setup(&values, &labels);
        let masses = oracle_masses(&values, &labels);
        let scale = masses.iter().sum::<f64>().log2().abs().max(1.0);
        prop_assert!((min_entropy(&partition, &tokens).unwrap() - oracle_min_entropy(&masses)).abs() < 1e-9 * scale);
        prop_assert!((shannon_entropy(&partition, &tokens).unwrap() - oracle_shannon(&masses)).abs() < 1e-9 * scale);
    }

    #[test]
    fn singleton_blocs_bound_every_partition((values, labels) in balances_and_labels(40)) {
        let (partition, tokens) = setup(&values, &labels);
        for m in [EntropyMeasure::MIN, EntropyMeasure::SHANNON] {
            let v = vbe(&partition, &tokens, m).unwrap().vbe_value;
            prop_assert!(v <= trivial_vbe(&tokens, m).unwrap() + 1e-12);
        }
    }

    #[test]
    fn merging_blocs_never_raises_entropy((values, labels) in balances_and_labels(30), a in 0usize..30, b in 0usize..30) {
        let (partition, tokens) = setup(&values, &labels);
        let n = values.len();
        let (a, b) = (a % n, b % n);
        let merged: Vec<usize> = labels.iter().map(|l| if *l == b { a } else { *l }).collect();
        let (coarse, _) = setup(&values, &merged);
        for m in [EntropyMeasure::MIN, EntropyMeasure::SHANNON] {
            let fine = vbe(&partition, &tokens, m).unwrap().vbe_value;
            let joined = vbe(&coarse, &tokens, m).unwrap().vbe_value;
            prop_assert!(joined <= fine + 1e-12);
        }
    }

    #[test]
    fn renyi_orders_between_min_and_max((values, labels) in balances_and_labels(30), a in 0.05f64..0.95, b in 1.05f64..50.0) {
        let (partition, tokens) = setup(&values, &labels);
        let h_min = min_entropy(&partition, &tokens).unwrap();
        let h_b = renyi_entropy(b, &partition, &tokens).unwrap();
        let h_1 = shannon_entropy(&partition, &tokens).unwrap();
        let h_a = renyi_entropy(a, &partition, &tokens).unwrap();
        let h_0 = renyi_entropy(0.0, &partition, &tokens).unwrap();
        prop_assert!(h_min <= h_b + 1e-9);
        prop_assert!(h_b <= h_1 + 1e-9);
        prop_assert!(h_1 <= h_a + 1e-9);
        prop_assert!(h_a <= h_0 + 1e-9);
    }

    #[test]
    fn scaling_balances_changes_nothing((values, labels) in balances_and_labels(30), c in 1e-3f64..1e3) {
        let (partition, tokens) = setup(&values, &labels);
        let scaled = tokens.scaled(c).unwrap();
        for m in [EntropyMeasure::MIN, EntropyMeasure::SHANNON, EntropyMeasure::SHANNON.normalized(true)] {
            let x = vbe(&partition, &tokens, m).unwrap().vbe_value;
            let y = vbe(&partition, &scaled, m).unwrap().vbe_value;
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn bloc_masses_conserve_tokens((values, labels) in balances_and_labels(40)) {
        let (partition, tokens) = setup(&values, &labels);
        let b = bloc_tokens(&partition, &tokens, false).unwrap();
        let sum: f64 = b.masses.iter().sum();
        prop_assert!((sum - tokens.total()).abs() <= 1e-9 * tokens.total());
        prop_assert_eq!(b.unpartitioned, 0.0);
        prop_assert!(partition.covers(tokens.accounts()));
    }

    #[test]
    fn partition_from_labels_is_valid((values, labels) in balances_and_labels(40)) {
        let (partition, _) = setup(&values, &labels);
        let mut seen: Vec<&AccountId> = partition.accounts().collect();
        let total = seen.len();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), total);
        prop_assert_eq!(total, values.len());
        prop_assert!(partition.blocs().iter().all(|b| !b.is_empty()));
    }

    #[test]
    fn gini_matches_pairwise_formula(values in prop::collection::vec(0.0f64..1e4, 1..15)
        .prop_filter("positive total", |v| v.iter().sum::<f64>() > 0.0)) {
        prop_assert!((gini_of(&values).unwrap() - oracle_gini(&values)).abs() < 1e-9);
    }

    #[test]
    fn nakamoto_matches_subset_search(values in prop::collection::vec(0.0f64..100.0, 1..=15)
        .prop_filter("positive total", |v| v.iter().sum::<f64>() > 0.0), t in 0.05f64..0.95) {
        prop_assert_eq!(nakamoto_of(&values, t).unwrap(), oracle_nakamoto(&values, t));
    }
}

#[test]
fn closed_forms() {
    let (p, t) = setup(&[50.0, 50.0], &[0, 1]);
    assert_eq!(min_entropy(&p, &t).unwrap(), 1.0);
    assert_eq!(shannon_entropy(&p, &t).unwrap(), 1.0);
    let (p, t) = setup(&[60.0, 25.0, 15.0], &[0, 1, 2]);
    assert!((min_entropy(&p, &t).unwrap() - 0.736_965_594_166_206_2).abs() < 1e-9);
    assert!((shannon_entropy(&p, &t).unwrap() - 1.352_724_195_624_654_6).abs() < 1e-9);
}

#[test]
fn baseline_constants() {
    assert_eq!(gini_of(&[7.0; 12]).unwrap(), 0.0);
    assert_eq!(nakamoto_of(&[1.0; 10], 0.5).unwrap(), 6);
}
