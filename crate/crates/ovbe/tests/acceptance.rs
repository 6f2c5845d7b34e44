//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs without the libtest harness so the lines always print.

use std::collections::BTreeSet;
use std::path::PathBuf;

use ovbe::ingest::{load_dataset, Sources};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vbe_core::clustering::{kmeans, KMeansConfig};
use vbe_core::lab::{
    check_master, gen_consensus_collapse_pair, gen_random_dao, min_bribe_players_external, min_bribe_tokens_internal,
    qv_benefit, t_herd, verify_theorem, SolveMode, SyntheticDao, Theorem, TokenDistribution,
};
use vbe_core::metrics::{gini, min_entropy, nakamoto, shannon_entropy, trivial_vbe, EntropyMeasure};
use vbe_core::model::{build_vote_matrix, AccountId, Dataset, Partition, TokenMap, WindowSpec};
use vbe_core::pipeline::{compare_rounds, window_series, PipelineConfig, Verdict};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn holders(balances: &[f64]) -> (Vec<AccountId>, TokenMap) {
    let ids: Vec<AccountId> = (0..balances.len()).map(|i| AccountId::from(format!("h{i:02}").as_str())).collect();
    let tokens = TokenMap::from_pairs(ids.iter().cloned().zip(balances.iter().copied())).unwrap();
    (ids, tokens)
}

fn whole_blocs(balances: &[f64]) -> (Partition, TokenMap) {
    let (ids, tokens) = holders(balances);
    let partition = Partition::singletons(&ids);
    (partition, tokens)
}

fn closed_forms() -> Outcome {
    // -sum p log2 p for (0.6, 0.25, 0.15), evaluated separately in double precision
    const SHANNON_60_25_15: f64 = 1.352_724_195_624_654_6;
    let (p, t) = whole_blocs(&[50.0, 50.0]);
    let even_min = min_entropy(&p, &t).unwrap();
    let even_shannon = shannon_entropy(&p, &t).unwrap();
    let (p, t) = whole_blocs(&[60.0, 25.0, 15.0]);
    let min3 = min_entropy(&p, &t).unwrap();
    let shannon3 = shannon_entropy(&p, &t).unwrap();
    let min_err = (min3 - -(0.6f64).log2()).abs();
    let shannon_err = (shannon3 - SHANNON_60_25_15).abs();
    outcome(
        even_min == 1.0 && even_shannon == 1.0 && min_err <= 1e-9 && shannon_err <= 1e-9,
        format!("{{50,50}} -> {even_min}, {even_shannon}; {{60,25,15}} min err {min_err:.1e}, shannon err {shannon_err:.1e}"),
    )
}

fn upper_bound() -> Outcome {
    let mut r = rng(1);
    let mut violations = 0;
    let pairs = 1000;
    for _ in 0..pairs {
        let n = r.gen_range(1..=40);
        let mut balances: Vec<f64> = (0..n).map(|_| if r.gen_bool(0.1) { 0.0 } else { r.gen_range(0.0..1e6) }).collect();
        if balances.iter().sum::<f64>() <= 0.0 {
            balances[0] = 1.0;
        }
        let (ids, tokens) = holders(&balances);
        let k = r.gen_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..k)).collect();
        let partition = Partition::from_assignments(&ids, &labels).unwrap();
        let blocs = min_entropy(&partition, &tokens).unwrap();
        let trivial = trivial_vbe(&tokens, EntropyMeasure::MIN).unwrap();
        if blocs > trivial + 1e-12 {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations in {pairs} random pairs"))
}

fn transformations() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for theorem in [Theorem::Sybil, Theorem::Apathy, Theorem::Delegation, Theorem::Herding, Theorem::Slates, Theorem::Bribery] {
        let report = verify_theorem(theorem, 500, 42).unwrap();
        pass &= report.passes == 500 && report.master_holds == report.master_checks;
        lines.push(format!(
            "{} {}/500 master {}/{}",
            theorem.as_str(),
            report.passes,
            report.master_holds,
            report.master_checks
        ));
    }
    // the biconditional itself, on outcomes not built to satisfy any monotone claim
    let mut r = rng(3);
    let mut master_ok = 0;
    for trial in 0..500 {
        let d = gen_random_dao(trial, r.gen_range(2..20), 3, TokenDistribution::default(), 1.0, 0.3).unwrap();
        let subset: Vec<AccountId> = d.players().iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
        if check_master(&t_herd(&d, &subset, r.gen_bool(0.5)).unwrap()).unwrap() {
            master_ok += 1;
        }
    }
    pass &= master_ok == 500;
    lines.push(format!("master on random herds {master_ok}/500"));
    outcome(pass, lines.join("; "))
}

fn leans(dao: &SyntheticDao, p: usize, e: usize, direction: bool) -> bool {
    let d = if direction { 1.0 } else { -1.0 };
    d * dao.utilities.get(p, e) > dao.epsilon
}

/// Enumerates every bribe set. Returns (least tokens, fewest players).
fn enumerate_bribes(dao: &SyntheticDao, e: usize, direction: bool, briber: Option<usize>) -> (Option<f64>, Option<usize>) {
    let n = dao.len();
    let need = dao.quorum * dao.total();
    let base: f64 = (0..n).filter(|p| leans(dao, *p, e, direction) || Some(*p) == briber).map(|p| dao.balance(p)).sum();
    let open: Vec<usize> = (0..n).filter(|p| !leans(dao, *p, e, direction) && Some(*p) != briber).collect();
    let mut best: (Option<f64>, Option<usize>) = (None, None);
    for mask in 0u32..1 << open.len() {
        let mass: f64 = (0..open.len()).filter(|i| mask >> i & 1 == 1).map(|i| dao.balance(open[i])).sum();
        if base + mass > need {
            let count = mask.count_ones() as usize;
            best.0 = Some(best.0.map_or(mass, |t: f64| t.min(mass)));
            best.1 = Some(best.1.map_or(count, |c: usize| c.min(count)));
        }
    }
    best
}

fn bribery() -> Outcome {
    let mut r = rng(4);
    let instances = 200;
    let mut matched = 0;
    let mut max_open = 0;
    for seed in 0..instances {
        let d = gen_random_dao(seed, r.gen_range(2..=12), 3, TokenDistribution::default(), 1.0, 0.2).unwrap();
        let e = r.gen_range(0..3);
        let direction = r.gen_bool(0.5);
        let briber = (0..d.len()).find(|p| leans(&d, *p, e, direction)).unwrap_or(0);
        max_open = max_open.max((0..d.len()).filter(|p| !leans(&d, *p, e, direction)).count());
        let (tokens, _) = enumerate_bribes(&d, e, direction, Some(briber));
        let (_, players) = enumerate_bribes(&d, e, direction, None);
        let internal = min_bribe_tokens_internal(&d, e, &d.players()[briber].clone(), direction, SolveMode::BruteForce).unwrap();
        let external = min_bribe_players_external(&d, e, direction, SolveMode::BruteForce).unwrap();
        let internal_ok = match (internal.map(|s| s.tokens), tokens) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-9 * b.max(1.0),
            (None, None) => true,
            _ => false,
        };
        if internal_ok && external.map(|s| s.players) == players {
            matched += 1;
        }
    }
    let int = verify_theorem(Theorem::InternalBribery, 200, 42).unwrap();
    let ext = verify_theorem(Theorem::ExternalBribery, 200, 42).unwrap();
    outcome(
        matched == instances && int.passes == 200 && ext.passes == 200,
        format!(
            "solvers match enumeration {matched}/{instances} (<= {max_open} opposers); internal {}/200, external {}/200",
            int.passes, ext.passes
        ),
    )
}

fn quadratic() -> Outcome {
    let mut r = rng(5);
    let vectors = 1000;
    let mut agree = 0;
    for _ in 0..vectors {
        let n = r.gen_range(1..=30);
        let mut balances: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1e4)).collect();
        balances[0] += 1.0;
        let (ids, tokens) = holders(&balances);
        let p = r.gen_range(0..n);
        let total: f64 = balances.iter().sum();
        let root_total: f64 = balances.iter().map(|b| b.sqrt()).sum();
        let direct = balances[p].sqrt() / root_total > balances[p] / total;
        if qv_benefit(&ids[p], &tokens).unwrap() == direct {
            agree += 1;
        }
    }
    let report = verify_theorem(Theorem::Quadratic, 200, 42).unwrap();
    outcome(
        agree == vectors && report.passes == 200,
        format!("benefit matches share comparison {agree}/{vectors}; biconditional {}/200", report.passes),
    )
}

fn collapse() -> Outcome {
    let config = PipelineConfig::default();
    let seeds = 200u64;
    let mut both = 0;
    for seed in 0..seeds {
        let (a, b) = gen_consensus_collapse_pair(seed, 60, 30, 0.5).unwrap();
        let series = |d: &Dataset| window_series(&d.votes, &d.balances, &d.proposals, &config).unwrap();
        let cmp = compare_rounds(&series(&a), &series(&b)).unwrap();
        let wins = |label: &str| cmp.verdict(label) == Some(Verdict::AMoreDecentralized);
        if wins(&EntropyMeasure::MIN.label()) && wins(&EntropyMeasure::SHANNON.label()) {
            both += 1;
        }
    }
    outcome(both * 100 >= 95 * seeds, format!("{both}/{seeds} seeds favour the pre-collapse round on both measures"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn compute_bytes() -> Vec<u8> {
    let args = [
        "ovbe".to_string(),
        "compute".into(),
        "--votes".into(),
        fixture("basic/votes.csv").display().to_string(),
        "--balances".into(),
        fixture("basic/balances.csv").display().to_string(),
        "--proposals".into(),
        fixture("basic/proposals.csv").display().to_string(),
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ovbe::cli::run(args, &mut out, &mut err);
    assert_eq!(code, ovbe::exit::OK, "{}", String::from_utf8_lossy(&err));
    out
}

fn fixture_datasets() -> Vec<(&'static str, Dataset)> {
    let csv = |dir: &str| Sources {
        votes: Some(fixture(&format!("{dir}/votes.csv"))),
        balances: Some(fixture(&format!("{dir}/balances.csv"))),
        proposals: Some(fixture(&format!("{dir}/proposals.csv"))),
        dialect: None,
    };
    let export = |file: &str| Sources {
        votes: Some(fixture(file)),
        balances: Some(fixture("exports/balances.csv")),
        proposals: None,
        dialect: None,
    };
    [
        ("basic", csv("basic")),
        ("collapse", csv("collapse")),
        ("identical_rounds", csv("identical_rounds")),
        ("snapshot", export("exports/snapshot.json")),
        ("tally", export("exports/tally.json")),
    ]
    .into_iter()
    .map(|(name, s)| (name, load_dataset(&s, true).unwrap().0))
    .collect()
}

fn determinism() -> Outcome {
    let (first, second) = (compute_bytes(), compute_bytes());
    let identical = !first.is_empty() && first == second;
    let mut windows = 0;
    let mut increases = 0;
    for (_, d) in fixture_datasets() {
        let mut proposals = d.proposals.clone();
        proposals.sort_by_key(|p| p.ordinal);
        let mut universe: BTreeSet<AccountId> = d.votes.iter().map(|v| v.voter.clone()).collect();
        universe.extend(d.balances.accounts().cloned());
        let universe: Vec<AccountId> = universe.into_iter().collect();
        let length = proposals.len().min(WindowSpec::default().length);
        let spec = WindowSpec::new(length, length, true).unwrap();
        for range in spec.ranges(proposals.len()) {
            let elections = &proposals[range];
            let ids: BTreeSet<&str> = elections.iter().map(|e| e.id.as_str()).collect();
            let votes: Vec<_> = d.votes.iter().filter(|v| ids.contains(v.election.as_str())).cloned().collect();
            let matrix = build_vote_matrix(&votes, elections, &universe).unwrap();
            for k in 1..=4 {
                let trace = kmeans(&matrix, &KMeansConfig::with_k(k)).unwrap().inertia_trace;
                windows += 1;
                increases += trace.windows(2).filter(|w| w[1] > w[0]).count();
            }
        }
    }
    outcome(
        identical && increases == 0 && windows > 0,
        format!(
            "repeat compute {} ({} bytes); {increases} inertia increases over {windows} fixture clusterings",
            if identical { "byte-identical" } else { "differs" },
            first.len()
        ),
    )
}

fn gini_oracle(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    let pairs: f64 = x.iter().map(|a| x.iter().map(|b| (a - b).abs()).sum::<f64>()).sum();
    pairs / (2.0 * n * total)
}

fn nakamoto_oracle(x: &[f64], threshold: f64) -> usize {
    let target = threshold * x.iter().sum::<f64>();
    (0u32..1 << x.len())
        .filter(|mask| (0..x.len()).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).sum::<f64>() > target)
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap_or(x.len())
}

fn baselines() -> Outcome {
    let mut r = rng(8);
    let cases = 300;
    let mut matched = 0;
    for _ in 0..cases {
        let n = r.gen_range(1..=15);
        // integer balances keep subset sums exact, so ties are decided the same way
        let mut x: Vec<f64> = (0..n).map(|_| r.gen_range(0..1000) as f64).collect();
        if x.iter().sum::<f64>() == 0.0 {
            x[0] = 1.0;
        }
        let (_, tokens) = holders(&x);
        let threshold = [0.5, 0.33, 0.51, 0.9][r.gen_range(0..4)];
        let g_ok = (gini(&tokens).unwrap() - gini_oracle(&x)).abs() <= 1e-12;
        let n_ok = nakamoto(&tokens, threshold).unwrap() == nakamoto_oracle(&x, threshold);
        if g_ok && n_ok {
            matched += 1;
        }
    }
    let (_, equal) = holders(&[7.0; 9]);
    let (_, uniform10) = holders(&[100.0; 10]);
    let g_equal = gini(&equal).unwrap();
    let n_uniform = nakamoto(&uniform10, 0.5).unwrap();
    outcome(
        matched == cases && g_equal == 0.0 && n_uniform == 6,
        format!("oracles agree {matched}/{cases} (n <= 15); gini(equal) = {g_equal}; nakamoto(uniform 10, 0.5) = {n_uniform}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("entropy closed forms", closed_forms),
        ("bloc entropy never exceeds per-holder entropy", upper_bound),
        ("transformation checks", transformations),
        ("bribery solvers and biconditionals", bribery),
        ("quadratic voting benefit", quadratic),
        ("consensus collapse detection", collapse),
        ("deterministic reports and monotone k-means", determinism),
        ("gini and nakamoto baselines", baselines),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {} {name}: {} [{}] ({:.1}s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
