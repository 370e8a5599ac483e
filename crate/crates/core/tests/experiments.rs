mod common;

use std::collections::BTreeSet;

use polycond::experiments::mc::{
    band_pair_measure_check, band_union_volume, gaussian_points, gv_code, gv_lower_bound,
    min_submatrix_sigma, word_bits, SubsetMode,
};
use polycond::experiments::table::{summarize, TrialRecord, TrialTable};
use polycond::experiments::trials::random_polytope_vf_trial;
use polycond::experiments::{run_experiment, Experiment, ExperimentConfig, RngStream};
use polycond::linalg::Matrix;
use proptest::prelude::*;

/// Standard normal CDF by composite Simpson integration of the density.
fn normal_cdf(x: f64) -> f64 {
    let steps = 20_000;
    let h = x / steps as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = phi(0.0) + phi(x);
    for i in 1..steps {
        acc += phi(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + acc * h / 3.0
}

#[test]
fn simpson_cdf_sanity() {
    assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
}

#[test]
fn sample_mean_obeys_clt_bound() {
    let (d, n, sigma) = (3, 100_000, 0.7);
    let mu = vec![0.3, -0.5, 0.1];
    let means = vec![mu.clone(); n];
    let ps = gaussian_points(d, n, Some(&means), sigma, &mut RngStream::new(77).rng(0, 0)).unwrap();
    for k in 0..d {
        let mean = ps.points().iter().map(|p| p[k]).sum::<f64>() / n as f64;
        assert!((mean - mu[k]).abs() <= 4.0 * sigma / (n as f64).sqrt(), "coord {k}: {mean}");
    }
}

#[test]
fn gaussian_points_are_reproducible() {
    let draw = || gaussian_points(4, 10, None, 1.0, &mut RngStream::new(5).rng(3, 0)).unwrap();
    let (a, b) = (draw(), draw());
    for (p, q) in a.points().iter().zip(b.points()) {
        for (x, y) in p.iter().zip(q) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn single_line_band_matches_closed_form() {
    let a = Matrix::from_columns(&[vec![0.6, 0.8]]).unwrap();
    let est = band_union_volume(&a, 0.1, 1_000_000, &mut RngStream::new(1).rng(0, 0)).unwrap();
    let exact = 2.0 * normal_cdf(0.1) - 1.0;
    assert!((exact - 0.0797).abs() < 1e-4);
    assert!((est.estimate - exact).abs() <= 3.0 * est.std_error, "{est:?} vs {exact}");
}

#[test]
fn two_orthogonal_lines_follow_inclusion_exclusion() {
    let a = Matrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let est = band_union_volume(&a, 0.1, 1_000_000, &mut RngStream::new(2).rng(0, 0)).unwrap();
    let p = 2.0 * normal_cdf(0.1) - 1.0;
    let exact = 2.0 * p - p * p;
    assert!((est.estimate - exact).abs() <= 3.0 * est.std_error, "{est:?} vs {exact}");
}

#[test]
fn orthogonal_pair_band_matches_product() {
    let c = band_pair_measure_check(
        &[1.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0],
        0.0,
        0.0,
        0.1,
        1_000_000,
        &mut RngStream::new(3).rng(0, 0),
    )
    .unwrap();
    let side = normal_cdf(0.1) - 0.5;
    let exact = side * side;
    assert!((exact - 1.59e-3).abs() < 1e-5);
    assert!((c.mc.estimate - exact).abs() <= 3.0 * c.mc.std_error, "{c:?}");
    assert!((c.bound - 0.01 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    assert!(c.pass);
}

#[test]
fn nearly_parallel_pair_band_passes() {
    let rho: f64 = 0.999;
    let v = [rho, (1.0 - rho * rho).sqrt()];
    let c = band_pair_measure_check(&[1.0, 0.0], &v, -0.2, 0.3, 0.2, 100_000, &mut RngStream::new(4).rng(0, 0))
        .unwrap();
    assert!(c.bound > 0.3);
    assert!(c.pass);
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Greedy code over explicit 0/1 vectors listed in lexicographic order.
fn oracle_greedy(n: usize, t: usize, w: usize) -> Vec<Vec<u8>> {
    let mut words: Vec<Vec<u8>> = common::subsets(n, w)
        .into_iter()
        .map(|s| {
            let mut v = vec![0u8; n];
            for i in s {
                v[i] = 1;
            }
            v
        })
        .collect();
    words.sort();
    let mut kept: Vec<Vec<u8>> = Vec::new();
    for v in words {
        if kept.iter().all(|k| hamming(k, &v) >= t) {
            kept.push(v);
        }
    }
    kept
}

#[test]
fn gv_matches_explicit_greedy() {
    for n in 1..=9 {
        for w in 1..=n {
            for t in 1..=n {
                let got: Vec<Vec<u8>> = gv_code(n, t, w).unwrap().into_iter().map(|c| word_bits(c, n)).collect();
                assert_eq!(got, oracle_greedy(n, t, w), "n={n} t={t} w={w}");
            }
        }
    }
}

#[test]
fn gv_examples() {
    let code: Vec<Vec<u8>> = gv_code(4, 2, 2).unwrap().into_iter().map(|c| word_bits(c, 4)).collect();
    assert_eq!(code.len(), 6);
    for i in 0..6 {
        for j in (i + 1)..6 {
            assert!([2, 4].contains(&hamming(&code[i], &code[j])));
        }
    }
    assert!(6.0 >= gv_lower_bound(4, 2, 2));
    assert!((gv_lower_bound(4, 2, 2) - 6.0 / 11.0).abs() < 1e-15);
    assert_eq!(gv_code(7, 1, 3).unwrap().len(), 35);
}

#[test]
fn gv_distance_two_w_gives_disjoint_supports() {
    // Two weight-w words are at distance 2w exactly when their supports are
    // disjoint, so t = 2w forces a packing of disjoint w-sets.
    let (n, w) = (6, 2);
    let code = gv_code(n, 2 * w, w).unwrap();
    for i in 0..code.len() {
        for j in (i + 1)..code.len() {
            assert_eq!(code[i] & code[j], 0);
        }
    }
    assert!(code.len() <= n / w);
    assert_eq!(code.len(), 3);
    // Distance 2w + 1 is unreachable, so only the first word survives.
    assert_eq!(gv_code(n, 2 * w + 1, w).unwrap().len(), 1);
}

#[test]
fn exact_submatrix_minimum_is_order_independent() {
    let mut rng = common::rng(8);
    let cols: Vec<Vec<f64>> = (0..6).map(|_| common::gaussian_vec(&mut rng, 3)).collect();
    let a = Matrix::from_columns(&cols).unwrap();
    let mut rev = cols.clone();
    rev.reverse();
    let b = Matrix::from_columns(&rev).unwrap();
    let mut r = RngStream::new(0).rng(0, 0);
    let x = min_submatrix_sigma(&a, SubsetMode::Exact, &mut r).unwrap();
    let y = min_submatrix_sigma(&b, SubsetMode::Exact, &mut r).unwrap();
    assert_eq!(x.subsets, 20);
    assert!((x.value - y.value).abs() <= 1e-12);
    let oracle = common::subsets(6, 3)
        .into_iter()
        .map(|s| {
            let sub: Vec<Vec<f64>> = s.iter().map(|&i| cols[i].clone()).collect();
            common::to_dmatrix_cols(&sub).singular_values().min()
        })
        .fold(f64::INFINITY, f64::min);
    assert!((x.value - oracle).abs() <= 1e-12, "{} vs {oracle}", x.value);
    let sampled = min_submatrix_sigma(&a, SubsetMode::Sampled(50), &mut r).unwrap();
    assert!(sampled.value >= x.value - 1e-15);
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Vertex-facet distance of a planar point set via a monotone-chain hull.
fn planar_vf(pts: &[Vec<f64>]) -> f64 {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| pts[i].partial_cmp(&pts[j]).unwrap());
    let mut hull: Vec<usize> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let order: Vec<usize> = if pass == 0 { idx.clone() } else { idx.iter().rev().copied().collect() };
        for i in order {
            while hull.len() >= start + 2
                && cross(&pts[hull[hull.len() - 2]], &pts[hull[hull.len() - 1]], &pts[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    let m = hull.len();
    let mut best = f64::INFINITY;
    for e in 0..m {
        let (a, b) = (&pts[hull[e]], &pts[hull[(e + 1) % m]]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        for &v in &hull {
            if v != hull[e] && v != hull[(e + 1) % m] {
                best = best.min(cross(a, b, &pts[v]).abs() / len);
            }
        }
    }
    best
}

#[test]
fn planar_vf_trial_matches_oracle() {
    for seed in 0..30 {
        let stream = RngStream::new(seed);
        let t = random_polytope_vf_trial(5, 0.4, &mut stream.rng(0, 0)).unwrap();
        assert_eq!(t.d, 2);
        let ps = gaussian_points(2, 6, None, 1.0, &mut stream.rng(0, 0)).unwrap();
        let oracle = planar_vf(ps.points());
        assert!((t.vf - oracle).abs() <= 1e-10 * (1.0 + oracle), "seed {seed}: {} vs {oracle}", t.vf);
    }
}

#[test]
fn facet_count_matches_hyperplane_oracle() {
    for (seed, n, delta) in [(1u64, 6usize, 0.5f64), (2, 8, 0.5), (3, 9, 0.34), (4, 8, 0.4)] {
        let stream = RngStream::new(seed);
        let t = random_polytope_vf_trial(n, delta, &mut stream.rng(0, 0)).unwrap();
        let ps = gaussian_points(t.d, n + 1, None, 1.0, &mut stream.rng(0, 0)).unwrap();
        let oracle: BTreeSet<Vec<usize>> = common::brute_force_facets(ps.points());
        assert_eq!(t.facets, oracle.len(), "seed {seed}");
        assert!(t.facets >= t.d + 1);
    }
}

fn small_config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

#[test]
fn runs_are_deterministic_across_pool_sizes() {
    let configs = [
        "experiment=smoothed_simplex\nd=4\ntrials=12\n",
        "experiment=sigma_decay\nd_min=3\nd_max=4\ntrials=5\n",
        "experiment=vf_decay\nd_min=2\nd_max=3\ntrials=6\n",
        "experiment=band_volume\nd_max=3\nn=4\ntrials=3\nmc_samples=2000\n",
        "experiment=band_pair\ntrials=4\nmc_samples=2000\n",
        "experiment=sandwich\ntrials=8\n",
        "experiment=chain\nd_max=3\nn=6\ntrials=4\n",
        "experiment=linear_rate\nd_max=4\ntrials=4\n",
    ];
    for text in configs {
        let cfg = small_config(text);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_experiment(&cfg).unwrap())
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a.to_csv(&[]), b.to_csv(&[]), "{text}");
        assert_eq!(a.records.len(), if cfg.experiment.is_sweep() { cfg.trials * cfg.dims().count() } else { cfg.trials });
        assert!(a.records.iter().all(|r| r.label == "-"), "{text}");
    }
}

#[test]
fn shards_reassemble_the_full_run() {
    let full = small_config("experiment=sigma_decay\nd_min=3\nd_max=5\ntrials=6\n");
    let shard = |offset, trials| {
        let mut c = full.clone();
        c.trial_offset = offset;
        c.trials = trials;
        run_experiment(&c).unwrap()
    };
    let merged = TrialTable::merge(vec![shard(4, 2), shard(0, 4)]).unwrap();
    let whole = run_experiment(&full).unwrap();
    assert_eq!(merged, whole);
    assert_eq!(summarize(&merged), summarize(&whole));
}

#[test]
fn different_seeds_differ() {
    let a = run_experiment(&small_config("experiment=sandwich\ntrials=3\nseed=1\n")).unwrap();
    let b = run_experiment(&small_config("experiment=sandwich\ntrials=3\nseed=2\n")).unwrap();
    assert_ne!(a.records[0].values, b.records[0].values);
}

#[test]
fn unknown_experiment_lists_names() {
    let err = "bogus".parse::<Experiment>().unwrap_err().to_string();
    for e in Experiment::ALL {
        assert!(err.contains(e.name()));
    }
}

fn arb_table() -> impl Strategy<Value = TrialTable> {
    prop::collection::vec(
        (1usize..5, prop::collection::vec(prop_oneof![Just(f64::NAN), -1e3f64..1e3, 1e-300f64..1e-290], 2)),
        1..40,
    )
    .prop_map(|rows| {
        let mut t = TrialTable::new(&["a", "b"]);
        for (i, (d, values)) in rows.into_iter().enumerate() {
            t.records.push(TrialRecord {
                trial: i as u64,
                d,
                n: d + 1,
                seed: i as u64 * 7919,
                attempts: 1,
                label: "-".into(),
                values,
            });
        }
        t.sort();
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_preserves_bits(t in arb_table()) {
        let back = TrialTable::from_csv(&t.to_csv(&["x=1".into()])).unwrap();
        prop_assert_eq!(back.records.len(), t.records.len());
        for (a, b) in back.records.iter().zip(&t.records) {
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
        prop_assert_eq!(summarize(&back).to_csv(&[]), summarize(&t).to_csv(&[]));
    }

    #[test]
    fn summary_is_recomputable_from_any_split(t in arb_table(), mask in any::<u64>()) {
        let (mut a, mut b) = (t.clone(), t.clone());
        a.records.retain(|r| mask >> (r.trial % 64) & 1 == 0);
        b.records.retain(|r| mask >> (r.trial % 64) & 1 == 1);
        let parts: Vec<TrialTable> = [a, b].into_iter().filter(|x| !x.records.is_empty()).collect();
        let merged = TrialTable::merge(parts).unwrap();
        prop_assert_eq!(summarize(&merged).to_csv(&[]), summarize(&t).to_csv(&[]));
    }

    #[test]
    fn summary_quantiles_are_ordered(t in arb_table()) {
        for g in summarize(&t).groups {
            let s = g.stats;
            prop_assert!(s.min <= s.q25 && s.q25 <= s.median && s.median <= s.q75 && s.q75 <= s.max);
            prop_assert!(s.min <= s.mean + 1e-9 * s.mean.abs() && s.mean <= s.max + 1e-9 * s.max.abs());
        }
    }
}
