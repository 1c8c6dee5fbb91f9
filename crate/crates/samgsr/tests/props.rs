//! Property tests for the library's documented invariants.

use proptest::prelude::*;

use samgsr::classify::{composite_four_class, LinearClassifier, PosteriorMatrix};
use samgsr::connectivity::{normalize_weights, ConnectivityGraph, WeightScheme, WeightVector};
use samgsr::data::{
    row_moments, ExpressionDataset, ExpressionMatrix, FoldAssignment, GeneSet, GeneSetCollection,
};
use samgsr::metrics::{aupr_scores, generalized_brier, rand_index};
use samgsr::permutation::{build_plan, subset_pvalue, StatConfig};
use samgsr::sam::{sam_statistic, samgs_score, weighted_sam_statistic, S0Method};
use samgsr::Dataset;

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (2usize..6, 2usize..5)
        .prop_flat_map(|(n_genes, n_per_group)| {
            let n = 2 * n_per_group;
            (
                Just(n_genes),
                Just(n),
                proptest::collection::vec(-50.0f64..50.0, n_genes * n),
            )
        })
        .prop_map(|(n_genes, n, mut values)| {
            // break exact constancy so standardization is defined
            for g in 0..n_genes {
                values[g * n] += 1.0 + g as f64;
            }
            let genes: Vec<String> = (0..n_genes).map(|i| format!("g{i}")).collect();
            let samples: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            let labels: Vec<String> = (0..n)
                .map(|i| if i < n / 2 { "a".into() } else { "b".into() })
                .collect();
            ExpressionDataset::new(
                ExpressionMatrix::new(genes, samples, values).unwrap(),
                labels,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn standardize_gives_unit_moments_and_is_idempotent(ds in dataset_strategy()) {
        let once = ds.standardize().unwrap();
        for g in 0..once.n_genes() {
            let (mean, sd) = row_moments(once.row(g));
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((sd - 1.0).abs() < 1e-9);
        }
        let twice = once.standardize().unwrap();
        for g in 0..once.n_genes() {
            for (u, v) in once.row(g).iter().zip(twice.row(g)) {
                prop_assert!((u - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn restriction_is_idempotent(
        ds in dataset_strategy(),
        extra in proptest::collection::vec("[a-z]{3}", 1..4),
    ) {
        let mut genes: Vec<String> = ds.gene_ids().to_vec();
        genes.extend(extra.iter().map(|e| format!("zz_{e}")));
        genes.dedup();
        let coll = GeneSetCollection::new(
            vec![GeneSet { name: "s".into(), genes }],
            "prop",
        ).unwrap();
        let (once, _) = coll.restrict_to(&ds).unwrap();
        let (twice, dropped) = once.restrict_to(&ds).unwrap();
        prop_assert_eq!(once, twice);
        prop_assert!(dropped.is_empty());
    }

    #[test]
    fn folds_partition_every_sample_exactly_once(
        n_per_class in 2usize..8,
        k in 2usize..5,
        seed in 0u64..1000,
    ) {
        prop_assume!(k <= 2 * n_per_class);
        let labels: Vec<String> = (0..2 * n_per_class)
            .map(|i| if i % 2 == 0 { "a".into() } else { "b".into() })
            .collect();
        let (folds, _) = FoldAssignment::stratified(&labels, k, seed).unwrap();
        let mut seen = vec![0usize; labels.len()];
        let mut sizes = Vec::new();
        for f in 0..k {
            let fold = folds.fold(f);
            sizes.push(fold.len());
            for i in fold {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let max = sizes.iter().max().unwrap();
        let min = sizes.iter().min().unwrap();
        prop_assert!(max - min <= 1);
    }

    #[test]
    fn weight_normalization_preserves_argsort(
        weights in proptest::collection::vec(0.5f64..100.0, 2..20),
    ) {
        let genes: Vec<String> = (0..weights.len()).map(|i| format!("g{i}")).collect();
        let w = WeightVector::new(genes, weights).unwrap();
        let argsort = |v: &[f64]| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap().then(a.cmp(&b)));
            idx
        };
        for scheme in [WeightScheme::MeanOne, WeightScheme::MaxOne, WeightScheme::SqrtMeanOne] {
            let n = normalize_weights(&w, scheme).unwrap();
            prop_assert_eq!(argsort(w.values()), argsort(n.values()));
        }
    }

    #[test]
    fn graph_build_is_invariant_to_edge_order_and_endpoint_order(
        edges in proptest::collection::vec((0usize..8, 0usize..8), 1..20),
        seed in 0u64..100,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let universe: Vec<String> = (0..8).map(|i| format!("g{i}")).collect();
        let named: Vec<(String, String)> = edges
            .iter()
            .map(|(a, b)| (format!("g{a}"), format!("g{b}")))
            .collect();
        let (graph1, _) = ConnectivityGraph::build(&named, &universe).unwrap();
        let mut shuffled = named.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        shuffled.shuffle(&mut rng);
        let flipped: Vec<(String, String)> = shuffled
            .into_iter()
            .map(|(a, b)| if seed % 2 == 0 { (b, a) } else { (a, b) })
            .collect();
        let (graph2, _) = ConnectivityGraph::build(&flipped, &universe).unwrap();
        prop_assert_eq!(graph1, graph2);
    }

    #[test]
    fn label_swap_negates_d_and_keeps_scores(ds in dataset_strategy()) {
        let a = sam_statistic(&ds, 0.5, "a").unwrap();
        let b = sam_statistic(&ds, 0.5, "b").unwrap();
        for (u, v) in a.d().iter().zip(b.d()) {
            prop_assert_eq!(*u, -*v);
        }
        let genes: Vec<String> = ds.gene_ids().to_vec();
        let sa = samgs_score(&a, "s", &genes).unwrap();
        let sb = samgs_score(&b, "s", &genes).unwrap();
        prop_assert_eq!(sa.score, sb.score);
    }

    #[test]
    fn weight_scaling_couples_statistics_and_scores(
        ds in dataset_strategy(),
        scale in 0.1f64..10.0,
    ) {
        let base: Vec<f64> = (0..ds.n_genes()).map(|i| 1.0 + i as f64).collect();
        let scaled: Vec<f64> = base.iter().map(|w| w * scale).collect();
        let genes: Vec<String> = ds.gene_ids().to_vec();
        let w1 = WeightVector::new(genes.clone(), base).unwrap();
        let w2 = WeightVector::new(genes.clone(), scaled).unwrap();
        let stats = sam_statistic(&ds, 0.5, "a").unwrap();
        let d1 = weighted_sam_statistic(&stats, &w1).unwrap();
        let d2 = weighted_sam_statistic(&stats, &w2).unwrap();
        for (u, v) in d1.d().iter().zip(d2.d()) {
            prop_assert!((v - u * scale).abs() <= 1e-12 * v.abs().max(1e-300));
        }
        let s1 = samgs_score(&d1, "s", &genes).unwrap();
        let s2 = samgs_score(&d2, "s", &genes).unwrap();
        prop_assert!((s2.score - s1.score * scale * scale).abs() <= 1e-9 * s2.score.abs().max(1e-300));
        let argsort = |v: &[f64]| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&x, &y| v[x].abs().partial_cmp(&v[y].abs()).unwrap().then(x.cmp(&y)));
            idx
        };
        prop_assert_eq!(argsort(d1.d()), argsort(d2.d()));
    }

    #[test]
    fn samgs_is_additive_over_disjoint_partitions(ds in dataset_strategy()) {
        prop_assume!(ds.n_genes() >= 2);
        let stats = sam_statistic(&ds, 0.5, "a").unwrap();
        let genes: Vec<String> = ds.gene_ids().to_vec();
        let cut = ds.n_genes() / 2;
        let whole = samgs_score(&stats, "w", &genes).unwrap();
        let left = samgs_score(&stats, "l", &genes[..cut]).unwrap();
        let right = samgs_score(&stats, "r", &genes[cut..]).unwrap();
        prop_assert!((whole.score - (left.score + right.score)).abs() <= 1e-12 * whole.score.max(1e-300));
    }

    #[test]
    fn pvalues_respect_the_add_one_floor(
        ds in dataset_strategy(),
        b in 1usize..60,
        seed in 0u64..500,
    ) {
        let plan = build_plan(ds.labels(), b, seed).unwrap();
        let config = StatConfig::unweighted(S0Method::Fixed(0.5), "a");
        let genes: Vec<String> = ds.gene_ids().to_vec();
        let p = subset_pvalue(&ds, &genes, &plan, &config).unwrap();
        let floor = 1.0 / (plan.b_used() as f64 + 1.0);
        prop_assert!(p >= floor && p <= 1.0);
    }

    #[test]
    fn composite_rows_sum_to_exactly_one(
        pairs in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..30),
    ) {
        let ids: Vec<String> = (0..pairs.len()).map(|i| format!("s{i}")).collect();
        let first = PosteriorMatrix::new(
            vec!["x".into(), "y".into()],
            ids.clone(),
            pairs.iter().map(|(a, _)| vec![*a, 1.0 - *a]).collect(),
        ).unwrap();
        let second = PosteriorMatrix::new(
            vec!["u".into(), "v".into()],
            ids,
            pairs.iter().map(|(_, b)| vec![*b, 1.0 - *b]).collect(),
        ).unwrap();
        let four = composite_four_class(&first, &second).unwrap();
        for row in four.rows() {
            let sum = ((row[0] + row[1]) + row[2]) + row[3];
            prop_assert_eq!(sum, 1.0);
        }
    }

    #[test]
    fn predicted_rows_sum_to_exactly_one(
        margins in proptest::collection::vec(-100.0f64..100.0, 1..40),
        slope in -5.0f64..0.0,
        offset in -3.0f64..3.0,
    ) {
        let model = LinearClassifier {
            genes: vec!["g".into()],
            coefficients: vec![1.0],
            intercept: 0.0,
            calib_slope: slope,
            calib_offset: offset,
            positive_class: "a".into(),
            negative_class: "b".into(),
        };
        let matrix = ExpressionMatrix::new(
            vec!["g".into()],
            (0..margins.len()).map(|i| format!("s{i}")).collect(),
            margins,
        ).unwrap();
        let p = samgsr::classify::predict(&model, &matrix).unwrap();
        for row in p.rows() {
            prop_assert_eq!(row[0] + row[1], 1.0);
            prop_assert!(row[0] >= 0.0 && row[0] <= 1.0);
        }
    }

    #[test]
    fn rand_index_is_order_and_duplicate_invariant(
        lists in proptest::collection::vec(
            proptest::collection::vec(0usize..10, 0..8),
            2..5,
        ),
        seed in 0u64..100,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let named: Vec<Vec<String>> = lists
            .iter()
            .map(|l| l.iter().map(|i| format!("g{i}")).collect())
            .collect();
        let base: f64 = rand_index(&named).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut reordered = named.clone();
        reordered.shuffle(&mut rng);
        for l in &mut reordered {
            l.shuffle(&mut rng);
            if let Some(first) = l.first().cloned() {
                l.push(first); // duplicate entries must not matter
            }
        }
        let shuffled: f64 = rand_index(&reordered).unwrap();
        prop_assert_eq!(base, shuffled);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn aupr_within_bounds_and_brier_within_bounds(
        scored in proptest::collection::vec((0.0f64..=1.0, proptest::bool::ANY), 2..20),
    ) {
        prop_assume!(scored.iter().any(|(_, pos)| *pos));
        let scores: Vec<f64> = scored.iter().map(|(s, _)| *s).collect();
        let flags: Vec<bool> = scored.iter().map(|(_, p)| *p).collect();
        let a: f64 = aupr_scores(&scores, &flags).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));

        let ids: Vec<String> = (0..scores.len()).map(|i| format!("s{i}")).collect();
        let posteriors = PosteriorMatrix::new(
            vec!["pos".into(), "neg".into()],
            ids,
            scores.iter().map(|s| vec![*s, 1.0 - *s]).collect(),
        ).unwrap();
        let truth: Vec<String> = flags
            .iter()
            .map(|p| if *p { "pos".into() } else { "neg".into() })
            .collect();
        let g: f64 = generalized_brier(&posteriors, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
    }
}
