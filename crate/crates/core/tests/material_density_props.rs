use std::collections::BTreeMap;

use densify_core::density::{
    composite_density, dominant_material, Component, CompositionProfile, DensityDatabase,
};
use densify_core::material::rng::SplitMix64;
use densify_core::material::synthetic::{striped_corpus, DEFAULT_HUE_CLASSES};
use densify_core::material::{
    assign_word, classify_material, kmeans_fit, lloyd, posterior_for_word, squared_distance,
    train_material_model, Codebook, KMeansParams, MaterialDistribution,
};
use densify_core::pipeline::object_mass;
use proptest::prelude::*;

fn vectors(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.next_f64() * 4.0).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kmeans_objective_never_increases(seed in any::<u64>(), n in 8usize..80, dim in 1usize..8, k in 1usize..6) {
        let v = vectors(seed, n, dim);
        let fit = kmeans_fit(&v, KMeansParams { k, seed, max_iter: 100, tol: 0.0 }).unwrap();
        for w in fit.trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", fit.trace);
        }
        prop_assert!(fit.assignment.labels.iter().all(|&l| l < k));
        let again = kmeans_fit(&v, KMeansParams { k, seed, max_iter: 100, tol: 0.0 }).unwrap();
        prop_assert_eq!(fit.codebook, again.codebook);
    }

    #[test]
    fn no_single_point_prefers_another_centroid(seed in any::<u64>(), n in 8usize..60, k in 1usize..6) {
        let v = vectors(seed, n, 3);
        let fit = kmeans_fit(&v, KMeansParams { k, seed, max_iter: 100, tol: 1e-9 }).unwrap();
        let c = &fit.codebook.centroids;
        for (x, &l) in v.iter().zip(&fit.assignment.labels) {
            let own = squared_distance(x, &c[l]);
            for other in c {
                prop_assert!(own <= squared_distance(x, other));
            }
        }
        let j: f64 = v.iter().zip(&fit.assignment.labels).map(|(x, &l)| squared_distance(x, &c[l])).sum();
        prop_assert_eq!(j, fit.assignment.objective);
    }

    #[test]
    fn permuting_the_corpus_keeps_the_converged_objective(seed in any::<u64>(), n in 8usize..60, k in 1usize..6) {
        let v = vectors(seed, n, 4);
        let fit = kmeans_fit(&v, KMeansParams { k, seed, max_iter: 200, tol: 0.0 }).unwrap();
        let mut order: Vec<usize> = SplitMix64::new(seed ^ 1).shuffled_indices(n).collect();
        order.reverse();
        let permuted: Vec<Vec<f64>> = order.iter().map(|&i| v[i].clone()).collect();
        let init = fit.initial_indices.iter().map(|&i| v[i].clone()).collect();
        let refit = lloyd(&permuted, init, 200, 0.0).unwrap();
        let (a, b) = (fit.assignment.objective, refit.assignment.objective);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn composite_density_within_component_range(fracs in prop::collection::vec(0.01..1.0f64, 1..6), s in 0.05..1.0f64) {
        let db = DensityDatabase::builtin();
        let names = ["silicon", "iron", "lead", "wood", "fabric", "copper"];
        let total: f64 = fracs.iter().sum();
        let profile = |scale: f64| CompositionProfile {
            name: "p".into(),
            components: fracs.iter().zip(names).map(|(f, m)| Component {
                material: m.into(),
                fraction: f / total * scale,
            }).collect(),
        };
        let rho = composite_density(&db, &profile(1.0)).unwrap();
        let used: Vec<f64> = names[..fracs.len()].iter().map(|m| db.lookup(m).unwrap()).collect();
        let lo = used.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = used.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(rho >= lo - 1e-12 && rho <= hi + 1e-12);
        // Renormalization: uniformly shrinking all fractions leaves it unchanged.
        let shrunk = composite_density(&db, &profile(s)).unwrap();
        prop_assert!((shrunk - rho).abs() <= 1e-12 * rho);
    }

    #[test]
    fn mass_density_volume_identity(v in 1e-6..1e6f64, rho in 0.01..25.0f64) {
        let m = object_mass(v, rho).unwrap();
        prop_assert!((m / v - rho).abs() <= 1e-9 * rho);
    }

    #[test]
    fn dominant_is_a_maximum(ps in prop::collection::vec(0.0..1.0f64, 1..8)) {
        let names = ["a", "b", "c", "d", "e", "f", "g", "h"];
        let dist = MaterialDistribution(ps.iter().zip(names).map(|(p, n)| (n.to_string(), *p)).collect::<BTreeMap<_, _>>());
        let d = dominant_material(&dist).unwrap();
        let max = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(dist.get(d), max);
        let first = names.iter().zip(&ps).find(|(_, p)| **p == max).unwrap().0;
        prop_assert_eq!(d, *first);
    }
}

#[test]
fn posteriors_are_distributions() {
    let corpus = striped_corpus(&DEFAULT_HUE_CLASSES, 6, 3);
    let classes: Vec<String> = DEFAULT_HUE_CLASSES
        .iter()
        .map(|(c, _)| c.to_string())
        .collect();
    let model = train_material_model(
        &corpus,
        &classes,
        KMeansParams {
            k: 8,
            ..Default::default()
        },
    )
    .unwrap();
    for word in 0..8 {
        let p = posterior_for_word(&model, word).unwrap();
        assert!((p.0.values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.0.values().all(|v| *v > 0.0));
    }
    for s in &corpus {
        let p = classify_material(&s.crop, &model).unwrap();
        assert_eq!(p.0.len(), 4);
        assert!((p.0.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn assign_word_matches_linear_scan() {
    let mut rng = SplitMix64::new(99);
    let centroids: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..66).map(|_| rng.next_f64()).collect())
        .collect();
    let codebook = Codebook {
        k: 16,
        centroids: centroids.clone(),
        seed: 0,
    };
    for _ in 0..1000 {
        let v: Vec<f64> = (0..66).map(|_| rng.next_f64()).collect();
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in centroids.iter().enumerate() {
            let d: f64 = v.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        assert_eq!(assign_word(&v, &codebook).unwrap(), best);
    }
}
