use privrec_core::mechanisms::{
    argmax_distribution, expected_accuracy, exponential_distribution, laplace_noise, laplace_recommend,
    laplace_recommend_naive, laplace_selection_probabilities, laplace_two_node_win_prob, linear_smoothing, sample,
    smoothing_param_for_epsilon, smoothing_param_for_privacy, smoothing_privacy,
};
use privrec_core::{MechanismParams, NodeId, RecommendationDistribution, UtilityVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn ids(n: usize) -> Vec<NodeId> {
    (0..n).map(NodeId::from).collect()
}

fn assert_frequencies(counts: &[u64], probs: &[f64], draws: u64, sigmas: f64) {
    for (&c, &p) in counts.iter().zip(probs) {
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        let f = c as f64 / draws as f64;
        assert!((f - p).abs() <= sigmas * sd.max(1e-12), "frequency {f} vs probability {p} (sd {sd})");
    }
}

#[test]
fn exponential_matches_softmax_oracle() {
    let u = [3.0, 1.0, 0.0, 0.0];
    let eps: f64 = 0.5;
    let d = exponential_distribution(&UtilityVector::from_values(u.to_vec()).unwrap(), &MechanismParams::unit(eps).unwrap())
        .unwrap();
    let z: f64 = u.iter().map(|x| (eps * x).exp()).sum();
    for (p, x) in d.probabilities().iter().zip(u) {
        assert!((p - (eps * x).exp() / z).abs() < 1e-12);
    }
}

#[test]
fn sampling_point_mass_and_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let point = RecommendationDistribution::point_mass(ids(8), NodeId(5)).unwrap();
    assert!((0..1000).all(|_| sample(&point, &mut rng) == NodeId(5)));

    let uniform = RecommendationDistribution::uniform(ids(4)).unwrap();
    let sampler = uniform.sampler();
    let draws = 1_000_000;
    let mut counts = [0u64; 4];
    for _ in 0..draws {
        counts[sampler.draw_index(&mut rng)] += 1;
    }
    assert_frequencies(&counts, uniform.probabilities(), draws, 4.0);
}

#[test]
fn sampling_matches_exponential_distribution() {
    let uv = UtilityVector::from_values(vec![3.0, 1.0, 0.0, 0.0]).unwrap();
    let dist = exponential_distribution(&uv, &MechanismParams::unit(0.5).unwrap()).unwrap();
    let sampler = dist.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 1_000_000;
    let mut counts = [0u64; 4];
    for _ in 0..draws {
        counts[sampler.draw_index(&mut rng)] += 1;
    }
    assert_frequencies(&counts, dist.probabilities(), draws, 4.0);
}

#[test]
fn laplace_two_node_win_rate_matches_closed_form() {
    let uv = UtilityVector::from_values(vec![5.0, 0.0]).unwrap();
    let params = MechanismParams::unit(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trials = 1_000_000u64;
    let wins = (0..trials).filter(|_| laplace_recommend(&uv, &params, &mut rng).unwrap() == NodeId(0)).count();
    let p = laplace_two_node_win_prob(5.0, 0.0, 1.0).unwrap();
    assert_frequencies(&[wins as u64], &[p], trials, 3.0);
}

#[test]
fn closed_form_matches_paired_draws() {
    // ε = 0.5, d = 2, 10^7 paired draws
    let (eps, d) = (0.5, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = 10_000_000u64;
    let wins = (0..trials).filter(|_| d + laplace_noise(&mut rng, 1.0 / eps) > laplace_noise(&mut rng, 1.0 / eps)).count();
    let p = laplace_two_node_win_prob(d, 0.0, eps).unwrap();
    assert_frequencies(&[wins as u64], &[p], trials, 3.0);
}

#[test]
fn fast_path_is_equivalent_to_naive_path() {
    let mut values = vec![2.0];
    values.extend(std::iter::repeat(0.0).take(1000));
    let uv = UtilityVector::from_values(values).unwrap();
    let params = MechanismParams::unit(1.0).unwrap();
    let trials = 40_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fast = (0..trials).filter(|_| laplace_recommend(&uv, &params, &mut rng).unwrap() == NodeId(0)).count() as f64;
    let naive =
        (0..trials).filter(|_| laplace_recommend_naive(&uv, &params, &mut rng).unwrap() == NodeId(0)).count() as f64;
    // 2x2 contingency table: (path) x (nonzero node won)
    let t = trials as f64;
    let pooled = (fast + naive) / (2.0 * t);
    let expected_win = pooled * t;
    let expected_lose = (1.0 - pooled) * t;
    let chi2 = [(fast, expected_win), (naive, expected_win), (t - fast, expected_lose), (t - naive, expected_lose)]
        .iter()
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum::<f64>();
    let p_value = 1.0 - ChiSquared::new(1.0).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2 {chi2}, p {p_value}, fast {fast}, naive {naive}");
}

#[test]
fn fast_path_member_choice_is_uniform() {
    // three tied leaders: each should win a third of the time
    let uv = UtilityVector::from_values(vec![1.0, 4.0, 4.0, 0.0, 4.0]).unwrap();
    let params = MechanismParams::unit(2.0).unwrap();
    let exact = laplace_selection_probabilities(&uv, &params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let draws = 1_000_000u64;
    let mut counts = [0u64; 5];
    for _ in 0..draws {
        counts[laplace_recommend(&uv, &params, &mut rng).unwrap().index()] += 1;
    }
    assert_frequencies(&counts, exact.probabilities(), draws, 4.0);
}

#[test]
fn quadrature_matches_monte_carlo_on_four_candidates() {
    let uv = UtilityVector::from_values(vec![2.5, 1.0, 0.3, 0.0]).unwrap();
    let params = MechanismParams::unit(0.8).unwrap();
    let exact = laplace_selection_probabilities(&uv, &params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let draws = 10_000_000u64;
    let mut counts = [0u64; 4];
    for _ in 0..draws {
        counts[laplace_recommend_naive(&uv, &params, &mut rng).unwrap().index()] += 1;
    }
    assert_frequencies(&counts, exact.probabilities(), draws, 3.0);
}

#[test]
fn expected_accuracy_examples() {
    let uv = UtilityVector::from_values(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let argmax = argmax_distribution(&uv).unwrap();
    assert_eq!(expected_accuracy(&argmax, &uv).unwrap(), 1.0);
    let uniform = RecommendationDistribution::uniform(ids(4)).unwrap();
    assert_eq!(expected_accuracy(&uniform, &uv).unwrap(), 0.25);
    let zero = UtilityVector::from_values(vec![0.0; 4]).unwrap();
    assert!(expected_accuracy(&uniform, &zero).is_err());
}

fn utilities() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..20.0, (0u32..6).prop_map(f64::from)], 1..40)
}

proptest! {
    #[test]
    fn exponential_is_valid_and_monotone(values in utilities(), eps in 0.01f64..5.0) {
        let uv = UtilityVector::from_values(values.clone()).unwrap();
        let d = exponential_distribution(&uv, &MechanismParams::unit(eps).unwrap()).unwrap();
        let p = d.probabilities();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for i in 0..p.len() {
            prop_assert!(p[i] >= 0.0);
            for j in 0..p.len() {
                if values[i] >= values[j] {
                    prop_assert!(p[i] >= p[j]);
                }
            }
        }
    }

    #[test]
    fn smoothing_bounds_and_argmax(values in utilities(), eps in 0.01f64..3.0, x in 0.0f64..=1.0) {
        let uv = UtilityVector::from_values(values).unwrap();
        let base = exponential_distribution(&uv, &MechanismParams::unit(eps).unwrap()).unwrap();
        let smooth = linear_smoothing(&base, x).unwrap();
        let n = uv.len() as f64;
        let floor = (1.0 - x) / n;
        prop_assert!((smooth.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for (&p, &b) in smooth.probabilities().iter().zip(base.probabilities()) {
            prop_assert!(p >= floor - 1e-15 && p <= floor + x + 1e-15);
            prop_assert!((p - (floor + x * b)).abs() <= 1e-15);
        }
        if x > 0.0 {
            prop_assert_eq!(smooth.top(1)[0].0, base.top(1)[0].0);
        }
    }

    #[test]
    fn smoothing_keeps_x_gamma_of_normalized_utility(values in utilities(), eps in 0.01f64..3.0, x in 0.0f64..=1.0) {
        let total: f64 = values.iter().sum();
        prop_assume!(total > 0.0);
        let normalized: Vec<f64> = values.iter().map(|v| v / total).collect();
        let uv = UtilityVector::from_values(normalized.clone()).unwrap();
        let base = exponential_distribution(&uv, &MechanismParams::unit(eps).unwrap()).unwrap();
        let gamma: f64 = base.probabilities().iter().zip(&normalized).map(|(p, u)| p * u).sum();
        let smooth = linear_smoothing(&base, x).unwrap();
        let achieved: f64 = smooth.probabilities().iter().zip(&normalized).map(|(p, u)| p * u).sum();
        prop_assert!(achieved >= x * gamma - 1e-9);
    }

    #[test]
    // beyond n^{2c} ~ 1e8 the weight x rounds too close to 1 for 1 - x to carry 1e-9
    fn smoothing_parameter_round_trips(n in 2usize..100_000, c in 0.01f64..0.8) {
        let x = smoothing_param_for_privacy(c, n).unwrap();
        let eps = smoothing_privacy(x, n).unwrap();
        prop_assert!((eps - 2.0 * c * (n as f64).ln()).abs() <= 1e-9 * eps.max(1.0));
        let target = 0.3 * c;
        let y = smoothing_param_for_epsilon(target, n).unwrap();
        prop_assert!((smoothing_privacy(y, n).unwrap() - target).abs() <= 1e-9);
    }

    #[test]
    fn two_node_win_probability_is_monotone(d in 0.0f64..20.0, step in 1e-3f64..1.0, eps in 0.05f64..3.0) {
        let a = laplace_two_node_win_prob(d, 0.0, eps).unwrap();
        let b = laplace_two_node_win_prob(d + step, 0.0, eps).unwrap();
        prop_assert!(b >= a && a >= 0.5 && b <= 1.0);
        // depends on (ε, d) only through ε·d
        let c = laplace_two_node_win_prob(d * eps, 0.0, 1.0).unwrap();
        prop_assert!((a - c).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_probabilities_sum_to_one(values in proptest::collection::vec(0.0f64..6.0, 1..12), eps in 0.05f64..3.0) {
        let uv = UtilityVector::from_values(values).unwrap();
        let d = laplace_selection_probabilities(&uv, &MechanismParams::unit(eps).unwrap()).unwrap();
        prop_assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn sampling_is_deterministic_per_seed(seed in any::<u64>(), values in utilities()) {
        let uv = UtilityVector::from_values(values).unwrap();
        let params = MechanismParams::unit(0.7).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(seed);
        let mut b = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            prop_assert_eq!(laplace_recommend(&uv, &params, &mut a).unwrap(), laplace_recommend(&uv, &params, &mut b).unwrap());
        }
        prop_assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }
}
