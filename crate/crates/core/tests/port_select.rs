use fama_core::channel::{build_correlation, sample_drop, FasGeometry, LinkPowers};
use fama_core::phy::{self, SymbolBlock};
use fama_core::port_select::{
    candidate_set, deviation_probability, deviation_tail_bound, sdm_select, shortlist,
    ExactLimits, SelectionConfig, Shortlist, SpacingMode,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn min_gap(ports: &[usize]) -> usize {
    let mut p = ports.to_vec();
    p.sort_unstable();
    p.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(usize::MAX)
}

fn instance(seed: u64, k: usize, users: usize) -> (fama_core::channel::ChannelDrop, phy::PortObservations, FasGeometry) {
    let geometry = FasGeometry::new(k, 4.0).unwrap();
    let model = build_correlation(geometry).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drop = sample_drop(&model, users, 0, LinkPowers::default(), &mut rng).unwrap();
    let block = SymbolBlock::random(users, 1.0, &mut rng);
    let obs = phy::receive(&drop, &block, 0.1, &mut rng).unwrap();
    (drop, obs, geometry)
}

#[test]
fn deviation_probability_matches_monte_carlo() {
    // r ~ CN(m, σ²) with |m|² = P = 1, σ² = 1, Δ = 2: P(| |r|² − 1 | ≤ 2).
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 1_000_000;
    let mut hits = 0u64;
    for _ in 0..n {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        let r = Complex64::new(1.0 + re / 2f64.sqrt(), im / 2f64.sqrt());
        hits += u64::from((r.norm_sqr() - 1.0).abs() <= 2.0);
    }
    let p_hat = hits as f64 / n as f64;
    let p = deviation_probability(2.0, 1.0, 1.0).unwrap();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((p - p_hat).abs() < 3.0 * se, "{p} vs {p_hat}");
    // The tail form is a different quantity and is decreasing in Δ.
    assert!(deviation_tail_bound(3.0, 1.0, 1.0).unwrap() < deviation_tail_bound(2.0, 1.0, 1.0).unwrap());
}

#[test]
fn greedy_spreads_ports() {
    let ranked = Shortlist {
        ports: (0..60).rev().collect(),
        deviations: (0..60).map(f64::from).collect(),
    };
    let geo = FasGeometry::new(60, 10.0).unwrap();
    let greedy = ExactLimits { max_candidates: 0, max_k_sel: 0 };
    let out = sdm_select(&ranked, 4, &geo, greedy).unwrap();
    assert_eq!(out.len(), 4);
    // Optimal is 19 (0, 20, 40, 59); insertion gives 0, 59, then 30, then 15.
    assert!(min_gap(&out.ports) >= 15, "{:?}", out.ports);
    let exact = sdm_select(&ranked, 4, &geo, ExactLimits { max_candidates: 60, max_k_sel: 4 }).unwrap();
    assert_eq!(min_gap(&exact.ports), 19);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deviation_probability_is_a_monotone_probability(
        p in 0.01f64..10.0, s2 in 0.01f64..10.0, d1 in 0.0f64..20.0, d2 in 0.0f64..20.0,
    ) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let a = deviation_probability(lo, p, s2).unwrap();
        let b = deviation_probability(hi, p, s2).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a <= b + 1e-12);
    }

    #[test]
    fn shortlist_invariant_to_common_phase_and_scale(
        seed in any::<u64>(), theta in 0.0f64..std::f64::consts::TAU, scale in 0.5f64..4.0,
        k_sel in 1usize..6,
    ) {
        let (drop, obs, geo) = instance(seed, 24, 5);
        let cfg = SelectionConfig::new(k_sel, 0.3, SpacingMode::Sdm).unwrap();
        let base = shortlist(&obs, drop.desired_gains(), 1.0, &cfg, &geo).unwrap();
        // Rotate everything; scale gains and observations by √c and the
        // symbol power stays: deviations are ratios, so |r|²/|g|² is
        // unchanged when both scale alike.
        let rot = Complex64::from_polar(scale.sqrt(), theta);
        let gains: Vec<Complex64> = drop.desired_gains().iter().map(|g| g * rot).collect();
        let mut obs2 = obs.clone();
        for r in obs2.received.iter_mut() {
            *r *= rot;
        }
        let moved = shortlist(&obs2, &gains, 1.0, &cfg, &geo).unwrap();
        prop_assert_eq!(base.ports, moved.ports);
    }

    #[test]
    fn candidates_shrink_as_threshold_rises(seed in any::<u64>(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (drop, _, _) = instance(seed, 30, 1);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let wide = candidate_set(drop.desired_gains(), lo).unwrap();
        let narrow = candidate_set(drop.desired_gains(), hi).unwrap();
        prop_assert!(narrow.iter().all(|k| wide.contains(k)));
        prop_assert!(!narrow.is_empty());
    }

    #[test]
    fn shortlist_size_and_membership(
        seed in any::<u64>(), k_sel in 1usize..12, gamma in 0.01f64..0.99, mode in 0usize..3,
    ) {
        let (drop, obs, geo) = instance(seed, 40, 6);
        let spacing = [SpacingMode::Sdm, SpacingMode::Fixed(0.05), SpacingMode::None][mode];
        let cfg = SelectionConfig::new(k_sel, gamma, spacing).unwrap();
        let out = shortlist(&obs, drop.desired_gains(), 1.0, &cfg, &geo).unwrap();
        let cand = candidate_set(drop.desired_gains(), gamma).unwrap();
        prop_assert!(!out.is_empty() && out.len() <= k_sel);
        prop_assert!(out.ports.iter().all(|p| cand.contains(p)));
        prop_assert!(out.deviations.windows(2).all(|w| w[0] <= w[1]));
        if let SpacingMode::Fixed(_) = spacing {
            prop_assert!(min_gap(&out.ports) >= 2);
        }
    }

    #[test]
    fn greedy_is_within_half_of_exact(
        ports in prop::collection::btree_set(0usize..200, 6..16), k_sel in 2usize..5,
    ) {
        let ports: Vec<usize> = ports.into_iter().collect();
        let ranked = Shortlist { deviations: vec![0.0; ports.len()], ports };
        let geo = FasGeometry::new(200, 20.0).unwrap();
        let exact = sdm_select(&ranked, k_sel, &geo, ExactLimits::default()).unwrap();
        let greedy = sdm_select(&ranked, k_sel, &geo, ExactLimits { max_candidates: 0, max_k_sel: 0 }).unwrap();
        prop_assert!(2 * min_gap(&greedy.ports) >= min_gap(&exact.ports));
    }
}
