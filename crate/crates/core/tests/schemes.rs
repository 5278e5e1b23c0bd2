use fama_core::channel::{build_correlation, sample_drop, FasGeometry, LinkPowers};
use fama_core::phy::{self, SymbolBlock};
use fama_core::schemes::{
    fast_fama_select, fast_fama_select_by_ratio, mrc_combine, process_symbol, run_symbol,
    ReceiverScheme,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn mrc_output_snr_is_sum_of_port_snrs() {
    // For a fixed single-user drop, y = Σ|g|²s + Σ conj(g)η has output SNR
    // Σ|g|²·σ_s²/σ_η², which is at least the best port's |g|²σ_s²/σ_η².
    let geo = FasGeometry::new(8, 0.5).unwrap();
    let model = build_correlation(geo).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let drop = sample_drop(&model, 1, 0, LinkPowers::default(), &mut rng).unwrap();
    let energy: f64 = drop.desired_gains().iter().map(|g| g.norm_sqr()).sum();
    let best = drop.desired_gains().iter().map(|g| g.norm_sqr()).fold(0.0, f64::max);
    let noise_power = 0.5;
    let n = 40_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let block = SymbolBlock::random(1, 1.0, &mut rng);
        let obs = phy::receive(&drop, &block, noise_power, &mut rng).unwrap();
        let out = process_symbol(&ReceiverScheme::AllPortMrc, &drop, &block, &obs, &geo).unwrap();
        acc += (out.combined - block.symbols[0] * energy).norm_sqr();
    }
    let snr = energy * energy / (acc / n as f64);
    let want = energy / noise_power;
    assert!((snr / want - 1.0).abs() < 0.05, "{snr} vs {want}");
    assert!(snr >= 0.95 * best / noise_power);
}

#[test]
fn noiseless_single_user_never_errs() {
    let geo = FasGeometry::new(16, 2.0).unwrap();
    let model = build_correlation(geo).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..2000 {
        let drop = sample_drop(&model, 1, 0, LinkPowers::default(), &mut rng).unwrap();
        let block = SymbolBlock::random(1, 1.0, &mut rng);
        for scheme in [ReceiverScheme::AllPortMrc, ReceiverScheme::FastFamaOracle] {
            let out = run_symbol(&scheme, &drop, &block, 0.0, &geo, &mut rng).unwrap();
            assert_eq!(out.detected, block.dibits[0]);
        }
    }
}

#[test]
fn fast_fama_combined_is_single_port_mrc() {
    let geo = FasGeometry::new(10, 1.0).unwrap();
    let model = build_correlation(geo).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let drop = sample_drop(&model, 3, 0, LinkPowers::default(), &mut rng).unwrap();
    let block = SymbolBlock::random(3, 1.0, &mut rng);
    let obs = phy::receive(&drop, &block, 0.2, &mut rng).unwrap();
    let out = process_symbol(&ReceiverScheme::FastFamaOracle, &drop, &block, &obs, &geo).unwrap();
    let k = out.ports[0];
    let want = mrc_combine(&obs, drop.desired_gains(), &[k], 1.0).unwrap();
    assert_eq!(out.combined, want);
    assert_eq!(out.combined, drop.desired_gains()[k].conj() * obs.received[k]);
}

proptest! {
    #[test]
    fn sinr_and_ratio_pick_the_same_port(seed in any::<u64>(), users in 1usize..12) {
        let model = build_correlation(FasGeometry::new(30, 3.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let drop = sample_drop(&model, users, 0, LinkPowers::default(), &mut rng).unwrap();
        let block = SymbolBlock::random(users, 1.0, &mut rng);
        let obs = phy::receive(&drop, &block, 0.1, &mut rng).unwrap();
        prop_assert_eq!(
            fast_fama_select(&drop, &block, &obs.noise).unwrap(),
            fast_fama_select_by_ratio(&drop, &block, &obs.noise).unwrap()
        );
    }

    #[test]
    fn mrc_ignores_port_order(seed in any::<u64>(), pick in prop::collection::vec(0usize..12, 1..8)) {
        let model = build_correlation(FasGeometry::new(12, 1.5).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let drop = sample_drop(&model, 2, 0, LinkPowers::default(), &mut rng).unwrap();
        let block = SymbolBlock::random(2, 1.0, &mut rng);
        let obs = phy::receive(&drop, &block, 0.1, &mut rng).unwrap();
        let mut rev = pick.clone();
        rev.reverse();
        let a = mrc_combine(&obs, drop.desired_gains(), &pick, 1.0).unwrap();
        let b = mrc_combine(&obs, drop.desired_gains(), &rev, 1.0).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.is_finite());
    }
}
