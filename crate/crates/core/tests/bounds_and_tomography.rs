use memchan::channel::{amplitude_damping, choi_distance, entropy_deficit};
use memchan::random::{random_pure_state, random_unitary, rng_from_seed};
use memchan::repeatability::{
    check_repeatable, controlled_u_device, entropy_chain_check, repeatability_bound, stinespring_device, InputSource,
    DEFAULT_THRESHOLD,
};
use memchan::tomography::{compare_strategies, run_tomography, Mode, ProbeStrategy, Reconstruction};
use memchan::{DensityOperator, MemoryDevice, RandomUnitarySpec, Record};

fn sampled_error(shots: usize, seeds: std::ops::Range<u64>) -> f64 {
    let ch = amplitude_damping(0.3).unwrap();
    let exact = ch.to_choi();
    let total: f64 = seeds
        .clone()
        .map(|seed| {
            let strategy = ProbeStrategy { seed, ..ProbeStrategy::sequential(shots) };
            let est = run_tomography(&ch, strategy, Mode::Sampled, Reconstruction::default()).unwrap();
            choi_distance(&est.choi, &exact).unwrap()
        })
        .sum();
    total / seeds.count() as f64
}

#[test]
fn sampled_error_shrinks_like_inverse_square_root() {
    let coarse = sampled_error(100, 0..20);
    let fine = sampled_error(10_000, 0..20);
    let ratio = coarse / fine;
    assert!((10.0 / 3.0..=30.0).contains(&ratio), "coarse {coarse} fine {fine} ratio {ratio}");
}

#[test]
fn repeatable_device_gives_same_estimate_for_both_orderings() {
    let cu = controlled_u_device(&RandomUnitarySpec::dephasing(0.25).unwrap(), None, 1e-9).unwrap();
    let c = compare_strategies(cu.device(), 50, 3, Mode::Exact, Reconstruction::default()).unwrap();
    assert!(c.inter_estimate_distance < 1e-9, "{}", c.inter_estimate_distance);
    let target = cu.target().to_choi();
    assert!(choi_distance(&c.sequential.choi, &target).unwrap() < 1e-9);
}

#[test]
fn nonunital_devices_deviate_within_the_bound() {
    let mut rng = rng_from_seed(2024);
    let mixed = DensityOperator::maximally_mixed(2);
    let mut checked = 0;
    for _ in 0..40 {
        let dev = MemoryDevice::new(random_unitary(4, &mut rng), 2, 2, random_pure_state(2, &mut rng)).unwrap();
        let first = dev.induced_channel();
        let bound = repeatability_bound(&first, 2, 1e-9).unwrap();
        let Some(n_max) = bound.n_max_mixture.value() else { continue };
        let n = n_max as usize + 1;
        let report = check_repeatable(&dev, &first, n, &InputSource::Fixed(mixed.clone()), DEFAULT_THRESHOLD).unwrap();
        let step = report.first_deviating_step.expect("a finite memory cannot repeat past the bound");
        assert!(step <= n, "step {step}, n_max {n_max}");
        checked += 1;
    }
    assert!(checked >= 30);
}

#[test]
fn amplitude_damping_dilation_saturates_memory_entropy() {
    let ad = amplitude_damping(0.5).unwrap();
    let dev = stinespring_device(&ad).unwrap();
    let delta = entropy_deficit(&ad, &DensityOperator::maximally_mixed(2)).unwrap();
    let t = dev.run_sequence(&vec![DensityOperator::maximally_mixed(2); 6], Record::default()).unwrap();
    let report = entropy_chain_check(&t, 2).unwrap();
    assert!(report.passed);
    assert!(report.constant_input);
    assert!((report.first_step_deficit.unwrap() - delta).abs() < 1e-12);
    let gain = report.prefixes.last().unwrap().memory_entropy_gain;
    assert!(gain <= 1.0 + 1e-9);
}

#[test]
fn tampered_transcript_fails_the_audit() {
    let ad = amplitude_damping(0.5).unwrap();
    let dev = stinespring_device(&ad).unwrap();
    let mut t = dev.run_sequence(&vec![DensityOperator::maximally_mixed(2); 4], Record::states_only()).unwrap();
    assert!(entropy_chain_check(&t, 2).unwrap().passed);
    t.outputs[2] = DensityOperator::basis(2, 0);
    let report = entropy_chain_check(&t, 2).unwrap();
    assert!(!report.passed);
    assert_eq!(report.first_violation, Some(3));
}
