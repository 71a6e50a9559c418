use memchan::channel::{amplitude_damping, choi_distance, random_unitary_channel, unital_monotonicity_harness};
use memchan::matrix::{partial_trace, tensor};
use memchan::random::{random_state, random_unitary, rng_from_seed};
use memchan::state::{relative_entropy, von_neumann_entropy};
use memchan::{DensityOperator, MemoryDevice, ProductSpace, RandomUnitarySpec, Record};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4).prop_filter("nontrivial", |(a, b)| a * b >= 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), a in 1usize..=3, b in 1usize..=3, c in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let (x, y, z) = (random_state(a, &mut rng), random_state(b, &mut rng), random_state(c, &mut rng));
        let left = tensor(&tensor(x.matrix(), y.matrix()), z.matrix());
        let right = tensor(x.matrix(), &tensor(y.matrix(), z.matrix()));
        prop_assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn entropy_is_additive_on_products(seed in any::<u64>(), (a, b) in dims()) {
        let mut rng = rng_from_seed(seed);
        let (x, y) = (random_state(a, &mut rng), random_state(b, &mut rng));
        let joint = von_neumann_entropy(&x.tensor(&y));
        prop_assert!((joint - von_neumann_entropy(&x) - von_neumann_entropy(&y)).abs() < 1e-9);
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), d in 2usize..=6) {
        let mut rng = rng_from_seed(seed);
        let rho = random_state(d, &mut rng);
        let u = random_unitary(d, &mut rng);
        prop_assert!((von_neumann_entropy(&u.conjugate(&rho)) - von_neumann_entropy(&rho)).abs() < 1e-9);
    }

    #[test]
    fn entropy_is_subadditive(seed in any::<u64>(), (a, b) in dims()) {
        let mut rng = rng_from_seed(seed);
        let joint = random_state(a * b, &mut rng);
        let space = ProductSpace::memory_system(a, b).unwrap();
        let ra = DensityOperator::new(partial_trace(joint.matrix(), &space, 0).unwrap(), 1e-9).unwrap();
        let rb = DensityOperator::new(partial_trace(joint.matrix(), &space, 1).unwrap(), 1e-9).unwrap();
        let gap = von_neumann_entropy(&ra) + von_neumann_entropy(&rb) - von_neumann_entropy(&joint);
        prop_assert!(gap >= -1e-9);
    }

    #[test]
    fn kraus_and_choi_agree(seed in any::<u64>(), d in 2usize..=4, terms in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let ch = random_unitary_channel(&RandomUnitarySpec::random(d, terms, &mut rng));
        let rho = random_state(d, &mut rng);
        let via_kraus = ch.apply_matrix(rho.matrix()).unwrap();
        let via_choi = ch.to_choi().apply_matrix(rho.matrix()).unwrap();
        prop_assert!(via_kraus.max_abs_diff(&via_choi) < 1e-12);
    }

    #[test]
    fn choi_round_trips_through_kraus(seed in any::<u64>(), (dm, ds) in dims()) {
        let mut rng = rng_from_seed(seed);
        let dev = MemoryDevice::new(random_unitary(dm * ds, &mut rng), dm, ds, random_state(dm, &mut rng)).unwrap();
        let choi = dev.induced_channel().to_choi();
        let back = choi.to_kraus(1e-12).unwrap().to_choi();
        prop_assert!(choi_distance(&choi, &back).unwrap() < 1e-9);
    }
}

#[test]
fn relative_entropy_is_nonnegative_on_1000_pairs() {
    let mut rng = rng_from_seed(17);
    for _ in 0..1000 {
        let d = 2 + (rand::Rng::random_range(&mut rng, 0..3));
        let rho = random_state(d, &mut rng);
        let omega = random_state(d, &mut rng);
        let s = relative_entropy(&rho, &omega, 1e-9).unwrap();
        assert!(s >= 0.0, "{s}");
        assert!(relative_entropy(&rho, &rho, 1e-9).unwrap() < 1e-9);
    }
}

#[test]
fn unital_channels_do_not_lower_entropy() {
    let mut rng = rng_from_seed(5);
    for d in 2..=4 {
        let ch = random_unitary_channel(&RandomUnitarySpec::random(d, 3, &mut rng));
        let report = unital_monotonicity_harness(&ch, 200, 11, 1e-9).unwrap();
        assert!(report.passed(), "{report:?}");
    }
    let err = unital_monotonicity_harness(&amplitude_damping(0.5).unwrap(), 10, 1, 1e-9);
    assert!(err.is_err());
}

#[test]
fn induced_channel_predicts_each_output() {
    let mut rng = rng_from_seed(99);
    for _ in 0..50 {
        let (dm, ds) = (2 + rand::Rng::random_range(&mut rng, 0..2), 2);
        let dev = MemoryDevice::new(random_unitary(dm * ds, &mut rng), dm, ds, random_state(dm, &mut rng)).unwrap();
        let inputs: Vec<DensityOperator> = (0..20).map(|_| random_state(ds, &mut rng)).collect();
        let t = dev.run_sequence(&inputs, Record::default()).unwrap();
        for k in 0..t.len() {
            let predicted = t.induced_channels[k].apply(&t.inputs[k]).unwrap();
            assert!(predicted.matrix().max_abs_diff(t.outputs[k].matrix()) < 1e-12);
        }
        assert!(t.chain_residual(dev.unitary()).unwrap() < 1e-12);
    }
}
