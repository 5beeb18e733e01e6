use qmak_core::merlin::{adversary_concentrated, adversary_phased, honest_bundle, random_support};
use qmak_core::reduction::{measure_gap, reduce_full, ReductionOptions};
use qmak_core::rng::{seeded, trial_rng};
use qmak_core::sat::{brute_force_max_sat, random_3sat, Assignment, Literal, ThreeSatInstance};
use qmak_core::state::proper_state;
use qmak_core::verifier::{
    default_k, partition_blocks, run_protocol, satisfiability_test_exact, satisfiability_test_exact_proper, Branch,
    DEFAULT_BETA,
};

fn complete_unsat() -> ThreeSatInstance {
    let clauses = (0..8u32)
        .map(|m| {
            core::array::from_fn(|i| Literal {
                var: i,
                negated: (m >> i) & 1 == 1,
            })
        })
        .collect();
    ThreeSatInstance::new(3, clauses).unwrap()
}

#[test]
fn honest_prover_always_accepted() {
    let mut found = 0;
    for seed in 0..200 {
        let inst = random_3sat(8, 20, seed).unwrap();
        let best = brute_force_max_sat(&inst, 24).unwrap();
        if best.satisfied != best.total {
            continue;
        }
        let cert = reduce_full(&inst, &ReductionOptions::default()).unwrap();
        let lifted = cert.lift(&best.assignment).unwrap();
        let part = partition_blocks(&cert.target);
        let n = cert.target.num_vars();
        let s = proper_state(&lifted, n).unwrap();
        assert_eq!(satisfiability_test_exact(&s, &cert.target, &part).unwrap(), 1.0);
        let (num, den) = satisfiability_test_exact_proper(&lifted, &cert.target, &part).unwrap();
        assert_eq!(num, den);
        let bundle = honest_bundle(&lifted, default_k(n, DEFAULT_BETA)).unwrap();
        for t in 0..300 {
            let r = run_protocol(&bundle, &cert.target, &part, &mut trial_rng(seed, t)).unwrap();
            assert!(r.accepted(), "{r:?}");
        }
        found += 1;
        if found == 5 {
            break;
        }
    }
    assert_eq!(found, 5);
}

#[test]
fn unsatisfiable_source_has_positive_gap() {
    let cert = reduce_full(&complete_unsat(), &ReductionOptions::default()).unwrap();
    cert.validate().unwrap();
    let gap = measure_gap(&cert, 30).unwrap();
    assert_eq!(gap, 1.0 / 16.0);
    // No proper state passes the Satisfiability Test with certainty.
    let part = partition_blocks(&cert.target);
    let mut rng = seeded(1);
    for _ in 0..50 {
        let bits = (0..cert.target.num_vars())
            .map(|_| rand::Rng::random(&mut rng))
            .collect();
        let (num, den) = satisfiability_test_exact_proper(&Assignment::new(bits), &cert.target, &part).unwrap();
        assert!(num < den);
    }
}

#[test]
fn cheaters_caught_by_uniformity() {
    let n = 64;
    let k = default_k(n, DEFAULT_BETA);
    let inst = random_3sat(6, 10, 3).unwrap();
    let cert = reduce_full(
        &inst,
        &ReductionOptions {
            pad_to: Some(n),
            ..Default::default()
        },
    )
    .unwrap();
    let part = partition_blocks(&cert.target);
    let mut rng = seeded(2);
    let support = random_support(n, n / 2, &mut rng).unwrap();
    let bundles = [
        adversary_concentrated(n, &support, k, &mut rng).unwrap(),
        adversary_phased(&Assignment::zeros(n), core::f64::consts::FRAC_PI_2, k, &mut rng).unwrap(),
    ];
    for b in &bundles {
        let mut rejected = 0;
        for t in 0..3000 {
            let r = run_protocol(b, &cert.target, &part, &mut trial_rng(7, t)).unwrap();
            if r.branch() == Branch::Uniformity && !r.accepted() {
                rejected += 1;
            }
        }
        assert!(rejected > 0);
    }
}
