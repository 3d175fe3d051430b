use permatch_core::eperpf::{
    canonicalize_allocation, check_allocation, log_eperpf, log_eppf, log_predictive_total, predictive_weights,
    predictive_weights_from_eppf, sample_pa_gcrp, uniform_given_partition, EperpfFamily,
};
use permatch_core::oracle::{eperpf_probability, enumerate_permutations, exact_prior_table};
use permatch_core::Permutation;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_family() -> impl Strategy<Value = EperpfFamily<f64>> {
    prop_oneof![
        (0.05f64..20.0).prop_map(|theta| EperpfFamily::Dirichlet { theta }),
        (0.02f64..0.98).prop_map(|discount| EperpfFamily::NormalizedStable { discount }),
        (0.05f64..20.0, 0.02f64..0.98).prop_map(|(theta, discount)| EperpfFamily::PitmanYor { theta, discount }),
        (0.02f64..0.98).prop_map(|gamma| EperpfFamily::Gnedin { gamma }),
    ]
}

fn arb_lengths() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..8, 0..7)
}

#[test]
fn dirichlet_one_is_uniform() {
    let fam = EperpfFamily::Dirichlet { theta: 1.0 };
    for n in 1..=6 {
        let expect = -(1..=n).map(|i| (i as f64).ln()).sum::<f64>();
        for pi in enumerate_permutations(n).unwrap() {
            assert!((log_eperpf(&fam, &pi).unwrap() - expect).abs() < 1e-12);
        }
    }
    let table = exact_prior_table(&fam, 4).unwrap();
    for pi in enumerate_permutations(4).unwrap() {
        assert!((table.prob(&pi) - 1.0 / 24.0).abs() < 1e-15);
    }
}

#[test]
fn gnedin_table_normalizes() {
    let table = exact_prior_table(&EperpfFamily::Gnedin { gamma: 0.5 }, 5).unwrap();
    assert!((table.total() - 1.0).abs() < 1e-10);
}

#[test]
fn same_cycle_type_same_mass() {
    let a = Permutation::parse_cycles("(143)(2)", 4).unwrap();
    let b = Permutation::parse_cycles("(1)(234)", 4).unwrap();
    for fam in [
        EperpfFamily::Dirichlet { theta: 2.0 },
        EperpfFamily::NormalizedStable { discount: 0.5 },
        EperpfFamily::PitmanYor { theta: 1.0, discount: 0.5 },
        EperpfFamily::Gnedin { gamma: 0.3 },
    ] {
        assert_eq!(log_eperpf(&fam, &a).unwrap(), log_eperpf(&fam, &b).unwrap());
    }
}

#[test]
fn invalid_parameters_rejected() {
    let bad = [
        EperpfFamily::Dirichlet { theta: 0.0 },
        EperpfFamily::NormalizedStable { discount: 1.0 },
        EperpfFamily::PitmanYor { theta: 1.0, discount: 0.0 },
        EperpfFamily::Gnedin { gamma: 1.5 },
    ];
    for fam in bad {
        assert!(log_eppf(&fam, &[1, 2]).is_err());
    }
    assert!(log_eppf(&EperpfFamily::Dirichlet { theta: 1.0 }, &[]).is_err());
}

#[test]
fn allocation_helpers() {
    assert_eq!(check_allocation(&[0, 0, 1, 0, 2]).unwrap(), 3);
    assert!(check_allocation(&[1, 0]).is_err());
    assert_eq!(canonicalize_allocation(&[5, 5, 2, 5, 9]), vec![0, 0, 1, 0, 2]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(uniform_given_partition(&[0, 1, 2], &mut rng).unwrap().is_identity());
}

#[test]
fn uniform_given_partition_is_uniform() {
    // block {0,1,2,3}: 3! = 6 cyclic arrangements, each 1/6
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts = std::collections::HashMap::new();
    let draws = 60_000;
    for _ in 0..draws {
        let p = uniform_given_partition(&[0, 0, 0, 0, 1], &mut rng).unwrap();
        assert_eq!(p.allocation(), vec![0, 0, 0, 0, 1]);
        *counts.entry(p.one_line()).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 6);
    for c in counts.values() {
        assert!((*c as f64 / draws as f64 - 1.0 / 6.0).abs() < 0.01);
    }
}

#[test]
fn forward_draw_size_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fam = EperpfFamily::PitmanYor { theta: 1.0, discount: 0.5 };
    assert!(sample_pa_gcrp(&fam, 1, &mut rng).unwrap().is_identity());
    assert!(sample_pa_gcrp(&fam, 0, &mut rng).is_err());
}

proptest! {
    #[test]
    fn eperpf_matches_independent_formula(fam in arb_family(), lengths in prop::collection::vec(1usize..6, 1..5)) {
        let p = permatch_core::eperpf::log_eperpf_lengths(&fam, &lengths).unwrap().exp();
        let q = eperpf_probability(&fam, &lengths);
        prop_assert!((p - q).abs() <= 1e-10 * q.max(1e-300), "{p} vs {q}");
    }

    #[test]
    fn predictive_weights_sum_to_one(fam in arb_family(), lengths in arb_lengths()) {
        let w = predictive_weights(&fam, &lengths).unwrap();
        prop_assert!(log_predictive_total(&w, &lengths).abs() < 1e-10);
        prop_assert!((w.total(&lengths) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_predictive_matches_eppf_ratio(fam in arb_family(), lengths in prop::collection::vec(1usize..8, 1..6)) {
        let a = predictive_weights(&fam, &lengths).unwrap();
        let b = predictive_weights_from_eppf(&fam, &lengths).unwrap();
        for (x, y) in a.per_cycle.iter().zip(&b.per_cycle) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((a.new_cycle - b.new_cycle).abs() < 1e-9);
    }

    #[test]
    fn eppf_is_symmetric(fam in arb_family(), mut lengths in prop::collection::vec(1usize..8, 1..6)) {
        let a = log_eppf(&fam, &lengths).unwrap();
        lengths.reverse();
        prop_assert!((a - log_eppf(&fam, &lengths).unwrap()).abs() < 1e-10);
    }
}
