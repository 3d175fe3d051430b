use std::collections::{HashMap, HashSet};

use permatch_core::csbm::{AdjacencyMatrix, Graphs, Hyperparameters};
use permatch_core::eperpf::EperpfFamily;
use permatch_core::oracle::{
    cayley_bfs, enumerate_permutations, exact_posterior_table, exact_prior_table, MAX_BFS, MAX_ENUMERATION,
};
use permatch_core::summarize::frobenius_discrepancy;
use permatch_core::Permutation;

#[test]
fn enumeration_counts() {
    assert_eq!(enumerate_permutations(1).unwrap(), vec![Permutation::identity(1)]);
    assert_eq!(enumerate_permutations(3).unwrap().len(), 6);
    let five = enumerate_permutations(5).unwrap();
    let distinct: HashSet<Vec<usize>> = five.iter().map(|p| p.one_line()).collect();
    assert_eq!((five.len(), distinct.len()), (120, 120));
    assert!(enumerate_permutations(MAX_ENUMERATION + 1).is_err());
}

#[test]
fn prior_tables() {
    let t = exact_prior_table(&EperpfFamily::PitmanYor { theta: 2.0, discount: 0.5 }, 1).unwrap();
    assert!((t.prob(&Permutation::identity(1)) - 1.0).abs() < 1e-15);
    let csv = exact_prior_table(&EperpfFamily::Dirichlet { theta: 1.0 }, 3).unwrap().to_csv();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn bfs_small_cases() {
    let p = Permutation::parse_cycles("(123)(45)", 5).unwrap();
    assert_eq!(cayley_bfs(&p, &p).unwrap(), 0);
    let id = Permutation::identity(4);
    let swap = Permutation::parse_cycles("(1)(23)(4)", 4).unwrap();
    assert_eq!(cayley_bfs(&id, &swap).unwrap(), 1);
    assert!(cayley_bfs(&Permutation::identity(MAX_BFS + 1), &Permutation::identity(MAX_BFS + 1)).is_err());
}

#[test]
fn identical_graphs_favor_exact_alignment() {
    let mut g = AdjacencyMatrix::zeros(4);
    g.set(0, 1, true);
    g.set(1, 2, true);
    g.set(0, 3, true);
    let graphs = Graphs::new(g.clone(), g).unwrap();
    let hyper = Hyperparameters { a0: 1.0, b0: 50.0, a1: 1.0, b1: 50.0, a_xi: 1.0, b_xi: 1.0 };
    let table = exact_posterior_table(&graphs, &EperpfFamily::Dirichlet { theta: 1.0 }, &hyper).unwrap();
    let mode = enumerate_permutations(4)
        .unwrap()
        .into_iter()
        .max_by(|a, b| table.prob(a).total_cmp(&table.prob(b)))
        .unwrap();
    assert_eq!(frobenius_discrepancy(&graphs, &mode).unwrap(), 0.0);
}

#[test]
fn empty_graphs_give_class_constant_posterior() {
    let graphs = Graphs::new(AdjacencyMatrix::zeros(4), AdjacencyMatrix::zeros(4)).unwrap();
    let table =
        exact_posterior_table(&graphs, &EperpfFamily::Gnedin { gamma: 0.6 }, &Hyperparameters::default()).unwrap();
    let mut by_type: HashMap<Vec<usize>, f64> = HashMap::new();
    for pi in enumerate_permutations(4).unwrap() {
        let p = table.prob(&pi);
        let first = *by_type.entry(pi.cycles().t).or_insert(p);
        assert!((first - p).abs() < 1e-12 * first);
    }
    assert!((table.total() - 1.0).abs() < 1e-10);
}
