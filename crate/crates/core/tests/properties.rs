use std::collections::BTreeSet;

use dnmf_core::corpus::CooccurrenceTable;
use dnmf_core::dnmf::{
    bdnmf_step, cdnmf_step, nmf_step, objective, sdnmf_step, solve, Algo, FactorRefs, SolverConfig,
    MONOTONE_SLACK, ROUNDOFF_FLOOR,
};
use dnmf_core::eval::{
    clustering_accuracy, coherence, similarity_count, top_words, PairMode, TopicWords,
};
use dnmf_core::numerics::{derive_seed, seeded_uniform_fill, stream, DenseMatrix, SparseMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn positive(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    seeded_uniform_fill(rows, cols, seed, 1e-3, 1.0).unwrap()
}

fn symmetric(n: usize, seed: u64) -> DenseMatrix {
    let m = positive(n, n, seed);
    m.add(&m.transpose()).unwrap()
}

/// Random nonnegative data with roughly a third of the entries zero.
fn data(v: usize, n: usize, seed: u64) -> SparseMatrix {
    let m = positive(v, n, seed).map(|x| if x < 0.33 { 0.0 } else { x });
    SparseMatrix::from_dense(&m).unwrap()
}

fn one_hot(k: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = stream(seed);
    let labels: Vec<usize> = (0..n)
        .map(|j| if j < k { j } else { rng.random_range(0..k) })
        .collect();
    DenseMatrix::from_fn(k, n, |r, j| if labels[j] == r { 1.0 } else { 0.0 })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn small_instance() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..=10, 4usize..=14, 2usize..=4, any::<u64>())
}

proptest! {
    #[test]
    fn matmul_is_associative(n in 1usize..=6, m in 1usize..=6, p in 1usize..=6, q in 1usize..=6, seed: u64) {
        let a = positive(n, m, derive_seed(seed, &[0]));
        let b = positive(m, p, derive_seed(seed, &[1]));
        let c = positive(p, q, derive_seed(seed, &[2]));
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        for (x, y) in left.as_slice().iter().zip(right.as_slice()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn hadamard_commutes(n in 1usize..=6, m in 1usize..=6, seed: u64) {
        let a = positive(n, m, derive_seed(seed, &[0]));
        let b = positive(n, m, derive_seed(seed, &[1]));
        prop_assert_eq!(a.hadamard(&b).unwrap(), b.hadamard(&a).unwrap());
    }

    #[test]
    fn frobenius_is_trace_of_gram(seed: u64) {
        let a = positive(5, 5, seed);
        let t = a.tr_matmul(&a).unwrap().trace().unwrap();
        prop_assert!(close(a.frobenius_sq(), t, 1e-10));
    }

    #[test]
    fn sparse_products_match_dense(v in 1usize..=8, n in 1usize..=8, k in 1usize..=4, seed: u64) {
        let d = data(v, n, derive_seed(seed, &[0]));
        let dd = d.to_dense();
        let x = positive(n, k, derive_seed(seed, &[1]));
        let a = positive(v, k, derive_seed(seed, &[2]));
        let p1 = d.matmul_dense(&x).unwrap();
        let p2 = dd.matmul(&x).unwrap();
        let q1 = d.left_tr_matmul(&a).unwrap();
        let q2 = a.tr_matmul(&dd).unwrap();
        for (x, y) in p1.as_slice().iter().zip(p2.as_slice()).chain(q1.as_slice().iter().zip(q2.as_slice())) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trace_inequality(n in 1usize..=6, k in 1usize..=6, seed: u64) {
        let a = symmetric(n, derive_seed(seed, &[0]));
        let b = symmetric(k, derive_seed(seed, &[1]));
        let e = positive(n, k, derive_seed(seed, &[2]));
        let e2 = positive(n, k, derive_seed(seed, &[3]));
        let ae2b = a.matmul(&e2).unwrap().matmul(&b).unwrap();
        let lhs: f64 = (0..n * k)
            .map(|i| ae2b.as_slice()[i] * e.as_slice()[i].powi(2) / e2.as_slice()[i])
            .sum();
        let rhs = e.tr_matmul(&a.matmul(&e).unwrap().matmul(&b).unwrap()).unwrap().trace().unwrap();
        prop_assert!(lhs >= rhs * (1.0 - 1e-12), "{} < {}", lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn steps_preserve_nonnegativity((v, n, k, seed) in small_instance()) {
        let d = data(v, n, derive_seed(seed, &[0]));
        let f = one_hot(k, n, derive_seed(seed, &[1]));
        let c = positive(v, k, derive_seed(seed, &[2]));
        let w = positive(k, n, derive_seed(seed, &[3]));
        let t = positive(k, n, derive_seed(seed, &[4]));
        let tk = positive(k, k, derive_seed(seed, &[5]));
        let (c1, w1) = nmf_step(&c, &w, &d).unwrap();
        prop_assert!(c1.is_nonnegative() && w1.is_nonnegative());
        prop_assert!(bdnmf_step(&c, &d, &f).unwrap().is_nonnegative());
        let (t1, c1) = sdnmf_step(&c, &t, &d, &f).unwrap();
        prop_assert!(t1.is_nonnegative() && c1.is_nonnegative());
        let (w1, c1, t1) = cdnmf_step(&c, &w, &tk, &d, &f, 1.0, 1.0).unwrap();
        prop_assert!(w1.is_nonnegative() && c1.is_nonnegative() && t1.is_nonnegative());
    }

    #[test]
    fn objective_traces_descend((v, n, k, seed) in small_instance(), algo in prop::sample::select(Algo::ALL.to_vec())) {
        let d = data(v, n, derive_seed(seed, &[0]));
        let f = one_hot(k, n, derive_seed(seed, &[1]));
        let cfg = SolverConfig { algo, topics: k, max_iter: 60, rel_tol: 1e-12, seed, ..SolverConfig::default() };
        let (_, report) = solve(&cfg, &d, Some(&f)).unwrap();
        let noise = ROUNDOFF_FLOOR * d.frobenius_sq();
        for pair in report.objective_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] * (1.0 + MONOTONE_SLACK) + noise);
        }
    }

    #[test]
    fn cdnmf_factor_updates_descend_individually((v, n, k, seed) in small_instance()) {
        let d = data(v, n, derive_seed(seed, &[0]));
        let f = one_hot(k, n, derive_seed(seed, &[1]));
        let c = positive(v, k, derive_seed(seed, &[2]));
        let w = positive(k, n, derive_seed(seed, &[3]));
        let t = positive(k, k, derive_seed(seed, &[4]));
        let obj = |c: &DenseMatrix, w: &DenseMatrix, t: &DenseMatrix| {
            objective(Algo::Cdnmf, &d, FactorRefs { c, w: Some(w), t: Some(t), f: Some(&f) }, 1.0, 1.0).unwrap()
        };
        let (w1, c1, t1) = cdnmf_step(&c, &w, &t, &d, &f, 1.0, 1.0).unwrap();
        let o0 = obj(&c, &w, &t);
        let o1 = obj(&c, &w1, &t);
        let o2 = obj(&c1, &w1, &t);
        let o3 = obj(&c1, &w1, &t1);
        let slack = |x: f64| x * (1.0 + MONOTONE_SLACK);
        prop_assert!(o1 <= slack(o0), "W: {} > {}", o1, o0);
        prop_assert!(o2 <= slack(o1), "C: {} > {}", o2, o1);
        prop_assert!(o3 <= slack(o2), "T: {} > {}", o3, o2);
    }

    #[test]
    fn bdnmf_scale_consistency((v, n, k, seed) in small_instance(), s in 0.1f64..10.0) {
        let d = data(v, n, derive_seed(seed, &[0]));
        let ds = SparseMatrix::from_dense(&d.to_dense().scale(s)).unwrap();
        let f = one_hot(k, n, derive_seed(seed, &[1]));
        let cfg = SolverConfig { algo: Algo::Bdnmf, topics: k, max_iter: 50, rel_tol: 1e-300, seed, ..SolverConfig::default() };
        let (s1, r1) = solve(&cfg, &d, Some(&f)).unwrap();
        let (s2, r2) = solve(&cfg, &ds, Some(&f)).unwrap();
        prop_assert!(close(r2.final_objective, s * s * r1.final_objective, 1e-8)
            || (r1.final_objective < 1e-20 && r2.final_objective < 1e-20));
        // Ties on near-equal weights are the only way argmax could move.
        for col in 0..k {
            let a = s1.c.column(col);
            let b = s2.c.column(col);
            let ia = argmax(&a);
            let ib = argmax(&b);
            prop_assert!(ia == ib || close(a[ia], a[ib], 1e-9), "topic {}: {} vs {}", col, ia, ib);
        }
    }
}

fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force_accuracy(pred: &[usize], gold: &[usize], k: usize) -> f64 {
    permutations(k)
        .iter()
        .map(|perm| {
            pred.iter()
                .zip(gold)
                .filter(|(&p, &g)| perm[p] == g)
                .count()
        })
        .max()
        .unwrap() as f64
        / pred.len() as f64
}

proptest! {
    #[test]
    fn hungarian_matches_brute_force(k in 1usize..=6, labels in prop::collection::vec((0usize..6, 0usize..6), 1..40)) {
        let pred: Vec<usize> = labels.iter().map(|&(p, _)| p % k).collect();
        let gold: Vec<usize> = labels.iter().map(|&(_, g)| g % k).collect();
        let acc = clustering_accuracy(&pred, &gold).unwrap();
        prop_assert_eq!(acc, brute_force_accuracy(&pred, &gold, k));
    }

    #[test]
    fn accuracy_is_relabel_invariant(labels in prop::collection::vec((0usize..5, 0usize..5), 1..40), seed: u64) {
        let pred: Vec<usize> = labels.iter().map(|&(p, _)| p).collect();
        let gold: Vec<usize> = labels.iter().map(|&(_, g)| g).collect();
        let mut perm: Vec<usize> = (0..5).map(|x| x * 7 + 3).collect();
        perm.shuffle(&mut stream(seed));
        let renamed: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
        let base = clustering_accuracy(&pred, &gold).unwrap();
        prop_assert_eq!(clustering_accuracy(&renamed, &gold).unwrap(), base);
        let renamed_gold: Vec<usize> = gold.iter().map(|&g| perm[g]).collect();
        prop_assert_eq!(clustering_accuracy(&pred, &renamed_gold).unwrap(), base);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn coherence_grows_with_pair_frequency(f1 in 1usize..50, f2 in 1usize..50, both in 0usize..50, bump in 1usize..10) {
        let both = both.min(f1).min(f2);
        let table = |b: usize| CooccurrenceTable::from_parts(vec![3, 8], vec![f1, f2], vec![f1, b, b, f2]).unwrap();
        for mode in [PairMode::Ranked, PairMode::AllOrdered] {
            let lo = coherence(&[3, 8], &table(both), 0.01, mode).unwrap();
            let hi = coherence(&[3, 8], &table(both + bump), 0.01, mode).unwrap();
            prop_assert!(hi >= lo);
        }
    }

    #[test]
    fn similarity_count_is_order_invariant(lists in prop::collection::vec(prop::collection::btree_set(0usize..30, 1..12), 2..6), seed: u64, n_words in 1usize..15) {
        let topics = TopicWords {
            topics: lists.iter().map(|s| s.iter().map(|&w| (w, 1.0)).collect()).collect(),
        };
        let base = similarity_count(&topics, n_words).unwrap();
        let k = topics.len();
        for a in 0..k {
            for b in 0..k {
                prop_assert_eq!(base.pairs[a][b], base.pairs[b][a]);
            }
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut stream(seed));
        let shuffled = TopicWords { topics: order.iter().map(|&i| topics.topics[i].clone()).collect() };
        let s = similarity_count(&shuffled, n_words).unwrap();
        prop_assert_eq!(s.total, base.total);
    }

    #[test]
    fn top_words_are_sorted(v in 1usize..20, k in 1usize..4, seed: u64, n in 1usize..20) {
        let c = positive(v, k, seed).map(|x| (x * 4.0).floor());
        let n = n.min(v);
        let t = top_words(&c, n).unwrap();
        for topic in &t.topics {
            prop_assert_eq!(topic.len(), n);
            for w in topic.windows(2) {
                prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
            }
            let distinct: BTreeSet<usize> = topic.iter().map(|&(i, _)| i).collect();
            prop_assert_eq!(distinct.len(), n);
        }
    }
}
