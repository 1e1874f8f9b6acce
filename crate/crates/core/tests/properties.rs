use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spectral_topics::bench::{err_reconstruction, generate, SynthSpec};
use spectral_topics::decomp::align_columns;
use spectral_topics::linalg::project_simplex;
use spectral_topics::moments::{estimate_moments_uniform_with, estimate_moments_with};
use spectral_topics::{
    assign_stm, estimate_moments, estimate_moments_uniform, infer_lda, svtd, Corpus, Document, Execution, MomentSet,
    TopicModel, Vocabulary,
};

fn corpus_strategy(max_n: usize, min_len: usize) -> impl Strategy<Value = Corpus> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(0..n, min_len..12), 1..8).prop_map(move |docs| {
            let docs = docs
                .iter()
                .enumerate()
                .map(|(d, toks)| {
                    let mut dense = vec![0u64; n];
                    toks.iter().for_each(|&w| dense[w] += 1);
                    Document::from_dense(d.to_string(), &dense).unwrap()
                })
                .collect();
            Corpus::new(Vocabulary::anonymous(n), docs).unwrap()
        })
    })
}

fn equal_length_corpus() -> impl Strategy<Value = Corpus> {
    (2usize..6, 3usize..9).prop_flat_map(|(n, len)| {
        prop::collection::vec(prop::collection::vec(0..n, len), 1..6).prop_map(move |docs| {
            let docs = docs
                .iter()
                .enumerate()
                .map(|(d, toks)| {
                    let mut dense = vec![0u64; n];
                    toks.iter().for_each(|&w| dense[w] += 1);
                    Document::from_dense(d.to_string(), &dense).unwrap()
                })
                .collect();
            Corpus::new(Vocabulary::anonymous(n), docs).unwrap()
        })
    })
}

fn on_simplex(v: &[f64]) -> bool {
    v.iter().all(|&x| x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() < 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_are_normalized_and_symmetric(c in corpus_strategy(6, 3)) {
        let m = estimate_moments(&c);
        prop_assert!((m.m1().sum() - 1.0).abs() < 1e-12);
        prop_assert!((m.m2().sum() - 1.0).abs() < 1e-12);
        prop_assert_eq!(m.m2(), &m.m2().transpose());
        let total: f64 = (0..c.n_words()).map(|i| m.slice(i).unwrap().sum()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(m.m2().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn equal_lengths_make_both_estimators_agree(c in equal_length_corpus()) {
        let (w, u) = (estimate_moments(&c), estimate_moments_uniform(&c));
        prop_assert!((w.m2() - u.m2()).abs().max() <= 1e-15);
        for i in 0..c.n_words() {
            prop_assert!((w.slice(i).unwrap() - u.slice(i).unwrap()).abs().max() <= 1e-15);
        }
    }

    #[test]
    fn execution_mode_does_not_change_results(c in corpus_strategy(8, 1)) {
        let (p, s) = (estimate_moments_with(&c, Execution::Parallel), estimate_moments_with(&c, Execution::Sequential));
        prop_assert_eq!(p.m2(), s.m2());
        prop_assert_eq!(p.m1(), s.m1());
        let (p, s) = (estimate_moments_uniform_with(&c, Execution::Parallel), estimate_moments_uniform_with(&c, Execution::Sequential));
        prop_assert_eq!(p.m2(), s.m2());
    }

    #[test]
    fn corpus_counts_round_trip(c in corpus_strategy(6, 1)) {
        let mut buf = Vec::new();
        c.write_counts(&mut buf).unwrap();
        let back = Corpus::read_counts(buf.as_slice(), c.vocabulary().clone()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn model_json_round_trip(n in 2usize..8, k in 1usize..4, seed in 0u64..1000) {
        prop_assume!(n >= k);
        let model = generate(&SynthSpec::stm(n, k, 1, seed)).unwrap().1;
        prop_assert_eq!(TopicModel::from_json(&model.to_json().unwrap()).unwrap(), model);
    }

    #[test]
    fn reconstruction_error_ignores_column_order(seed in 0u64..1000, swap in 0usize..3) {
        let a = generate(&SynthSpec::stm(6, 3, 1, seed)).unwrap().1;
        let b = generate(&SynthSpec::stm(6, 3, 1, seed + 1)).unwrap().1;
        let perm = [[1, 0, 2], [2, 1, 0], [1, 2, 0]][swap];
        prop_assert_eq!(err_reconstruction(&a, &b).unwrap(), err_reconstruction(&a.permuted(&perm).unwrap(), &b).unwrap());
    }

    #[test]
    fn svtd_is_invariant_to_topic_order(seed in 0u64..500) {
        let truth = generate(&SynthSpec::stm(9, 3, 1, seed)).unwrap().1;
        let permuted = truth.permuted(&[2, 0, 1]).unwrap();
        let (a, _) = svtd(&MomentSet::population(&truth), 3).unwrap();
        let (b, _) = svtd(&MomentSet::population(&permuted), 3).unwrap();
        let al = align_columns(&b, &a).unwrap();
        let b = b.permuted(&al.perm).unwrap();
        prop_assert!((a.m() - b.m()).abs().max() < 1e-9);
    }

    #[test]
    fn inference_outputs_lie_on_the_simplex(seed in 0u64..500, doc in prop::collection::vec(0usize..5, 1..30)) {
        let stm = generate(&SynthSpec::stm(5, 3, 1, seed)).unwrap().1;
        let mut dense = vec![0u64; 5];
        doc.iter().for_each(|&w| dense[w] += 1);
        let d = Document::from_dense("d", &dense).unwrap();
        prop_assert!(on_simplex(&assign_stm(&stm, &d).unwrap().posterior));
        let lda = TopicModel::lda(stm.m().clone(), DVector::from_vec(vec![0.5, 1.0, 2.0])).unwrap();
        prop_assert!(on_simplex(&infer_lda(&lda, &d, 30, 10, seed).unwrap().h));
    }

    #[test]
    fn posterior_is_unchanged_when_all_likelihoods_scale(seed in 0u64..500, extra in 1u64..4) {
        // Appending a word with equal probability under every topic multiplies
        // each likelihood by the same constant.
        let base = generate(&SynthSpec::stm(4, 2, 1, seed)).unwrap().1;
        let mut m = DMatrix::zeros(5, 2);
        m.view_mut((0, 0), (4, 2)).copy_from(&(base.m() * 0.5));
        m[(4, 0)] = 0.5;
        m[(4, 1)] = 0.5;
        let model = TopicModel::stm(m, base.topic_proportions()).unwrap();
        let d1 = Document::new("d", [(0, 2), (3, 1)]).unwrap();
        let d2 = Document::new("d", [(0, 2), (3, 1), (4, extra)]).unwrap();
        let (p1, p2) = (assign_stm(&model, &d1).unwrap(), assign_stm(&model, &d2).unwrap());
        prop_assert_eq!(p1.argmax, p2.argmax);
        for (a, b) in p1.posterior.iter().zip(&p2.posterior) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_projection_lands_on_the_simplex(v in prop::collection::vec(-5.0f64..5.0, 1..10)) {
        let p = project_simplex(&DVector::from_vec(v));
        prop_assert!(on_simplex(p.as_slice()));
    }
}
