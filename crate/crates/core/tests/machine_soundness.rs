use std::sync::Arc;

use mindchange::dst::{cb_chain, dalpha_decomposition, level_chain, min_piecewise_decomposition};
use mindchange::machines::{
    cb_decomposition, cb_identifier, cb_map, glue_machine, ordinal_counter_machine, pieces_from_decomposition,
    simulate_all,
};
use mindchange::runs::{validate_run, Guess};
use mindchange::space::{canonical_names, discrete, enumerate_spaces, sierpinski, FiniteSpace, NameConfig, PointMap};

fn corpus(max: usize) -> Vec<Arc<FiniteSpace>> {
    (1..=max).flat_map(|n| enumerate_spaces(n).unwrap()).map(Arc::new).collect()
}

fn horizon(s: &FiniteSpace) -> usize {
    (0..s.len()).map(|x| s.neighbourhoods(x).len()).max().unwrap() + 1
}

#[test]
fn counter_machine_is_sound_on_small_corpus() {
    for s in corpus(3) {
        for cod in [Arc::new(discrete(2)), Arc::new(sierpinski())] {
            for f in PointMap::all(s.clone(), cod) {
                let summary = simulate_all(&f, horizon(&s)).unwrap();
                assert!(summary.max_mind_changes() < summary.level.max(1));
            }
        }
    }
}

#[test]
fn limits_do_not_depend_on_the_name() {
    for s in corpus(3) {
        for f in PointMap::all(s.clone(), Arc::new(discrete(3))) {
            // any valid decomposition works, not only the canonical one
            let d = min_piecewise_decomposition(&f);
            let pieces = pieces_from_decomposition(&f, &d);
            for x in 0..s.len() {
                for name in canonical_names(&s, x, horizon(&s), &NameConfig::default()).unwrap() {
                    let a = ordinal_counter_machine(&d, &f, &name).unwrap();
                    let b = glue_machine(&f, &pieces, &name).unwrap();
                    assert_eq!(a.converged_to, Guess::point(f.apply(x)));
                    assert_eq!(b.converged_to, Guess::point(f.apply(x)));
                    assert!(validate_run(&a.run).is_valid() && validate_run(&b.run).is_valid());
                    assert!(a.run.steps.iter().all(|st| st.tag < a.run.bound));
                }
            }
        }
    }
}

#[test]
fn counter_never_revisits_a_refuted_piece() {
    for s in corpus(3) {
        for f in PointMap::all(s.clone(), Arc::new(discrete(2))) {
            let d = dalpha_decomposition(&f);
            for x in 0..s.len() {
                for name in canonical_names(&s, x, horizon(&s), &NameConfig::default()).unwrap() {
                    let r = ordinal_counter_machine(&d, &f, &name).unwrap();
                    let tags: Vec<_> = r.run.steps.iter().map(|st| st.tag.clone()).collect();
                    assert!(tags.windows(2).all(|w| w[1] <= w[0]));
                    assert!(r.run.mind_changes() < level_chain(&f).level.max(1));
                }
            }
        }
    }
}

#[test]
fn cb_identifier_respects_rank() {
    for s in corpus(4) {
        let rank = cb_chain(&s).rank;
        let p = cb_map(s.clone());
        assert_eq!(cb_decomposition(&s).len(), rank);
        for x in 0..s.len() {
            for name in canonical_names(&s, x, horizon(&s), &NameConfig { samples: 3, ..NameConfig::default() }).unwrap() {
                let r = cb_identifier(&s, &name).unwrap();
                assert!(validate_run(&r.run).is_valid());
                assert_eq!(r.converged_to, Guess::point(p.apply(x)));
                assert!(r.run.mind_changes() < rank.max(1));
            }
        }
    }
}
