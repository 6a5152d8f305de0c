use nalgebra::DMatrix;
use rwqda_core::arw::{ArwParams, LabeledDataset};
use rwqda_core::classify::{ThresholdRule, Variant};
use rwqda_lab::bench::{
    grid_search, make_splits, run_benchmark, run_benchmark_with, surrogate_dataset, Method,
    SearchSpace, SplitPlan, LDA, QDA,
};
use rwqda_lab::with_threads;

fn small_space() -> SearchSpace {
    SearchSpace {
        t_step: 0.2,
        c_min: -10.0,
        c_max: 10.0,
        c_step: 1.0,
        q_grid: vec![0.3, 1.0],
        screen: vec![(0.1, 5), (0.2, 8)],
        ..SearchSpace::default()
    }
}

fn toy() -> LabeledDataset {
    let params = ArwParams::new(30, 0.7, 0.2, 0.2, 0.1, 1.2, 0.6).unwrap();
    surrogate_dataset(&params, 40, 24, 11).unwrap()
}

#[test]
fn splits_are_exactly_stratified() {
    let mut y = vec![0u8; 120];
    y.extend(vec![1u8; 61]);
    let splits = make_splits(&y, &SplitPlan::default()).unwrap();
    assert_eq!(splits.len(), 15);
    for s in &splits {
        let c1 = s.test.iter().filter(|&&i| y[i] == 1).count();
        assert_eq!((s.test.len() - c1, c1), (30, 15));
    }
}

#[test]
fn singleton_grid_returns_that_point() {
    let data = toy();
    let space = SearchSpace {
        t_step: 1.0,
        t_max: Some(0.0),
        c_min: 3.0,
        c_max: 3.0,
        q_grid: vec![0.4],
        screen: vec![(0.1, 5)],
        ..SearchSpace::default()
    };
    for method in [QDA, LDA] {
        let r = grid_search(&data, &space, &method).unwrap();
        let p = r.params;
        assert_eq!(
            (p.q1, p.q2, p.delta_screen, p.l, p.t, p.c),
            (0.4, 0.4, 0.1, 5, 0.0, 3.0)
        );
        assert!((0.0..=1.0).contains(&r.train_err));
    }
}

#[test]
fn separable_data_reaches_zero_training_error() {
    let (n, p) = (40, 6);
    let y: Vec<u8> = (0..n).map(|i| u8::from(i >= 20)).collect();
    let x = DMatrix::from_fn(n, p, |i, j| {
        let wobble = ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5;
        wobble + if y[i] == 1 { 5.0 } else { -5.0 }
    });
    let data = LabeledDataset::new(x, y).unwrap();
    let r = grid_search(&data, &small_space(), &LDA).unwrap();
    assert_eq!(r.train_err, 0.0);
}

#[test]
fn wider_constant_range_never_hurts() {
    let data = toy();
    let narrow = SearchSpace {
        t_max: Some(0.4),
        q_grid: vec![0.5],
        screen: vec![(0.1, 5)],
        c_min: -50.0,
        c_max: 50.0,
        ..SearchSpace::default()
    };
    let wide = SearchSpace {
        c_min: -100.0,
        c_max: 100.0,
        ..narrow.clone()
    };
    for method in [QDA, LDA] {
        let a = grid_search(&data, &narrow, &method).unwrap();
        let b = grid_search(&data, &wide, &method).unwrap();
        assert!(b.train_err <= a.train_err);
    }
}

#[test]
fn result_does_not_depend_on_enumeration_order() {
    let data = toy();
    let a = small_space();
    let mut b = a.clone();
    b.q_grid.reverse();
    b.screen.reverse();
    for method in [QDA, LDA] {
        assert_eq!(
            grid_search(&data, &a, &method).unwrap(),
            grid_search(&data, &b, &method).unwrap()
        );
    }
}

#[test]
fn same_method_twice_gives_equal_errors() {
    let data = toy();
    let plan = SplitPlan {
        n_splits: 3,
        ..SplitPlan::default()
    };
    let r = run_benchmark_with(&data, &plan, &small_space(), &[QDA, QDA]).unwrap();
    assert_eq!(r.splits.len(), 3);
    for s in &r.splits {
        assert_eq!(s.outcomes[0], s.outcomes[1]);
    }
    assert_eq!(r.summary().first_not_worse, 3);
    assert_eq!(r.summary().first_better, 0);
}

#[test]
fn quadratic_off_with_clipping_is_the_linear_rule() {
    let data = toy();
    let plan = SplitPlan {
        n_splits: 2,
        ..SplitPlan::default()
    };
    let reduced = Method {
        name: "reduced",
        variant: Variant::Lda,
        quadratic: false,
        rule: ThresholdRule::Clip,
    };
    let r = run_benchmark_with(&data, &plan, &small_space(), &[reduced, LDA]).unwrap();
    for s in &r.splits {
        let (a, b) = (
            s.outcomes[0].as_ref().unwrap(),
            s.outcomes[1].as_ref().unwrap(),
        );
        assert_eq!(
            (a.params, a.train_err, a.test_err),
            (b.params, b.train_err, b.test_err)
        );
    }
}

#[test]
fn report_is_deterministic_across_thread_counts() {
    let data = toy();
    let plan = SplitPlan {
        n_splits: 4,
        seed: 5,
        ..SplitPlan::default()
    };
    let one = with_threads(1, || run_benchmark(&data, &plan, &small_space()).unwrap());
    let three = with_threads(3, || run_benchmark(&data, &plan, &small_space()).unwrap());
    assert_eq!(one.to_csv(), three.to_csv());
    let csv = one.to_csv();
    assert!(csv.starts_with("split,method,q1,q2,delta,L,t,C,train_err,test_err\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    for s in &one.splits {
        for o in &s.outcomes {
            let o = o.as_ref().unwrap();
            assert!((0.0..=1.0).contains(&o.test_err) && (0.0..=1.0).contains(&o.train_err));
        }
    }
}

#[test]
fn tiny_class_is_rejected() {
    let x = DMatrix::from_fn(8, 3, |i, j| (i * 3 + j) as f64);
    let data = LabeledDataset::new(x, vec![0, 0, 0, 0, 0, 0, 0, 1]).unwrap();
    assert!(run_benchmark(&data, &SplitPlan::default(), &small_space()).is_err());
}
