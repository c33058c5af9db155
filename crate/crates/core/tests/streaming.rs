mod support;

use proptest::prelude::*;

use exsmi_core::{PredictorKind, PredictorState, Sample, Vec3};
use support::oracle;

fn stream(kind: PredictorKind, h: usize, xs: &[Vec3]) -> Vec<Vec3> {
    let mut st = PredictorState::new(kind, h).unwrap();
    xs.iter()
        .enumerate()
        .map(|(t, p)| {
            st.update_and_predict(Sample::new(t as u64, *p))
                .unwrap()
                .pos
        })
        .collect()
}

fn max_abs_diff(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| (0..3).map(move |i| (p[i] - q[i]).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn standard_set_matches_oracle() {
    let mut rng = support::rng(11);
    let xs = support::random_walk(&mut rng, 3000);
    for h in 1..=3 {
        for kind in PredictorKind::standard_set(0.1) {
            let d = max_abs_diff(&stream(kind, h, &xs), &oracle::predict_all(kind, h, &xs));
            assert!(d < 1e-9, "{kind} h={h}: {d}");
        }
    }
}

#[test]
fn mulin_orders_match_oracle() {
    let mut rng = support::rng(12);
    let xs = support::random_walk(&mut rng, 1000);
    for k in 1..=4 {
        for h in [1, 2, 5] {
            let kind = PredictorKind::Mulin { alpha: 0.6, k };
            let d = max_abs_diff(&stream(kind, h, &xs), &oracle::predict_all(kind, h, &xs));
            assert!(d < 1e-9, "k={k} h={h}: {d}");
        }
    }
}

#[test]
fn short_es3_period_matches_oracle() {
    let mut rng = support::rng(13);
    let xs = support::random_positions(&mut rng, 500);
    let kind = PredictorKind::Es3 {
        alpha: 0.5,
        beta: 0.2,
        gamma: 0.4,
        period_samples: 3,
    };
    let d = max_abs_diff(&stream(kind, 2, &xs), &oracle::predict_all(kind, 2, &xs));
    assert!(d < 1e-9, "{d}");
}

#[test]
fn first_index_may_be_nonzero() {
    let xs = [[1.0, 2.0, 3.0], [2.0, 2.0, 3.0], [3.0, 2.0, 3.0]];
    let mut st = PredictorState::new(PredictorKind::Le, 1).unwrap();
    for (i, p) in xs.iter().enumerate() {
        let out = st
            .update_and_predict(Sample::new(500 + i as u64, *p))
            .unwrap();
        assert_eq!(out.target_index, 501 + i as u64);
    }
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn any_kind() -> impl Strategy<Value = PredictorKind> {
    prop_oneof![
        Just(PredictorKind::Pp),
        Just(PredictorKind::Le),
        (unit(), 1usize..4).prop_map(|(alpha, k)| PredictorKind::Mulin { alpha, k }),
        unit().prop_map(|alpha| PredictorKind::Es1 { alpha }),
        (unit(), unit()).prop_map(|(alpha, beta)| PredictorKind::Es2 { alpha, beta }),
        (unit(), unit(), unit(), 6usize..60).prop_map(|(alpha, beta, gamma, period_samples)| {
            PredictorKind::Es3 {
                alpha,
                beta,
                gamma,
                period_samples,
            }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_parameters_match_oracle(kind in any_kind(), h in 1usize..5, seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let xs = support::random_walk(&mut rng, 400);
        let s = stream(kind, h, &xs);
        let o = oracle::predict_all(kind, h, &xs);
        // relative tolerance: unstable trend settings can grow large
        for (p, q) in s.iter().zip(&o) {
            for i in 0..3 {
                prop_assert!((p[i] - q[i]).abs() <= 1e-9 * (1.0 + q[i].abs()), "{} vs {}", p[i], q[i]);
            }
        }
    }

    #[test]
    fn state_size_is_constant(kind in any_kind(), h in 1usize..5, n in 1usize..300) {
        let mut st = PredictorState::new(kind, h).unwrap();
        let before = st.state_bytes();
        for t in 0..n {
            st.update_and_predict(Sample::new(t as u64, [t as f64, 0.0, 1.0])).unwrap();
        }
        prop_assert_eq!(st.state_bytes(), before);
    }

    #[test]
    fn out_of_order_sample_is_rejected_without_change(kind in any_kind(), skip in 2u64..10) {
        let mut st = PredictorState::new(kind, 2).unwrap();
        for t in 0..20 {
            st.update_and_predict(Sample::new(t, [t as f64; 3])).unwrap();
        }
        let before = st.clone();
        prop_assert!(st.update_and_predict(Sample::new(19 + skip, [0.0; 3])).is_err());
        prop_assert!(st.update_and_predict(Sample::new(20, [f64::NAN, 0.0, 0.0])).is_err());
        prop_assert_eq!(st, before);
    }

    #[test]
    fn axes_are_independent(kind in any_kind(), seed in any::<u64>()) {
        // permuting input axes permutes the prediction axes bit-exactly
        let mut rng = support::rng(seed);
        let xs = support::random_walk(&mut rng, 200);
        let perm: Vec<Vec3> = xs.iter().map(|p| [p[2], p[0], p[1]]).collect();
        let a = stream(kind, 2, &xs);
        let b = stream(kind, 2, &perm);
        for (p, q) in a.iter().zip(&b) {
            prop_assert_eq!([p[2], p[0], p[1]], *q);
        }
    }
}
