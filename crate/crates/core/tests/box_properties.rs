mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use boxvis::boxmodel::geometry::{contains, dist_box, dist_outside, project};
use boxvis::boxmodel::loss::loss_grad;
use boxvis::boxmodel::params::Layout;
use boxvis::boxmodel::query::{intersect, ParamView};
use boxvis::boxmodel::BoxEmbedding;

fn boxes(d: usize) -> impl Strategy<Value = BoxEmbedding> {
    (
        prop::collection::vec(-5.0..5.0f64, d),
        prop::collection::vec(prop_oneof![Just(0.0), 0.0..3.0f64], d),
    )
        .prop_map(|(c, o)| BoxEmbedding::new(c, o).unwrap())
}

fn box_and_point() -> impl Strategy<Value = (BoxEmbedding, Vec<f64>)> {
    (1usize..6).prop_flat_map(|d| (boxes(d), prop::collection::vec(-8.0..8.0f64, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn outside_distance_zero_iff_contained((b, t) in box_and_point()) {
        prop_assert_eq!(dist_outside(&t, &b.center, &b.offset) == 0.0, contains(&b.center, &b.offset, &t, 0.0));
    }
}

proptest! {
    #[test]
    fn corner_points_are_contained(b in (1usize..6).prop_flat_map(boxes)) {
        prop_assert!(contains(&b.center, &b.offset, &b.max_corner(), 0.0));
        prop_assert!(contains(&b.center, &b.offset, &b.min_corner(), 0.0));
        prop_assert_eq!(dist_outside(&b.max_corner(), &b.center, &b.offset), 0.0);
    }

    #[test]
    fn dist_box_ignores_coordinate_order((b, t) in box_and_point(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..t.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let pick = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let a = dist_box(&t, &b.center, &b.offset, 0.3, 0.1);
        let p = dist_box(&pick(&t), &pick(&b.center), &pick(&b.offset), 0.3, 0.1);
        prop_assert!((a - p).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn size_term_never_changes_closest_tail(
        b in (3usize..4).prop_flat_map(boxes),
        tails in prop::collection::vec(prop::collection::vec(-8.0..8.0f64, 3), 2..6),
        beta in 0.0..1.0f64,
    ) {
        let argmin = |beta: f64| {
            let d: Vec<f64> = tails.iter().map(|t| dist_box(t, &b.center, &b.offset, 0.2, beta)).collect();
            let mut order: Vec<usize> = (0..d.len()).collect();
            order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
            order
        };
        let (a, c) = (argmin(0.0), argmin(beta));
        // equal up to ties broken differently by rounding
        let d0: Vec<f64> = tails.iter().map(|t| dist_box(t, &b.center, &b.offset, 0.2, 0.0)).collect();
        prop_assert!((d0[a[0]] - d0[c[0]]).abs() < 1e-9);
    }

    #[test]
    fn intersection_is_order_free_and_shrinks(
        d in 1usize..5,
        seed in any::<u64>(),
        m in 1usize..5,
    ) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = common::random_params(&mut rng, d);
        let p = ParamView::new(&theta, Layout::new(0, d));
        let input: Vec<BoxEmbedding> = (0..m).map(|_| common::random_box(&mut rng, d)).collect();
        let mut shuffled = input.clone();
        shuffled.shuffle(&mut rng);
        let (a, _) = intersect(&p, &input).unwrap();
        let (b, _) = intersect(&p, &shuffled).unwrap();
        for i in 0..d {
            prop_assert!((a.center[i] - b.center[i]).abs() <= 1e-12 * a.center[i].abs().max(1.0));
            prop_assert!((a.offset[i] - b.offset[i]).abs() <= 1e-12 * a.offset[i].abs().max(1.0));
            for x in &input {
                prop_assert!(a.offset[i] <= x.offset[i]);
            }
        }
    }

    #[test]
    fn projection_keeps_offsets_nonnegative(
        (b, shift) in (1usize..6).prop_flat_map(|d| (boxes(d), prop::collection::vec(-3.0..3.0f64, d))),
        g in 0.0..2.0f64,
    ) {
        let growth = vec![g; b.dim()];
        let out = project(&b, &shift, &growth).unwrap();
        prop_assert!(out.offset.iter().all(|&o| o >= 0.0));
        let twice = project(&out, &shift, &growth).unwrap();
        for (i, s) in shift.iter().enumerate() {
            prop_assert!((twice.center[i] - (b.center[i] + 2.0 * s)).abs() < 1e-12);
            prop_assert!((twice.offset[i] - (b.offset[i] + 2.0 * g)).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_loss_has_no_gradient(d_pos in 0.0..1.0f64, d_neg in prop::collection::vec(60.0..100.0f64, 1..8)) {
        let (gp, gn) = loss_grad(d_pos, &d_neg, 40.0);
        let norm = (gp * gp + gn.iter().map(|g| g * g).sum::<f64>()).sqrt();
        prop_assert!(norm < 1e-6);
    }
}

#[test]
fn suite_runs_clean_on_a_small_budget() {
    let s = common::box_algebra_suite(500, 1).unwrap();
    assert_eq!(s.cases, 500);
    assert!(s.contained > 0 && s.contained < 500);
}
