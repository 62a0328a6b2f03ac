use geoprox::setkit::{
    ball_rings, c_n_set, cone_hull, diam, directed_hausdorff, dist_to, hausdorff, hull_iterate,
    hull_iterate_capped, lambda_mu, remotal_to, sample_ball, segment, slice, CnFamily, FiniteSet,
    SliceMode, Slicer,
};
use geoprox::{Error, Point, Space};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn e2(pts: &[[f64; 2]]) -> FiniteSet {
    let s = Space::euclidean(2);
    FiniteSet::new(
        s.clone(),
        pts.iter().map(|p| s.point(p.to_vec()).unwrap()).collect(),
    )
    .unwrap()
}

fn brute_hausdorff(x: &FiniteSet, y: &FiniteSet) -> f64 {
    let s = x.space();
    let dir = |a: &FiniteSet, b: &FiniteSet| {
        a.points()
            .iter()
            .map(|p| {
                b.points()
                    .iter()
                    .map(|q| s.d(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    dir(x, y).max(dir(y, x))
}

#[test]
fn triangle_hull_stays_inside_the_triangle() {
    let tri = e2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    let h = hull_iterate(&tri, 2, 9).unwrap();
    assert!(h.is_convex());
    assert!(h.len() > 1000);
    for p in h.points() {
        let c = p.coords().unwrap();
        // Barycentric coordinates of the unit right triangle.
        let bary = [1.0 - c[0] - c[1], c[0], c[1]];
        assert!(bary.iter().all(|&b| b >= -1e-9), "{c:?}");
    }
    assert!((diam(&h) - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn hull_growth_respects_the_cap() {
    let tri = e2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    assert!(matches!(
        hull_iterate_capped(&tri, 3, 9, 20_000),
        Err(Error::HullTooLarge { cap: 20_000, .. })
    ));
    assert!(hull_iterate(&tri, 0, 9).unwrap().len() == 3);
}

#[test]
fn singleton_hull_is_itself() {
    let p = e2(&[[2.0, 3.0]]);
    assert_eq!(hull_iterate(&p, 2, 9).unwrap().len(), 1);
}

#[test]
fn hull_in_tree_needs_no_extra_capability_but_sphere_is_refused() {
    let s = Space::spherical(1.0);
    let a = s.point(vec![1.0, 0.0, 0.0]).unwrap();
    let b = s.point(vec![0.0, 1.0, 0.0]).unwrap();
    let set = FiniteSet::new(s, vec![a, b]).unwrap();
    assert!(matches!(
        hull_iterate(&set, 1, 3),
        Err(Error::Capability(_))
    ));
}

#[test]
fn duplicates_are_removed_on_construction() {
    let set = e2(&[[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]]);
    assert_eq!(set.len(), 2);
    assert!(matches!(
        FiniteSet::new(Space::euclidean(2), vec![]),
        Err(Error::EmptySet)
    ));
}

#[test]
fn nearest_and_farthest_pick_lowest_index() {
    let set = e2(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 3.0], [0.0, -3.0]]);
    let z = Point::from(vec![0.0, 0.0]);
    assert_eq!(dist_to(&z, &set), (1.0, 0));
    assert_eq!(remotal_to(&z, &set), (3.0, 2));
}

#[test]
fn hausdorff_of_shifted_segment() {
    let x = e2(&[[0.0, 0.0], [1.0, 0.0]]);
    let y = e2(&[[0.0, 2.0], [1.0, 2.0], [5.0, 2.0]]);
    assert!((directed_hausdorff(&x, &y).unwrap() - 2.0).abs() < 1e-12);
    assert!((hausdorff(&x, &y).unwrap() - 20f64.sqrt()).abs() < 1e-12);
}

#[test]
fn lambda_mu_on_explicit_sets() {
    let a = e2(&[[0.0, 0.0]]);
    let x = e2(&[[3.0, 0.0], [0.0, 5.0]]);
    let lm = lambda_mu(&a, &x).unwrap();
    assert_eq!((lm.lambda, lm.argmin), (3.0, (0, 0)));
    assert_eq!((lm.mu, lm.argmax), (5.0, (0, 1)));
}

#[test]
fn mixed_spaces_are_rejected() {
    let a = e2(&[[0.0, 0.0]]);
    let h = Space::hyperbolic(-1.0);
    let b = FiniteSet::new(h.clone(), vec![h.basepoint()]).unwrap();
    assert_eq!(hausdorff(&a, &b), Err(Error::SpaceMismatch));
    assert!(lambda_mu(&a, &b).is_err());
}

#[test]
fn slices_of_two_segments() {
    let x = e2(&[[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]]);
    let y = e2(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
    let near = slice(&x, &y, 0.0, SliceMode::LNear).unwrap();
    assert_eq!(near.members, vec![0, 1, 2]);
    assert!((near.diam() - 2.0).abs() < 1e-12);
    let far = slice(&x, &y, 0.0, SliceMode::MFar).unwrap();
    assert_eq!(far.members, vec![0, 2]);
    assert!(matches!(
        slice(&x, &y, -1.0, SliceMode::LNear),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn cn_sets_shrink_to_the_apex() {
    let s = Space::euclidean(2);
    let x = ball_rings(&s, &s.basepoint(), 1.0, 6, 48).unwrap();
    let apex = s.point(vec![2.0, 0.0]).unwrap();
    let fam = CnFamily::new(&x, &apex, 9).unwrap();
    assert!((fam.apex_dist() - 1.0).abs() < 1e-12);
    let mut prev = f64::INFINITY;
    for n in [2u64, 4, 8, 16, 64, 256] {
        let d = fam.diam(n).unwrap();
        assert!(d <= prev + 1e-9);
        prev = d;
    }
    assert!(prev < 0.05);
    assert!(matches!(fam.members(1), Err(Error::Precondition(_))));
    let c = c_n_set(&x, &apex, 1000).unwrap();
    assert!(c.points().iter().all(|p| s.d(p, &apex) < 0.02));
    assert!(matches!(
        CnFamily::new(&x, &s.basepoint(), 9),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn cone_hull_contains_base_and_apex() {
    let s = Space::hyperbolic(-1.0);
    let x = segment(
        &s,
        &s.point(vec![0.0, 0.0]).unwrap(),
        &s.point(vec![0.0, 1.0]).unwrap(),
        5,
    )
    .unwrap();
    let apex = s.point(vec![2.0, 0.5]).unwrap();
    let h = cone_hull(&x, &apex, 4).unwrap();
    assert_eq!(h.len(), 5 + 1 + 5 * 4);
    assert!(h.points().contains(&apex));
}

#[test]
fn ball_samples_stay_in_the_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in [
        Space::euclidean(3),
        Space::hyperbolic(-2.0),
        Space::tree(geoprox::model_space::MetricTree::tripod(1.0)),
    ] {
        let c = s.basepoint();
        let b = sample_ball(&s, &c, 0.7, 200, &mut rng).unwrap();
        assert!(b.points().iter().all(|p| s.d(p, &c) <= 0.7 + 1e-12));
    }
}

#[test]
fn rings_are_mirror_symmetric_at_the_basepoint() {
    let s = Space::hyperbolic(-1.0);
    let x = ball_rings(&s, &s.basepoint(), 0.5, 4, 16).unwrap();
    for p in x.points() {
        let c = p.coords().unwrap();
        let m = s.point(vec![c[0], -c[1], c[2]]).unwrap();
        assert!(x.points().iter().any(|q| q == &m), "{c:?}");
    }
}

fn arb_e2_set(n: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec([-5.0..5.0f64, -5.0..5.0f64], 1..n)
}

proptest! {
    #[test]
    fn hausdorff_matches_brute_force(a in arb_e2_set(12), b in arb_e2_set(12)) {
        let (x, y) = (e2(&a), e2(&b));
        let h = hausdorff(&x, &y).unwrap();
        prop_assert!((h - brute_hausdorff(&x, &y)).abs() < 1e-12);
        prop_assert!((h - hausdorff(&y, &x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn lambda_mu_matches_brute_force(a in arb_e2_set(10), b in arb_e2_set(10)) {
        let (x, y) = (e2(&a), e2(&b));
        let s = x.space();
        let all: Vec<f64> = x.points().iter()
            .flat_map(|p| y.points().iter().map(move |q| s.d(p, q)))
            .collect();
        let lm = lambda_mu(&x, &y).unwrap();
        prop_assert_eq!(lm.lambda, all.iter().copied().fold(f64::INFINITY, f64::min));
        prop_assert_eq!(lm.mu, all.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        prop_assert_eq!(s.d(x.point(lm.argmin.0), y.point(lm.argmin.1)), lm.lambda);
    }

    #[test]
    fn slices_are_monotone(a in arb_e2_set(16), b in arb_e2_set(16), s1 in 0.0..3.0f64, s2 in 0.0..3.0f64) {
        let (x, y) = (e2(&a), e2(&b));
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        for mode in [SliceMode::LNear, SliceMode::MFar] {
            let sl = Slicer::new(&x, &y, mode).unwrap();
            let small = sl.members(lo);
            let big = sl.members(hi);
            prop_assert!(!small.is_empty());
            prop_assert!(small.iter().all(|i| big.contains(i)));
            prop_assert!(sl.diam(lo) <= sl.diam(hi));
        }
    }
}
