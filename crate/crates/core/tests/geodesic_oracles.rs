use fpp_core::geodesics::{enumerate_geodesics_in, passage_time, shortest_passage, shortest_passage_in};
use fpp_core::rng::SplitMix;
use fpp_core::{make_edge, DistributionSpec, Environment, LatticeBox, PathRec, Point};

/// Every self-avoiding path from x to y inside the box, by plain DFS.
fn all_saws(bx: &LatticeBox, x: &Point, y: &Point) -> Vec<Vec<Point>> {
    fn go(bx: &LatticeBox, y: &Point, cur: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
        let u = cur.last().unwrap().clone();
        if &u == y {
            out.push(cur.clone());
            return;
        }
        for v in u.neighbors() {
            if bx.contains(&v) && !cur.contains(&v) {
                cur.push(v);
                go(bx, y, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(bx, y, &mut vec![x.clone()], &mut out);
    out
}

fn weight_sum(env: &Environment, p: &[Point]) -> f64 {
    // summed in reverse with compensation, independent of the library fold
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for w in p.windows(2).rev() {
        let y = env.weight(&make_edge(&w[0], &w[1]).unwrap()) - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// (min T, minimizers sorted lexicographically)
fn brute(env: &Environment, bx: &LatticeBox, x: &Point, y: &Point) -> (f64, Vec<Vec<Point>>) {
    let paths = all_saws(bx, x, y);
    let best = paths.iter().map(|p| weight_sum(env, p)).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * best.max(1.0);
    let mut mins: Vec<Vec<Point>> =
        paths.into_iter().filter(|p| (weight_sum(env, p) - best).abs() <= tol).collect();
    mins.sort();
    (best, mins)
}

fn random_pair(rng: &mut SplitMix, bx: &LatticeBox) -> (Point, Point) {
    let n = bx.num_vertices() as u64;
    let a = bx.point_at(rng.below(n) as usize);
    let mut b = bx.point_at(rng.below(n) as usize);
    while b == a {
        b = bx.point_at(rng.below(n) as usize);
    }
    (a, b)
}

#[test]
fn four_by_four_matches_saw_minimization() {
    let bx = LatticeBox::cube(2, 0, 3);
    let mut rng = SplitMix::new(11);
    for seed in 0..100u64 {
        let dist = if seed % 2 == 0 {
            DistributionSpec::exponential(1.0)
        } else {
            DistributionSpec::atoms(&[(1.0, 0.5), (2.0, 0.5)])
        };
        let env = Environment::new(seed, dist.clone(), 2);
        let (x, y) = random_pair(&mut rng, &bx);
        let got = shortest_passage_in(&env, &x, &y, &bx).unwrap();
        let (best, mins) = brute(&env, &bx, &x, &y);
        if dist.is_continuous() {
            assert!((got.t - best).abs() <= 1e-9 * best, "seed {seed}: {} vs {best}", got.t);
            assert_eq!(mins.len(), 1);
        } else {
            assert_eq!(got.t, best, "seed {seed}");
        }
        assert!(got.selection_exact);
        assert_eq!(got.geodesic.vertices, mins[0], "selected geodesic is the lex-min minimizer");
        assert_eq!(passage_time(&env, &got.geodesic), got.t);
    }
}

#[test]
fn three_by_three_geodesic_sets() {
    let bx = LatticeBox::cube(2, 0, 2);
    let mut rng = SplitMix::new(5);
    for seed in 0..50u64 {
        let env = Environment::new(seed, DistributionSpec::atoms(&[(1.0, 0.5), (2.0, 0.5)]), 2);
        let (x, y) = random_pair(&mut rng, &bx);
        let set = enumerate_geodesics_in(&env, &x, &y, &bx, 10_000).unwrap();
        let (_, mins) = brute(&env, &bx, &x, &y);
        let mut got: Vec<Vec<Point>> = set.paths.iter().map(|p| p.vertices.clone()).collect();
        got.sort();
        assert_eq!(got, mins, "seed {seed}");
        assert!(!set.partial);
        let sel = shortest_passage_in(&env, &x, &y, &bx).unwrap();
        assert!(set.paths.contains(&sel.geodesic));
    }
}

#[test]
fn unit_weights_two_staircases() {
    let env = Environment::new(0, DistributionSpec::atoms(&[(1.0, 1.0)]), 2);
    let bx = LatticeBox::cube(2, -2, 3);
    let set = enumerate_geodesics_in(&env, &Point(vec![0, 0]), &Point(vec![1, 1]), &bx, 100).unwrap();
    assert_eq!(set.paths.len(), 2);
    assert_eq!(set.t, 2.0);
}

#[test]
fn triangle_inequality_and_padding_monotone() {
    let mut rng = SplitMix::new(3);
    for seed in 0..40u64 {
        let env = Environment::new(seed, DistributionSpec::exponential(1.0), 2);
        let bx = LatticeBox::cube(2, -8, 8);
        let pts: Vec<Point> = (0..3).map(|_| Point(vec![rng.range_i64(-5, 5), rng.range_i64(-5, 5)])).collect();
        let t = |a: &Point, b: &Point| shortest_passage_in(&env, a, b, &bx).unwrap().t;
        assert!(t(&pts[0], &pts[2]) <= t(&pts[0], &pts[1]) + t(&pts[1], &pts[2]) + 1e-12);
        let (x, y) = (Point(vec![0, 0]), Point(vec![6, 3]));
        let a = shortest_passage(&env, &x, &y, 1.0).unwrap().t;
        let b = shortest_passage(&env, &x, &y, 2.0).unwrap().t;
        assert!(b <= a);
    }
}

#[test]
fn selected_geodesic_edges_are_tight() {
    for seed in 0..30u64 {
        let env = Environment::new(seed, DistributionSpec::Uniform { a: 0.5, b: 1.5 }, 2);
        let (x, y) = (Point(vec![0, 0]), Point(vec![7, -4]));
        let res = shortest_passage(&env, &x, &y, 1.0).unwrap();
        let bx = res.search_box.clone();
        let p: &PathRec = &res.geodesic;
        for (k, w) in p.vertices.windows(2).enumerate() {
            let tx = shortest_passage_in(&env, &x, &w[0], &bx).unwrap().t;
            let ty = shortest_passage_in(&env, &w[1], &y, &bx).unwrap().t;
            let te = env.weight(&make_edge(&w[0], &w[1]).unwrap());
            assert!((tx + te + ty - res.t).abs() <= 1e-9 * res.t, "seed {seed} edge {k}");
        }
    }
}

#[test]
fn geodesic_length_ratio_bounded() {
    // |x|₁ = 40, exponential weights
    let x = Point(vec![0, 0]);
    let y = Point(vec![20, 20]);
    let ratios: Vec<f64> = (0..500u64)
        .map(|seed| {
            let env = Environment::new(seed, DistributionSpec::exponential(1.0), 2);
            shortest_passage(&env, &x, &y, 1.0).unwrap().geodesic.len() as f64 / 40.0
        })
        .collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(max <= 2.5, "max length ratio {max}");
    let exceed = |t: f64| ratios.iter().filter(|r| **r > t).count();
    assert!(exceed(1.2) >= exceed(1.4) && exceed(1.4) >= exceed(1.6));
}
