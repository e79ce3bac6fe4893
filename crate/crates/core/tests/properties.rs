use fpp_core::animals::{cover_connected, exact_nn, AnimalField, AnimalInstance};
use fpp_core::directed::{connect_in_halfspace, verify_segments, Clause, HalfSpace};
use fpp_core::empirical::IntervalSet;
use fpp_core::percolation::{
    chemical_distance, cluster_and_boundary, kesten_shell, open_field, Color,
};
use fpp_core::rng::SplitMix;
use fpp_core::{make_edge, v_e, DistributionSpec, EdgeId, Environment, LatticeBox, Point};
use proptest::prelude::*;
use std::collections::{BTreeSet, HashSet};

fn point2() -> impl Strategy<Value = Point> {
    (-50i64..50, -50i64..50).prop_map(|(a, b)| Point(vec![a, b]))
}

proptest! {
    #[test]
    fn make_edge_symmetric(p in point2(), axis in 1usize..=2, s in prop::sample::select(vec![-1i64, 1])) {
        let q = p.step(axis, s);
        let e = make_edge(&p, &q).unwrap();
        prop_assert_eq!(&e, &make_edge(&q, &p).unwrap());
        let (a, b) = e.endpoints();
        prop_assert_eq!((a.l1() - b.l1()).abs(), 1);
        let ve = v_e(&e);
        prop_assert!(ve.l1() < e.endpoints().0.l1().max(e.endpoints().1.l1()));
    }

    #[test]
    fn interval_literal_round_trip(pieces in prop::collection::vec((0u32..50, 1u32..20, any::<bool>(), any::<bool>()), 1..5)) {
        let text: Vec<String> = pieces
            .iter()
            .map(|(lo, w, lc, hc)| {
                format!("{}{},{}{}", if *lc { '[' } else { '(' }, lo, lo + w, if *hc { ']' } else { ')' })
            })
            .collect();
        let s = IntervalSet::parse(&text.join(" ∪ ")).unwrap();
        let again = IntervalSet::parse(&s.to_string()).unwrap();
        prop_assert_eq!(&s, &again);
        for t in 0..80 {
            let x = t as f64 * 0.5;
            let direct = pieces.iter().any(|(lo, w, lc, hc)| {
                let (lo, hi) = (*lo as f64, (*lo + *w) as f64);
                (x > lo || (*lc && x == lo)) && (x < hi || (*hc && x == hi))
            });
            prop_assert_eq!(s.contains(x), direct);
        }
    }
}

fn grow_animal(rng: &mut SplitMix, n: usize, d: usize) -> Vec<Point> {
    let mut set: BTreeSet<Point> = BTreeSet::from([Point::origin(d)]);
    let mut v: Vec<Point> = vec![Point::origin(d)];
    while v.len() < n {
        let p = &v[rng.below(v.len() as u64) as usize];
        let nb = p.neighbors();
        let q = nb[rng.below(nb.len() as u64) as usize].clone();
        if set.insert(q.clone()) {
            v.push(q);
        }
    }
    v
}

#[test]
fn cover_property_on_random_animals() {
    let mut rng = SplitMix::new(77);
    for t in 0..500 {
        let d = 2 + (t % 2);
        let n = 1 + rng.below(60) as usize;
        let alpha = grow_animal(&mut rng, n, d);
        let l = 1 + rng.below(n as u64) as usize;
        let xs = cover_connected(&alpha, l).unwrap();
        // independent restatement of the covering count
        assert_eq!(xs[0], Point::origin(d));
        assert_eq!(xs.len(), 2 * n / l + 1);
        for w in xs.windows(2) {
            assert!(w[0].0.iter().zip(&w[1].0).all(|(a, b)| (a - b).abs() <= 1));
        }
        let li = l as i64;
        for a in &alpha {
            let covered = xs.iter().any(|x| x.0.iter().zip(&a.0).all(|(c, p)| (p - li * c).abs() <= 2 * li));
            assert!(covered, "case {t}: {a} uncovered with l={l}");
        }
    }
}

/// N_n by exhaustive DFS without pruning.
fn unpruned(field: &AnimalField, n: usize, d: usize) -> usize {
    fn go(field: &AnimalField, d: usize, left: usize, path: &mut Vec<Point>) -> usize {
        if left == 0 {
            return 0;
        }
        let u = path.last().unwrap().clone();
        let mut best = 0;
        for v in u.neighbors() {
            if !path.contains(&v) {
                let w = field.value(&make_edge(&u, &v).unwrap(), d) as usize;
                path.push(v);
                best = best.max(w + go(field, d, left - 1, path));
                path.pop();
            }
        }
        best
    }
    go(field, d, n, &mut vec![Point::origin(d)])
}

#[test]
fn animal_solver_matches_unpruned_dfs() {
    let mut rng = SplitMix::new(1);
    for t in 0..60u64 {
        let n = 1 + (t % 6) as usize;
        let field = if t % 3 == 0 {
            let bx = LatticeBox::cube(2, -1, 1);
            let ones: Vec<EdgeId> = fpp_core::lattice::edges_in_box(&bx).into_iter().filter(|_| rng.below(2) == 1).collect();
            AnimalField::Explicit { ones }
        } else {
            AnimalField::Iid { seed: t, p: 0.3 }
        };
        let inst = AnimalInstance { field: field.clone(), n, d: 2 };
        let got = exact_nn(&inst).unwrap();
        assert_eq!(got, unpruned(&field, n, 2), "case {t}");
        assert!(got <= n);
    }
}

fn random_instance(rng: &mut SplitMix, d: usize) -> (Point, Point, HalfSpace, i64) {
    let m = 1000 + rng.below(4000) as i64;
    let x = Point((0..d).map(|_| rng.range_i64(-3 * m, 3 * m)).collect());
    // y within ℓ1 distance m of x
    let mut y = x.clone();
    let mut budget = rng.below(m as u64 + 1) as i64;
    for i in 0..d {
        let take = if i + 1 == d { budget } else { rng.range_i64(0, budget) };
        budget -= take;
        y.0[i] += if rng.below(2) == 0 { take } else { -take };
    }
    let l = 1 + rng.below(d as u64) as usize;
    let top = (x.0[l - 1] as f64).min(y.0[l - 1] as f64 - 0.5);
    let c = match rng.below(3) {
        0 => top,
        1 => top - rng.unit() * 3.0,
        _ => top - rng.unit() * 2.0 * m as f64,
    };
    (x, y, HalfSpace { axis: l, c }, m)
}

#[test]
fn directed_round_trip_random_instances() {
    let mut rng = SplitMix::new(2024);
    for t in 0..1000 {
        let d = 2 + t % 2;
        let (x, y, h, m) = random_instance(&mut rng, d);
        let dec = connect_in_halfspace(&x, &y, &h, m)
            .unwrap_or_else(|e| panic!("case {t}: {e} for {x} {y} {h:?} {m}"));
        let budget = 1609 + 104usize.pow(d as u32 - 1);
        assert!(dec.k() <= budget, "case {t}: K = {}", dec.k());
        assert_eq!(verify_segments(&x, &dec, &y, &h, m), Ok(()), "case {t}: {x} {y} {h:?} {m}");
    }
}

#[test]
fn directed_tamper_ball_clause() {
    let (x, y) = (Point(vec![0, 0]), Point(vec![700, 300]));
    let h = HalfSpace { axis: 2, c: -1.0 };
    let mut dec = connect_in_halfspace(&x, &y, &h, 1000).unwrap();
    // flipping the first sign sends the prefix the other way; repeat the
    // largest step to push a prefix beyond the 2m ball
    let (a, v) = dec.segments[0];
    let back = fpp_core::directed::DiagVec { si: -v.si, sj: -v.sj, ..v };
    let mut segs = vec![(a, back); 30];
    segs.extend(dec.segments.iter().cloned());
    segs.extend(vec![(a, v); 30]);
    dec.segments = segs;
    let r = verify_segments(&x, &dec, &y, &h, 1000);
    assert!(matches!(r, Err(Clause::Ball) | Err(Clause::HalfSpace) | Err(Clause::Count)), "{r:?}");
}

#[test]
fn chemical_restricted_not_shorter() {
    let mut rng = SplitMix::new(9);
    let w = LatticeBox::cube(2, -12, 12);
    for seed in 0..200u64 {
        let env = Environment::new(seed, DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 2);
        let f = open_field(&env, 0.7).unwrap();
        let u = Point(vec![rng.range_i64(-8, 8), rng.range_i64(-8, 8)]);
        let v = Point(vec![rng.range_i64(-8, 8), rng.range_i64(-8, 8)]);
        let r: HashSet<Point> = w.points().filter(|_| rng.below(3) > 0).collect();
        let free = chemical_distance(&f, &u, &v, &w, None).unwrap();
        let rest = chemical_distance(&f, &u, &v, &w, Some(&r)).unwrap();
        if let Some(a) = free {
            assert!(a as i64 >= u.l1_dist(&v));
        }
        match (free, rest) {
            (Some(a), Some(b)) => assert!(b >= a),
            (None, Some(_)) => panic!("restricted connects where unrestricted does not"),
            _ => {}
        }
    }
}

/// Random nearest-neighbour walk from `from` until it leaves `region`.
fn walk_out(rng: &mut SplitMix, from: &Point, region: &LatticeBox) -> Vec<Point> {
    let mut p = from.clone();
    let mut out = vec![p.clone()];
    while region.contains(&p) {
        let nb = p.neighbors();
        p = nb[rng.below(nb.len() as u64) as usize].clone();
        out.push(p.clone());
    }
    out
}

#[test]
fn exterior_boundary_separates() {
    let mut rng = SplitMix::new(31);
    let w = LatticeBox::cube(2, -15, 15);
    let mut probes = 0;
    for seed in 0..100u64 {
        let env = Environment::new(seed, DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 2);
        let f = open_field(&env, 0.7).unwrap();
        let r = cluster_and_boundary(&f, &[Point(vec![0, 0])], Color::Black, &w).unwrap();
        if r.truncated {
            continue;
        }
        let ext: HashSet<&Point> = r.exterior_boundary.iter().collect();
        let region = LatticeBox::cube(2, -16, 16);
        for _ in 0..5 {
            let path = walk_out(&mut rng, &Point(vec![0, 0]), &region);
            assert!(path.iter().any(|p| ext.contains(p)), "seed {seed}");
            probes += 1;
        }
    }
    assert!(probes >= 100);
}

#[test]
fn kesten_shell_separates() {
    let mut rng = SplitMix::new(41);
    let w = LatticeBox::cube(2, -30, 30);
    for seed in 0..30u64 {
        let env = Environment::new(seed, DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 2);
        let f = open_field(&env, 0.75).unwrap();
        let v = Point(vec![0, 0]);
        let s = kesten_shell(&f, &v, &w).unwrap();
        assert!(!s.truncated);
        let set: HashSet<&Point> = s.shell.iter().collect();
        let diam = s.diameter().max(1);
        let region = LatticeBox::cube(2, -diam - 1, diam + 1);
        for _ in 0..10 {
            let path = walk_out(&mut rng, &v, &region);
            assert!(path.iter().any(|p| set.contains(p)), "seed {seed}");
        }
    }
}

#[test]
fn kesten_n_v_decays_at_high_density() {
    // P(n_v > k) at open probability 0.97 falls off quickly in k
    let w = LatticeBox::cube(2, -20, 20);
    let mut counts = [0usize; 4];
    for seed in 0..400u64 {
        let env = Environment::new(seed, DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 2);
        let f = open_field(&env, 0.97).unwrap();
        let s = kesten_shell(&f, &Point(vec![0, 0]), &w).unwrap();
        for (k, c) in counts.iter_mut().enumerate() {
            *c += (s.n_v > k) as usize;
        }
    }
    assert!(counts[0] >= counts[1] && counts[1] >= counts[2]);
    assert!(counts[0] < 400 / 10, "{counts:?}");
    assert!(counts[1] * 2 <= counts[0].max(1), "{counts:?}");
}
