use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::diophantine::{attach_line, RatPoint};
use crate::quad::ExponentPair;

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn defaults() -> ConstructionParams {
    ConstructionParams::defaults(&half()).unwrap()
}

fn unit_root(params: &ConstructionParams) -> Square {
    Square::new(Quad::zero(), Quad::zero(), params.l().clone()).unwrap()
}

fn tess() -> Tessellation {
    let p = defaults();
    let root = unit_root(&p);
    Tessellation::new(p, root).unwrap()
}

fn toy() -> ConstructionParams {
    ConstructionParams::toy(
        ExponentPair::from_parts(1, 2, 3).unwrap(),
        Quad::from_int(10),
        Quad::one(),
        Some(BigRational::new(1.into(), 600.into())),
        2,
    )
    .unwrap()
}

fn random_path(rng: &mut ChaCha8Rng, len: usize, successors: u32) -> Vertex {
    Vertex::from_path((0..len).map(|_| rng.gen_range(0..successors)).collect())
}

#[test]
fn root_and_child_sides() {
    let t = tess();
    let root = t.node_square(&Vertex::root()).unwrap();
    assert_eq!(root.square.side(), &Quad::from_int(2));
    assert_eq!(t.blocks_per_side(), 5);
    assert_eq!(t.children_per_side(), 60);
    assert_eq!(t.params().colors(), 25);
    let child = t.node_square(&Vertex::from_path(vec![1234])).unwrap();
    // l/R = l·√2/96
    let expected = Quad::new(BigRational::zero(), BigRational::new(2.into(), 96.into()));
    assert_eq!(child.square.side(), &expected);
}

#[test]
fn color_one_block_is_lower_left() {
    let t = tess();
    let block = t.block_square(t.root(), 1);
    let side = t.params().side(1).scale_int(&12.into());
    assert_eq!(block, Square::new(Quad::zero(), Quad::zero(), side).unwrap());
    for j in t.shape().children_of_color(1) {
        assert!(block.contains_square(&t.child_square(t.root(), j)));
    }
}

#[test]
fn grid_layout_round_trips() {
    let t = tess();
    let mut per_color = [0u32; 26];
    for j in 0..t.params().successors() {
        let cell = t.cell_of(j);
        assert!(cell.col < 60 && cell.row < 60);
        assert_eq!(t.child_at(cell), j);
        let block = 1 + cell.col / 12 + (cell.row / 12) * 5;
        assert_eq!(t.color_of(j), block);
        per_color[block as usize] += 1;
    }
    assert!(per_color[1..].iter().all(|&c| c == 144));
}

#[test]
fn descendants_nest() {
    let t = tess();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let v = random_path(&mut rng, 4, t.params().successors());
        let squares: Vec<Square> = v.prefixes().map(|p| t.node_square(&p).unwrap().square).collect();
        for w in squares.windows(2) {
            assert!(w[0].contains_square(&w[1]));
        }
    }
}

#[test]
fn siblings_have_disjoint_interiors() {
    let t = tess();
    let a = t.child_square(t.root(), t.child_at(GridCell { col: 3, row: 4 }));
    let b = t.child_square(t.root(), t.child_at(GridCell { col: 4, row: 4 }));
    assert_eq!(a.x1(), *b.x0());
    assert_eq!(a.y0(), b.y0());
}

#[test]
fn block_in_square_examples() {
    let t = tess();
    let side = t.params().side(1).scale_int(&24.into());
    let lower_left = Square::new(Quad::zero(), Quad::zero(), side.clone()).unwrap();
    assert_eq!(t.block_in_square(&Vertex::root(), &lower_left).unwrap(), 1);
    let l = t.params().l().clone();
    let upper_right = Square::new(&l - &side, &l - &side, side.clone()).unwrap();
    assert_eq!(t.block_in_square(&Vertex::root(), &upper_right).unwrap(), 25);
    assert_eq!(t.block_in_square(&Vertex::root(), t.root()).unwrap(), 1);
}

#[test]
fn block_in_square_rejects_bad_sigma() {
    let t = tess();
    let small = Square::new(Quad::zero(), Quad::zero(), t.params().side(1).scale_int(&20.into())).unwrap();
    assert!(matches!(t.block_in_square(&Vertex::root(), &small), Err(Error::Precondition(_))));
    let outside = Square::new(Quad::from_int(1), Quad::zero(), t.params().l().clone()).unwrap();
    assert!(matches!(t.block_in_square(&Vertex::root(), &outside), Err(Error::Precondition(_))));
}

#[test]
fn block_in_square_random_positions() {
    let t = tess();
    let side = t.params().side(1).scale_int(&24.into());
    let slack = t.params().l() - &side;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let u = Quad::from_rational(BigRational::new(rng.gen_range(0..=1i64 << 20).into(), (1i64 << 20).into()));
        let v = Quad::from_rational(BigRational::new(rng.gen_range(0..=1i64 << 20).into(), (1i64 << 20).into()));
        let sigma = Square::new(&slack * &u, &slack * &v, side.clone()).unwrap();
        let color = t.block_in_square(&Vertex::root(), &sigma).unwrap();
        assert!(sigma.contains_square(&t.block_square(t.root(), color)));
    }
}

#[test]
fn empty_levels_survive() {
    let t = tess();
    // level 11 ends below H_12 < 1, so it has no points
    assert!(t.params().h(12) < Quad::one());
    let v = Vertex::from_path(vec![5; 11]);
    let report = t.survives(&v, 1 << 20).unwrap();
    assert!(report.survived && report.removed_points.is_empty());
}

#[test]
fn toy_square_at_half_is_removed() {
    let p = toy();
    let t = Tessellation::new(p, Square::new(Quad::zero(), Quad::zero(), Quad::one()).unwrap()).unwrap();
    let v = Vertex::from_path(vec![
        t.child_at(GridCell { col: 5, row: 5 }),
        t.child_at(GridCell { col: 0, row: 0 }),
    ]);
    let sq = t.node_square(&v).unwrap().square;
    assert!(sq.contains_point(&Quad::ratio(1, 2), &Quad::ratio(1, 2)));
    let report = t.survives(&v, 1 << 20).unwrap();
    assert!(!report.survived);
    let half = RatPoint::from_i64(1, 1, 2).unwrap();
    assert!(report.removed_points.iter().any(|ap| ap.point == half && ap.height == 2.into()));
}

/// Naive scan over every `(p, r, q)` with `q ≤ q_max`.
fn naive_removed(t: &Tessellation, sq: &Square, n: u32, q_max: i64) -> Vec<RatPoint> {
    let p = t.params();
    let mut out = Vec::new();
    let (x0, x1, y0, y1) = (sq.x0().to_f64(), sq.x1().to_f64(), sq.y0().to_f64(), sq.y1().to_f64());
    for q in 1..=q_max {
        let qf = q as f64;
        for a in ((x0 - 1.0) * qf).floor() as i64..=((x1 + 1.0) * qf).ceil() as i64 {
            for b in ((y0 - 1.0) * qf).floor() as i64..=((y1 + 1.0) * qf).ceil() as i64 {
                let Ok(point) = RatPoint::from_i64(a, b, q) else { continue };
                let ap = attach_line(&point, p.st()).unwrap();
                if p.level_of_height(&ap.height).unwrap() != n {
                    continue;
                }
                if delta_box(&point, p.st(), p.c()).intersects_square(sq) {
                    out.push(point);
                }
            }
        }
    }
    out.sort();
    out
}

#[test]
fn survival_matches_naive_scan_on_toy() {
    let p = toy();
    let t = Tessellation::new(p, Square::new(Quad::zero(), Quad::zero(), Quad::one()).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let v = random_path(&mut rng, 2, t.params().successors());
        let sq = t.node_square(&v).unwrap().square;
        let mut got: Vec<RatPoint> = t.survives(&v, 1 << 22).unwrap().removed_points.into_iter().map(|ap| ap.point).collect();
        got.sort();
        // level 2 ends below H_3 = 10, so q < 10
        assert_eq!(got, naive_removed(&t, &sq, 2, 10), "vertex {:?}", v.path());
    }
}

#[test]
fn block_survival_matches_per_child_test() {
    let p = toy();
    let t = Tessellation::new(p, Square::new(Quad::zero(), Quad::zero(), Quad::one()).unwrap()).unwrap();
    let parent = Vertex::from_path(vec![t.child_at(GridCell { col: 5, row: 5 })]);
    for color in 1..=t.params().colors() {
        let block = t.block_survival(&parent, color, 1 << 22).unwrap();
        let direct: Vec<u32> = t
            .shape()
            .children_of_color(color)
            .filter(|&j| t.survives(&parent.child(j), 1 << 22).unwrap().survived)
            .collect();
        assert_eq!(block.survivors, direct);
    }
}

fn strip_root(t: &Tessellation, x0: Quad, y0: Quad) -> Square {
    Square::new(x0, y0, t.params().l().clone()).unwrap()
}

#[test]
fn strip_count_examples() {
    let t = tess();
    let s = t.params().side(1);
    let w = cover_strip_width(t.params(), 1);
    let first_block = |_: &Vertex| 1;

    let horizontal = Strip::new(0.into(), 1.into(), 0.into(), w.clone()).unwrap();
    let root = strip_root(&t, Quad::zero(), -s.scale(&BigRational::new(13.into(), 2.into())));
    assert_eq!(count_strip_hits(&t, &root, first_block, &horizontal, 1), 12);

    let diagonal = Strip::new(1.into(), (-1).into(), 0.into(), w).unwrap();
    let root = strip_root(&t, Quad::zero(), s.scale(&half()));
    assert_eq!(count_strip_hits(&t, &root, first_block, &diagonal, 1), 23);

    // through the cell corners the strip also touches the neighbouring diagonals
    let root = strip_root(&t, Quad::zero(), Quad::zero());
    assert_eq!(count_strip_hits(&t, &root, first_block, &diagonal, 1), 34);
}

fn random_strip(rng: &mut ChaCha8Rng, t: &Tessellation, root: &Square, n: u32) -> Strip {
    let span = 1000;
    loop {
        let a: i64 = rng.gen_range(-span..=span);
        let b: i64 = rng.gen_range(-span..=span);
        if a == 0 && b == 0 {
            continue;
        }
        let (cx, cy) = root.center();
        let side = root.side().to_f64();
        let px = cx.to_f64() + side * (rng.gen::<f64>() - 0.5);
        let py = cy.to_f64() + side * (rng.gen::<f64>() - 0.5);
        // scale so the line passes near (px, py) with integer coefficients
        let scale = (1u64 << 20) as f64 / side;
        let (a, b) = ((a as f64 * scale / span as f64).round() as i64, (b as f64 * scale / span as f64).round() as i64);
        if a == 0 && b == 0 {
            continue;
        }
        let c = -(a as f64 * px + b as f64 * py).round() as i64;
        return Strip::new(a.into(), b.into(), c.into(), cover_strip_width(t.params(), n)).unwrap();
    }
}

#[test]
fn random_strips_respect_bound() {
    let t = tess();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let root = t.root().clone();
    for _ in 0..300 {
        let strip = random_strip(&mut rng, &t, &root, 1);
        let color = rng.gen_range(1..=25);
        assert!(count_strip_hits(&t, &root, |_| color, &strip, 1) <= 34);
    }
    for _ in 0..5 {
        let strip = random_strip(&mut rng, &t, &root, 2);
        let seed: u64 = rng.gen();
        let choice = move |v: &Vertex| {
            let mut r = ChaCha8Rng::seed_from_u64(seed ^ v.path().iter().fold(0u64, |h, &j| h * 3601 + j as u64 + 1));
            r.gen_range(1..=25)
        };
        assert!(count_strip_hits(&t, &root, choice, &strip, 2) <= 1156);
    }
}

#[test]
fn strip_width_check() {
    let t = tess();
    let good = Strip::new(1.into(), 0.into(), 0.into(), cover_strip_width(t.params(), 3)).unwrap();
    assert!(check_strip_width(t.params(), &good, 3).is_ok());
    assert!(check_strip_width(t.params(), &good, 2).is_err());
    assert_eq!(strip_hit_bound(12, 2), 1156.into());
}

fn window_at(params: &ConstructionParams, n: u32, k: u32, x: Quad, y: Quad) -> Square {
    Square::new(x, y, params.side(n - k)).unwrap()
}

#[test]
fn constancy_rejects_toy_and_bad_windows() {
    let p = toy();
    let w = Square::new(Quad::zero(), Quad::zero(), p.side(1)).unwrap();
    assert!(matches!(verify_line_constancy(2, 1, &w, &p, 1 << 20), Err(Error::ModeError(_))));
    let d = defaults();
    let w = Square::new(Quad::zero(), Quad::zero(), Quad::one()).unwrap();
    assert!(matches!(verify_line_constancy(13, 1, &w, &d, 1 << 20), Err(Error::Precondition(_))));
    assert!(matches!(verify_line_constancy(13, 0, &w, &d, 1 << 20), Err(Error::Precondition(_))));
}

#[test]
fn empty_window_is_vacuous() {
    let d = defaults();
    let w = window_at(&d, 13, 1, Quad::ratio(3001, 10007), Quad::ratio(5003, 10009));
    let report = verify_line_constancy(13, 1, &w, &d, 1 << 24).unwrap();
    assert!(report.constant);
    assert!(report.instances <= 1);
    if report.instances == 0 {
        assert!(strip_cover(13, 1, &w, &d, 1 << 24).unwrap().is_none());
    }
}

#[test]
fn directed_windows_give_constant_lines_and_strips() {
    let d = defaults();
    let n = d.first_active_level();
    let region = Square::new(Quad::zero(), Quad::zero(), Quad::ratio(1, 64)).unwrap();
    let windows = directed_windows(&d, n, 1, &region, 1 << 26).unwrap();
    assert!(!windows.is_empty());
    let mut singletons = 0;
    for w in windows.iter().take(200) {
        let report = verify_line_constancy(n, 1, w, &d, 1 << 26).unwrap();
        assert!(!report.is_violation());
        assert!(report.case1_bound_holds);
        assert!(report.diagnostics.iter().all(|dg| dg.inner_bound_holds && dg.same_line));
        if let Some(cover) = cover_from_report(&report, &d).unwrap() {
            assert!(cover.all_contained, "{:?}", cover.checks);
            singletons += usize::from(report.instances == 1);
        }
    }
    assert!(singletons > 0);
}

#[test]
fn pair_diagnostics_detect_distinct_lines() {
    let d = defaults();
    let st = d.st();
    let a = attach_line(&RatPoint::from_i64(1, 1, 2).unwrap(), st).unwrap();
    let b = attach_line(&RatPoint::from_i64(1, 2, 3).unwrap(), st).unwrap();
    let diag = lemmas_pair(&a, &b, 1, &d);
    assert!(!diag.same_line);
    assert_eq!(BigRational::new(diag.scaled_inner.clone(), 2.into()), diag.inner);
    let same = lemmas_pair(&a, &a, 1, &d);
    assert!(same.same_line && same.inner.is_zero());
}

fn lemmas_pair(a: &AttachedPoint, b: &AttachedPoint, k: u32, d: &ConstructionParams) -> PairDiagnostics {
    lemmas::pair_diagnostics(a, b, k, d)
}

fn exact_count(t: &Tessellation, sq: &Square, v: &Vertex, choice: &dyn Fn(&Vertex) -> u32, strip: &Strip, k: u32) -> u64 {
    if !strip.intersects_square(sq) {
        return 0;
    }
    if k == 0 {
        return 1;
    }
    t.shape()
        .children_of_color(choice(v))
        .map(|j| exact_count(t, &t.child_square(sq, j), &v.child(j), choice, strip, k - 1))
        .sum()
}

#[test]
fn float_filter_matches_exact_counts() {
    let t = tess();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let root = t.root().clone();
    for i in 0..60 {
        let k = 1 + i % 2;
        let strip = random_strip(&mut rng, &t, &root, k);
        let color = rng.gen_range(1..=25);
        let choice = move |v: &Vertex| 1 + (color + v.level() * 7) % 25;
        assert_eq!(
            count_strip_hits(&t, &root, choice, &strip, k),
            exact_count(&t, &root, &Vertex::root(), &choice, &strip, k)
        );
    }
    // corner-touching strips sit on the float boundary
    let s = t.params().side(1);
    let diagonal = Strip::new(1.into(), (-1).into(), 0.into(), cover_strip_width(t.params(), 1)).unwrap();
    for y0 in [Quad::zero(), s.scale(&half()), s.clone()] {
        let root = strip_root(&t, Quad::zero(), y0);
        assert_eq!(
            count_strip_hits(&t, &root, |_| 1, &diagonal, 1),
            exact_count(&t, &root, &Vertex::root(), &|_| 1, &diagonal, 1)
        );
    }
}
