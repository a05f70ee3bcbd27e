//! Property tests: expression round-trips, randomized partition support
//! patterns, and cross-module invariants exercised on random inputs.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hvrfif::expr::{parse, BinOp, Dim, Expr, Func, Var};
use hvrfif::factor::FactorLists;
use hvrfif::partition::{Domain2D, Orientation};
use hvrfif::{
    ConnectionMatrix, HiddenDataset1D, MapSystem1D, Partition1D, Partition2D,
    DEFAULT_HIDDEN_MARGIN,
};

// ---------------------------------------------------------------------------
// Expression round-trip
// ---------------------------------------------------------------------------

fn arb_expr(depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0f64..1000.0).prop_map(Expr::Num),
        Just(Expr::Var(Var::X)),
        Just(Expr::Var(Var::Y)),
    ];
    leaf.prop_recursive(depth, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
            ])
                .prop_map(|(a, b, op)| Expr::Bin(op, Box::new(a), Box::new(b))),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), 0u32..6).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)),
            (
                inner,
                prop_oneof![
                    Just(Func::Sin),
                    Just(Func::Cos),
                    Just(Func::Abs),
                    Just(Func::Exp),
                    Just(Func::Sqrt),
                ]
            )
                .prop_map(|(e, f)| Expr::Call(f, Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in arb_expr(5)) {
        let printed = e.to_string();
        let reparsed = parse(&printed, Dim::Two)
            .unwrap_or_else(|err| panic!("failed to reparse `{printed}`: {err}"));
        prop_assert_eq!(e, reparsed);
    }

    #[test]
    fn identical_text_identical_ast_and_value(
        a in 0.01f64..10.0,
        b in 0.01f64..10.0,
        x in -2.0f64..2.0,
    ) {
        let text = format!("{a}*sin({b}*x)+{b}/({a}+abs(x))");
        let e1 = parse(&text, Dim::One).unwrap();
        let e2 = parse(&text, Dim::One).unwrap();
        prop_assert_eq!(&e1, &e2);
        prop_assert_eq!(e1.eval1(x).unwrap().to_bits(), e2.eval1(x).unwrap().to_bits());
    }
}

// ---------------------------------------------------------------------------
// Randomized partitions: support pattern and row stochasticity
// ---------------------------------------------------------------------------

fn random_knots(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut knots = vec![0.0];
    let mut x = 0.0;
    for _ in 0..n {
        x += 0.05 + rng.gen::<f64>();
        knots.push(x);
    }
    knots
}

fn random_partition_1d(rng: &mut ChaCha8Rng) -> (Vec<f64>, Partition1D) {
    let n = rng.gen_range(3..=10);
    let knots = random_knots(rng, n);
    let l = rng.gen_range(2..=n.min(5));
    let mut domains = vec![(0usize, n)];
    for _ in 1..l {
        let span = rng.gen_range(2..=n);
        let s = rng.gen_range(0..=n - span);
        domains.push((s, s + span));
    }
    // gamma(0) = 0 keeps every region covered through the full

    // interval domain; the rest are arbitrary
    let mut gamma = vec![0usize];
    for _ in 1..n {
        gamma.push(rng.gen_range(0..l));
    }
    let orientations = (0..n)
        .map(|_| {
            if rng.gen::<bool>() {
                Orientation::Plus
            } else {
                Orientation::Minus
            }
        })
        .collect();
    let p = Partition1D::new(n, domains, gamma, orientations).unwrap();
    (knots, p)
}

#[test]
fn connection_matrix_1d_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d_5eed);
    for case in 0..100 {
        let (knots, p) = random_partition_1d(&mut rng);
        let m = ConnectionMatrix::from_partition_1d(&p).unwrap();
        m.validate_stochastic(1e-12).unwrap();
        let n = p.region_count();
        for s in 0..n {
            let row_sum: f64 = m.rows()[s].iter().sum();
            assert!((row_sum - 1.0).abs() <= 1e-12, "case {case} row {s}");
            for t in 0..n {
                // support must match interval containment on coordinates
                let (rl, rh) = p.region_interval(&knots, s);
                let (dl, dh) = p.domain_interval(&knots, p.gamma()[t]);
                let contained = dl <= rl && rh <= dh;
                assert_eq!(
                    m.entry(s, t) > 0.0,
                    contained,
                    "case {case} entry ({s},{t})"
                );
            }
        }
    }
}

fn random_partition_2d(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Partition2D) {
    let n = rng.gen_range(3..=6);
    let m = rng.gen_range(3..=6);
    let xs = random_knots(rng, n);
    let ys = random_knots(rng, m);
    let l = rng.gen_range(2..=4);
    let mut domains = vec![Domain2D {
        sx: 0,
        ex: n,
        sy: 0,
        ey: m,
    }];
    for _ in 1..l {
        let wx = rng.gen_range(2..=n);
        let wy = rng.gen_range(2..=m);
        let sx = rng.gen_range(0..=n - wx);
        let sy = rng.gen_range(0..=m - wy);
        domains.push(Domain2D {
            sx,
            ex: sx + wx,
            sy,
            ey: sy + wy,
        });
    }
    let count = n * m;
    let mut gamma = vec![0usize];
    for _ in 1..count {
        gamma.push(rng.gen_range(0..l));
    }
    let orientations = (0..count)
        .map(|_| {
            let o = |b: bool| if b { Orientation::Plus } else { Orientation::Minus };
            (o(rng.gen()), o(rng.gen()))
        })
        .collect();
    let p = Partition2D::new(n, m, domains, gamma, orientations).unwrap();
    (xs, ys, p)
}

#[test]
fn connection_matrix_2d_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2d_5eed);
    for case in 0..100 {
        let (xs, ys, p) = random_partition_2d(&mut rng);
        let m = ConnectionMatrix::from_partition_2d(&p).unwrap();
        m.validate_stochastic(1e-12).unwrap();
        for s in 0..p.region_count() {
            for t in 0..p.region_count() {
                let ((rxl, rxh), (ryl, ryh)) = p.region_rect(&xs, &ys, s);
                let ((dxl, dxh), (dyl, dyh)) = p.domain_rect(&xs, &ys, p.gamma()[t]);
                let contained = dxl <= rxl && rxh <= dxh && dyl <= ryl && ryh <= dyh;
                assert_eq!(
                    m.entry(s, t) > 0.0,
                    contained,
                    "case {case} entry ({s},{t})"
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Interpolation preservation on random interpolating fields
// ---------------------------------------------------------------------------

#[test]
fn operator_preserves_knot_values_on_random_fields() {
    let dataset = HiddenDataset1D::new(
        vec![0.0, 0.25, 0.5, 0.75, 1.0],
        vec![20.0, 30.0, 10.0, 50.0, 40.0],
        vec![0.0; 5],
    )
    .unwrap();
    let partition = Partition1D::new(
        4,
        vec![(0, 2), (2, 4)],
        vec![0, 0, 1, 1],
        vec![Orientation::Plus; 4],
    )
    .unwrap();
    let factors = FactorLists::from_exprs(
        vec![Expr::Num(0.3), Expr::Num(0.85), Expr::Num(0.8), Expr::Num(0.5)],
        vec![Expr::Num(0.64), Expr::Num(0.14), Expr::Num(0.19), Expr::Num(0.49)],
        vec![Expr::Num(0.8), Expr::Num(0.6), Expr::Num(0.4), Expr::Num(0.5)],
        vec![Expr::Num(0.19), Expr::Num(0.37), Expr::Num(0.48), Expr::Num(0.43)],
    );
    let sys = MapSystem1D::build(dataset, partition, factors).unwrap();
    let report = sys.contraction_report(DEFAULT_HIDDEN_MARGIN).unwrap();
    assert!((report.s_bar - 0.99).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let mut h = sys.data_interpolant(97);
        let knots: Vec<f64> = sys.dataset().xs().to_vec();
        let grid: Vec<f64> = h.grid().to_vec();
        for (i, v) in h.values_mut().iter_mut().enumerate() {
            if !knots.contains(&grid[i]) {
                v[0] += rng.gen::<f64>() * 40.0 - 20.0;
                v[1] += rng.gen::<f64>() * 10.0 - 5.0;
            }
        }
        let th = sys.rb_apply(&h).unwrap();
        for (k, &x) in knots.iter().enumerate() {
            let got = th.eval(x);
            let want = sys.dataset().value(k);
            assert!(
                (got[0] - want[0]).abs() + (got[1] - want[1]).abs() <= 1e-12,
                "knot {k}"
            );
        }
    }
}
