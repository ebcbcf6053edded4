mod common;

use common::{dim, field, random_point, rng, BUILTIN_HAMILTONIANS};
use proptest::prelude::*;
use qk_core::expr::{parse_expr, BinOp, Expr, Func, ScalarField};
use qk_core::linalg::max_norm;

#[test]
fn dual_gradients_agree_with_central_differences() {
    let mut rng = rng(2024);
    for text in BUILTIN_HAMILTONIANS {
        let h = field(text, 1);
        for _ in 0..20 {
            let x = random_point(&mut rng, 4, 2.0);
            let exact = h.gradient(&x).unwrap();
            let fd = h.fd_gradient(&x, 1e-6).unwrap();
            let diff: Vec<f64> = exact
                .components()
                .iter()
                .zip(fd.components())
                .map(|(a, b)| a - b)
                .collect();
            assert!(max_norm(&diff) <= 1e-5, "{text} at {x:?}: {diff:?}");
        }
    }
}

#[test]
fn gradients_of_hand_differentiated_fields() {
    // ∂/∂x of each built-in, written out by hand.
    let mut rng = rng(5);
    type Partials = fn(&[f64]) -> [f64; 4];
    let by_hand: [Partials; 3] = [
        |x| [x[0], x[1], x[2], x[3]],
        |x| [x[1], x[0], 4.0 * x[2].powi(3), 0.0],
        |x| [x[0].cos(), x[1].exp() / 4.0, 0.0, 0.0],
    ];
    for (text, grad) in BUILTIN_HAMILTONIANS.iter().zip(by_hand) {
        let h = field(text, 1);
        for _ in 0..20 {
            let x = random_point(&mut rng, 4, 2.0);
            let got = h.gradient(&x).unwrap();
            for (a, b) in got.components().iter().zip(grad(&x)) {
                assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0), "{text}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn gradient_is_linear_in_the_field() {
    let polys = ["x1*x2 + x3^4", "x1^3 - 2*x4*x2 + 0.5", "(x1 + x2)^2*x3"];
    let mut rng = rng(9);
    for f_text in polys {
        for g_text in polys {
            for _ in 0..10 {
                let a: f64 = rand::Rng::gen_range(&mut rng, -3.0..3.0);
                let b: f64 = rand::Rng::gen_range(&mut rng, -3.0..3.0);
                let combo = field(&format!("({a:?})*({f_text}) + ({b:?})*({g_text})"), 1);
                let x = random_point(&mut rng, 4, 2.0);
                let gf = field(f_text, 1).gradient(&x).unwrap();
                let gg = field(g_text, 1).gradient(&x).unwrap();
                let gc = combo.gradient(&x).unwrap();
                for k in 0..4 {
                    let expected = a * gf.components()[k] + b * gg.components()[k];
                    let got = gc.components()[k];
                    assert!(
                        (got - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                        "{f_text} / {g_text}"
                    );
                }
            }
        }
    }
}

#[test]
fn evaluation_is_bit_deterministic() {
    let mut rng = rng(1);
    for text in BUILTIN_HAMILTONIANS {
        let x = random_point(&mut rng, 4, 2.0);
        let h1 = field(text, 1);
        let h2 = field(text, 1);
        assert_eq!(h1.evaluate(&x).unwrap().to_bits(), h2.evaluate(&x).unwrap().to_bits());
        let g1 = h1.gradient(&x).unwrap();
        let g2 = h2.gradient(&x).unwrap();
        assert!(g1
            .components()
            .iter()
            .zip(g2.components())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn larger_block_sizes_reach_every_variable() {
    let h = field("x16^2 + x9", 4);
    let mut x = vec![0.0; 16];
    x[15] = 3.0;
    let g = h.gradient(&x).unwrap();
    assert_eq!(g.components()[15], 6.0);
    assert_eq!(g.components()[8], 1.0);
    assert!(ScalarField::parse("x17", dim(4)).is_err());
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(vec![0.0, 0.5, 1.0, 2.0, 3.25, 1e-5, 6.02e23, 0.1]).prop_map(Expr::Num),
        (0usize..4).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn display_round_trips_through_parser(e in arb_expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text, 4).unwrap(), e);
    }

    #[test]
    fn polynomial_gradients_match_differences(
        c in proptest::collection::vec(-3i32..=3, 4),
        x in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let text = format!("{}*x1*x2 + {}*x3^3 + {}*x4^2*x1 + {}", c[0], c[1], c[2], c[3]);
        let h = field(&text, 1);
        let exact = h.gradient(&x).unwrap();
        let fd = h.fd_gradient(&x, 1e-6).unwrap();
        for (a, b) in exact.components().iter().zip(fd.components()) {
            prop_assert!((a - b).abs() <= 1e-5);
        }
    }
}
