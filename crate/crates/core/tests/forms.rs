mod common;

use common::{dim, flavor, random_point, rng};
use proptest::prelude::*;
use qk_core::forms::{
    canonical_one_form, exterior_derivative, pullback_by_dual, symplectic_form, AffineOneForm, ConstantTwoForm,
};
use qk_core::linalg::{IntMatrix, RealMatrix};
use qk_core::structure::{build_structure, Label, Space, StructureKind};
use qk_oracles::{expected_omega, DMatrix};

fn liouville(label: Label, n: usize) -> AffineOneForm {
    let dual = build_structure(StructureKind::new(label, Space::Cotangent), dim(n));
    pullback_by_dual(&dual, &canonical_one_form(dim(n))).unwrap()
}

fn to_real(m: &DMatrix<f64>) -> RealMatrix {
    RealMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// `(dα)_{ab} = ∂_a α_b − ∂_b α_a` by central differences of the
/// coefficient functions at `x`.
fn fd_exterior_derivative(coeffs: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> RealMatrix {
    let size = x.len();
    let mut partials = RealMatrix::zeros(size, size); // partials[a][b] = ∂_a α_b
    let mut xp = x.to_vec();
    for a in 0..size {
        xp[a] = x[a] + h;
        let plus = coeffs(&xp);
        xp[a] = x[a] - h;
        let minus = coeffs(&xp);
        xp[a] = x[a];
        for b in 0..size {
            partials.set(a, b, (plus[b] - minus[b]) / (2.0 * h));
        }
    }
    &partials - &partials.transpose()
}

#[test]
fn derived_symplectic_forms_match_wedge_expansions() {
    for n in 1..=8 {
        for label in Label::ALL {
            let derived = symplectic_form(label, dim(n));
            assert_eq!(
                derived.matrix(),
                &to_real(&expected_omega(flavor(label), n)),
                "{label} n={n}"
            );
        }
    }
}

#[test]
fn fd_exterior_derivative_agrees_on_liouville_forms() {
    let mut rng = rng(7);
    for label in Label::ALL {
        let lambda = liouville(label, 1);
        let d = exterior_derivative(&lambda);
        for _ in 0..10 {
            let x = random_point(&mut rng, 4, 2.0);
            let fd = fd_exterior_derivative(|p| lambda.coefficients(p).unwrap(), &x, 1e-5);
            assert!(fd.max_abs_diff(d.matrix()) < 1e-9, "{label}");
        }
    }
    // d(x_2 dx_1) = -dx_1 ∧ dx_2
    let mut l = RealMatrix::zeros(4, 4);
    l.set(0, 1, 1.0);
    let form = AffineOneForm::new(dim(1), l, vec![0.0; 4]).unwrap();
    let fd = fd_exterior_derivative(|p| form.coefficients(p).unwrap(), &[0.3, -0.7, 1.1, 0.2], 1e-5);
    let expected = ConstantTwoForm::from_wedges(dim(1), [(0, 1, -1.0)]).unwrap();
    assert!(fd.max_abs_diff(expected.matrix()) < 1e-9);
    assert_eq!(exterior_derivative(&form), expected);
}

#[test]
fn symplectic_forms_are_closed() {
    // Treat x ↦ −dλ(x) (finite-difference reconstruction) as a 2-form field
    // and check (dΦ)_{abc} = ∂_a Φ_bc + ∂_b Φ_ca + ∂_c Φ_ab vanishes.
    let mut rng = rng(11);
    for label in Label::ALL {
        let lambda = liouville(label, 1);
        let phi_at = |x: &[f64]| -&fd_exterior_derivative(|p| lambda.coefficients(p).unwrap(), x, 1e-4);
        for _ in 0..10 {
            let x = random_point(&mut rng, 4, 2.0);
            let h = 1e-3;
            let mut grads = Vec::new();
            for a in 0..4 {
                let mut xp = x.clone();
                xp[a] += h;
                let mut xm = x.clone();
                xm[a] -= h;
                grads.push((&phi_at(&xp) - &phi_at(&xm)).map(|v| v / (2.0 * h)));
            }
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let d = grads[a].get(b, c) + grads[b].get(c, a) + grads[c].get(a, b);
                        assert!(d.abs() <= 1e-6, "{label}: dΦ[{a}{b}{c}] = {d}");
                    }
                }
            }
            assert!(phi_at(&x).max_abs_diff(symplectic_form(label, dim(1)).matrix()) < 1e-9);
        }
    }
}

#[test]
fn symplectic_forms_are_nondegenerate_signed_permutations() {
    for n in 1..=8 {
        for label in Label::ALL {
            let phi = symplectic_form(label, dim(n));
            assert_eq!(phi.determinant().abs(), 1.0, "{label} n={n}");
            let m = phi.integer_matrix().unwrap();
            assert!(m.is_signed_permutation());
            assert_eq!(m.matmul(&m).unwrap(), -&IntMatrix::identity(4 * n));
        }
    }
}

#[test]
fn metric_forms_and_dual_forms_differ_by_sign() {
    use qk_core::forms::metric_kaehler_form;
    use qk_core::structure::EuclideanMetric;
    for n in 1..=4 {
        for label in Label::ALL {
            let t = build_structure(StructureKind::new(label, Space::Tangent), dim(n));
            let k = metric_kaehler_form(&t, &EuclideanMetric::new(dim(n))).unwrap();
            assert_eq!(k, symplectic_form(label, dim(n)).negated(), "{label} n={n}");
        }
    }
}

proptest! {
    #[test]
    fn interior_product_is_first_slot_evaluation(
        label_idx in 0usize..3,
        x in proptest::collection::vec(-1000i32..=1000, 8),
        v in proptest::collection::vec(-1000i32..=1000, 8),
    ) {
        // Small integers keep every product and sum exact in f64.
        let phi = symplectic_form(Label::ALL[label_idx], dim(2));
        let x: Vec<f64> = x.into_iter().map(f64::from).collect();
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let covector = phi.interior_product(&x).unwrap();
        let contracted: f64 = covector.iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assert_eq!(contracted, phi.evaluate(&x, &v).unwrap());
        prop_assert_eq!(phi.evaluate(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn pullback_is_linear(
        label_idx in 0usize..3,
        a in -8i32..=8,
        c in proptest::collection::vec(-100i32..=100, 4),
    ) {
        let dual = build_structure(StructureKind::new(Label::ALL[label_idx], Space::Cotangent), dim(1));
        let w = canonical_one_form(dim(1));
        let scaled = AffineOneForm::new(
            dim(1),
            w.linear().map(|e| e * f64::from(a)),
            c.iter().map(|&k| f64::from(k)).collect(),
        ).unwrap();
        let pulled = pullback_by_dual(&dual, &scaled).unwrap();
        let base = pullback_by_dual(&dual, &w).unwrap();
        prop_assert_eq!(pulled.linear(), &base.linear().map(|e| e * f64::from(a)));
        let c_real: Vec<f64> = c.iter().map(|&k| f64::from(k)).collect();
        prop_assert_eq!(pulled.constant().to_vec(), dual.apply(&c_real).unwrap());
    }
}
