mod common;

use common::{eig_oracle, pencil_from};
use h1stab::integrate::{default_points, mass_matrices_with_points};
use h1stab::{MatrixF64, RefElementF64, Shape, SymPairF64};
use proptest::prelude::*;

fn pencil() -> impl Strategy<Value = (MatrixF64, MatrixF64)> {
    (1usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n * n),
            0.05f64..2.0,
        )
            .prop_map(move |(x, y, shift)| pencil_from(n, &x, &y, shift))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigenvalues_match_oracle((a, m) in pencil()) {
        let pair = SymPairF64::new(a.clone(), m.clone()).unwrap();
        let ours = pair.eigenvalues().unwrap();
        let theirs = eig_oracle(&a, &m);
        let scale = theirs.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        for (x, y) in ours.iter().zip(&theirs) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
        prop_assert!((pair.lambda_min().unwrap() - theirs[0]).abs() <= 1e-10 * scale);
        prop_assert!(pair.exceeds(theirs[0] - 1e-8 * scale));
        prop_assert!(!pair.exceeds(theirs[0] + 1e-8 * scale));
    }

    #[test]
    fn eigenvalues_scale_with_the_pencil((a, m) in pencil(), s in 0.1f64..10.0) {
        let base = SymPairF64::new(a.clone(), m.clone()).unwrap().lambda_min().unwrap();
        let scaled = SymPairF64::new(a.scale(s), m.clone()).unwrap().lambda_min().unwrap();
        let expected = s * base;
        prop_assert!((scaled - expected).abs() <= 1e-10 * expected.abs().max(1.0));
    }
}

#[test]
fn mass_matrices_are_exact() {
    for (shape, max_p) in [(Shape::Square, 10), (Shape::Triangle, 12)] {
        for p in 1..=max_p {
            let el = RefElementF64::new(shape, p).unwrap();
            let n = default_points(shape, p);
            let a = mass_matrices_with_points(&el, n);
            let b = mass_matrices_with_points(&el, 2 * n);
            for (x, y) in [(&a.m_l, &b.m_l), (&a.m_x, &b.m_x), (&a.m_y, &b.m_y)] {
                let diff = x.add_scaled(y, -1.0).max_abs();
                assert!(diff <= 1e-13, "{shape:?} p={p}: {diff:e}");
            }
        }
    }
}

#[test]
fn mass_matrix_reproduces_area_and_moments() {
    for (shape, area, mx) in [(Shape::Square, 1.0, 0.5), (Shape::Triangle, 0.5, 1.0 / 6.0)] {
        for p in 1..=8 {
            let el = RefElementF64::new(shape, p).unwrap();
            let mm = mass_matrices_with_points(&el, default_points(shape, p));
            // Lagrange bases sum to one, so the entry sums are ∫1 and ∫x
            assert!((mm.m_l.sum() - area).abs() < 1e-13);
            assert!((mm.m_x.sum() - mx).abs() < 1e-13);
            assert!((mm.m_y.sum() - mx).abs() < 1e-13);
        }
    }
}
