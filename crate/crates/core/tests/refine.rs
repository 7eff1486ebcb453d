mod common;

use common::{check_invariants, corner_mesh, random_mesh};
use h1stab::mesh::Mesh;
use h1stab::refine::{refine, RefineError};
use h1stab::Strategy;

const RUNS: u64 = 50;

fn fuzz(strategy: Strategy, steps: usize) {
    for seed in 0..RUNS {
        let mesh = random_mesh(strategy, 3, 3, steps, 0.3, seed);
        check_invariants(&mesh, strategy, 9.0).unwrap();
    }
}

#[test]
fn fuzz_qr() {
    fuzz(Strategy::Qr, 6);
}

#[test]
fn fuzz_qrg() {
    fuzz(Strategy::Qrg, 6);
}

#[test]
fn fuzz_qrb() {
    fuzz(Strategy::Qrb, 4);
}

#[test]
fn graded_corner_meshes() {
    for strategy in [Strategy::Qr, Strategy::Qrg, Strategy::Qrb] {
        let mesh = corner_mesh(strategy, 2, 2, 8);
        check_invariants(&mesh, strategy, 4.0).unwrap();
        assert!(mesh.active_elements().iter().any(|&e| mesh.gen(e) >= 16.0));
    }
}

#[test]
fn red_refinement_of_one_cell() {
    let m = refine(&Mesh::make_initial(1, 1, 0.0), Strategy::Qrg, &[0]).unwrap();
    assert_eq!(m.active_elements().len(), 4);
    assert!(m.hanging().is_empty());
}

#[test]
fn skewed_grid_keeps_invariants() {
    let mut m = Mesh::make_initial(2, 3, 0.4);
    for step in 0..4 {
        let marked: Vec<_> = m
            .active_elements()
            .into_iter()
            .filter(|e| (e + step) % 3 == 0)
            .collect();
        m = refine(&m, Strategy::Qrg, &marked).unwrap();
    }
    check_invariants(&m, Strategy::Qrg, 6.0).unwrap();
}

#[test]
fn unknown_mark_is_rejected() {
    let m = Mesh::make_initial(1, 1, 0.0);
    assert!(matches!(
        refine(&m, Strategy::Qr, &[7]),
        Err(RefineError::InvalidMark(7))
    ));
}

#[test]
fn refinement_is_deterministic() {
    let a = random_mesh(Strategy::Qrb, 2, 2, 3, 0.3, 11);
    let b = random_mesh(Strategy::Qrb, 2, 2, 3, 0.3, 11);
    assert_eq!(a, b);
}
