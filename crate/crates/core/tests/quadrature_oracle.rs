//! Ladder-operator couplings against direct 2D quadrature of the mode profile.

use lgatom::lg_field::*;
use lgatom::trap_fock::{FockBasis, FockLabel};
use lgatom::C64;

const R0: f64 = 1.0;

fn labels_up_to(n: usize) -> Vec<FockLabel> {
    FockBasis::new(n).labels().to_vec()
}

/// Truncated-mode matrix element for every pair with N <= max_n.
fn check_truncated_block(l: i32, eta: f64, max_n: usize) -> f64 {
    let mode = LgMode::from_eta(l, R0, eta).unwrap();
    let grid = QuadratureGrid::for_scales(R0, mode.waist()).unwrap();
    // Cutoff large enough that the power is exact on the N <= max_n block.
    let trap = FockBasis::new(max_n + l.unsigned_abs() as usize);
    let power = trap.position_power(l).scale(C64::from(eta.powi(l.abs())));
    let labels = labels_up_to(max_n);
    let tables: Vec<Vec<C64>> = labels
        .iter()
        .map(|&lab| grid.tabulate_wavefunction(&TrapWavefunction::from_label(lab, R0).unwrap()))
        .collect();
    let u = grid.tabulate_mode(&mode, true);
    let mut worst: f64 = 0.0;
    for (a, &bra) in labels.iter().enumerate() {
        for (b, &ket) in labels.iter().enumerate() {
            let quad = grid.matrix_element(&tables[a], &u, &tables[b]);
            let alg = power.get(trap.index_of(bra).unwrap(), trap.index_of(ket).unwrap());
            worst = worst.max((quad - alg).norm());
        }
    }
    worst
}

#[test]
fn truncated_mode_matches_ladder_power() {
    for l in [-2, -1, 1, 2] {
        for eta in [0.1, 0.3] {
            let err = check_truncated_block(l, eta, 3);
            assert!(err < 1e-8, "l={l} eta={eta}: {err:e}");
        }
    }
}

#[test]
fn angular_selection_rule() {
    let mode = LgMode::from_eta(1, R0, 0.2).unwrap();
    let grid = QuadratureGrid::for_scales(R0, mode.waist()).unwrap();
    for bra in labels_up_to(3) {
        for ket in labels_up_to(3) {
            if bra.angular() - ket.angular() == 1 {
                continue;
            }
            let q = coupling_element_quadrature(
                &TrapWavefunction::from_label(bra, R0).unwrap(),
                &TrapWavefunction::from_label(ket, R0).unwrap(),
                &mode,
                &grid,
                false,
            );
            assert!(q.value.norm() < 1e-12, "{bra} {ket}: {}", q.value);
        }
    }
}

#[test]
fn second_order_element_from_ground_state() {
    let eta = 0.15;
    let mode = LgMode::from_eta(2, R0, eta).unwrap();
    let grid = QuadratureGrid::for_scales(R0, mode.waist()).unwrap();
    let q = coupling_element_quadrature(
        &TrapWavefunction::from_label(FockLabel::new(2, 0), R0).unwrap(),
        &TrapWavefunction::from_label(FockLabel::VACUUM, R0).unwrap(),
        &mode,
        &grid,
        true,
    );
    assert!((q.value - C64::from(2f64.sqrt() * eta * eta)).norm() < 1e-10);
    assert!(q.tail_estimate < 1e-12);
}

#[test]
fn full_mode_first_sideband_closed_form() {
    for eta in [0.05, 0.1, 0.4] {
        let mode = LgMode::from_eta(1, R0, eta).unwrap();
        let grid = QuadratureGrid::for_scales(R0, mode.waist()).unwrap();
        let q = coupling_element_quadrature(
            &TrapWavefunction::from_label(FockLabel::new(1, 0), R0).unwrap(),
            &TrapWavefunction::from_label(FockLabel::VACUUM, R0).unwrap(),
            &mode,
            &grid,
            false,
        );
        let exact = eta / (1.0 + eta * eta).powi(2);
        assert!((q.value.re - exact).abs() < 1e-10 && q.value.im.abs() < 1e-10);
    }
}

#[test]
fn full_mode_deviation_is_second_order() {
    let dev = |eta: f64| {
        let mode = LgMode::from_eta(1, R0, eta).unwrap();
        let grid = QuadratureGrid::for_scales(R0, mode.waist()).unwrap();
        let bra = TrapWavefunction::from_label(FockLabel::new(1, 0), R0).unwrap();
        let ket = TrapWavefunction::from_label(FockLabel::VACUUM, R0).unwrap();
        let full = coupling_element_quadrature(&bra, &ket, &mode, &grid, false).value;
        let lead = coupling_element_quadrature(&bra, &ket, &mode, &grid, true).value;
        ((full - lead) / lead).norm()
    };
    let ratio = dev(0.1) / dev(0.05);
    assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
}
