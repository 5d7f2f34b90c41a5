use entcat_core::distill::{
    distill_to, recurrence_step, recurrence_step_simulated, sweep, synthesize_tau_eps, WernerState,
};
use entcat_core::qstate::{random_state, trace_norm_dist, Ensemble};
use entcat_core::{Party, SystemLayout};

#[test]
fn closed_form_matches_two_copy_simulation_on_grid() {
    for i in 0..50 {
        let f = 0.25 + 0.75 * i as f64 / 49.0;
        let (out, p) = recurrence_step_simulated(f).unwrap();
        let (f_out, p_cf) = recurrence_step(f).unwrap();
        let fs = WernerState::singlet_fidelity(&out).unwrap();
        assert!((fs - f_out).abs() < 1e-10, "F = {f}");
        assert!((p - p_cf).abs() < 1e-10, "p at F = {f}");
    }
}

#[test]
fn rounds_improve_above_one_half() {
    for i in 1..40 {
        let f = 0.5 + 0.5 * i as f64 / 40.0;
        let (g, _) = recurrence_step(f).unwrap();
        assert!(g > f);
    }
}

#[test]
fn round_count_matches_iterated_map() {
    for (start, target) in [(0.6, 0.8), (0.8, 0.95), (0.51, 0.99), (0.7, 0.71)] {
        let mut f = start;
        let mut n = 0;
        while f < target {
            f = recurrence_step(f).unwrap().0;
            n += 1;
        }
        assert_eq!(distill_to(target, start).unwrap().rounds.len(), n);
    }
}

#[test]
fn sweep_rows_are_consistent() {
    let rows = sweep(&[0.3, 0.6, 0.9]).unwrap();
    for r in rows {
        assert!((r.expected_copies - 2.0 / r.p).abs() < 1e-12);
        assert!(r.p > 0.0 && r.p <= 1.0);
    }
}

#[test]
fn tau_eps_shrinks_with_resource_fidelity() {
    let l = SystemLayout::new(vec![
        entcat_core::Factor::new(Party::ALICE, 2),
        entcat_core::Factor::new(Party::BOB, 2),
        entcat_core::Factor::new(Party::BOB, 2),
        entcat_core::Factor::new(Party::ALICE, 3),
    ])
    .unwrap();
    let tau = random_state(&l, Ensemble::GinibreMixed, 6);
    let mut last = f64::INFINITY;
    for i in 0..=20 {
        let f = 0.3 + 0.7 * i as f64 / 20.0;
        let (_, eps) = synthesize_tau_eps(&tau, f).unwrap();
        assert!(eps <= last + 1e-12);
        last = eps;
    }
    let (t, eps) = synthesize_tau_eps(&tau, 1.0).unwrap();
    assert!(eps < 1e-12 && trace_norm_dist(&t, &tau).unwrap() < 1e-12);
    // Alice-only catalysts are delivered exactly
    let local = random_state(&SystemLayout::single(Party::ALICE, 3).unwrap(), Ensemble::GinibreMixed, 1);
    assert!(synthesize_tau_eps(&local, 0.5).unwrap().1 < 1e-15);
}
