use entcat_core::catfactory::{
    build_catalyst, decoupled_catalysis_check, iterate_reuse, reduction_pipeline, verify_catalysis,
    verify_marginal_reduction, ReuseOptions,
};
use entcat_core::locc::{permute_factors, Channel, LoccProtocol};
use entcat_core::purecat::synthesize_pure_protocol;
use entcat_core::qstate::{random_state, random_unitary, rng_from_seed, trace_norm_dist, Ensemble};
use entcat_core::{Party, QState, SchmidtVector, SystemLayout};

fn sv(p: &[f64]) -> SchmidtVector {
    SchmidtVector::new(p.to_vec()).unwrap()
}

/// Independent evaluation of `Γ^{(k)}` through the flattened channel.
fn brute_gamma(lambda: &LoccProtocol, rho: &QState, n: usize) -> Vec<QState> {
    let gamma = lambda.flatten().unwrap().apply(&rho.power(n).unwrap()).unwrap();
    let per = rho.layout().len();
    (0..n)
        .map(|k| gamma.partial_trace(&(k * per..(k + 1) * per).collect::<Vec<_>>()).unwrap())
        .collect()
}

fn per_copy(single: &LoccProtocol, per: usize, n: usize) -> LoccProtocol {
    let layout = single.input().repeat(n).unwrap();
    let mut p = LoccProtocol::identity(layout);
    for c in 0..n {
        p = p.embed(&(c * per..(c + 1) * per).collect::<Vec<_>>(), single.clone()).unwrap();
    }
    p
}

#[test]
fn pure_example_matches_brute_force_marginals() {
    let rho = sv(&[0.5, 0.5]).canonical_state().unwrap();
    let single = synthesize_pure_protocol(&sv(&[0.5, 0.5]), &sv(&[0.75, 0.25])).unwrap();
    for n in [2, 3] {
        let lambda = per_copy(&single, 2, n);
        let asm = build_catalyst(&lambda, &rho, n).unwrap();
        let gammas = brute_gamma(&lambda, &rho, n);
        let w = 1.0 / n as f64;
        let want = QState::mixture(&gammas.iter().map(|g| (w, g)).collect::<Vec<_>>()).unwrap();

        let out = asm.embedding.run(&rho.tensor(&asm.tau).unwrap()).unwrap();
        let total = out.layout().len();
        let mu_s = out.partial_trace(&[0, 1]).unwrap();
        let mu_c = out.partial_trace(&(2..total).collect::<Vec<_>>()).unwrap();
        assert!(trace_norm_dist(&mu_s, &want).unwrap() < 1e-9);
        assert!(trace_norm_dist(&mu_c, &asm.tau).unwrap() < 1e-9);

        let target = sv(&[0.75, 0.25]).canonical_state().unwrap();
        let cert = verify_catalysis(&asm.embedding, &asm.tau, &rho, &target).unwrap();
        assert!(cert.catalyst_drift < 1e-9);
        assert!(cert.epsilon_achieved < 1e-8);
    }
}

#[test]
fn correlating_protocol_keeps_both_identities() {
    // swap copies and rotate one of them: Γ is correlated across copies
    for seed in 0..3u64 {
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, seed);
        let two = rho.layout().repeat(2).unwrap();
        let mut rng = rng_from_seed(seed + 10);
        let u = random_unitary(4, &mut rng);
        let lambda = permute_factors(&two, &[2, 3, 0, 1])
            .unwrap()
            .local_unitary(Party::ALICE, &[0, 2], u)
            .unwrap();
        let asm = build_catalyst(&lambda, &rho, 2).unwrap();
        let gammas = brute_gamma(&lambda, &rho, 2);
        for (a, b) in asm.gamma_marginals.iter().zip(&gammas) {
            assert!(trace_norm_dist(a, b).unwrap() < 1e-10);
        }
        let want = QState::mixture(&[(0.5, &gammas[0]), (0.5, &gammas[1])]).unwrap();
        let cert = verify_catalysis(&asm.embedding, &asm.tau, &rho, &want).unwrap();
        assert!(cert.catalyst_drift < 1e-9 && cert.epsilon_achieved < 1e-9);
    }
}

#[test]
fn catalysis_error_respects_reduction_bound() {
    // an imperfect per-copy protocol: the synthesized conversion followed by
    // a little local noise
    let rho = sv(&[0.6, 0.4]).canonical_state().unwrap();
    let sigma = sv(&[0.8, 0.2]).canonical_state().unwrap();
    let exact = synthesize_pure_protocol(&sv(&[0.6, 0.4]), &sv(&[0.8, 0.2])).unwrap();
    let mut rng = rng_from_seed(4);
    let u = random_unitary(2, &mut rng);
    let kraus = vec![
        nalgebra::DMatrix::identity(2, 2) * entcat_core::C64::new(0.99f64.sqrt(), 0.0),
        u * entcat_core::C64::new(0.01f64.sqrt(), 0.0),
    ];
    let noisy = exact.local_ops(Party::BOB, &[1], kraus, &[2]).unwrap();
    for n in [2, 3] {
        let lambda = per_copy(&noisy, 2, n);
        for m in 1..=n {
            let first_m = lambda.clone().with_output(&(0..2 * m).collect::<Vec<_>>()).unwrap();
            let red = verify_marginal_reduction(&first_m, &rho, &sigma, n, m).unwrap();
            let asm = build_catalyst(&lambda, &rho, n).unwrap();
            let cert = verify_catalysis(&asm.embedding, &asm.tau, &rho, &sigma).unwrap();
            let eps = red.max_error();
            assert!(cert.epsilon_achieved <= eps + 2.0 * red.delta() + 1e-12);
            assert!(cert.epsilon_achieved <= red.catalysis_bound() + 1e-12);
        }
    }
}

#[test]
fn reuse_does_not_accumulate_error() {
    let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 21);
    let two = rho.layout().repeat(2).unwrap();
    let lambda = permute_factors(&two, &[2, 3, 0, 1]).unwrap();
    let asm = build_catalyst(&lambda, &rho, 2).unwrap();
    let sigma = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 22);
    let delta = verify_catalysis(&asm.embedding, &asm.tau, &rho, &sigma).unwrap().epsilon_achieved;
    for q in [0.005, 0.02, 0.08] {
        let tau_eps = Channel::depolarizing(asm.tau.layout().clone(), 1.0 - q)
            .unwrap()
            .apply(&asm.tau)
            .unwrap();
        let out = iterate_reuse(&asm.embedding, &tau_eps, &asm.tau, &rho, &sigma, 5, ReuseOptions::default()).unwrap();
        for d in &out.drifts {
            assert!(*d < out.initial_eps + 1e-9);
        }
        for e in &out.certificate.per_marginal_errors {
            assert!(*e < out.initial_eps + delta + 1e-9);
        }
    }
}

#[test]
fn damaging_protocol_drifts() {
    // a protocol that depolarizes its catalyst is not a fixed point
    let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 2);
    let tau = QState::basis(SystemLayout::single(Party::ALICE, 2).unwrap(), 0).unwrap();
    let l = rho.layout().concat(tau.layout()).unwrap();
    let x = entcat_core::locc::weyl(2, 1, 0);
    let kraus = vec![
        nalgebra::DMatrix::identity(2, 2) * entcat_core::C64::new(0.9f64.sqrt(), 0.0),
        x * entcat_core::C64::new(0.1f64.sqrt(), 0.0),
    ];
    let lambda = LoccProtocol::identity(l).local_ops(Party::ALICE, &[2], kraus, &[2]).unwrap();
    let out = iterate_reuse(&lambda, &tau, &tau, &rho, &rho, 5, ReuseOptions::default()).unwrap();
    for w in out.drifts.windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn pipeline_reports_rate() {
    // catalyst = one more copy of rho, exchanged with the incoming copy
    let rho = sv(&[0.6, 0.4]).canonical_state().unwrap();
    let l = rho.layout().repeat(2).unwrap();
    let lambda = permute_factors(&l, &[2, 3, 0, 1]).unwrap();
    let x = entcat_core::locc::weyl(2, 1, 0);
    let kraus = vec![
        nalgebra::DMatrix::identity(2, 2) * entcat_core::C64::new(0.98f64.sqrt(), 0.0),
        x * entcat_core::C64::new(0.02f64.sqrt(), 0.0),
    ];
    let prepare = LoccProtocol::identity(rho.layout().clone())
        .local_ops(Party::BOB, &[1], kraus, &[2])
        .unwrap();
    let out = reduction_pipeline(&lambda, &prepare, &rho, &rho, &rho, 5).unwrap();
    assert_eq!(out.certificate.n, 5);
    assert_eq!(out.certificate.m, 4);
    assert!((out.certificate.rate_slack - 0.8).abs() < 1e-15);
    assert!(out.initial_eps > 0.0);
    for e in &out.certificate.per_marginal_errors {
        assert!(*e < out.initial_eps + 1e-9);
    }
    assert!(reduction_pipeline(&lambda, &prepare, &rho, &rho, &rho, 1).is_err());
}

#[test]
fn decoupling_on_near_pure_output() {
    let phi = QState::singlet();
    let m = QState::maximally_mixed(SystemLayout::two_qubits());
    let tau = random_state(&SystemLayout::single(Party::BOB, 2).unwrap(), Ensemble::GinibreMixed, 5);
    let l = phi.layout().concat(tau.layout()).unwrap();
    // Bob swaps his half of the pair with the catalyst qubit: the output is
    // correlated with the catalyst
    let swap = permute_factors(&l, &[0, 2, 1]).unwrap();
    for p in [0.0, 0.01, 0.05] {
        let rho = QState::mixture(&[(1.0 - p, &phi), (p, &m)]).unwrap();
        let r = decoupled_catalysis_check(&LoccProtocol::identity(l.clone()), &tau, &rho, &phi).unwrap();
        assert!(r.pass);
        let s = decoupled_catalysis_check(&swap, &tau, &rho, &phi).unwrap();
        assert!(s.decoupling.pass);
    }
}
