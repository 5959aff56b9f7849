import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlspsim import linalg, qrt
from qlspsim.errors import InputValidationError, NoDecayError
from qlspsim.problem import augment, decompose_solution, generate_instance


def hand_config(c=0.05, seed=0, **kw):
    return qrt.QrtConfig(c=c, t=math.pi / (2 * c / math.sqrt(2)), rng_seed=seed, **kw)


def test_free_hamiltonian_eigen_relations(hand_system):
    cfg = qrt.QrtConfig(c=0.0 + 1e-300, t=1.0)
    H0 = qrt.free_hamiltonian(hand_system, cfg)
    n = 5
    top = qrt.initial_state(hand_system)
    np.testing.assert_allclose(H0 @ top, -0.5 * top, atol=1e-15)
    eig = hand_system.eig_B()
    for E, phi in zip(eig.eigenvalues, eig.eigenvectors.T):
        state = np.concatenate([phi, np.zeros(n)])
        np.testing.assert_allclose(H0 @ state, (-0.5 + E) * state, atol=1e-12)
    bottom = np.concatenate([hand_system.target_state, np.zeros(n)])
    assert np.vdot(bottom, H0 @ bottom).real == pytest.approx(-0.5, abs=1e-14)


def test_hamiltonian_structure(hand_system):
    cfg = hand_config()
    H = qrt.build_hamiltonian(hand_system, cfg)
    assert H.shape == (10, 10)
    assert linalg.hermitian_defect(H) == 0.0
    np.testing.assert_allclose(H - qrt.free_hamiltonian(hand_system, cfg),
                               cfg.c * np.kron(qrt.SIGMA_X, np.eye(5)), atol=0)
    # restricted to the resonant pair the coupling is c d1
    top = qrt.initial_state(hand_system)
    bottom = np.concatenate([hand_system.target_state, np.zeros(5)])
    assert abs(np.vdot(bottom, H @ top)) == pytest.approx(cfg.c / math.sqrt(2), abs=1e-15)


def test_config_validation(hand_system):
    with pytest.raises(InputValidationError):
        qrt.QrtConfig(c=0.1, t=1.0, omega=1.0, epsilon0=-0.9).validate()
    with pytest.raises(InputValidationError):
        qrt.QrtConfig(c=0.0, t=1.0).validate()
    with pytest.raises(InputValidationError):
        qrt.QrtConfig(c=1.0, t=1.0).validate(hand_system)
    with pytest.raises(InputValidationError):
        qrt.QrtConfig(c=0.1, t=1.0, max_rounds=0).validate()
    with pytest.raises(InputValidationError):
        qrt.make_config(hand_system, 1e-4, 0.0)


def test_coupling_rule():
    assert qrt.coupling_for(0.1, 1.0) == 0.05
    assert qrt.coupling_for(0.1, 1e-4) == pytest.approx(0.1 * 0.005)


def test_evolve_preserves_norm_and_identity_at_zero(hand_system):
    cfg = hand_config()
    H = qrt.build_hamiltonian(hand_system, cfg)
    rng = np.random.default_rng(0)
    psi = linalg.normalize(rng.normal(size=10) + 1j * rng.normal(size=10))
    out = qrt.evolve_once(H, cfg, psi)
    assert abs(np.linalg.norm(out) - 1) <= 1e-10
    zero = qrt.QrtConfig(c=cfg.c, t=0.0)
    np.testing.assert_allclose(qrt.evolve_once(H, zero, psi), psi, atol=1e-14)


def test_two_level_truncation_is_rabi():
    c, d1 = 0.03, 0.6
    g = c * d1
    H2 = np.array([[-0.5, g], [g, -0.5]], dtype=complex)
    for t in (0.0, 3.0, math.pi / (2 * g)):
        amp = linalg.expm_i(H2, t)[1, 0]
        assert abs(amp) == pytest.approx(abs(math.sin(g * t)), abs=1e-12)
    assert abs(linalg.expm_i(H2, math.pi / (2 * g))[1, 0]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_rabi_formula_cases():
    assert qrt.rabi_transition_probability(0.2, 0.0, 0.0, 3.0) == pytest.approx(math.sin(0.2 * 3.0) ** 2, abs=1e-15)
    assert qrt.rabi_transition_probability(0.0, 0.5, 0.0, 1.0) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 0.5), st.floats(0.0, 1.0), st.floats(-3.0, 3.0), st.floats(0.0, 200.0))
def test_rabi_formula_matches_simulation(c, d1, E, t):
    p = qrt.rabi_transition_probability(c, d1, E, t)
    g2 = 4 * c * c * (1 - d1 * d1)
    assert 0.0 <= p <= g2 / (g2 + E * E) + 1e-15 if g2 + E * E > 0 else p == 0.0
    assert abs(p - qrt.simulate_error_transition(c, d1, E, t)) <= 1e-10


def test_leakage_bound_values(hand_system):
    assert qrt.leakage_bound(hand_system, hand_config(), 1 / math.sqrt(2)) == pytest.approx(0.005, rel=1e-12)
    assert qrt.leakage_bound(hand_system, hand_config(), 1.0) == 0.0
    # fixed c t: the budget shrinks like c^2
    vals = [qrt.leakage_bound(hand_system, hand_config(c), 0.7) for c in (0.1, 0.01, 0.001)]
    assert vals[0] > vals[1] > vals[2] and vals[2] == pytest.approx(vals[0] * 1e-4, rel=1e-12)


def test_measure_probe_cases():
    rng = qrt.make_rng(1)
    a = linalg.normalize(np.arange(1, 4) + 0j)
    state = np.concatenate([a, np.zeros(3)])
    for _ in range(50):
        bit, col = qrt.measure_probe(state, rng)
        assert bit == 0
        np.testing.assert_allclose(col, state)
    half = np.concatenate([a, a]) / math.sqrt(2)
    bit, col = qrt.measure_probe(half, qrt.make_rng(2))
    assert abs(np.linalg.norm(col) - 1) < 1e-15


def test_measure_probe_statistics():
    rng = np.random.default_rng(5)
    psi = linalg.normalize(rng.normal(size=8) + 1j * rng.normal(size=8))
    p0 = float(np.vdot(psi[:4], psi[:4]).real)
    gen = qrt.make_rng(11)
    n = 10_000
    zeros = sum(qrt.measure_probe(psi, gen)[0] == 0 for _ in range(n))
    assert abs(zeros / n - p0) <= 3 * math.sqrt(p0 * (1 - p0) / n)


def test_hand_example_decays_on_round_one(hand_system):
    cfg = hand_config()
    sess = qrt.QrtSession(hand_system, cfg)
    p0, leak = sess.populations([cfg.t])
    assert p0[0] >= 0.95
    rec = qrt.qrt_solve(hand_system, cfg, sess)
    assert rec.rounds == 1 and rec.probe_outcomes == [0]
    assert rec.fidelity >= 1 - 4 * 0.0025 * 0.5 / 1
    assert rec.error_budget == pytest.approx(0.005)
    assert rec.predicted_p == pytest.approx(1.0)
    assert abs(np.linalg.norm(rec.final_state) - 1) <= 1e-12
    assert set(rec.to_dict()) == {"rounds", "outcomes", "p_pred", "p_emp", "leakage_bound", "fidelity"}


def test_determinism():
    sys = augment(generate_instance(6, 8.0, 3, seed=4), 3.0)
    d1 = decompose_solution(sys).d1
    cfg = qrt.make_config(sys, 1e-2, d1 * 0.7, seed=77)
    a = qrt.qrt_solve(sys, cfg)
    b = qrt.qrt_solve(sys, cfg)
    assert a.probe_outcomes == b.probe_outcomes
    np.testing.assert_array_equal(a.final_state, b.final_state)
    assert a.to_dict() == b.to_dict()


def test_no_decay_error_carries_record(hand_system):
    # t chosen so that c t d1 = pi: the decay probability vanishes to leading order
    c = 0.05
    cfg = qrt.QrtConfig(c=c, t=math.pi / (c / math.sqrt(2)), max_rounds=2, rng_seed=0)
    with pytest.raises(NoDecayError) as exc:
        qrt.qrt_solve(hand_system, cfg)
    rec = exc.value.record
    assert rec.rounds == 2 and rec.probe_outcomes == [1, 1]
    assert rec.fidelity == 0.0


@pytest.mark.parametrize("shape", ["linear", "two_cluster", "geometric"])
def test_leakage_within_budget_over_time(shape):
    sys = augment(generate_instance(8, 20.0, 4, seed=3, spectrum_shape=shape), 5.0)
    d1 = decompose_solution(sys).d1
    cfg = qrt.make_config(sys, 1e-2, d1)
    sess = qrt.QrtSession(sys, cfg)
    times = np.linspace(0, cfg.t, 200)
    p0, leak = sess.populations(times)
    bound = qrt.leakage_bound(sys, cfg, d1)
    assert np.all(leak <= bound)
    expected = np.sin(cfg.c * times * d1) ** 2
    assert np.max(np.abs(p0 - expected)) <= bound


def test_populations_agree_with_state_at():
    sys = augment(generate_instance(4, 4.0, 3, seed=1), 2.0)
    cfg = qrt.make_config(sys, 1e-2, 0.8)
    sess = qrt.QrtSession(sys, cfg)
    n = 2 * sys.N + 1
    p0, _ = sess.populations([0.3 * cfg.t])
    psi = sess.state_at(0.3 * cfg.t)
    assert p0[0] == pytest.approx(np.vdot(psi[:n], psi[:n]).real, abs=1e-12)


def test_query_estimator():
    base = qrt.QrtConfig(c=0.01, t=100.0)
    double = qrt.QrtConfig(c=0.01, t=200.0)
    e1 = qrt.estimate_qrt_queries(base, 2.0, 1e-6, 4)
    e2 = qrt.estimate_qrt_queries(double, 2.0, 1e-6, 4)
    L = math.log(1e6)
    assert e2 >= 2 * e1 - 4 * L - 2
    big = qrt.QrtConfig(c=0.01, t=1e7)
    assert qrt.estimate_qrt_queries(big, 2.0, 1e-6, 4) == pytest.approx(4 * 2.0 * 1e7, rel=1e-5)
    with pytest.raises(InputValidationError):
        qrt.estimate_qrt_queries(base, 0.0, 1e-6, 4)


def test_query_estimator_linear_in_kappa():
    kappas = np.array([2.0, 5.0, 10.0, 20.0, 50.0])
    est = []
    for k in kappas:
        sys = augment(generate_instance(16, float(k), 4, seed=0), 1.0)
        cfg = qrt.make_config(sys, 1e-4, 0.8)
        est.append(qrt.estimate_qrt_queries(cfg, qrt.hamiltonian_norm_bound(sys, cfg), 1e-6, 4))
    est = np.array(est, dtype=float)
    slope = float(kappas @ est / (kappas @ kappas))
    assert np.all(np.abs(slope * kappas - est) <= 0.2 * est)
