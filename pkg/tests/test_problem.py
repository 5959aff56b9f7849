import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from qlspsim import linalg, problem
from qlspsim.errors import (
    DegenerateDecompositionError,
    InputValidationError,
    InvalidSparsityError,
    RankDeficiencyError,
)
from qlspsim.problem import LseInstance, augment, generate_instance


def test_kappa_one_gives_unitary():
    inst = generate_instance(2, 1.0, 3, seed=4)
    assert linalg.unitarity_defect(inst.A) < 1e-13


def test_geometric_spectrum_and_condition_number():
    inst = generate_instance(8, 50.0, 9, seed=11, spectrum_shape="geometric")
    sv = linalg.svd(inst.A).D
    np.testing.assert_allclose(sv, 50.0 ** (-np.arange(8) / 7), rtol=1e-12)
    assert abs(sv[0] / sv[-1] - 50.0) < 1e-6


@pytest.mark.parametrize("shape", problem.SPECTRUM_SHAPES)
def test_profiles(shape):
    sv = problem.singular_profile(6, 20.0, shape)
    assert sv[0] == 1.0 and sv[-1] == 1 / 20
    assert np.all(np.diff(sv) <= 0)
    if shape == "two_cluster":
        assert np.all(sv[:-1] >= 0.9)


def test_determinism():
    a = generate_instance(6, 7.0, 3, seed=99)
    b = generate_instance(6, 7.0, 3, seed=99)
    assert a.same_as(b)
    assert not a.same_as(generate_instance(6, 7.0, 3, seed=100))


@pytest.mark.parametrize("s", [2, 3, 5, 9])
def test_sparsity_respected(s):
    inst = generate_instance(8, 10.0, s, seed=s)
    assert problem.row_sparsity(problem.augmented_matrix(inst.A, inst.b, 1.0)) <= s
    problem.validate_instance(inst)


def test_generator_errors():
    with pytest.raises(InvalidSparsityError):
        generate_instance(4, 2.0, 1, 0)
    with pytest.raises(InvalidSparsityError):
        generate_instance(4, 2.0, 6, 0)
    with pytest.raises(InputValidationError):
        generate_instance(1, 2.0, 2, 0)
    with pytest.raises(InputValidationError):
        generate_instance(4, 0.5, 2, 0)


def test_json_round_trip(tmp_path):
    inst = generate_instance(5, 3.0, 4, seed=2, spectrum_shape="linear")
    path = inst.save(tmp_path / "i.json")
    back = LseInstance.load(path)
    assert back.same_as(inst)
    d = json.loads(path.read_text())
    assert set(d) == {"N", "kappa", "s", "seed", "spectrum_shape", "A", "b"}
    assert len(d["A"]) == 25 and len(d["A"][0]) == 2


def test_json_rejects_bad_records():
    inst = generate_instance(3, 3.0, 4, seed=2)
    d = inst.to_dict()
    d["kappa"] = 4.0
    with pytest.raises(InputValidationError, match="cond"):
        LseInstance.from_dict(d)
    d = inst.to_dict()
    d["A"] = d["A"][:-1]
    with pytest.raises(InputValidationError):
        LseInstance.from_dict(d)
    with pytest.raises(InputValidationError):
        LseInstance.from_json("{not json")


def test_augment_hand_example(hand_system):
    np.testing.assert_allclose(hand_system.C, [[1, 0, 1], [0, 1, 0]])
    assert linalg.angle(hand_system.null_vector, [1, 0, -1]) < 1e-14
    assert hand_system.gap == pytest.approx(1.0)
    assert hand_system.sigma[0] == pytest.approx(np.sqrt(2))
    assert hand_system.sigma[0] <= hand_system.sigma_bar[0] + 1 / hand_system.beta
    assert hand_system.alpha == 2.0
    assert linalg.hermitian_defect(hand_system.B) == 0.0


def test_augment_errors(hand_instance):
    with pytest.raises(InputValidationError):
        augment(hand_instance, 0.0)
    sing = LseInstance(np.diag([1.0, 0.0]).astype(complex), np.array([1, 0], complex), 1.0, 2, 0)
    with pytest.raises(RankDeficiencyError):
        augment(sing, 1.0)


def test_null_vector_hand(hand_system):
    rep = problem.verify_theorem1(hand_system, np.array([1, 0]))
    assert rep.angle < 1e-14 and rep.residual < 1e-15


@pytest.mark.parametrize("beta", [0.3, 1.0, 10.0, 250.0])
def test_null_vector_random(beta):
    inst = generate_instance(16, 20.0, 6, seed=3)
    sys = augment(inst, beta)
    rep = problem.verify_theorem1(sys, problem.classical_solve(inst.A, inst.b))
    assert rep.angle <= 1e-8 and rep.residual <= 1e-10


def test_interlacing_hand(hand_instance, hand_system):
    assert problem.verify_interlacing(hand_instance, hand_system)
    assert problem.interlaces([np.sqrt(2), 1.0], [1.0, 1.0])


def test_interlacing_negative_control():
    assert not problem.interlaces([1.0, np.sqrt(2)], [1.0, 1.0])
    assert not problem.interlaces([2.0, 0.5], [1.0, 0.8])
    assert not problem.interlaces([2.0, 1.0], [1.5, 0.5], sigma_null=1e-3)


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(2, 10), st.sampled_from([1.0, 2.0, 10.0, 100.0]), st.sampled_from(problem.SPECTRUM_SHAPES),
       st.integers(0, 10**6), st.floats(0.1, 100.0))
def test_spectral_properties(N, kappa, shape, seed, beta):
    inst = generate_instance(N, kappa, N + 1, seed, shape)
    sys = augment(inst, beta)
    checks = problem.spectral_checks(inst, sys)
    if beta < 1:
        # the bound of 2 on sigma_1 needs beta >= 1; the triangle bound is still checked
        assert sys.sigma[0] <= sys.sigma_bar[0] + 1 / beta + 1e-8
    assert all(checks.values()), {k: v for k, v in checks.items() if not v}


def test_decompose_hand(hand_system):
    d = problem.decompose_solution(hand_system)
    assert d.d0 == pytest.approx(1 / np.sqrt(2)) and d.d1 == pytest.approx(1 / np.sqrt(2))
    np.testing.assert_allclose(d.x_normalized, [1, 0], atol=1e-15)


def test_decompose_beta_scaling():
    inst = generate_instance(6, 5.0, 7, seed=8)
    nx = np.linalg.norm(problem.classical_solve(inst.A, inst.b))
    d = problem.decompose_solution(augment(inst, nx))
    assert d.d0 == pytest.approx(1 / np.sqrt(2), abs=1e-10)
    d = problem.decompose_solution(augment(inst, 10 * nx))
    assert d.d1 == pytest.approx(10 / np.sqrt(101), abs=1e-10)
    assert d.d0**2 + d.d1**2 == pytest.approx(1, abs=1e-10)
    assert d.d0 / d.d1 == pytest.approx(nx / (10 * nx), rel=1e-8)
    assert d.norm_x(10 * nx) == pytest.approx(nx, rel=1e-8)
    x = problem.classical_solve(inst.A, inst.b)
    assert linalg.infidelity(d.x_normalized, x) < 1e-15
    assert abs(np.vdot(d.x_normalized, x / nx) - 1) < 1e-10  # sign and phase fixed


def test_decompose_degenerate():
    with pytest.raises(DegenerateDecompositionError):
        problem.decompose_vector([1.0, 0.0, 1e-14])


def test_norm_range_and_dilation_gap():
    for kappa in (1.0, 5.0, 50.0):
        inst = generate_instance(12, kappa, 4, seed=int(kappa))
        nx = np.linalg.norm(problem.classical_solve(inst.A, inst.b))
        assert 1 - 1e-8 <= nx <= kappa + 1e-8
        sys = augment(inst, kappa)
        assert problem.dilation_gap(sys) == pytest.approx(sys.sigma[-1], abs=1e-9)
        assert problem.dilation_gap(sys) >= 1 / kappa - 1e-8
