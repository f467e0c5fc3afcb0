import numpy as np
import pytest

from twirllab.circuits import brickwork_1d, circuit_unitary, sample_circuit
from twirllab.operators import PauliString, pauli_dense, single_site_pauli
from twirllab.samplers import (
    majorana_dense,
    matchgate_to_dense,
    random_clifford,
    random_matchgate,
)
from twirllab.simulators import (
    GaussianState,
    StabilizerState,
    StateVector,
    dense_expectation,
    gaussian_amplitude_sq,
    gaussian_majorana_quadratic,
    pfaffian,
    vacuum_covariance,
)
from twirllab.streams import RngStream


def test_zero_state_expectations():
    s = StabilizerState.zero(3)
    assert s.expectation(single_site_pauli(3, 1, "Z")) == 1
    assert s.expectation(single_site_pauli(3, 1, "X")) == 0
    assert s.expectation(PauliString.from_label("ZZI")) == 1


def test_apply_tableau_returns_a_new_state():
    s = StabilizerState.zero(2)
    t = random_clifford(2, RngStream.named(0, "tab"))
    out = s.apply_tableau(t)
    assert out is not s
    assert s.expectation(single_site_pauli(2, 1, "Z")) == 1  # original untouched


def test_stabilizer_matches_dense_on_clifford_circuits():
    n = 3
    spec = brickwork_1d(n, 2, "Cl")
    for trial in range(5):
        rng = RngStream.named(trial, "stab-vs-dense")
        inst = sample_circuit(spec, rng)
        stab = StabilizerState.zero(n)
        for g in inst.gates:
            stab = stab.apply_tableau(g.payload, g.support)
        dense = StateVector.zero(n).apply_circuit(inst)
        for q in range(1, n + 1):
            for which in "XZ":
                p = single_site_pauli(n, q, which)
                got = dense_expectation(dense, pauli_dense(p))
                assert abs(got - stab.expectation(p)) < 1e-9


def test_pfaffian_known_values():
    a = np.array([[0.0, 2.0], [-2.0, 0.0]])
    assert pfaffian(a) == pytest.approx(2.0)
    b = np.zeros((4, 4))
    b[0, 1], b[1, 0] = 1.0, -1.0
    b[2, 3], b[3, 2] = 3.0, -3.0
    assert pfaffian(b) == pytest.approx(3.0)
    rng = np.random.default_rng(0)
    m = rng.normal(size=(6, 6))
    m = m - m.T
    assert pfaffian(m) ** 2 == pytest.approx(np.linalg.det(m))


def test_vacuum_amplitude_is_one():
    g = GaussianState.vacuum(3)
    assert gaussian_amplitude_sq(g) == pytest.approx(1.0)


def test_gaussian_matches_dense_on_matchgates():
    n = 3
    rng = RngStream.named(1, "gauss-vs-dense")
    mg = random_matchgate(n, rng)
    g = GaussianState.vacuum(n).apply_rotation(mg)
    u = matchgate_to_dense(mg).mat
    assert gaussian_amplitude_sq(g) == pytest.approx(abs(u[0, 0]) ** 2, abs=1e-9)
    # quadratic Majorana expectation against the dense value
    psi = u[:, 0]
    g1g2 = majorana_dense(n, 1) @ majorana_dense(n, 2)
    dense_val = complex(np.vdot(psi, g1g2 @ psi))
    assert gaussian_majorana_quadratic(g, 1, 2) == pytest.approx(dense_val, abs=1e-9)


def test_state_vector_norm_preserved():
    spec = brickwork_1d(3, 2, "U")
    inst = sample_circuit(spec, RngStream.named(2, "sv"))
    out = StateVector.zero(3).apply_circuit(inst)
    assert out.norm() == pytest.approx(1.0)
    assert np.allclose(out.vec, circuit_unitary(inst)[:, 0])
