import numpy as np
import pytest

from twirllab.samplers import (
    CliffordTableau,
    MajoranaRotation,
    SymplecticForm,
    _row_dense,
    clifford_to_dense,
    haar_orthogonal,
    haar_symplectic,
    haar_unitary,
    majorana_dense,
    matchgate_to_dense,
    random_clifford,
    random_matchgate,
)
from twirllab.streams import RngStream


def _rng(name):
    return RngStream.named(123, name)


def test_haar_unitary_is_unitary():
    u = haar_unitary(8, _rng("u"))
    assert np.abs(u @ u.conj().T - np.eye(8)).max() < 1e-10
    batch = haar_unitary(4, _rng("ub"), size=5)
    assert batch.shape == (5, 4, 4)


def test_haar_orthogonal_is_real_orthogonal():
    o = haar_orthogonal(8, _rng("o"))
    assert np.isrealobj(o)
    assert np.abs(o @ o.T - np.eye(8)).max() < 1e-10


def test_haar_symplectic_preserves_the_form():
    form = SymplecticForm.standard(3)
    j = form.matrix()
    u = haar_symplectic(form, _rng("sp"))
    assert np.abs(u @ u.conj().T - np.eye(8)).max() < 1e-10
    assert np.abs(u @ j @ u.T - j).max() < 1e-9


def test_random_clifford_is_valid_and_deterministic():
    t = random_clifford(3, _rng("cl"))
    assert t.is_valid()
    t2 = random_clifford(3, _rng("cl"))
    assert np.array_equal(t.xz, t2.xz) and np.array_equal(t.phase, t2.phase)


def test_clifford_to_dense_conjugates_rows():
    n = 2
    t = random_clifford(n, _rng("cd"))
    u = clifford_to_dense(t).mat
    assert np.abs(u @ u.conj().T - np.eye(4)).max() < 1e-10
    for j in range(n):
        for kind, src in (("X", "X"), ("Z", "Z")):
            x, z, ph = t.image_row(j, kind)
            img = _row_dense(n, x, z, ph)
            xin = np.zeros(n, dtype=np.uint8)
            zin = np.zeros(n, dtype=np.uint8)
            (xin if src == "X" else zin)[j] = 1
            pin = _row_dense(n, xin, zin, 0)
            assert np.abs(u @ pin @ u.conj().T - img).max() < 1e-10


def test_identity_tableau_is_dense_identity():
    t = CliffordTableau.identity(2)
    assert np.abs(clifford_to_dense(t).mat - np.eye(4)).max() < 1e-12


def test_random_matchgate_rotation_and_special_flag():
    mg = random_matchgate(3, _rng("mg"))
    assert mg.o.shape == (6, 6)
    sg = random_matchgate(3, _rng("mgs"), special=True)
    assert sg.special


def test_matchgate_to_dense_rotates_majoranas():
    n = 2
    mg = random_matchgate(n, _rng("md"))
    u = matchgate_to_dense(mg).mat
    assert np.abs(u @ u.conj().T - np.eye(4)).max() < 1e-9
    for i in range(2 * n):
        gi = majorana_dense(n, i + 1)
        expected = sum(mg.o[i, j] * majorana_dense(n, j + 1) for j in range(2 * n))
        assert np.abs(u @ gi @ u.conj().T - expected).max() < 1e-9


def test_majorana_modes_anticommute():
    n = 2
    for i in range(1, 2 * n + 1):
        for j in range(1, 2 * n + 1):
            gi, gj = majorana_dense(n, i), majorana_dense(n, j)
            anti = gi @ gj + gj @ gi
            target = 2 * np.eye(4) if i == j else np.zeros((4, 4))
            assert np.abs(anti - target).max() < 1e-12


def test_majorana_rotation_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        MajoranaRotation(1, np.array([[1.0, 1.0], [0.0, 1.0]]))
