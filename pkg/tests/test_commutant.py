import numpy as np
import pytest

from twirllab.commutant import (
    Pairing,
    apply_kron_power,
    apply_r_subspace,
    brauer_compose,
    clifford_gram,
    commutant_basis,
    enumerate_pairings,
    enumerate_sigma_kk,
    exact_twirl,
    gram_and_weingarten,
    matchgate_basis_vk,
    pairing_gram,
    permutation_operator,
    pi_s,
    r_subspace_dense,
    rep_orthogonal,
    rep_symplectic,
)
from twirllab.operators import DenseOperator, flip_operator, pi_o
from twirllab.samplers import SymplecticForm, haar_unitary
from twirllab.streams import RngStream


def test_pairing_counts():
    assert len(enumerate_pairings(2)) == 3
    assert len(enumerate_pairings(3)) == 15
    assert len(enumerate_pairings(4)) == 105


def test_sigma_kk_counts():
    # prod_{j=0}^{k-2} (2^j + 1)
    assert len(enumerate_sigma_kk(2)) == 2
    assert len(enumerate_sigma_kk(3)) == 6
    assert len(enumerate_sigma_kk(4)) == 30


def test_brauer_compose_counts_loops():
    k = 2
    cup = Pairing.from_pairs(k, [(0, 1), (2, 3)])  # top-top and bottom-bottom
    out = brauer_compose(cup, cup)
    assert out.result == cup
    assert out.loops == 1


def test_permutation_operator_composition():
    n, k = 1, 3
    a, b = (1, 2, 0), (2, 0, 1)
    pa = permutation_operator(a, n, k).mat
    pb = permutation_operator(b, n, k).mat
    ab = tuple(a[b[i]] for i in range(k))
    assert np.allclose(pa @ pb, permutation_operator(ab, n, k).mat)


def test_rep_orthogonal_special_cases():
    n = 2
    swap = Pairing.from_permutation((1, 0))
    assert np.allclose(rep_orthogonal(swap, n).mat, flip_operator(n).mat)
    cup = Pairing.from_pairs(2, [(0, 1), (2, 3)])
    assert np.allclose(rep_orthogonal(cup, n).mat, pi_o(n).mat)


def test_rep_symplectic_cup_matches_pi_s():
    form = SymplecticForm.standard(1)
    cup = Pairing.from_pairs(2, [(0, 1), (2, 3)])
    dense = rep_symplectic(cup, form).mat
    assert np.allclose(dense, pi_s(form).mat) or np.allclose(dense, -pi_s(form).mat)


def test_pairing_gram_matches_dense_traces():
    n, k = 1, 2
    d = 2.0**n
    ps, gram = pairing_gram(k, d)
    for i, s in enumerate(ps):
        for j, t in enumerate(ps):
            dense = np.trace(
                rep_orthogonal(s, n).mat.conj().T @ rep_orthogonal(t, n).mat
            ).real
            assert gram[i, j] == pytest.approx(dense)


def test_clifford_gram_matches_dense_traces():
    n, k = 2, 2
    ts, gram = clifford_gram(k, n)
    for i, s in enumerate(ts):
        for j, t in enumerate(ts):
            dense = np.trace(
                r_subspace_dense(s, n).mat.conj().T @ r_subspace_dense(t, n).mat
            ).real
            assert gram[i, j] == pytest.approx(dense)


def test_apply_r_subspace_matches_dense():
    n = 2
    rng = RngStream.named(5, "rsub")
    for t in enumerate_sigma_kk(2):
        v = rng.normal(2 ** (n * 2)) + 1j * rng.normal(2 ** (n * 2))
        assert np.allclose(apply_r_subspace(t, n, v), r_subspace_dense(t, n).mat @ v)


def test_apply_kron_power():
    rng = RngStream.named(6, "kron")
    g = rng.normal(4, 4) + 1j * rng.normal(4, 4)
    v = rng.normal(16) + 1j * rng.normal(16)
    assert np.allclose(apply_kron_power(g, v, 2), np.kron(g, g) @ v)


def test_exact_twirl_is_an_idempotent_projector():
    n, k = 1, 2
    rng = RngStream.named(7, "twirl")
    a = DenseOperator(rng.normal(4, 4) + 1j * rng.normal(4, 4), n=n, k=k)
    once = exact_twirl("U", n, k, a)
    twice = exact_twirl("U", n, k, once)
    assert np.abs(once.mat - twice.mat).max() < 1e-10
    # output commutes with sampled u x u
    u = haar_unitary(2, RngStream.named(8, "tw-u"))
    uu = np.kron(u, u)
    assert np.abs(uu @ once.mat - once.mat @ uu).max() < 1e-10


def test_block_twirl_on_the_full_system_is_the_global_twirl():
    from twirllab.commutant import block_twirl, cached_basis_table

    n, k = 2, 2
    rng = RngStream.named(9, "block")
    a = DenseOperator(rng.normal(16, 16) + 1j * rng.normal(16, 16), n=n, k=k)
    basis, table = cached_basis_table("U", n, k)
    full = block_twirl(a, n, k, range(n), basis, table)
    assert np.abs(full.mat - exact_twirl("U", n, k, a).mat).max() < 1e-9


def test_matchgate_basis_sizes():
    n = 2
    ops = [matchgate_basis_vk(n, j) for j in range(2 * n + 1)]
    assert ops[0].mat.shape == (16, 16)
    table = gram_and_weingarten(commutant_basis("M", n, 2))
    assert table.gram.shape == (2 * n + 1, 2 * n + 1)
