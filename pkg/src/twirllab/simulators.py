"""Three interchangeable evaluation backends.

* dense statevector — any gate set, small qubit counts;
* stabilizer tableau — Clifford circuits at large n, exact integer output;
* Majorana covariance — matchgate circuits at large n, amplitudes via
  Pfaffians of the covariance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CircuitInstance, apply_circuit_dense
from .operators import DenseOperator, PauliString
from .samplers import CliffordTableau, MajoranaRotation, pauli_mul


# ---------------------------------------------------------------------------
# Dense statevector
# ---------------------------------------------------------------------------


@dataclass
class StateVector:
    n: int
    k: int
    vec: np.ndarray

    @classmethod
    def zero(cls, n: int, k: int = 1) -> "StateVector":
        vec = np.zeros(2 ** (n * k), dtype=np.complex128)
        vec[0] = 1.0
        return cls(n, k, vec)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def apply_circuit(self, inst: CircuitInstance) -> "StateVector":
        return StateVector(self.n, self.k, apply_circuit_dense(inst, self.vec, self.k))


def dense_expectation(state: StateVector, obs: DenseOperator) -> complex:
    if obs.mat.shape[0] != state.vec.shape[0]:
        raise ValueError("observable dimension does not match the state")
    val = np.vdot(state.vec, obs.mat @ state.vec)
    if obs.is_hermitian():
        return float(val.real)
    return complex(val)


# ---------------------------------------------------------------------------
# Stabilizer tableau states
# ---------------------------------------------------------------------------


@dataclass
class StabilizerState:
    """Stabilizer group of a state, by n generator rows i^ph X^x Z^z."""

    n: int
    xs: np.ndarray  # (n, n) uint8
    zs: np.ndarray
    phases: np.ndarray  # (n,) mod 4; rows are Hermitian Paulis

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        return cls(
            n,
            np.zeros((n, n), dtype=np.uint8),
            np.eye(n, dtype=np.uint8),
            np.zeros(n, dtype=np.int64),
        )

    def apply_tableau(self, t: CliffordTableau, support=None) -> "StabilizerState":
        """Conjugate every generator by the Clifford, acting on `support`.

        Pauli strings factorize over qubits with no sign bookkeeping
        (each factor is X^x Z^z), so the sub-Pauli on the support can be
        mapped through the tableau independently of the rest.
        """
        if support is None:
            support = tuple(range(t.n))
        support = np.asarray(support, dtype=np.intp)
        if len(support) != t.n:
            raise ValueError("support size must match tableau size")
        xs, zs, phases = self.xs.copy(), self.zs.copy(), self.phases.copy()
        for r in range(self.n):
            x_new, z_new, ph = t.image_of(
                xs[r, support], zs[r, support], int(phases[r])
            )
            xs[r, support], zs[r, support], phases[r] = x_new, z_new, ph
        return StabilizerState(self.n, xs, zs, phases)

    def expectation(self, p: PauliString) -> int:
        """<psi|P|psi> for a Hermitian Pauli P — exactly -1, 0, or +1."""
        if p.phase not in (1, 1.0, -1, -1.0):
            raise ValueError("need a Hermitian Pauli (phase +1 or -1)")
        px = np.array(p.xbits, dtype=np.uint8)
        pz = np.array(p.zbits, dtype=np.uint8)
        # convert to the i^ph X^x Z^z phase convention used by the rows
        p_ph = (int(px @ pz) + (0 if p.phase > 0 else 2)) % 4
        m = np.concatenate([self.xs, self.zs], axis=1).astype(np.uint8)
        target = np.concatenate([px, pz])
        # solve rows^T c = target over F2 by elimination, tracking which
        # generators enter each reduced row
        rows = m.copy()
        combo = np.eye(self.n, dtype=np.uint8)
        tvec = target.copy()
        tcombo = np.zeros(self.n, dtype=np.uint8)
        pivot_row = 0
        for col in range(2 * self.n):
            sel = None
            for r in range(pivot_row, self.n):
                if rows[r, col]:
                    sel = r
                    break
            if sel is None:
                continue
            rows[[pivot_row, sel]] = rows[[sel, pivot_row]]
            combo[[pivot_row, sel]] = combo[[sel, pivot_row]]
            for r in range(self.n):
                if r != pivot_row and rows[r, col]:
                    rows[r] ^= rows[pivot_row]
                    combo[r] ^= combo[pivot_row]
            if tvec[col]:
                tvec ^= rows[pivot_row]
                tcombo ^= combo[pivot_row]
            pivot_row += 1
            if pivot_row == self.n:
                break
        if tvec.any():
            return 0  # P (up to sign) is not in the stabilizer group
        x = np.zeros(self.n, dtype=np.uint8)
        z = np.zeros(self.n, dtype=np.uint8)
        ph = 0
        for g in np.flatnonzero(tcombo):
            x, z, ph = pauli_mul(x, z, ph, self.xs[g], self.zs[g], int(self.phases[g]))
        diff = (ph - p_ph) % 4
        if diff == 0:
            return 1
        if diff == 2:
            return -1
        raise AssertionError("non-Hermitian phase reached in stabilizer product")


def stabilizer_expectation(s: StabilizerState, p: PauliString) -> int:
    return s.expectation(p)


# ---------------------------------------------------------------------------
# Majorana covariance states
# ---------------------------------------------------------------------------


def vacuum_covariance(n: int) -> np.ndarray:
    """Gamma_0 = direct sum of [[0,1],[-1,0]] blocks; Gamma_ij = -i<g_i g_j>."""
    gamma = np.zeros((2 * n, 2 * n))
    for i in range(n):
        gamma[2 * i, 2 * i + 1] = 1.0
        gamma[2 * i + 1, 2 * i] = -1.0
    return gamma


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix.

    Parlett--Reid style elimination with partial pivoting; each 2x2 step
    contributes its off-diagonal pivot, and row/column swaps flip the
    sign.
    """
    a = np.array(a, dtype=float)
    m = a.shape[0]
    if a.shape != (m, m) or m % 2 != 0:
        if m % 2 != 0:
            return 0.0
        raise ValueError("pfaffian needs a square even-dimensional matrix")
    if np.abs(a + a.T).max() > 1e-9 * max(1.0, np.abs(a).max()):
        raise ValueError("pfaffian needs an antisymmetric matrix")
    pf = 1.0
    for i in range(0, m - 1, 2):
        piv = i + 1 + int(np.argmax(np.abs(a[i + 1 :, i])))
        if piv != i + 1:
            a[[i + 1, piv]] = a[[piv, i + 1]]
            a[:, [i + 1, piv]] = a[:, [piv, i + 1]]
            pf = -pf
        if a[i + 1, i] == 0.0:
            return 0.0
        pf *= a[i, i + 1]
        if i + 2 < m:
            tail = slice(i + 2, m)
            v = a[tail, i].copy()
            w = a[tail, i + 1].copy()
            # Schur complement of the eliminated 2x2 block [[0,s],[-s,0]]
            a[tail, tail] += (np.outer(w, v) - np.outer(v, w)) / a[i, i + 1]
    return pf


@dataclass
class GaussianState:
    """Pure fermionic Gaussian state by its real covariance matrix."""

    n: int
    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if np.abs(g + g.T).max() > 1e-9:
            raise ValueError("covariance matrix must be antisymmetric")
        if np.abs(g @ g.T - np.eye(2 * self.n)).max() > 1e-9:
            raise ValueError("covariance matrix is not pure")
        self.gamma = g

    @classmethod
    def vacuum(cls, n: int) -> "GaussianState":
        return cls(n, vacuum_covariance(n))

    def apply_rotation(self, rot: MajoranaRotation, modes=None) -> "GaussianState":
        """Evolve by a Gaussian unitary given as a Majorana rotation.

        `modes` embeds a smaller rotation on the listed Majorana modes;
        by default the rotation covers all 2n modes.
        """
        o = np.eye(2 * self.n)
        if modes is None:
            if rot.o.shape[0] != 2 * self.n:
                raise ValueError("rotation size mismatch")
            o = rot.o
        else:
            modes = np.asarray(modes, dtype=np.intp)
            o[np.ix_(modes, modes)] = rot.o
        return GaussianState(self.n, o.T @ self.gamma @ o)

    def overlap_sq(self, other: "GaussianState") -> float:
        """|<psi|phi>|^2 = 2^-n |Pf(Gamma_psi + Gamma_phi)|."""
        return abs(pfaffian(self.gamma + other.gamma)) / 2**self.n


def gaussian_amplitude_sq(g: GaussianState) -> float:
    """|<0^n|psi>|^2 for a state reached from the vacuum."""
    return g.overlap_sq(GaussianState.vacuum(g.n))


def gaussian_majorana_quadratic(g: GaussianState, i: int, j: int) -> complex:
    """<g_i g_j> on the state (1-based mode labels, matching majorana_dense)."""
    delta = 1.0 if i == j else 0.0
    return complex(delta, g.gamma[i - 1, j - 1])
