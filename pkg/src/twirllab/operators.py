"""Dense complex linear algebra on tensor-power spaces.

Everything here operates on explicit complex matrices living on k copies of an
n-qubit Hilbert space, dimension (2**n)**k.  A hard cap keeps instances at desk
scale; larger computations must go through the structured backends.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass

import numpy as np

#: Largest dense tensor-power dimension we are willing to materialize.
DIM_CAP = 2**12

#: Default relative tolerance for norm comparisons.
RTOL = 1e-8

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class InstanceTooLarge(ValueError):
    """Raised when a dense operation would exceed DIM_CAP."""


class UnfactorizedOperator(ValueError):
    """Raised when a copy-structured operation needs a missing (n, k) tag."""


def check_cap(dim: int) -> None:
    if dim > DIM_CAP:
        raise InstanceTooLarge(f"dense dimension {dim} exceeds cap {DIM_CAP}")


@dataclass(frozen=True)
class DenseOperator:
    """A square complex matrix, optionally tagged with its (n, k) factorization.

    The tag means dim == (2**n)**k and the row index is copy-major: index
    i = sum_c i_c * 2**(n*(k-1-c)) with i_c the basis label on copy c.
    """

    mat: np.ndarray
    n: int | None = None
    k: int | None = None

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        check_cap(m.shape[0])
        if self.n is not None and self.k is not None:
            if m.shape[0] != 2 ** (self.n * self.k):
                raise ValueError(
                    f"dim {m.shape[0]} inconsistent with (n={self.n}, k={self.k})"
                )
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def is_hermitian(self, rtol: float = 1e-10) -> bool:
        scale = spectral_norm_bound(self.mat)
        if scale == 0.0:
            return True
        return np.abs(self.mat - self.mat.conj().T).max() <= rtol * scale

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.mat @ other.mat, self.n, self.k)


@dataclass(frozen=True)
class PureState:
    """Normalized state vector on n qubits (single copy)."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amp.shape[0] != 2**self.n:
            raise ValueError("amplitude vector has wrong length")
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |psi| = {nrm}")
        object.__setattr__(self, "amplitudes", amp)


@dataclass(frozen=True)
class PauliString:
    """n-qubit Pauli operator in (x, z) binary representation.

    Dense image is phase * prod_j (i^(x_j z_j) X^x_j Z^z_j), so each one-qubit
    factor is Hermitian and phase in {+1, -1} gives a Hermitian string.
    """

    n: int
    xbits: tuple[int, ...]
    zbits: tuple[int, ...]
    phase: complex = 1.0

    def __post_init__(self):
        if len(self.xbits) != self.n or len(self.zbits) != self.n:
            raise ValueError("bit vectors must have length n")
        object.__setattr__(self, "xbits", tuple(int(b) & 1 for b in self.xbits))
        object.__setattr__(self, "zbits", tuple(int(b) & 1 for b in self.zbits))

    @classmethod
    def from_label(cls, label: str, phase: complex = 1.0) -> "PauliString":
        x = [1 if c in "XY" else 0 for c in label]
        z = [1 if c in "ZY" else 0 for c in label]
        return cls(len(label), tuple(x), tuple(z), phase)

    def tensor(self, other: "PauliString") -> "PauliString":
        return PauliString(
            self.n + other.n,
            self.xbits + other.xbits,
            self.zbits + other.zbits,
            self.phase * other.phase,
        )

    @property
    def is_identity(self) -> bool:
        return not any(self.xbits) and not any(self.zbits)


def pauli_dense(p: PauliString) -> DenseOperator:
    """Dense 2**n matrix of a Pauli string."""
    out = np.array([[p.phase]], dtype=complex)
    for x, z in zip(p.xbits, p.zbits):
        f = PAULI_1Q["I"]
        if x and z:
            f = PAULI_1Q["Y"]
        elif x:
            f = PAULI_1Q["X"]
        elif z:
            f = PAULI_1Q["Z"]
        out = np.kron(out, f)
    return DenseOperator(out, n=p.n, k=1)


def single_site_pauli(n: int, site: int, which: str) -> PauliString:
    """Pauli `which` on qubit `site` (1-based), identity elsewhere."""
    x = [0] * n
    z = [0] * n
    if which in "XY":
        x[site - 1] = 1
    if which in "ZY":
        z[site - 1] = 1
    return PauliString(n, tuple(x), tuple(z))


def _as_mat(a) -> np.ndarray:
    return a.mat if isinstance(a, DenseOperator) else np.asarray(a, dtype=complex)


def kron(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    am, bm = _as_mat(a), _as_mat(b)
    check_cap(am.shape[0] * bm.shape[0])
    return DenseOperator(np.kron(am, bm))


def spectral_norm_bound(m: np.ndarray) -> float:
    """Cheap upper estimate of the spectral norm (exact enough for tolerances)."""
    m = _as_mat(m)
    if m.size == 0:
        return 0.0
    # sqrt(norm_1 * norm_inf) >= norm_2 is a standard bound, tight to a factor.
    c = np.abs(m).sum(axis=0).max()
    r = np.abs(m).sum(axis=1).max()
    return float(np.sqrt(c * r))


def partial_transpose(a: DenseOperator, copy_index: int, n: int | None = None,
                      k: int | None = None) -> DenseOperator:
    """Transpose on one copy of the k-fold tensor power (1-based copy index)."""
    n = a.n if n is None else n
    k = a.k if k is None else k
    if n is None or k is None:
        raise UnfactorizedOperator("partial_transpose needs an (n, k) tag")
    if not 1 <= copy_index <= k:
        raise ValueError("copy index out of range")
    d = 2**n
    m = _as_mat(a).reshape((d,) * (2 * k))
    c = copy_index - 1
    m = m.swapaxes(c, k + c)
    return DenseOperator(m.reshape(d**k, d**k), n=n, k=k)


def trace_norm(a: DenseOperator | np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(_as_mat(a), compute_uv=False).sum())


def trace_distance(a, b) -> float:
    return trace_norm(_as_mat(a) - _as_mat(b))


def pinv(g: np.ndarray, rel_cutoff: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a real symmetric matrix.

    Singular values below rel_cutoff * sigma_max are treated as exact zeros.
    """
    g = np.asarray(g, dtype=float)
    if np.abs(g - g.T).max() > 1e-10 * max(1.0, np.abs(g).max()):
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(g)
    cut = rel_cutoff * np.abs(w).max() if w.size else 0.0
    inv = np.where(np.abs(w) > cut, 1.0 / np.where(w == 0, 1.0, w), 0.0)
    return (v * inv) @ v.T


def basis_state(n: int, bits: int = 0) -> PureState:
    amp = np.zeros(2**n, dtype=complex)
    amp[bits] = 1.0
    return PureState(n, amp)


def omega_state(n: int) -> np.ndarray:
    """Maximally entangled vector |Omega_n> on two copies of n qubits."""
    d = 2**n
    return np.eye(d, dtype=complex).ravel() / np.sqrt(d)


def flip_operator(n: int) -> DenseOperator:
    """Swap of the two copies on (C^2n)^{x2}."""
    d = 2**n
    f = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            f[i * d + j, j * d + i] = 1.0
    return DenseOperator(f, n=n, k=2)


def pi_o(n: int) -> DenseOperator:
    """2^n |Omega><Omega|, the rank-one Brauer element of the k=2 commutant."""
    w = omega_state(n)
    return DenseOperator(2**n * np.outer(w, w.conj()), n=n, k=2)


# ---------------------------------------------------------------------------
# serialization

_MAGIC = b"TWOP"
_VERSION = 1


def dump_operator(a: DenseOperator, fh) -> None:
    """Binary container: magic, version, dim, n, k, interleaved re/im float64."""
    m = a.mat
    n = -1 if a.n is None else a.n
    k = -1 if a.k is None else a.k
    fh.write(_MAGIC)
    fh.write(struct.pack("<BQqq", _VERSION, m.shape[0], n, k))
    inter = np.empty(m.size * 2, dtype="<f8")
    inter[0::2] = m.real.ravel()
    inter[1::2] = m.imag.ravel()
    fh.write(inter.tobytes())


def load_operator(fh) -> DenseOperator:
    if fh.read(4) != _MAGIC:
        raise ValueError("bad magic bytes")
    version, dim, n, k = struct.unpack("<BQqq", fh.read(25))
    if version != _VERSION:
        raise ValueError(f"unsupported container version {version}")
    inter = np.frombuffer(fh.read(dim * dim * 16), dtype="<f8")
    m = (inter[0::2] + 1j * inter[1::2]).reshape(dim, dim)
    return DenseOperator(m, None if n < 0 else n, None if k < 0 else k)


def operator_to_json(a: DenseOperator) -> str:
    return json.dumps(
        {
            "dim": a.dim,
            "n": a.n,
            "k": a.k,
            "re": a.mat.real.tolist(),
            "im": a.mat.imag.tolist(),
        }
    )


def operator_from_json(s: str) -> DenseOperator:
    d = json.loads(s)
    m = np.array(d["re"], dtype=float) + 1j * np.array(d["im"], dtype=float)
    return DenseOperator(m, d["n"], d["k"])


def roundtrip_bytes(a: DenseOperator) -> DenseOperator:
    buf = io.BytesIO()
    dump_operator(a, buf)
    buf.seek(0)
    return load_operator(buf)
