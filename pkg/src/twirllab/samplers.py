"""Haar and uniform samplers for the four gate-set families.

Four matrix ensembles appear throughout the package:

* Haar unitary / Haar orthogonal, via QR of Ginibre matrices with the usual
  diagonal sign (phase) correction so the distribution is exactly invariant.
* The unitary-symplectic subgroup picked out by a real antisymmetric form J
  on an odd number of qubits, sampled by Gram-Schmidt that pairs each column
  with its image under the antiunitary v -> J conj(v).
* Uniform n-qubit Cliffords, as binary-symplectic tableaux with sign bits.
* Matchgate circuits, represented by the orthogonal rotation they induce on
  the 2n Majorana modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import DenseOperator, PauliString, check_cap, omega_state, pauli_dense
from .streams import RngStream


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    return rng


# ---------------------------------------------------------------------------
# continuous groups


def haar_unitary(dim: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-random U(dim) matrices; shape (size, dim, dim) when size is given."""
    g = _gen(rng)
    b = 1 if size is None else size
    z = g.standard_normal((b, dim, dim)) + 1j * g.standard_normal((b, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (d / np.abs(d))[:, None, :]
    return q[0] if size is None else q


def haar_orthogonal(dim: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-random O(dim) matrices (full orthogonal group, both components)."""
    g = _gen(rng)
    b = 1 if size is None else size
    z = g.standard_normal((b, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    q = q * d[:, None, :]
    return q[0] if size is None else q


@dataclass(frozen=True)
class SymplecticForm:
    """The antisymmetric form J = i^{|x|} tensor_j Y^{x_j}, |x| odd.

    J is a real signed permutation: J e_b = sign[b] e_{b XOR x}, and
    J^2 = -1, J^T = -J, J^T J = 1.
    """

    n: int
    mask: int
    perm: np.ndarray = field(repr=False)
    sign: np.ndarray = field(repr=False)

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "SymplecticForm":
        if bin(mask).count("1") % 2 == 0:
            raise ValueError("the Y-support must have odd size")
        d = 2**n
        b = np.arange(d)
        perm = mask ^ b
        # Each Y factor gives i*(-1)^{b_j}; with the i^{|x|} prefactor and |x|
        # odd the net sign is -(-1)^{|b & x|}.
        pop = np.array([bin(x & mask).count("1") for x in range(d)])
        sign = -np.where(pop % 2 == 0, 1.0, -1.0)
        return cls(n, mask, perm, sign)

    @classmethod
    def standard(cls, n: int) -> "SymplecticForm":
        """All-ones Y support; requires odd n so that J is antisymmetric."""
        if n % 2 == 0:
            raise ValueError("the standard form needs an odd qubit count")
        return cls.from_mask(n, 2**n - 1)

    @property
    def dim(self) -> int:
        return 2**self.n

    def matrix(self) -> np.ndarray:
        d = self.dim
        j = np.zeros((d, d))
        j[self.perm, np.arange(d)] = self.sign
        return j

    def theta(self, v: np.ndarray) -> np.ndarray:
        """The antiunitary v -> J conj(v); squares to -1.  Acts on axis -1... axis -2?

        Accepts (..., d) vectors.
        """
        out = np.empty_like(v)
        out[..., self.perm] = self.sign * np.conj(v)
        return out

    def paired_state(self) -> np.ndarray:
        """(J x 1)|Omega_n>, the invariant vector of the two-copy action."""
        return (self.matrix() @ omega_state(self.n).reshape(self.dim, self.dim)).ravel()


def haar_symplectic(form: SymplecticForm, rng, size: int | None = None) -> np.ndarray:
    """Haar samples from {U : U J U^T = J} inside U(2^n).

    Gram-Schmidt on Gaussian columns, taking each partner column as the theta
    image of the one just fixed.  The partner index of b is its bit complement,
    so processing basis labels in increasing order visits each pair once.
    """
    b = 1 if size is None else size
    g = _gen(rng)
    d = form.dim
    u = np.zeros((b, d, d), dtype=complex)
    done = np.zeros(d, dtype=bool)
    set_cols: list[int] = []
    for a in range(d):
        if done[a]:
            continue
        v = g.standard_normal((b, d)) + 1j * g.standard_normal((b, d))
        if set_cols:
            prev = u[:, :, set_cols]                      # (b, d, m)
            ov = np.einsum("bdm,bd->bm", prev.conj(), v)
            v = v - np.einsum("bdm,bm->bd", prev, ov)
        v = v / np.linalg.norm(v, axis=-1, keepdims=True)
        p = int(form.perm[a])
        u[:, :, a] = v
        u[:, :, p] = form.sign[a] * form.theta(v)
        done[a] = done[p] = True
        set_cols += [a, p]
    return u[0] if size is None else u


# ---------------------------------------------------------------------------
# Pauli algebra in the XZ phase convention
#
# A Pauli is (x, z, ph) with operator i^ph * prod_j X_j^{x_j} Z_j^{z_j}
# (tensor-factorized, so no ordering sign is hidden).  ph is mod 4, and the
# operator is Hermitian iff ph == x.z mod 2.


def pauli_mul(x1, z1, p1, x2, z2, p2):
    """Product of two Paulis in the XZ convention."""
    ph = (p1 + p2 + 2 * int(np.dot(z1, x2) % 2)) % 4
    return (x1 ^ x2), (z1 ^ z2), ph


def pauli_to_string(n: int, x, z, ph) -> PauliString:
    """Convert XZ-convention Pauli to the Hermitian PauliString container."""
    extra = (ph - int(np.dot(x, z))) % 4
    if extra % 2:
        raise ValueError("Pauli is not Hermitian up to sign")
    return PauliString(n, tuple(int(b) for b in x), tuple(int(b) for b in z),
                       phase=(-1.0) ** (extra // 2))


@dataclass
class CliffordTableau:
    """Clifford element mod global phase, as images of the X_j and Z_j.

    ``xs``/``zs`` hold the binary (x|z) rows of the images (shape (n, 2n)),
    ``phase`` the mod-4 phases in the XZ convention, for X-images first then
    Z-images (length 2n).  Rows are Hermitian, so phases are x.z or x.z + 2.
    """

    n: int
    xz: np.ndarray
    phase: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        xz = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        xz[:n, :n] = np.eye(n, dtype=np.uint8)
        xz[n:, n:] = np.eye(n, dtype=np.uint8)
        return cls(n, xz, np.zeros(2 * n, dtype=np.int64))

    def image_row(self, j: int, kind: str):
        r = j if kind == "X" else self.n + j
        return self.xz[r, : self.n], self.xz[r, self.n :], int(self.phase[r])

    def image_of(self, x, z, ph=0):
        """Image of i^ph X^x Z^z under conjugation by this Clifford."""
        n = self.n
        ox = np.zeros(n, dtype=np.uint8)
        oz = np.zeros(n, dtype=np.uint8)
        op = ph % 4
        for j in range(n):
            if x[j]:
                ix, iz, ip = self.image_row(j, "X")
                ox, oz, op = pauli_mul(ox, oz, op, ix, iz, ip)
        for j in range(n):
            if z[j]:
                ix, iz, ip = self.image_row(j, "Z")
                ox, oz, op = pauli_mul(ox, oz, op, ix, iz, ip)
        return ox, oz, op

    def is_valid(self) -> bool:
        """Check the symplectic condition on the binary part."""
        n = self.n
        lam = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        lam[:n, n:] = np.eye(n, dtype=np.uint8)
        lam[n:, :n] = np.eye(n, dtype=np.uint8)
        return bool(np.array_equal((self.xz @ lam @ self.xz.T) % 2, lam))

    def to_dense(self) -> DenseOperator:
        return clifford_to_dense(self)


def _symp_prod(u: np.ndarray, v: np.ndarray, n: int) -> int:
    return int((np.dot(u[:n], v[n:]) + np.dot(u[n:], v[:n])) % 2)


def random_clifford(n: int, rng) -> CliffordTableau:
    """Uniformly random Clifford mod phase.

    The binary part is a uniform symplectic matrix over F_2, built pair by
    pair: each X-image is uniform in the symplectic complement of what is
    already fixed, each Z-image uniform among partners with unit pairing.
    Sign bits are then uniform.
    """
    g = _gen(rng)
    basis = [r for r in np.eye(2 * n, dtype=np.uint8)]
    rows = []
    for _ in range(n):
        m = len(basis)
        while True:
            c = g.integers(0, 2, size=m).astype(np.uint8)
            if c.any():
                break
        a = np.zeros(2 * n, dtype=np.uint8)
        for i in range(m):
            if c[i]:
                a ^= basis[i]
        pair = [_symp_prod(w, a, n) for w in basis]
        piv = pair.index(1)
        # kernel-of-a basis inside the current complement
        kern = [basis[i] if pair[i] == 0 else basis[i] ^ basis[piv]
                for i in range(m) if i != piv]
        c = g.integers(0, 2, size=len(kern)).astype(np.uint8)
        b = basis[piv].copy()
        for i in range(len(kern)):
            if c[i]:
                b ^= kern[i]
        rows.append((a, b))
        # restrict further to the kernel of b as well
        pair_b = [_symp_prod(w, b, n) for w in kern]
        if 1 in pair_b:
            piv = pair_b.index(1)
            basis = [kern[i] if pair_b[i] == 0 else kern[i] ^ kern[piv]
                     for i in range(len(kern)) if i != piv]
        else:
            basis = kern
    xz = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for j, (a, b) in enumerate(rows):
        xz[j] = a
        xz[n + j] = b
    signs = g.integers(0, 2, size=2 * n)
    phase = np.array(
        [(int(np.dot(xz[r, :n], xz[r, n:])) + 2 * int(signs[r])) % 4
         for r in range(2 * n)], dtype=np.int64)
    return CliffordTableau(n, xz, phase)


def _row_dense(n: int, x, z, ph) -> np.ndarray:
    return pauli_dense(pauli_to_string(n, x, z, ph)).mat


def clifford_to_dense(t: CliffordTableau) -> DenseOperator:
    """Dense unitary with C X_j C^dag, C Z_j C^dag equal to the tableau rows.

    The global phase is fixed by making the first nonzero amplitude of C|0...0>
    real positive.
    """
    n = t.n
    d = 2**n
    check_cap(d)
    # C|0> is stabilized by the Z-images.
    proj = np.eye(d, dtype=complex)
    for j in range(n):
        q = _row_dense(n, *t.image_row(j, "Z"))
        proj = proj @ (np.eye(d, dtype=complex) + q) / 2.0
    col = None
    for c in range(d):
        if np.linalg.norm(proj[:, c]) > 1e-9:
            col = proj[:, c]
            break
    psi0 = col / np.linalg.norm(col)
    nz = np.flatnonzero(np.abs(psi0) > 1e-12)[0]
    psi0 = psi0 * (np.abs(psi0[nz]) / psi0[nz])
    ximg = [_row_dense(n, *t.image_row(j, "X")) for j in range(n)]
    u = np.empty((d, d), dtype=complex)
    for b in range(d):
        v = psi0
        for j in range(n):
            if (b >> (n - 1 - j)) & 1:
                v = ximg[j] @ v
        u[:, b] = v
    return DenseOperator(u, n=n, k=1)


# ---------------------------------------------------------------------------
# matchgates


def majorana_dense(n: int, m: int) -> np.ndarray:
    """Dense Majorana mode gamma_m on n qubits, m in 1..2n (Jordan-Wigner)."""
    q = (m - 1) // 2
    tail = "X" if (m - 1) % 2 == 0 else "Y"
    label = "Z" * q + tail + "I" * (n - q - 1)
    return pauli_dense(PauliString.from_label(label)).mat


@dataclass(frozen=True)
class MajoranaRotation:
    """Matchgate element, recorded as its rotation o on the 2n Majorana modes:
    U gamma_i U^dag = sum_j o[i, j] gamma_j, with o in O(2n)."""

    n: int
    o: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.o, dtype=float)
        if o.shape != (2 * self.n, 2 * self.n):
            raise ValueError("rotation must be 2n x 2n")
        if np.abs(o @ o.T - np.eye(2 * self.n)).max() > 1e-9:
            raise ValueError("rotation is not orthogonal")
        object.__setattr__(self, "o", o)

    @property
    def special(self) -> bool:
        return np.linalg.det(self.o) > 0

    def to_dense(self) -> DenseOperator:
        return matchgate_to_dense(self)


def random_matchgate(n: int, rng, special: bool = False) -> MajoranaRotation:
    """Haar-random Majorana rotation; over SO(2n) only when special is set."""
    o = haar_orthogonal(2 * n, rng)
    if special and np.linalg.det(o) < 0:
        o = o.copy()
        o[[0, 1]] = o[[1, 0]]
    return MajoranaRotation(n, o)


def _givens(dim: int, a: int, b: int, th: float) -> np.ndarray:
    r = np.eye(dim)
    c, s = np.cos(th), np.sin(th)
    r[a, a] = c
    r[a, b] = -s
    r[b, a] = s
    r[b, b] = c
    return r


def givens_unitary(n: int, a: int, b: int, th: float) -> np.ndarray:
    """exp(th/2 gamma_a gamma_b); rotates gamma_a -> cos gamma_a - sin gamma_b.

    Majorana indices a, b are 1-based.
    """
    d = 2**n
    gab = majorana_dense(n, a) @ majorana_dense(n, b)
    return np.cos(th / 2) * np.eye(d, dtype=complex) + np.sin(th / 2) * gab


def matchgate_to_dense(mg: MajoranaRotation) -> DenseOperator:
    """Dense unitary realizing a Majorana rotation, via Givens reduction.

    o is reduced to a +-1 diagonal by plane rotations; each rotation maps to
    exp(th/2 gamma_a gamma_b), a leftover -1 pair to gamma_a gamma_b, and a
    det = -1 residue to a single gamma_1 factor.
    """
    n = mg.n
    d2 = 2 * n
    check_cap(2**n)
    m = mg.o.copy()
    planes: list[tuple[int, int, float]] = []
    for c in range(d2):
        for r in range(d2 - 1, c, -1):
            if abs(m[r, c]) < 1e-14:
                continue
            th = np.arctan2(m[r, c], m[r - 1, c])
            g = _givens(d2, r - 1, r, -th)
            m = g @ m
            planes.append((r - 1, r, -th))
    diag = np.sign(np.round(np.diagonal(m)))
    u = np.eye(2**n, dtype=complex)
    # Dense factors compose with reversed rotation order, so the diagonal
    # residue comes first and the plane rotations follow in reverse.
    neg = list(np.flatnonzero(diag < 0))
    if len(neg) % 2:
        # conjugation by gamma_1 fixes mode 1 and flips all others
        u = u @ majorana_dense(n, 1)
        neg = [i for i in range(d2) if (diag[i] < 0) != (i != 0)]
    for a, b in zip(neg[0::2], neg[1::2]):
        u = u @ (majorana_dense(n, a + 1) @ majorana_dense(n, b + 1))
    for a, b, th in reversed(planes):
        u = u @ givens_unitary(n, a + 1, b + 1, -th)
    return DenseOperator(u, n=n, k=1)


# ---------------------------------------------------------------------------
# uniform front-end, one call per group


def sample_haar_unitary(n: int, rng) -> DenseOperator:
    check_cap(2**n)
    return DenseOperator(haar_unitary(2**n, rng), n=n, k=1)


def sample_haar_orthogonal(n: int, rng) -> DenseOperator:
    check_cap(2**n)
    return DenseOperator(haar_orthogonal(2**n, rng).astype(complex), n=n, k=1)


def sample_haar_symplectic(n: int, form: SymplecticForm, rng) -> DenseOperator:
    if form.n != n:
        raise ValueError("form does not match qubit count")
    check_cap(2**n)
    return DenseOperator(haar_symplectic(form, rng), n=n, k=1)


def sample_uniform_clifford(n: int, rng) -> CliffordTableau:
    return random_clifford(n, rng)


def sample_haar_matchgate(n: int, rng) -> MajoranaRotation:
    return random_matchgate(n, rng)
