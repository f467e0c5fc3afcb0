"""Commutant bases, Gram/Weingarten tables, and exact twirls.

For each gate-set family the k-copy commutant has a combinatorial basis:

* unitary: permutation operators, one per element of S_k;
* orthogonal: Brauer diagrams, one per perfect pairing of 2k vertices;
* symplectic: the same diagrams with J insertions on paired same-side copies;
* Clifford: R(T) = r(T)^{tensor n} over stochastic Lagrangian subspaces T;
* matchgate (two copies): the Majorana-string projectors V_0 .. V_{2n}.

The Haar twirl is then A -> sum_{s,t} Wg[s,t] tr(s^dag A) t with Wg the
pseudo-inverse of the Gram matrix of the basis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .operators import DenseOperator, check_cap, pinv
from .samplers import SymplecticForm, majorana_dense

# ---------------------------------------------------------------------------
# pairings and the Brauer composition

MAX_PAIRING_COPIES = 5


@dataclass(frozen=True)
class Pairing:
    """Perfect matching on 2k vertices; 0..k-1 are "top", k..2k-1 "bottom"."""

    k: int
    partner: tuple[int, ...]

    def __post_init__(self):
        p = self.partner
        if len(p) != 2 * self.k or any(p[p[i]] != i or p[i] == i for i in range(2 * self.k)):
            raise ValueError("not a perfect matching")

    @classmethod
    def from_pairs(cls, k: int, pairs) -> "Pairing":
        partner = [-1] * (2 * k)
        for a, b in pairs:
            partner[a] = b
            partner[b] = a
        return cls(k, tuple(partner))

    @classmethod
    def identity(cls, k: int) -> "Pairing":
        return cls.from_pairs(k, [(i, k + i) for i in range(k)])

    @classmethod
    def from_permutation(cls, perm) -> "Pairing":
        """Diagram of the permutation operator P_perm (top i with bottom perm[i])."""
        k = len(perm)
        return cls.from_pairs(k, [(perm[i], k + i) for i in range(k)])

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, self.partner[i]) for i in range(2 * self.k) if i < self.partner[i]]

    def permutation(self):
        """The permutation if every pair crosses top/bottom, else None."""
        perm = [-1] * self.k
        for a, b in self.pairs():
            if b < self.k or a >= self.k:
                return None
            perm[b - self.k] = a
        return tuple(perm)


@dataclass(frozen=True)
class BrauerProduct:
    result: Pairing
    loops: int


def enumerate_pairings(k: int) -> list[Pairing]:
    """All (2k-1)!! pairings of 2k vertices."""
    if k > MAX_PAIRING_COPIES:
        raise ValueError(f"pairing enumeration capped at k = {MAX_PAIRING_COPIES}")

    def rec(verts):
        if not verts:
            yield []
            return
        a = verts[0]
        for i in range(1, len(verts)):
            b = verts[i]
            rest = verts[1:i] + verts[i + 1 :]
            for tail in rec(rest):
                yield [(a, b)] + tail

    return [Pairing.from_pairs(k, ps) for ps in rec(list(range(2 * k)))]


def brauer_compose(s: Pairing, t: Pairing) -> BrauerProduct:
    """Concatenate s's bottom row with t's top row; count closed loops.

    Densely, rep(s) . rep(t) = D^loops . rep(result).
    """
    if s.k != t.k:
        raise ValueError("mismatched copy counts")
    k = s.k
    # Vertices: s-top 0..k-1, glue layer (s-bottom = t-top), t-bottom.
    # Walk the union of edges to find paths between outer vertices and loops.
    def step(layer, v):
        # follow the edge of the given diagram from vertex v, returning the
        # (layer, vertex) pair on the other end in glued coordinates
        if layer == "s":
            w = s.partner[v]
            return ("out_top", w) if w < k else ("glue", w - k)
        w = t.partner[v]
        return ("glue2", w) if w < k else ("out_bot", w - k)

    partner = [-1] * (2 * k)
    seen_glue = set()
    loops = 0
    # trace paths starting from each outer vertex
    for start_layer, start in [("s", i) for i in range(k)] + [
        ("t", k + i) for i in range(k)
    ]:
        origin = start if start_layer == "s" else k + (start - k)
        if partner[origin] != -1:
            continue
        layer, v = start_layer, start
        while True:
            kind, w = step(layer, v)
            if kind == "out_top":
                end = w
                break
            if kind == "out_bot":
                end = k + w
                break
            # crossed into the glue layer: hop to the other diagram
            seen_glue.add(w)
            if kind == "glue":
                layer, v = "t", w
            else:
                layer, v = "s", k + w
        partner[origin] = end
        partner[end] = origin
    # loops: glue vertices never visited by a path, traversed in cycles
    for g in range(k):
        if g in seen_glue:
            continue
        loops += 1
        v = g
        while True:
            seen_glue.add(v)
            _, w = step("t", v)        # t edge from glue vertex
            seen_glue.add(w)
            _, v = step("s", k + w)    # s edge back into the glue layer
            if v == g:
                break
    return BrauerProduct(Pairing(k, tuple(partner)), loops)


# ---------------------------------------------------------------------------
# dense diagram representations


def permutation_operator(perm, n: int, k: int | None = None) -> DenseOperator:
    """P_perm |j_1..j_k> = |j_{perm^{-1}(1)} ..>, copies of dimension 2^n."""
    perm = tuple(perm)
    k = len(perm) if k is None else k
    d = 2**n
    check_cap(d**k)
    m = np.eye(d**k, dtype=complex).reshape((d,) * (2 * k))
    # output copy c holds input copy perm^{-1}(c), i.e. matrix element
    # prod_i delta(r_{perm(i)}, c_i); on row axes that is transposing by the
    # inverse permutation.
    inv = tuple(int(x) for x in np.argsort(perm))
    m = m.transpose(inv + tuple(range(k, 2 * k)))
    return DenseOperator(m.reshape(d**k, d**k), n=n, k=k)


def rep_orthogonal(s: Pairing, n: int, k: int | None = None) -> DenseOperator:
    """Delta-contraction diagram operator on k copies of dimension 2^n."""
    k = s.k if k is None else k
    d = 2**n
    check_cap(d**k)
    shape = (d,) * (2 * k)
    m = np.ones(shape)
    eye = np.eye(d)
    for a, b in s.pairs():
        sh = [1] * (2 * k)
        sh[a] = sh[b] = d
        m = m * eye.reshape(sh)
    return DenseOperator(m.reshape(d**k, d**k).astype(complex), n=n, k=k)


def rep_symplectic(s: Pairing, form: SymplecticForm, k: int | None = None) -> DenseOperator:
    """Brauer diagram with J insertions; a representation of B_k(-D).

    J acts from the left on copy j for every top-top pair (j, f(j)) with
    j < f(j), and as J^T from the right on copy j-k for every bottom-bottom
    pair (j, f(j)) with j < f(j).
    """
    k = s.k if k is None else k
    n = form.n
    d = 2**n
    core = rep_orthogonal(s, n, k).mat
    j = form.matrix()
    left = [c for c, fc in s.pairs() if fc < k]
    right = [c - k for c, fc in s.pairs() if c >= k]
    m = core.reshape((d,) * (2 * k))
    for c in left:
        m = np.moveaxis(np.tensordot(j, m, axes=([1], [c])), 0, c)
    for c in right:
        m = np.moveaxis(np.tensordot(m, j, axes=([k + c], [0])), -1, k + c)
    return DenseOperator(m.reshape(d**k, d**k).astype(complex), n=n, k=k)


def pi_s(form: SymplecticForm, psd: bool = False) -> DenseOperator:
    """The rank-one symplectic commutant element D |J><J| up to sign.

    The diagram convention (matching the displayed Gram matrix) carries a
    minus sign; psd=True returns the positive version used as a projector.
    """
    d = form.dim
    u = form.paired_state()
    sgn = 1.0 if psd else -1.0
    return DenseOperator(sgn * d * np.outer(u, u.conj()), n=form.n, k=2)


# ---------------------------------------------------------------------------
# stochastic Lagrangian subspaces (Clifford commutant labels)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class StochasticLagrangianSubspace:
    """k-dimensional subspace T of F_2^{2k} with x.x = y.y mod 4 throughout
    and containing the all-ones vector.  Vectors are packed as x*2^k + y."""

    k: int
    basis: tuple[int, ...]

    def span(self) -> set[int]:
        out = {0}
        for b in self.basis:
            out |= {v ^ b for v in out}
        return out

    def xy_pairs(self) -> list[tuple[int, int]]:
        kk = self.k
        return [(v >> kk, v & ((1 << kk) - 1)) for v in sorted(self.span())]

    def is_permutation(self):
        """The permutation pi with T = {(pi y, y)} if there is one, else None."""
        kk = self.k
        mapping = {}
        for x, y in self.xy_pairs():
            if _popcount(y) == 1:
                if _popcount(x) != 1:
                    return None
                mapping[y.bit_length() - 1] = x.bit_length() - 1
        if len(mapping) != kk:
            return None
        perm = tuple(mapping[i] for i in range(kk))
        if sorted(perm) != list(range(kk)):
            return None
        # confirm every span element matches the linear map
        for x, y in self.xy_pairs():
            im = 0
            for i in range(kk):
                if (y >> i) & 1:
                    im ^= 1 << perm[i]
            if im != x:
                return None
        return perm


def subspace_from_permutation(perm) -> StochasticLagrangianSubspace:
    k = len(perm)
    basis = tuple((1 << (k + perm[i])) | (1 << i) for i in range(k))
    return StochasticLagrangianSubspace(k, basis)


def enumerate_sigma_kk(k: int) -> list[StochasticLagrangianSubspace]:
    """All stochastic Lagrangian subspaces, by leveled span extension.

    The defining mod-4 condition holds on a span iff it holds on a basis and
    the bilinear form x_u.x_v + y_u.y_v vanishes mod 2 pairwise, so candidates
    can be filtered one basis vector at a time.
    """
    if k > MAX_PAIRING_COPIES:
        raise ValueError(f"subspace enumeration capped at k = {MAX_PAIRING_COPIES}")
    kk = k
    nbits = 2 * kk
    mask = (1 << kk) - 1

    def q4(v: int) -> int:
        return (_popcount(v >> kk) - _popcount(v & mask)) % 4

    def b2(u: int, v: int) -> int:
        return (_popcount((u >> kk) & (v >> kk)) + _popcount(u & v & mask)) % 2

    ones = (1 << nbits) - 1
    cands = [v for v in range(1, 1 << nbits) if q4(v) == 0]
    level = {frozenset({0, ones}): (ones,)}
    for _ in range(kk - 1):
        nxt: dict[frozenset, tuple] = {}
        for span, basis in level.items():
            for v in cands:
                if v in span:
                    continue
                if any(b2(v, u) for u in basis):
                    continue
                new_span = frozenset(span | {v ^ s for s in span})
                if new_span not in nxt:
                    nxt[new_span] = basis + (v,)
        level = nxt
    return [StochasticLagrangianSubspace(kk, basis) for basis in level.values()]


def r_small(t: StochasticLagrangianSubspace) -> np.ndarray:
    """The single-site matrix r(T) = sum_{(x,y) in T} |x><y| on 2^k dims."""
    d = 1 << t.k
    r = np.zeros((d, d))
    for x, y in t.xy_pairs():
        r[x, y] = 1.0
    return r


def _site_to_copy_perm(n: int, k: int) -> tuple[int, ...]:
    # axis position for (copy c, qubit q) is c*n+q; the site-major kron power
    # has the (q, c) axis at position q*k+c.
    return tuple(q * k + c for c in range(k) for q in range(n))


def r_subspace_dense(t: StochasticLagrangianSubspace, n: int) -> DenseOperator:
    """R(T) = r(T)^{tensor n}, reindexed to the copy-major layout."""
    k = t.k
    check_cap(2 ** (n * k))
    r = r_small(t)
    m = r.copy()
    for _ in range(n - 1):
        m = np.kron(m, r)
    perm = _site_to_copy_perm(n, k)
    axes = perm + tuple(n * k + p for p in perm)
    m = m.reshape((2,) * (2 * n * k)).transpose(axes)
    return DenseOperator(m.reshape(2 ** (n * k), 2 ** (n * k)).astype(complex), n=n, k=k)


def apply_r_subspace(t: StochasticLagrangianSubspace, n: int, v: np.ndarray) -> np.ndarray:
    """Matrix-free action of R(T) on a copy-major vector of length 2^{nk}."""
    k = t.k
    r = r_small(t)
    perm = _site_to_copy_perm(n, k)
    inv = np.argsort(perm)
    w = v.reshape((2,) * (n * k)).transpose(inv).reshape((2**k,) * n)
    for site in range(n):
        w = np.moveaxis(np.tensordot(r, w, axes=([1], [site])), 0, site)
    return w.reshape((2,) * (n * k)).transpose(perm).ravel()


def apply_kron_power(g: np.ndarray, v: np.ndarray, k: int) -> np.ndarray:
    """Matrix-free action of g^{tensor k} on a copy-major vector."""
    d = g.shape[0]
    w = v.reshape((d,) * k)
    for c in range(k):
        w = np.moveaxis(np.tensordot(g, w, axes=([1], [c])), 0, c)
    return w.ravel()


# ---------------------------------------------------------------------------
# matchgate two-copy commutant


def majorana_string(n: int, subset) -> np.ndarray:
    """gamma_S = product of gamma_i over the subset, in increasing order."""
    d = 2**n
    out = np.eye(d, dtype=complex)
    for i in sorted(subset):
        out = out @ majorana_dense(n, i)
    return out


def matchgate_basis_vk(n: int, k_index: int) -> DenseOperator:
    """V_k = C(2n,k)^{-1/2} sum_{|S|=k} 2^{-n} gamma_S tensor gamma_S.

    Orthonormal under the trace inner product; spans the two-copy matchgate
    commutant as k_index runs over 0..2n.
    """
    if not 0 <= k_index <= 2 * n:
        raise ValueError("k_index out of range")
    check_cap(2 ** (2 * n))
    d = 2**n
    acc = np.zeros((d * d, d * d), dtype=complex)
    for subset in itertools.combinations(range(1, 2 * n + 1), k_index):
        g = majorana_string(n, subset)
        acc += np.kron(g, g)
    coeff = 2.0 ** (-n) / math.sqrt(math.comb(2 * n, k_index))
    return DenseOperator(coeff * acc, n=n, k=2)


# ---------------------------------------------------------------------------
# bases and Weingarten tables


@dataclass(frozen=True)
class CommutantBasis:
    group: str
    n: int
    k: int
    labels: tuple[str, ...]
    ops: tuple[DenseOperator, ...]


@dataclass(frozen=True)
class WeingartenTable:
    labels: tuple[str, ...]
    gram: np.ndarray
    wg: np.ndarray

    def __post_init__(self):
        err = np.abs(self.wg @ self.gram @ self.wg - self.wg).max()
        if err > 1e-8 * max(1.0, np.abs(self.wg).max()):
            raise ValueError("pseudo-inverse identity violated")


def _perm_label(p) -> str:
    return "perm(" + ",".join(map(str, p)) + ")"


def _pairing_label(s: Pairing) -> str:
    return "pair[" + ";".join(f"{a}-{b}" for a, b in s.pairs()) + "]"


def commutant_basis(group: str, n: int, k: int,
                    form: SymplecticForm | None = None) -> CommutantBasis:
    """Dense labeled commutant basis for one of U, O, Sp, Cl, M."""
    check_cap(2 ** (n * k))
    labels: list[str] = []
    ops: list[DenseOperator] = []
    if group == "U":
        for p in itertools.permutations(range(k)):
            labels.append(_perm_label(p))
            ops.append(permutation_operator(p, n, k))
    elif group == "O":
        for s in enumerate_pairings(k):
            labels.append(_pairing_label(s))
            ops.append(rep_orthogonal(s, n, k))
    elif group == "Sp":
        form = SymplecticForm.standard(n) if form is None else form
        for s in enumerate_pairings(k):
            labels.append(_pairing_label(s))
            ops.append(rep_symplectic(s, form, k))
    elif group == "Cl":
        if n < k - 1:
            raise ValueError("basis not independent: Clifford path needs n >= k-1")
        for t in enumerate_sigma_kk(k):
            perm = t.is_permutation()
            labels.append(_perm_label(perm) if perm else f"T{t.basis}")
            ops.append(r_subspace_dense(t, n))
    elif group == "M":
        if k != 2:
            raise ValueError("matchgate commutant basis implemented for k = 2 only")
        for j in range(2 * n + 1):
            labels.append(f"V{j}")
            ops.append(matchgate_basis_vk(n, j))
    else:
        raise ValueError(f"unknown group tag {group!r}")
    return CommutantBasis(group, n, k, tuple(labels), tuple(ops))


def gram_and_weingarten(basis: CommutantBasis, rel_cutoff: float = 1e-10) -> WeingartenTable:
    m = len(basis.ops)
    gram = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            val = np.trace(basis.ops[i].mat.conj().T @ basis.ops[j].mat)
            if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
                raise ValueError("Gram entry not real")
            gram[i, j] = gram[j, i] = val.real
    return WeingartenTable(basis.labels, gram, pinv(gram, rel_cutoff))


@lru_cache(maxsize=None)
def cached_basis_table(group: str, n: int, k: int):
    basis = commutant_basis(group, n, k)
    return basis, gram_and_weingarten(basis)


def pairing_gram(k: int, d: float) -> tuple[list[Pairing], np.ndarray]:
    """Combinatorial Gram of the orthogonal diagram basis: D^(#loops).

    tr(rep(s)^dag rep(t)) counts the cycles of the union of the two matchings.
    """
    ps = enumerate_pairings(k)
    m = len(ps)
    gram = np.empty((m, m))
    for i, s in enumerate(ps):
        for j, t in enumerate(ps):
            seen = [False] * (2 * k)
            loops = 0
            for v0 in range(2 * k):
                if seen[v0]:
                    continue
                loops += 1
                v = v0
                while not seen[v]:
                    seen[v] = True
                    w = s.partner[v]
                    seen[w] = True
                    v = t.partner[w]
            gram[i, j] = d**loops
    return ps, gram


def clifford_gram(k: int, n: int) -> tuple[list[StochasticLagrangianSubspace], np.ndarray]:
    """Gram of the R(T) basis from single-site overlaps: tr(r^dag r')^n."""
    ts = enumerate_sigma_kk(k)
    m = len(ts)
    small = [r_small(t) for t in ts]
    gram = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            gram[i, j] = np.sum(small[i] * small[j]) ** n
    return ts, gram


# ---------------------------------------------------------------------------
# twirls


def exact_twirl(group: str, n: int, k: int, a: DenseOperator,
                basis: CommutantBasis | None = None,
                table: WeingartenTable | None = None) -> DenseOperator:
    """Haar twirl over the group: the projector onto the k-copy commutant."""
    if basis is None:
        basis, table = cached_basis_table(group, n, k)
    elif table is None:
        table = gram_and_weingarten(basis)
    coeffs = np.array([np.trace(op.mat.conj().T @ a.mat) for op in basis.ops])
    weights = table.wg @ coeffs
    out = np.zeros_like(a.mat)
    for w, op in zip(weights, basis.ops):
        out = out + w * op.mat
    return DenseOperator(out, n=n, k=k)


def approx_haar_twirl(n: int, k: int, a: DenseOperator) -> DenseOperator:
    """Phi_a(A) = 2^{-nk} sum_pi tr(A pi^{-1}) pi over permutation operators."""
    d = 2 ** (n * k)
    out = np.zeros((d, d), dtype=complex)
    for p in itertools.permutations(range(k)):
        inv = tuple(np.argsort(p))
        pi = permutation_operator(p, n, k).mat
        pinv_op = permutation_operator(inv, n, k).mat
        out += np.trace(a.mat @ pinv_op) * pi
    return DenseOperator(out / d, n=n, k=k)


def block_twirl(a: DenseOperator, n: int, k: int, qubits,
                basis: CommutantBasis, table: WeingartenTable) -> DenseOperator:
    """Exact twirl over a group element acting only on the given qubits,
    applied simultaneously on all k copies.

    ``basis``/``table`` describe the commutant for the block size len(qubits).
    """
    qubits = sorted(qubits)
    nb = len(qubits)
    if basis.n != nb or basis.k != k:
        raise ValueError("block basis does not match the block size")
    d_v = 2 ** (nb * k)
    d_r = 2 ** ((n - nb) * k)
    v_axes = [c * n + q for c in range(k) for q in qubits]
    r_axes = [c * n + q for c in range(k) for q in range(n) if q not in qubits]
    row = v_axes + r_axes
    col = [n * k + x for x in row]
    m = a.mat.reshape((2,) * (2 * n * k)).transpose(row + col)
    m = m.reshape(d_v, d_r, d_v, d_r)
    # c_s[r, s] = tr_V(sigma^dag A) blocks
    sig = np.stack([op.mat for op in basis.ops])
    c = np.einsum("xqp,prqs->xrs", sig.conj(), m, optimize=True)
    w = np.tensordot(table.wg, c, axes=([0], [0]))            # tau-weights
    out = np.einsum("xrs,xpq->prqs", w, sig, optimize=True)
    # undo the axis grouping
    out = out.reshape((2,) * (2 * n * k))
    inv = np.argsort(row + col)
    out = out.transpose(inv).reshape(2 ** (n * k), 2 ** (n * k))
    return DenseOperator(out, n=n, k=k)


def weingarten_sum_diagnostic(group: str, n: int, k: int) -> float:
    """Sum of |Wg(id, pi)| over non-identity permutations pi in S_k."""
    if k == 1:
        return 0.0
    if k > 4:
        raise ValueError("diagnostic capped at k = 4")
    d = float(2**n)
    if group == "O":
        ps, gram = pairing_gram(k, d)
        wg = pinv(gram)
        idx = {s: i for i, s in enumerate(ps)}
        id_i = idx[Pairing.identity(k)]
        total = 0.0
        for p in itertools.permutations(range(k)):
            if p == tuple(range(k)):
                continue
            total += abs(wg[id_i, idx[Pairing.from_permutation(p)]])
        return total
    if group == "Sp":
        if k != 2:
            raise ValueError("symplectic diagnostic implemented for k = 2 only")
        # closed-form Gram D[[D,1,-1],[1,D,1],[-1,1,D]] in order (id, swap, cup)
        gram = d * np.array([[d, 1, -1], [1, d, 1], [-1, 1, d]])
        wg = pinv(gram)
        return abs(wg[0, 1])
    raise ValueError("diagnostic defined for groups O and Sp")
