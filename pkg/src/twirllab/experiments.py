"""Runnable experiments: distinguishers, witnesses, twirl distances, and
anti-concentration values (exact, bound, and Monte Carlo).

Every experiment returns an ExperimentReport.  Monte Carlo estimates carry
a standard error from the sample variance; exact values carry stderr 0 and
the exact flag.  Structural zeros/ones (lightcone cancellations) are
evaluated densely without sampling noise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from math import comb, sqrt

import numpy as np

from .circuits import (
    CircuitSpec,
    SuperblockSpec,
    build_superblock,
    circuit_unitary,
    sample_circuit,
)
from .commutant import (
    block_twirl,
    cached_basis_table,
    commutant_basis,
    enumerate_pairings,
    exact_twirl,
    gram_and_weingarten,
    pairing_gram,
    permutation_operator,
    r_subspace_dense,
)
from .operators import (
    DenseOperator,
    basis_state,
    omega_state,
    partial_transpose,
    single_site_pauli,
    trace_norm,
)
from .samplers import (
    SymplecticForm,
    haar_orthogonal,
    haar_symplectic,
    haar_unitary,
    random_clifford,
)
from .simulators import StabilizerState, StateVector, vacuum_covariance
from .streams import RngStream


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    estimate: float
    stderr: float
    samples: int
    exact: bool
    seed: object = None
    walltime: float = 0.0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.exact and self.stderr != 0.0:
            raise ValueError("exact reports must have zero stderr")
        if not self.exact and self.samples < 1:
            raise ValueError("Monte Carlo reports need at least one sample")

    def to_record(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "exact": self.exact,
            "seed": self.seed,
            "walltime": self.walltime,
            "extras": self.extras,
        }


def _mc(values: np.ndarray):
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if values.size > 1:
        err = float(values.std(ddof=1) / sqrt(values.size))
    else:
        err = 0.0
    return mean, err


def _finish(t0, experiment, params, estimate, stderr, samples, exact, seed, extras=None):
    return ExperimentReport(
        experiment=experiment,
        params=params,
        estimate=float(estimate),
        stderr=float(stderr),
        samples=int(samples),
        exact=bool(exact),
        seed=seed,
        walltime=time.monotonic() - t0,
        extras=extras or {},
    )


# ---------------------------------------------------------------------------
# Clifford: two-copy reduction of the four-copy protocol
# ---------------------------------------------------------------------------


def _clifford_site_values(ensemble, n: int, samples: int, rng: RngStream, sites):
    """Per-sample <psi|Z_i|psi>^2 values (a 0/1 integer for stabilizer psi)."""
    out = np.zeros((samples, len(sites)))
    for s in range(samples):
        srng = rng.substream(s)
        if ensemble == "haar":
            t = random_clifford(n, srng)
            # value(i) = <0|C Z_i C^dag|0>^2: 1 iff the Z_i image is diagonal
            for c, i in enumerate(sites):
                x, _z, _ph = t.image_row(i, "Z")
                out[s, c] = 0.0 if x.any() else 1.0
        else:
            inst = sample_circuit(ensemble, srng)
            st = StabilizerState.zero(n)
            for g in inst.gates:
                st = st.apply_tableau(g.payload, g.support)
            for c, i in enumerate(sites):
                zi = _pauli_z(n, i)
                out[s, c] = float(st.expectation(zi)) ** 2
    return out


def _pauli_z(n: int, site: int):
    from .operators import PauliString

    z = [0] * n
    z[site] = 1
    return PauliString(n, tuple([0] * n), tuple(z))


def clifford4_distinguisher(ensemble, n: int, samples: int, seed=0, sites=None):
    """Mean over qubits of E <0|C Z_i C^dag|0>^2.

    This is the two-copy reduction of the four-copy protocol that
    perturbs the tensor-power stabilizer mixed state with Z_1 and
    measures Z_i^(x4): for Cliffords both equal the squared stabilizer
    expectation of Z_i.  Haar value is 1/(2^n+1); a qubit untouched by
    every circuit in the ensemble contributes exactly 1.
    """
    t0 = time.monotonic()
    rng = RngStream.named(seed, f"clifford4:{n}")
    sites = list(range(n)) if sites is None else list(sites)
    vals = _clifford_site_values(ensemble, n, samples, rng, sites).mean(axis=1)
    est, err = _mc(vals)
    params = {"n": n, "group": "Cl", "ensemble": _ensemble_id(ensemble), "sites": sites}
    return _finish(
        t0, "clifford4_distinguisher", params, est, err, samples, False, seed,
        {"haar_value": 1.0 / (2**n + 1)},
    )


def clifford4_dense_value(tableau, site: int) -> float:
    """Direct four-copy evaluation for cross-checking (n <= 3, 1-based site).

    Computes Tr[(Z_i x 1^3) R(T4) (Z_i x 1^3) U^(x4) |0><0| U^(x4)dag]
    with R(T4) = 2^-n sum_P P^(x4).
    """
    from .commutant import enumerate_sigma_kk, r_subspace_dense
    from .operators import pauli_dense
    from .samplers import clifford_to_dense

    n = tableau.n
    u = clifford_to_dense(tableau).mat
    psi = u[:, 0]
    vec = psi
    for _ in range(3):
        vec = np.kron(vec, psi)
    zi = pauli_dense(single_site_pauli(n, site, "Z")).mat
    pert = np.kron(zi, np.eye(2 ** (3 * n)))
    t4 = next(s for s in enumerate_sigma_kk(4) if not s.is_permutation())
    r = r_subspace_dense(t4, n).mat  # equals 2^-n sum_P P^(x4) already
    w = pert @ vec
    return float(np.real(np.vdot(w, r @ w)))


# ---------------------------------------------------------------------------
# State-design witnesses (per-site Z perturbations)
# ---------------------------------------------------------------------------


def _ensemble_id(ensemble) -> str:
    if isinstance(ensemble, str):
        return ensemble
    return f"spec(depth={ensemble.depth},n={ensemble.n})"


def _sampled_states(group: str, ensemble, n: int, samples: int, rng: RngStream):
    """Batch of output statevectors U|0> as rows of a (samples, 2^n) array."""
    dim = 2**n
    if ensemble == "haar":
        if group == "U":
            us = haar_unitary(dim, rng, size=samples)
            return us[:, :, 0]
        if group == "O":
            os_ = haar_orthogonal(dim, rng, size=samples)
            return os_[:, :, 0].astype(np.complex128)
        if group == "Sp":
            us = haar_symplectic(SymplecticForm.standard(n), rng, size=samples)
            return us[:, :, 0]
        raise ValueError(f"no dense haar batch for group {group!r}")
    out = np.zeros((samples, dim), dtype=np.complex128)
    for s in range(samples):
        inst = sample_circuit(ensemble, rng.substream(s))
        out[s] = StateVector.zero(n).apply_circuit(inst).vec
    return out


def _z_diag(n: int, sites) -> np.ndarray:
    d = np.ones(2**n)
    for i in sites:
        bit = 1 << (n - 1 - i)
        signs = np.where(np.arange(2**n) & bit, -1.0, 1.0)
        d = d * signs
    return d


def state_design_witness(group: str, ensemble, n: int, sites, samples: int, seed=0):
    """E <psi|Z_S|psi>^2 for psi = U|0>, per site and for the site pair.

    For the orthogonal group the reported witness is the EPR-sandwich
    value, i.e. the squared expectation divided by 2^n; the Clifford
    convention reports the squared expectation itself.  The symplectic
    and matchgate analogues use different probe operators and live in
    symplectic_state_witness / matchgate_state_witness.
    Extras carry singles, the pair value, and the Haar baseline.
    """
    if group not in ("Cl", "O"):
        raise ValueError("state_design_witness covers groups 'Cl' and 'O'")
    t0 = time.monotonic()
    rng = RngStream.named(seed, f"state_witness:{group}:{n}")
    sites = list(sites)
    norm = 1.0 if group == "Cl" else 1.0 / 2**n
    if group == "Cl":
        per_site = _clifford_site_values(ensemble, n, samples, rng, sites)
        pair_vals = None
        if len(sites) == 2:
            pair_vals = np.zeros(samples)
            rng2 = rng.substream(10**6)
            for s in range(samples):
                srng = rng2.substream(s)
                if ensemble == "haar":
                    t = random_clifford(n, srng)
                    st = StabilizerState.zero(n).apply_tableau(t)
                else:
                    inst = sample_circuit(ensemble, srng)
                    st = StabilizerState.zero(n)
                    for g in inst.gates:
                        st = st.apply_tableau(g.payload, g.support)
                zz = _pauli_z_multi(n, sites)
                pair_vals[s] = float(st.expectation(zz)) ** 2
        baseline = 1.0 / (2**n + 1)
    else:
        states = _sampled_states(group, ensemble, n, samples, rng)
        probs = np.abs(states) ** 2
        per_site = np.stack(
            [(probs @ _z_diag(n, [i])) ** 2 for i in sites], axis=1
        )
        pair_vals = None
        if len(sites) == 2:
            pair_vals = (probs @ _z_diag(n, sites)) ** 2
        baseline = 2.0 / (2**n * (2**n + 2))
    singles = []
    for c in range(len(sites)):
        m, e = _mc(per_site[:, c])
        singles.append({"site": sites[c], "estimate": m * norm, "stderr": e * norm})
    est, err = _mc(per_site.mean(axis=1))
    extras = {"singles": singles, "haar_value": baseline}
    if pair_vals is not None:
        pm, pe = _mc(pair_vals)
        extras["pair"] = {"sites": sites, "estimate": pm * norm, "stderr": pe * norm}
    params = {"n": n, "group": group, "ensemble": _ensemble_id(ensemble), "sites": sites}
    return _finish(
        t0, "state_design_witness", params, est * norm, err * norm, samples, False,
        seed, extras,
    )


def _pauli_z_multi(n: int, sites):
    from .operators import PauliString

    z = [0] * n
    for i in sites:
        z[i] = 1
    return PauliString(n, tuple([0] * n), tuple(z))


# ---------------------------------------------------------------------------
# Orthogonal EPR distinguisher
# ---------------------------------------------------------------------------


def _per_site_epr_values(mats: np.ndarray, n: int) -> np.ndarray:
    """Local EPR-projector expectations of (M x 1)|Omega> for a batch of M.

    The two-copy state reshapes to T = M/sqrt(D); site i's value is
    (1/2) sum_{A,B} |sum_x T[x,A,x,B]|^2.
    """
    batch = mats.shape[0]
    dim = mats.shape[1]
    t = mats.reshape((batch,) + (2,) * n + (2,) * n) / sqrt(dim)
    out = np.zeros((batch, n))
    for i in range(n):
        diag = np.diagonal(t, axis1=1 + i, axis2=1 + n + i)  # x axis moved last
        s = diag.sum(axis=-1)
        out[:, i] = 0.5 * (np.abs(s.reshape(batch, -1)) ** 2).sum(axis=1)
    return out


def orthogonal_epr_distinguisher(ensemble, n: int, samples: int, seed=0, chunk=2048):
    """Mean over qubits of the local EPR projector on (O Z_1 O^T x 1)|Omega>.

    Sites outside the causal cone of qubit 1 give exactly 1.  The Haar
    orthogonal value sits just above the projector-rank floor of 1/4
    (0.2535 at n=6), so the shallow-vs-Haar gap, not the absolute value,
    is the separation signal.
    """
    t0 = time.monotonic()
    rng = RngStream.named(seed, f"epr_distinguisher:{n}")
    dim = 2**n
    z1 = _z_diag(n, [0])
    site_vals = []
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        if ensemble == "haar":
            os_ = haar_orthogonal(dim, rng, size=b)
            mats = np.einsum("sij,j,skj->sik", os_, z1, os_)
        else:
            mats = np.zeros((b, dim, dim), dtype=np.complex128)
            for s in range(b):
                u = circuit_unitary(sample_circuit(ensemble, rng.substream(done + s)))
                mats[s] = (u * z1) @ u.T
        site_vals.append(_per_site_epr_values(np.ascontiguousarray(mats.real), n))
        done += b
    allv = np.concatenate(site_vals)
    est, err = _mc(allv.mean(axis=1))
    params = {"n": n, "group": "O", "ensemble": _ensemble_id(ensemble)}
    return _finish(
        t0, "orthogonal_epr_distinguisher", params, est, err, samples, False, seed,
        {"site_means": allv.mean(axis=0).tolist()},
    )


# ---------------------------------------------------------------------------
# Symplectic J-state distinguisher and state witness
# ---------------------------------------------------------------------------


def _per_site_j_values(mats: np.ndarray, form: SymplecticForm) -> np.ndarray:
    """Per-site two-copy J-state projector expectations of (M J x 1)|Omega>."""
    n = form.n
    batch = mats.shape[0]
    dim = 2**n
    j = form.matrix()
    t = (mats @ j / sqrt(dim)).reshape((batch,) + (2,) * n + (2,) * n)
    j1 = SymplecticForm.standard(1).paired_state().reshape(2, 2)
    out = np.zeros((batch, n))
    for i in range(n):
        ti = np.moveaxis(t, (1 + i, 1 + n + i), (1, 2))
        s = np.einsum("sxy...,xy->s...", ti, j1.conj())
        out[:, i] = (np.abs(s.reshape(batch, -1)) ** 2).sum(axis=1)
    return out


def symplectic_j_distinguisher(ensemble, n: int, samples: int, seed=0, chunk=2048):
    """Mean over qubits of the per-site J-state projector expectation.

    The probe state is (U Z_1 U^dag J x 1)|Omega>; sites outside the
    causal cone of qubit 1 give exactly 1.
    """
    if n % 2 == 0:
        raise ValueError("the paired-state construction needs odd n")
    t0 = time.monotonic()
    rng = RngStream.named(seed, f"j_distinguisher:{n}")
    form = SymplecticForm.standard(n)
    dim = 2**n
    z1 = _z_diag(n, [0])
    site_vals = []
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        if ensemble == "haar":
            us = haar_symplectic(form, rng, size=b)
            mats = np.einsum("sij,j,skj->sik", us, z1, us.conj())
        else:
            mats = np.zeros((b, dim, dim), dtype=np.complex128)
            for s in range(b):
                u = circuit_unitary(sample_circuit(ensemble, rng.substream(done + s)))
                mats[s] = (u * z1) @ u.conj().T
        site_vals.append(_per_site_j_values(mats, form))
        done += b
    allv = np.concatenate(site_vals)
    est, err = _mc(allv.mean(axis=1))
    params = {"n": n, "group": "Sp", "ensemble": _ensemble_id(ensemble)}
    return _finish(
        t0, "symplectic_j_distinguisher", params, est, err, samples, False, seed,
        {"site_means": allv.mean(axis=0).tolist()},
    )


def symplectic_state_witness(ensemble, n: int, samples: int, seed=0):
    """E |<J|(Y_1 x 1)(psi x psi)>|^2 for psi = U|0^n>.

    Haar symplectic gives 2/(2^n(2^n+1)); ensembles whose causal cone
    from qubit 1 misses any qubit give exactly 0.
    """
    if n % 2 == 0:
        raise ValueError("the paired state needs odd n")
    t0 = time.monotonic()
    rng = RngStream.named(seed, f"sp_state_witness:{n}")
    form = SymplecticForm.standard(n)
    from .operators import pauli_dense

    states = _sampled_states("Sp", ensemble, n, samples, rng)
    y1 = pauli_dense(single_site_pauli(n, 1, "Y")).mat
    jdag = form.matrix().conj().T
    probe = states @ (jdag @ y1).T  # rows: J^dag Y_1 psi
    amps = np.einsum("si,si->s", probe, states) / sqrt(2**n)
    vals = np.abs(amps) ** 2
    est, err = _mc(vals)
    params = {"n": n, "group": "Sp", "ensemble": _ensemble_id(ensemble)}
    return _finish(
        t0, "symplectic_state_witness", params, est, err, samples, False, seed,
        {"haar_value": 2.0 / (2**n * (2**n + 1)), "max_sample": float(vals.max())},
    )


# ---------------------------------------------------------------------------
# PPT twirl distance and distinct projectors
# ---------------------------------------------------------------------------


def is_ppt_each_copy(rho: np.ndarray, n: int, k: int, tol=1e-9) -> bool:
    op = DenseOperator(np.asarray(rho, dtype=np.complex128), n=n, k=k)
    for c in range(1, k + 1):
        pt = partial_transpose(op, c).mat
        if np.linalg.eigvalsh((pt + pt.conj().T) / 2).min() < -tol:
            return False
    return True


def ppt_twirl_distance(group: str, n: int, k: int, rho=None, pure_vector=None, seed=0):
    """Exact ||Phi_G(rho) - Phi_U(rho)||_1 for G in {O, Sp, Cl}.

    `pure_vector` (a 2^(nk) vector with rho = |v><v|) enables a
    coefficient-only path that never materializes more than one dense
    commutant element at a time, which is what makes Cl at k=4, n=3
    feasible.  Non-PPT inputs are still processed but flagged.
    """
    t0 = time.monotonic()
    if rho is None and pure_vector is None:
        # default probe: seeded random real product state psi^(x k).  A
        # real psi keeps the paired-state overlap non-degenerate, which
        # is the regime the twirl-closeness bounds describe; complex
        # probes suppress it and decay faster.
        rng = RngStream.named(seed, f"ppt_probe:{group}:{n}:{k}")
        psi = rng.normal(2**n)
        psi /= np.linalg.norm(psi)
        pure_vector = psi
        for _ in range(k - 1):
            pure_vector = np.kron(pure_vector, psi)
    if pure_vector is not None:
        v = np.asarray(pure_vector, dtype=np.complex128)
        v = v / np.linalg.norm(v)
        rho_mat = None
    else:
        rho_mat = rho.mat if isinstance(rho, DenseOperator) else np.asarray(rho)
    dim = 2 ** (n * k)

    def overlaps_and_ops(g):
        basis, table = cached_basis_table(g, n, k)
        ov = np.zeros(len(basis.ops), dtype=np.complex128)
        for idx, op in enumerate(basis.ops):
            if pure_vector is not None:
                ov[idx] = np.conj(np.vdot(v, op.mat @ v))
            else:
                ov[idx] = np.trace(op.mat.conj().T @ rho_mat)
        return basis, table, ov

    if group == "Cl" and 2 ** (n * k) > 2**10:
        if pure_vector is None:
            raise ValueError("the large Clifford path needs a pure input vector")
        diff, flag = _clifford_large_diff(n, k, v)
    else:
        basis_g, table_g, ov_g = overlaps_and_ops(group)
        coeffs_g = table_g.wg @ ov_g
        basis_u, table_u, ov_u = overlaps_and_ops("U")
        coeffs_u = table_u.wg @ ov_u
        diff = np.zeros((dim, dim), dtype=np.complex128)
        for c, op in zip(coeffs_g, basis_g.ops):
            diff += c * op.mat
        for c, op in zip(coeffs_u, basis_u.ops):
            diff -= c * op.mat
        flag = None
    if pure_vector is not None:
        check_rho = np.outer(v, v.conj())
    else:
        check_rho = rho_mat
    ppt = is_ppt_each_copy(check_rho, n, k) if check_rho.shape[0] <= 2**10 else True
    ev = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    dist = float(np.abs(ev).sum())
    params = {"n": n, "k": k, "group": group}
    extras = {"ppt": bool(ppt)}
    if flag:
        extras["path"] = flag
    return _finish(t0, "ppt_twirl_distance", params, dist, 0.0, 1, True, seed, extras)


def _clifford_large_diff(n: int, k: int, v: np.ndarray):
    """Difference of Clifford and unitary twirls of |v><v| at large dim.

    Uses overlaps computed matrix-free, then accumulates one dense
    commutant element at a time.
    """
    from itertools import permutations as _perms

    from .commutant import apply_r_subspace, clifford_gram, enumerate_sigma_kk
    from .operators import pinv

    subs, gram_cl = clifford_gram(k, n)
    wg_cl = pinv(gram_cl.astype(float))
    ov_cl = np.array([np.conj(np.vdot(v, apply_r_subspace(t, n, v))) for t in subs])
    coeffs_cl = wg_cl @ ov_cl

    dim_single = 2**n

    def cycles(perm):
        seen = [False] * len(perm)
        c = 0
        for i in range(len(perm)):
            if not seen[i]:
                c += 1
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = perm[j]
        return c

    perm_list = [tuple(p) for p in _perms(range(k))]
    gram_u = np.zeros((len(perm_list), len(perm_list)))
    for a, pa in enumerate(perm_list):
        inv_a = np.argsort(pa)
        for b, pb in enumerate(perm_list):
            comp = tuple(int(inv_a[pb[i]]) for i in range(k))
            gram_u[a, b] = float(dim_single ** cycles(comp))
    wg_u = pinv(gram_u)
    # overlap with P_sigma: tr(P_sigma^dag |v><v|) = <v| P_sigma^-1 |v>
    ov_u = np.zeros(len(perm_list), dtype=np.complex128)
    tview = v.reshape((dim_single,) * k)
    for a, pa in enumerate(perm_list):
        pv = np.transpose(tview, _perm_axes_inverse(pa)).reshape(-1)
        ov_u[a] = np.conj(np.vdot(v, pv))
    coeffs_u = wg_u @ ov_u
    dim = 2 ** (n * k)
    diff = np.zeros((dim, dim), dtype=np.complex128)
    for c, t in zip(coeffs_cl, subs):
        diff += c * r_subspace_dense(t, n).mat
    for c, pa in zip(coeffs_u, perm_list):
        diff -= c * permutation_operator(pa, n, k).mat
    return diff, "coefficient-accumulation"


def _perm_axes_inverse(perm):
    """Axis order such that transposing a k-axis state vector applies P_perm."""
    return tuple(np.argsort(perm))


def distinct_projector(n: int, k: int, flavor: str = "standard") -> DenseOperator:
    """Diagonal projector keeping k-tuples of basis strings that never
    coincide (standard) or never hit each other's paired-state image
    (symplectic: x_j != x_i XOR 1...1)."""
    dim = 2**n
    strings = np.array(list(iproduct(range(dim), repeat=k)))
    if flavor == "standard":
        keep = np.ones(len(strings), dtype=bool)
        for a in range(k):
            for b in range(a + 1, k):
                keep &= strings[:, a] != strings[:, b]
    elif flavor == "symplectic":
        mask = dim - 1
        keep = np.ones(len(strings), dtype=bool)
        for a in range(k):
            for b in range(k):
                if a != b:
                    keep &= strings[:, a] != (strings[:, b] ^ mask)
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    return DenseOperator(np.diag(keep.astype(np.complex128)), n=n, k=k)


def epr_relative_error_diagnostic(n: int = 2, k: int = 2):
    """Spectral norm of the distinct-projected difference between the
    orthogonal twirl and the flat permutation-average channel, evaluated
    on the doubled EPR state.  Reported, not asserted: the 4^{nk}/k!
    prefactor of the associated relative-error bound is vacuous at this
    scale."""
    t0 = time.monotonic()
    dim = 2 ** (n * k)
    basis, table = cached_basis_table("O", n, k)
    pairings = enumerate_pairings(k)
    perm_idx = [i for i, p in enumerate(pairings) if p.permutation() is not None]
    pi = distinct_projector(n, k, "standard").mat.real
    acc = np.zeros((dim * dim, dim * dim))
    for a in perm_idx:
        pa = permutation_operator(pairings[a].permutation(), n, k).mat.real
        pa = pi @ pa @ pi
        for b in perm_idx:
            pb = permutation_operator(pairings[b].permutation(), n, k).mat.real
            pb = pi @ pb @ pi
            w = table.wg[a, b] - (1.0 / dim if a == b else 0.0)
            acc += w * np.kron(pb, pa)
    acc /= dim
    norm = float(np.abs(np.linalg.eigvalsh((acc + acc.T) / 2)).max())
    return _finish(
        t0, "epr_relative_error_diagnostic", {"n": n, "k": k, "group": "O"},
        norm, 0.0, 1, True, None,
    )


# ---------------------------------------------------------------------------
# Orthogonal anti-concentration (wall sum)
# ---------------------------------------------------------------------------


def _wall_sum(xi: int, m: int) -> Fraction:
    """sum over a,b in {1,F,Pi_o}^(m/2) of 2^(-xi * wall count)."""
    half = m // 2
    total = Fraction(0)
    x = Fraction(1, 2**xi)
    for a in iproduct(range(3), repeat=half):
        for b in iproduct(range(3), repeat=half):
            w = 0
            for i in range(half):
                w += a[i] != b[i]
                w += a[(i + 1) % half] != b[i]
            total += x**w
    return total


def orthogonal_anticoncentration(
    xi: int, m: int, mode: str = "exact", samples: int = 0, seed=0, chunk=2048
):
    """E |<0|O|0>|^4 for the two-layer orthogonal superblock ring.

    exact: enumerates boundary-wall configurations between the two block
    layers; bound: closed form 3(1+3*2^-xi)^(2m) on the wall sum; both
    are reported normalized by (2^(2xi)+2)^m so that every mode
    estimates the same expectation.
    """
    t0 = time.monotonic()
    n = xi * m
    if m % 2:
        raise ValueError("need an even patch count")
    denom = Fraction((2 ** (2 * xi) + 2) ** m)
    haar_value = 3.0 / (2**n * (2**n + 2))
    params = {"xi": xi, "m": m, "n": n, "group": "O", "mode": mode}
    if mode == "exact":
        ws = _wall_sum(xi, m)
        est = float(ws / denom)
        return _finish(
            t0, "orthogonal_anticoncentration", params, est, 0.0, 1, True, seed,
            {"wall_sum": float(ws), "haar_value": haar_value},
        )
    if mode == "bound":
        bound_sum = 3.0 * (1.0 + 3.0 * 2.0 ** (-xi)) ** (2 * m)
        est = bound_sum / float(denom)
        return _finish(
            t0, "orthogonal_anticoncentration", params, est, 0.0, 1, True, seed,
            {"wall_sum_bound": bound_sum, "haar_value": haar_value},
        )
    if mode != "montecarlo":
        raise ValueError(f"unknown mode {mode!r}")
    rng = RngStream.named(seed, f"oac:{xi}:{m}")
    half = m // 2
    bdim = 2 ** (2 * xi)
    pdim = 2**xi
    # ring contraction: layer-1 first columns as patch tensors, layer-2
    # first rows closing the ring with the offset-by-one pairing
    sub_in = []
    for i in range(half):
        sub_in.append(f"s{_ax(2 * i)}{_ax(2 * i + 1)}")
    for i in range(half):
        sub_in.append(f"s{_ax((2 * i + 1) % m)}{_ax((2 * i + 2) % m)}")
    subscript = ",".join(sub_in) + "->s"
    vals = []
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        blocks = haar_orthogonal(bdim, rng, size=b * m).reshape(b, m, bdim, bdim)
        args = []
        for i in range(half):
            args.append(blocks[:, i, :, 0].reshape(b, pdim, pdim))
        for i in range(half):
            args.append(blocks[:, half + i, 0, :].reshape(b, pdim, pdim))
        amps = np.einsum(subscript, *args, optimize=True)
        vals.append(amps**4)
        done += b
    est, err = _mc(np.concatenate(vals))
    return _finish(
        t0, "orthogonal_anticoncentration", params, est, err, samples, False, seed,
        {"haar_value": haar_value},
    )


def _ax(i: int) -> str:
    return "abcdefghijklmnop"[i]


# ---------------------------------------------------------------------------
# Matchgate anti-concentration
# ---------------------------------------------------------------------------


def matchgate_uniform_chi(n: int, mode: str = "exact", samples: int = 0, seed=0):
    """chi = 2^(2n) E |<0|U|0>|^4 over uniform matchgates.

    Exact mode sums C(n,k/2)^2 / C(2n,k) over even k as exact rationals;
    Monte Carlo uses covariance-matrix amplitudes.
    """
    t0 = time.monotonic()
    params = {"n": n, "group": "M", "mode": mode}
    chi = Fraction(0)
    for kk in range(0, 2 * n + 1, 2):
        chi += Fraction(comb(n, kk // 2) ** 2, comb(2 * n, kk))
    if mode == "exact":
        return _finish(
            t0, "matchgate_uniform_chi", params, float(chi), 0.0, 1, True, seed,
            {"chi_over_sqrt_n": float(chi) / sqrt(n)},
        )
    if mode != "montecarlo":
        raise ValueError(f"unknown mode {mode!r}")
    rng = RngStream.named(seed, f"mchi:{n}")
    g0 = vacuum_covariance(n)
    vals = []
    done = 0
    while done < samples:
        b = min(4096, samples - done)
        os_ = haar_orthogonal(2 * n, rng, size=b)
        gammas = np.einsum("sij,ik,skl->sjl", os_, g0, os_)
        dets = np.abs(np.linalg.det(gammas + g0))
        amp2 = np.sqrt(dets) / 2**n
        vals.append(4.0**n * amp2**2)
        done += b
    est, err = _mc(np.concatenate(vals))
    return _finish(
        t0, "matchgate_uniform_chi", params, est, err, samples, False, seed,
        {"exact_value": float(chi)},
    )


def _transfer_entry_raw(xi: int, v: int, w: int) -> Fraction:
    """Per-cell entry before the sqrt(C(2xi,v) C(2xi,w)) symmetrization.

    One cell of the superblock ring is a first-layer block followed by a
    second-layer block; the index counts Majorana modes occupying a
    patch boundary.  Both block twirls preserve the mode count inside a
    block and resample the occupied subset uniformly, so a cell
    contributes

        sum_b C(2xi,b) C(2xi,(v+b)/2) C(2xi,(b+w)/2)
              / (C(4xi,v+b) C(4xi,b+w)) / 2^(4xi)

    with b ranging over boundary counts of matching parity.  Checked
    against an exact dense two-copy twirl composition of the ring.
    """
    if v > 2 * xi or w > 2 * xi or (v - w) % 2:
        return Fraction(0)
    acc = Fraction(0)
    for b in range(2 * xi + 1):
        if (v + b) % 2:
            continue
        acc += (
            Fraction(comb(2 * xi, b))
            * comb(2 * xi, (v + b) // 2)
            * comb(2 * xi, (b + w) // 2)
            / (comb(4 * xi, v + b) * comb(4 * xi, b + w))
        )
    return acc / 2 ** (4 * xi)


def transfer_m00(xi: int) -> Fraction:
    """Exact corner entry of the transfer matrix (normalization is 1 there)."""
    return _transfer_entry_raw(xi, 0, 0)


def transfer_matrix(xi: int) -> np.ndarray:
    """The (2xi+1)-square per-cell transfer matrix of the superblock ring.

    Entries of mixed index parity vanish.  The sqrt-symmetrized form is
    trace-equivalent to the asymmetric product of the two layer maps.
    """
    side = 2 * xi + 1
    mat = np.zeros((side, side))
    for v in range(side):
        for w in range(side):
            raw = _transfer_entry_raw(xi, v, w)
            if raw:
                mat[v, w] = float(raw) * sqrt(comb(2 * xi, v) * comb(2 * xi, w))
    return mat


def matchgate_transfer_chi(
    xi: int, m: int, mode: str = "exact", samples: int = 0, seed=0
):
    """chi_xi = 2^(2n) tr(M^(m/2)) for the periodic matchgate superblock.

    Monte Carlo works at the Majorana-rotation level where the periodic
    wraparound block is unproblematic (the dense qubit circuit would
    need an interval support, but the rotation does not).
    """
    t0 = time.monotonic()
    if m % 2:
        raise ValueError("need an even patch count")
    n = xi * m
    params = {"xi": xi, "m": m, "n": n, "group": "M", "mode": mode}
    tm = transfer_matrix(xi)
    chi = 4.0**n * np.trace(np.linalg.matrix_power(tm, m // 2))
    if mode == "exact":
        return _finish(
            t0, "matchgate_transfer_chi", params, float(chi), 0.0, 1, True, seed,
            {"m00": float(tm[0, 0])},
        )
    if mode != "montecarlo":
        raise ValueError(f"unknown mode {mode!r}")
    rng = RngStream.named(seed, f"mtransfer:{xi}:{m}")
    g0 = vacuum_covariance(n)
    half = m // 2
    bsize = 4 * xi  # Majorana modes per block
    vals = []
    done = 0
    while done < samples:
        b = min(2048, samples - done)
        blocks = haar_orthogonal(bsize, rng, size=b * m).reshape(b, m, bsize, bsize)
        r1 = np.zeros((b, 2 * n, 2 * n))
        r2 = np.zeros((b, 2 * n, 2 * n))
        r1[:] = np.eye(2 * n)
        r2[:] = np.eye(2 * n)
        for i in range(half):
            modes1 = np.arange(2 * xi * (2 * i), 2 * xi * (2 * i + 2)) % (2 * n)
            modes2 = np.arange(2 * xi * (2 * i + 1), 2 * xi * (2 * i + 3)) % (2 * n)
            r1[np.ix_(np.arange(b), modes1, modes1)] = blocks[:, i]
            r2[np.ix_(np.arange(b), modes2, modes2)] = blocks[:, half + i]
        o = np.einsum("sij,sjk->sik", r1, r2)  # rotation of layer2*layer1 circuit
        gammas = np.einsum("sji,jk,skl->sil", o, g0, o)
        dets = np.abs(np.linalg.det(gammas + g0))
        amp2 = np.sqrt(dets) / 2**n
        vals.append(4.0**n * amp2**2)
        done += b
    est, err = _mc(np.concatenate(vals))
    return _finish(
        t0, "matchgate_transfer_chi", params, est, err, samples, False, seed,
        {"exact_value": float(chi)},
    )


def matchgate_state_witness(ensemble, n: int, samples: int = 0, seed=0):
    """E |<0|U g_1 g_2n U^dag|0>|^2 = E ((o Gamma_0 o^T)_{1,2n})^2.

    Haar value 1/(2n-1); any circuit of depth <= n/4 gives exactly 0
    because the rotated Majorana supports cannot meet.
    """
    t0 = time.monotonic()
    rng = RngStream.named(seed, f"mwitness:{n}")
    g0 = vacuum_covariance(n)
    params = {"n": n, "group": "M", "ensemble": _ensemble_id(ensemble)}
    if ensemble == "haar":
        vals = []
        done = 0
        while done < samples:
            b = min(8192, samples - done)
            os_ = haar_orthogonal(2 * n, rng, size=b)
            corr = np.einsum("si,ij,sj->s", os_[:, 0, :], g0, os_[:, 2 * n - 1, :])
            vals.append(corr**2)
            done += b
        est, err = _mc(np.concatenate(vals))
        return _finish(
            t0, "matchgate_state_witness", params, est, err, samples, False, seed,
            {"haar_value": 1.0 / (2 * n - 1)},
        )
    # circuit ensembles: evaluate exactly per sampled circuit via composed
    # rotations; lightcone-limited circuits give a structural zero
    vals = []
    for s in range(max(1, samples)):
        inst = sample_circuit(ensemble, rng.substream(s))
        o = np.eye(2 * n)
        for gate in inst.gates:
            lo = min(gate.support)
            hi = max(gate.support)
            modes = np.arange(2 * lo, 2 * (hi + 1))
            emb = np.eye(2 * n)
            emb[np.ix_(modes, modes)] = gate.payload.o
            o = o @ emb  # composition rule: later gates multiply on the right
        corr = o[0, :] @ g0 @ o[2 * n - 1, :]
        vals.append(corr**2)
    est, err = _mc(np.array(vals))
    return _finish(
        t0, "matchgate_state_witness", params, est, err, len(vals), False, seed,
        {"haar_value": 1.0 / (2 * n - 1)},
    )


# ---------------------------------------------------------------------------
# Gluing check
# ---------------------------------------------------------------------------


def gluing_check(group: str, n: int, xi: int, k: int, seed=0):
    """Trace distance of the exact superblock channel output to global Haar.

    Composes per-block exact twirls (layer 1 then layer 2) applied to
    |0><0|^k and compares with the global unitary twirl; also reports
    the single-layer (depth-1) distance for the strict-improvement
    comparison.
    """
    t0 = time.monotonic()
    spec = build_superblock(SuperblockSpec(n, xi, group))
    layer1, layer2 = spec.layers
    dim = 2 ** (n * k)
    rho0 = np.zeros((dim, dim), dtype=np.complex128)
    rho0[0, 0] = 1.0
    rho = DenseOperator(rho0, n=n, k=k)
    block_n = 2 * xi
    basis_b, table_b = cached_basis_table(group, block_n, k)

    def twirl_layer(op, layer):
        for brick in layer:
            op = block_twirl(op, n, k, brick.support, basis_b, table_b)
        return op

    rho1 = twirl_layer(rho, layer1)
    rho2 = twirl_layer(rho1, layer2)
    target = exact_twirl("U", n, k, rho)
    d_two = trace_norm(rho2.mat - target.mat)
    d_one = trace_norm(rho1.mat - target.mat)
    params = {"n": n, "xi": xi, "k": k, "group": group}
    return _finish(
        t0, "gluing_check", params, d_two, 0.0, 1, True, seed,
        {"single_layer_distance": float(d_one)},
    )


# ---------------------------------------------------------------------------
# Registry (CLI front-end)
# ---------------------------------------------------------------------------

EXPERIMENTS = {
    "clifford4_distinguisher": {
        "func": clifford4_distinguisher,
        "anchor": "two-copy reduction of the four-copy tensor-power stabilizer protocol",
        "params": ("ensemble", "n", "samples"),
    },
    "state_design_witness": {
        "func": state_design_witness,
        "anchor": "per-site squared Z expectation of ensemble output states",
        "params": ("group", "ensemble", "n", "sites", "samples"),
    },
    "orthogonal_epr_distinguisher": {
        "func": orthogonal_epr_distinguisher,
        "anchor": "local EPR projector on the conjugated-Z two-copy probe state",
        "params": ("ensemble", "n", "samples"),
    },
    "symplectic_j_distinguisher": {
        "func": symplectic_j_distinguisher,
        "anchor": "local paired-state projector on the conjugated-Z probe state",
        "params": ("ensemble", "n", "samples"),
    },
    "symplectic_state_witness": {
        "func": symplectic_state_witness,
        "anchor": "overlap of the Y-perturbed paired state with two output copies",
        "params": ("ensemble", "n", "samples"),
    },
    "ppt_twirl_distance": {
        "func": ppt_twirl_distance,
        "anchor": "trace distance between subgroup and unitary twirls on PPT inputs",
        "params": ("group", "n", "k"),
    },
    "orthogonal_anticoncentration": {
        "func": orthogonal_anticoncentration,
        "anchor": "fourth output-amplitude moment of the two-layer orthogonal block ring",
        "params": ("xi", "m", "mode", "samples"),
    },
    "matchgate_uniform_chi": {
        "func": matchgate_uniform_chi,
        "anchor": "binomial-sum anti-concentration value of uniform matchgates",
        "params": ("n", "mode", "samples"),
    },
    "matchgate_transfer_chi": {
        "func": matchgate_transfer_chi,
        "anchor": "transfer-matrix trace for the matchgate superblock ring",
        "params": ("xi", "m", "mode", "samples"),
    },
    "matchgate_state_witness": {
        "func": matchgate_state_witness,
        "anchor": "squared vacuum expectation of the rotated extremal Majorana pair",
        "params": ("ensemble", "n", "samples"),
    },
    "gluing_check": {
        "func": gluing_check,
        "anchor": "exact two-layer block-twirl composition versus the global twirl",
        "params": ("group", "n", "xi", "k"),
    },
    "epr_relative_error_diagnostic": {
        "func": epr_relative_error_diagnostic,
        "anchor": "distinct-projected spectral norm against the flat permutation channel",
        "params": ("n", "k"),
    },
}
