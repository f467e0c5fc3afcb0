"""Acceptance gate: ten numbered criteria, one printed PASS/FAIL line each.

Each criterion states its tolerance inline.  The suite exercises closed
forms, oracle equivalences, and witness separations end to end; Monte
Carlo comparisons use three standard errors unless noted.
"""

import itertools
import json
from fractions import Fraction

import numpy as np

import conftest
from twirllab.circuits import (
    ArchitectureGraph,
    BrickSpec,
    CircuitSpec,
    SuperblockSpec,
    brickwork_1d,
    build_superblock,
    fixed_layout,
    sample_circuit,
)
from twirllab.commutant import (
    apply_kron_power,
    apply_r_subspace,
    block_twirl,
    cached_basis_table,
    commutant_basis,
    enumerate_sigma_kk,
    exact_twirl,
    pi_s,
    r_subspace_dense,
)
from twirllab.experiments import (
    clifford4_distinguisher,
    gluing_check,
    matchgate_state_witness,
    matchgate_transfer_chi,
    matchgate_uniform_chi,
    orthogonal_anticoncentration,
    orthogonal_epr_distinguisher,
    ppt_twirl_distance,
    state_design_witness,
    symplectic_j_distinguisher,
    symplectic_state_witness,
    transfer_m00,
)
from twirllab.operators import (
    DenseOperator,
    flip_operator,
    pi_o,
    pinv,
    single_site_pauli,
)
from twirllab.samplers import (
    CliffordTableau,
    SymplecticForm,
    clifford_to_dense,
    haar_orthogonal,
    haar_symplectic,
    haar_unitary,
    matchgate_to_dense,
    random_clifford,
    random_matchgate,
)
from twirllab.simulators import GaussianState, StabilizerState, StateVector
from twirllab.streams import RngStream


def _verdict(num: int, name: str, ok: bool):
    line = f"CRITERION {num:02d} {name}: {'PASS' if ok else 'FAIL'}"
    conftest.criterion_verdicts.append(line)
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# 1. Gram/Weingarten golden forms at k = 2
# ---------------------------------------------------------------------------


def test_criterion_01_gram_weingarten_golden():
    ok = True
    for n in (1, 2, 3):
        d = 2**n
        eye = np.eye(d * d)
        # D |Omega><Omega| has exact integer entries; build it that way so
        # the Gram comparison is entrywise exact, and check the float
        # implementation agrees to rounding
        pio = np.zeros((d * d, d * d))
        for i in range(d):
            for j in range(d):
                pio[i * d + i, j * d + j] = 1.0
        ok &= np.abs(pi_o(n).mat - pio).max() < 1e-12
        o_ops = [eye, flip_operator(n).mat.real, pio]
        gram_o = np.array([[np.trace(a.T @ b) for b in o_ops] for a in o_ops])
        target_o = d * np.array([[d, 1, 1], [1, d, 1], [1, 1, d]], dtype=float)
        ok &= np.array_equal(gram_o, target_o)
        wg_o = (1.0 / (d * (d - 1) * (d + 2))) * np.array(
            [[d + 1, -1, -1], [-1, d + 1, -1], [-1, -1, d + 1]]
        )
        ok &= np.abs(pinv(gram_o) - wg_o).max() < 1e-9

        # the all-Y form needs odd n; a single-Y mask covers even n
        form = (
            SymplecticForm.standard(n) if n % 2 else SymplecticForm.from_mask(n, 1)
        )
        vj = form.matrix().reshape(-1)  # integer entries 0, +-1
        pis = -np.outer(vj, vj.conj()).real
        ok &= np.abs(pi_s(form).mat - pis).max() < 1e-12
        sp_ops = [eye, flip_operator(n).mat.real, pis]
        gram_sp = np.array([[np.trace(a.T @ b) for b in sp_ops] for a in sp_ops])
        target_sp = d * np.array([[d, 1, -1], [1, d, 1], [-1, 1, d]], dtype=float)
        ok &= np.array_equal(gram_sp, target_sp)
        if d > 2:
            wg_sp = (1.0 / (d * (d + 1) * (d - 2))) * np.array(
                [[d - 1, -1, 1], [-1, d - 1, -1], [1, -1, d - 1]]
            )
            ok &= np.abs(pinv(gram_sp) - wg_sp).max() < 1e-9
        else:
            # the closed form is singular at d = 2; pinv must still be a
            # genuine pseudo-inverse of the (rank-deficient) Gram
            w = pinv(gram_sp)
            ok &= np.abs(gram_sp @ w @ gram_sp - gram_sp).max() < 1e-9
    _verdict(1, "gram-weingarten-golden", ok)


# ---------------------------------------------------------------------------
# 2. Commutation suite
# ---------------------------------------------------------------------------


def _commutes(c: np.ndarray, gk: np.ndarray) -> bool:
    num = np.linalg.norm(c @ gk - gk @ c)
    return num <= 1e-8 * max(1.0, np.linalg.norm(c))


def test_criterion_02_commutation_suite():
    ok = True
    rng = RngStream.named(2026, "commutation")

    basis_u = commutant_basis("U", 2, 3)
    for t in range(20):
        g = haar_unitary(4, rng.substream(t))
        gk = np.kron(np.kron(g, g), g)
        ok &= all(_commutes(op.mat, gk) for op in basis_u.ops)

    basis_o = commutant_basis("O", 2, 3)
    for t in range(20):
        g = haar_orthogonal(4, rng.substream(100 + t)).astype(complex)
        gk = np.kron(np.kron(g, g), g)
        ok &= all(_commutes(op.mat, gk) for op in basis_o.ops)

    form = SymplecticForm.standard(1)
    basis_sp = commutant_basis("Sp", 1, 3)
    for t in range(20):
        g = haar_symplectic(form, rng.substream(200 + t))
        gk = np.kron(np.kron(g, g), g)
        ok &= all(_commutes(op.mat, gk) for op in basis_sp.ops)

    # Clifford: dense for k <= 3 at n = 3, matrix-free for k = 4
    n = 3
    for k in (2, 3):
        ops = [r_subspace_dense(t, n).mat for t in enumerate_sigma_kk(k)]
        for t in range(20):
            g = clifford_to_dense(random_clifford(n, rng.substream(300 + 20 * k + t))).mat
            gk = g
            for _ in range(k - 1):
                gk = np.kron(gk, g)
            ok &= all(_commutes(op, gk) for op in ops)
    subs4 = enumerate_sigma_kk(4)
    for t in range(20):
        g = clifford_to_dense(random_clifford(n, rng.substream(400 + t))).mat
        v = rng.substream(500 + t).normal(2 ** (4 * n)) + 0j
        gv = apply_kron_power(g, v, 4)
        for sub in subs4:
            lhs = apply_r_subspace(sub, n, gv)
            rhs = apply_kron_power(g, apply_r_subspace(sub, n, v), 4)
            ok &= np.linalg.norm(lhs - rhs) <= 1e-8 * max(1.0, np.linalg.norm(lhs))

    basis_m = commutant_basis("M", 4, 2)
    for t in range(20):
        g = matchgate_to_dense(random_matchgate(4, rng.substream(600 + t))).mat
        gk = np.kron(g, g)
        ok &= all(_commutes(op.mat, gk) for op in basis_m.ops)
    _verdict(2, "commutation-suite", ok)


# ---------------------------------------------------------------------------
# 3. Clifford exact 3-design / non-4-design
# ---------------------------------------------------------------------------


def _enumerate_two_qubit_cliffords():
    """All 11520 two-qubit Cliffords mod phase: 720 binary symplectic
    matrices x 16 sign patterns."""
    lam = np.zeros((4, 4), dtype=np.uint8)
    lam[:2, 2:] = np.eye(2, dtype=np.uint8)
    lam[2:, :2] = np.eye(2, dtype=np.uint8)
    for bits in range(1 << 16):
        m = np.array(
            [[(bits >> (4 * r + c)) & 1 for c in range(4)] for r in range(4)],
            dtype=np.uint8,
        )
        if not np.array_equal((m @ lam @ m.T) % 2, lam):
            continue
        base = np.array([int(np.dot(m[r, :2], m[r, 2:])) % 4 for r in range(4)])
        for s in range(16):
            ph = (base + 2 * np.array([(s >> r) & 1 for r in range(4)])) % 4
            yield CliffordTableau(2, m, ph)


def test_criterion_03_clifford_three_design_not_four():
    rng = RngStream.named(3, "cl3")
    a = rng.normal(64, 64) + 1j * rng.normal(64, 64)
    acc = np.zeros((64, 64), dtype=complex)
    count = 0
    for tab in _enumerate_two_qubit_cliffords():
        u = clifford_to_dense(tab).mat
        u3 = np.kron(np.kron(u, u), u)
        acc += u3 @ a @ u3.conj().T
        count += 1
    acc /= count
    target = exact_twirl("U", 2, 3, DenseOperator(a, n=2, k=3)).mat
    ok = count == 11520 and np.abs(acc - target).max() < 1e-8

    # four-copy witness gap at n = 3: the non-permutation commutant element
    # gives 1/(2^n+1) on Cliffords but 4/33 on the unitary group
    n, k = 3, 4
    d = 2**n
    t4 = next(s for s in enumerate_sigma_kk(4) if not s.is_permutation())
    r = r_subspace_dense(t4, n).mat
    dim = d**k
    idx = np.arange(dim)
    signs = np.where((idx // d ** (k - 1)) & (d >> 1), -1.0, 1.0)
    perms = list(itertools.permutations(range(k)))

    def cycles(p):
        seen, c = [False] * k, 0
        for i in range(k):
            if not seen[i]:
                c += 1
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = p[j]
        return c

    gram = np.array(
        [
            [float(d) ** cycles(tuple(np.argsort(pa)[list(pb)])) for pb in perms]
            for pa in perms
        ]
    )
    coeff = pinv(gram).sum(axis=0)
    js = np.stack([(idx // d ** (k - 1 - c)) % d for c in range(k)])
    v_u = 0.0
    for ci, p in enumerate(perms):
        inv = np.argsort(p)
        jp = js[list(inv)]
        to = sum(jp[c] * d ** (k - 1 - c) for c in range(k))
        v_u += coeff[ci] * np.sum(signs * signs[to] * np.real(r[to, idx]))
    v_cl = 1.0 / (d + 1)
    gap = abs(v_cl - v_u)
    ok &= gap > 1e-3
    _verdict(3, "clifford-3-design-not-4", ok)


# ---------------------------------------------------------------------------
# 4. Haar baselines at finite n (3 sigma over >= 1e5 samples)
# ---------------------------------------------------------------------------


def _within_3_sigma(rep, target):
    return abs(rep.estimate - target) <= 3 * rep.stderr


def test_criterion_04_haar_baselines():
    ok = True
    samples = 100_000

    rep = clifford4_distinguisher("haar", 4, samples, seed=41)
    ok &= _within_3_sigma(rep, 1.0 / 17.0)

    rep = state_design_witness("O", "haar", 3, (0,), samples, seed=42)
    ok &= _within_3_sigma(rep, 2.0 / (8 * 10))

    # E |<0|O|0>|^4 over the 16-dimensional orthogonal group
    rng = RngStream.named(43, "o-moment")
    amps = haar_orthogonal(16, rng, size=samples)[:, 0, 0]
    vals = amps**4
    est = vals.mean()
    err = vals.std(ddof=1) / np.sqrt(samples)
    ok &= abs(est - 3.0 / (16 * 18)) <= 3 * err

    rep = symplectic_state_witness("haar", 3, samples, seed=44)
    ok &= _within_3_sigma(rep, 2.0 / (8 * 9))

    rep = matchgate_state_witness("haar", 4, samples=samples, seed=45)
    ok &= _within_3_sigma(rep, 1.0 / 7.0)
    _verdict(4, "haar-baselines", ok)


# ---------------------------------------------------------------------------
# 5. Lightcone separations for all four distinguishers
# ---------------------------------------------------------------------------


def test_criterion_05_lightcone_separations():
    ok = True

    # Clifford: depth-1 layout leaving qubits 4..7 untouched
    shallow_cl = fixed_layout(
        ArchitectureGraph.line(8),
        [[BrickSpec(0, (0, 1), "Cl"), BrickSpec(0, (2, 3), "Cl")]],
    )
    rep_s = clifford4_distinguisher(shallow_cl, 8, 20_000, seed=51)
    haar_cl = 1.0 / (2**8 + 1)
    ok &= rep_s.estimate >= 0.5
    ok &= rep_s.estimate - haar_cl >= 0.25

    # Orthogonal EPR: depth-1 brickwork at n = 6; sites outside the
    # lightcone of the perturbed qubit give exactly 1
    rep_s = orthogonal_epr_distinguisher(brickwork_1d(6, 1, "O"), 6, 20_000, seed=52)
    rep_h = orthogonal_epr_distinguisher("haar", 6, 20_000, seed=53)
    ok &= rep_s.estimate >= 0.5
    ok &= rep_s.estimate - rep_h.estimate >= 0.25
    ok &= all(v == 1.0 for v in rep_s.extras["site_means"][2:])

    # Symplectic: one 3-qubit brick on a 5-qubit line; sites 3, 4 exact
    shallow_sp = fixed_layout(
        ArchitectureGraph.line(5), [[BrickSpec(0, (0, 1, 2), "Sp")]]
    )
    rep_s = symplectic_j_distinguisher(shallow_sp, 5, 20_000, seed=54)
    rep_h = symplectic_j_distinguisher("haar", 5, 20_000, seed=55)
    ok &= rep_s.estimate >= 0.5
    ok &= rep_s.estimate - rep_h.estimate >= 0.25
    ok &= all(v == 1.0 for v in rep_s.extras["site_means"][3:])

    # Matchgate: lightcone-limited circuits give a structural exact zero,
    # against the 1/(2n-1) Haar baseline
    rep_s = matchgate_state_witness(brickwork_1d(2, 0, "M"), 2, samples=50, seed=56)
    rep_h = matchgate_state_witness("haar", 2, samples=20_000, seed=57)
    ok &= rep_s.estimate == 0.0
    ok &= abs(rep_h.estimate - 1.0 / 3.0) <= 3 * rep_h.stderr
    ok &= rep_h.estimate - rep_s.estimate >= 0.25
    rep_deep = matchgate_state_witness(brickwork_1d(8, 2, "M"), 8, samples=50, seed=58)
    ok &= rep_deep.estimate == 0.0
    _verdict(5, "lightcone-separations", ok)


# ---------------------------------------------------------------------------
# 6. PPT twirl closeness
# ---------------------------------------------------------------------------


def test_criterion_06_ppt_twirl_closeness():
    ok = True
    dists = [ppt_twirl_distance("O", n, 2, seed=60).estimate for n in (2, 3, 4)]
    ok &= all(np.isfinite(d) and d > 0 for d in dists)
    ok &= dists[0] > dists[1] > dists[2]
    for a, b in zip(dists, dists[1:]):
        ok &= 0.5 <= b / a <= 0.85  # consistent with c * 2^(-n/2) decay
    rep_cl = ppt_twirl_distance("Cl", 3, 4, seed=60)
    ok &= rep_cl.estimate <= 10 * dists[1]
    _verdict(6, "ppt-twirl-closeness", ok)


# ---------------------------------------------------------------------------
# 7. Orthogonal anti-concentration
# ---------------------------------------------------------------------------


def test_criterion_07_orthogonal_anticoncentration():
    xi, m = 2, 4
    exact = orthogonal_anticoncentration(xi, m, mode="exact")
    mc = orthogonal_anticoncentration(xi, m, mode="montecarlo", samples=100_000, seed=70)
    ok = abs(exact.estimate - mc.estimate) <= 3 * mc.stderr
    bound = 3.0 * (1.0 + 2.0 ** -(xi - np.log2(3.0))) ** (2 * m)
    ok &= exact.extras["wall_sum"] <= bound
    _verdict(7, "orthogonal-anticoncentration", ok)


# ---------------------------------------------------------------------------
# 8. Matchgate transfer matrix
# ---------------------------------------------------------------------------


def test_criterion_08_matchgate_transfer_matrix():
    exact = matchgate_transfer_chi(2, 4, mode="exact")
    mc = matchgate_transfer_chi(2, 4, mode="montecarlo", samples=100_000, seed=80)
    ok = exact.params["n"] == 8
    ok &= abs(exact.estimate - mc.estimate) <= 3 * mc.stderr
    ok &= transfer_m00(1) == Fraction(5, 72)
    for xi in (1, 2):
        ratios = []
        for m in (4, 6, 8):
            chi = matchgate_transfer_chi(xi, m, mode="exact").estimate
            uni = matchgate_uniform_chi(xi * m, mode="exact").estimate
            ratios.append(chi / uni)
        ok &= ratios[0] < ratios[1] < ratios[2]
    _verdict(8, "matchgate-transfer-matrix", ok)


# ---------------------------------------------------------------------------
# 9. Gluing check
# ---------------------------------------------------------------------------


def test_criterion_09_gluing():
    rep = gluing_check("U", 4, 1, 2, seed=90)
    ok = rep.estimate < rep.extras["single_layer_distance"]

    rep_cl = gluing_check("Cl", 4, 1, 2, seed=90)
    ok &= abs(rep.estimate - rep_cl.estimate) <= 1e-8

    # k = 3: compare the composed superblock channels directly
    n, k, xi = 4, 3, 1
    spec = build_superblock(SuperblockSpec(n, xi, "U"))
    dim = 2 ** (n * k)
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[0, 0] = 1.0
    outs = {}
    for grp in ("U", "Cl"):
        basis, table = cached_basis_table(grp, 2 * xi, k)
        op = DenseOperator(rho0.copy(), n=n, k=k)
        for layer in spec.layers:
            for brick in layer:
                op = block_twirl(op, n, k, brick.support, basis, table)
        outs[grp] = op.mat
    ok &= np.abs(outs["U"] - outs["Cl"]).max() <= 1e-8
    _verdict(9, "gluing", ok)


# ---------------------------------------------------------------------------
# 10. Determinism and backend equivalence
# ---------------------------------------------------------------------------


def test_criterion_10_determinism_and_backends():
    a = clifford4_distinguisher("haar", 3, 500, seed=100)
    b = clifford4_distinguisher("haar", 3, 500, seed=100)
    pa = {kk: v for kk, v in a.to_record().items() if kk != "walltime"}
    pb = {kk: v for kk, v in b.to_record().items() if kk != "walltime"}
    ok = json.dumps(pa, sort_keys=True) == json.dumps(pb, sort_keys=True)

    # 50 Clifford circuits: stabilizer vs dense on every single-site Pauli
    n = 4
    spec_cl = brickwork_1d(n, 2, "Cl")
    for trial in range(50):
        inst = sample_circuit(spec_cl, RngStream.named(trial, "backend-cl"))
        stab = StabilizerState.zero(n)
        for g in inst.gates:
            stab = stab.apply_tableau(g.payload, g.support)
        dense = StateVector.zero(n).apply_circuit(inst)
        for q in range(1, n + 1):
            for which in "XYZ":
                p = single_site_pauli(n, q, which)
                from twirllab.operators import pauli_dense
                from twirllab.simulators import dense_expectation

                got = dense_expectation(dense, pauli_dense(p))
                ok &= abs(got - stab.expectation(p)) <= 1e-8

    # 50 matchgate circuits: covariance vs dense vacuum overlap
    n = 3
    spec_m = brickwork_1d(n, 2, "M")
    for trial in range(50):
        inst = sample_circuit(spec_m, RngStream.named(trial, "backend-m"))
        gauss = GaussianState.vacuum(n)
        psi = StateVector.zero(n).apply_circuit(inst)
        for g in inst.gates:
            lo, hi = min(g.support), max(g.support)
            modes = np.arange(2 * lo, 2 * (hi + 1))
            gauss = gauss.apply_rotation(g.payload, modes=modes)
        from twirllab.simulators import gaussian_amplitude_sq

        ok &= abs(gaussian_amplitude_sq(gauss) - abs(psi.vec[0]) ** 2) <= 1e-8
    _verdict(10, "determinism-and-backends", ok)
