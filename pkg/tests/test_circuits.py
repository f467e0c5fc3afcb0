import numpy as np
import pytest

from twirllab.circuits import (
    ArchitectureGraph,
    BrickSpec,
    CircuitSpec,
    InvalidCircuitSpec,
    apply_circuit_dense,
    brickwork_1d,
    circuit_unitary,
    fixed_layout,
    is_locally_independent,
    lightcone,
    reverse_lightcone,
    sample_circuit,
)
from twirllab.streams import RngStream


def test_brickwork_shape_and_coverage():
    spec = brickwork_1d(6, 3, "U")
    assert spec.n == 6 and spec.depth == 3
    for layer in spec.layers:
        covered = sorted(q for b in layer for q in b.support)
        assert covered == list(range(6))


def test_symplectic_bricks_need_odd_arity():
    with pytest.raises(InvalidCircuitSpec):
        BrickSpec(0, (0, 1), "Sp")
    BrickSpec(0, (0, 1, 2), "Sp")  # odd arity is fine


def test_matchgate_bricks_must_be_intervals():
    with pytest.raises(InvalidCircuitSpec):
        BrickSpec(0, (0, 2), "M")
    BrickSpec(0, (2, 3, 4), "M")


def test_overlapping_bricks_rejected():
    arch = ArchitectureGraph.line(4)
    with pytest.raises(InvalidCircuitSpec):
        fixed_layout(arch, [[((0, 1), "U"), ((1, 2), "U")]])


def test_mixture_weights_must_sum_to_one():
    arch = ArchitectureGraph.line(2)
    layout = ((BrickSpec(0, (0, 1), "U"),),)
    with pytest.raises(InvalidCircuitSpec):
        CircuitSpec(arch, (layout, layout), weights=(0.9, 0.9))


def test_spec_json_roundtrip():
    spec = brickwork_1d(4, 2, "Cl")
    back = CircuitSpec.from_json(spec.to_json())
    assert back == spec


def test_lightcone_grows_by_brick_radius():
    spec = brickwork_1d(8, 3, "U")
    arch = spec.architecture
    cones = lightcone(arch, spec, [0])
    assert set(cones[0]) == {0}
    # forward cone grows monotonically and stays within distance depth
    for a, b in zip(cones, cones[1:]):
        assert set(a) <= set(b)
    assert max(cones[-1]) <= 3
    rcones = reverse_lightcone(arch, spec, [0])
    assert set(rcones[0]) == {0}


def test_sample_circuit_is_deterministic():
    spec = brickwork_1d(4, 2, "U")
    a = sample_circuit(spec, RngStream.named(3, "circ"))
    b = sample_circuit(spec, RngStream.named(3, "circ"))
    assert len(a.gates) == len(b.gates)
    for ga, gb in zip(a.gates, b.gates):
        assert ga.support == gb.support
        assert np.array_equal(ga.payload.mat, gb.payload.mat)


def test_circuit_unitary_is_unitary():
    spec = brickwork_1d(3, 2, "U")
    inst = sample_circuit(spec, RngStream.named(4, "cu"))
    u = circuit_unitary(inst)
    assert np.abs(u @ u.conj().T - np.eye(8)).max() < 1e-9


def test_apply_circuit_dense_matches_circuit_unitary():
    spec = brickwork_1d(3, 2, "U")
    inst = sample_circuit(spec, RngStream.named(5, "acd"))
    psi = np.zeros(8, dtype=complex)
    psi[0] = 1.0
    assert np.allclose(apply_circuit_dense(inst, psi), circuit_unitary(inst)[:, 0])


def test_brickwork_is_locally_independent():
    flag, witness, _warning = is_locally_independent(brickwork_1d(6, 2, "U"))
    assert flag and witness is None
