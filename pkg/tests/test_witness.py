import json

import numpy as np
import pytest

from mdiew.linalg import check_density_matrix, index_tuples, pauli
from mdiew.reference import (
    WERNER_GROUP_MATRICES,
    WERNER_OUTCOME_GROUPS,
    dual_coefficients,
    w_noise_slices,
    werner_coefficient_matrix,
)
from mdiew.states import random_k_producible, random_separable, random_state_vector
from mdiew.witness import (
    AncillaBasis,
    SeparabilityClass,
    Witness,
    decompose,
    default_basis,
    outcome_coefficients,
    projector_witness,
    reconstruct,
    transform_basis,
    w_depth_witness,
    werner_witness,
)


def test_default_basis_states():
    basis = default_basis(2)
    assert np.max(np.abs(basis.party_states[0][0] - np.eye(2) / 2)) <= 1e-15
    assert np.max(np.abs(basis.party_states[0][3] - np.diag([1.0, 0.0]))) <= 1e-15
    assert np.max(np.abs(basis.party_states[1][1] - (np.eye(2) + pauli("X")) / 2)) <= 1e-15


def test_default_basis_gram_independent():
    basis = default_basis(1)
    party = basis.party_states[0]
    gram = np.array([[np.trace(a @ b).real for b in party] for a in party])
    assert abs(np.linalg.det(gram)) >= 1e-8


def test_basis_rejects_dependent_states():
    eye2 = np.eye(2) / 2
    party = (eye2, eye2, (np.eye(2) + pauli("Y")) / 2, np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        AncillaBasis((party,))


def test_transform_basis_identity_outcome():
    basis = default_basis(2)
    same = transform_basis(basis, (1, 1))
    for k in range(2):
        for x in range(4):
            assert np.max(np.abs(same.party_states[k][x] - basis.party_states[k][x])) <= 1e-15


def test_transform_basis_phase_flip():
    # the phase-flip outcome (label 3) conjugates by Z, so Z X Z = -X sends
    # (I+X)/2 to (I-X)/2
    basis = default_basis(1)
    flipped = transform_basis(basis, (3,))
    assert np.max(np.abs(flipped.party_states[0][1] - (np.eye(2) - pauli("X")) / 2)) <= 1e-15


def test_transform_basis_stays_physical():
    basis = default_basis(3)
    for outcome in [(2, 3, 4), (4, 4, 4), (1, 2, 1)]:
        transformed = transform_basis(basis, outcome)
        for party in transformed.party_states:
            for s in party:
                check_density_matrix(s)


def test_witness_requires_negative_eigenvalue():
    psi = random_state_vector(4, seed=0)
    with pytest.raises(ValueError):
        projector_witness(psi, 1.0)
    with pytest.raises(ValueError):
        projector_witness(psi * 2.0, 0.5)


def test_werner_witness_spectrum():
    eigs = np.linalg.eigvalsh(werner_witness().operator)
    assert np.max(np.abs(np.sort(eigs) - np.array([-0.5, 0.5, 0.5, 0.5]))) <= 1e-12


def test_decompose_werner_reference_matrices():
    basis = default_basis(2)
    witness = werner_witness()
    for group, matrix in zip(WERNER_OUTCOME_GROUPS, WERNER_GROUP_MATRICES):
        for outcome in group:
            got = decompose(witness, basis, outcome)
            assert np.max(np.abs(got - matrix)) <= 1e-9


def test_decompose_basis_element():
    basis = default_basis(2)
    element = np.kron(np.eye(2) / 2, np.eye(2) / 2).T
    got = decompose(element, basis, (1, 1))
    want = np.zeros((4, 4))
    want[0, 0] = 1.0
    assert np.max(np.abs(got - want)) <= 1e-12


def test_decompose_roundtrip_random_hermitian():
    rng = np.random.default_rng(8)
    for n, outcome in ((2, (3, 2)), (3, (1, 4, 2))):
        basis = default_basis(n)
        g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
        h = (g + g.conj().T) / 2
        coeffs = decompose(h, basis, outcome)
        assert np.linalg.norm(reconstruct(coeffs, basis, outcome) - h) <= 1e-9
        # and the reverse direction: coefficients -> operator -> coefficients
        random_coeffs = rng.normal(size=(4,) * n)
        rebuilt = decompose(reconstruct(random_coeffs, basis, outcome), basis, outcome)
        assert np.max(np.abs(rebuilt - random_coeffs)) <= 1e-10
    assert np.max(np.abs(reconstruct(np.zeros((4, 4)), default_basis(2), (1, 1)))) == 0.0


def test_decompose_unique_under_basis_permutation():
    rng = np.random.default_rng(9)
    perm = (2, 0, 3, 1)
    original = default_basis(2)
    permuted = AncillaBasis(tuple(
        tuple(party[perm[j]] for j in range(4)) for party in original.party_states
    ))
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = (g + g.conj().T) / 2
    beta = decompose(h, original, (2, 4))
    beta_perm = decompose(h, permuted, (2, 4))
    for j1 in range(4):
        for j2 in range(4):
            assert abs(beta_perm[j1, j2] - beta[perm[j1], perm[j2]]) <= 1e-10


def test_outcome_coefficients_tables():
    basis = default_basis(2)
    table = outcome_coefficients(werner_witness(), basis)
    assert len(table.tables) == 16
    assert np.max(np.abs(table.coefficient((1, 2)) - werner_coefficient_matrix((1, 2)))) <= 1e-9

    basis3 = default_basis(3)
    table3 = outcome_coefficients(w_depth_witness(2.0 / 3.0), basis3)
    assert len(table3.tables) == 64
    # the x3 = 4 slice of the all-ones outcome has a closed form
    got_slice = table3.coefficient((1, 1, 1))[:, :, 3]
    want_slice = np.array([
        [-4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0],
        [2.0 / 3.0, -2.0 / 3.0, 0.0, 0.0],
        [2.0 / 3.0, 0.0, -2.0 / 3.0, 0.0],
        [-2.0 / 3.0, 0.0, 0.0, 1.0],
    ])
    assert np.max(np.abs(got_slice - want_slice)) <= 1e-9


def test_reconstruction_holds_for_every_outcome():
    basis = default_basis(2)
    witness = werner_witness()
    table = outcome_coefficients(witness, basis)
    for outcome in index_tuples(2):
        rebuilt = reconstruct(table.coefficient(outcome), basis, outcome)
        assert np.linalg.norm(rebuilt - witness.operator) <= 1e-9


def test_decompose_matches_dual_construction():
    rng = np.random.default_rng(10)
    basis = default_basis(3)
    witness = projector_witness(random_state_vector(8, rng), 0.5)
    for outcome in [(1, 1, 1), (2, 3, 4), (4, 1, 3)]:
        a = decompose(witness, basis, outcome)
        b = dual_coefficients(witness.operator, basis, outcome)
        assert np.max(np.abs(a - b)) <= 1e-10


def test_full_outcome_table_matches_dual_construction():
    # every one of the 64 outcome tables, two independent constructions
    basis = default_basis(3)
    witness = w_depth_witness(2.0 / 3.0)
    table = outcome_coefficients(witness, basis)
    for outcome in index_tuples(3):
        dual = dual_coefficients(witness.operator, basis, outcome)
        assert np.max(np.abs(table.coefficient(outcome) - dual)) <= 1e-10


def test_w_noise_reference_slices_reconstruct():
    basis = default_basis(3)
    for alpha in (2.0 / 3.0, 4.0 / 9.0):
        tensor = w_noise_slices(alpha)
        rebuilt = reconstruct(tensor, basis, (1, 1, 1))
        assert np.linalg.norm(rebuilt - w_depth_witness(alpha).operator) <= 1e-9


def test_coefficient_json_export(tmp_path):
    basis = default_basis(2)
    table = outcome_coefficients(werner_witness(), basis)
    path = tmp_path / "coeffs.json"
    table.write_json(path)
    with open(path) as fh:
        data = json.load(fh)
    assert set(data.keys()) == {",".join(map(str, t)) for t in index_tuples(2)}
    first = data["1,1"]
    assert len(first) == 4 and len(first[0]) == 4
    assert isinstance(first[0][0], str)
    # at least 12 significant digits and exact round-trip of the value
    mantissa = first[0][0].split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) >= 12
    assert float(first[0][0]) == pytest.approx(4.0, abs=1e-12)


def test_projector_witness_classes():
    genuine = w_depth_witness(2.0 / 3.0)
    assert genuine.declared_class.kind == "producible" and genuine.declared_class.k == 2
    entangled = w_depth_witness(4.0 / 9.0)
    assert entangled.declared_class.k == 1
    other = w_depth_witness(0.55)
    assert other.declared_class is None
    assert SeparabilityClass.bipartition(((0, 1), (2,))).label() == "separable:{12}{3}"


def test_declared_class_nonnegativity_sampled():
    cases = [
        (werner_witness(), lambda rng: random_separable((1, 1), int(rng.integers(1, 4)), rng)),
        (w_depth_witness(2.0 / 3.0), lambda rng: random_k_producible(3, 2, int(rng.integers(1, 4)), rng)),
        (w_depth_witness(4.0 / 9.0), lambda rng: random_separable((1, 1, 1), int(rng.integers(1, 4)), rng)),
    ]
    rng = np.random.default_rng(123)
    for witness, sampler in cases:
        for _ in range(1000):
            sample = sampler(rng)
            assert np.trace(witness.operator @ sample.state).real >= -1e-9


def test_witness_wrong_shape_rejected():
    with pytest.raises(ValueError):
        Witness(np.diag([1.0, -1.0]), party_count=2)
    rng = np.random.default_rng(11)
    not_hermitian = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    with pytest.raises(ValueError):
        decompose(not_hermitian, default_basis(2), (1, 1))
