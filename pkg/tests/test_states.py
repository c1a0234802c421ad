import numpy as np
import pytest

from mdiew.linalg import bell_projector, check_density_matrix, min_eigenvalue
from mdiew.states import (
    MixtureTerm,
    Povm,
    StructuredState,
    ideal_bsm,
    noisy_bsm,
    product_state,
    random_density_matrix,
    random_k_producible,
    random_povm,
    random_separable,
    singlet,
    w_state,
    w_state_noise,
    werner,
)


def test_werner_endpoints():
    psi = singlet()
    assert np.max(np.abs(werner(1.0) - np.outer(psi, psi.conj()))) <= 1e-15
    assert np.max(np.abs(werner(0.0) - np.eye(4) / 4)) <= 1e-15
    with pytest.raises(ValueError):
        werner(1.2)


def test_werner_singlet_fidelity():
    psi = singlet()
    for p in np.linspace(0.0, 1.0, 11):
        fidelity = np.real(psi.conj() @ werner(p) @ psi)
        assert abs(fidelity - (p + (1.0 - p) / 4.0)) <= 1e-12


def test_werner_boundary_expectation():
    # I/2 - |psi-><psi-| changes sign at p = 1/3
    psi = singlet()
    w = np.eye(4) / 2 - np.outer(psi, psi.conj())
    assert abs(np.trace(w @ werner(1.0 / 3.0)).real) <= 1e-12


def test_w_state_noise_endpoints():
    rho = w_state_noise(1.0)
    assert abs(np.trace(rho).real - 1.0) <= 1e-12
    eigs = np.linalg.eigvalsh(rho)
    assert abs(eigs[-1] - 1.0) <= 1e-12 and np.max(np.abs(eigs[:-1])) <= 1e-12
    assert np.max(np.abs(w_state_noise(0.0) - np.eye(8) / 8)) <= 1e-15
    with pytest.raises(ValueError):
        w_state_noise(-0.1)


def test_w_state_noise_depth_boundary():
    psi = w_state()
    for alpha, p_star in ((2.0 / 3.0, 13.0 / 21.0), (4.0 / 9.0, 23.0 / 63.0)):
        w = alpha * np.eye(8) - np.outer(psi, psi.conj())
        assert abs(np.trace(w @ w_state_noise(p_star)).real) <= 1e-12


def test_product_state_basic():
    eye2 = np.eye(2) / 2
    s = product_state([eye2, eye2])
    assert np.max(np.abs(s.state - np.eye(4) / 4)) <= 1e-14
    assert len(s.terms) == 1 and s.terms[0].blocks == ((0,), (1,))

    zero = np.diag([1.0, 0.0])
    one = np.diag([0.0, 1.0])
    s01 = product_state([zero, one])
    want = np.zeros((4, 4))
    want[1, 1] = 1.0
    assert np.max(np.abs(s01.state - want)) <= 1e-15


def test_product_state_reconstruction():
    rng = np.random.default_rng(0)
    parts = [random_density_matrix(2, rng), random_density_matrix(4, rng)]
    s = product_state(parts)
    assert s.party_count == 3
    assert np.max(np.abs(s.reconstruct() - s.state)) <= 1e-12


def test_random_separable_valid_and_deterministic():
    a = random_separable((1, 1), 3, seed=11)
    b = random_separable((1, 1), 3, seed=11)
    c = random_separable((1, 1), 3, seed=12)
    assert np.array_equal(a.state, b.state)
    assert not np.array_equal(a.state, c.state)
    check_density_matrix(a.state)
    assert abs(sum(t.weight for t in a.terms) - 1.0) <= 1e-12
    with pytest.raises(ValueError):
        random_separable((), 2, seed=0)
    with pytest.raises(ValueError):
        random_separable((1, 1), 0, seed=0)


def test_random_separable_reconstruction_many_seeds():
    for seed in range(30):
        s = random_separable((2, 1), 4, seed=seed)
        assert np.max(np.abs(s.reconstruct() - s.state)) <= 1e-10


def test_random_k_producible_block_sizes():
    for seed in range(100):
        s = random_k_producible(4, 2, 3, seed=seed)
        sizes = [len(b) for t in s.terms for b in t.blocks]
        assert max(sizes) <= 2
    fully = random_k_producible(3, 1, 2, seed=5)
    assert all(len(b) == 1 for t in fully.terms for b in t.blocks)
    unconstrained = random_k_producible(3, 3, 1, seed=6)
    assert unconstrained.party_count == 3
    with pytest.raises(ValueError):
        random_k_producible(3, 4, 1, seed=0)


def test_structured_state_validates_certificate():
    good = random_separable((1, 1), 2, seed=1)
    bad_terms = (MixtureTerm(0.5, ((0,), (1,)), good.terms[0].states),)
    with pytest.raises(ValueError):
        StructuredState(good.state, bad_terms, 2)


def test_random_povm_valid_many_seeds():
    for seed in range(100):
        p = random_povm(4, 4, seed=seed)
        assert p.n_outcomes == 4 and p.dim == 4
    single = random_povm(3, 1, seed=0)
    assert np.max(np.abs(single.elements[0] - np.eye(3))) <= 1e-10
    with pytest.raises(ValueError):
        random_povm(2, 0, seed=0)


def test_povm_validation_rejects_bad_sets():
    eye = np.eye(2, dtype=complex)
    with pytest.raises(ValueError):
        Povm(2, (eye, eye))  # sums to 2I
    with pytest.raises(ValueError):
        Povm(2, (np.diag([2.0, 0.0]), np.diag([-1.0, 1.0])))  # negative element


def test_noisy_bsm():
    v1 = noisy_bsm(1.0)
    for o in (1, 2, 3, 4):
        assert np.max(np.abs(v1.elements[o - 1] - bell_projector(o))) <= 1e-12
    v0 = noisy_bsm(0.0)
    for e in v0.elements:
        assert np.max(np.abs(e - np.eye(4) / 4)) <= 1e-12
    for v in (0.3, 0.8):
        povm = noisy_bsm(v)
        assert min(min_eigenvalue(e) for e in povm.elements) >= -1e-10
    with pytest.raises(ValueError):
        noisy_bsm(1.5)
    assert ideal_bsm().n_outcomes == 4
