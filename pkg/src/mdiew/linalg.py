"""Dense complex-matrix primitives for few-qubit problems.

Everything works on plain numpy arrays with complex entries.  Conventions
used throughout the package:

* party 1 is the leftmost factor of a tensor product,
* the computational basis of each qubit is ordered |0>, |1>,
* joint-measurement outcomes on a (qubit, qubit) pair are labelled 1..4 and
  correspond to the Bell states phi+, psi+, phi-, psi-.  Outcome o is the
  projector onto (I (x) u_o)|phi+>, where u_1..u_4 = I, X, Z, XZ, so outcome
  2 flips the second qubit, outcome 3 flips its phase and outcome 4 does both.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10

PAULI_NAMES = ("I", "X", "Y", "Z")

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

BELL_LABELS = ("phi+", "psi+", "phi-", "psi-")

_OUTCOME_UNITARIES = (
    _PAULI["I"],
    _PAULI["X"],
    _PAULI["Z"],
    _PAULI["X"] @ _PAULI["Z"],
)


def pauli(name: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for a label in {I, X, Y, Z}."""
    try:
        return _PAULI[name].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli label {name!r}; expected one of {PAULI_NAMES}") from None


def outcome_unitary(outcome: int) -> np.ndarray:
    """Single-qubit conjugation attached to a joint-measurement outcome in 1..4."""
    if outcome not in (1, 2, 3, 4):
        raise ValueError(f"outcome must be in 1..4, got {outcome}")
    return _OUTCOME_UNITARIES[outcome - 1].copy()


def bell_state(outcome: int) -> np.ndarray:
    """Two-qubit Bell state vector for an outcome label in 1..4."""
    u = outcome_unitary(outcome)
    phi_plus = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
    return np.kron(np.eye(2, dtype=complex), u) @ phi_plus


def bell_projector(outcome: int) -> np.ndarray:
    """Rank-1 projector onto the Bell state with the given outcome label."""
    psi = bell_state(outcome)
    return np.outer(psi, psi.conj())


def tensor_product(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, party 1 leftmost."""
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def transpose(m: np.ndarray) -> np.ndarray:
    """Entrywise transpose without conjugation."""
    return np.asarray(m, dtype=complex).T.copy()


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m, dtype=complex).conj().T.copy()


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= atol)


def min_eigenvalue(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, atol):
        raise ValueError("min_eigenvalue expects a Hermitian matrix")
    return float(np.linalg.eigvalsh(m)[0])


def partial_trace(m: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    m : square matrix on the full space, subsystem dimensions ``dims``
        (party 1 leftmost).
    dims : sequence of subsystem dimensions.
    keep : iterable of 0-based subsystem indices that survive.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    total = int(np.prod(dims))
    m = np.asarray(m, dtype=complex)
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    keep = tuple(sorted(set(int(i) for i in keep)))
    if any(i < 0 or i >= n for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    t = m.reshape(dims + dims)
    perm = [*keep, *(n + i for i in keep), *traced, *(n + i for i in traced)]
    t = t.transpose(perm)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    dt = int(np.prod([dims[i] for i in traced])) if traced else 1
    t = t.reshape(dk, dk, dt, dt)
    return np.trace(t, axis1=2, axis2=3)


def permute_subsystems(m: np.ndarray, dims, order) -> np.ndarray:
    """Reorder tensor factors so that new position j holds old subsystem order[j]."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    order = list(int(i) for i in order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of 0..{n - 1}")
    total = int(np.prod(dims))
    m = np.asarray(m, dtype=complex)
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    t = m.reshape(dims + dims)
    t = t.transpose(order + [n + i for i in order])
    return t.reshape(total, total)


def check_density_matrix(m: np.ndarray, atol: float = HERMITIAN_ATOL, name: str = "state") -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return as complex array."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > atol:
        raise ValueError(f"{name} is not Hermitian within {atol}")
    if abs(np.trace(m).real - 1.0) > TRACE_ATOL or abs(np.trace(m).imag) > TRACE_ATOL:
        raise ValueError(f"{name} does not have unit trace")
    if np.linalg.eigvalsh((m + m.conj().T) / 2.0)[0] < -PSD_ATOL:
        raise ValueError(f"{name} is not positive semidefinite within {PSD_ATOL}")
    return m


def party_count_of(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension that must be a power of two."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@lru_cache(maxsize=64)
def index_tuples(party_count: int) -> tuple:
    """All tuples in {1..4}^N in lexicographic order (party 1 most significant)."""
    if party_count < 1:
        raise ValueError("party_count must be at least 1")
    return tuple(itertools.product((1, 2, 3, 4), repeat=party_count))


def flat_index(indices) -> int:
    """Position of a 1-based index tuple in the lexicographic enumeration."""
    idx = 0
    for i in indices:
        if i not in (1, 2, 3, 4):
            raise ValueError(f"index entries must be in 1..4, got {tuple(indices)}")
        idx = idx * 4 + (i - 1)
    return idx
