"""Closed-form reference values for the bundled example witnesses.

These tables are derivable by hand.  For the standard inputs I/2, (I+X)/2,
(I+Y)/2, (I+Z)/2 the dual operators under the Hilbert-Schmidt inner product
(after the transpose that enters the decomposition) are

    D1 = I - X + Y - Z,  D2 = X,  D3 = -Y,  D4 = Z,

and coefficient tensors follow by tracing the witness against products of
duals.  ``dual_coefficients`` below implements exactly that construction; it
is an independent route to the same numbers as the least-squares solve in
``witness.decompose`` and is what the self-check command compares against.
"""

from __future__ import annotations

import numpy as np

from .linalg import index_tuples, outcome_unitary
from .witness import AncillaBasis

# Coefficient matrices (rows: first party's ancilla index, columns: second
# party's) for the witness I/2 - |psi-><psi-| in the standard inputs.  The
# sixteen outcome pairs fall into four groups sharing a matrix.
WERNER_OUTCOME_GROUPS = (
    ((1, 1), (2, 2), (3, 3), (4, 4)),
    ((1, 2), (2, 1), (3, 4), (4, 3)),
    ((1, 3), (2, 4), (3, 1), (4, 2)),
    ((1, 4), (3, 2), (2, 3), (4, 1)),
)

WERNER_GROUP_MATRICES = (
    np.array([
        [4.0, -1.0, -1.0, -1.0],
        [-1.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 1.0, 0.0],
        [-1.0, 0.0, 0.0, 1.0],
    ]),
    np.array([
        [0.0, -1.0, 1.0, 1.0],
        [-1.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, -1.0, 0.0],
        [1.0, 0.0, 0.0, -1.0],
    ]),
    np.array([
        [0.0, 1.0, 1.0, -1.0],
        [1.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, -1.0, 0.0],
        [-1.0, 0.0, 0.0, 1.0],
    ]),
    np.array([
        [0.0, 1.0, -1.0, 1.0],
        [1.0, -1.0, 0.0, 0.0],
        [-1.0, 0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0, -1.0],
    ]),
)


def werner_coefficient_matrix(outcome) -> np.ndarray:
    """Reference coefficient matrix for a two-party outcome pair."""
    outcome = tuple(outcome)
    for group, matrix in zip(WERNER_OUTCOME_GROUPS, WERNER_GROUP_MATRICES):
        if outcome in group:
            return matrix.copy()
    raise ValueError(f"unknown outcome pair {outcome}")


def w_noise_slices(alpha: float) -> np.ndarray:
    """Coefficient tensor of alpha*I - |W><W| at the all-ones outcome.

    Returned with shape (4, 4, 4), entry [x1-1, x2-1, x3-1].  Only the
    (1, 1, 1) entry depends on alpha: the identity decomposes as
    8 (I/2)^(x)3, so it contributes 8*alpha there and nowhere else.
    """
    t = np.zeros((4, 4, 4))
    t[0, 0, 0] = 8.0 * alpha

    def sym_set(indices, value):
        # the witness and the inputs are party-symmetric, so the tensor is
        # invariant under joint index permutations
        from itertools import permutations

        for perm in set(permutations(indices)):
            t[perm[0] - 1, perm[1] - 1, perm[2] - 1] = value

    sym_set((1, 1, 4), -4.0 / 3.0)
    sym_set((1, 2, 4), 2.0 / 3.0)
    sym_set((1, 3, 4), 2.0 / 3.0)
    sym_set((1, 4, 4), -2.0 / 3.0)
    sym_set((2, 2, 4), -2.0 / 3.0)
    sym_set((3, 3, 4), -2.0 / 3.0)
    sym_set((4, 4, 4), 1.0)
    return t


def werner_value(p: float) -> float:
    """Ideal-measurement witness value for the singlet/noise mixture."""
    return 1.0 - 3.0 * p


def w_noise_value(alpha: float, p: float) -> float:
    """Ideal-measurement witness value for the W/noise mixture."""
    return 8.0 * alpha - 1.0 - 7.0 * p


WERNER_THRESHOLD = 1.0 / 3.0
W_GENUINE_THRESHOLD = 13.0 / 21.0  # alpha = 2/3
W_ENTANGLED_THRESHOLD = 23.0 / 63.0  # alpha = 4/9


def dual_coefficients(operator: np.ndarray, basis: AncillaBasis, outcome) -> np.ndarray:
    """Coefficient tensor computed through per-party dual operators.

    Independent of the least-squares path: inverts each party's 4x4 Gram
    matrix, forms dual operators and contracts them against the witness.
    """
    n = basis.party_count
    duals = []
    for k, i in enumerate(outcome):
        u = outcome_unitary(i)
        elements = [(u @ s @ u.conj().T).T for s in basis.party_states[k]]
        gram = np.array([[np.trace(a @ b).real for b in elements] for a in elements])
        inv = np.linalg.inv(gram)
        duals.append([sum(inv[x, y] * elements[y] for y in range(4)) for x in range(4)])
    out = np.zeros((4,) * n)
    for xs in index_tuples(n):
        d = duals[0][xs[0] - 1]
        for k in range(1, n):
            d = np.kron(d, duals[k][xs[k] - 1])
        out[tuple(x - 1 for x in xs)] = np.trace(d @ operator).real
    return out
