"""Witness operators, ancilla input bases and coefficient decompositions.

A witness on N qubit parties is expanded in the product basis built from four
single-qubit input states per party.  For a joint-measurement outcome tuple
(i_1, ..., i_N) the party-k basis states are conjugated by the outcome unitary
u_{i_k} and transposed, and the witness is written as the unique real linear
combination of those product operators.  Index conventions for the resulting
coefficient tensors: entry [x1-1, x2-1, ...] is the coefficient of the product
with ancilla index x_k on party k; in printed 4x4 matrices rows are the first
party and columns the second.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    HERMITIAN_ATOL,
    check_density_matrix,
    flat_index,
    index_tuples,
    min_eigenvalue,
    outcome_unitary,
    party_count_of,
    pauli,
)
from .states import w_state

GRAM_DET_MIN = 1e-8
DECOMPOSE_RESIDUAL_ATOL = 1e-9
CONDITION_LIMIT = 1e12

_NEGATIVITY_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class SeparabilityClass:
    """Class of states a witness is declared nonnegative on.

    kind "producible" with k: mixtures of block products, every block at most
    k parties (k=1 is full separability).  kind "bipartition" with blocks: a
    fixed two-block split such as ((0, 1), (2,)).
    """

    kind: str
    k: int | None = None
    blocks: tuple | None = None

    def __post_init__(self):
        if self.kind == "producible":
            if not self.k or self.k < 1:
                raise ValueError("producible class needs k >= 1")
        elif self.kind == "bipartition":
            if not self.blocks or len(self.blocks) != 2:
                raise ValueError("bipartition class needs exactly two blocks")
        else:
            raise ValueError(f"unknown class kind {self.kind!r}")

    @classmethod
    def fully_separable(cls) -> "SeparabilityClass":
        return cls("producible", k=1)

    @classmethod
    def producible(cls, k: int) -> "SeparabilityClass":
        return cls("producible", k=k)

    @classmethod
    def bipartition(cls, blocks) -> "SeparabilityClass":
        return cls("bipartition", blocks=tuple(tuple(b) for b in blocks))

    def label(self) -> str:
        if self.kind == "producible":
            return "fully-separable" if self.k == 1 else f"{self.k}-producible"
        parts = ["".join(str(i + 1) for i in b) for b in self.blocks]
        return "separable:{" + "}{".join(parts) + "}"


@dataclass(frozen=True, eq=False)
class Witness:
    """Hermitian operator that is nonnegative on its declared class and has at
    least one negative eigenvalue (otherwise it detects nothing)."""

    operator: np.ndarray
    party_count: int
    declared_class: SeparabilityClass | None = None
    name: str = "witness"

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        dim = 2**self.party_count
        if op.shape != (dim, dim):
            raise ValueError(f"operator shape {op.shape} does not match {self.party_count} parties")
        if np.max(np.abs(op - op.conj().T)) > HERMITIAN_ATOL:
            raise ValueError("witness operator must be Hermitian")
        if min_eigenvalue(op) >= -_NEGATIVITY_ATOL:
            raise ValueError("witness operator has no negative eigenvalue and witnesses nothing")
        object.__setattr__(self, "operator", op)


@dataclass(frozen=True, eq=False)
class AncillaBasis:
    """Four single-qubit input states per party, linearly independent as
    Hermitian operators (Gram determinant bounded away from zero)."""

    party_states: tuple

    def __post_init__(self):
        states = []
        for k, party in enumerate(self.party_states):
            if len(party) != 4:
                raise ValueError(f"party {k + 1} needs exactly 4 input states")
            party = tuple(check_density_matrix(s, name=f"party {k + 1} input {x + 1}") for x, s in enumerate(party))
            gram = np.array([[np.trace(a @ b).real for b in party] for a in party])
            if abs(np.linalg.det(gram)) < GRAM_DET_MIN:
                raise ValueError(f"party {k + 1} input states are not linearly independent")
            states.append(party)
        object.__setattr__(self, "party_states", tuple(states))

    @property
    def party_count(self) -> int:
        return len(self.party_states)

    def states(self, party: int) -> tuple:
        return self.party_states[party]


def default_basis(party_count: int) -> AncillaBasis:
    """The standard inputs I/2, (I+X)/2, (I+Y)/2, (I+Z)/2 for every party."""
    if party_count < 1:
        raise ValueError("party_count must be at least 1")
    eye = np.eye(2, dtype=complex)
    party = (
        eye / 2.0,
        (eye + pauli("X")) / 2.0,
        (eye + pauli("Y")) / 2.0,
        (eye + pauli("Z")) / 2.0,
    )
    return AncillaBasis(tuple(party for _ in range(party_count)))


def transform_basis(basis: AncillaBasis, outcome) -> AncillaBasis:
    """Conjugate every party's inputs by the unitary of its outcome label."""
    outcome = _check_outcome(outcome, basis.party_count)
    parties = []
    for k, i in enumerate(outcome):
        u = outcome_unitary(i)
        parties.append(tuple(u @ s @ u.conj().T for s in basis.party_states[k]))
    return AncillaBasis(tuple(parties))


def basis_product_elements(basis: AncillaBasis, outcome) -> list:
    """Decomposition operators for one outcome tuple, in lexicographic order
    of the ancilla index tuples: tensor products of the transformed, then
    transposed, party inputs."""
    outcome = _check_outcome(outcome, basis.party_count)
    per_party = []
    for k, i in enumerate(outcome):
        u = outcome_unitary(i)
        per_party.append([(u @ s @ u.conj().T).T for s in basis.party_states[k]])
    elements = []
    for xs in index_tuples(basis.party_count):
        op = per_party[0][xs[0] - 1]
        for k in range(1, len(xs)):
            op = np.kron(op, per_party[k][xs[k] - 1])
        elements.append(op)
    return elements


def decompose(witness, basis: AncillaBasis, outcome) -> np.ndarray:
    """Unique real coefficients expanding a Hermitian operator in the
    outcome-transformed product basis.

    Returns a tensor of shape (4,) * party_count indexed by the 0-based
    ancilla indices.  Raises if the basis is too ill-conditioned or the
    residual exceeds the reconstruction tolerance.
    """
    op = _operator_of(witness, basis.party_count)
    n = basis.party_count
    elements = basis_product_elements(basis, outcome)
    a = np.stack([e.reshape(-1) for e in elements], axis=1)
    a_real = np.vstack([a.real, a.imag])
    b = op.reshape(-1)
    b_real = np.concatenate([b.real, b.imag])
    beta, _, _, sv = np.linalg.lstsq(a_real, b_real, rcond=None)
    if sv[-1] <= 0.0 or sv[0] / sv[-1] > CONDITION_LIMIT:
        raise ValueError("ancilla basis is not tomographically complete (singular product system)")
    residual = np.linalg.norm((a @ beta).reshape(op.shape) - op)
    if residual > DECOMPOSE_RESIDUAL_ATOL:
        raise ValueError(f"decomposition residual {residual:.3e} exceeds {DECOMPOSE_RESIDUAL_ATOL}")
    return beta.reshape((4,) * n)


def reconstruct(coeffs: np.ndarray, basis: AncillaBasis, outcome) -> np.ndarray:
    """Sum of the product-basis operators weighted by a coefficient tensor."""
    n = basis.party_count
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (4,) * n:
        raise ValueError(f"coefficient tensor shape {coeffs.shape} does not match {n} parties")
    elements = basis_product_elements(basis, outcome)
    flat = coeffs.reshape(-1)
    out = np.zeros_like(elements[0])
    for c, e in zip(flat, elements):
        out += c * e
    return out


@dataclass(eq=False)
class OutcomeCoefficientTable:
    """Coefficient tensors for every one of the 4^N outcome tuples."""

    party_count: int
    tables: dict
    _matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        expected = index_tuples(self.party_count)
        if tuple(self.tables.keys()) != expected:
            raise ValueError("coefficient table must hold every outcome tuple in order")

    def coefficient(self, outcome) -> np.ndarray:
        return self.tables[tuple(outcome)]

    def coefficient_matrix(self) -> np.ndarray:
        """Dense (4^N, 4^N) view: rows outcome tuples, columns ancilla tuples,
        both in lexicographic order."""
        if self._matrix is None:
            self._matrix = np.stack([t.reshape(-1) for t in self.tables.values()])
        return self._matrix

    def to_jsonable(self) -> dict:
        """Keys "i1,i2,...", values nested lists of decimal strings (first
        party outermost), 16 significant digits."""
        return {
            ",".join(str(i) for i in outcome): nested_decimal_strings(tensor)
            for outcome, tensor in self.tables.items()
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_jsonable(), fh, indent=1)


def nested_decimal_strings(tensor: np.ndarray):
    if tensor.ndim == 1:
        return [format(float(v), ".15e") for v in tensor]
    return [nested_decimal_strings(t) for t in tensor]


def outcome_coefficients(witness, basis: AncillaBasis) -> OutcomeCoefficientTable:
    """Decompose a witness for every outcome tuple."""
    n = basis.party_count
    _operator_of(witness, n)
    tables = {outcome: decompose(witness, basis, outcome) for outcome in index_tuples(n)}
    return OutcomeCoefficientTable(n, tables)


def projector_witness(psi: np.ndarray, alpha: float, declared_class: SeparabilityClass | None = None,
                      name: str | None = None) -> Witness:
    """Witness alpha * I - |psi><psi| for a normalized pure state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("state vector must be normalized")
    n = party_count_of(psi.size)
    op = alpha * np.eye(psi.size, dtype=complex) - np.outer(psi, psi.conj())
    return Witness(op, n, declared_class, name or f"projector-witness(alpha={alpha:g})")


def werner_witness() -> Witness:
    """I/2 - |psi-><psi-| on two parties, nonnegative on separable states."""
    from .states import singlet

    psi = singlet()
    op = np.eye(4, dtype=complex) / 2.0 - np.outer(psi, psi.conj())
    return Witness(op, 2, SeparabilityClass.fully_separable(), "werner")


def w_depth_witness(alpha: float, declared_class: SeparabilityClass | None = None) -> Witness:
    """alpha * I - |W><W| on three parties.

    alpha = 2/3 detects genuine tripartite entanglement (nonnegative on all
    2-producible states); alpha = 4/9 detects any entanglement (nonnegative
    on fully separable states).  Other alphas need an explicit class.
    """
    if declared_class is None:
        if np.isclose(alpha, 2.0 / 3.0, atol=1e-12):
            declared_class = SeparabilityClass.producible(2)
        elif np.isclose(alpha, 4.0 / 9.0, atol=1e-12):
            declared_class = SeparabilityClass.fully_separable()
    return projector_witness(w_state(), alpha, declared_class, name=f"w-depth(alpha={alpha:g})")


def load_witness_matrix(path) -> np.ndarray:
    """Read a Hermitian matrix from a JSON array-of-arrays of [re, im] pairs."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        mat = np.array([[complex(entry[0], entry[1]) for entry in row] for row in raw])
    except (TypeError, IndexError) as exc:
        raise ValueError("matrix file must be a JSON array of arrays of [re, im] pairs") from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix file holds a non-square array of shape {mat.shape}")
    return mat


def _check_outcome(outcome, party_count: int) -> tuple:
    outcome = tuple(int(i) for i in outcome)
    if len(outcome) != party_count:
        raise ValueError(f"outcome tuple {outcome} does not match {party_count} parties")
    flat_index(outcome)
    return outcome


def _operator_of(witness, party_count: int) -> np.ndarray:
    op = witness.operator if isinstance(witness, Witness) else np.asarray(witness, dtype=complex)
    dim = 2**party_count
    if op.shape != (dim, dim):
        raise ValueError(f"operator shape {op.shape} does not match {party_count} parties")
    if np.max(np.abs(op - op.conj().T)) > HERMITIAN_ATOL:
        raise ValueError("only Hermitian operators can be decomposed with real coefficients")
    return op
