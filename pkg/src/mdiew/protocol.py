"""Outcome statistics under ideal and untrusted measurements.

The experiment prepares one ancilla qubit per party (inputs drawn from the
ancilla basis), hands (ancilla_k, system_k) to party k's measurement device
and records one of four outcomes per party.  Probabilities are conditional on
the input tuple, so each input column of a table sums to one.

The all-outcome witness value sums coefficient * probability over every
(outcome tuple, input tuple) pair and equals 2^N * Tr[W rho] when the devices
perform ideal Bell measurements; with arbitrary devices it stays nonnegative
on the witness's declared class.  The single-outcome value uses only the
all-ones outcome and equals Tr[W rho] / 2^N under ideal measurements.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import (
    check_density_matrix,
    flat_index,
    index_tuples,
    outcome_unitary,
    partial_trace,
    permute_subsystems,
    tensor_product,
)
from .states import Povm, ideal_bsm
from .witness import AncillaBasis, OutcomeCoefficientTable, basis_product_elements

DEFAULT_MAX_PARTIES = 4

_PROBABILITY_ATOL = 1e-10
_NORMALIZATION_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """P(outcomes | inputs) for all 4^N outcome tuples and input tuples.

    ``values[i, x]`` is the probability of the outcome tuple at lexicographic
    position i given the input tuple at position x.
    """

    party_count: int
    values: np.ndarray

    def __post_init__(self):
        k = 4**self.party_count
        v = np.asarray(self.values, dtype=float)
        if v.shape != (k, k):
            raise ValueError(f"table shape {v.shape} does not match {self.party_count} parties")
        if v.min() < -_PROBABILITY_ATOL or v.max() > 1.0 + _PROBABILITY_ATOL:
            raise ValueError("probabilities must lie in [0, 1]")
        column_sums = v.sum(axis=0)
        if np.max(np.abs(column_sums - 1.0)) > _NORMALIZATION_ATOL:
            raise ValueError("each input column must sum to 1")
        object.__setattr__(self, "values", v)

    def probability(self, outcome, inputs) -> float:
        return float(self.values[flat_index(outcome), flat_index(inputs)])

    def write_csv(self, path) -> None:
        n = self.party_count
        header = [f"outcome{k + 1}" for k in range(n)] + [f"input{k + 1}" for k in range(n)] + ["probability"]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for i, outcome in enumerate(index_tuples(n)):
                for x, inputs in enumerate(index_tuples(n)):
                    cells = [str(v) for v in outcome] + [str(v) for v in inputs] + [repr(float(self.values[i, x]))]
                    fh.write(",".join(cells) + "\n")


def ideal_probability(state: np.ndarray, basis: AncillaBasis, outcome, inputs) -> float:
    """Outcome probability under ideal Bell measurements.

    Evaluates 2^{-N} Tr[(x)_k (u tau u^dag)^T rho] on the system space alone,
    never forming the doubled ancilla+system space.
    """
    n = basis.party_count
    state = check_density_matrix(state)
    if state.shape[0] != 2**n:
        raise ValueError(f"state dimension {state.shape[0]} does not match {n} parties")
    outcome = tuple(int(i) for i in outcome)
    inputs = tuple(int(x) for x in inputs)
    element = _ideal_elements(basis, outcome)[flat_index(inputs)]
    return float(np.real(np.sum(element.T * state))) / 2**n


def _ideal_elements(basis: AncillaBasis, outcome) -> list:
    return basis_product_elements(basis, outcome)


def povm_probability(state: np.ndarray, basis: AncillaBasis, povms, outcome, inputs,
                     max_parties: int = DEFAULT_MAX_PARTIES) -> float:
    """Outcome probability for per-party POVMs, as an exact trace over the
    full (ancilla_1, system_1, ..., ancilla_N, system_N) space."""
    n = basis.party_count
    _check_model(povms, n, max_parties)
    state = check_density_matrix(state)
    outcome = tuple(int(i) for i in outcome)
    inputs = tuple(int(x) for x in inputs)
    taus = [basis.party_states[k][inputs[k] - 1] for k in range(n)]
    sigma = tensor_product(tensor_product(*taus), state)
    # ancillas first, systems second -> interleaved pairs
    interleave = [j for k in range(n) for j in (k, n + k)]
    sigma = permute_subsystems(sigma, (2,) * (2 * n), interleave)
    effect = tensor_product(*[povms[k].elements[outcome[k] - 1] for k in range(n)])
    return float(np.real(np.sum(effect.T * sigma)))


def apply_map_m(state: np.ndarray, povms, outcome, max_parties: int = DEFAULT_MAX_PARTIES) -> np.ndarray:
    """Effective (unnormalized, PSD) operator induced on the ancilla space by
    measuring (ancilla_k, system_k) pairs and obtaining the given outcomes.

    Summed over all outcome tuples this yields the identity on the ancilla
    space, which is why input columns of a probability table normalize.
    """
    n = len(povms)
    _check_model(povms, n, max_parties)
    state = check_density_matrix(state)
    if state.shape[0] != 2**n:
        raise ValueError(f"state dimension {state.shape[0]} does not match {n} POVMs")
    outcome = tuple(int(i) for i in outcome)
    if len(outcome) != n:
        raise ValueError(f"outcome tuple {outcome} does not match {n} parties")
    effect = tensor_product(*[povms[k].elements[outcome[k] - 1] for k in range(n)])
    # bring the interleaved pair ordering to (ancillas..., systems...)
    order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    effect = permute_subsystems(effect, (2,) * (2 * n), order)
    big = effect @ np.kron(np.eye(2**n, dtype=complex), state)
    return partial_trace(big, (2**n, 2**n), keep=(0,))


@lru_cache(maxsize=16)
def _input_operator_stack(basis: AncillaBasis) -> np.ndarray:
    """Rows: vec of the transposed input product operator for each input tuple."""
    n = basis.party_count
    rows = []
    for xs in index_tuples(n):
        op = basis.party_states[0][xs[0] - 1]
        for k in range(1, n):
            op = np.kron(op, basis.party_states[k][xs[k] - 1])
        rows.append(op.T.reshape(-1))
    return np.stack(rows)


def _mapped_operators(state: np.ndarray, povms) -> np.ndarray:
    """All 4^N induced ancilla-space operators in one contraction.

    Party k contributes a (4, 2, 2, 2, 2) tensor: outcome, then the element
    reshaped as [ancilla row, system row, ancilla col, system col].  The
    result has shape (4^N, 2^N, 2^N), outcome tuples in lexicographic order.
    """
    n = len(povms)
    letters = iter(string.ascii_lowercase)
    subs, tensors = [], []
    o_l, a_l, s_l, b_l, t_l = [], [], [], [], []
    for k in range(n):
        o, a, s, b, t = (next(letters) for _ in range(5))
        o_l.append(o)
        a_l.append(a)
        s_l.append(s)
        b_l.append(b)
        t_l.append(t)
        subs.append(o + a + s + b + t)
        tensors.append(np.stack([e.reshape(2, 2, 2, 2) for e in povms[k].elements]))
    # mapped[a, b] = sum_{s, t} effect[(a, s), (b, t)] rho[t, s]
    rho_sub = "".join(t_l) + "".join(s_l)
    out_sub = "".join(o_l) + "".join(a_l) + "".join(b_l)
    spec = ",".join(subs) + "," + rho_sub + "->" + out_sub
    rho = state.reshape((2,) * (2 * n))
    mu = np.einsum(spec, *tensors, rho, optimize=True)
    return mu.reshape(4**n, 2**n, 2**n)


def _ideal_table_values(state: np.ndarray, basis: AncillaBasis) -> np.ndarray:
    """All (outcome tuple, input tuple) probabilities under ideal projectors
    in one contraction over the transposed, outcome-conjugated inputs."""
    n = basis.party_count
    letters = iter(string.ascii_lowercase)
    subs, tensors = [], []
    i_l, x_l, row_l, col_l = [], [], [], []
    for k in range(n):
        i, x, a, b = (next(letters) for _ in range(4))
        i_l.append(i)
        x_l.append(x)
        row_l.append(a)
        col_l.append(b)
        subs.append(i + x + a + b)
        party = np.empty((4, 4, 2, 2), dtype=complex)
        for oi in range(4):
            u = outcome_unitary(oi + 1)
            for xi, tau in enumerate(basis.party_states[k]):
                party[oi, xi] = (u @ tau @ u.conj().T).T
        tensors.append(party)
    # Tr[(C1 (x) ... (x) CN) rho] with rho indexed [rows..., cols...]
    rho_sub = "".join(col_l) + "".join(row_l)
    out_sub = "".join(i_l) + "".join(x_l)
    spec = ",".join(subs) + "," + rho_sub + "->" + out_sub
    rho = state.reshape((2,) * (2 * n))
    table = np.einsum(spec, *tensors, rho, optimize=True)
    return np.real(table).reshape(4**n, 4**n) / 2**n


def probability_table(state: np.ndarray, basis: AncillaBasis, povms=None,
                      max_parties: int = DEFAULT_MAX_PARTIES) -> ProbabilityTable:
    """Exact conditional outcome distribution for every input tuple.

    ``povms=None`` means ideal Bell measurements.  The untrusted-device path
    reduces each outcome tuple to its induced ancilla-space operator, so the
    doubled space is never formed explicitly.
    """
    n = basis.party_count
    state = check_density_matrix(state)
    if state.shape[0] != 2**n:
        raise ValueError(f"state dimension {state.shape[0]} does not match {n} parties")
    if povms is None:
        values = _ideal_table_values(state, basis)
    else:
        _check_model(povms, n, max_parties)
        mapped = _mapped_operators(state, povms)
        input_stack = _input_operator_stack(basis)
        values = np.real(mapped.reshape(4**n, -1) @ input_stack.T)
    return ProbabilityTable(n, values)


def mdiew_value(table: ProbabilityTable, coeffs: OutcomeCoefficientTable) -> float:
    """All-outcome witness value: sum of coefficient * probability over every
    (outcome tuple, input tuple) pair."""
    if coeffs.party_count != table.party_count:
        raise ValueError("coefficient table and probability table disagree on party count")
    return float(np.sum(coeffs.coefficient_matrix() * table.values))


def single_outcome_value(table: ProbabilityTable, coeffs: np.ndarray) -> float:
    """Witness value built from the all-ones outcome row only."""
    n = table.party_count
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (4,) * n:
        raise ValueError(f"coefficient tensor shape {coeffs.shape} does not match {n} parties")
    return float(coeffs.reshape(-1) @ table.values[0, :])


def ideal_povms(party_count: int) -> list:
    """Per-party Bell-projector POVMs, for feeding the untrusted-device path."""
    return [ideal_bsm() for _ in range(party_count)]


def _check_model(povms, party_count: int, max_parties: int) -> None:
    if party_count > max_parties:
        raise ValueError(
            f"{party_count} parties exceed the joint-space cap of {max_parties}; raise max_parties explicitly"
        )
    if len(povms) != party_count:
        raise ValueError(f"expected {party_count} POVMs, got {len(povms)}")
    for k, p in enumerate(povms):
        if not isinstance(p, Povm):
            raise TypeError(f"measurement model entry {k} is not a Povm")
        if p.dim != 4 or p.n_outcomes != 4:
            raise ValueError(f"party {k + 1} POVM must act on a qubit pair with four outcomes")
