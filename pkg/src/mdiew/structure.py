"""Entanglement-structure bookkeeping and verification harnesses.

Structure and depth are certified at generation time through the mixture
certificates carried by StructuredState; deciding them from a raw density
matrix is intractable, so the harnesses sample certificate-bearing states and
check that witness values stay nonnegative under arbitrary devices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import check_density_matrix
from .protocol import mdiew_value, probability_table
from .states import GENERATOR_NAME, StructuredState, random_povm, w_state
from .witness import AncillaBasis, Witness, default_basis, outcome_coefficients, projector_witness

VIOLATION_TOL = 1e-7


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks of 0-based party indices covering everyone."""

    party_count: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        seen = [i for b in blocks for i in b]
        if not blocks or any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be nonempty")
        if sorted(seen) != list(range(self.party_count)):
            raise ValueError("blocks must partition the parties exactly")
        object.__setattr__(self, "blocks", blocks)

    def max_block_size(self) -> int:
        return max(len(b) for b in self.blocks)


def certificate_depth(state: StructuredState) -> int:
    """Largest block size across all certificate terms (the producibility k)."""
    if not state.terms:
        raise ValueError("state carries no certificate")
    return max(len(b) for term in state.terms for b in term.blocks)


@dataclass(eq=False)
class HarnessReport:
    """Outcome of a sampled nonnegativity check."""

    witness_label: str
    class_label: str
    trials: int
    min_value: float
    violations: int
    seed: int
    measurement: str
    values: list = field(repr=False)

    def to_jsonable(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "mdi-harness",
            "witness": self.witness_label,
            "class": self.class_label,
            "trials": self.trials,
            "min_value": self.min_value,
            "violations": self.violations,
            "violation_tolerance": -VIOLATION_TOL,
            "seed": self.seed,
            "generator": GENERATOR_NAME,
            "measurement": self.measurement,
            "state_sampler": "ginibre-mixture",
        }


def structure_witness_check(witness: Witness, sampler, trials: int, seed: int,
                            basis: AncillaBasis | None = None, measurement: str = "random",
                            class_label: str | None = None) -> HarnessReport:
    """Sample certificate-bearing states (and, by default, random per-party
    POVMs) and record the minimum witness value and any violations below
    -1e-7.

    ``sampler`` maps a numpy Generator to a StructuredState of the witness's
    declared class.  ``measurement`` is "random" or "ideal".
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if measurement not in ("random", "ideal"):
        raise ValueError("measurement must be 'random' or 'ideal'")
    n = witness.party_count
    basis = basis or default_basis(n)
    coeff_matrix = outcome_coefficients(witness, basis).coefficient_matrix()
    children = np.random.SeedSequence(seed).spawn(trials)
    values = []
    violations = 0
    for t in range(trials):
        rng = np.random.default_rng(children[t])
        sample = sampler(rng)
        if sample.party_count != n:
            raise ValueError("sampler produced a state with the wrong party count")
        povms = None if measurement == "ideal" else [random_povm(4, 4, rng) for _ in range(n)]
        table = probability_table(sample.state, basis, povms)
        value = float(np.sum(coeff_matrix * table.values))
        values.append(value)
        if value < -VIOLATION_TOL:
            violations += 1
    if class_label is None:
        class_label = witness.declared_class.label() if witness.declared_class else "unspecified"
    return HarnessReport(
        witness_label=witness.name,
        class_label=class_label,
        trials=trials,
        min_value=float(min(values)),
        violations=violations,
        seed=seed,
        measurement="random-povm" if measurement == "random" else "ideal-bsm",
        values=values,
    )


@dataclass(frozen=True)
class DepthVerdict:
    """Result of an ideal-measurement depth test on a tripartite state."""

    alpha: float
    value: float
    detected: bool
    implied_depth: int | None
    statement: str


def depth_detection(state: np.ndarray, alpha: float, basis: AncillaBasis | None = None) -> DepthVerdict:
    """Witness a tripartite state with alpha*I - |W><W| under ideal devices.

    A negative value at alpha = 2/3 certifies depth 3 (genuine tripartite
    entanglement); at alpha = 4/9 it certifies depth at least 2.
    """
    state = check_density_matrix(state)
    if state.shape[0] != 8:
        raise ValueError("depth detection expects a three-party qubit state")
    basis = basis or default_basis(3)
    witness = projector_witness(w_state(), alpha)
    table = probability_table(state, basis)
    value = mdiew_value(table, outcome_coefficients(witness, basis))
    detected = value < 0.0
    if np.isclose(alpha, 2.0 / 3.0, atol=1e-12):
        implied = 3 if detected else None
        meaning = "genuinely entangled (depth 3)" if detected else "no depth-3 detection"
    elif np.isclose(alpha, 4.0 / 9.0, atol=1e-12):
        implied = 2 if detected else None
        meaning = "not fully separable (depth >= 2)" if detected else "no entanglement detection"
    else:
        implied = None
        meaning = "negative value detects the class this alpha separates" if detected else "no detection"
    return DepthVerdict(alpha=alpha, value=value, detected=detected, implied_depth=implied, statement=meaning)


def map_certificate(sample: StructuredState, povms, outcome):
    """Blockwise image of a certificate under the untrusted-measurement map.

    Applies the map independently to every certificate block (each block sees
    only its own parties' POVMs and outcome labels) and mixes the results.
    Returns (operator, terms) where terms mirror the input certificate; the
    operator equals the map applied to the full state, which is the content
    of the structure-preservation argument, and each output block spans the
    same parties as its input block.
    """
    from .protocol import apply_map_m

    n = sample.party_count
    outcome = tuple(int(i) for i in outcome)
    if len(outcome) != n or len(povms) != n:
        raise ValueError("outcome tuple and POVM list must match the party count")
    mixed = np.zeros((2**n, 2**n), dtype=complex)
    out_terms = []
    for term in sample.terms:
        mapped_blocks = []
        for block, block_state in zip(term.blocks, term.states):
            block_povms = [povms[i] for i in block]
            block_outcome = tuple(outcome[i] for i in block)
            mapped_blocks.append(apply_map_m(block_state, block_povms, block_outcome))
        product = mapped_blocks[0]
        for b in mapped_blocks[1:]:
            product = np.kron(product, b)
        mixed += term.weight * product
        out_terms.append((term.weight, term.blocks, tuple(mapped_blocks)))
    return mixed, out_terms
