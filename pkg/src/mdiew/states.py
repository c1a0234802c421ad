"""Named states, certificate-bearing random states and measurement models.

Random sampling uses numpy's PCG64 generator; every sampler takes an explicit
seed (or an already constructed Generator), so results are reproducible and
concurrent use with distinct seeds is safe.  Mixed states are drawn from the
Ginibre ensemble (normalize G G^dag), pure states by normalizing complex
Gaussian vectors, and mixture weights uniformly on the probability simplex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    HERMITIAN_ATOL,
    PSD_ATOL,
    bell_projector,
    check_density_matrix,
    is_hermitian,
    party_count_of,
    tensor_product,
)

GENERATOR_NAME = "numpy-pcg64"

_RECONSTRUCTION_ATOL = 1e-10


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def singlet() -> np.ndarray:
    """State vector (|01> - |10>)/sqrt(2)."""
    return np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def w_state() -> np.ndarray:
    """Tripartite state vector (|001> + |010> + |100>)/sqrt(3)."""
    v = np.zeros(8, dtype=complex)
    v[[1, 2, 4]] = 1.0 / np.sqrt(3.0)
    return v


def werner(p: float) -> np.ndarray:
    """Mixture p |psi-><psi-| + (1-p) I/4 of the singlet with white noise."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing parameter must be in [0, 1], got {p}")
    psi = singlet()
    return p * np.outer(psi, psi.conj()) + (1.0 - p) * np.eye(4, dtype=complex) / 4.0


def w_state_noise(p: float) -> np.ndarray:
    """Mixture p |W><W| + (1-p) I/8 of the tripartite W state with white noise."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing parameter must be in [0, 1], got {p}")
    psi = w_state()
    return p * np.outer(psi, psi.conj()) + (1.0 - p) * np.eye(8, dtype=complex) / 8.0


@dataclass(frozen=True, eq=False)
class MixtureTerm:
    """One term of a product-state mixture: a weight, a block partition over
    the parties (0-based, contiguous) and one density matrix per block."""

    weight: float
    blocks: tuple
    states: tuple

    def product(self) -> np.ndarray:
        return tensor_product(*self.states)


@dataclass(frozen=True, eq=False)
class StructuredState:
    """Density matrix together with the certificate that generated it.

    The certificate is the explicit convex mixture of block-product states;
    it is what the structure harnesses audit, since separability of a raw
    density matrix is not decidable in practice.
    """

    state: np.ndarray
    terms: tuple
    party_count: int

    def __post_init__(self):
        check_density_matrix(self.state, name="structured state")
        weights = np.array([t.weight for t in self.terms])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-10:
            raise ValueError("certificate weights must be nonnegative and sum to 1")
        parties = set()
        for term in self.terms:
            covered = [i for b in term.blocks for i in b]
            parties.update(covered)
            if sorted(covered) != list(range(self.party_count)):
                raise ValueError("certificate blocks must partition the parties")
        if np.linalg.norm(self.reconstruct() - self.state) > _RECONSTRUCTION_ATOL:
            raise ValueError("certificate does not reproduce the state")

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(np.asarray(self.state, dtype=complex))
        for term in self.terms:
            out += term.weight * term.product()
        return out


def product_state(parts) -> StructuredState:
    """Tensor product of the given block states with a one-term certificate."""
    parts = [check_density_matrix(p, name=f"part {i}") for i, p in enumerate(parts)]
    if not parts:
        raise ValueError("product_state needs at least one part")
    blocks = []
    start = 0
    for p in parts:
        n = party_count_of(p.shape[0])
        blocks.append(tuple(range(start, start + n)))
        start += n
    term = MixtureTerm(1.0, tuple(blocks), tuple(parts))
    return StructuredState(term.product(), (term,), start)


def random_density_matrix(dim: int, seed) -> np.ndarray:
    """Full-rank random state: normalized G G^dag with complex Gaussian G."""
    rng = _rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a = g @ g.conj().T
    return a / np.trace(a).real


def random_state_vector(dim: int, seed) -> np.ndarray:
    """Normalized complex Gaussian vector."""
    rng = _rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_separable(block_sizes, term_count: int, seed) -> StructuredState:
    """Convex mixture of products of random block states.

    ``block_sizes`` fixes the (contiguous) partition, e.g. (1, 1) for a fully
    separable two-qubit state or (2, 1) for the {12}{3} bipartition of three
    parties.  Weights are uniform on the simplex, block states Ginibre.
    """
    block_sizes = tuple(int(b) for b in block_sizes)
    if not block_sizes or any(b < 1 for b in block_sizes):
        raise ValueError(f"invalid block sizes {block_sizes}")
    if term_count < 1:
        raise ValueError("term_count must be at least 1")
    rng = _rng(seed)
    n = sum(block_sizes)
    blocks = []
    start = 0
    for b in block_sizes:
        blocks.append(tuple(range(start, start + b)))
        start += b
    blocks = tuple(blocks)
    weights = rng.dirichlet(np.ones(term_count))
    terms = []
    for w in weights:
        states = tuple(random_density_matrix(2**b, rng) for b in block_sizes)
        terms.append(MixtureTerm(float(w), blocks, states))
    state = sum(t.weight * t.product() for t in terms)
    return StructuredState(state, tuple(terms), n)


def random_k_producible(n_parties: int, k: int, term_count: int, seed) -> StructuredState:
    """Mixture of block products where every block involves at most k parties.

    Each term gets its own random contiguous partition with parts <= k, so the
    certificate witnesses k-producibility (depth at most k) by construction.
    """
    if not 1 <= k <= n_parties:
        raise ValueError(f"k must satisfy 1 <= k <= {n_parties}, got {k}")
    if term_count < 1:
        raise ValueError("term_count must be at least 1")
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(term_count))
    terms = []
    for w in weights:
        sizes = []
        remaining = n_parties
        while remaining > 0:
            s = int(rng.integers(1, min(k, remaining) + 1))
            sizes.append(s)
            remaining -= s
        blocks = []
        start = 0
        for s in sizes:
            blocks.append(tuple(range(start, start + s)))
            start += s
        states = tuple(random_density_matrix(2**s, rng) for s in sizes)
        terms.append(MixtureTerm(float(w), tuple(blocks), states))
    state = sum(t.weight * t.product() for t in terms)
    return StructuredState(state, tuple(terms), n_parties)


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive-operator valued measure: PSD elements that sum to identity."""

    dim: int
    elements: tuple

    def __post_init__(self):
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for i, e in enumerate(self.elements):
            e = np.asarray(e)
            if e.shape != (self.dim, self.dim):
                raise ValueError(f"POVM element {i} has shape {e.shape}, expected {(self.dim, self.dim)}")
            if not is_hermitian(e, HERMITIAN_ATOL):
                raise ValueError(f"POVM element {i} is not Hermitian")
            if np.linalg.eigvalsh((e + e.conj().T) / 2.0)[0] < -PSD_ATOL:
                raise ValueError(f"POVM element {i} is not positive semidefinite")
            total += e
        if np.max(np.abs(total - np.eye(self.dim))) > HERMITIAN_ATOL:
            raise ValueError("POVM elements do not sum to the identity")

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)


def random_povm(dim: int, n_outcomes: int, seed, max_retries: int = 100) -> Povm:
    """Random POVM: Ginibre-positive elements normalized by S^{-1/2} . S^{-1/2}."""
    if n_outcomes < 1:
        raise ValueError("n_outcomes must be at least 1")
    rng = _rng(seed)
    for _ in range(max_retries):
        raw = []
        for _ in range(n_outcomes):
            g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            raw.append(g @ g.conj().T)
        s = np.sum(raw, axis=0)
        vals, vecs = np.linalg.eigh(s)
        if vals[0] < 1e-12 * vals[-1]:
            continue
        s_inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.conj().T
        elements = tuple(s_inv_sqrt @ a @ s_inv_sqrt for a in raw)
        return Povm(dim, elements)
    raise RuntimeError("could not sample a well-conditioned POVM")


def noisy_bsm(visibility: float) -> Povm:
    """Bell measurement with depolarizing noise: v P_o + (1-v) I/4 per outcome."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {visibility}")
    eye4 = np.eye(4, dtype=complex)
    elements = tuple(visibility * bell_projector(o) + (1.0 - visibility) * eye4 / 4.0 for o in (1, 2, 3, 4))
    return Povm(4, elements)


def ideal_bsm() -> Povm:
    """The four Bell projectors as a POVM."""
    return noisy_bsm(1.0)
