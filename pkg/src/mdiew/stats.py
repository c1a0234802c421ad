"""Finite-shot simulation, witness-value estimation and p-values.

Each experiment run draws an input tuple uniformly at random, then an outcome
tuple from the exact conditional distribution.  Estimates use the empirical
conditional probabilities (per-input occurrence counts in the denominator),
the plug-in standard deviation

    sigma^2 = sum coeff^2 * phat * (1 - phat),

and two one-sided significance numbers for a negative observed value: the
Gaussian-exponent form exp(-G * value^2 / (2 sigma^2)) and the exact normal
tail Phi(-|value| sqrt(G) / sigma).  Nonnegative observed values get p = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .protocol import ProbabilityTable, mdiew_value, probability_table, single_outcome_value
from .states import GENERATOR_NAME
from .witness import AncillaBasis, OutcomeCoefficientTable, Witness, decompose, outcome_coefficients

SCHEMES = ("all", "single")


@dataclass(frozen=True)
class ExperimentConfig:
    """Shot count, seed and which estimation scheme the run feeds."""

    shots: int
    seed: int
    scheme: str = "all"

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")


@dataclass(frozen=True, eq=False)
class CountRecord:
    """Joint (outcome tuple, input tuple) counts from a finite run."""

    party_count: int
    counts: np.ndarray
    shots: int

    def __post_init__(self):
        k = 4**self.party_count
        c = np.asarray(self.counts)
        if c.shape != (k, k):
            raise ValueError(f"count shape {c.shape} does not match {self.party_count} parties")
        if int(c.sum()) != self.shots:
            raise ValueError("counts must sum to the number of shots")

    def input_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class Estimate:
    """Finite-shot witness-value estimate with its significance numbers.

    ``missing_inputs`` counts input tuples that never occurred; when nonzero
    the value was computed over the observed inputs only.
    """

    value: float
    sigma_hat: float
    p_value: float
    p_gaussian: float
    log_p_value: float
    shots: int
    missing_inputs: int = 0


def _sample_counts(table: ProbabilityTable, shots: int, rng: np.random.Generator) -> np.ndarray:
    k = table.values.shape[0]
    input_counts = rng.multinomial(shots, np.full(k, 1.0 / k))
    counts = np.zeros((k, k), dtype=np.int64)
    for x in range(k):
        if input_counts[x] == 0:
            continue
        col = np.clip(table.values[:, x], 0.0, None)
        counts[:, x] = rng.multinomial(int(input_counts[x]), col / col.sum())
    return counts


def simulate_counts(state: np.ndarray, basis: AncillaBasis, config: ExperimentConfig,
                    povms=None, table: ProbabilityTable | None = None) -> CountRecord:
    """Sample a finite experiment; fully determined by the config seed."""
    if table is None:
        table = probability_table(state, basis, povms)
    rng = np.random.default_rng(config.seed)
    counts = _sample_counts(table, config.shots, rng)
    return CountRecord(table.party_count, counts, config.shots)


def p_value_exp(value: float, sigma: float, shots: int) -> float:
    """Gaussian-exponent significance of a negative observed value."""
    if value >= 0.0:
        return 1.0
    if sigma == 0.0:
        return 0.0
    return math.exp(-shots * value * value / (2.0 * sigma * sigma))


def p_value_gaussian(value: float, sigma: float, shots: int) -> float:
    """Exact normal-tail significance of a negative observed value."""
    if value >= 0.0:
        return 1.0
    if sigma == 0.0:
        return 0.0
    return 0.5 * math.erfc(abs(value) * math.sqrt(shots) / (sigma * math.sqrt(2.0)))


def log_p_value(value: float, sigma: float, shots: int) -> float:
    """Natural log of ``p_value_exp`` without underflow."""
    if value >= 0.0:
        return 0.0
    if sigma == 0.0:
        return float("-inf")
    return -shots * value * value / (2.0 * sigma * sigma)


def estimate_value(counts: CountRecord, coeffs) -> Estimate:
    """Estimate the witness value from counts.

    ``coeffs`` selects the scheme: an OutcomeCoefficientTable estimates the
    all-outcome value, a plain coefficient tensor the single-outcome value
    built from the all-ones outcome row.
    """
    k = 4**counts.party_count
    col = counts.input_counts()
    observed = col > 0
    missing = int(k - observed.sum())
    if missing == k:
        raise ValueError("no observed inputs")
    phat = counts.counts[:, observed].astype(float) / col[observed]
    if isinstance(coeffs, OutcomeCoefficientTable):
        if coeffs.party_count != counts.party_count:
            raise ValueError("coefficient table and counts disagree on party count")
        b = coeffs.coefficient_matrix()[:, observed]
        value = float(np.sum(b * phat))
        variance = float(np.sum(b * b * phat * (1.0 - phat)))
    else:
        b = np.asarray(coeffs, dtype=float)
        if b.shape != (4,) * counts.party_count:
            raise ValueError(f"coefficient tensor shape {b.shape} does not match counts")
        b = b.reshape(-1)[observed]
        p_first = phat[0, :]
        value = float(b @ p_first)
        variance = float(np.sum(b * b * p_first * (1.0 - p_first)))
    sigma = math.sqrt(max(variance, 0.0))
    return Estimate(
        value=value,
        sigma_hat=sigma,
        p_value=p_value_exp(value, sigma, counts.shots),
        p_gaussian=p_value_gaussian(value, sigma, counts.shots),
        log_p_value=log_p_value(value, sigma, counts.shots),
        shots=counts.shots,
        missing_inputs=missing,
    )


def line_fit(x, y):
    """Least-squares line fit returning (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


@dataclass(eq=False)
class SchemeComparison:
    """Head-to-head Monte Carlo of the all-outcome and single-outcome schemes.

    For every shot count in the grid, both estimators run on the same sampled
    counts, so the comparison is paired.  ``aggregates[scheme]`` maps each
    statistic name to a list aligned with ``g_grid``.
    """

    state_label: str
    witness_label: str
    g_grid: tuple
    trials: int
    seed: int
    exact: dict
    aggregates: dict
    per_trial: list = field(repr=False)

    def fit(self, scheme: str):
        return line_fit(self.g_grid, self.aggregates[scheme]["mean_log_p"])

    def to_jsonable(self) -> dict:
        schemes = {}
        for scheme in SCHEMES:
            agg = self.aggregates[scheme]
            slope, intercept, r2 = self.fit(scheme)
            schemes[scheme] = {
                "mean_value": agg["mean_value"],
                "empirical_sigma": agg["empirical_sigma"],
                "mean_p_value": agg["mean_p_value"],
                "mean_p_gaussian": agg["mean_p_gaussian"],
                "mean_log_p": agg["mean_log_p"],
                "log_p_slope": slope,
                "log_p_intercept": intercept,
                "log_p_r_squared": r2,
            }
        return {
            "schema_version": 1,
            "kind": "scheme-comparison",
            "state": self.state_label,
            "witness": self.witness_label,
            "g_grid": list(self.g_grid),
            "trials": self.trials,
            "seed": self.seed,
            "generator": GENERATOR_NAME,
            "exact_value": self.exact,
            "schemes": schemes,
        }

    def write_csv(self, path) -> None:
        header = "shots,trial,scheme,value,sigma_hat,p_value,p_gaussian,log_p,missing_inputs"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for row in self.per_trial:
                fh.write(
                    f"{row['shots']},{row['trial']},{row['scheme']},{row['value']!r},"
                    f"{row['sigma_hat']!r},{row['p_value']!r},{row['p_gaussian']!r},"
                    f"{row['log_p']!r},{row['missing_inputs']}\n"
                )


def scheme_comparison(state: np.ndarray, basis: AncillaBasis, witness: Witness, g_grid,
                      trials: int, seed: int, povms=None,
                      state_label: str = "state") -> SchemeComparison:
    """Run both schemes over a grid of shot counts and aggregate per scheme."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    g_grid = tuple(int(g) for g in g_grid)
    n = basis.party_count
    coeffs_all = outcome_coefficients(witness, basis)
    coeffs_single = decompose(witness, basis, (1,) * n)
    table = probability_table(state, basis, povms)
    exact = {
        "all": mdiew_value(table, coeffs_all),
        "single": single_outcome_value(table, coeffs_single),
    }
    children = np.random.SeedSequence(seed).spawn(len(g_grid) * trials)
    per_trial = []
    aggregates = {s: {"mean_value": [], "empirical_sigma": [], "mean_p_value": [],
                      "mean_p_gaussian": [], "mean_log_p": []} for s in SCHEMES}
    for gi, shots in enumerate(g_grid):
        results = {s: [] for s in SCHEMES}
        for t in range(trials):
            rng = np.random.default_rng(children[gi * trials + t])
            counts = CountRecord(n, _sample_counts(table, shots, rng), shots)
            for scheme, coeffs in (("all", coeffs_all), ("single", coeffs_single)):
                est = estimate_value(counts, coeffs)
                results[scheme].append(est)
                per_trial.append({
                    "shots": shots, "trial": t, "scheme": scheme, "value": est.value,
                    "sigma_hat": est.sigma_hat, "p_value": est.p_value,
                    "p_gaussian": est.p_gaussian, "log_p": est.log_p_value,
                    "missing_inputs": est.missing_inputs,
                })
        for scheme in SCHEMES:
            values = np.array([e.value for e in results[scheme]])
            agg = aggregates[scheme]
            agg["mean_value"].append(float(values.mean()))
            agg["empirical_sigma"].append(float(values.std(ddof=1)) if trials > 1 else 0.0)
            agg["mean_p_value"].append(float(np.mean([e.p_value for e in results[scheme]])))
            agg["mean_p_gaussian"].append(float(np.mean([e.p_gaussian for e in results[scheme]])))
            agg["mean_log_p"].append(float(np.mean([e.log_p_value for e in results[scheme]])))
    return SchemeComparison(
        state_label=state_label,
        witness_label=witness.name,
        g_grid=g_grid,
        trials=trials,
        seed=seed,
        exact=exact,
        aggregates=aggregates,
        per_trial=per_trial,
    )
