"""Command-line interface.

Subcommands: reproduce, simulate, verify-mdi, depth, decompose.  Exit codes:
0 success, 1 a check or harness failed, 2 usage or input errors.  Commands
that write reports put JSON, CSV and PNG files side by side in the --out
directory, and always record the seed and generator name.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import reference, report
from .linalg import party_count_of
from .protocol import mdiew_value, probability_table, single_outcome_value
from .selfcheck import mdi_batteries, reproduce_report, run_reproduce
from .states import GENERATOR_NAME, noisy_bsm, random_povm, w_state_noise, werner
from .stats import CountRecord, _sample_counts, estimate_value, scheme_comparison
from .structure import depth_detection
from .witness import (
    Witness,
    decompose,
    default_basis,
    load_witness_matrix,
    nested_decimal_strings,
    outcome_coefficients,
    w_depth_witness,
    werner_witness,
)

DEFAULT_G_GRID = (1000, 10000, 100000)


class CliError(Exception):
    """Bad usage or bad input files; maps to exit code 2."""


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdiew",
        description="Measurement-device-independent entanglement witnessing toolkit",
    )
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("reproduce", help="recompute and check all closed-form reference values")
    p.add_argument("--out", help="directory for the JSON report and figure")
    p.add_argument("--perturb", type=float, default=0.0,
                   help="inject an offset into one computed coefficient (negative control)")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("simulate", help="run a finite-shot scenario from a JSON file")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--shots", type=int, help="override the scenario shot count")
    p.add_argument("--trials", type=int, help="override the scenario trial count")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-mdi", help="sampled nonnegativity batteries for the bundled witnesses")
    p.add_argument("--trials", type=int, default=1000, help="trials per battery (default: 1000)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.set_defaults(func=cmd_verify_mdi)

    p = sub.add_parser("depth", help="depth-detection scan of the W/noise mixture")
    p.add_argument("--alphas", default="2/3,4/9", help="comma list of alpha values (fractions allowed)")
    p.add_argument("--p-grid", default=None,
                   help="comma list of mixture weights; default is a 21-point grid plus threshold brackets")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("decompose", help="print witness coefficients as JSON")
    p.add_argument("--witness", required=True,
                   help="'werner', 'w-depth', or a path to a JSON matrix of [re, im] pairs")
    p.add_argument("--alpha", default="2/3", help="alpha for the w-depth witness (default 2/3)")
    p.add_argument("--outcome", help="outcome tuple 'i1,i2,...'; omit for the full table")
    p.add_argument("--out", help="directory to also write decompose.json into")
    p.set_defaults(func=cmd_decompose)

    return parser


def _parse_fraction(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def cmd_reproduce(args) -> int:
    rows = run_reproduce(perturb=args.perturb)
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        status = "ok  " if r["passed"] else "FAIL"
        line = f"{status}  {r['name']:<{width}}  max|delta| = {r['max_delta']:.3e}"
        if r["detail"]:
            line += f"  ({r['detail']})"
        print(line)
    payload = reproduce_report(rows)
    if args.out:
        report.write_json(os.path.join(args.out, "reproduce-report.json"), payload)
        from .plots import check_deltas_figure

        check_deltas_figure(rows, os.path.join(args.out, "reproduce-deltas.png"))
        print(f"report written to {args.out}")
    if payload["passed"]:
        print("all reference values reproduced")
        return 0
    print("reference-value reproduction FAILED", file=sys.stderr)
    return 1


def _load_scenario(path) -> dict:
    if not os.path.exists(path):
        raise CliError(f"scenario file {path!r} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        scenario = json.load(fh)
    if not isinstance(scenario, dict):
        raise CliError("scenario file must hold a JSON object")
    version = scenario.get("schema_version", 1)
    if version != 1:
        raise CliError(f"unsupported scenario schema_version {version}")
    return scenario


def _scenario_state(spec) -> tuple:
    if not isinstance(spec, dict) or "name" not in spec:
        raise CliError("scenario 'state' must be an object with a 'name'")
    name = spec["name"]
    if name == "werner":
        p = float(spec.get("p", 1.0))
        return werner(p), f"werner(p={p:g})", 2
    if name in ("w_noise", "w-noise"):
        p = float(spec.get("p", 1.0))
        return w_state_noise(p), f"w-noise(p={p:g})", 3
    raise CliError(f"unknown state name {name!r} (expected 'werner' or 'w_noise')")


def _scenario_witness(spec) -> Witness:
    if not isinstance(spec, dict):
        raise CliError("scenario 'witness' must be an object")
    if "file" in spec:
        return _witness_from_file(spec["file"])
    name = spec.get("name")
    if name == "werner":
        return werner_witness()
    if name in ("w_depth", "w-depth"):
        return w_depth_witness(float(spec.get("alpha", 2.0 / 3.0)))
    raise CliError(f"unknown witness spec {spec!r}")


def _witness_from_file(path) -> Witness:
    try:
        matrix = load_witness_matrix(path)
        n = party_count_of(matrix.shape[0])
        return Witness(matrix, n, None, name=os.path.basename(str(path)))
    except (ValueError, FileNotFoundError) as exc:
        raise CliError(f"cannot load witness from {path!r}: {exc}") from exc


def _scenario_povms(spec, party_count: int, seed: int):
    if spec is None or spec.get("kind", "ideal") == "ideal":
        return None, "ideal"
    kind = spec["kind"]
    if kind == "noisy":
        v = float(spec.get("visibility", 1.0))
        return [noisy_bsm(v) for _ in range(party_count)], f"noisy(visibility={v:g})"
    if kind == "random":
        dev_seed = int(spec.get("seed", seed))
        rng = np.random.default_rng(dev_seed)
        return [random_povm(4, 4, rng) for _ in range(party_count)], f"random(seed={dev_seed})"
    raise CliError(f"unknown measurement kind {kind!r}")


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args.scenario)
    state, state_label, n_parties = _scenario_state(scenario.get("state"))
    witness = _scenario_witness(scenario.get("witness"))
    if witness.party_count != n_parties:
        raise CliError("witness and state disagree on the number of parties")
    if scenario.get("basis", "default") != "default":
        raise CliError("only the default ancilla basis is supported in scenarios")
    seed = int(args.seed if args.seed is not None else scenario.get("seed", 0))
    shots = int(args.shots if args.shots is not None else scenario.get("shots", 10000))
    trials = int(args.trials if args.trials is not None else scenario.get("trials", 1))
    scheme = scenario.get("scheme", "all")
    povms, measurement_label = _scenario_povms(scenario.get("measurement"), n_parties, seed)
    basis = default_basis(n_parties)
    os.makedirs(args.out, exist_ok=True)

    if scheme == "both":
        g_grid = tuple(int(g) for g in scenario.get("g_grid", DEFAULT_G_GRID))
        comparison = scheme_comparison(state, basis, witness, g_grid, trials, seed,
                                       povms=povms, state_label=state_label)
        payload = comparison.to_jsonable()
        payload["measurement"] = measurement_label
        report.write_json(os.path.join(args.out, "comparison-report.json"), payload)
        comparison.write_csv(os.path.join(args.out, "comparison-trials.csv"))
        from .plots import scheme_comparison_figure

        scheme_comparison_figure(comparison, os.path.join(args.out, "comparison.png"))
        print(f"scheme comparison written to {args.out}")
        return 0

    if scheme not in ("all", "single"):
        raise CliError(f"unknown scheme {scheme!r} (expected all, single or both)")
    table = probability_table(state, basis, povms)
    coeffs_all = outcome_coefficients(witness, basis)
    coeffs = coeffs_all if scheme == "all" else decompose(witness, basis, (1,) * n_parties)
    exact_all = mdiew_value(table, coeffs_all)
    exact = exact_all if scheme == "all" else single_outcome_value(table, coeffs)
    children = np.random.SeedSequence(seed).spawn(trials)
    estimates = []
    for t in range(trials):
        rng = np.random.default_rng(children[t])
        counts = CountRecord(n_parties, _sample_counts(table, shots, rng), shots)
        estimates.append(estimate_value(counts, coeffs))
    values = [e.value for e in estimates]
    payload = {
        "schema_version": 1,
        "kind": "simulate",
        "state": state_label,
        "witness": witness.name,
        "measurement": measurement_label,
        "scheme": scheme,
        "shots": shots,
        "trials": trials,
        "seed": seed,
        "generator": GENERATOR_NAME,
        "exact_all_outcome_value": exact_all,
        "exact_scheme_value": exact,
        "mean_value": float(np.mean(values)),
        "std_value": float(np.std(values, ddof=1)) if trials > 1 else 0.0,
        "mean_p_value": float(np.mean([e.p_value for e in estimates])),
        "mean_p_gaussian": float(np.mean([e.p_gaussian for e in estimates])),
        "trials_with_missing_inputs": int(sum(e.missing_inputs > 0 for e in estimates)),
    }
    report.write_json(os.path.join(args.out, "simulate-report.json"), payload)
    rows = [
        (t, e.value, e.sigma_hat, e.p_value, e.p_gaussian, e.log_p_value, e.missing_inputs)
        for t, e in enumerate(estimates)
    ]
    report.write_csv(
        os.path.join(args.out, "simulate-trials.csv"),
        ("trial", "value", "sigma_hat", "p_value", "p_gaussian", "log_p", "missing_inputs"),
        rows,
    )
    from .plots import estimate_histogram

    estimate_histogram(values, exact, f"{witness.name} on {state_label} ({scheme}-outcome)",
                       os.path.join(args.out, "simulate-estimates.png"))
    print(f"simulation written to {args.out}")
    return 0


def cmd_verify_mdi(args) -> int:
    reports = mdi_batteries(args.trials, args.seed)
    payload = {
        "schema_version": 1,
        "kind": "verify-mdi",
        "seed": args.seed,
        "generator": GENERATOR_NAME,
        "trials_per_battery": args.trials,
        "batteries": [r.to_jsonable() for r in reports],
        "total_violations": int(sum(r.violations for r in reports)),
        "overall_min_value": float(min(r.min_value for r in reports)),
    }
    report.write_json(os.path.join(args.out, "verify-mdi-report.json"), payload)
    report.write_csv(
        os.path.join(args.out, "verify-mdi-batteries.csv"),
        ("witness", "class", "trials", "min_value", "violations"),
        [(r.witness_label, r.class_label, r.trials, r.min_value, r.violations) for r in reports],
    )
    from .plots import harness_figure

    harness_figure(reports, os.path.join(args.out, "verify-mdi-values.png"))
    for r in reports:
        status = "ok  " if r.violations == 0 else "FAIL"
        print(f"{status}  {r.witness_label:<22} vs {r.class_label:<22} "
              f"min value = {r.min_value:+.3e}  violations = {r.violations}/{r.trials}")
    print(f"report written to {args.out} (seed {args.seed})")
    return 0 if payload["total_violations"] == 0 else 1


def cmd_depth(args) -> int:
    try:
        alphas = [_parse_fraction(a) for a in args.alphas.split(",") if a.strip()]
    except ValueError as exc:
        raise CliError(f"cannot parse --alphas: {exc}") from exc
    if args.p_grid:
        try:
            p_values = [_parse_fraction(p) for p in args.p_grid.split(",") if p.strip()]
        except ValueError as exc:
            raise CliError(f"cannot parse --p-grid: {exc}") from exc
    else:
        p_values = sorted(set(np.linspace(0.0, 1.0, 21).tolist()) | {
            reference.W_GENUINE_THRESHOLD - 1e-6, reference.W_GENUINE_THRESHOLD,
            reference.W_GENUINE_THRESHOLD + 1e-6,
            reference.W_ENTANGLED_THRESHOLD - 1e-6, reference.W_ENTANGLED_THRESHOLD,
            reference.W_ENTANGLED_THRESHOLD + 1e-6,
        })
    if any(not 0.0 <= p <= 1.0 for p in p_values):
        raise CliError("mixture weights must lie in [0, 1]")
    rows = []
    for alpha in alphas:
        for p in p_values:
            verdict = depth_detection(w_state_noise(p), alpha)
            rows.append({
                "alpha": alpha, "p": p, "value": verdict.value,
                "detected": verdict.detected, "implied_depth": verdict.implied_depth,
                "statement": verdict.statement,
            })
    thresholds = {
        "depth 3 boundary (13/21)": reference.W_GENUINE_THRESHOLD,
        "depth 2 boundary (23/63)": reference.W_ENTANGLED_THRESHOLD,
    }
    payload = {
        "schema_version": 1,
        "kind": "depth-scan",
        "state_family": "w-noise",
        "generator": "deterministic (no sampling)",
        "seed": None,
        "thresholds": thresholds,
        "rows": rows,
    }
    report.write_json(os.path.join(args.out, "depth-report.json"), payload)
    report.write_csv(
        os.path.join(args.out, "depth-scan.csv"),
        ("alpha", "p", "value", "detected", "implied_depth"),
        [(r["alpha"], r["p"], r["value"], r["detected"], r["implied_depth"]) for r in rows],
    )
    from .plots import depth_scan_figure

    depth_scan_figure(rows, thresholds, os.path.join(args.out, "depth-scan.png"))
    detected = sum(r["detected"] for r in rows)
    print(f"{detected}/{len(rows)} scan points detected; report written to {args.out}")
    return 0


def cmd_decompose(args) -> int:
    if args.witness == "werner":
        witness = werner_witness()
    elif args.witness in ("w-depth", "w_depth"):
        try:
            witness = w_depth_witness(_parse_fraction(args.alpha))
        except ValueError as exc:
            raise CliError(f"cannot parse --alpha: {exc}") from exc
    else:
        witness = _witness_from_file(args.witness)
    basis = default_basis(witness.party_count)
    payload = {
        "schema_version": 1,
        "kind": "decompose",
        "witness": witness.name,
        "party_count": witness.party_count,
        "basis": "default",
        "index_convention": "first party outermost; printed matrices have the first party on rows",
    }
    if args.outcome:
        try:
            outcome = tuple(int(i) for i in args.outcome.split(","))
        except ValueError as exc:
            raise CliError(f"cannot parse --outcome: {exc}") from exc
        if len(outcome) != witness.party_count or any(i not in (1, 2, 3, 4) for i in outcome):
            raise CliError(f"--outcome must be {witness.party_count} comma-separated labels in 1..4")
        payload["outcome"] = ",".join(str(i) for i in outcome)
        payload["coefficients"] = nested_decimal_strings(decompose(witness, basis, outcome))
    else:
        payload["tables"] = outcome_coefficients(witness, basis).to_jsonable()
    text = json.dumps(payload, indent=1)
    print(text)
    if args.out:
        report.write_json(os.path.join(args.out, "decompose.json"), payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
