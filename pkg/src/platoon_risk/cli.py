"""Batch command-line front end.

Every invocation takes one scenario file and one command, and writes a
single machine-readable result (JSON by default, CSV for tabular
output).  Exit codes: 0 success, 2 scenario/parameter validation
failure, 3 numerical failure.  Structured diagnostics go to stderr as a
single JSON line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .covariance import distance_covariance, zero_delay_covariance
from .errors import (
    DegenerateLawError,
    GraphConstructionError,
    InsufficientDataError,
    NumericError,
    ParameterError,
    PlatoonRiskError,
    UnstablePlatoonError,
)
from .graphs import add_edge, remove_edge
from .kernel import DEFAULT_TOL
from .limits import covariance_limits, f_bounds, feasibility_screen
from .risk import ObservationSet, risk_multi, risk_profile, risk_range, risk_single
from .scenario import Scenario, load_scenario
from .simulator import SimConfig, simulate
from .spectral import graph_spectrum
from .stability import platoon_stable

_VALIDATION_ERRORS = (ParameterError, GraphConstructionError, UnstablePlatoonError)
_NUMERIC_ERRORS = (NumericError, DegenerateLawError, InsufficientDataError)

PROFILE_COLUMNS = ["pair", "state", "delta", "mu_tilde", "sigma_tilde"]


def _max_workers() -> int:
    cap = os.environ.get("PLATOON_RISK_THREADS")
    if cap is not None:
        try:
            return max(1, int(cap))
        except ValueError:
            raise ParameterError(f"PLATOON_RISK_THREADS must be an integer, got {cap!r}")
    return min(4, os.cpu_count() or 1)


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in columns])
    return buf.getvalue()


def _flatten(doc, prefix="") -> list[tuple[str, object]]:
    out = []
    if isinstance(doc, dict):
        for k in doc:
            out.extend(_flatten(doc[k], f"{prefix}{k}." if prefix else f"{k}."))
    elif isinstance(doc, list):
        for idx, item in enumerate(doc):
            out.extend(_flatten(item, f"{prefix}{idx}."))
    else:
        out.append((prefix[:-1], doc))
    return out


def _emit(result, fmt: str, out_path: str | None) -> None:
    if isinstance(result, tuple):
        columns, rows = result
        if fmt == "csv":
            text = _render_csv(columns, rows)
        else:
            text = json.dumps(rows, indent=2, sort_keys=True, allow_nan=True) + "\n"
    else:
        if fmt == "csv":
            flat = _flatten(result)
            text = _render_csv(["key", "value"], [{"key": k, "value": v} for k, v in flat])
        else:
            text = json.dumps(result, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if out_path is None:
        sys.stdout.write(text)
        return
    # atomic write: temp file in the destination directory, then rename
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".platoon-risk-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _law(scenario: Scenario, tol: float):
    graph = scenario.build_graph()
    spectrum = graph_spectrum(graph)
    if scenario.params.tau == 0:
        return zero_delay_covariance(spectrum, scenario.params, tol)
    return distance_covariance(spectrum, scenario.params, tol)


def _profile_rows(profile) -> list[dict]:
    return profile.to_rows()


def cmd_stability(scenario: Scenario, args) -> object:
    spectrum = graph_spectrum(scenario.build_graph())
    verdict = platoon_stable(spectrum, scenario.params.tau, scenario.params.beta)
    return verdict.to_dict()


def cmd_covariance(scenario: Scenario, args) -> object:
    law = _law(scenario, args.tol)
    return law.to_dict()


def _require_target(scenario: Scenario) -> int:
    if scenario.target_pair is None:
        raise ParameterError("this command needs target_pair in the scenario")
    return scenario.target_pair


def cmd_risk(scenario: Scenario, args) -> object:
    p = scenario.params
    law = _law(scenario, args.tol)
    obs = scenario.observations
    if args.mode == "profile":
        profile = risk_profile(law, obs, p.epsilon, p.r, p.c)
        return (PROFILE_COLUMNS, _profile_rows(profile))
    j = _require_target(scenario)
    if args.mode == "single":
        if len(obs.entries) != 1 or obs.entries[0].kind != "exact":
            raise ParameterError("risk single needs exactly one exact observation")
        e = obs.entries[0]
        risk = risk_single(law, e.pair, j, e.value, p.epsilon, p.r, p.c)
        from .risk import conditional_single

        cg = conditional_single(law, e.pair, j, e.value)
        return {
            "pair": j,
            "state": risk.state,
            "delta": risk.delta,
            "mu_tilde": cg.mu,
            "sigma_tilde": cg.sigma,
        }
    if args.mode == "multi":
        risk = risk_multi(law, obs, j, p.epsilon, p.r, p.c)
        from .risk import conditional_multi

        cg = conditional_multi(law, obs, j)
        return {
            "pair": j,
            "state": risk.state,
            "delta": risk.delta,
            "mu_tilde": cg.mu,
            "sigma_tilde": cg.sigma,
        }
    if args.mode == "range":
        if len(obs.entries) != 1 or obs.entries[0].kind != "range":
            raise ParameterError("risk range needs exactly one range observation")
        e = obs.entries[0]
        risk = risk_range(law, e.pair, j, e.value, p.epsilon, p.r, p.c)
        return {"pair": j, "state": risk.state, "delta": risk.delta}
    raise ParameterError(f"unknown risk mode {args.mode!r}")


def cmd_limits(scenario: Scenario, args) -> object:
    opts = scenario.options
    grid = tuple(opts.get("grid", (200, 200)))
    bounds = f_bounds(grid=grid)
    limits = covariance_limits(scenario.params, bounds)
    out = {"kernel_bounds": bounds.to_dict(), "sigma_limits": limits.to_dict()}
    if "delta_target" in opts:
        verdict = feasibility_screen(float(opts["delta_target"]), scenario.params, limits)
        out["screen"] = verdict.to_dict()
    return out


def cmd_simulate(scenario: Scenario, args) -> object:
    opts = scenario.options
    seed = args.seed if args.seed is not None else int(opts.get("seed", 0))
    dump = bool(opts.get("dump_samples", False))
    cfg = SimConfig(
        dt=float(opts.get("dt", scenario.params.tau / 20.0)),
        horizon=float(opts.get("horizon", 100.0)),
        burn_in=float(opts.get("burn_in", 10.0)),
        trials=int(opts.get("trials", 100)),
        seed=seed,
        stride=float(opts["stride"]) if "stride" in opts else None,
        keep_samples=dump,
    )
    law = simulate(scenario.build_graph(), scenario.params, cfg)
    if dump:
        rows = [
            {
                "trial": int(law.sample_trials[k]),
                "time": float(law.sample_times[k]),
                "pair": pair + 1,
                "distance": float(law.samples[k, pair]),
            }
            for k in range(law.samples.shape[0])
            for pair in range(law.samples.shape[1])
        ]
        return (["trial", "time", "pair", "distance"], rows)
    return law.to_dict()


def _edge_candidates(scenario: Scenario, action: str) -> list[tuple[int, int]]:
    opts = scenario.options
    if "candidates" in opts:
        return [(int(i), int(j)) for i, j in opts["candidates"]]
    graph = scenario.build_graph()
    n = graph.n
    if action == "remove":
        return [(i, j) for i, j, _ in graph.edges()]
    return [
        (i, j)
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
        if not graph.has_edge(i, j)
    ]


def cmd_sweep(scenario: Scenario, args) -> object:
    p = scenario.params
    obs = scenario.observations
    if args.mode in ("add-edge", "remove-edge"):
        action = "add" if args.mode == "add-edge" else "remove"
        weight = float(scenario.options.get("weight", 1.0))
        base = scenario.build_graph()
        candidates = _edge_candidates(scenario, action)

        def one(link: tuple[int, int]) -> list[dict]:
            i, j = link
            try:
                graph = add_edge(base, i, j, weight) if action == "add" else remove_edge(base, i, j)
                spectrum = graph_spectrum(graph)
                law = distance_covariance(spectrum, p, args.tol)
                profile = risk_profile(law, obs, p.epsilon, p.r, p.c)
            except PlatoonRiskError as exc:
                return [
                    {
                        "link_i": i, "link_j": j, "pair": "", "state": "error",
                        "delta": "", "mu_tilde": "", "sigma_tilde": "",
                        "note": str(exc),
                    }
                ]
            return [
                {"link_i": i, "link_j": j, **row, "note": ""}
                for row in _profile_rows(profile)
            ]

        with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
            results = list(pool.map(one, candidates))
        rows = [row for chunk in results for row in chunk]
        return (["link_i", "link_j", *PROFILE_COLUMNS, "note"], rows)

    if args.mode == "noise":
        kgs = args.kg if args.kg else scenario.options.get("kg")
        if not kgs:
            raise ParameterError("sweep noise needs --kg values")
        base_g = scenario.params.g
        graph = scenario.build_graph()
        spectrum = graph_spectrum(graph)
        vehicles = np.arange(1, p.n + 1, dtype=float)

        def one(kg: float) -> list[dict]:
            g = (kg * np.sin(vehicles) + 1.0) * base_g
            params_kg = p.with_g(g)
            law = distance_covariance(spectrum, params_kg, args.tol)
            profile = risk_profile(law, obs, p.epsilon, p.r, p.c)
            return [{"kg": kg, **row} for row in _profile_rows(profile)]

        with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
            results = list(pool.map(one, [float(k) for k in kgs]))
        rows = [row for chunk in results for row in chunk]
        return (["kg", *PROFILE_COLUMNS], rows)

    raise ParameterError(f"unknown sweep mode {args.mode!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platoon-risk",
        description="steady-state distance statistics and cascading-collision "
        "risk for delayed vehicle platoons",
    )
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", default=None, help="output file (atomic write)")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="relative kernel tolerance")
    parser.add_argument("--seed", type=int, default=None,
                        help="simulation seed (overrides scenario options)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("stability")
    sub.add_parser("covariance")
    risk_p = sub.add_parser("risk")
    risk_p.add_argument("mode", choices=("single", "multi", "range", "profile"))
    sub.add_parser("limits")
    sub.add_parser("simulate")
    sweep_p = sub.add_parser("sweep")
    sweep_p.add_argument("mode", choices=("add-edge", "remove-edge", "noise"))
    sweep_p.add_argument("--kg", type=float, nargs="+", default=None,
                         help="noise non-uniformity levels for sweep noise")
    return parser


_COMMANDS = {
    "stability": cmd_stability,
    "covariance": cmd_covariance,
    "risk": cmd_risk,
    "limits": cmd_limits,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def _diagnose(exc: Exception) -> None:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    detail = getattr(exc, "detail", None)
    if detail is not None:
        doc["detail"] = str(detail)
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        result = _COMMANDS[args.command](scenario, args)
        _emit(result, args.format, args.out)
    except _VALIDATION_ERRORS as exc:
        _diagnose(exc)
        return 2
    except _NUMERIC_ERRORS as exc:
        _diagnose(exc)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
