"""Scenario documents: the CLI's single input format.

A scenario bundles platoon parameters, a graph specification, optional
observations and command-specific options.  Parsing normalizes the
document (defaults filled, keys ordered), so parse -> serialize is
idempotent after the first round trip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .graphs import CommGraph, build_standard
from .params import PlatoonParams
from .risk import Observation, ObservationSet

_GRAPH_KINDS = ("path", "complete", "pcycle", "custom")


@dataclass(frozen=True)
class Scenario:
    params: PlatoonParams
    graph_spec: dict
    observations: ObservationSet
    target_pair: int | None = None
    options: dict = field(default_factory=dict)

    def build_graph(self) -> CommGraph:
        spec = self.graph_spec
        return build_standard(
            spec["kind"], self.params.n, p=spec.get("p"), edges=spec.get("edges")
        )

    def to_dict(self) -> dict:
        g = self.params.g
        g_out = float(g[0]) if bool(np.all(g == g[0])) else [float(v) for v in g]
        doc = {
            "params": {
                "n": self.params.n,
                "tau": self.params.tau,
                "beta": self.params.beta,
                "r": self.params.r,
                "c": self.params.c,
                "epsilon": self.params.epsilon,
                "g": g_out,
            },
            "graph": dict(sorted(self.graph_spec.items())),
            "observations": [
                {"pair": e.pair, "kind": e.kind, "value": e.value}
                for e in self.observations.entries
            ],
            "options": dict(sorted(self.options.items())),
        }
        if self.target_pair is not None:
            doc["target_pair"] = self.target_pair
        return doc


def _parse_graph_spec(doc, n: int) -> dict:
    if not isinstance(doc, dict):
        raise ParameterError("graph must be an object")
    if "kind" not in doc and "edges" in doc:
        doc = {"kind": "custom", "edges": doc["edges"], **({"n": doc["n"]} if "n" in doc else {})}
    kind = doc.get("kind")
    if kind not in _GRAPH_KINDS:
        raise ParameterError(f"graph kind must be one of {_GRAPH_KINDS}, got {kind!r}")
    out = {"kind": kind}
    if kind == "pcycle":
        if "p" not in doc:
            raise ParameterError("pcycle graphs need the neighbor count p")
        out["p"] = int(doc["p"])
    if kind == "custom":
        edges = doc.get("edges")
        if not isinstance(edges, list) or not edges:
            raise ParameterError("custom graphs need a non-empty edge list")
        out["edges"] = [
            [int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0] for e in edges
        ]
        if "n" in doc and int(doc["n"]) != n:
            raise ParameterError(
                f"graph n={doc['n']} disagrees with params n={n}"
            )
    return out


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ParameterError("scenario must be a JSON object")
    try:
        p = doc["params"]
        params = PlatoonParams(
            n=int(p["n"]),
            tau=float(p["tau"]),
            beta=float(p["beta"]),
            r=float(p["r"]),
            c=float(p["c"]),
            epsilon=float(p["epsilon"]),
            g=p.get("g", 1.0),
        )
    except KeyError as exc:
        raise ParameterError(f"scenario params missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"malformed scenario params: {exc}") from exc

    graph_spec = _parse_graph_spec(doc.get("graph", {"kind": "path"}), params.n)

    raw_obs = doc.get("observations", [])
    if not isinstance(raw_obs, list):
        raise ParameterError("observations must be a list")
    entries = []
    for item in raw_obs:
        try:
            entries.append(
                Observation(
                    pair=int(item["pair"]),
                    kind=str(item.get("kind", "exact")),
                    value=float(item["value"]),
                )
            )
        except KeyError as exc:
            raise ParameterError(f"observation missing field {exc}") from exc
    observations = ObservationSet(tuple(entries))

    target = doc.get("target_pair")
    if target is not None:
        target = int(target)
        if not 1 <= target <= params.n - 1:
            raise ParameterError(f"target pair {target} outside 1..{params.n - 1}")

    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ParameterError("options must be an object")

    return Scenario(
        params=params,
        graph_spec=graph_spec,
        observations=observations,
        target_pair=target,
        options=dict(options),
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ParameterError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterError(f"scenario {path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)
