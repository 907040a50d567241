"""Deterministic experiment runner.

Wires graph generation, the consensus engines, the stopping protocols and
the applications into reproducible end-to-end runs: a config plus its seed
determines every emitted byte. Guarantee fields in the summary are
recomputed from the written trace files by a verification pass rather than
copied from the in-memory run.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict, replace

import numpy as np

from .consensus import (ConsensusTrace, consensus_limit, pairwise_spread,
                        read_state_csv, run_consensus, write_state_csv)
from .errors import InvariantViolation
from .geometry import vector_norm
from .graph import DiGraph, generate_digraph, graph_to_json, make_weights
from .termination import (bandwidth_accounting, run_box_stopping,
                          run_hull_stopping, run_radius_stopping,
                          write_termination_csv)

__all__ = ["ExperimentConfig", "RunResult", "run_experiment", "compare_criteria",
           "verify_states_file"]

_TOPOLOGIES = ("erdos_renyi", "ring", "complete")
_STOPPINGS = ("radius", "box", "hull", "none")


@dataclass
class ExperimentConfig:
    n: int = 10
    dim: int = 2
    topology: str = "erdos_renyi"
    edge_prob: float = 0.3
    seed: int = 0
    engine: str = "ratio"
    stopping: str = "radius"
    rho: float | None = 0.01
    rho_relative: bool = False
    norm: float = 2.0
    dbound: int | None = None
    k_max: int = 100_000
    out_dir: str = "out"

    def validate(self):
        if self.n < 1:
            raise ValueError(f"need at least one node, got n={self.n}")
        if self.dim < 1:
            raise ValueError(f"need dim >= 1, got {self.dim}")
        if self.topology not in _TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if not (0.0 < self.edge_prob <= 1.0):
            raise ValueError(f"edge_prob must be in (0, 1], got {self.edge_prob}")
        if self.engine not in ("ratio", "row"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.stopping not in _STOPPINGS:
            raise ValueError(f"unknown stopping {self.stopping!r}")
        if self.stopping != "none":
            if self.rho is None or self.rho <= 0:
                raise ValueError(f"stopping {self.stopping!r} needs rho > 0, got {self.rho}")
        if float(self.norm) not in (1.0, 2.0) and not np.isinf(float(self.norm)):
            raise ValueError(f"norm must be 1, 2 or inf, got {self.norm}")
        if self.dbound is not None and self.dbound < 1:
            raise ValueError(f"dbound must be >= 1, got {self.dbound}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        return self

    def to_json(self) -> str:
        obj = asdict(self)
        obj["norm"] = "inf" if np.isinf(float(self.norm)) else float(self.norm)
        return json.dumps(obj, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        if obj.get("norm") == "inf":
            obj["norm"] = float("inf")
        return cls(**obj)


@dataclass
class RunResult:
    cfg: ExperimentConfig
    graph: DiGraph
    trace: object
    rho_abs: float | None
    summary: dict
    paths: dict


def _initial_states(cfg: ExperimentConfig) -> np.ndarray:
    rng = np.random.default_rng([cfg.seed, 1])
    return rng.random((cfg.n, cfg.dim))


def _build(cfg: ExperimentConfig):
    g = generate_digraph(cfg.n, cfg.topology, cfg.seed, cfg.edge_prob)
    W = make_weights(g, "column" if cfg.engine == "ratio" else "row")
    x0 = _initial_states(cfg)
    return g, W, x0


def _resolve_rho(cfg: ExperimentConfig, x0, W) -> float | None:
    if cfg.stopping == "none" or cfg.rho is None:
        return None
    if not cfg.rho_relative:
        return float(cfg.rho)
    limit = consensus_limit(x0, W)
    return float(cfg.rho) * float(vector_norm(limit, cfg.norm))


def _stopping_trace(cfg, g, W, x0, rho_abs):
    kw = dict(Dbound=cfg.dbound, p=cfg.norm, k_max=cfg.k_max)
    if cfg.stopping == "radius":
        return run_radius_stopping(g, W, x0, rho_abs, **kw)
    if cfg.stopping == "box":
        return run_box_stopping(g, W, x0, rho_abs, **kw)
    if cfg.stopping == "hull":
        return run_hull_stopping(g, W, x0, rho_abs, **kw)
    return run_consensus(W, x0, cfg.k_max)


def _as_consensus_trace(cfg, trace) -> ConsensusTrace:
    if isinstance(trace, ConsensusTrace):
        return trace
    xs = getattr(trace, "xs", None)
    ys = getattr(trace, "ys", None)
    return ConsensusTrace(cfg.engine, trace.rs, xs, ys)


def verify_states_file(path, p: float) -> dict:
    """Recompute the guarantee quantities from a written state CSV."""
    trace = read_state_csv(path)
    final = trace.states[-1]
    return {
        "k_steps": int(trace.states.shape[0] - 1),
        "final_spread": pairwise_spread(final, p),
    }


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """End-to-end deterministic run; writes graph.json, config.json,
    states.csv, termination.csv (radius stopping only) and summary.json
    into cfg.out_dir."""
    cfg.validate()
    g, W, x0 = _build(cfg)
    rho_abs = _resolve_rho(cfg, x0, W)
    trace = _stopping_trace(cfg, g, W, x0, rho_abs)

    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {name: os.path.join(cfg.out_dir, name) for name in
             ("graph.json", "config.json", "states.csv", "termination.csv",
              "summary.json")}
    with open(paths["graph.json"], "w") as fh:
        fh.write(graph_to_json(g) + "\n")
    with open(paths["config.json"], "w") as fh:
        fh.write(cfg.to_json())
    write_state_csv(_as_consensus_trace(cfg, trace), paths["states.csv"])
    if cfg.stopping == "radius":
        write_termination_csv(trace, paths["termination.csv"])
    else:
        paths.pop("termination.csv")

    # verification pass: guarantee fields come from the files, not the run
    checked = verify_states_file(paths["states.csv"], cfg.norm)
    halted = bool(getattr(trace, "halted", False))
    halt_t = getattr(trace, "halt_t", None)
    in_memory_steps = trace.states.shape[0] - 1 if isinstance(trace, ConsensusTrace) \
        else trace.rs.shape[0] - 1
    if checked["k_steps"] != in_memory_steps:
        raise InvariantViolation(
            f"trace length mismatch: file {checked['k_steps']}, run {in_memory_steps}")
    if halted and halt_t != checked["k_steps"]:
        raise InvariantViolation(
            f"halt iteration {halt_t} does not close the written trace")

    if cfg.stopping == "hull":
        bits = bandwidth_accounting("hull", 32, cfg.dim, trace.max_points)
    elif cfg.stopping == "none":
        bits = 0
    else:
        bits = bandwidth_accounting(cfg.stopping, 32, cfg.dim)

    summary = {
        "halt_k": halt_t,
        "windows": len(getattr(trace, "windows", [])),
        "final_spread": checked["final_spread"],
        "rho": rho_abs,
        "guarantee_2rho_ok": (checked["final_spread"] <= 2.0 * rho_abs
                              if (halted and rho_abs is not None) else None),
        "halted": halted,
        "k_steps": checked["k_steps"],
        "stopping": cfg.stopping,
        "engine": cfg.engine,
        "n": cfg.n,
        "dim": cfg.dim,
        "seed": cfg.seed,
        "norm": "inf" if np.isinf(float(cfg.norm)) else float(cfg.norm),
        "dbound": trace.Dbound if hasattr(trace, "Dbound") else None,
        "bandwidth_bits": bits,
    }
    with open(paths["summary.json"], "w") as fh:
        fh.write(json.dumps(summary, indent=2) + "\n")
    return RunResult(cfg, g, trace, rho_abs, summary, paths)


def compare_criteria(cfg: ExperimentConfig, B: int = 32) -> list:
    """Run all three stopping protocols over the identical consensus
    sequence (same graph, same seed, same initial states) and tabulate
    halt iteration, extra bandwidth and the spread achieved at halt."""
    cfg.validate()
    if cfg.stopping == "none":
        raise ValueError("compare needs a rho, so stopping 'none' is not allowed")
    g, W, x0 = _build(cfg)
    rho_abs = _resolve_rho(cfg, x0, W)
    rows = []
    for method in ("radius", "box", "hull"):
        sub = replace(cfg, stopping=method)
        trace = _stopping_trace(sub, g, W, x0, rho_abs)
        spread = pairwise_spread(trace.rs[trace.halt_t], cfg.norm) if trace.halted else None
        if method == "hull":
            bits = bandwidth_accounting("hull", B, cfg.dim, trace.max_points)
        else:
            bits = bandwidth_accounting(method, B, cfg.dim)
        rows.append({
            "method": method,
            "halted": trace.halted,
            "halt_k": trace.halt_t,
            "windows": len(trace.windows),
            "extra_bits": bits,
            "spread_at_halt": spread,
            "within_2rho": (spread <= 2.0 * rho_abs) if spread is not None else None,
            "rho": rho_abs,
        })
    return rows
