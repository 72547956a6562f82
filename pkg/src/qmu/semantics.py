"""Quantitative transition systems and formula evaluation.

Evaluation is a pure function of (system, formula, environment, config);
concurrent evaluations over a shared system are safe.  Fixpoints are
computed by Kleene iteration with simultaneous (Jacobi) sweeps, so a
parallel sweep would produce the same result as the sequential one here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .logic import (
    And,
    Box,
    Diamond,
    Formula,
    Mu,
    Not,
    Nu,
    Or,
    Pred,
    Scale,
    Var,
    ensure_well_named,
    free_vars,
    is_nnf,
)
from .values import (
    DEFAULT_CONFIG,
    INF,
    NonConvergenceError,
    SolverConfig,
    abs_change,
    ext,
    value_from_json,
    value_to_json,
)

__all__ = [
    "Qts",
    "Valuation",
    "EvalStats",
    "QualitativeError",
    "eval",
    "eval_details",
    "eval_qualitative",
]

Valuation = dict[str, float]


class QualitativeError(ValueError):
    """A computation expected to stay in {0, inf} produced something else."""


class Qts:
    """Finite quantitative transition system.

    states      list of state ids (order is the canonical iteration order)
    edges       (source, target, discount) triples; discounts positive, finite
    predicates  name -> {state: value}; states not listed default to 0
    """

    def __init__(self, states, edges, predicates=None):
        self.states: list[str] = [str(s) for s in states]
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state ids")
        known = set(self.states)
        self.succ: dict[str, list[tuple[str, float]]] = {s: [] for s in self.states}
        for src, dst, disc in edges:
            if src not in known or dst not in known:
                raise ValueError(f"edge ({src!r}, {dst!r}) mentions an unknown state")
            d = float(disc)
            if not (d > 0.0) or math.isinf(d) or math.isnan(d):
                raise ValueError(f"discount must be strictly positive and finite, got {disc}")
            self.succ[src].append((dst, d))
        self.predicates: dict[str, dict[str, float]] = {}
        for name, table in (predicates or {}).items():
            row = {}
            for state, value in table.items():
                if state not in known:
                    raise ValueError(f"predicate {name!r} mentions unknown state {state!r}")
                row[str(state)] = ext(value)
            self.predicates[str(name)] = row

    def successors(self, state: str) -> list[tuple[str, float]]:
        return self.succ[state]

    def edges(self):
        for src in self.states:
            for dst, d in self.succ[src]:
                yield src, dst, d

    def pred_value(self, name: str, state: str) -> float:
        return self.predicates[name].get(state, 0.0)

    def is_qualitative(self) -> bool:
        return all(
            v == 0.0 or math.isinf(v)
            for row in self.predicates.values()
            for v in row.values()
        )

    def is_non_discounted(self) -> bool:
        return all(d == 1.0 for _, _, d in self.edges())

    @classmethod
    def from_json(cls, obj) -> "Qts":
        try:
            state_items = obj["states"]
        except (TypeError, KeyError):
            raise ValueError("system JSON needs a 'states' array")
        states = []
        predicates: dict[str, dict[str, float]] = {}
        for item in state_items:
            sid = str(item["id"])
            states.append(sid)
            for name, raw in item.get("predicates", {}).items():
                predicates.setdefault(name, {})[sid] = value_from_json(raw)
        edges = [
            (e["from"], e["to"], float(e["discount"]))
            for e in obj.get("edges", [])
        ]
        return cls(states, edges, predicates)

    def to_json(self):
        return {
            "states": [
                {
                    "id": s,
                    "predicates": {
                        name: value_to_json(row[s])
                        for name, row in sorted(self.predicates.items())
                        if s in row
                    },
                }
                for s in self.states
            ],
            "edges": [
                {"from": src, "to": dst, "discount": d}
                for src, dst, d in self.edges()
            ],
        }


@dataclass
class EvalStats:
    """Bookkeeping from one evaluation run."""

    fixpoint_iterations: dict[str, int] = field(default_factory=dict)
    sweeps: int = 0
    cap_promotions: int = 0


class _Evaluator:
    def __init__(self, system: Qts, cfg: SolverConfig, qualitative: bool):
        self.system = system
        self.cfg = cfg
        self.qualitative = qualitative
        self.n = len(system.states)
        self.index = {s: i for i, s in enumerate(system.states)}
        self.succ = [
            [(self.index[t], d) for t, d in system.succ[s]] for s in system.states
        ]
        self.bindings: dict[str, tuple[int, tuple[float, ...]]] = {}
        self._version = 0
        self._memo: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {}
        self._fv: dict[int, tuple[str, ...]] = {}
        self.stats = EvalStats()

    def bind(self, name: str, values: tuple[float, ...]):
        self._version += 1
        self.bindings[name] = (self._version, values)

    def fv(self, node: Formula) -> tuple[str, ...]:
        got = self._fv.get(id(node))
        if got is None:
            got = tuple(sorted(free_vars(node)))
            self._fv[id(node)] = got
        return got

    def value(self, node: Formula) -> tuple[float, ...]:
        sig = tuple(self.bindings[x][0] for x in self.fv(node))
        hit = self._memo.get(id(node))
        if hit is not None and hit[0] == sig:
            return hit[1]
        out = self._compute(node)
        if self.qualitative:
            for v in out:
                if v != 0.0 and not math.isinf(v):
                    raise QualitativeError(
                        f"value {v} of {node} is neither 0 nor inf on a qualitative system"
                    )
        self._memo[id(node)] = (sig, out)
        return out

    def _compute(self, node: Formula) -> tuple[float, ...]:
        if isinstance(node, Pred):
            row = self.system.predicates[node.name]
            c = node.constant
            return tuple(abs(row.get(s, 0.0) - c) for s in self.system.states)
        if isinstance(node, Not):
            child = self.value(node.child)
            return tuple(INF if v == 0.0 else (0.0 if math.isinf(v) else 1.0 / v) for v in child)
        if isinstance(node, Var):
            return self.bindings[node.name][1]
        if isinstance(node, And):
            left, right = self.value(node.left), self.value(node.right)
            return tuple(map(min, left, right))
        if isinstance(node, Or):
            left, right = self.value(node.left), self.value(node.right)
            return tuple(map(max, left, right))
        if isinstance(node, Diamond):
            child = self.value(node.child)
            out = []
            for i in range(self.n):
                best = 0.0
                for j, d in self.succ[i]:
                    cand = d * child[j]
                    if cand > best:
                        best = cand
                out.append(best)
            return tuple(out)
        if isinstance(node, Box):
            child = self.value(node.child)
            out = []
            for i in range(self.n):
                best = INF
                for j, d in self.succ[i]:
                    cand = child[j] / d
                    if cand < best:
                        best = cand
                out.append(best)
            return tuple(out)
        if isinstance(node, Scale):
            child = self.value(node.child)
            return tuple(node.factor * v for v in child)
        if isinstance(node, (Mu, Nu)):
            return self._fixpoint(node)
        raise TypeError(f"not a formula node: {node!r}")

    def _fixpoint(self, node: Mu | Nu) -> tuple[float, ...]:
        ascending = isinstance(node, Mu)
        cur = (0.0,) * self.n if ascending else (INF,) * self.n
        cfg = self.cfg
        iters = 0
        residual = INF
        for _ in range(cfg.max_iters):
            self.bind(node.var, cur)
            nxt = list(self.value(node.body))
            if ascending:
                for i, v in enumerate(nxt):
                    if not math.isinf(v) and v > cfg.cap:
                        nxt[i] = INF
                        self.stats.cap_promotions += 1
            else:
                for i, v in enumerate(nxt):
                    if 0.0 < v < cfg.tol_fix and v < cur[i]:
                        nxt[i] = 0.0
            residual = 0.0
            for a, b in zip(cur, nxt):
                ch = abs_change(a, b)
                if ch > residual:
                    residual = ch
            iters += 1
            self.stats.sweeps += 1
            cur = tuple(nxt)
            if residual <= cfg.tol_fix:
                break
        else:
            raise NonConvergenceError(
                f"fixpoint for {node.var!r}", residual, cfg.max_iters
            )
        del self.bindings[node.var]
        self.stats.fixpoint_iterations[node.var] = (
            self.stats.fixpoint_iterations.get(node.var, 0) + iters
        )
        return cur


def eval_details(
    system: Qts,
    phi: Formula,
    env: dict[str, Valuation] | None = None,
    cfg: SolverConfig | None = None,
    *,
    qualitative: bool = False,
) -> tuple[Valuation, EvalStats]:
    """Evaluate and also return iteration statistics."""
    cfg = cfg or DEFAULT_CONFIG
    ensure_well_named(phi)
    if not is_nnf(phi):
        raise ValueError("evaluation expects negation normal form (negation only on atoms)")
    env = env or {}
    missing = free_vars(phi) - set(env)
    if missing:
        raise ValueError(f"unbound variables: {sorted(missing)}")
    for sub in _pred_names(phi):
        if sub not in system.predicates:
            raise ValueError(f"unknown predicate {sub!r}")
    ev = _Evaluator(system, cfg, qualitative)
    for name in sorted(env):
        table = env[name]
        vec = tuple(ext(table[s]) for s in system.states)
        if qualitative:
            for v in vec:
                if v != 0.0 and not math.isinf(v):
                    raise QualitativeError(f"environment value {v} is neither 0 nor inf")
        ev.bind(name, vec)
    out = ev.value(phi)
    return dict(zip(system.states, out)), ev.stats


def eval(
    system: Qts,
    phi: Formula,
    env: dict[str, Valuation] | None = None,
    cfg: SolverConfig | None = None,
) -> Valuation:
    """Evaluate a formula over a system, one value per state.

    The formula must be in negation normal form and ``env`` must cover its
    free variables.  Fixpoints iterate until the sup-norm change drops to
    ``cfg.tol_fix``; ascending iterates beyond ``cfg.cap`` are promoted to
    inf, and descending iterates vanishing below ``cfg.tol_fix`` are floored
    at 0.  Running out of ``cfg.max_iters`` raises NonConvergenceError.
    """
    return eval_details(system, phi, env, cfg)[0]


def eval_qualitative(
    system: Qts,
    phi: Formula,
    cfg: SolverConfig | None = None,
) -> Valuation:
    """Evaluate over a qualitative, non-discounted system, asserting that
    every intermediate and final value is exactly 0 or inf."""
    if not system.is_qualitative():
        raise QualitativeError("system carries predicate values other than 0 and inf")
    if not system.is_non_discounted():
        raise QualitativeError("system carries discounts other than 1")
    values, _ = eval_details(system, phi, None, cfg, qualitative=True)
    return values


def _pred_names(phi: Formula) -> set[str]:
    out = set()

    def walk(node):
        if isinstance(node, Pred):
            out.add(node.name)
        for child in node.children():
            walk(child)

    walk(phi)
    return out
