"""Arithmetic and approximation on the nonnegative extended reals.

Every quantity in this package (predicate values, discounts, payoffs, game
and formula values) lives in [0, inf]: ordinary nonnegative 64-bit floats
plus ``math.inf``.  NaN is unrepresentable; constructors reject it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf

__all__ = [
    "INF",
    "ext",
    "ext_mul",
    "ext_recip",
    "eps_close",
    "eps_above",
    "eps_below",
    "deviation",
    "abs_change",
    "value_to_json",
    "value_from_json",
    "SolverConfig",
    "DEFAULT_CONFIG",
    "NonConvergenceError",
]


def ext(value) -> float:
    """Coerce ``value`` to a valid extended real (nonnegative float or inf)."""
    v = float(value)
    if math.isnan(v):
        raise ValueError("NaN is not a representable value")
    if v < 0.0:
        raise ValueError(f"value must be nonnegative, got {v}")
    return v


def ext_mul(a: float, b: float) -> float:
    """Product on [0, inf].

    Infinity is absorbing against strictly positive factors.  The
    combination 0 * inf never arises in well-formed inputs (discounts are
    strictly positive and finite) and is reported as a hard error.
    """
    if (a == 0.0 and math.isinf(b)) or (math.isinf(a) and b == 0.0):
        raise ValueError("0 * inf is a contract violation in this value domain")
    return a * b


def ext_recip(a: float) -> float:
    """Reciprocal on [0, inf], exchanging 0 and inf."""
    if a == 0.0:
        return INF
    if math.isinf(a):
        return 0.0
    return 1.0 / a


def _check_eps(eps: float) -> None:
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _leq(a: float, b: float) -> bool:
    """a <= b, forgiving a few ulps at the boundary.

    Decimal literals such as 1.05 - 1.0 land an ulp outside 0.05;
    boundary cases are meant to pass.  The slack is ~1e-15 relative,
    far below every tolerance this package works at.
    """
    if a <= b:
        return True
    if math.isinf(a) or math.isinf(b):
        return False
    return (a - b) <= 8.0 * math.ulp(max(abs(a), abs(b), 1.0))


def eps_close(k: float, p: float, eps: float) -> bool:
    """Whether ``k`` approximates ``p``: |k - p| <= eps for finite p, and
    k >= 1/eps for p = inf.

    The relation is deliberately asymmetric: 1/eps is eps-close to inf,
    while inf is eps-close to no finite number.
    """
    _check_eps(eps)
    return _leq(deviation(k, p), eps)


def eps_above(k: float, p: float, eps: float) -> bool:
    """Whether k >= p' for some p' that is eps-close to p."""
    _check_eps(eps)
    if math.isinf(p):
        return _leq(deviation(k, p), eps)
    if math.isinf(k):
        return True
    return _leq(p - k, eps)


def eps_below(k: float, p: float, eps: float) -> bool:
    """Whether k <= p' for some p' that is eps-close to p."""
    _check_eps(eps)
    if math.isinf(p):
        return True
    if math.isinf(k):
        return False
    return _leq(k - p, eps)


def deviation(k: float, p: float) -> float:
    """Smallest tolerance at which ``k`` counts as close to ``p``.

    Defined so that ``eps_close(k, p, e)`` holds iff ``deviation(k, p) <= e``
    (for e in (0, 1)).  Returns inf when no tolerance would do.
    """
    if math.isinf(p):
        if math.isinf(k):
            return 0.0
        return INF if k == 0.0 else 1.0 / k
    if math.isinf(k):
        return INF
    return abs(k - p)


def abs_change(a: float, b: float) -> float:
    """Distance used by stabilisation checks; inf and inf count as equal."""
    if a == b:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return INF
    return abs(a - b)


def value_to_json(v: float):
    """Encode a value as a JSON number, or the string "inf"."""
    if math.isinf(v):
        return "inf"
    if v == int(v) and abs(v) < 2**53:
        return int(v)
    return v


def value_from_json(obj) -> float:
    """Decode a JSON number or the string "inf"."""
    if obj == "inf":
        return INF
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ValueError(f"expected a number or \"inf\", got {obj!r}")
    return ext(obj)


@dataclass(frozen=True)
class SolverConfig:
    """Shared numeric knobs for every iterative computation.

    tol_fix    stabilisation threshold for fixpoint/stage iteration
    tol_cmp    tolerance used when cross-checking two computations
    cap        divergence cap: ascending iterates beyond it become inf
    max_iters  budget per fixpoint / per stage loop; exceeding it is an error
    """

    tol_fix: float = 1e-9
    tol_cmp: float = 1e-6
    cap: float = 1e12
    max_iters: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.tol_fix < 1.0):
            raise ValueError(f"tol_fix must lie in (0, 1), got {self.tol_fix}")
        if not (0.0 < self.tol_cmp < 1.0):
            raise ValueError(f"tol_cmp must lie in (0, 1), got {self.tol_cmp}")
        if not (self.cap > 0.0 and not math.isinf(self.cap)):
            raise ValueError(f"cap must be positive and finite, got {self.cap}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters}")


DEFAULT_CONFIG = SolverConfig()


class NonConvergenceError(RuntimeError):
    """An iteration budget ran out before stabilisation.

    Carries the residual change so the failure is never silent.
    """

    def __init__(self, context: str, residual: float, iterations: int):
        super().__init__(
            f"{context}: no stabilisation after {iterations} iterations "
            f"(residual change {residual})"
        )
        self.context = context
        self.residual = residual
        self.iterations = iterations
