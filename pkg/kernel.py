from __future__ import annotations
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional, Union
import hashlib
import json
import math

# ---------------------------
# Capacities
# ---------------------------

# Capacities are nonnegative integers or INF. networkx treats an arc without a
# 'capacity' attribute as infinite, so INF never reaches the solver as a number.
INF = math.inf

Capacity = Union[int, float]


def is_inf(c: Capacity) -> bool:
    return c == INF


def check_capacity(c: Capacity, what: str = "capacity") -> Capacity:
    if is_inf(c):
        return INF
    if isinstance(c, bool) or not isinstance(c, int) or c < 0:
        raise HypercubeError(f"{what} must be a nonnegative integer or INF, got {c!r}")
    return c


def capacity_to_json(c: Capacity) -> Any:
    return "inf" if is_inf(c) else int(c)


def capacity_from_json(v: Any) -> Capacity:
    if isinstance(v, str) and v.lower() in ("inf", "infinity", "∞"):
        return INF
    return check_capacity(int(v))


# ---------------------------
# Errors
# ---------------------------

class HypercubeError(ValueError):
    """Base class for bad inputs: the caller can fix these."""


class DimensionError(HypercubeError):
    pass


class PreconditionError(HypercubeError):
    pass


class ConfigError(HypercubeError):
    """Bad run configuration, rejected before any work starts."""


class NoCertificate(HypercubeError):
    pass


class NotOptimal(HypercubeError):
    pass


class InvalidCut(HypercubeError):
    def __init__(self, message: str, witness: Optional[list] = None) -> None:
        super().__init__(message)
        self.witness = witness or []


class TheoremViolation(RuntimeError):
    """A proven statement failed on a concrete instance. Always a bug signal."""

    def __init__(self, statement: str, instance: Mapping[str, Any], detail: str = "") -> None:
        msg = f"THEOREM VIOLATION [{statement}]"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.statement = statement
        self.instance = dict(instance)


class SplitFailure(RuntimeError):
    """The bounded-flow split found no two (or m) vertex-disjoint collections."""

    def __init__(self, instance: Mapping[str, Any], detail: str = "") -> None:
        msg = "SPLIT FAILURE"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.instance = dict(instance)


# ---------------------------
# Canonical JSON / signatures
# ---------------------------

def fraction_to_json(q: Fraction) -> Dict[str, int]:
    q = Fraction(q)
    return {"num": q.numerator, "den": q.denominator}


def fraction_from_json(obj: Any) -> Fraction:
    if isinstance(obj, Mapping):
        return Fraction(int(obj["num"]), int(obj["den"]))
    return Fraction(str(obj))


def _jsonish(v: Any) -> Any:
    """Make values JSON-stable (fractions→{num,den}, sets→sorted lists, tuples→lists)."""
    if isinstance(v, Fraction):
        return fraction_to_json(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, Mapping):
        return {str(k): _jsonish(v2) for k, v2 in sorted(v.items(), key=lambda kv: str(kv[0]))}
    if isinstance(v, (list, tuple)):
        return [_jsonish(x) for x in v]
    if isinstance(v, (set, frozenset)):
        return [_jsonish(x) for x in sorted(v)]
    if hasattr(v, "to_json"):
        return _jsonish(v.to_json())
    return v


def dumps_canonical(obj: Any, indent: Optional[int] = None) -> str:
    """Byte-stable JSON: sorted keys, fixed separators, trailing newline."""
    if indent is None:
        text = json.dumps(_jsonish(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    else:
        text = json.dumps(_jsonish(obj), sort_keys=True, indent=indent, ensure_ascii=False)
    return text + "\n"


def signature(obj: Any) -> str:
    """Order-insensitive sha256 of the canonical JSON form."""
    payload = dumps_canonical(obj)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
