# domains/glr/recipes.py
from __future__ import annotations
from typing import List, Optional

from hypercube import parse_vertex
from matched_pairs import MatchedPair
from search import SearchConfig


def pair(d: int, *phi: str) -> MatchedPair:
    """pair(3, "000:111") → the matched pair {000 ↦ 111}."""
    out = []
    for item in phi:
        s, t = item.split(":")
        out.append((parse_vertex(s, d), parse_vertex(t, d)))
    return MatchedPair.from_phi(d, out)


# --- golden pairs: small instances with hand-checked flows ---
def golden_pairs_glr() -> List[MatchedPair]:
    return [
        pair(2, "00:11"),
        pair(3, "000:111"),
        pair(3, "000:110"),
        pair(3, "100:110", "010:011"),
        pair(4, "1000:1110", "0100:1101"),
    ]


def default_config(
    d: int = 4,
    seed: int = 0,
    budget: Optional[int] = None,
    max_size: int = 6,
    exhaustive: bool = True,
    workers: Optional[int] = None,
    keep_records: bool = False,
) -> SearchConfig:
    return SearchConfig(
        conjecture="glr",
        generator="exhaustive" if exhaustive else "random",
        d=d,
        budget=budget,
        seed=seed,
        max_size=max_size,
        workers=workers,
        keep_records=keep_records,
    )
