# domains/rout/recipes.py
from __future__ import annotations
from fractions import Fraction
from typing import List, Optional, Tuple

from hypercube import Vertex, parse_set
from conjectures import DEFAULT_C_GRID
from search import SearchConfig

ROUT_C_GRID: Tuple[Fraction, ...] = DEFAULT_C_GRID


# --- golden subsets: (d, S) with hand-checked routing ratios ---
def golden_subsets_rout() -> List[Tuple[int, Tuple[Vertex, ...]]]:
    cases = [
        (2, ["00"]),
        (2, ["00", "10"]),
        (3, ["000"]),
        (3, ["000", "010", "001", "011"]),  # x_1 = 0
    ]
    return [(d, tuple(sorted(parse_set(S, d)))) for d, S in cases]


def default_config(
    d: int = 3,
    seed: int = 0,
    budget: Optional[int] = None,
    exhaustive: bool = True,
    workers: Optional[int] = None,
    keep_records: bool = False,
) -> SearchConfig:
    return SearchConfig(
        conjecture="rout",
        generator="exhaustive" if exhaustive else "random",
        d=d,
        budget=budget,
        seed=seed,
        workers=workers,
        keep_records=keep_records,
        c_grid=ROUT_C_GRID,
    )
