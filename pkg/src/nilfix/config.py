"""Numerical options shared by the geometric modules."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class Options:
    # zero search
    max_depth: int = 12
    cell_budget: int = 400_000
    newton_tol: float = 1e-15
    newton_max_iter: int = 80
    merge_distance: float = 1e-6
    degenerate_tol: float = 1e-8
    # winding numbers
    modulus_floor: float = 1e-10
    initial_samples: int = 64
    sample_budget: int = 1 << 18
    min_segment: float = 1e-12
    rounding_guard: float = 0.25
    # region validation
    boundary_resolution: int = 512
    # flows
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = 0.1
    max_steps: int = 100_000
    working_box: float = 100.0
    flow_t: float = 0.01
    # actions
    witness_tol: float = 1e-9
    rank_cutoff: float = 1e-9
    seed_grid: int = 16

    def with_(self, **changes) -> "Options":
        return replace(self, **changes)


DEFAULT = Options()


def thread_count() -> int:
    try:
        n = int(os.environ.get("NILFIX_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Order-preserving map, threaded when NILFIX_THREADS > 1."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
