from typing import Callable, NamedTuple


class Bracket(NamedTuple):
    lo: float
    hi: float
    iterations: int


def find_min_feasible(func: Callable[[float], bool], lo: float, hi: float, width: float, max_iter: int = 200) -> Bracket:
    """Given a predicate that is False at lo and True for every x >= hi,
    shrink [lo, hi] around the feasibility edge until hi - lo <= width.

    Returns:
        Bracket: lo stays infeasible, hi stays feasible.
    """
    iterations = 0
    while hi - lo > width and iterations < max_iter:
        mid = (lo + hi) / 2
        iterations += 1
        if func(mid):
            hi = mid
        else:
            lo = mid
    return Bracket(lo, hi, iterations)


def find_max_feasible(func: Callable[[float], bool], lo: float, hi: float, width: float, max_iter: int = 200) -> Bracket:
    """Given a predicate that is True for every x <= lo and False at hi,
    shrink [lo, hi] around the feasibility edge until hi - lo <= width.

    Returns:
        Bracket: lo stays feasible, hi stays infeasible.
    """
    iterations = 0
    while hi - lo > width and iterations < max_iter:
        mid = (lo + hi) / 2
        iterations += 1
        if func(mid):
            lo = mid
        else:
            hi = mid
    return Bracket(lo, hi, iterations)


def expand_until(func: Callable[[float], bool], start: float, target: bool, max_doublings: int) -> tuple[float, int]:
    """Double start until func(x) == target; returns the last x tried and how many doublings it took."""
    x = start
    for doublings in range(max_doublings + 1):
        if func(x) == target:
            return x, doublings
        if doublings < max_doublings:
            x *= 2
    return x, max_doublings + 1
