"""Bounding-area solver for one layer's mesh grid.

Given per-cell area demands, size shared column widths W_i and row heights
H_j so that W_i * H_j covers every occupied cell while (sum W)(sum H) stays
small. Two variants:

  min_area_lp     linear lower bound: the hyperbola H = a/W is replaced by
                  tangent cuts and the half-perimeter sum W + sum H is
                  minimized. Fast enough to sit inside an annealing loop;
                  cell products may undershoot their demand (relaxation).
  min_area_exact  feasible minimizer: alternating closed-form updates plus a
                  golden-section search over a log-space column/row spread
                  factor (the alternation alone can stall on kinks of the
                  max() terms).

Both are pure functions and reentrant.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

from .errors import InvalidParamsError
from .simplex import solve_cover_lp

Grid = Sequence[Sequence[float]]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class LpResult(NamedTuple):
    col_widths: tuple[float, ...]
    row_heights: tuple[float, ...]
    area: float  # (sum W)(sum H) of the relaxed solution; a lower-bound proxy


class ExactResult(NamedTuple):
    col_widths: tuple[float, ...]
    row_heights: tuple[float, ...]
    area: float
    converged: bool


def _check_demands(demands: Grid) -> tuple[int, int, list[tuple[int, int, float]]]:
    rows = len(demands)
    cols = len(demands[0]) if rows else 0
    occupied = []
    for r in range(rows):
        if len(demands[r]) != cols:
            raise InvalidParamsError("demand grid must be rectangular")
        for c in range(cols):
            a = float(demands[r][c])
            if a < 0:
                raise InvalidParamsError(f"cell demand must be >= 0, got {a}")
            if a > 0:
                occupied.append((r, c, a))
    return rows, cols, occupied


def min_area_lp(demands: Grid, tangent_count: int = 8) -> LpResult:
    """Lower-bound sizing via tangent cuts of H >= a/W.

    For every occupied cell and tangent point w_t the cut
        (a / w_t^2) * W_i + H_j >= 2 a / w_t
    is the tangent of H = a/W at W = w_t. Tangent points are geometrically
    spaced across [sqrt(a)/4, 4 sqrt(a)] (cell aspect ratios 1/16 .. 16).
    """
    if tangent_count < 2:
        raise InvalidParamsError(f"tangent_count must be >= 2, got {tangent_count}")
    rows, cols, occupied = _check_demands(demands)
    if not occupied:
        return LpResult(tuple(0.0 for _ in range(cols)), tuple(0.0 for _ in range(rows)), 0.0)

    nvars = cols + rows  # [W_0..W_{cols-1}, H_0..H_{rows-1}]
    a_rows = []
    b_rhs = []
    for r, c, a in occupied:
        lo = math.sqrt(a) / 4.0
        ratio = 16.0 ** (1.0 / (tangent_count - 1))
        for t in range(tangent_count):
            w_t = lo * ratio ** t
            coeffs = [0.0] * nvars
            coeffs[c] = a / (w_t * w_t)
            coeffs[cols + r] = 1.0
            a_rows.append(coeffs)
            b_rhs.append(2.0 * a / w_t)

    cost = [1.0] * nvars
    x, _ = solve_cover_lp(cost, a_rows, b_rhs)
    widths = tuple(float(v) for v in x[:cols])
    heights = tuple(float(v) for v in x[cols:])
    return LpResult(widths, heights, sum(widths) * sum(heights))


def repair_heights(demands: Grid, col_widths: Sequence[float]) -> ExactResult:
    """One closed-form pass H_j = max_i a_ij / W_i; makes any widths feasible."""
    rows, cols, occupied = _check_demands(demands)
    widths = [max(float(w), 0.0) for w in col_widths]
    for r, c, a in occupied:
        if widths[c] <= 0.0:
            widths[c] = math.sqrt(a)
    heights = [0.0] * rows
    for r, c, a in occupied:
        heights[r] = max(heights[r], a / widths[c])
    area = sum(widths) * sum(heights)
    return ExactResult(tuple(widths), tuple(heights), area, True)


def _spread_search(values: list[float], reminimize, lo: float = 0.0, hi: float = 2.0) -> list[float]:
    """Golden-section over the exponent s of v_i -> m * (v_i / m)^s, m the
    geometric mean. s = 1 keeps the vector; s = 0 collapses it to uniform.
    The objective is convex along this log-space ray, so the section search
    is exact up to its resolution."""
    active = [v for v in values if v > 0]
    if len(active) < 2:
        return values
    log_m = sum(math.log(v) for v in active) / len(active)

    def scaled(s: float) -> list[float]:
        return [math.exp(log_m + s * (math.log(v) - log_m)) if v > 0 else 0.0
                for v in values]

    def f(s: float) -> float:
        return reminimize(scaled(s))

    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(60):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    s_best = min((f(1.0), 1.0), (f1, x1), (f2, x2))[1]  # never worse than s=1
    return scaled(s_best)


@lru_cache(maxsize=1 << 18)
def _min_area_exact_cached(demands: tuple[tuple[float, ...], ...]) -> ExactResult:
    return min_area_exact(demands)


def min_area_exact_cached(demands: Grid) -> ExactResult:
    """Memoized min_area_exact for enumeration-heavy callers; the kernel is a
    pure function, so caching on the demand grid is safe."""
    return _min_area_exact_cached(tuple(tuple(float(a) for a in row) for row in demands))


def min_area_exact(demands: Grid, init_widths: Optional[Sequence[float]] = None,
                   tol: float = 1e-9, max_iters: int = 1000) -> ExactResult:
    """Feasible minimum-area sizing; initialized from the LP unless widths given.

    Alternates H_j = max_i a_ij/W_i and W_i = max_j a_ij/H_j (each update is
    the closed-form optimum for the other side fixed), interleaved with
    golden-section spread searches over columns and rows. Returns the best
    iterate with converged=False if max_iters is exhausted.
    """
    rows, cols, occupied = _check_demands(demands)
    if not occupied:
        return ExactResult(tuple(0.0 for _ in range(cols)), tuple(0.0 for _ in range(rows)),
                           0.0, True)

    if init_widths is None:
        init_widths = min_area_lp(demands).col_widths
    widths = [max(float(w), 0.0) for w in init_widths]
    for r, c, a in occupied:
        if widths[c] <= 0.0:
            widths[c] = math.sqrt(a)

    by_col: dict[int, list[tuple[int, float]]] = {}
    by_row: dict[int, list[tuple[int, float]]] = {}
    for r, c, a in occupied:
        by_col.setdefault(c, []).append((r, a))
        by_row.setdefault(r, []).append((c, a))

    def heights_for(ws: Sequence[float]) -> list[float]:
        hs = [0.0] * rows
        for r, cells in by_row.items():
            hs[r] = max(a / ws[c] for c, a in cells)
        return hs

    def widths_for(hs: Sequence[float]) -> list[float]:
        ws = [0.0] * cols
        for c, cells in by_col.items():
            ws[c] = max(a / hs[r] for r, a in cells)
        return ws

    def area_of(ws: Sequence[float]) -> float:
        return sum(ws) * sum(heights_for(ws))

    heights = heights_for(widths)
    area = sum(widths) * sum(heights)
    converged = False
    iters = 0
    while iters < max_iters:
        prev_area = area
        # alternate to a fixed point
        while iters < max_iters:
            iters += 1
            widths = widths_for(heights)
            heights = heights_for(widths)
            new_area = sum(widths) * sum(heights)
            if abs(area - new_area) <= tol * max(new_area, 1.0):
                area = new_area
                break
            area = new_area
        # escape kinks of the max() terms: spread searches in log space
        widths = _spread_search(widths, area_of)
        heights = heights_for(widths)

        def area_of_heights(hs: Sequence[float]) -> float:
            return sum(widths_for(hs)) * sum(hs)

        heights = _spread_search(heights, area_of_heights)
        widths = widths_for(heights)
        heights = heights_for(widths)
        area = sum(widths) * sum(heights)
        if abs(prev_area - area) <= tol * max(area, 1.0):
            converged = True
            break

    return ExactResult(tuple(widths), tuple(heights), area, converged)
