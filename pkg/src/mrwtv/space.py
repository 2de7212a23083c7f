"""Finite metric random walk spaces: a state set, jump distributions and a reversible measure.

All constructors return an immutable :class:`RandomWalkSpace`.  When every input
weight is an ``int`` or ``Fraction`` the space is *exact*: jump probabilities and
the measure are stored as ``Fraction`` and every downstream functional is
evaluated without rounding.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .numeric import FLOAT_TOL, Number, coerce, is_exact


class SpaceError(ValueError):
    """Raised when a space cannot be built or is unfit for a computation."""


@dataclass(frozen=True)
class EdgeWeightGraph:
    """Undirected weighted graph; ``edges`` holds ``(x, y, w)`` with ``x == y`` for loops."""

    vertices: tuple
    edges: tuple

    def __init__(self, vertices: Iterable, edges: Iterable[tuple]):
        object.__setattr__(self, "vertices", tuple(str(v) for v in vertices))
        object.__setattr__(self, "edges", tuple((str(x), str(y), w) for x, y, w in edges))


@dataclass(frozen=True)
class RandomWalkSpace:
    states: tuple
    jump: tuple  # one {target index: probability} dict per state
    measure: tuple
    exact: bool = False
    distance: Callable | None = field(default=None, compare=False, repr=False)
    provenance: Mapping = field(default_factory=dict, compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.states)

    @cached_property
    def _index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise SpaceError(f"unknown state {label!r}") from None

    def subset(self, labels: Iterable) -> frozenset:
        """Map state labels to a set of indices."""
        return frozenset(self.index(s) for s in labels)

    def labels(self, nodes: Iterable[int]) -> list:
        return [self.states[i] for i in sorted(nodes)]

    @cached_property
    def total_measure(self) -> Number:
        return sum(self.measure, self._zero)

    @property
    def _zero(self) -> Number:
        return Fraction(0) if self.exact else 0.0

    def zero(self) -> Number:
        return self._zero

    def loop(self, x: int) -> Number:
        return self.jump[x].get(x, self._zero)

    @cached_property
    def edges(self) -> tuple:
        """Undirected interaction weights ``(x, y, nu_x * m_x({y}))`` for ``x < y``.

        In float mode the two directed products are averaged so the stored
        weight is symmetric even when detailed balance holds only to rounding.
        """
        out = []
        for x, row in enumerate(self.jump):
            for y, p in row.items():
                if y <= x:
                    continue
                c = self.measure[x] * p
                if not self.exact:
                    c = 0.5 * (c + self.measure[y] * self.jump[y].get(x, 0.0))
                if c > 0:
                    out.append((x, y, c))
        return tuple(out)

    @cached_property
    def neighbors(self) -> tuple:
        """Per-state list of ``(y, c_xy)`` over off-diagonal edges."""
        adj: list[list] = [[] for _ in range(self.n)]
        for x, y, c in self.edges:
            adj[x].append((y, c))
            adj[y].append((x, c))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def is_ergodic(self) -> bool:
        return strongly_connected(self.jump)

    def require_ergodic(self) -> None:
        if not self.is_ergodic:
            raise SpaceError("not ergodic: the positive-jump graph is not strongly connected")

    def weight_matrix(self) -> np.ndarray:
        w = np.zeros((self.n, self.n))
        for x, y, c in self.edges:
            w[x, y] = w[y, x] = float(c)
        return w

    def as_float(self) -> "RandomWalkSpace":
        if not self.exact:
            return self
        return RandomWalkSpace(
            states=self.states,
            jump=tuple({y: float(p) for y, p in row.items()} for row in self.jump),
            measure=tuple(float(v) for v in self.measure),
            exact=False,
            distance=self.distance,
            provenance=dict(self.provenance),
        )

    def with_jump(self, jump: Sequence[Mapping[int, Number]]) -> "RandomWalkSpace":
        """Copy with replaced jump rows (no validation; used for perturbation tests)."""
        return RandomWalkSpace(
            self.states, tuple(dict(r) for r in jump), self.measure, self.exact,
            self.distance, dict(self.provenance),
        )


def strongly_connected(jump: Sequence[Mapping[int, Number]]) -> bool:
    n = len(jump)
    if n <= 1:
        return True
    fwd: list[list[int]] = [[] for _ in range(n)]
    bwd: list[list[int]] = [[] for _ in range(n)]
    for x, row in enumerate(jump):
        for y, p in row.items():
            if y != x and p > 0:
                fwd[x].append(y)
                bwd[y].append(x)

    def reach(adj):
        seen = [False] * n
        seen[0] = True
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    queue.append(y)
        return all(seen)

    return reach(fwd) and reach(bwd)


# ---------------------------------------------------------------------------
# constructors


def from_weighted_graph(g: EdgeWeightGraph, exact: bool | None = None) -> RandomWalkSpace:
    """Random walk ``m_x = (1/d_x) sum_y w_xy delta_y`` with measure ``nu_x = d_x``."""
    if exact is None:
        exact = all(is_exact(w) for _, _, w in g.edges)
    idx = {v: i for i, v in enumerate(g.vertices)}
    n = len(g.vertices)
    w: list[dict] = [{} for _ in range(n)]
    for a, b, wt in g.edges:
        if a not in idx or b not in idx:
            raise SpaceError(f"edge ({a}, {b}) references an unknown vertex")
        wt = coerce(wt, exact)
        if wt <= 0:
            raise SpaceError(f"edge ({a}, {b}) has non-positive weight {wt}")
        x, y = idx[a], idx[b]
        w[x][y] = w[x].get(y, 0) + wt
        if x != y:
            w[y][x] = w[y].get(x, 0) + wt
    degree = [sum(row.values(), Fraction(0) if exact else 0.0) for row in w]
    for x, d in enumerate(degree):
        if d <= 0:
            raise SpaceError(f"vertex {g.vertices[x]} has zero degree")
    jump = tuple({y: wt / degree[x] for y, wt in sorted(row.items())} for x, row in enumerate(w))
    if not strongly_connected(jump):
        raise SpaceError("not ergodic: graph is disconnected")
    return RandomWalkSpace(
        states=g.vertices,
        jump=jump,
        measure=tuple(degree),
        exact=exact,
        provenance={"construction": "weighted_graph", "edges": len(g.edges)},
    )


def _matrix_rows(K) -> list[list]:
    if isinstance(K, np.ndarray):
        return [[float(v) for v in row] for row in K]
    return [list(row) for row in K]


def from_markov_kernel(K, pi: Sequence | None = None, states: Sequence | None = None) -> RandomWalkSpace:
    """Space from a row-stochastic matrix; ``pi`` defaults to the stationary distribution.

    The stationary distribution is obtained by propagating detailed-balance
    ratios along a BFS tree; non-reversible kernels are then rejected by the
    balance check with the worst offending pair in the message.
    """
    rows = _matrix_rows(K)
    n = len(rows)
    exact = all(is_exact(v) for row in rows for v in row) and (
        pi is None or all(is_exact(v) for v in pi))
    rows = [[coerce(v, exact) for v in row] for row in rows]
    if any(len(r) != n for r in rows):
        raise SpaceError("kernel must be square")
    tol = 0 if exact else FLOAT_TOL
    for x, row in enumerate(rows):
        if any(v < 0 for v in row):
            raise SpaceError(f"row {x} has a negative entry")
        if abs(sum(row) - 1) > tol:
            raise SpaceError(f"row {x} sums to {sum(row)}, not 1")
    jump = tuple({y: v for y, v in enumerate(row) if v != 0} for row in rows)
    labels = tuple(str(s) for s in states) if states is not None else tuple(str(i + 1) for i in range(n))

    if pi is None:
        if not strongly_connected(jump):
            raise SpaceError("not ergodic: cannot determine a stationary distribution")
        one = Fraction(1) if exact else 1.0
        measure: list = [None] * n
        measure[0] = one
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for y, p in jump[x].items():
                if measure[y] is None:
                    back = jump[y].get(x, 0)
                    if back == 0:
                        raise SpaceError(
                            f"detailed balance violated at ({labels[x]}, {labels[y]}): "
                            "forward jump positive, backward jump zero")
                    measure[y] = measure[x] * p / back
                    queue.append(y)
        total = sum(measure)
        measure = [v / total for v in measure]
    else:
        measure = [coerce(v, exact) for v in pi]
        if len(measure) != n:
            raise SpaceError("measure length does not match kernel")
    if any(v <= 0 for v in measure):
        raise SpaceError("measure must be strictly positive")

    space = RandomWalkSpace(labels, jump, tuple(measure), exact,
                            provenance={"construction": "markov_kernel"})
    report = validate(space)
    if not report.balanced:
        x, y = report.worst_pair
        raise SpaceError(
            f"detailed balance violated at ({labels[x]}, {labels[y]}): "
            f"residual {float(report.balance_residual):.3e}")
    return space


def _radial_profile(kernel: str, radius: float, samples: Sequence[float] | None):
    if radius <= 0:
        raise SpaceError("kernel radius must be positive")
    slack = radius * (1 + 1e-12)
    if kernel == "uniform":
        return lambda d: 1.0 if d <= slack else 0.0
    if kernel == "triangle":
        return lambda d: max(0.0, 1.0 - d / radius) if d <= slack else 0.0
    if kernel == "table":
        if not samples:
            raise SpaceError("table kernel needs samples")
        grid = np.linspace(0.0, radius, len(samples))
        vals = np.asarray(samples, dtype=float)
        if np.any(vals < 0):
            raise SpaceError("kernel samples must be non-negative")
        return lambda d: float(np.interp(d, grid, vals)) if d <= slack else 0.0
    raise SpaceError(f"unknown kernel type {kernel!r}")


def from_kernel_grid(
    domain: Sequence[Sequence[float]],
    cells_per_axis: int | Sequence[int],
    kernel: str | Callable[[float], float] = "uniform",
    radius: float = 1.0,
    samples: Sequence[float] | None = None,
) -> RandomWalkSpace:
    """Discretize ``m^{J,Omega}`` on a regular grid of cells covering a box.

    The radial kernel is sampled at integer cell offsets (midpoint rule,
    origin excluded), normalized so the full lattice mass is 1, and every
    offset that lands outside the box is folded into the self-loop.
    """
    domain = [tuple(map(float, d)) for d in domain]
    dim = len(domain)
    counts = [int(cells_per_axis)] * dim if np.isscalar(cells_per_axis) else [int(c) for c in cells_per_axis]
    if len(counts) != dim or any(c < 1 for c in counts):
        raise SpaceError("cells_per_axis must give a positive count per axis")
    h = [(hi - lo) / c for (lo, hi), c in zip(domain, counts)]
    vol = math.prod(h)
    profile = kernel if callable(kernel) else _radial_profile(kernel, radius, samples)

    reach = [int(math.ceil(radius / hi)) + 1 for hi in h]
    offsets = []
    for k in itertools.product(*[range(-r, r + 1) for r in reach]):
        if not any(k):
            continue
        d = math.sqrt(sum((ki * hi) ** 2 for ki, hi in zip(k, h)))
        # radial profile evaluated on |k| keeps J(k) == J(-k) bit for bit
        wk = 0.5 * (profile(d) + profile(math.sqrt(sum((-ki * hi) ** 2 for ki, hi in zip(k, h)))))
        if wk > 0:
            offsets.append((k, wk * vol))
    total = sum(w for _, w in offsets)
    if total <= 0:
        raise SpaceError("kernel has zero total discrete mass")

    cells = list(itertools.product(*[range(c) for c in counts]))
    index = {c: i for i, c in enumerate(cells)}
    jump = []
    for cell in cells:
        row: dict[int, float] = {}
        outside = 0.0
        for k, w in offsets:
            target = tuple(ci + ki for ci, ki in zip(cell, k))
            j = index.get(target)
            if j is None:
                outside += w
            else:
                row[j] = row.get(j, 0.0) + w / total
        if outside > 0:
            row[index[cell]] = outside / total
        jump.append(dict(sorted(row.items())))
    labels = tuple(
        ",".join(f"{lo + (ci + 0.5) * hi:.12g}" for ci, (lo, _), hi in zip(cell, domain, h))
        for cell in cells
    )
    return RandomWalkSpace(
        states=labels,
        jump=tuple(jump),
        measure=tuple([vol] * len(cells)),
        exact=False,
        provenance={
            "construction": "kernel_grid",
            "domain": [list(d) for d in domain],
            "cells_per_axis": counts,
            "kernel": kernel if isinstance(kernel, str) else "callable",
            "radius": radius,
        },
    )


def from_epsilon_step(
    points: Sequence,
    metric: Callable,
    point_measure: Sequence[Number],
    eps: Number,
    labels: Sequence | None = None,
) -> RandomWalkSpace:
    """The eps-step walk ``m_x = mu restricted to B(x, eps), normalized``.

    The stored measure is ``nu_x = mu_x * mu(B(x, eps))``, which is the
    reversible measure of this walk; ``mu`` itself is only invariant when
    all ball masses coincide.
    """
    n = len(points)
    if len(point_measure) != n:
        raise SpaceError("point_measure length does not match points")
    exact = all(is_exact(v) for v in point_measure)
    mu = [coerce(v, exact) for v in point_measure]
    if any(v <= 0 for v in mu):
        raise SpaceError("point masses must be positive")
    balls = [[y for y in range(n) if metric(points[x], points[y]) <= eps] for x in range(n)]
    jump = []
    measure = []
    for x, ball in enumerate(balls):
        mass = sum((mu[y] for y in ball), Fraction(0) if exact else 0.0)
        if all(y == x for y in ball):
            raise SpaceError(f"isolated point {x}: no other point within eps")
        jump.append({y: mu[y] / mass for y in ball})
        measure.append(mu[x] * mass)
    jump = tuple(jump)
    if not strongly_connected(jump):
        raise SpaceError("not ergodic: eps-neighbourhood graph is disconnected")
    labels = tuple(str(s) for s in labels) if labels is not None else tuple(str(i) for i in range(n))
    return RandomWalkSpace(
        states=labels,
        jump=jump,
        measure=tuple(measure),
        exact=exact,
        distance=metric,
        provenance={
            "construction": "epsilon_step",
            "eps": float(eps),
            "note": "measure is mu_x * mu(B(x, eps)), the reversible measure of the eps-step walk",
        },
    )


def restrict(space: RandomWalkSpace, omega: Iterable[int]) -> RandomWalkSpace:
    """Restricted walk on ``omega``: mass leaving ``omega`` is folded into self-loops."""
    keep = sorted(set(omega))
    if not keep:
        raise SpaceError("cannot restrict to an empty set")
    new = {x: i for i, x in enumerate(keep)}
    jump = []
    for x in keep:
        row: dict[int, Number] = {}
        leaving = space.zero()
        for y, p in space.jump[x].items():
            if y in new:
                row[new[y]] = row.get(new[y], space.zero()) + p
            else:
                leaving += p
        if leaving > 0:
            row[new[x]] = row.get(new[x], space.zero()) + leaving
        jump.append(dict(sorted(row.items())))
    jump = tuple(jump)
    prov = {"construction": "restrict", "parent": dict(space.provenance)}
    if not strongly_connected(jump):
        prov["warning"] = "restricted space is not strongly connected"
    return RandomWalkSpace(
        states=tuple(space.states[x] for x in keep),
        jump=jump,
        measure=tuple(space.measure[x] for x in keep),
        exact=space.exact,
        distance=space.distance,
        provenance=prov,
    )


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    n: int
    row_residual: Number
    balance_residual: Number
    balance_relative: Number
    worst_pair: tuple | None
    ergodic: bool
    negative_entries: int
    min_measure: Number
    notes: list = field(default_factory=list)
    tolerance: float = 1e-12

    @property
    def stochastic(self) -> bool:
        return self.negative_entries == 0 and self.row_residual <= self.tolerance

    @property
    def balanced(self) -> bool:
        return self.balance_relative <= self.tolerance

    @property
    def ok(self) -> bool:
        return self.stochastic and self.balanced and self.ergodic and self.min_measure > 0

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "row_residual": float(self.row_residual),
            "balance_residual": float(self.balance_residual),
            "balance_relative": float(self.balance_relative),
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "ergodic": self.ergodic,
            "negative_entries": self.negative_entries,
            "min_measure": float(self.min_measure),
            "ok": self.ok,
            "notes": list(self.notes),
        }


def validate(space: RandomWalkSpace, tolerance: float = 1e-12) -> ValidationReport:
    zero = space.zero()
    row_res = zero
    negatives = 0
    for row in space.jump:
        s = sum(row.values(), zero)
        row_res = max(row_res, abs(s - 1))
        negatives += sum(1 for p in row.values() if p < 0)
    pairs = sorted({(min(x, y), max(x, y)) for x, row in enumerate(space.jump) for y in row if y != x})
    worst, worst_rel, worst_pair = zero, zero, None
    for x, y in pairs:
        a = space.measure[x] * space.jump[x].get(y, zero)
        b = space.measure[y] * space.jump[y].get(x, zero)
        res = abs(a - b)
        rel = res / (1 + max(abs(a), abs(b)))
        if rel > worst_rel:
            worst, worst_rel, worst_pair = res, rel, (x, y)
    notes = []
    if "note" in space.provenance:
        notes.append(space.provenance["note"])
    if "warning" in space.provenance:
        notes.append(space.provenance["warning"])
    return ValidationReport(
        n=space.n,
        row_residual=row_res,
        balance_residual=worst,
        balance_relative=worst_rel,
        worst_pair=worst_pair,
        ergodic=strongly_connected(space.jump),
        negative_entries=negatives,
        min_measure=min(space.measure),
        notes=notes,
        tolerance=tolerance,
    )
