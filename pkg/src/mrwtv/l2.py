"""The (BV, L^2) decomposition ``min TV_m(u) + lam/2 int |u - f|^2 dnu``."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import inner, mass, total_variation
from .mincut import feasible_flow, solve_geometric_affine
from .numeric import FLOAT_TOL, Number, coerce, sign
from .prox import prox_tv
from .space import RandomWalkSpace, SpaceError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecompositionResult:
    u: list
    v: list
    energy: Number
    lam: Number
    certificate: dict | None = None  # (x, y) -> g(x, y) on every directed pair of the support
    diagnostics: dict = field(default_factory=dict)


def rof_energy(space: RandomWalkSpace, u: Sequence[Number], f: Sequence[Number], lam) -> Number:
    fid = sum((space.measure[x] * (u[x] - f[x]) ** 2 for x in range(space.n)), space.zero())
    return total_variation(space, u) + lam * fid / 2


def _check_inputs(space: RandomWalkSpace, f, lam):
    space.require_ergodic()
    if len(f) != space.n:
        raise ValueError(f"signal has {len(f)} values, space has {space.n} states")
    lam = coerce(lam, space.exact)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return [coerce(t, space.exact) for t in f], lam


def solve_rof(space: RandomWalkSpace, f: Sequence[Number], lam, certify: bool = True) -> DecompositionResult:
    """Exact ROF minimizer by level-set divide and conquer (see :mod:`mrwtv.prox`)."""
    f, lam = _check_inputs(space, f, lam)
    u, cuts = prox_tv(space, [lam * m for m in space.measure], f)
    v = [a - b for a, b in zip(f, u)]
    diag = {"cuts": cuts, "unique": True}
    g = None
    if certify:
        g, deficit = l2_certificate(space, u, f, lam)
        diag["certificate_deficit"] = deficit
    return DecompositionResult(u, v, rof_energy(space, u, f, lam), lam, g, diag)


def _free_and_target(space: RandomWalkSpace, u, target):
    """Split edges into free (equal endpoint values) and pinned; return node balances."""
    free = []
    need = list(target)
    pinned = {}
    for x, y, c in space.edges:
        s = sign(u[y] - u[x])
        if s == 0:
            free.append((x, y, c))
        else:
            pinned[(x, y)] = s
            need[x] -= c * s
            need[y] += c * s
    return free, pinned, need


def _assemble_field(space: RandomWalkSpace, free, pinned, flows) -> dict:
    one = coerce(1, space.exact)
    g = {}
    for (x, y), s in pinned.items():
        g[(x, y)] = s * one
        g[(y, x)] = -s * one
    for x, y, c in free:
        val = flows.get((x, y), space.zero()) / c
        val = max(-one, min(one, val))
        g[(x, y)] = val
        g[(y, x)] = -val
    for x in range(space.n):
        if x in space.jump[x]:
            g[(x, x)] = space.zero()
    return g


def l2_certificate(space: RandomWalkSpace, u, f, lam):
    """Antisymmetric ``g`` with ``|g| <= 1``, ``g in sign(grad u)`` and ``div_m g = lam (u - f)``.

    Returns ``(g, deficit)``; ``g`` is None when no such field exists.
    """
    target = [space.measure[x] * lam * (u[x] - f[x]) for x in range(space.n)]
    free, pinned, need = _free_and_target(space, u, target)
    res = feasible_flow(space.n, free, need, need, space.exact)
    if not res.feasible:
        return None, res.deficit
    return _assemble_field(space, free, pinned, res.flows), res.deficit


@dataclass(frozen=True)
class L2Verification:
    identity_lhs: Number
    identity_rhs: Number
    identity_ok: bool
    certificate_ok: bool
    certificate_deficit: Number
    perturbation_ok: bool
    certificate: dict | None

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.certificate_ok and self.perturbation_ok

    @property
    def verdict(self) -> str:
        return "optimal" if self.ok else "not optimal"


def verify_l2_optimality(
    space: RandomWalkSpace,
    f: Sequence[Number],
    u: Sequence[Number],
    lam,
    rel_tol: float = 1e-8,
    eps: float = 1e-6,
) -> L2Verification:
    """Check ``lam <f - u, u> = TV_m(u)``, the existence of a certificate ``g`` and local minimality."""
    f, lam = _check_inputs(space, f, lam)
    u = [coerce(t, space.exact) for t in u]
    lhs = lam * inner(space, [a - b for a, b in zip(f, u)], u)
    rhs = total_variation(space, u)
    if space.exact:
        identity_ok = lhs == rhs
    else:
        identity_ok = abs(lhs - rhs) <= rel_tol * max(1.0, abs(rhs), abs(lhs))
    g, deficit = l2_certificate(space, u, f, lam)
    base = rof_energy(space, u, f, lam)
    step = coerce(eps, space.exact)
    slack = 0 if space.exact else FLOAT_TOL * max(1.0, abs(base)) * 10
    perturb_ok = True
    for x in range(space.n):
        for s in (step, -step):
            w = list(u)
            w[x] += s
            if rof_energy(space, w, f, lam) < base - slack:
                perturb_ok = False
    return L2Verification(lhs, rhs, identity_ok, g is not None, deficit, perturb_ok, g)


def solve_rof_dual(
    space: RandomWalkSpace,
    f: Sequence[Number],
    lam: float,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> DecompositionResult:
    """Float cross-check: accelerated projected gradient on the edge dual variables.

    With ``(K u)_e = c_e (u_y - u_x)`` the primal point is
    ``u = f - K^T p / (lam nu)`` and ``p`` ranges over the unit box.
    """
    space.require_ergodic()
    lam = float(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    nu = np.array([float(m) for m in space.measure])
    fv = np.array([float(t) for t in f])
    E = space.edges
    if not E:
        u = fv.copy()
        return DecompositionResult(list(u), [0.0] * space.n, 0.0, lam, None, {"iterations": 0, "gap": 0.0})
    xs = np.array([e[0] for e in E])
    ys = np.array([e[1] for e in E])
    cs = np.array([float(e[2]) for e in E])

    def KT(p):
        out = np.zeros(space.n)
        np.add.at(out, ys, cs * p)
        np.add.at(out, xs, -cs * p)
        return out

    def K(u):
        return cs * (u[ys] - u[xs])

    def primal(p):
        return fv - KT(p) / (lam * nu)

    # Lipschitz constant of the dual gradient: ||K nu^{-1/2}||^2 / lam
    M = np.zeros((len(E), space.n))
    M[np.arange(len(E)), ys] = cs
    M[np.arange(len(E)), xs] = -cs
    M = M / np.sqrt(nu)[None, :]
    L = max(np.linalg.norm(M, 2) ** 2 / lam, 1e-300)
    p = np.zeros(len(E))
    y = p.copy()
    t = 1.0
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        u = primal(y)
        p_next = np.clip(y + K(u) / L, -1.0, 1.0)
        t_next = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = p_next + (t - 1) / t_next * (p_next - p)
        p, t = p_next, t_next
        if it % 50 == 0 or it == max_iter:
            u = primal(p)
            P = np.sum(cs * np.abs(u[ys] - u[xs])) + lam / 2 * np.sum(nu * (u - fv) ** 2)
            # dual value: min_u <p, K u> + lam/2 |u - f|^2 attained at u
            D = np.dot(p, K(u)) + lam / 2 * np.sum(nu * (u - fv) ** 2)
            gap = P - D
            if gap <= tol * max(1.0, abs(P)):
                break
    u = primal(p)
    energy = float(np.sum(cs * np.abs(u[ys] - u[xs])) + lam / 2 * np.sum(nu * (u - fv) ** 2))
    log.debug("dual solver stopped after %d iterations, gap %.3e", it, gap)
    return DecompositionResult(list(map(float, u)), list(map(float, fv - u)), energy, lam, None,
                               {"iterations": it, "gap": float(gap), "unique": True})


def _is_zero(u, exact: bool, scale) -> bool:
    if exact:
        return all(t == 0 for t in u)
    return max(abs(t) for t in u) <= 1e-11 * max(1.0, scale)


def meyer_norm(space: RandomWalkSpace, f: Sequence[Number], width: float = 1e-9) -> float:
    """``||f||_{m,*}`` by bisection on the largest ``lam`` whose ROF minimizer vanishes."""
    space.require_ergodic()
    fe = [coerce(t, space.exact) for t in f]
    m = mass(space, fe)
    scale = max(abs(t) for t in fe) if fe else 0
    if (m != 0) if space.exact else abs(m) > 1e-12 * max(1.0, float(scale) * float(space.total_measure)):
        raise SpaceError("f ∉ G_m(X): the signal must have zero nu-mean")
    if scale == 0:
        return 0.0
    fs = space.as_float()
    ff = [float(t) for t in fe]

    def vanishes(lam):
        u, _ = prox_tv(fs, [lam * x for x in fs.measure], ff)
        return _is_zero(u, False, float(scale))

    lo, hi = 1.0, 1.0
    if vanishes(hi):
        while vanishes(hi):
            lo, hi = hi, hi * 2
    else:
        while not vanishes(lo):
            hi, lo = lo, lo / 2
    while hi - lo > width * lo:
        mid = (lo + hi) / 2
        if vanishes(mid):
            lo = mid
        else:
            hi = mid
    return 1.0 / ((lo + hi) / 2)


def meyer_norm_exact(space: RandomWalkSpace, f: Sequence[Number]) -> Number:
    """``max_A int_A f dnu / P_m(A)`` by Dinkelbach; independent of the ROF solver."""
    from .geometry import perimeter

    space.require_ergodic()
    fe = [coerce(t, space.exact) for t in f]
    if mass(space, fe) != 0 and space.exact:
        raise SpaceError("f ∉ G_m(X): the signal must have zero nu-mean")
    zero = space.zero()
    ratio = zero
    best = None
    for _ in range(4 * space.n + 10):
        # maximize int_A f - ratio * P(A)  <=>  minimize ratio P(A) - int_A f
        if ratio == 0:
            A = frozenset(x for x in range(space.n) if fe[x] > 0)
        else:
            w = [-space.measure[x] * fe[x] / ratio for x in range(space.n)]
            sol = solve_geometric_affine(space, w)
            if sol.energy >= 0 or not sol.set:
                return ratio
            A = sol.set
        if not A:
            return ratio
        best = A
        ratio = sum((space.measure[x] * fe[x] for x in best), zero) / perimeter(space, best)
    raise RuntimeError("Dinkelbach iteration did not terminate")


def multiscale(space: RandomWalkSpace, f: Sequence[Number], schedule: Sequence) -> list[DecompositionResult]:
    """Hierarchical decomposition: each stage decomposes the residual of the previous one."""
    if not schedule:
        raise ValueError("empty lambda schedule")
    for a, b in zip(schedule, schedule[1:]):
        if not b > a:
            raise ValueError("lambda schedule must be strictly increasing")
    out = []
    residual = list(f)
    for lam in schedule:
        res = solve_rof(space, residual, lam)
        out.append(res)
        residual = res.v
    return out
