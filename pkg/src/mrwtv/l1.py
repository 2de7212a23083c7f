"""The (BV, L^1) problem ``min TV_m(u) + lam int |u - f| dnu`` and its thresholding structure."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .geometry import cheeger, divergence, inner, lambda_ratio, m_of, perimeter, total_variation
from .mincut import (
    NestednessError,
    feasible_flow,
    geometric_energy,
    geometric_envelope,
    level_sets,
    measure_of,
    solve_geometric,
)
from .numeric import FLOAT_TOL, Number, coerce, sign
from .space import RandomWalkSpace, SpaceError


def l1_energy(space: RandomWalkSpace, u: Sequence[Number], f: Sequence[Number], lam) -> Number:
    fid = sum((space.measure[x] * abs(u[x] - f[x]) for x in range(space.n)), space.zero())
    return total_variation(space, u) + lam * fid


@dataclass(frozen=True)
class L1Result:
    u: list
    energy: Number
    minimal_u: list
    maximal_u: list
    unique: bool
    lam: Number
    certificate: dict | None = None  # {"xi": [...], "g": {(x, y): ...}}
    diagnostics: dict = field(default_factory=dict)


def _stack(f_min, levels, family, n):
    u = [f_min] * n
    for (lo, hi, _), A in zip(levels, family):
        for x in A:
            u[x] += hi - lo
    return u


def solve_l1(space: RandomWalkSpace, f: Sequence[Number], lam, certify: bool = True) -> L1Result:
    """Minimizer set of the L^1 problem described by its two extreme elements.

    Each level ``{f > t}`` of the datum gives one geometric problem; its
    smallest and largest minimizing sets stack into ``minimal_u`` and
    ``maximal_u``.  Any ``u`` in between with nested level sets is optimal too.
    """
    space.require_ergodic()
    if len(f) != space.n:
        raise ValueError(f"signal has {len(f)} values, space has {space.n} states")
    lam = coerce(lam, space.exact)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    f = [coerce(t, space.exact) for t in f]
    levels = level_sets(f)
    lows, highs = [], []
    level_energy = space.zero()
    for lo, hi, F in levels:
        sol = solve_geometric(space, F, lam)
        lows.append(sol.minimal)
        highs.append(sol.maximal)
        level_energy += (hi - lo) * sol.energy
    for family in (lows, highs):
        for i in range(len(family) - 1):
            if not family[i + 1] <= family[i]:
                raise NestednessError(f"extreme minimizers at levels {i} and {i + 1} are not nested")
    f_min = min(f)
    u_min = _stack(f_min, levels, lows, space.n)
    u_max = _stack(f_min, levels, highs, space.n)
    energy = l1_energy(space, u_min, f, lam)
    cert = None
    diag = {"levels": len(levels), "level_energy": level_energy}
    if certify:
        rep = verify_l1_optimality(space, u_min, f, lam)
        diag["certificate_ok"] = rep.feasible
        if rep.feasible:
            cert = {"xi": rep.xi, "g": rep.g}
    return L1Result(u_min, energy, u_min, u_max, u_min == u_max, lam, cert, diag)


@dataclass(frozen=True)
class L1Verification:
    feasible: bool
    deficit: Number
    xi: list | None
    g: dict | None


def verify_l1_optimality(space: RandomWalkSpace, u: Sequence[Number], f: Sequence[Number], lam) -> L1Verification:
    """Search for ``(xi, g)`` with ``xi in sign(u - f)``, ``g in sign(grad u)`` and ``sum_y m_x(y) g(x, y) = lam xi(x)``.

    Both unknowns are handled by one feasibility flow: free edges carry
    ``c_xy g(x, y)`` and each node's net outflow must lie in
    ``lam nu_x [xi_lo, xi_hi]``.
    """
    lam = coerce(lam, space.exact)
    u = [coerce(t, space.exact) for t in u]
    f = [coerce(t, space.exact) for t in f]
    one = coerce(1, space.exact)
    lo, hi = [], []
    for x in range(space.n):
        s = sign(u[x] - f[x])
        a, b = (s * one, s * one) if s else (-one, one)
        lo.append(lam * space.measure[x] * a)
        hi.append(lam * space.measure[x] * b)
    free = []
    pinned = {}
    for x, y, c in space.edges:
        s = sign(u[y] - u[x])
        if s == 0:
            free.append((x, y, c))
        else:
            pinned[(x, y)] = s
            lo[x] -= c * s
            hi[x] -= c * s
            lo[y] += c * s
            hi[y] += c * s
    res = feasible_flow(space.n, free, lo, hi, space.exact)
    if not res.feasible:
        return L1Verification(False, res.deficit, None, None)
    g = {}
    for (x, y), s in pinned.items():
        g[(x, y)] = s * one
        g[(y, x)] = -s * one
    for x, y, c in free:
        val = max(-one, min(one, res.flows.get((x, y), space.zero()) / c))
        g[(x, y)] = val
        g[(y, x)] = -val
    for x in range(space.n):
        if x in space.jump[x]:
            g[(x, x)] = space.zero()
    xi = []
    for x in range(space.n):
        out = sum((p * g[(x, y)] for y, p in space.jump[x].items() if p > 0), space.zero())
        xi.append(out / lam)
    return L1Verification(True, res.deficit, xi, g)


def check_l1_witness(
    space: RandomWalkSpace,
    u: Sequence[Number],
    f: Sequence[Number],
    lam,
    g: Mapping[tuple, Number],
    xi: Sequence[Number],
) -> list[str]:
    """Check a user-supplied ``(g, xi)`` exactly; returns the list of violated conditions (empty = valid).

    ``g`` may be given on one orientation of each pair only; the other is
    filled in by antisymmetry.  Missing pairs count as 0.
    """
    lam = coerce(lam, space.exact)
    u = [coerce(t, space.exact) for t in u]
    f = [coerce(t, space.exact) for t in f]
    xi = [coerce(t, space.exact) for t in xi]
    full = {}
    for (x, y), val in g.items():
        val = coerce(val, space.exact)
        if (y, x) in g and coerce(g[(y, x)], space.exact) != -val and x != y:
            return [f"g is not antisymmetric on ({x}, {y})"]
        full[(x, y)] = val
        full[(y, x)] = -val
    problems = []
    tol = 0 if space.exact else FLOAT_TOL * 100
    for x, row in enumerate(space.jump):
        for y, p in row.items():
            if p == 0 or x == y:
                continue
            val = full.get((x, y), space.zero())
            if abs(val) > 1 + tol:
                problems.append(f"|g({x}, {y})| > 1")
            s = sign(u[y] - u[x])
            if s and abs(val - s) > tol:
                problems.append(f"g({x}, {y}) must equal {s}")
    for x in range(space.n):
        s = sign(u[x] - f[x])
        if s and abs(xi[x] - s) > tol:
            problems.append(f"xi({x}) must equal {s}")
        if not s and abs(xi[x]) > 1 + tol:
            problems.append(f"|xi({x})| > 1")
        out = sum((p * full.get((x, y), space.zero()) for y, p in space.jump[x].items() if p > 0 and y != x),
                  space.zero())
        if abs(out - lam * xi[x]) > tol:
            problems.append(f"divergence at {x} is {out}, expected {lam * xi[x]}")
    return problems


# ---------------------------------------------------------------------------
# thresholding parameters for f = chi_Omega


def _nontrivial(space: RandomWalkSpace, omega) -> frozenset:
    omega = frozenset(omega)
    if not omega or len(omega) == space.n:
        raise SpaceError("Omega must satisfy 0 < nu(Omega) < nu(X)")
    return omega


def _stop(space: RandomWalkSpace, scale) -> Number:
    return 0 if space.exact else FLOAT_TOL * max(1.0, float(scale))


def upper_threshold(space: RandomWalkSpace, omega: Iterable[int]) -> tuple:
    """``lambda(Omega) = sup_E (P(Omega) - P(E)) / nu(Omega sym-diff E)`` and a maximizing ``E``."""
    omega = _nontrivial(space, omega)
    everything = frozenset(range(space.n))
    P_om = perimeter(space, omega)
    cands = [(P_om / measure_of(space, omega), frozenset()), (P_om / measure_of(space, everything - omega), everything)]
    lam, E = max(cands, key=lambda t: t[0])
    for _ in range(4 * space.n + 10):
        sol = solve_geometric(space, omega, lam)
        if sol.energy >= P_om - _stop(space, P_om):
            return lam, E
        E = sol.set
        lam = (P_om - perimeter(space, E)) / measure_of(space, E ^ omega)
    raise RuntimeError("Dinkelbach iteration did not terminate")


def lower_threshold(space: RandomWalkSpace, omega: Iterable[int]) -> tuple:
    """``lambda^0(Omega) = inf_E P(E) / (nu(Omega) - nu(Omega sym-diff E))`` and a minimizing ``E``.

    The value is 0 when the constant 0 never minimizes (then ``nu(Omega) > nu(X)/2``).
    """
    omega = _nontrivial(space, omega)
    nu_om = measure_of(space, omega)
    E = omega
    lam = perimeter(space, omega) / nu_om
    for _ in range(4 * space.n + 10):
        if lam == 0:
            return lam, E
        sol = solve_geometric(space, omega, lam)
        if sol.energy >= lam * nu_om - _stop(space, lam * nu_om):
            return lam, E
        E = sol.set
        lam = perimeter(space, E) / (nu_om - measure_of(space, E ^ omega))
    raise RuntimeError("Dinkelbach iteration did not terminate")


def lambda_star(space: RandomWalkSpace, omega: Iterable[int]) -> Number:
    """``|| chi_Omega - m_(.)(Omega) ||_inf``."""
    omega = _nontrivial(space, omega)
    return max(abs((1 if x in omega else 0) - m_of(space, x, omega)) for x in range(space.n))


def eigenpair_check(space: RandomWalkSpace, omega: Iterable[int]) -> bool:
    """True iff ``Omega`` minimizes the geometric problem with datum ``Omega`` at ``lam = P(Omega)/nu(Omega)``."""
    omega = _nontrivial(space, omega)
    lam = lambda_ratio(space, omega)
    P = perimeter(space, omega)
    sol = solve_geometric(space, omega, lam)
    return sol.energy >= P - _stop(space, P)


@dataclass(frozen=True)
class MaximalFunctionReport:
    lambda_star: Number
    z0: dict
    divergence_ok: bool
    pairing_ok: bool
    minimizer_ok: bool

    @property
    def ok(self) -> bool:
        return self.divergence_ok and self.pairing_ok and self.minimizer_ok


def maximal_function_check(space: RandomWalkSpace, omega: Iterable[int]) -> MaximalFunctionReport:
    omega = _nontrivial(space, omega)
    one = coerce(1, space.exact)
    z0 = {}
    for x, row in enumerate(space.jump):
        for y, p in row.items():
            if p > 0:
                z0[(x, y)] = (one if x in omega else 0 * one) - (one if y in omega else 0 * one)
    div = divergence(space, z0)
    chi = [one if x in omega else 0 * one for x in range(space.n)]
    tol = 0 if space.exact else FLOAT_TOL * 100
    expected = [chi[x] - m_of(space, x, omega) for x in range(space.n)]
    div_ok = all(abs(a - b) <= tol for a, b in zip(div, expected))
    P = perimeter(space, omega)
    pairing_ok = abs(inner(space, chi, div) - P) <= tol * max(1.0, float(P))
    lam = max(abs(t) for t in div)
    sol = solve_geometric(space, omega, lam)
    minimizer_ok = sol.energy >= P - _stop(space, P)
    return MaximalFunctionReport(lam, z0, div_ok, pairing_ok, minimizer_ok)


@dataclass(frozen=True)
class ThresholdReport:
    lambda_omega: Number
    lambda0: Number
    lambda1: Number
    lambda_star: Number
    lambda_ratio: Number
    lambda_ratio_complement: Number
    cheeger: Number
    eigenpair: bool
    witnesses: dict
    chain_ok: bool
    flags: tuple = ()


def minimizer_thresholds(space: RandomWalkSpace, omega: Iterable[int]) -> ThresholdReport:
    omega = _nontrivial(space, omega)
    space.require_ergodic()
    rest = frozenset(range(space.n)) - omega
    lam_up, E_up = upper_threshold(space, omega)
    lam0, E0 = lower_threshold(space, omega)
    lam1, E1 = lower_threshold(space, rest)
    star = lambda_star(space, omega)
    ratio = lambda_ratio(space, omega)
    ratio_c = lambda_ratio(space, rest)
    h = cheeger(space, omega)
    flags = []
    if lam0 == 0:
        flags.append("constant 0 is never a minimizer")
    if lam1 == 0:
        flags.append("constant 1 is never a minimizer")
    if space.exact:
        chain = max(ratio, ratio_c) <= lam_up <= star and lam0 <= h.value
    else:
        t = FLOAT_TOL * 100
        chain = max(ratio, ratio_c) <= lam_up + t and lam_up <= star + t and lam0 <= h.value + t
    return ThresholdReport(
        lam_up, lam0, lam1, star, ratio, ratio_c, h.value, eigenpair_check(space, omega),
        {"lambda_omega": E_up, "lambda0": E0, "lambda1": E1, "cheeger": h.set},
        chain, tuple(flags),
    )


def minimizer_interval_bounds(space: RandomWalkSpace, omega: Iterable[int], E: Iterable[int]) -> tuple:
    """``(lambda^-(E), lambda^+(E))``: any ``lam`` at which ``E`` minimizes the geometric problem lies between them.

    Bounds are reported on the parameter range ``lam >= 0``: a supremum over
    an empty or all-negative family is reported as 0, an infimum over an
    empty family as ``inf``.  Exhaustive for ``n <= 14``; above that ``E``
    must be a minimizer for some ``lam``, and the bounds come from the exact
    lower envelope of the geometric energy.
    """
    omega = frozenset(omega)
    E = frozenset(E)
    P_E = perimeter(space, E)
    d_E = measure_of(space, E ^ omega)
    if space.n <= 14:
        lo = space.zero()
        hi = float("inf")
        for bits in itertools.product((0, 1), repeat=space.n):
            U = frozenset(i for i, b in enumerate(bits) if b)
            d_U = measure_of(space, U ^ omega)
            if d_U == d_E:
                continue
            r = (perimeter(space, U) - P_E) / (d_E - d_U)
            if d_U > d_E:
                lo = max(lo, r)
            elif r < hi:
                hi = r
        return lo, hi
    pieces = geometric_envelope(space, omega)
    touch = []
    for pc in pieces:
        if pc.distance == d_E and pc.perimeter == P_E:
            touch.append((pc.lo, pc.hi))
    if not touch:
        for pc in pieces[:-1]:
            lam = pc.hi
            if P_E + lam * d_E == pc.perimeter + lam * pc.distance:
                touch.append((lam, lam))
    if not touch:
        raise ValueError("E minimizes the geometric problem for no lambda; exhaustive bounds need n <= 14")
    return touch[0]


def three_regimes(space: RandomWalkSpace, omega: Iterable[int], lambdas: Sequence) -> list[str]:
    """Check the small/critical/large scale behaviour of an indicator eigenpair; returns failures."""
    omega = _nontrivial(space, omega)
    ratio = lambda_ratio(space, omega)
    half = space.total_measure / 2
    nu_om = measure_of(space, omega)
    chi = [1 if x in omega else 0 for x in range(space.n)]
    failures = []
    for lam in lambdas:
        lam = coerce(lam, space.exact)
        res = solve_l1(space, chi, lam, certify=False)
        if lam < ratio:
            if nu_om < half and not (all(t == 0 for t in res.minimal_u) and all(t == 0 for t in res.maximal_u)):
                failures.append(f"lam={lam}: expected the constant 0 as unique minimizer")
            if nu_om == half and not all(len(set(v)) == 1 for v in (res.minimal_u, res.maximal_u)):
                failures.append(f"lam={lam}: expected constant extreme minimizers")
        elif lam > ratio:
            if not (res.unique and res.u == [coerce(t, space.exact) for t in chi]):
                failures.append(f"lam={lam}: expected chi_Omega as unique minimizer")
        else:
            gap = l1_energy(space, chi, chi, lam) - res.energy
            if gap > (0 if space.exact else FLOAT_TOL * 100):
                failures.append(f"lam={lam}: chi_Omega is not a minimizer at the critical scale")
    return failures
