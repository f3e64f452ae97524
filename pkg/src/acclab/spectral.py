"""Per-mode Sturm-Liouville eigensolver and the spectral-flow study.

The radial problems -(p u')' + q u = lambda w u are discretized by a
flux-form finite volume scheme on (possibly graded) grids, after the
substitution u = x^gamma v at a singular endpoint.  Exact references for the
degenerate limit come from Bessel zeros: per cross-section eigenvalue mu the
cone on (0, 1] with Dirichlet outer boundary has spectrum j_{nu(mu),k}^2
with nu = sqrt(((n-2)/2)^2 + mu/c^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigh

from .geometry import RadialOperator, WarpFamily, indicial_roots


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SLGrid:
    """Node layout: uniform, or graded toward the singular endpoint.

    The singular-endpoint substitution u = x^gamma v already restores
    second-order accuracy on uniform grids, which are the default; strong
    grading combined with the degenerate weight x^(n-1+2 gamma) makes the
    mass-scaled tridiagonal transform ill-conditioned at large n.
    """

    n: int
    kind: str = "uniform"
    power: float = 2.0

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("grid too coarse: need at least 16 nodes")
        if self.kind not in ("uniform", "graded"):
            raise ValueError(f"unknown grid kind {self.kind!r}")

    def nodes(self, lo: float, hi: float) -> np.ndarray:
        s = np.linspace(0.0, 1.0, self.n + 1)
        if self.kind == "graded" and lo == 0.0:
            s = s ** self.power
        return lo + (hi - lo) * s

    def refined(self) -> "SLGrid":
        return SLGrid(2 * self.n, self.kind, self.power)


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------

def _assemble(ptil, qtil, wtil, xs: np.ndarray, left_dirichlet: bool,
              right_dirichlet: bool):
    """Symmetric tridiagonal (A, M) for -(p v')' + q v = lambda w v.

    Fluxes use midpoint values of p; mass and potential use half-cell
    midpoint quadrature.  A singular left endpoint (p(lo) = 0) gets the
    natural boundary condition simply by keeping the node with zero left
    flux, which is the variational realization of the substituted problem.
    """
    mids = 0.5 * (xs[:-1] + xs[1:])
    h = np.diff(xs)
    pm = np.asarray(ptil(mids), dtype=float)
    wm = np.asarray(wtil(mids), dtype=float)
    qm = np.asarray(qtil(mids), dtype=float)
    if np.any(wm <= 0):
        raise SolverError("nonpositive weight in the discretization")

    m = len(xs)
    diag = np.zeros(m)
    off = np.zeros(m - 1)
    mass = np.zeros(m)
    pot = np.zeros(m)
    flux = pm / h
    diag[:-1] += flux
    diag[1:] += flux
    off -= flux
    mass[:-1] += 0.5 * wm * h
    mass[1:] += 0.5 * wm * h
    pot[:-1] += 0.5 * qm * h
    pot[1:] += 0.5 * qm * h
    diag += pot

    sl = slice(1 if left_dirichlet else 0, -1 if right_dirichlet else None)
    idx = np.arange(m)[sl]
    return diag[idx], off[idx[:-1]] if len(idx) > 1 else off[:0], mass[idx], idx


@dataclass
class ModeSolution:
    """Eigendata of one separated mode."""

    operator: RadialOperator
    xs: np.ndarray
    lam: np.ndarray
    lam_err: np.ndarray
    u: np.ndarray          # nodes x count, weighted-orthonormal
    lam_raw: np.ndarray
    mass: np.ndarray = None  # node quadrature weights of the w-inner product

    def interp(self, x) -> np.ndarray:
        """Eigenfunction values at arbitrary points, one column per mode."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((len(x), self.u.shape[1]))
        for j in range(self.u.shape[1]):
            out[:, j] = np.interp(x, self.xs, self.u[:, j])
        return out


def solve_mode(op: RadialOperator, grid: SLGrid, count: int,
               richardson: bool = True, tol: Optional[float] = None) -> ModeSolution:
    """First `count` eigenpairs of a radial operator.

    Eigenvalues carry a Richardson error estimate from the (N, 2N) pair and
    are extrapolated to fourth order; eigenvectors come from the fine grid
    and are w-orthonormal.
    """
    if count > grid.n // 4:
        raise SolverError("count > N/4: refine the grid")

    def solve_on(g: SLGrid):
        lo, hi = op.domain()
        xs = g.nodes(lo, hi)
        ptil, qtil, wtil = op.substituted_coefficients()
        if op.parity is not None:
            left_dir = op.parity == "odd"
        else:
            left_dir = (op.inner_bc == "none" and op.outer_bc == "dirichlet"
                        and lo != 0.0)
        right_dir = op.outer_bc == "dirichlet"
        diag, off, mass, idx = _assemble(ptil, qtil, wtil, xs, left_dir, right_dir)
        d = 1.0 / np.sqrt(mass)
        bd = diag * d * d
        bo = off * d[:-1] * d[1:]
        lam, vec = eigh_tridiagonal(bd, bo, select="i",
                                    select_range=(0, count - 1))
        v = vec * d[:, None]
        full = np.zeros((len(xs), count))
        full[idx, :] = v
        g_ = op.gamma()
        if g_ != 0.0:
            full = full * (xs[:, None] ** g_)
        # quadrature weights of the ORIGINAL w-inner product on all nodes:
        # mass entries are for the substituted weight w~ = w x^(2 gamma),
        # so int f g w dx ~= sum (f/x^g)(g/x^g) mass
        mass_full = np.zeros(len(xs))
        mass_full[idx] = mass
        return xs, lam, full, mass_full

    xs2, lam2, u2, mass2 = solve_on(grid.refined())
    if richardson:
        _, lam1, _, _ = solve_on(grid)
        err = np.abs(lam2 - lam1) / 3.0
        lam = lam2 + (lam2 - lam1) / 3.0
    else:
        err = np.full_like(lam2, np.nan)
        lam = lam2.copy()
    if tol is not None and np.any(err > tol * np.maximum(1.0, np.abs(lam))):
        raise SolverError("grid too coarse: Richardson estimate exceeds tolerance")
    return ModeSolution(op, xs2, lam, err, u2, lam_raw=lam2, mass=mass2)


# ---------------------------------------------------------------------------
# Bessel-zero references
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def bessel_j_zeros(nu: float, count: int) -> Tuple[float, ...]:
    """First `count` positive zeros of J_nu, high-precision backend."""
    import mpmath
    return tuple(float(mpmath.besseljzero(mpmath.mpf(nu), k))
                 for k in range(1, count + 1))


@dataclass
class EigenResult:
    """Merged spectrum with mode labels and multiplicities."""

    eps: float
    entries: List[dict] = field(default_factory=list)  # keys: lam, mu, mult, ell, k, err
    complete_below: float = math.inf  # tail bound of the mode truncation

    def lambdas(self, limit: Optional[int] = None) -> List[float]:
        out = [e["lam"] for e in self.entries]
        return out[:limit] if limit else out

    def sorted(self) -> "EigenResult":
        return EigenResult(self.eps, sorted(self.entries, key=lambda e: e["lam"]),
                           self.complete_below)


def conic_reference_spectrum(family: WarpFamily, count_per_mode: int,
                             ell_max: Optional[int] = None) -> EigenResult:
    """Exact limiting spectrum from Bessel zeros, per cross-section mode.

    For the neck profile the tip separates the two cone halves, so every
    eigenvalue is doubled.
    """
    doubling = 2 if family.profile == "neck" else 1
    res = EigenResult(0.0)
    ells = range(len(family.cross_section)) if ell_max is None \
        else range(ell_max + 1)
    for ell in ells:
        mu = family.cross_section.mu(ell)
        mult = family.cross_section.multiplicity(ell)
        nu = indicial_roots(family.n, mu, family.c).nu
        for k, z in enumerate(bessel_j_zeros(nu, count_per_mode), start=1):
            res.entries.append({"lam": z * z, "mu": mu,
                                "mult": mult * doubling, "ell": ell, "k": k,
                                "err": 0.0})
    return res.sorted()


def assemble_spectrum(family: WarpFamily, eps: float, grid: SLGrid,
                      count: int, ell_max: int,
                      lam_cap: Optional[float] = None,
                      strict: bool = True) -> EigenResult:
    """Merged spectrum over modes ell <= ell_max with multiplicities.

    The smallest possible eigenvalue of the first omitted mode,
    mu_(ell_max+1)/max(f)^2, bounds the range on which the merged list is
    the complete spectrum; the bound is recorded on the result, and with
    strict=True the call fails when it does not cover the requested range.
    """
    if eps == 0.0 and family.profile == "neck":
        ref = conic_reference_spectrum(family, count, ell_max)
        return ref
    res = EigenResult(eps)
    for ell in range(ell_max + 1):
        mu = family.cross_section.mu(ell)
        mult = family.cross_section.multiplicity(ell)
        for branch, op in family.radial_operators_split(mu, eps):
            sol = solve_mode(op, grid, count)
            for k in range(count):
                res.entries.append({"lam": float(sol.lam[k]), "mu": mu,
                                    "mult": mult, "ell": ell, "k": k + 1,
                                    "branch": branch,
                                    "err": float(sol.lam_err[k])})
    res = res.sorted()
    if ell_max + 1 < len(family.cross_section):
        lo, hi = family.domain(eps)
        xs = np.linspace(lo, hi, 512)
        fmax = float(np.max(family.f(xs, eps)))
        res.complete_below = family.cross_section.mu(ell_max + 1) / fmax ** 2
        top = lam_cap if lam_cap is not None else (
            res.entries[-1]["lam"] if res.entries else 0.0)
        if strict and res.complete_below < top:
            raise SolverError(
                f"mode truncation ell <= {ell_max} insufficient: next mode can "
                f"reach {res.complete_below:.3g} below the requested top {top:.3g}")
    return res


# ---------------------------------------------------------------------------
# spectral flow and clustering
# ---------------------------------------------------------------------------

@dataclass
class Cluster:
    center: float
    multiplicity: int
    members: List[dict]
    matched_reference: Optional[float]
    gap: float
    tolerance: float


CurveKey = Tuple[int, str, int]  # (ell, branch, k)


@dataclass
class SpectralFlow:
    family: WarpFamily
    schedule: List[float]
    curves: Dict[CurveKey, List[float]]
    curve_meta: Dict[CurveKey, dict]
    clusters: List[Cluster]
    reference: EigenResult
    rates: Dict[CurveKey, float]
    verdict: dict


def _power_fit(schedule: Sequence[float], vals: Sequence[float],
               powers: Sequence[int]) -> float:
    """Fit lambda(eps) = sum_j a_j eps^(p_j) on the last len(powers) points
    and return the eps -> 0 limit a_0 (powers must start with 0)."""
    k = len(powers)
    e = np.asarray(schedule[-k:], dtype=float)
    l = np.asarray(vals[-k:], dtype=float)
    V = np.stack([e ** p for p in powers], axis=1)
    try:
        coef = np.linalg.solve(V, l)
    except np.linalg.LinAlgError:
        return float(l[-1])
    est = float(coef[0])
    spread = float(np.max(l) - np.min(l))
    if abs(est - l[-1]) > 4.0 * max(spread, 1e-12):
        return float(l[-1])  # fit diverged; the raw tail is safer
    return est


def _empirical_rate(schedule: Sequence[float], vals: Sequence[float]) -> float:
    if len(vals) < 3:
        return float("nan")
    d1, d2 = vals[-2] - vals[-3], vals[-1] - vals[-2]
    if d1 == 0.0 or d2 == 0.0 or d1 * d2 <= 0 or abs(d2) >= abs(d1):
        return float("nan")
    r = schedule[-2] / schedule[-1]
    return math.log(abs(d1 / d2)) / math.log(r)


def curve_powers(family: WarpFamily, branch: str) -> Tuple[int, ...]:
    """Extrapolation model per curve: even neck branches have no linear
    term (even eigenfunctions see the neck at second order)."""
    if family.profile == "neck" and branch == "even":
        return (0, 2, 3)
    return (0, 1, 2, 3)


def spectral_flow(family: WarpFamily, schedule: Sequence[float], grid: SLGrid,
                  count: int, ell_max: int,
                  rel_tol: float = 1e-3) -> SpectralFlow:
    """Track per-mode eigenvalue curves along a decreasing eps schedule.

    Accumulation estimates (power-model extrapolants of the curves) are
    matched against the Bessel-zero reference; the cluster window ties
    multiplicity counting to 3x the Richardson estimate floored by
    rel_tol * lambda.  Both inclusions are checked within the mode universe
    ell <= ell_max.
    """
    schedule = list(schedule)
    if len(schedule) < 4 or any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise SolverError("need a decreasing eps schedule with >= 4 points")

    curves: Dict[CurveKey, List[float]] = {}
    errs: Dict[CurveKey, float] = {}
    meta: Dict[CurveKey, dict] = {}
    complete_below = math.inf
    for eps in schedule:
        spec = assemble_spectrum(family, eps, grid, count, ell_max, strict=False)
        complete_below = min(complete_below, spec.complete_below)
        for e in spec.entries:
            key = (e["ell"], e.get("branch", ""), e["k"])
            curves.setdefault(key, []).append(e["lam"])
            errs[key] = max(errs.get(key, 0.0), e["err"])
            meta[key] = {"mu": e["mu"], "mult": e["mult"]}

    # no doubling factor on the cluster side: the neck's even/odd curve
    # pairs enter clusters separately and double the count on their own
    rates: Dict[CurveKey, float] = {}
    estimates: Dict[CurveKey, float] = {}
    for key, vals in curves.items():
        estimates[key] = _power_fit(schedule, vals, curve_powers(family, key[1]))
        rates[key] = _empirical_rate(schedule, vals)

    reference = conic_reference_spectrum(family, count, ell_max)

    clusters: List[Cluster] = []
    for key in sorted(estimates, key=lambda k: estimates[k]):
        est = estimates[key]
        tol = max(3.0 * errs[key], rel_tol * abs(est))
        placed = False
        for cl in clusters:
            if abs(cl.center - est) <= max(tol, cl.tolerance):
                cl.members.append({"key": key, **meta[key], "estimate": est})
                cl.multiplicity += meta[key]["mult"]
                cl.tolerance = max(cl.tolerance, tol)
                placed = True
                break
        if not placed:
            clusters.append(Cluster(est, meta[key]["mult"],
                                    [{"key": key, **meta[key], "estimate": est}],
                                    None, math.inf, tol))

    ref_distinct: List[Tuple[float, int]] = []
    for e in reference.entries:
        for i, (c, m) in enumerate(ref_distinct):
            if abs(c - e["lam"]) <= 1e-9 * max(1.0, abs(c)):
                ref_distinct[i] = (c, m + e["mult"])
                break
        else:
            ref_distinct.append((e["lam"], e["mult"]))

    unmatched_clusters = []
    mult_mismatch = []
    for cl in clusters:
        best = min(ref_distinct, key=lambda rm: abs(rm[0] - cl.center))
        cl.gap = abs(best[0] - cl.center)
        if cl.gap <= cl.tolerance:
            cl.matched_reference = best[0]
            if cl.multiplicity != best[1]:
                mult_mismatch.append((cl.center, cl.multiplicity, best[1]))
        else:
            unmatched_clusters.append(cl.center)

    top = max((cl.center + cl.tolerance for cl in clusters), default=0.0)
    unmatched_refs = []
    for c, m in ref_distinct:
        if c > top:
            continue
        hits = [cl for cl in clusters if cl.matched_reference == c]
        if not hits:
            unmatched_refs.append(c)

    verdict = {
        "forward_inclusion": not unmatched_clusters,
        "reverse_inclusion": not unmatched_refs,
        "multiplicities_match": not mult_mismatch,
        "unmatched_clusters": unmatched_clusters,
        "unmatched_references": unmatched_refs,
        "multiplicity_mismatches": mult_mismatch,
        "mode_universe_ell_max": ell_max,
        "complete_below": complete_below,
    }
    return SpectralFlow(family, schedule, curves, meta, clusters, reference,
                        rates, verdict)


# ---------------------------------------------------------------------------
# Rayleigh quotient upper bounds
# ---------------------------------------------------------------------------

def rayleigh_minimax_bound(family: WarpFamily, eps: float,
                           trial_basis: Sequence[Callable[[np.ndarray], np.ndarray]],
                           npoints: int = 4001) -> np.ndarray:
    """Galerkin upper bounds for the first len(trial_basis) eigenvalues.

    Trial functions must be piecewise smooth, lie in the form domain
    (bounded near the tip, vanishing at a Dirichlet outer boundary) and be
    supplied as callables; derivatives are taken by dense differencing.
    """
    lo, hi = family.domain(eps)
    xs = np.linspace(lo, hi, npoints)
    p = family.f(xs, eps) ** (family.n - 1)
    w = p
    vals = np.stack([np.asarray(f(xs), dtype=float) for f in trial_basis])
    ders = np.stack([np.gradient(v, xs) for v in vals])
    dim = len(trial_basis)
    Q = np.empty((dim, dim))
    G = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            Q[i, j] = Q[j, i] = np.trapezoid(p * ders[i] * ders[j], xs)
            G[i, j] = G[j, i] = np.trapezoid(w * vals[i] * vals[j], xs)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        raise SolverError("Gram matrix numerically singular")
    lam = eigh(Q, G, eigvals_only=True)
    return lam


def mode_rayleigh_bound(op: RadialOperator,
                        trial_basis: Sequence[Callable[[np.ndarray], np.ndarray]],
                        npoints: int = 4001) -> np.ndarray:
    """Same bound for a single separated mode (includes the q-term)."""
    lo, hi = op.domain()
    xs = np.linspace(lo + (1e-12 if lo == 0 else 0.0), hi, npoints)
    p = op.p(xs)
    q = op.q(xs)
    w = op.w(xs)
    vals = np.stack([np.asarray(f(xs), dtype=float) for f in trial_basis])
    ders = np.stack([np.gradient(v, xs) for v in vals])
    dim = len(trial_basis)
    Q = np.empty((dim, dim))
    G = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            Q[i, j] = Q[j, i] = np.trapezoid(p * ders[i] * ders[j] + q * vals[i] * vals[j], xs)
            G[i, j] = G[j, i] = np.trapezoid(w * vals[i] * vals[j], xs)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        raise SolverError("Gram matrix numerically singular")
    return eigh(Q, G, eigvals_only=True)
