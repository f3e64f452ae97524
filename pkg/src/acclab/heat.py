"""Model heat kernels, degeneration probes and Volterra machinery.

Kernels are function-normalized (against the Riemannian density): the mode
kernel of the exact cone is

    k_nu(x, x', t) = (x x')^(-(n-2)/2) (2t)^(-1)
                     * exp(-(x^2+x'^2)/(4t)) I_nu(x x'/(2t)),

evaluated through the exponentially scaled Bessel function, and the full
kernel at coincident cross-section points is the multiplicity-weighted mode
sum divided by the cross-section volume.

The degeneration probes compare eigenexpansion kernels of the family
against the conic limit kernel (interior regime) and against the kernel of
the fixed rescaled complete space (scaled regime, computed on matched
truncated domains so that the domain-monotone wall effect is resolved).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import ive, jv

from .geometry import WarpFamily, indicial_roots
from .spectral import (ModeSolution, SLGrid, SolverError, bessel_j_zeros,
                       solve_mode)


# ---------------------------------------------------------------------------
# closed-form model kernels
# ---------------------------------------------------------------------------

def euclidean_kernel(n: int, z, zp, t: float):
    """Euclidean heat kernel (4 pi t)^(-n/2) exp(-|z-z'|^2/(4t)).

    The Gaussian decay rate is 1/(4t): this normalizes to total mass one,
    which pins down the exponent against the prefactor.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zp = np.atleast_1d(np.asarray(zp, dtype=float))
    d2 = np.sum((z - zp) ** 2, axis=-1)
    return (4.0 * math.pi * t) ** (-n / 2.0) * np.exp(-d2 / (4.0 * t))


def cone_mode_kernel(nu: float, n: int, x, xp, t):
    """Heat kernel of one separated mode on the exact infinite cone.

    Overflow-safe: the Bessel factor is evaluated as e^(-z) I_nu(z) against
    the completed Gaussian exp(-(x-x')^2/(4t)).
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x <= 0) or np.any(xp <= 0) or np.any(t <= 0):
        raise ValueError("cone mode kernel needs x, x', t > 0")
    z = x * xp / (2.0 * t)
    return ((x * xp) ** (-(n - 2) / 2.0) / (2.0 * t)
            * np.exp(-(x - xp) ** 2 / (4.0 * t)) * ive(nu, z))


def half_line_dirichlet_kernel(x, xp, t):
    """Method-of-images kernel on the half line; nu = 1/2 reference."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    pref = (4.0 * math.pi * t) ** -0.5
    return pref * (np.exp(-(x - xp) ** 2 / (4 * t))
                   - np.exp(-(x + xp) ** 2 / (4 * t)))


def b_cylinder_kernel(s, sp, t, mu: float = 0.0):
    """Mode kernel of the exact cylinder in logarithmic coordinates."""
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be positive")
    s = np.asarray(s, dtype=float)
    sp = np.asarray(sp, dtype=float)
    return ((4.0 * math.pi * t) ** -0.5
            * np.exp(-(s - sp) ** 2 / (4.0 * t)) * np.exp(-mu * t))


# ---------------------------------------------------------------------------
# eigenexpansion kernels
# ---------------------------------------------------------------------------

def heat_from_spectrum(sol: ModeSolution, x, xp, t: float,
                       tail_tol: float = 1e-14) -> float:
    """Mode kernel sum_k e^(-lambda_k t) u_k(x) u_k(x'), w-normalized.

    Errors out when the available eigenvalue range cannot push the tail
    factor e^(-lambda_max t) below tail_tol.
    """
    lam = sol.lam
    if math.exp(-float(lam[-1]) * t) > tail_tol:
        raise SolverError(f"tail tolerance unreachable at t = {t}: have "
                          f"lambda_max = {lam[-1]:.3g}")
    ux = sol.interp(x)[0]
    uxp = sol.interp(xp)[0]
    return float(np.sum(np.exp(-lam * t) * ux * uxp))


@dataclass
class ExactConeMode:
    """Exact eigendata of one mode of the finite cone (Dirichlet at x=1).

    lambda_k = j_{nu,k}^2, u_k = c_k x^(-(n-2)/2) J_nu(j_{nu,k} x) with c_k
    normalizing against the weight (c x)^(n-1); an independent reference for
    the discretized solver outputs.
    """

    family: WarpFamily
    mu: float
    count: int

    def __post_init__(self):
        ind = indicial_roots(self.family.n, self.mu, self.family.c)
        self.nu = ind.nu
        zeros = np.array(bessel_j_zeros(self.nu, self.count))
        self.lam = zeros ** 2
        self.zeros = zeros
        # ||x^(-(n-2)/2) J_nu(j x)||^2 against c^(n-1) x^(n-1) dx
        #   = c^(n-1) * J_{nu+1}(j)^2 / 2
        n, c = self.family.n, self.family.c
        self.norms = np.sqrt(c ** (n - 1) * jv(self.nu + 1, zeros) ** 2 / 2.0)

    def u(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = self.family.n
        out = np.empty((len(x), self.count))
        for k in range(self.count):
            out[:, k] = (x ** (-(n - 2) / 2.0) * jv(self.nu, self.zeros[k] * x)
                         / self.norms[k])
        return out

    def kernel(self, x, xp, t: float) -> float:
        ux = self.u(x)[0]
        uxp = self.u(xp)[0]
        return float(np.sum(np.exp(-self.lam * t) * ux * uxp))


def coincident_angular_weight(family: WarpFamily, ell: int) -> float:
    """Weight of mode ell in the full kernel at equal cross-section points:
    sum_m |phi_(ell,m)(y)|^2 = multiplicity / vol(Y) on round spheres."""
    vol = family.cross_section.volume
    if vol is None:
        raise SolverError("cross-section volume required for full kernels")
    return family.cross_section.multiplicity(ell) / vol


# ---------------------------------------------------------------------------
# Crank-Nicolson time stepping (independent oracle)
# ---------------------------------------------------------------------------

def crank_nicolson_mode(op, grid: SLGrid, xp: float, times: Sequence[float],
                        probe_x: float, substeps: int = 400) -> List[float]:
    """Mode kernel column u(t) = H(., xp, t) by Crank-Nicolson stepping.

    Starts from a discrete delta at xp (w-weighted), marches with uniform
    steps between the requested times and reads off the probe value.
    """
    from .spectral import _assemble
    lo, hi = op.domain()
    xs = grid.nodes(lo, hi)
    ptil, qtil, wtil = op.substituted_coefficients()
    left_dir = op.parity == "odd" if op.parity is not None else (
        op.inner_bc == "none" and op.outer_bc == "dirichlet" and lo != 0.0)
    diag, off, mass, idx = _assemble(ptil, qtil, wtil, xs, left_dir,
                                     op.outer_bc == "dirichlet")
    xn = xs[idx]
    j0 = int(np.argmin(np.abs(xn - xp)))
    u = np.zeros(len(xn))
    u[j0] = 1.0 / mass[j0]
    g = op.gamma()

    out = []
    t_prev = 0.0
    band_cache: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}
    for t in times:
        dt = (t - t_prev) / substeps
        if dt <= 0:
            raise SolverError("times must be increasing")
        key = round(dt, 15)
        if key not in band_cache:
            ab_l = np.zeros((3, len(xn)))
            ab_l[0, 1:] = 0.5 * dt * off / mass[:-1]
            ab_l[1] = 1.0 + 0.5 * dt * diag / mass
            ab_l[2, :-1] = 0.5 * dt * off / mass[1:]
            band_cache[key] = ab_l
        ab_l = band_cache[key]
        for _ in range(substeps):
            rhs = u - 0.5 * dt / mass * (
                np.r_[0.0, off * u[:-1]] + diag * u + np.r_[off * u[1:], 0.0])
            u = solve_banded((1, 1), ab_l, rhs)
        t_prev = t
        val = np.interp(probe_x, xn, u)
        if g != 0.0:
            # v-space kernel back to the function kernel: H = x^g x'^g H_v
            val *= probe_x ** g * xn[j0] ** g
        out.append(float(val))
    return out


# ---------------------------------------------------------------------------
# kernel samples
# ---------------------------------------------------------------------------

@dataclass
class KernelSample:
    """Sampled kernel values with regime and normalization tags."""

    points: List[Tuple[float, float]]
    times: List[float]
    values: np.ndarray  # shape (len(points), len(times))
    regime: str  # interior_F0101 | scaled_F1010 | side
    normalization: str = "function_kernel"

    def symmetry_defect(self, lookup: Dict[Tuple[float, float, float], float]) -> float:
        out = 0.0
        for (x, xp), _ in zip(self.points, range(len(self.points))):
            for t in self.times:
                a = lookup.get((x, xp, t))
                b = lookup.get((xp, x, t))
                if a is not None and b is not None:
                    out = max(out, abs(a - b) / max(1e-300, abs(a), abs(b)))
        return out

    def positivity_ok(self) -> bool:
        return bool(np.all(self.values > -1e-12 * np.max(np.abs(self.values))))


# ---------------------------------------------------------------------------
# degeneration probes
# ---------------------------------------------------------------------------

@dataclass
class ProbeResult:
    regime: str
    schedule: List[float]
    times: List[float]
    model_values: np.ndarray          # len(times)
    eps_values: np.ndarray            # len(schedule) x len(times)
    distances: np.ndarray             # len(schedule)
    strictly_decreasing: bool
    final_relative: float
    meta: dict = field(default_factory=dict)


def interior_probe(family: WarpFamily, schedule: Sequence[float],
                   x: float = 0.5, xp: float = 0.5,
                   times: Sequence[float] = (0.1, 0.25, 0.5, 1.0),
                   ell_max: int = 8, grid: Optional[SLGrid] = None,
                   count: int = 60) -> ProbeResult:
    """Fixed-point convergence of the family kernel to the conic limit.

    H_eps is the eigenexpansion kernel of (M, g_eps); the limit H_0 is the
    exact Bessel eigenexpansion of the cone.  The distance is the max over
    the time grid of |H_eps - H_0|.
    """
    grid = grid or SLGrid(2048)
    times = list(times)
    weights = [coincident_angular_weight(family, ell) for ell in range(ell_max + 1)]

    h0_modes = [ExactConeMode(family, family.cross_section.mu(ell), 160)
                for ell in range(ell_max + 1)]
    model = np.array([
        sum(w * m.kernel(x, xp, t) for w, m in zip(weights, h0_modes))
        for t in times])

    eps_vals = np.empty((len(schedule), len(times)))
    for i, eps in enumerate(schedule):
        mode_sols = []
        for ell in range(ell_max + 1):
            op = family.radial_operator(family.cross_section.mu(ell), eps)
            mode_sols.append(solve_mode(op, grid, count))
        for j, t in enumerate(times):
            eps_vals[i, j] = sum(
                w * heat_from_spectrum(sol, x, xp, t)
                for w, sol in zip(weights, mode_sols))

    # per-time relative gaps: the kernel decays like e^(-lambda_1 t), so a
    # uniform-in-t statement must be relative to H_0(t)
    rel = np.abs(eps_vals - model[None, :]) / np.abs(model[None, :])
    dists = np.max(rel, axis=1)
    dec = bool(np.all(np.diff(dists) < 0))
    final_rel = float(dists[-1])
    return ProbeResult("interior_F0101", list(schedule), times, model,
                       eps_vals, dists, dec, final_rel)


def _truncated_mode_solution(family: WarpFamily, mu: float, radius: float,
                             h: float, count: int) -> ModeSolution:
    op = family.radial_operator_fixed_space(mu, radius)
    n = int(round(radius / h))
    if abs(n * h - radius) > 1e-12:
        raise SolverError("truncation radius must be a grid multiple")
    n = max(n, 16)
    return solve_mode(op, SLGrid(n), min(count, n // 4))


def scaled_probe(family: WarpFamily, schedule: Sequence[float],
                 rho: float = 1.0, rhop: float = 1.0, tau: float = 0.5,
                 ell_max: int = 8, h: float = 1.0 / 128.0,
                 ref_radius: float = 6.0, count: int = 60,
                 monitor_truncation: bool = True,
                 monitor_rel_tol: Optional[float] = None) -> ProbeResult:
    """Front-face convergence of the rescaled kernels to the fixed space.

    For the capped profile the rescaled family eps^n H_eps(eps rho,
    eps rho', eps^2 tau) equals exactly the kernel of the fixed complete
    space truncated at radius 1/eps (the scaling identity is exact), so the
    probe distance is the domain-monotone wall effect, computed on matched
    uniform grids.  Every 1/eps must be a multiple of the grid step h.
    """
    if family.profile != "capped":
        raise SolverError("the scaled probe requires the capped profile "
                          "(exact rescaling)")
    weights = [coincident_angular_weight(family, ell) for ell in range(ell_max + 1)]
    mus = [family.cross_section.mu(ell) for ell in range(ell_max + 1)]

    def kernel_on(radius: float) -> float:
        total = 0.0
        for w, mu in zip(weights, mus):
            sol = _truncated_mode_solution(family, mu, radius, h, count)
            total += w * heat_from_spectrum(sol, rho, rhop, tau)
        return total

    ref = kernel_on(ref_radius)
    drift = 0.0
    if monitor_rel_tol is None:
        # cross-domain h^2 discretization errors do not cancel exactly and
        # floor the monitor near 0.1 h^2 of the value; genuine truncation
        # influence shows up orders of magnitude above that
        monitor_rel_tol = max(1e-6, 0.2 * h * h)
    if monitor_truncation:
        ref2 = kernel_on(2.0 * ref_radius)
        drift = abs(ref2 - ref)
        if drift > monitor_rel_tol * abs(ref2):
            raise SolverError(
                f"truncation-domain influence detected: reference radius "
                f"{ref_radius} moves the probe by {drift:.3e}")
        ref = ref2

    vals = np.array([kernel_on(1.0 / eps) for eps in schedule])
    dists = np.abs(vals - ref) / abs(ref)
    dec = bool(np.all(np.diff(dists) < 0))
    final_rel = float(dists[-1])
    return ProbeResult("scaled_F1010", list(schedule), [tau],
                       np.array([ref]), vals[:, None], dists, dec, final_rel,
                       meta={"h": h, "ref_radius": ref_radius,
                             "reference_drift": drift,
                             "identity": "eps^n H_eps(eps rho, eps rho', "
                                         "eps^2 tau) = H_{Z cut at 1/eps}"})


def scaling_identity_defect(family: WarpFamily, s: float,
                            x: float = 0.5, xp: float = 0.4, t: float = 0.3,
                            mu: float = 0.0, grid_n: int = 1024,
                            count: int = 80) -> float:
    """Exactness of H_(s^2 g)(z, z', t) = s^(-n) H_g(z, z', t/s^2).

    Both sides come from independent eigensolves on [0, 1] and [0, s]; on
    the flat-ball family with dyadic s the discretizations scale exactly,
    so the defect is pure solver roundoff.
    """
    if family.profile != "capped":
        raise SolverError("scaling identity check uses the capped family")
    n = family.n
    op1 = family.radial_operator(mu, 0.0)
    sol1 = solve_mode(op1, SLGrid(grid_n), count)
    lhs_ref = heat_from_spectrum(sol1, x, xp, t / s ** 2) * s ** (-n)

    op_s = family.radial_operator_fixed_space(mu, s)
    # identical family at eps = 0 ... rescaled ball of radius s
    sol_s = solve_mode(op_s, SLGrid(grid_n), count)
    lhs = heat_from_spectrum(sol_s, x * s, xp * s, t)
    scale = max(abs(lhs), abs(lhs_ref))
    return abs(lhs - lhs_ref) / scale


# ---------------------------------------------------------------------------
# fiber model solution checks
# ---------------------------------------------------------------------------

def g0_fiber_check(n: int = 1, h: float = 1e-3, length: float = 10.0) -> dict:
    """Residual checks of the fiber model solution at the diagonal face.

    The normalized Gaussian G0 = (4 pi)^(-n/2) exp(-|X|^2/4) must satisfy
    [-Laplacian - (R + n)/2] G0 = 0 (R the radial vector field) and its
    unit-normalized Fourier transform solves (xi d_xi + 2 |xi|^2) u = 0 with
    u(0) = 1.  Both residuals are measured by second-order differencing.
    """
    if n != 1:
        raise SolverError("fiber grids implemented for n = 1")
    m = int(round(length / h))
    xs = np.linspace(-length, length, 2 * m + 1)
    g0 = (4.0 * math.pi) ** (-n / 2.0) * np.exp(-xs ** 2 / 4.0)

    lap = (np.roll(g0, -1) - 2 * g0 + np.roll(g0, 1)) / h ** 2
    dg = (np.roll(g0, -1) - np.roll(g0, 1)) / (2 * h)
    residual = (-lap - 0.5 * (xs * dg + n * g0))[2:-2]
    pde_res = float(np.max(np.abs(residual)))

    mass = float(np.trapezoid(g0, xs))
    xi = np.linspace(-6.0, 6.0, 2401)
    u_hat = np.array([np.trapezoid(g0 * np.cos(x_ * xs), xs) for x_ in xi]) / mass
    du = np.gradient(u_hat, xi)
    t_res = float(np.max(np.abs(xi * du + 2 * xi ** 2 * u_hat)))
    sym = float(np.max(np.abs(g0 - g0[::-1])))
    return {"pde_residual": pde_res, "transform_residual": t_res,
            "normalized_mass": mass, "u_hat_at_0": float(
                np.interp(0.0, xi, u_hat)), "symmetry_defect": sym}


def g0_refinement_ratio(n: int = 1, h: float = 2e-3, length: float = 10.0) -> float:
    """PDE residual ratio under halving h: second order gives ~4."""
    r1 = g0_fiber_check(n, h, length)["pde_residual"]
    r2 = g0_fiber_check(n, h / 2, length)["pde_residual"]
    return r1 / r2


# ---------------------------------------------------------------------------
# time convolution and the Volterra series
# ---------------------------------------------------------------------------

@dataclass
class GridKernel:
    """Kernel sampled on (space, space, time) with spatial weights."""

    values: np.ndarray        # (nx, nx, nt)
    t: np.ndarray             # uniform, starting at 0
    weights: np.ndarray       # spatial quadrature weights (nx,)

    @staticmethod
    def scalar(profile: Callable[[np.ndarray], np.ndarray], t: np.ndarray) -> "GridKernel":
        vals = np.asarray(profile(t), dtype=float)[None, None, :]
        return GridKernel(vals, np.asarray(t, dtype=float), np.array([1.0]))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def t_convolve(a: GridKernel, b: GridKernel) -> GridKernel:
    """(A * B)(z, z', t) = int_0^t int A(z, w, t-s) B(w, z', s) dw ds.

    Composite trapezoidal rule in s on the shared uniform time grid; the
    spatial integral is the weighted matrix product.
    """
    if a.values.shape != b.values.shape or len(a.t) != len(b.t):
        raise ValueError("kernels must share their sample grids")
    dt = a.t[1] - a.t[0]
    if not np.allclose(np.diff(a.t), dt):
        raise ValueError("time grid must be uniform")
    nx, _, nt = a.values.shape
    w = a.weights
    out = np.zeros_like(a.values)
    for k in range(nt):
        acc = np.zeros((nx, nx))
        for l in range(k + 1):
            coeff = 0.5 if l in (0, k) else 1.0
            acc += coeff * (a.values[:, :, k - l] * w[None, :]) @ b.values[:, :, l]
        out[:, :, k] = acc * dt
    return GridKernel(out, a.t, a.weights)


@dataclass
class VolterraReport:
    sup_norms: List[float]
    ratios: List[float]
    fitted_c: float
    factorial_decay: bool
    envelope_ok: bool


def volterra_neumann(k: GridKernel, j_max: int) -> VolterraReport:
    """Iterated convolution powers K^(*j) with sup norms and decay verdict.

    Fits the smallest C-hat with sup|K^(*j)| <= C * C-hat^j T^j / (j+1)!
    (C fixed by j = 1) and runs the ratio test sup_(j+1)/sup_j <= T/(j+1).
    """
    T = float(k.t[-1])
    sups = [k.sup_norm()]
    cur = k
    for _ in range(2, j_max + 1):
        cur = t_convolve(k, cur)
        sups.append(cur.sup_norm())
    ratios = [sups[i + 1] / sups[i] if sups[i] > 0 else 0.0
              for i in range(len(sups) - 1)]
    growth = any(r > max(1.0, T) for r in ratios[1:])
    if growth:
        raise SolverError("growth detected: kernel is not Volterra-regular")
    c0 = sups[0] * 2.0 / max(T, 1e-300)
    chat = 0.0
    for j in range(2, len(sups) + 1):
        s = sups[j - 1]
        if s <= 0.0:
            continue
        chat = max(chat, (s * math.factorial(j + 1)
                          / (c0 * T ** j)) ** (1.0 / (j - 1)))
    # ratio_j = sup_(j+1)/sup_j against the t^j/(j+1)! display: < T/j
    envelope_ok = all(ratios[i] < T / (i + 1) * (1.0 + 1e-12)
                      for i in range(len(ratios)))
    factorial = all(ratios[i + 1] < ratios[i] * (1.0 + 1e-12)
                    for i in range(len(ratios) - 1))
    return VolterraReport(sups, ratios, chat, factorial, envelope_ok)


# exact scalar convolution of polynomial kernels ----------------------------

@dataclass(frozen=True)
class PolyKernel:
    """Scalar kernel polynomial in t with exact rational coefficients."""

    coeffs: Tuple[Fraction, ...]  # coeffs[a] multiplies t^a

    @staticmethod
    def monomial(power: int, coeff=1) -> "PolyKernel":
        c = [Fraction(0)] * (power + 1)
        c[power] = Fraction(coeff)
        return PolyKernel(tuple(c))

    def convolve(self, other: "PolyKernel") -> "PolyKernel":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs))
        for a, ca in enumerate(self.coeffs):
            if not ca:
                continue
            for b, cb in enumerate(other.coeffs):
                if not cb:
                    continue
                # int_0^t (t-s)^a s^b ds = a! b!/(a+b+1)! t^(a+b+1)
                beta = Fraction(math.factorial(a) * math.factorial(b),
                                math.factorial(a + b + 1))
                out[a + b + 1] += ca * cb * beta
        return PolyKernel(tuple(out))

    def power(self, j: int) -> "PolyKernel":
        out = self
        for _ in range(j - 1):
            out = out.convolve(self)
        return out

    def __call__(self, t: float) -> float:
        return float(sum(float(c) * t ** a for a, c in enumerate(self.coeffs)))


# ---------------------------------------------------------------------------
# maximum principle check
# ---------------------------------------------------------------------------

def max_principle_check(e_samples: np.ndarray, k_samples: np.ndarray,
                        t_grid: np.ndarray, c: float, big_n: int,
                        horizon: float, eps: float) -> Tuple[bool, Optional[dict]]:
    """Verify the parabolic-envelope conclusion |E|^2 <= e^T C eps^2 t^(2N).

    Requires the source bound |K|^2 <= C eps^2 t^(2N) on the samples first;
    returns (ok, witness) with the first violating sample otherwise.
    """
    t = np.asarray(t_grid, dtype=float)
    envelope = c * eps ** 2 * t ** (2 * big_n)
    if np.any(np.asarray(k_samples) ** 2 > envelope * (1 + 1e-12)):
        i = int(np.argmax(np.asarray(k_samples) ** 2 - envelope))
        raise ValueError(f"precondition |K|^2 <= C eps^2 t^(2N) fails at "
                         f"t = {t.flat[i]}")
    bound = math.exp(horizon) * envelope
    sq = np.asarray(e_samples) ** 2
    bad = sq > bound * (1 + 1e-12)
    if np.any(bad):
        idx = np.unravel_index(int(np.argmax(sq - bound)), sq.shape)
        return False, {"index": idx, "t": float(t[idx[-1]]),
                       "value_sq": float(sq[idx]), "bound": float(bound[idx[-1]])}
    return True, None
