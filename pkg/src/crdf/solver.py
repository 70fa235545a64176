"""Lagrangian solver for the causal rate distortion function.

For a fixed multiplier s <= 0 the optimal causal chain satisfies the
exponential-tilt fixed point

    q_i(y_i | y^{i-1}, x^i)  propto  exp(s * rho_i(x^i, y^i)) * nu_i(y_i | y^{i-1})

where nu_i are the chain-rule conditionals of the induced output process.
The solver alternates the tilt update with the output-marginal update until
the kernel stops moving, sweeps s to trace the rate-distortion curve, and
cross-checks the closed-form rate expression

    R = s*D*log2(e) - (1/(n+1)) * sum_i E[ log2 sum_{y_i} e^{s rho_i} nu_i ]

against the directed-information rate at every converged point.

Conventions: s multiplies rho in natural units inside the exponent; all
reported rates are bits per symbol and all distortions are normalized by
(n+1).  The classical (non-causal) solver on the trajectory alphabet is
provided as a baseline for rate-loss-due-to-causality reports.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import indexing as ix
from .distortion import DistortionModel, average_distortion, d_max_min_sequence
from .information import (
    LOG2E,
    directed_information_of_joint,
    mutual_information,
)
from .probability import (
    CausalKernelChain,
    FinitePmf,
    GeneralKernel,
    JointMeasure,
    OutputProcess,
    ShapeError,
    SourceModel,
    make_joint,
    output_marginal,
)


@dataclass(frozen=True)
class SolverOptions:
    """Iteration controls for the fixed-point solvers."""

    tol: float = 1e-9
    max_iters: int = 20000
    init: str = "uniform"          # "uniform" | "random"
    seed: Optional[int] = None
    tie_stationary: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.init not in ("uniform", "random"):
            raise ValueError("init must be 'uniform' or 'random'")


@dataclass(frozen=True)
class RateDistortionPoint:
    """One Lagrangian solution: multiplier, achieved (D, R), and the kernel."""

    s: float
    distortion: float
    rate: float
    rate_formula: float
    iterations: int
    converged: bool
    residual: float = math.nan
    chain: Optional[CausalKernelChain] = None
    output: Optional[OutputProcess] = None
    kernel: Optional[GeneralKernel] = None

    def lagrangian(self) -> float:
        """R - s*log2(e)*D in bits; the sD constant of the dual is dropped."""
        return self.rate - self.s * LOG2E * self.distortion


@dataclass(frozen=True)
class RDCurve:
    """Sweep result, ordered by s descending (s = 0 end first)."""

    points: tuple
    d_max_reported: float

    def converged_points(self):
        return [p for p in self.points if p.converged]


def _infer_ny(dist: DistortionModel) -> int:
    if dist.is_single_letter:
        return dist.letter_costs.shape[1]
    return dist.tables[0].shape[1]


class _Workspace:
    """Cached index maps and tilt tables for one (source, dist, s) problem."""

    def __init__(self, source: SourceModel, dist: DistortionModel, s: float,
                 ny: int):
        if source.horizon != dist.horizon:
            raise ShapeError("source and distortion horizons differ")
        n = source.horizon
        nx = source.alphabet
        self.n, self.nx, self.ny = n, nx, ny
        self.mu = source.joint_pmf()
        xs = ix.all_indices(nx, n + 1)
        ys = ix.all_indices(ny, n + 1)
        self.hy = [ix.prefix(ys, ny, n + 1, i) for i in range(n + 1)]
        self.hx = [ix.prefix(xs, nx, n + 1, i + 1) for i in range(n + 1)]
        self.ylet = [ix.letter_at(ys, ny, n + 1, i) for i in range(n + 1)]
        # tilt tables exp(s*rho_i) laid out as (y^{i-1}, x^i, y_i)
        self.exp_cost = []
        self.stage_rho = []
        for i in range(n + 1):
            rho = dist.stage_cost(i, nx, ny)          # (nx^(i+1), ny^(i+1))
            rho = rho.reshape(nx ** (i + 1), ny**i, ny).transpose(1, 0, 2)
            self.stage_rho.append(rho)
            self.exp_cost.append(np.exp(s * rho))

    def uniform_conditionals(self):
        return [np.full((self.ny**i, self.ny), 1.0 / self.ny)
                for i in range(self.n + 1)]

    def random_conditionals(self, rng: np.random.Generator):
        conds = []
        for i in range(self.n + 1):
            rows = rng.random((self.ny**i, self.ny)) + 0.1
            conds.append(rows / rows.sum(axis=1, keepdims=True))
        return conds

    def tilt(self, nu_conds):
        """Exponential-tilt kernel update for fixed output conditionals."""
        stages = []
        for E, nu in zip(self.exp_cost, nu_conds):
            w = E * nu[:, None, :]
            stages.append(w / w.sum(axis=2, keepdims=True))
        return stages

    def joint(self, stages) -> np.ndarray:
        K = np.ones((self.nx ** (self.n + 1), self.ny ** (self.n + 1)))
        for i in range(self.n + 1):
            K *= stages[i][self.hy[i][None, :], self.hx[i][:, None],
                           self.ylet[i][None, :]]
        return self.mu[:, None] * K

    def conditionals(self, pmf: np.ndarray):
        """Chain-rule output conditionals (uniform rows on dead histories)."""
        ny, n = self.ny, self.n
        nu = pmf.sum(axis=0)
        masses = [nu]
        for k in range(n, -1, -1):
            masses.append(masses[-1].reshape(ny**k, ny).sum(axis=1))
        masses.reverse()
        conds = []
        for i in range(n + 1):
            parent = masses[i]
            child = masses[i + 1].reshape(ny**i, ny)
            dead = parent <= 1e-15
            rows = child / np.where(dead, 1.0, parent)[:, None]
            rows[dead] = 1.0 / ny
            conds.append(rows)
        return conds

    def stage_history_weights(self, pmf: np.ndarray, i: int) -> np.ndarray:
        """Joint marginal over (x^i, y^{i-1}), shape (nx^(i+1), ny^i)."""
        n, nx, ny = self.n, self.nx, self.ny
        return pmf.reshape(nx ** (i + 1), nx ** (n - i),
                           ny**i, ny ** (n + 1 - i)).sum(axis=(1, 3))


def _rate_formula(ws: _Workspace, nu_conds, pmf: np.ndarray, s: float,
                  d_norm: float) -> float:
    n = ws.n
    acc = 0.0
    for i in range(n + 1):
        Z = (ws.exp_cost[i] * nu_conds[i][:, None, :]).sum(axis=2)  # (hy, hx)
        W = ws.stage_history_weights(pmf, i)                         # (hx, hy)
        mask = W > 0
        acc += float(np.sum(W[mask] * np.log2(Z.T[mask])))
    return s * LOG2E * d_norm - acc / (n + 1)


def solve_fixed_s(source: SourceModel, dist: DistortionModel, s: float,
                  opts: SolverOptions = SolverOptions(),
                  ny: Optional[int] = None,
                  warm_start=None) -> RateDistortionPoint:
    """Solve the fixed-s Lagrangian problem by alternating minimization.

    ``warm_start`` may carry output conditionals from a neighboring solve.
    Non-convergence within ``max_iters`` returns converged=False rather than
    raising.
    """
    if s > 0:
        raise ValueError("Lagrange multiplier s must be <= 0")
    if opts.tie_stationary:
        return _solve_tied(source, dist, s, opts, ny)
    ny = _infer_ny(dist) if ny is None else ny
    ws = _Workspace(source, dist, s, ny)
    if warm_start is not None:
        nu = [np.array(c, dtype=float) for c in warm_start]
    elif opts.init == "random":
        nu = ws.random_conditionals(np.random.default_rng(opts.seed))
    else:
        nu = ws.uniform_conditionals()

    q_prev = None
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        q = ws.tilt(nu)
        if q_prev is not None:
            delta = max(float(np.max(np.abs(a - b)))
                        for a, b in zip(q, q_prev))
            if delta < opts.tol:
                converged = True
                break
        pmf = ws.joint(q)
        nu = ws.conditionals(pmf)
        q_prev = q

    pmf = ws.joint(q)
    nu_final = ws.conditionals(pmf)
    q_next = ws.tilt(nu_final)
    residual = max(float(np.max(np.abs(a - b))) for a, b in zip(q_next, q))

    chain = CausalKernelChain.from_stages(q, ws.nx, ws.ny)
    joint = JointMeasure(nx=ws.nx, ny=ws.ny, horizon=ws.n, pmf=pmf)
    output = output_marginal(joint)
    d_norm = average_distortion(joint, dist)
    rate = directed_information_of_joint(joint) / (ws.n + 1)
    formula = _rate_formula(ws, nu_final, pmf, s, d_norm)
    return RateDistortionPoint(
        s=s, distortion=d_norm, rate=rate, rate_formula=formula,
        iterations=iterations, converged=converged, residual=residual,
        chain=chain, output=output)


def _solve_tied(source: SourceModel, dist: DistortionModel, s: float,
                opts: SolverOptions, ny: Optional[int]) -> RateDistortionPoint:
    """Stationary-kernel variant: one per-letter channel shared by all stages.

    The per-letter channel is the classical tilt fixed point against the
    time-averaged source letter marginal.  The closed-form rate identity is
    exact only for the untied solver; here rate and distortion are evaluated
    exactly on the induced joint and rate_formula is reported from the same
    per-letter expression for reference.
    """
    if not dist.is_single_letter:
        raise ValueError("tie_stationary requires a single-letter distortion")
    ny = _infer_ny(dist) if ny is None else ny
    n, nx = source.horizon, source.alphabet
    p_bar = np.mean([source.letter_marginal(i) for i in range(n + 1)], axis=0)
    E = np.exp(s * dist.letter_costs)
    nu = np.full(ny, 1.0 / ny)
    W_prev = None
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        W = E * nu[None, :]
        W /= W.sum(axis=1, keepdims=True)
        if W_prev is not None and float(np.max(np.abs(W - W_prev))) < opts.tol:
            converged = True
            break
        nu = p_bar @ W
        W_prev = W
    residual_W = E * (p_bar @ W)[None, :]
    residual_W /= residual_W.sum(axis=1, keepdims=True)
    residual = float(np.max(np.abs(residual_W - W)))

    chain = CausalKernelChain.memoryless(W, n)
    joint = make_joint(source, chain)
    output = output_marginal(joint)
    d_norm = average_distortion(joint, dist)
    rate = directed_information_of_joint(joint) / (n + 1)
    Z = (E * nu[None, :]).sum(axis=1)
    formula = s * LOG2E * d_norm - float(p_bar @ np.log2(Z))
    return RateDistortionPoint(
        s=s, distortion=d_norm, rate=rate, rate_formula=formula,
        iterations=iterations, converged=converged, residual=residual,
        chain=chain, output=output)


def default_s_grid(num: int = 40, smallest: float = 1e-3,
                   largest: float = 20.0) -> list:
    """Log-spaced negative multipliers plus the zero-rate endpoint s=0."""
    mags = np.logspace(math.log10(smallest), math.log10(largest), num)
    return sorted([0.0] + [-float(m) for m in mags], reverse=True)


def sweep(source: SourceModel, dist: DistortionModel,
          s_grid: Sequence[float], opts: SolverOptions = SolverOptions(),
          ny: Optional[int] = None, mode: str = "warm",
          threads: Optional[int] = None) -> RDCurve:
    """Trace the rate-distortion curve over a grid of multipliers.

    ``mode='warm'`` runs sequentially from s=0 downward, warm-starting each
    solve from the previous fixed point; ``mode='cold'`` solves every point
    independently (optionally across threads).  Both modes must agree at
    every converged point to within solver tolerance.
    """
    if len(s_grid) == 0:
        raise ValueError("empty multiplier grid")
    grid = sorted(set(float(s) for s in s_grid), reverse=True)
    ny_eff = _infer_ny(dist) if ny is None else ny
    points = []
    if mode == "warm":
        warm = None
        for s in grid:
            p = solve_fixed_s(source, dist, s, opts, ny=ny_eff,
                              warm_start=warm)
            points.append(p)
            if p.output is not None and not p.output.is_memoryless:
                warm = p.output.conditionals
    elif mode == "cold":
        def solve_one(s):
            return solve_fixed_s(source, dist, s, opts, ny=ny_eff)
        if threads and threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                points = list(pool.map(solve_one, grid))
        else:
            points = [solve_one(s) for s in grid]
    else:
        raise ValueError("mode must be 'warm' or 'cold'")
    dmax, _ = d_max_min_sequence(source, dist, ny=ny_eff)
    return RDCurve(points=tuple(points), d_max_reported=dmax)


def classical_ba(source: SourceModel, dist: DistortionModel, s: float,
                 opts: SolverOptions = SolverOptions(),
                 ny: Optional[int] = None) -> RateDistortionPoint:
    """Classical Blahut-Arimoto on the trajectory alphabet (no causality).

    Optimizes an unconstrained kernel q(y^n | x^n) at multiplier s and
    reports the per-symbol (R, D) pair; the gap to the causal solution is
    the rate loss due to causality.
    """
    if s > 0:
        raise ValueError("Lagrange multiplier s must be <= 0")
    ny = _infer_ny(dist) if ny is None else ny
    n, nx = source.horizon, source.alphabet
    mu = source.joint_pmf()
    C = dist.total_cost_matrix(nx, ny)
    E = np.exp(s * C)
    Ny = ny ** (n + 1)
    nu = np.full(Ny, 1.0 / Ny)
    q_prev = None
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        q = E * nu[None, :]
        q /= q.sum(axis=1, keepdims=True)
        if q_prev is not None and float(np.max(np.abs(q - q_prev))) < opts.tol:
            converged = True
            break
        nu = mu @ q
        q_prev = q
    nu_final = mu @ q
    q_next = E * nu_final[None, :]
    q_next /= q_next.sum(axis=1, keepdims=True)
    residual = float(np.max(np.abs(q_next - q)))

    kernel = GeneralKernel(nx=nx, ny=ny, horizon=n, table=q)
    joint = JointMeasure(nx=nx, ny=ny, horizon=n, pmf=mu[:, None] * q)
    d_norm = average_distortion(joint, dist)
    rate = mutual_information(joint) / (n + 1)
    Z = (E * nu_final[None, :]).sum(axis=1)
    formula = s * LOG2E * d_norm - float(mu @ np.log2(Z)) / (n + 1)
    return RateDistortionPoint(
        s=s, distortion=d_norm, rate=rate, rate_formula=formula,
        iterations=iterations, converged=converged, residual=residual,
        kernel=kernel, output=output_marginal(joint))


def _conditional_matrix(kernel) -> np.ndarray:
    if isinstance(kernel, CausalKernelChain):
        return kernel.conditional_matrix()
    if isinstance(kernel, GeneralKernel):
        return kernel.table
    raise TypeError("expected a CausalKernelChain or GeneralKernel")


def mutual_information_of_kernel(source: SourceModel, kernel) -> float:
    """I(X^n; Y^n) of mu paired with an arbitrary kernel, in bits."""
    K = _conditional_matrix(kernel)
    mu = source.joint_pmf()
    joint = JointMeasure(nx=source.alphabet, ny=int(round(K.shape[1] ** (1.0 / (source.horizon + 1)))),
                         horizon=source.horizon, pmf=mu[:, None] * K)
    return mutual_information(joint)


def gateaux_derivative(source: SourceModel, q0, q1) -> float:
    """Directional derivative of the information functional at q0 toward q1.

    Evaluates sum_{x,y} mu(x) (q1 - q0)(y|x) log2(q0(y|x) / nu0(y)) exactly;
    q0 must be strictly positive on every row the source reaches.
    """
    K0 = _conditional_matrix(q0)
    K1 = _conditional_matrix(q1)
    if K0.shape != K1.shape:
        raise ShapeError("q0 and q1 have different shapes")
    mu = source.joint_pmf()
    if mu.shape[0] != K0.shape[0]:
        raise ShapeError("source and kernel shapes differ")
    reachable = mu > 0
    if np.any(K0[reachable] <= 0):
        raise ValueError("q0 must be strictly positive on reachable rows")
    nu0 = mu @ K0
    integrand = np.log2(K0 / nu0[None, :])
    return float(np.sum(mu[:, None] * (K1 - K0) * integrand))


@dataclass(frozen=True)
class PropertiesReport:
    """Curve-shape checks: monotonicity, convexity, zero-rate threshold."""

    monotone_ok: bool
    convex_ok: bool
    zero_rate_at_dmax_ok: bool
    positive_rate_below_dmax_ok: bool
    d_max: float
    num_points: int

    @property
    def passed(self) -> bool:
        return (self.monotone_ok and self.convex_ok
                and self.zero_rate_at_dmax_ok
                and self.positive_rate_below_dmax_ok)


def properties_report(curve: RDCurve, source: SourceModel,
                      dist: DistortionModel,
                      monotone_tol: float = 1e-8,
                      convex_tol: float = 1e-6,
                      zero_rate_tol: float = 1e-6,
                      dmax_margin: float = 1e-3) -> PropertiesReport:
    """Check the structural properties of a swept curve."""
    pts = sorted(curve.converged_points(), key=lambda p: p.distortion)
    if len(pts) < 3:
        raise ValueError("need at least 3 converged points")
    dmax, _ = d_max_min_sequence(source, dist,
                                 ny=pts[0].output.ny if pts[0].output else None)
    D = np.array([p.distortion for p in pts])
    R = np.array([p.rate for p in pts])
    monotone = bool(np.all(np.diff(R) <= monotone_tol))
    convex = True
    for k in range(len(pts) - 2):
        span = D[k + 2] - D[k]
        if span <= 1e-12:
            continue
        lam = (D[k + 1] - D[k]) / span
        if R[k + 1] > (1 - lam) * R[k] + lam * R[k + 2] + convex_tol:
            convex = False
            break
    at_or_above = R[D >= dmax - 1e-12]
    zero_at_dmax = bool(np.all(at_or_above <= zero_rate_tol)) \
        if at_or_above.size else True
    below = R[D < dmax - dmax_margin]
    positive_below = bool(np.all(below > 0)) if below.size else True
    return PropertiesReport(
        monotone_ok=monotone, convex_ok=convex,
        zero_rate_at_dmax_ok=zero_at_dmax,
        positive_rate_below_dmax_ok=positive_below,
        d_max=dmax, num_points=len(pts))


def bisect_s_for_distortion(source: SourceModel, dist: DistortionModel,
                            target: float,
                            opts: SolverOptions = SolverOptions(),
                            ny: Optional[int] = None,
                            s_low: float = -60.0, tol_d: float = 1e-7,
                            max_steps: int = 200) -> RateDistortionPoint:
    """Find the multiplier whose achieved distortion matches ``target``.

    Plain bisection on s (D(s) is non-decreasing in s); the returned point is
    the final solve.
    """
    lo, hi = s_low, 0.0
    warm = None
    point = None
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        point = solve_fixed_s(source, dist, mid, opts, ny=ny, warm_start=warm)
        if point.output is not None and not point.output.is_memoryless:
            warm = point.output.conditionals
        if abs(point.distortion - target) <= tol_d:
            return point
        if point.distortion > target:
            hi = mid
        else:
            lo = mid
    return point
