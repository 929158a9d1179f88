"""Optimal prediction measures on a fixed boundary grid.

Minimizes B_n(nu, z0) over probability weights nu on given nodes.  This is a
smooth convex problem on the simplex: with M(w) the degree-n moment matrix,
the objective is c^H M(w)^{-1} c, the gradient coordinate at node i is
-|K_n(x_i, z0)|^2, and the weighted average of |K_n(., z0)|^2 equals the
objective itself.  The certificate gap max_x |K_n(x, z0)|^2 / B_n(z0) - 1 is
nonnegative on any feasible measure and zero exactly at a grid-optimal one.

The solver is a conditional-gradient scheme built from three step types that
share one certificate primitive (the node scores |K_n(x_i, z0)|^2):

  * a pairwise exchange moving weight from the worst support node to the
    node maximizing the score (ties break to the lowest index), with a
    closed-form exact line search from the rank-two update of the inverse
    moment action;
  * a multiplicative reweighting w_i -> w_i * score_i / B, which is
    self-normalizing and very effective while the iterate is smooth;
  * a Newton polish of the weights restricted to the current support once
    the support is small, which removes the slow endgame the exchange steps
    exhibit when the grid optimum splits an atom across adjacent nodes.

Each candidate is accepted only on certified descent, so the objective is
nonincreasing across iterations.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import bergman, geometry as geo, measure as msr
from .errors import EmptySupport, IllConditioned, NotOptimal, OpmlabError, RankDeficient
from .measure import DiscreteMeasure

_WEIGHT_FLOOR = 1e-8
_WARMUP_STEPS = 100
_NEWTON_STEPS = 40
_GAP_GUARD = 1e-2
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class OpmSolution:
    """Converged (or best-so-far) weights for one degree and prediction point."""

    degree: int
    point: complex
    objective: float
    certificate_gap: float
    iterations: int
    status: str  # "converged" | "max_iters" | "stalled" | "numerical"
    support: np.ndarray = field(repr=False)
    measure: DiscreteMeasure = field(repr=False)
    grid_size: int = 0
    objective_trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


class _Work:
    """Shared arrays for one solve.

    Basis rows are orthonormalized against the uniform starting measure (one
    QR of the equilibrated node Vandermonde), so the moment matrix at the
    start is the identity and stays moderately conditioned along the whole
    weight path.  This keeps certificate arithmetic accurate at degrees
    where raw scaled monomials would have condition numbers near 1e10.
    """

    def __init__(self, nodes: np.ndarray, z0: complex, n: int):
        self.m = nodes.size
        self.n = n
        frame = bergman.frame_for_nodes(nodes)
        V = np.vander(frame.coord(nodes), n + 1, increasing=True)
        colscale = np.linalg.norm(V, axis=0) / np.sqrt(self.m)
        if np.any(colscale == 0.0):
            raise RankDeficient("grid cannot support the requested degree")
        U = V / colscale
        A = U.conj() / np.sqrt(self.m)
        R = np.linalg.qr(A, mode="r")
        diag = np.abs(np.diagonal(R))
        if diag.min() <= 1e-14 * max(1.0, diag.max()):
            raise RankDeficient(
                f"uniform starting measure is degree-{n} rank deficient on this grid"
            )
        cond = np.linalg.cond(R)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise IllConditioned(
                f"degree {n} factorization condition {cond:.3e} exceeds {_COND_LIMIT:.0e}"
            )
        self.U = solve_triangular(R, U.T, trans="C", lower=False, check_finite=False).T
        self.Uc = self.U.conj()
        v0 = np.vander(frame.coord(np.asarray([z0])), n + 1, increasing=True)[0]
        self.c = solve_triangular(
            R, v0 / colscale, trans="C", lower=False, check_finite=False
        )

    def moment_matrix(self, w: np.ndarray) -> np.ndarray:
        M = self.U.T @ (w[:, None] * self.Uc)
        return 0.5 * (M + M.conj().T)

    def core_state(self, M: np.ndarray):
        """Cholesky factor, objective, and kernel coefficient vector y = M^{-1} c."""
        L = np.linalg.cholesky(M)
        zc = solve_triangular(L, self.c, lower=True, check_finite=False)
        B = float(np.real(np.vdot(zc, zc)))
        y = solve_triangular(L, zc, trans="C", lower=True, check_finite=False)
        return L, B, y

    def scores_state(self, M: np.ndarray):
        """Core state plus the node scores |K_n(x_i, z0)|^2."""
        L, B, y = self.core_state(M)
        scores = np.abs(self.Uc @ y) ** 2
        return L, B, y, scores

    def objective_only(self, M: np.ndarray) -> float:
        L = np.linalg.cholesky(M)
        zc = solve_triangular(L, self.c, lower=True, check_finite=False)
        return float(np.real(np.vdot(zc, zc)))


def _fw_step(B: float, A: float, kappa_num: float):
    """Exact minimizer of the toward-vertex objective t -> c^H ((1-t)M + t a a^H)^{-1} c.

    A = a^H M^{-1} a, kappa_num = |a^H M^{-1} c|^2.  Returns (t*, f(t*)) or None.
    """
    kappa = kappa_num / B
    s = A - 1.0

    def f(t: float) -> float:
        den = (1.0 - t) + t * A
        if den <= 0.0 or t >= 1.0:
            return np.inf
        return B / (1.0 - t) - t * kappa_num / ((1.0 - t) * den)

    cands = []
    a2 = s * (s - kappa)
    a1 = 2.0 * s
    a0 = 1.0 - kappa
    if abs(a2) > 1e-300:
        disc = s * kappa * (A - kappa)
        if disc >= 0.0:
            r = np.sqrt(disc)
            cands += [(-s + r) / a2, (-s - r) / a2]
    elif abs(a1) > 1e-300:
        cands.append(-a0 / a1)
    best = None
    for t in cands:
        if 0.0 < t < 1.0 - 1e-12:
            ft = f(t)
            if np.isfinite(ft) and ft < B and (best is None or ft < best[1]):
                best = (t, ft)
    return best


def _pairwise_step(B, S_ss, S_vv, S_sv, k_s, k_v, gamma_max: float):
    """Exact minimizer of the exchange objective along e_s - e_v, step in (0, gamma_max].

    Uses the rank-two update of the inverse-moment action; the stationarity
    condition reduces to a real quadratic.  Returns (gamma*, f(gamma*)) or None.
    """
    P = S_ss * S_vv - abs(S_sv) ** 2
    Q = S_vv - S_ss
    alpha = S_vv * abs(k_s) ** 2 + S_ss * abs(k_v) ** 2 - 2.0 * np.real(np.conj(k_s) * S_sv * k_v)
    beta = abs(k_v) ** 2 - abs(k_s) ** 2

    def f(g: float) -> float:
        q = P * g * g + Q * g - 1.0
        if q >= 0.0:  # moment matrix loses definiteness here
            return np.inf
        return B - g * (alpha * g + beta) / q

    # definiteness persists up to the positive root of q
    if P > 0.0:
        g_crit = (-Q + np.sqrt(Q * Q + 4.0 * P)) / (2.0 * P)
        hi = min(gamma_max, g_crit * (1.0 - 1e-12))
    else:
        hi = gamma_max
    if hi <= 0.0:
        return None
    cands = [hi]
    a2 = alpha * Q - beta * P
    if abs(a2) > 1e-300:
        disc = alpha * alpha + beta * a2
        if disc >= 0.0:
            r = np.sqrt(disc)
            cands += [(alpha + r) / a2, (alpha - r) / a2]
    elif abs(alpha) > 1e-300:
        cands.append(-beta / (2.0 * alpha))
    best = None
    for g in cands:
        if 0.0 < g <= hi:
            fg = f(g)
            if np.isfinite(fg) and fg < B and (best is None or fg < best[1]):
                best = (g, fg)
    return best


def _try_mult(work: _Work, w: np.ndarray, B: float, scores: np.ndarray):
    """Multiplicative reweighting w -> w * score / B, accepted only on descent.

    The update is self-normalizing in exact arithmetic (the weighted mean of
    the scores is B) and its direction has slope -Var_w(score)/B, so it
    descends whenever the scores are not constant on the support.  Returns
    (w, M, B) of the reweighted iterate or None.
    """
    w2 = w * scores / B
    total = w2.sum()
    if not np.isfinite(total) or total <= 0.0:
        return None
    w2 /= total
    M2 = work.moment_matrix(w2)
    try:
        B2 = work.objective_only(M2)
    except np.linalg.LinAlgError:
        return None
    if B2 < B:
        return w2, M2, B2
    return None


def _newton_solve(work: _Work, w, M, L, B, y, idx, gap_tol: float):
    """Equality-constrained Newton on the weights of the node subset `idx`.

    Exchange and reweighting steps identify the support quickly but crawl
    when the grid optimum splits an atom across adjacent nodes (the weight
    Hessian is then nearly singular along the split direction); solving the
    restricted KKT system with H_ij = 2 Re(conj(k_i) S_ij k_j) removes that
    endgame.  Nonnegativity is kept by stepping at most to the first weight
    boundary, and steps are accepted only on strict descent.  Returns
    (w, M, steps, improved) with M consistent with w.
    """
    w = w.copy()
    improved = False
    steps = 0
    for _ in range(_NEWTON_STEPS):
        idx = idx[w[idx] > 1e-15]
        s = idx.size
        if s < 2:
            break
        Us = work.U[idx]
        k = Us.conj() @ y  # k_i = u_i^H M^{-1} c
        sc = np.abs(k) ** 2
        if sc.max() / B - 1.0 <= 0.25 * gap_tol:
            break
        Z = solve_triangular(L, Us.T, lower=True, check_finite=False)
        S2 = Z.conj().T @ Z
        H = 2.0 * np.real(np.conj(k)[:, None] * S2 * k[None, :])
        kkt = np.zeros((s + 1, s + 1))
        kkt[:s, :s] = H + np.eye(s) * (1e-12 * max(1.0, float(H.diagonal().max())))
        kkt[:s, s] = 1.0
        kkt[s, :s] = 1.0
        rhs = np.zeros(s + 1)
        rhs[:s] = sc  # minus the weight gradient
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        dw = sol[:s]
        if not np.all(np.isfinite(dw)) or np.abs(dw).max() == 0.0:
            break
        neg = dw < 0.0
        t = 1.0
        if np.any(neg):
            t = min(1.0, float(np.min(w[idx][neg] / -dw[neg])))
        if t <= 0.0:
            break
        accepted = False
        for _ in range(30):
            delta = t * dw
            M_try = M + (Us.T * delta) @ work.Uc[idx]
            M_try = 0.5 * (M_try + M_try.conj().T)
            try:
                L_try, B_try, y_try = work.core_state(M_try)
            except np.linalg.LinAlgError:
                B_try = np.inf
            if B_try < B:
                w[idx] = np.clip(w[idx] + delta, 0.0, None)
                M, L, B, y = M_try, L_try, B_try, y_try
                accepted = True
                improved = True
                steps += 1
                break
            t *= 0.5
        if not accepted:
            break
    return w, M, steps, improved


def solve_opm(
    nodes: np.ndarray,
    z0: complex,
    n: int,
    *,
    gap_tol: float = 1e-6,
    max_iters: int = 20000,
    trace: bool = False,
) -> OpmSolution:
    """Minimize B_n(., z0) over probability measures on `nodes`.

    Starts from uniform weights.  Returns a converged solution, or the best
    iterate flagged via `status` when the budget or the numerical floor is
    hit.  Weights below 1e-8 are zeroed and the rest renormalized on output
    (unless that would drop the support below n + 1 points).
    """
    nodes = np.asarray(nodes, dtype=complex).ravel()
    if nodes.size < n + 1:
        raise EmptySupport(f"need at least {n + 1} nodes for degree {n}, got {nodes.size}")
    if np.min(np.abs(nodes - z0)) <= 1e-12:
        raise ValueError("prediction point z0 must not be a grid node")

    work = _Work(nodes, z0, n)
    m = work.m
    w = np.full(m, 1.0 / m)
    trace_vals: list[float] | None = [] if trace else None
    it = 0

    # outer rounds re-enter the iteration when the output weight floor
    # nudged the certificate gap back above tolerance
    status = "numerical"
    B = np.nan
    gap = np.nan
    for _ in range(4):
        status, w, it = _iterate(work, w, gap_tol, max_iters, it, trace_vals)
        w, B, gap = _finalize(work, w, n)
        if status != "converged" or gap <= gap_tol or it >= max_iters:
            break

    support = np.flatnonzero(w > 0.0)
    mu = DiscreteMeasure(nodes[support], w[support] / w[support].sum())
    return OpmSolution(
        degree=n,
        point=complex(z0),
        objective=B,
        certificate_gap=gap,
        iterations=it,
        status=status,
        support=support,
        measure=mu,
        grid_size=m,
        objective_trace=np.asarray(trace_vals) if trace else None,
    )


def _iterate(
    work: _Work,
    w: np.ndarray,
    gap_tol: float,
    max_iters: int,
    it: int,
    trace_vals: list[float] | None,
):
    """Run certified-descent steps until converged, stalled, or out of budget.

    Two phases.  A warmup of combined reweighting and exchange steps handles
    iterates whose optimum keeps broad support (it solves the smooth cases
    outright).  It is followed by exchange-method rounds: multiplicative
    cleanup of off-support weight, entry of the max-score node, and a
    restricted Newton solve on the highest-weight nodes.  Every candidate is
    accepted only on exact recomputed descent, so the recorded objective
    trace is nonincreasing.

    `it` carries the iteration count across polish rounds so the total budget
    is shared.  Returns (status, best-gap weights, iterations used).
    """
    best_gap = np.inf
    best_w = w.copy()

    def refresh(wv):
        M = work.moment_matrix(wv)
        return (M, *work.scores_state(M))

    def book(wv, B, scores):
        """Record trace/best and classify; returns gap or a terminal status."""
        nonlocal best_gap, best_w
        if trace_vals is not None:
            trace_vals.append(B)
        gap = float(scores.max() / B - 1.0)
        if gap < best_gap:
            best_gap = gap
            best_w = wv.copy()
        if gap <= gap_tol:
            return "converged"
        if it >= max_iters:
            return "max_iters"
        return gap

    for _ in range(_WARMUP_STEPS):
        try:
            M, L, B, y, scores = refresh(w)
        except np.linalg.LinAlgError:
            return "numerical", best_w, it
        gap = book(w, B, scores)
        if isinstance(gap, str):
            return gap, best_w, it

        s_idx = int(np.argmax(scores))
        masked = np.where(w > 0.0, scores, np.inf)
        v_idx = int(np.argmin(masked))
        us = work.U[s_idx]
        uv = work.U[v_idx]
        Z = solve_triangular(L, np.stack([us, uv], axis=1), lower=True, check_finite=False)
        S_ss = float(np.real(np.vdot(Z[:, 0], Z[:, 0])))
        S_vv = float(np.real(np.vdot(Z[:, 1], Z[:, 1])))
        S_sv = complex(np.vdot(Z[:, 0], Z[:, 1]))
        k_s = complex(np.vdot(us, y))  # u_s^H M^{-1} c
        k_v = complex(np.vdot(uv, y))

        fw = _fw_step(B, S_ss, scores[s_idx])
        pw = None
        if v_idx != s_idx and w[v_idx] > 0.0:
            pw = _pairwise_step(B, S_ss, S_vv, S_sv, k_s, k_v, w[v_idx])
        mult = _try_mult(work, w, B, scores)

        f_fw = fw[1] if fw is not None else np.inf
        f_pw = pw[1] if pw is not None else np.inf
        f_mult = mult[2] if mult is not None else np.inf
        if not np.isfinite(min(f_fw, f_pw, f_mult)):
            break  # no descending warmup step; hand over to Newton rounds
        if f_mult <= min(f_pw, f_fw):
            w = mult[0]
        elif f_pw <= f_fw:
            w = w.copy()
            w[s_idx] += pw[0]
            w[v_idx] -= pw[0]
            if w[v_idx] < 1e-15:
                w[v_idx] = 0.0
        else:
            w = w * (1.0 - fw[0])
            w[s_idx] += fw[0]
        it += 1

    support_cap = max(8 * (work.n + 1), 64)
    no_progress = 0
    prev_B = np.inf
    while True:
        w = w / w.sum()
        try:
            M, L, B, y, scores = refresh(w)
        except np.linalg.LinAlgError:
            return "numerical", best_w, it
        gap = book(w, B, scores)
        if isinstance(gap, str):
            return gap, best_w, it
        if B >= prev_B * (1.0 - 1e-14):
            no_progress += 1
            if no_progress >= 3:
                return "stalled", best_w, it
        else:
            no_progress = 0
        prev_B = B

        # shed score-deficient weight everywhere before the restricted solve
        mult = _try_mult(work, w, B, scores)
        if mult is not None:
            w, M, B = mult
            it += 1
            try:
                L, B, y, scores = work.scores_state(M)
            except np.linalg.LinAlgError:
                return "numerical", best_w, it

        # make sure the max-score node carries weight before Newton sees it
        s_idx = int(np.argmax(scores))
        if w[s_idx] <= 1e-15:
            zs = solve_triangular(L, work.U[s_idx], lower=True, check_finite=False)
            fw = _fw_step(B, float(np.real(np.vdot(zs, zs))), scores[s_idx])
            if fw is not None:
                w = w * (1.0 - fw[0])
                w[s_idx] += fw[0]
                it += 1
                try:
                    M, L, B, y, scores = refresh(w)
                except np.linalg.LinAlgError:
                    return "numerical", best_w, it
                s_idx = int(np.argmax(scores))

        pos = np.flatnonzero(w > 1e-10)
        if pos.size > support_cap:
            pos = pos[np.argsort(w[pos])[-support_cap:]]
        idx = np.union1d(pos, [s_idx]) if w[s_idx] > 0.0 else pos
        w, M, steps, _ = _newton_solve(work, w, M, L, B, y, idx, gap_tol)
        it += max(steps, 1)


def _finalize(work: _Work, w: np.ndarray, n: int):
    """Apply the weight floor and recompute objective and gap exactly."""
    floored = np.where(w < _WEIGHT_FLOOR, 0.0, w)
    if np.count_nonzero(floored) >= n + 1:
        w = floored / floored.sum()
    else:
        w = w / w.sum()
    M = work.moment_matrix(w)
    _, B, _, scores = work.scores_state(M)
    gap = float(scores.max() / B - 1.0)
    return w, B, gap


def certificate_gap(mu: DiscreteMeasure, z0: complex, n: int, grid: np.ndarray) -> float:
    """max over the grid of |K_n(x, z0)|^2 / B_n(mu, z0) - 1.

    Nonnegative for any feasible measure whose support lies in the grid
    (the weighted average of |K_n|^2 over mu equals B_n); zero exactly at a
    grid-optimal prediction measure, where equality holds on the support.
    """
    fac = bergman.factorize(mu, n)
    gap, _, _ = bergman.grid_gap(fac, z0, np.asarray(grid, dtype=complex))
    return gap


@dataclass(frozen=True)
class SupportReport:
    """How close support nodes sit to the max-modulus set of the extremal polynomial."""

    ratios: np.ndarray
    max_deviation: float
    gap: float
    support: np.ndarray


def support_diagnostic(
    sol: OpmSolution, grid: np.ndarray, tau: float = _WEIGHT_FLOOR
) -> SupportReport:
    """Ratios |p_n(node)| / max_grid |p_n| over support nodes carrying weight > tau."""
    if sol.certificate_gap > _GAP_GUARD:
        raise NotOptimal(f"solution gap {sol.certificate_gap:.3e} exceeds {_GAP_GUARD}")
    mu = sol.measure
    keep = mu.weights > tau
    if not np.any(keep):
        raise EmptySupport(f"no support node carries weight above tau = {tau}")
    fac = bergman.factorize(mu, sol.degree)
    grid = np.asarray(grid, dtype=complex)
    kabs_grid = np.abs(bergman.kernel_values(fac, grid, sol.point))
    kabs_sup = np.abs(bergman.kernel_values(fac, mu.nodes[keep], sol.point))
    ratios = kabs_sup / kabs_grid.max()
    return SupportReport(
        ratios=ratios,
        max_deviation=float(1.0 - ratios.min()),
        gap=sol.certificate_gap,
        support=np.flatnonzero(keep),
    )


@dataclass(frozen=True)
class ConvergenceRow:
    """One degree of a convergence study."""

    n: int
    objective: float
    tilde_bergman: float
    growth_ratio: float
    moment_discrepancy: float | None
    gap: float
    iterations: int
    seconds: float
    status: str


def convergence_study(
    geom: geo.CurveGeometry,
    z0: complex,
    degrees: list[int],
    m: int,
    *,
    gap_tol: float = 1e-6,
    max_iters: int = 20000,
    k_moments: int = 8,
    workers: int = 1,
) -> list[ConvergenceRow]:
    """Solve each degree on the canonical m-point grid and tabulate diagnostics.

    Rows that fail numerically are recorded with a status and NaN payload
    rather than aborting the study.  Moment discrepancies compare against the
    discretized balayage of the point mass and exist for curves only.
    """
    grid = msr.discretize_boundary(geom, m)
    phi_abs = abs(geo.exterior_map(geom, z0))
    target = msr.balayage_point_mass(geom, z0, m) if geom.is_curve else None

    def one(nn: int) -> ConvergenceRow:
        t0 = time.perf_counter()
        try:
            sol = solve_opm(grid, z0, nn, gap_tol=gap_tol, max_iters=max_iters)
        except OpmlabError as exc:
            dt = time.perf_counter() - t0
            nan = float("nan")
            return ConvergenceRow(nn, nan, nan, nan, None, nan, 0, dt, f"error: {exc}")
        dt = time.perf_counter() - t0
        tilde = sol.objective / phi_abs ** (2 * nn)
        disc = (
            msr.moment_discrepancy(sol.measure, target, k_moments)
            if target is not None
            else None
        )
        return ConvergenceRow(
            n=nn,
            objective=sol.objective,
            tilde_bergman=tilde,
            growth_ratio=float(np.sqrt(tilde)),
            moment_discrepancy=disc,
            gap=sol.certificate_gap,
            iterations=sol.iterations,
            seconds=dt,
            status=sol.status,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, degrees))
    return [one(nn) for nn in degrees]
