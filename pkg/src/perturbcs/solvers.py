"""First-order conic solvers with verifiable optimality certificates.

All second-order-cone programs here share one shape,

    minimize  h(z)   subject to  Theta z + w = y,  ||w||_2 <= epsilon,

where ``h`` is prox-friendly: the l1 norm, or a linear objective plus a
per-coordinate polyhedral cone indicator.  They are solved by ADMM with
over-relaxation and residual-balanced penalty adaptation; the equality
block is an exact projection through a cached Cholesky factor of
``I + Theta Theta^H``, so ``epsilon = 0`` needs no special casing beyond
the ball collapsing to the origin.

Every result carries a certificate rather than trusting iteration
counts: the affine-consistency slack of the returned iterate, and a
duality gap evaluated at a dual point recovered from the splitting
multiplier and rescaled into the dual-feasible set.  The box-constrained
least-squares solver is accelerated projected gradient and certifies a
projected-gradient residual instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .model import SensingEnsemble

__all__ = [
    "BoxLsProblem",
    "SocL1Problem",
    "SolverOptions",
    "SolverResult",
    "solve_box_ls",
    "solve_pos_p1",
    "solve_relaxed",
    "solve_socl1",
]


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and iteration limits shared by all solvers.

    ``abs_tol``/``rel_tol`` control both the feasibility slack and the
    duality-gap (or projected-gradient) certificate.  The remaining
    fields tune the splitting iteration and rarely need changing.
    """

    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_iter: int = 20000
    rho0: float = 1.0
    relaxation: float = 1.8
    adapt_rho: bool = True
    check_every: int = 20
    polish: bool = True

    def __post_init__(self) -> None:
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.rho0 <= 0:
            raise ValueError("rho0 must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be at least 1")


@dataclass(frozen=True)
class SocL1Problem:
    """min ||x||_1 subject to ||y - matrix @ x||_2 <= epsilon."""

    matrix: np.ndarray
    y: np.ndarray
    epsilon: float

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if np.asarray(self.matrix).ndim != 2:
            raise ValueError("matrix must be two dimensional")
        if np.asarray(self.y).shape != (np.asarray(self.matrix).shape[0],):
            raise ValueError("y length must match the matrix row count")


@dataclass(frozen=True)
class BoxLsProblem:
    """min ||target - matrix @ beta||_2 over the box |beta_j| <= radius."""

    matrix: np.ndarray
    target: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if np.asarray(self.matrix).ndim != 2:
            raise ValueError("matrix must be two dimensional")
        if np.asarray(self.target).shape != (np.asarray(self.matrix).shape[0],):
            raise ValueError("target length must match the matrix row count")


@dataclass
class SolverResult:
    """Solution plus the certificate values backing its status.

    ``x`` is the primary variable.  For the positive-signal and relaxed
    programs ``p`` holds the perturbation-mass block and ``x_pos``/
    ``x_neg`` the sign split.  ``diagnostics`` records the certificate:
    duality gap, affine slack, dual scaling, and warm-start state.
    """

    x: np.ndarray
    status: str
    objective: float
    residual_norm: float
    iterations: int
    p: np.ndarray | None = None
    x_pos: np.ndarray | None = None
    x_neg: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def _ball_project(v: np.ndarray, radius: float) -> np.ndarray:
    if radius <= 0.0:
        return np.zeros_like(v)
    norm = np.linalg.norm(v)
    if norm <= radius:
        return v.copy()
    return v * (radius / norm)


def _soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    mags = np.abs(v)
    scale = np.maximum(mags - tau, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(mags > 0, v * (scale / np.where(mags > 0, mags, 1.0)), 0.0)
    return out.astype(v.dtype)


def _range_distance(theta: np.ndarray, y: np.ndarray) -> float:
    sol, *_ = np.linalg.lstsq(theta, y, rcond=None)
    return float(np.linalg.norm(y - theta @ sol))


def _project_cone_pair(a: np.ndarray, b: np.ndarray, r: float):
    """Project (a_j, b_j) pairs onto {(x, p): x >= 0, |p| <= r x}."""
    if r == 0.0:
        return np.maximum(a, 0.0), np.zeros_like(b)
    babs = np.abs(b)
    sign = np.sign(b)
    inside = (a >= 0.0) & (babs <= r * a)
    polar = a <= -r * babs
    t = (a + r * babs) / (1.0 + r * r)
    x = np.where(inside, a, np.where(polar, 0.0, t))
    p = np.where(inside, b, np.where(polar, 0.0, sign * r * t))
    return x, p


def _project_cone_triple(a1: np.ndarray, a2: np.ndarray, b: np.ndarray, r: float):
    """Project triples onto {(u, v, p): u, v >= 0, |p| <= r (u + v)}.

    Closed-form KKT case analysis; the sign symmetry in p reduces it to
    eight candidate active sets, exactly one of which is consistent.
    """
    if r == 0.0:
        return np.maximum(a1, 0.0), np.maximum(a2, 0.0), np.zeros_like(b)
    sign = np.sign(b)
    bb = np.abs(b)

    u = np.empty_like(a1)
    v = np.empty_like(a2)
    p = np.empty_like(bb)
    done = np.zeros(a1.shape, dtype=bool)

    def settle(mask, uu, vv, pp):
        fresh = mask & ~done
        u[fresh] = np.broadcast_to(uu, a1.shape)[fresh]
        v[fresh] = np.broadcast_to(vv, a1.shape)[fresh]
        p[fresh] = np.broadcast_to(pp, a1.shape)[fresh]
        done[fresh] = True

    # No constraint active.
    settle((a1 >= 0) & (a2 >= 0) & (bb <= r * (a1 + a2)), a1, a2, bb)
    # One sign constraint active, cone slack.
    settle((a1 <= 0) & (a2 >= 0) & (bb <= r * a2), 0.0, a2, bb)
    settle((a2 <= 0) & (a1 >= 0) & (bb <= r * a1), a1, 0.0, bb)
    # Cone face active, both coordinates interior.
    lam = (bb - r * (a1 + a2)) / (1.0 + 2.0 * r * r)
    settle((lam > 0) & (a1 + lam * r >= 0) & (a2 + lam * r >= 0),
           a1 + lam * r, a2 + lam * r, bb - lam)
    # Cone face plus one sign constraint.
    lam1 = (bb - r * a2) / (1.0 + r * r)
    settle((lam1 > 0) & (a1 + lam1 * r <= 0) & (a2 + lam1 * r >= 0),
           0.0, a2 + lam1 * r, bb - lam1)
    lam2 = (bb - r * a1) / (1.0 + r * r)
    settle((lam2 > 0) & (a2 + lam2 * r <= 0) & (a1 + lam2 * r >= 0),
           a1 + lam2 * r, 0.0, bb - lam2)
    # Everything active: the origin (covers the polar cone).
    settle(np.ones_like(done), 0.0, 0.0, 0.0)

    np.maximum(u, 0.0, out=u)
    np.maximum(v, 0.0, out=v)
    np.clip(p, 0.0, r * (u + v), out=p)
    return u, v, sign * p


def _admm_conic(theta, y, epsilon, prox_h, h_value, dual_value, opts,
                z0=None, uw0=None):
    """Shared ADMM loop for the conic family; returns a state dict."""
    m, d = theta.shape
    dtype = np.result_type(theta.dtype, y.dtype)
    adj = theta.conj().T

    gram = np.eye(m, dtype=dtype) + theta @ adj
    chol = cho_factor(gram, check_finite=False)

    def affine_project(zq, wq):
        lam = cho_solve(chol, theta @ zq + wq - y, check_finite=False)
        return zq - adj @ lam, wq - lam

    rho = opts.rho0
    alpha = opts.relaxation
    z2 = np.zeros(d, dtype=dtype) if z0 is None else z0.astype(dtype).copy()
    w2 = _ball_project(y - theta @ z2, epsilon)
    uw = np.zeros(m, dtype=dtype) if uw0 is None else uw0.astype(dtype).copy()
    uz = adj @ uw

    y_norm = float(np.linalg.norm(y))
    feas_tol = opts.abs_tol * (1.0 + y_norm) + opts.rel_tol * epsilon
    status = "max-iter"
    z1 = z2.copy()
    w1 = w2.copy()
    gap = math.inf
    feas = math.inf
    iterations = opts.max_iter

    for it in range(1, opts.max_iter + 1):
        z1 = prox_h(z2 - uz, 1.0 / rho)
        w1 = _ball_project(w2 - uw, epsilon)
        zr = alpha * z1 + (1.0 - alpha) * z2
        wr = alpha * w1 + (1.0 - alpha) * w2
        z2_prev, w2_prev = z2, w2
        z2, w2 = affine_project(zr + uz, wr + uw)
        uz = uz + zr - z2
        uw = uw + wr - w2

        if it % opts.check_every == 0 or it == opts.max_iter:
            feas = float(np.linalg.norm(theta @ z1 + w1 - y))
            obj = h_value(z1)
            nu = rho * uw
            gap = obj - dual_value(nu)
            gap_tol = opts.abs_tol + opts.rel_tol * max(1.0, abs(obj))
            if feas <= feas_tol and gap <= gap_tol:
                status = "optimal"
                iterations = it
                break

        if opts.adapt_rho and it % 50 == 0 and it <= 2000:
            pri = math.hypot(np.linalg.norm(z1 - z2), np.linalg.norm(w1 - w2))
            dua = rho * math.hypot(np.linalg.norm(z2 - z2_prev),
                                   np.linalg.norm(w2 - w2_prev))
            if pri > 10.0 * dua and rho < 1e6:
                rho *= 2.0
                uz *= 0.5
                uw *= 0.5
            elif dua > 10.0 * pri and rho > 1e-4:
                rho *= 0.5
                uz *= 2.0
                uw *= 2.0

    return {
        "z": z1,
        "w": w1,
        "uw": uw,
        "rho": rho,
        "status": status,
        "iterations": iterations,
        "gap": gap,
        "affine_slack": feas,
    }


def _l1_norm(v: np.ndarray) -> float:
    return float(np.sum(np.abs(v)))


def solve_socl1(problem: SocL1Problem, opts: SolverOptions | None = None,
                x0: np.ndarray | None = None,
                uw0: np.ndarray | None = None) -> SolverResult:
    """Solve min ||x||_1 s.t. ||y - M x||_2 <= epsilon, real or complex.

    The returned point satisfies the ball constraint up to
    ``epsilon * (1 + rel_tol) + abs_tol`` and its objective is within
    the certified duality gap of optimal.  ``x0``/``uw0`` warm-start the
    primal iterate and the constraint multiplier.
    """
    opts = opts or SolverOptions()
    M = np.asarray(problem.matrix)
    y = np.asarray(problem.y)
    eps = float(problem.epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    m, n = M.shape

    y_norm = float(np.linalg.norm(y))
    if y_norm <= eps:
        # Zero is feasible, and no feasible point beats its objective.
        return SolverResult(x=np.zeros(n, dtype=np.result_type(M.dtype, y.dtype)),
                            status="optimal", objective=0.0,
                            residual_norm=y_norm, iterations=0,
                            diagnostics={"gap": 0.0, "affine_slack": 0.0})

    dist = _range_distance(M, y)
    if dist > eps + 10.0 * opts.abs_tol:
        return SolverResult(x=np.zeros(n, dtype=np.result_type(M.dtype, y.dtype)),
                            status="infeasible", objective=math.inf,
                            residual_norm=dist, iterations=0,
                            diagnostics={"range_distance": dist})

    adj = M.conj().T

    def dual_value(nu):
        scale = max(1.0, float(np.max(np.abs(adj @ nu))) if n else 1.0)
        return (-float(np.real(np.vdot(nu, y))) - eps * float(np.linalg.norm(nu))) / scale

    state = _admm_conic(M, y, eps, _soft_threshold, _l1_norm, dual_value, opts,
                        z0=x0, uw0=uw0)
    x = state["z"]
    gap = state["gap"]
    slack = state["affine_slack"]

    if opts.polish and eps == 0.0 and np.any(x != 0):
        polished = _polish_support(M, y, x, opts, state["status"] == "optimal")
        if polished is not x:
            # Certify the returned point, not the discarded iterate.
            x = polished
            slack = float(np.linalg.norm(y - M @ x))
            gap = _l1_norm(x) - dual_value(state["rho"] * state["uw"])

    objective = _l1_norm(x)
    residual = float(np.linalg.norm(y - M @ x))
    return SolverResult(x=x, status=state["status"], objective=objective,
                        residual_norm=residual, iterations=state["iterations"],
                        diagnostics={"gap": gap, "affine_slack": slack,
                                     "uw": state["uw"], "rho": state["rho"]})


def _polish_support(M, y, x, opts, certified):
    """Refine an equality-constrained solution by sparse support refits.

    Candidate supports are nested prefixes of the magnitude ordering of
    ``x``; the sparsest candidate whose least-squares refit reproduces
    ``y`` exactly wins.  A certified iterate is replaced only when the
    refit does not increase the objective.  An uncertified iterate is
    replaced by any exactly feasible candidate: an iterate that missed
    the feasibility certificate does not solve the equality-constrained
    program at all, and its raw objective undershoots the optimum, so a
    feasible refit dominates it even at a higher objective.
    """
    mags = np.abs(x)
    if x.size == 0 or float(np.max(mags)) <= 0.0:
        return x
    feas_tol = opts.abs_tol * (1.0 + float(np.linalg.norm(y)))
    order = np.argsort(mags)[::-1]
    for size in range(1, M.shape[0] // 2 + 1):
        support = np.sort(order[:size])
        sub = M[:, support]
        cand_s, *_ = np.linalg.lstsq(sub, y, rcond=None)
        if float(np.linalg.norm(y - sub @ cand_s)) > feas_tol:
            continue
        cand = np.zeros_like(x)
        cand[support] = cand_s
        if certified and _l1_norm(cand) > _l1_norm(x) + opts.abs_tol:
            continue
        return cand
    return x


def solve_pos_p1(ens: SensingEnsemble, y: np.ndarray, epsilon: float,
                 opts: SolverOptions | None = None) -> SolverResult:
    """Solve the positive-signal program over (x, p).

    min 1^T x  s.t.  ||y - A x - B p||_2 <= epsilon, x >= 0,
    |p_j| <= r x_j.  Real field only.  The cone constraints hold exactly
    on the returned point (the final iterate is a cone projection).
    """
    opts = opts or SolverOptions()
    if np.iscomplexobj(ens.A) or np.iscomplexobj(y):
        raise ValueError("positive-signal program is defined over the real field")
    eps = float(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    n = ens.n
    r = ens.r
    theta = ens.stacked().astype(np.float64)
    y = np.asarray(y, dtype=np.float64)

    if np.linalg.norm(y) <= eps:
        zero = np.zeros(n)
        return SolverResult(x=zero, p=zero.copy(), status="optimal", objective=0.0,
                            residual_norm=float(np.linalg.norm(y)), iterations=0,
                            diagnostics={"gap": 0.0, "affine_slack": 0.0})
    dist = _range_distance(theta, y)
    if dist > eps + 10.0 * opts.abs_tol:
        zero = np.zeros(n)
        return SolverResult(x=zero, p=zero.copy(), status="infeasible",
                            objective=math.inf, residual_norm=dist, iterations=0,
                            diagnostics={"range_distance": dist})

    def prox_h(q, tau):
        x_part, p_part = _project_cone_pair(q[:n] - tau, q[n:], r)
        return np.concatenate([x_part, p_part])

    def h_value(z):
        return float(np.sum(z[:n]))

    A, B = ens.A, ens.B

    def dual_value(nu):
        at = A.T @ nu
        bt = B.T @ nu
        viol = float(np.max(r * np.abs(bt) - at)) if n else 0.0
        tau = 1.0 if viol <= 1.0 else 1.0 / viol
        return tau * (-float(nu @ y)) - eps * tau * float(np.linalg.norm(nu))

    state = _admm_conic(theta, y, eps, prox_h, h_value, dual_value, opts)
    z = state["z"]
    x, p = z[:n].copy(), z[n:].copy()
    gap = state["gap"]
    slack = state["affine_slack"]

    if opts.polish and eps == 0.0:
        x2, p2 = _polish_pos_pair(ens, y, x, p, opts,
                                  state["status"] == "optimal")
        if x2 is not x:
            # Certify the returned point, not the discarded iterate.
            x, p = x2, p2
            slack = float(np.linalg.norm(y - A @ x - B @ p))
            gap = float(np.sum(x)) - dual_value(state["rho"] * state["uw"])

    objective = float(np.sum(x))
    residual = float(np.linalg.norm(y - A @ x - B @ p))
    return SolverResult(x=x, p=p, status=state["status"], objective=objective,
                        residual_norm=residual, iterations=state["iterations"],
                        diagnostics={"gap": gap, "affine_slack": slack})


def _polish_pos_pair(ens, y, x, p, opts, certified):
    """Sparse support refits of an equality-constrained (x, p) pair.

    Same nested-prefix search as the l1 polish, over the doubled columns
    ``[A_S, B_S]``.  A candidate must reproduce ``y`` exactly, keep the
    signal block nonnegative, and stay feasible after clipping the mass
    block into the cone; a certified iterate additionally keeps its
    objective.
    """
    if x.size == 0 or float(np.max(x)) <= 0.0:
        return x, p
    feas_tol = opts.abs_tol * (1.0 + float(np.linalg.norm(y)))
    order = np.argsort(x)[::-1]
    for size in range(1, ens.m // 2 + 1):
        support = np.sort(order[:size])
        sub = np.hstack([ens.A[:, support], ens.B[:, support]])
        cand, *_ = np.linalg.lstsq(sub, y, rcond=None)
        xs, ps = cand[:size], cand[size:]
        if float(np.linalg.norm(y - sub @ cand)) > feas_tol:
            continue
        if np.any(xs < -1e-12):
            continue
        xs = np.maximum(xs, 0.0)
        ps = np.clip(ps, -ens.r * xs, ens.r * xs)
        if float(np.linalg.norm(y - sub @ np.concatenate([xs, ps]))) > feas_tol:
            continue
        if certified and float(np.sum(xs)) > float(np.sum(x)) + opts.abs_tol:
            continue
        x_new = np.zeros_like(x)
        p_new = np.zeros_like(p)
        x_new[support] = xs
        p_new[support] = ps
        return x_new, p_new
    return x, p


def solve_relaxed(ens: SensingEnsemble, y: np.ndarray, epsilon: float,
                  opts: SolverOptions | None = None) -> SolverResult:
    """Solve the sign-split relaxation over (x_pos, x_neg, p).

    min 1^T (x_pos + x_neg)  s.t.
    ||y - A x_pos + A x_neg - B p||_2 <= epsilon, x_pos, x_neg >= 0,
    |p_j| <= r (x_pos_j + x_neg_j).  Real field only.  Returns the split
    blocks so callers can measure the complementarity defect
    max_j min(x_pos_j, x_neg_j).
    """
    opts = opts or SolverOptions()
    if np.iscomplexobj(ens.A) or np.iscomplexobj(y):
        raise ValueError("relaxed program is defined over the real field")
    eps = float(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    n = ens.n
    r = ens.r
    A, B = ens.A, ens.B
    theta = np.hstack([A, -A, B]).astype(np.float64)
    y = np.asarray(y, dtype=np.float64)

    if np.linalg.norm(y) <= eps:
        zero = np.zeros(n)
        return SolverResult(x=zero, p=zero.copy(), x_pos=zero.copy(),
                            x_neg=zero.copy(), status="optimal", objective=0.0,
                            residual_norm=float(np.linalg.norm(y)), iterations=0,
                            diagnostics={"gap": 0.0, "affine_slack": 0.0})
    dist = _range_distance(theta, y)
    if dist > eps + 10.0 * opts.abs_tol:
        zero = np.zeros(n)
        return SolverResult(x=zero, p=zero.copy(), x_pos=zero.copy(),
                            x_neg=zero.copy(), status="infeasible",
                            objective=math.inf, residual_norm=dist, iterations=0,
                            diagnostics={"range_distance": dist})

    def prox_h(q, tau):
        u, v, p = _project_cone_triple(q[:n] - tau, q[n:2 * n] - tau, q[2 * n:], r)
        return np.concatenate([u, v, p])

    def h_value(z):
        return float(np.sum(z[:2 * n]))

    def dual_value(nu):
        at = A.T @ nu
        bt = B.T @ nu
        viol = float(np.max(np.abs(at) + r * np.abs(bt))) if n else 0.0
        tau = 1.0 if viol <= 1.0 else 1.0 / viol
        return tau * (-float(nu @ y)) - eps * tau * float(np.linalg.norm(nu))

    state = _admm_conic(theta, y, eps, prox_h, h_value, dual_value, opts)
    z = state["z"]
    x_pos, x_neg, p = z[:n].copy(), z[n:2 * n].copy(), z[2 * n:].copy()
    x = x_pos - x_neg
    objective = float(np.sum(x_pos) + np.sum(x_neg))
    residual = float(np.linalg.norm(y - theta @ z))
    defect = float(np.max(np.minimum(x_pos, x_neg))) if n else 0.0
    return SolverResult(x=x, p=p, x_pos=x_pos, x_neg=x_neg,
                        status=state["status"], objective=objective,
                        residual_norm=residual, iterations=state["iterations"],
                        diagnostics={"gap": state["gap"],
                                     "affine_slack": state["affine_slack"],
                                     "complementarity_defect": defect})


def solve_box_ls(problem: BoxLsProblem, opts: SolverOptions | None = None,
                 beta0: np.ndarray | None = None) -> SolverResult:
    """Solve min ||target - G beta||_2 over real beta with |beta_j| <= radius.

    Accelerated projected gradient with a monotone safeguard.  The box
    constraint holds exactly (the final iterate is a projection), and
    coordinates whose columns are identically zero return 0 by
    convention.  Certifies a unit-step projected-gradient residual.
    """
    opts = opts or SolverOptions()
    G = np.asarray(problem.matrix)
    c = np.asarray(problem.target)
    r = float(problem.radius)
    if r < 0:
        raise ValueError("box radius must be nonnegative")
    n = G.shape[1]

    col_norms = np.linalg.norm(G, axis=0)
    flat = col_norms <= 1e-14
    if r == 0.0 or bool(np.all(flat)):
        beta = np.zeros(n)
        return SolverResult(x=beta, status="optimal",
                            objective=float(np.linalg.norm(c)) ** 2,
                            residual_norm=float(np.linalg.norm(c)), iterations=0,
                            diagnostics={"pg_residual": 0.0})

    # Real quadratic form of the (possibly complex) data.
    H = np.real(G.conj().T @ G)
    b = np.real(G.conj().T @ c)
    c_sq = float(np.real(np.vdot(c, c)))
    L = 2.0 * float(np.linalg.eigvalsh(H)[-1])

    def fval(beta):
        return float(beta @ (H @ beta) - 2.0 * b @ beta + c_sq)

    def grad(beta):
        return 2.0 * (H @ beta - b)

    def project(beta):
        out = np.clip(beta, -r, r)
        out[flat] = 0.0
        return out

    beta = np.zeros(n) if beta0 is None else project(np.asarray(beta0, dtype=float))
    best = beta.copy()
    best_val = fval(beta)
    mom = beta.copy()
    t_k = 1.0
    step = 1.0 / L
    status = "max-iter"
    iterations = opts.max_iter
    pg = math.inf

    for it in range(1, opts.max_iter + 1):
        g_mom = grad(mom)
        nxt = project(mom - step * g_mom)
        val = fval(nxt)
        if val > best_val:  # momentum overshoot: restart at the best point
            t_k = 1.0
            mom = best.copy()
            beta = best.copy()
        else:
            best, best_val = nxt, val
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_k * t_k))
            mom = nxt + ((t_k - 1.0) / t_next) * (nxt - beta)
            beta = nxt
            t_k = t_next

        if it % 10 == 0 or it == opts.max_iter:
            pg = float(np.max(np.abs(best - project(best - grad(best)))))
            if pg <= opts.abs_tol:
                status = "optimal"
                iterations = it
                break

    residual_sq = max(fval(best), 0.0)
    return SolverResult(x=best, status=status, objective=residual_sq,
                        residual_norm=math.sqrt(residual_sq),
                        iterations=iterations,
                        diagnostics={"pg_residual": pg})
