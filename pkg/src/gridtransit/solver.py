"""Interior-point solver for geometric programs with optimality certificates.

The problem is solved in log space: with r = exp(s) the objective becomes
F(s) = sum_k exp(a_k . s + b_k), each inequality g_u(s) =
log-sum-exp(A_u s + b_u) <= 0, and each monomial equality an affine
equation a_w . s + b_w = 0. Equalities are eliminated by restricting s to
the affine solution manifold (particular solution plus an orthonormal null
space basis), so the remaining problem is smooth and convex.

Strategy:

1. Minimize F alone by damped Newton. If the minimizer satisfies every
   inequality it is the constrained global optimum and the barrier phase
   is skipped (zero duals, zero gap).
2. Otherwise find a strictly feasible point. Capacity-style problems are
   repaired directly: each violated monomial constraint contains exactly
   one headway-role variable, which is scaled down until the constraint
   holds with margin. Anything else falls back to a phase-one LP on the
   constraint logs; if the LP cannot push every constraint below one, the
   problem is reported infeasible.
3. Follow the central path: minimize F(s) - (1/t) * sum_u ln(-g_u(s)) by
   damped Newton, multiplying t by a fixed factor until the duality gap
   bound (number of inequalities / t) is below the requested relative
   tolerance.

Dual multipliers come from the barrier certificate lambda_u =
1 / (t * (-g_u)); the report carries the scaled stationarity residual,
worst primal constraint value, complementary slackness, and relative gap
bound so every solve is checkable after the fact. ``check_kkt``
recomputes those certificates at any candidate point, estimating duals by
non-negative least squares when none are supplied.

Newton steps solve H p = -grad via Cholesky, adding a tiny scaled ridge
on factorization failure, with Armijo backtracking on the step. Iterates
whose log-variables leave a large box are declared divergent: for an
unconstrained problem that means the objective is unbounded below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.optimize

from .posynomial import GpProblem, eval_monomial, eval_posynomial, to_convex_form

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_MAX_ITERATIONS = "max-iterations"
STATUS_UNBOUNDED = "unbounded"

_FEASIBLE_SKIP_TOL = 1e-12  # g_u <= this at the unconstrained optimum: skip barrier
_PRIMAL_FEAS_TOL = 1e-8     # accept f_u(r) <= 1 + this


@dataclass(frozen=True)
class SolverOptions:
    t_init: float = 1.0
    t_scale: float = 20.0
    gap_rtol: float = 1e-9
    newton_tol: float = 1e-10   # stop when half the squared Newton decrement is below
    max_inner: int = 200
    max_outer: int = 100
    armijo: float = 0.01
    backtrack: float = 0.5
    s_bound: float = 60.0       # |log r| beyond this is treated as divergence
    feas_target: float = 0.99   # repair headways until utilization is below this


@dataclass(frozen=True, eq=False)
class SolveReport:
    status: str
    r: np.ndarray
    objective: float
    duals: np.ndarray
    stationarity: float
    primal_feasibility: float
    comp_slackness: float
    gap_bound_rel: float
    outer_rounds: int
    newton_steps: int
    barrier_skipped: bool

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "r": [float(x) for x in self.r],
            "objective": float(self.objective),
            "duals": [float(x) for x in self.duals],
            "stationarity": float(self.stationarity),
            "primal_feasibility": float(self.primal_feasibility),
            "comp_slackness": float(self.comp_slackness),
            "gap_bound_rel": float(self.gap_bound_rel),
            "outer_rounds": int(self.outer_rounds),
            "newton_steps": int(self.newton_steps),
            "barrier_skipped": bool(self.barrier_skipped),
        }


@dataclass(frozen=True, eq=False)
class KktReport:
    stationarity: float
    primal_feasibility: float
    comp_slackness: float
    eq_residual: float
    duals: np.ndarray


class _Diverged(Exception):
    def __init__(self, z: np.ndarray):
        self.z = z


def _sum_exp(A: np.ndarray, b: np.ndarray, z: np.ndarray):
    """Value, gradient, Hessian of sum_k exp(A_k . z + b_k)."""
    logs = A @ z + b
    peak = float(np.max(logs))
    w = np.exp(logs - peak)
    scale = math.exp(peak) if peak < 709.0 else math.inf
    value = scale * float(w.sum())
    grad = scale * (A.T @ w)
    hess = scale * ((A.T * w) @ A)
    return value, grad, hess


def _sum_exp_value(A: np.ndarray, b: np.ndarray, z: np.ndarray) -> float:
    logs = A @ z + b
    peak = float(np.max(logs))
    if peak >= 709.0:
        return math.inf
    return math.exp(peak) * float(np.exp(logs - peak).sum())


def _lse(A: np.ndarray, b: np.ndarray, z: np.ndarray):
    """Value, gradient, curvature pieces of log(sum_k exp(A_k . z + b_k))."""
    logs = A @ z + b
    peak = float(np.max(logs))
    w = np.exp(logs - peak)
    total = float(w.sum())
    p = w / total
    value = peak + math.log(total)
    grad = A.T @ p
    # hess = A^T diag(p) A - grad grad^T
    hess = (A.T * p) @ A - np.outer(grad, grad)
    return value, grad, hess


def _lse_value(A: np.ndarray, b: np.ndarray, z: np.ndarray) -> float:
    logs = A @ z + b
    peak = float(np.max(logs))
    return peak + math.log(float(np.exp(logs - peak).sum()))


def _solve_newton_system(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    n = hess.shape[0]
    ridge = 0.0
    seed = 1e-12 * (1.0 + float(np.trace(hess)) / max(n, 1))
    for _ in range(60):
        try:
            factor = scipy.linalg.cho_factor(
                hess + ridge * np.eye(n), lower=True, check_finite=False
            )
            return scipy.linalg.cho_solve(factor, -grad, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            ridge = seed if ridge == 0.0 else ridge * 10.0
    raise RuntimeError("Newton system could not be factorized")


def _newton(value_fn, fgh_fn, z0: np.ndarray, opts: SolverOptions, s_of_z):
    """Damped Newton descent; returns (z, steps, converged)."""
    z = z0.copy()
    value = value_fn(z)
    if not math.isfinite(value):
        raise ValueError("Newton started at an infinite value")
    for step in range(opts.max_inner):
        _, grad, hess = fgh_fn(z)
        direction = _solve_newton_system(hess, grad)
        decrement_sq = float(-grad @ direction)
        if 0.5 * decrement_sq <= opts.newton_tol:
            return z, step, True
        alpha = 1.0
        slope = float(grad @ direction)
        # once the predicted decrease drops below float resolution of the
        # value, Armijo comparisons are pure noise: take the full step on
        # the strength of the decrement, only guarding the domain
        noise_floor = 64.0 * np.finfo(float).eps * (1.0 + abs(value))
        skip_armijo = decrement_sq <= noise_floor
        while True:
            trial = z + alpha * direction
            trial_value = value_fn(trial)
            if skip_armijo:
                if math.isfinite(trial_value):
                    break
            elif trial_value <= value + opts.armijo * alpha * slope:
                break
            alpha *= opts.backtrack
            if alpha < 1e-18:
                return z, step, True
        z = trial
        value = trial_value
        if float(np.max(np.abs(s_of_z(z)))) > opts.s_bound:
            raise _Diverged(z)
    return z, opts.max_inner, False


def _headway_repair(ineq_A, ineq_b, roles, s, opts: SolverOptions):
    """Scale each violated capacity row's headway down; None if not applicable.

    Exact in one pass when every inequality is a monomial containing a
    single headway-role variable with exponent +1 that appears in no other
    inequality: the shift moves that constraint alone.
    """
    if not all(A.shape[0] == 1 for A in ineq_A):
        return None
    s = s.copy()
    tuned: set[int] = set()
    log_target = math.log(opts.feas_target)
    for u, (A, b) in enumerate(zip(ineq_A, ineq_b)):
        a = A[0]
        g = float(a @ s + b[0])
        if g <= log_target:
            continue
        candidates = [
            j for j in np.nonzero(a)[0]
            if roles[j] == "headway" and a[j] == 1.0
        ]
        if len(candidates) != 1:
            return None
        j = candidates[0]
        if j in tuned:
            return None
        if any(v != u and ineq_A[v][0][j] != 0.0 for v in range(len(ineq_A))):
            return None
        s[j] += math.log(0.9) - g
        tuned.add(j)
    worst = max(float(A[0] @ s + b[0]) for A, b in zip(ineq_A, ineq_b))
    return s if worst < 0.0 else None


def _lp_start(ineq_A, ineq_b, n_vars: int):
    """Phase-one LP for a strictly feasible point; None means infeasible.

    Pushing every monomial term of constraint u below 1/K_u (K_u terms)
    forces the posynomial below 1, so rows are term logs shifted by
    log(K_u) and the LP minimizes their common upper bound.
    """
    rows = []
    rhs = []
    for A, b in zip(ineq_A, ineq_b):
        shift = math.log(A.shape[0])
        for i in range(A.shape[0]):
            rows.append(np.append(A[i], -1.0))
            rhs.append(-(b[i] + shift))
    bounds = [(None, None)] * n_vars + [(-1.0, None)]
    cost = np.zeros(n_vars + 1)
    cost[-1] = 1.0
    result = scipy.optimize.linprog(
        cost, A_ub=np.array(rows), b_ub=np.array(rhs),
        bounds=bounds, method="highs",
    )
    if not result.success or result.x[-1] >= 0.0:
        return None
    return result.x[:-1]


def _stationarity_residual(obj_A, obj_b, ineq_A, ineq_b, z, duals) -> float:
    value, grad, _ = _sum_exp(obj_A, obj_b, z)
    residual = grad.copy()
    for lam, A, b in zip(duals, ineq_A, ineq_b):
        if lam != 0.0:
            _, g_grad, _ = _lse(A, b, z)
            residual += lam * g_grad
    scale = max(float(np.linalg.norm(grad)), value)
    if scale <= 0.0:
        scale = 1.0
    return float(np.linalg.norm(residual)) / scale


def solve_gp(
    problem: GpProblem,
    options: SolverOptions | None = None,
    start_r: np.ndarray | None = None,
) -> SolveReport:
    """Solve a GP to certified global optimality."""
    opts = options or SolverOptions()
    convex = to_convex_form(problem)
    n = problem.n_vars
    n_ineq = len(problem.inequalities)

    # eliminate monomial equalities: s = s_part + basis @ z
    if problem.equalities:
        A_eq = convex.eq_exponents
        b_eq = convex.eq_logcoeffs
        s_part, *_ = np.linalg.lstsq(A_eq, -b_eq, rcond=None)
        if float(np.max(np.abs(A_eq @ s_part + b_eq))) > 1e-9 * (
            1.0 + float(np.max(np.abs(b_eq)))
        ):
            r = np.exp(np.clip(s_part, -opts.s_bound, opts.s_bound))
            return _finalize(
                problem, convex, STATUS_INFEASIBLE, r,
                np.zeros(n_ineq), 0.0, 0, 0, False,
            )
        basis = scipy.linalg.null_space(A_eq)
    else:
        s_part = np.zeros(n)
        basis = np.eye(n)

    obj_A = convex.obj_exponents @ basis
    obj_b = convex.obj_exponents @ s_part + convex.obj_logcoeffs
    ineq_A = [A @ basis for A in convex.ineq_exponents]
    ineq_b = [
        A @ s_part + b
        for A, b in zip(convex.ineq_exponents, convex.ineq_logcoeffs)
    ]
    k = basis.shape[1]

    def s_of_z(z: np.ndarray) -> np.ndarray:
        return s_part + basis @ z

    if start_r is not None:
        start_r = np.asarray(start_r, dtype=float)
        if start_r.shape != (n,) or np.any(start_r <= 0.0):
            raise ValueError("start must be a strictly positive vector of full size")
        z = basis.T @ (np.log(start_r) - s_part)
    else:
        z = -(basis.T @ s_part)

    steps_total = 0
    unconstrained_ok = False

    if k == 0:
        z = np.zeros(0)
        unconstrained_ok = True
    else:
        if not math.isfinite(_sum_exp_value(obj_A, obj_b, z)):
            z = np.zeros(k)
        try:
            z, steps, unconstrained_ok = _newton(
                lambda zz: _sum_exp_value(obj_A, obj_b, zz),
                lambda zz: _sum_exp(obj_A, obj_b, zz),
                z, opts, s_of_z,
            )
            steps_total += steps
        except _Diverged as d:
            if n_ineq == 0:
                r = np.exp(np.clip(s_of_z(d.z), -opts.s_bound, opts.s_bound))
                return _finalize(
                    problem, convex, STATUS_UNBOUNDED, r,
                    np.zeros(0), 0.0, 0, steps_total, True,
                )
            z = d.z

    if n_ineq == 0:
        status = STATUS_OPTIMAL if unconstrained_ok else STATUS_MAX_ITERATIONS
        return _finalize(
            problem, convex, status, np.exp(s_of_z(z)),
            np.zeros(0), 0.0, 0, steps_total, True,
        )

    worst_g = max(_lse_value(A, b, z) for A, b in zip(ineq_A, ineq_b))
    if unconstrained_ok and worst_g <= _FEASIBLE_SKIP_TOL:
        # the unconstrained optimum satisfies every constraint, so it is
        # the constrained optimum as well
        return _finalize(
            problem, convex, STATUS_OPTIMAL, np.exp(s_of_z(z)),
            np.zeros(n_ineq), 0.0, 0, steps_total, True,
        )

    if worst_g >= 0.0:
        z_feasible = None
        if not problem.equalities:
            repaired = _headway_repair(
                ineq_A, ineq_b, problem.variable_roles, s_of_z(z), opts
            )
            if repaired is not None:
                z_feasible = basis.T @ (repaired - s_part)
        if z_feasible is None:
            z_feasible = _lp_start(ineq_A, ineq_b, k)
        if z_feasible is None:
            return _finalize(
                problem, convex, STATUS_INFEASIBLE, np.exp(s_of_z(z)),
                np.zeros(n_ineq), 0.0, 0, steps_total, False,
            )
        z = z_feasible

    t = opts.t_init
    outer_rounds = 0
    barrier_ok = True
    gap_rel = math.inf

    def barrier_value(tt):
        def value(zz):
            total = _sum_exp_value(obj_A, obj_b, zz)
            for A, b in zip(ineq_A, ineq_b):
                g = _lse_value(A, b, zz)
                if g >= 0.0:
                    return math.inf
                total -= math.log(-g) / tt
            return total
        return value

    def barrier_fgh(tt):
        def fgh(zz):
            value, grad, hess = _sum_exp(obj_A, obj_b, zz)
            for A, b in zip(ineq_A, ineq_b):
                g, g_grad, g_hess = _lse(A, b, zz)
                value -= math.log(-g) / tt
                grad += g_grad / (tt * (-g))
                hess += (
                    np.outer(g_grad, g_grad) / (g * g) + g_hess / (-g)
                ) / tt
            return value, grad, hess
        return fgh

    try:
        while outer_rounds < opts.max_outer:
            z, steps, converged = _newton(
                barrier_value(t), barrier_fgh(t), z, opts, s_of_z
            )
            steps_total += steps
            outer_rounds += 1
            if not converged:
                barrier_ok = False
                break
            objective_now = _sum_exp_value(obj_A, obj_b, z)
            gap_rel = n_ineq / (t * max(objective_now, 1e-300))
            if gap_rel < opts.gap_rtol:
                break
            t *= opts.t_scale
        else:
            barrier_ok = False
        if barrier_ok:
            # squeeze the last center as far as floats allow: the duals
            # 1/(t(-g)) certify stationarity only as well as the center
            # is solved, and the regular tolerance leaves visible residue
            # when a constraint boundary is this close
            polish = replace(opts, newton_tol=1e-18, max_inner=20)
            z, steps, _ = _newton(
                barrier_value(t), barrier_fgh(t), z, polish, s_of_z
            )
            steps_total += steps
            objective_now = _sum_exp_value(obj_A, obj_b, z)
            gap_rel = n_ineq / (t * max(objective_now, 1e-300))
    except _Diverged as d:
        return _finalize(
            problem, convex, STATUS_UNBOUNDED,
            np.exp(np.clip(s_of_z(d.z), -opts.s_bound, opts.s_bound)),
            np.zeros(n_ineq), 0.0, outer_rounds, steps_total, False,
        )

    duals = np.array([
        1.0 / (t * (-_lse_value(A, b, z)))
        for A, b in zip(ineq_A, ineq_b)
    ])
    status = STATUS_OPTIMAL if barrier_ok else STATUS_MAX_ITERATIONS
    return _finalize(
        problem, convex, status, np.exp(s_of_z(z)),
        duals, gap_rel if math.isfinite(gap_rel) else 0.0,
        outer_rounds, steps_total, False,
        reduced=(obj_A, obj_b, ineq_A, ineq_b, z),
    )


def _finalize(
    problem: GpProblem,
    convex,
    status: str,
    r: np.ndarray,
    duals: np.ndarray,
    gap_rel: float,
    outer_rounds: int,
    steps_total: int,
    barrier_skipped: bool,
    reduced=None,
) -> SolveReport:
    objective = eval_posynomial(problem.objective, r)
    if problem.inequalities:
        primal = max(eval_posynomial(p, r) for p in problem.inequalities)
    else:
        primal = 0.0
    if reduced is not None:
        obj_A, obj_b, ineq_A, ineq_b, z = reduced
        stationarity = _stationarity_residual(obj_A, obj_b, ineq_A, ineq_b, z, duals)
        comp = max(
            (
                abs(lam * _lse_value(A, b, z))
                for lam, A, b in zip(duals, ineq_A, ineq_b)
            ),
            default=0.0,
        )
    else:
        s = np.log(r)
        stationarity = _stationarity_residual(
            convex.obj_exponents, convex.obj_logcoeffs,
            list(convex.ineq_exponents), list(convex.ineq_logcoeffs),
            s, duals,
        )
        comp = max(
            (
                abs(lam * _lse_value(A, b, s))
                for lam, A, b in zip(
                    duals, convex.ineq_exponents, convex.ineq_logcoeffs
                )
            ),
            default=0.0,
        )
    if status == STATUS_OPTIMAL and primal > 1.0 + _PRIMAL_FEAS_TOL:
        status = STATUS_MAX_ITERATIONS
    return SolveReport(
        status=status,
        r=r,
        objective=objective,
        duals=duals,
        stationarity=stationarity,
        primal_feasibility=primal,
        comp_slackness=comp,
        gap_bound_rel=gap_rel,
        outer_rounds=outer_rounds,
        newton_steps=steps_total,
        barrier_skipped=barrier_skipped,
    )


def check_kkt(
    problem: GpProblem,
    r: np.ndarray,
    duals: np.ndarray | None = None,
    active_tol: float = 1e-6,
) -> KktReport:
    """Certificates at an arbitrary candidate point.

    With no duals supplied, multipliers for constraints within
    ``active_tol`` of their bound are estimated by non-negative least
    squares on the stationarity equation; inactive constraints get zero.
    """
    r = np.asarray(r, dtype=float)
    convex = to_convex_form(problem)
    s = np.log(r)
    n_ineq = len(problem.inequalities)

    if problem.inequalities:
        primal = max(eval_posynomial(p, r) for p in problem.inequalities)
    else:
        primal = 0.0
    if problem.equalities:
        eq_residual = max(
            abs(eval_monomial(m, r) - 1.0) for m in problem.equalities
        )
    else:
        eq_residual = 0.0

    _, obj_grad, _ = _sum_exp(convex.obj_exponents, convex.obj_logcoeffs, s)
    g_values = [
        _lse_value(A, b, s)
        for A, b in zip(convex.ineq_exponents, convex.ineq_logcoeffs)
    ]
    g_grads = [
        _lse(A, b, s)[1]
        for A, b in zip(convex.ineq_exponents, convex.ineq_logcoeffs)
    ]

    if duals is None:
        duals = np.zeros(n_ineq)
        active = [u for u in range(n_ineq) if g_values[u] >= math.log1p(-active_tol)]
        if active:
            columns = np.column_stack([g_grads[u] for u in active])
            solution, _ = scipy.optimize.nnls(columns, -obj_grad)
            duals[active] = solution
    else:
        duals = np.asarray(duals, dtype=float)
        if duals.shape != (n_ineq,):
            raise ValueError("one dual per inequality constraint expected")

    residual = obj_grad.copy()
    for lam, grad in zip(duals, g_grads):
        residual += lam * grad
    if problem.equalities:
        # project out the equality-gradient span: multipliers are free
        A_eq_t = convex.eq_exponents.T
        nu, *_ = np.linalg.lstsq(A_eq_t, -residual, rcond=None)
        residual = residual + A_eq_t @ nu

    value = eval_posynomial(problem.objective, r)
    scale = max(float(np.linalg.norm(obj_grad)), value)
    if scale <= 0.0:
        scale = 1.0
    comp = max(
        (abs(lam * g) for lam, g in zip(duals, g_values)), default=0.0
    )
    return KktReport(
        stationarity=float(np.linalg.norm(residual)) / scale,
        primal_feasibility=primal,
        comp_slackness=comp,
        eq_residual=eq_residual,
        duals=duals,
    )
