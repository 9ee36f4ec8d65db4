"""Monomials, posynomials, and geometric programs in standard form.

A monomial is c * prod(r_i ** a_i) with c > 0 over strictly positive
variables; a posynomial is a finite sum of monomials. A geometric program
minimizes a posynomial subject to posynomial inequalities f_u(r) <= 1 and
monomial equalities g_w(r) == 1. Substituting r = exp(s) and taking
coefficients as logs turns every monomial into exp(a . s + b), making the
objective and constraints convex in s; ``to_convex_form`` performs that
rewrite and is the entry point for the interior-point solver.

Coefficients are carried as logs in the convex form so products of many
small unit factors cannot underflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Monomial:
    """c * prod(r_i ** exponents_i), c > 0."""

    coefficient: float
    exponents: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "exponents", np.asarray(self.exponents, dtype=float)
        )
        if self.exponents.ndim != 1:
            raise ValueError("exponents must be a 1-D array")
        if not np.all(np.isfinite(self.exponents)):
            raise ValueError("exponents must be finite")
        c = float(self.coefficient)
        if not np.isfinite(c) or c <= 0.0:
            raise ValueError("coefficient must be finite and positive")
        object.__setattr__(self, "coefficient", c)

    @property
    def n_vars(self) -> int:
        return self.exponents.shape[0]

    @property
    def log_coefficient(self) -> float:
        return float(np.log(self.coefficient))

    def __call__(self, r: np.ndarray) -> float:
        return eval_monomial(self, r)


@dataclass(frozen=True, eq=False)
class Posynomial:
    """Sum of monomials over a shared variable vector."""

    terms: tuple[Monomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("a posynomial needs at least one term")
        n = self.terms[0].n_vars
        if any(t.n_vars != n for t in self.terms):
            raise ValueError("all terms must share the variable count")

    @property
    def n_vars(self) -> int:
        return self.terms[0].n_vars

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def exponent_matrix(self) -> np.ndarray:
        return np.array([t.exponents for t in self.terms])

    def log_coefficients(self) -> np.ndarray:
        return np.array([t.log_coefficient for t in self.terms])

    def __call__(self, r: np.ndarray) -> float:
        return eval_posynomial(self, r)


def eval_monomial(mono: Monomial, r: np.ndarray) -> float:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("monomials are defined for strictly positive variables")
    # evaluate through logs: large exponent products stay in range
    return float(np.exp(mono.log_coefficient + mono.exponents @ np.log(r)))


def eval_posynomial(posy: Posynomial, r: np.ndarray) -> float:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("posynomials are defined for strictly positive variables")
    logs = posy.exponent_matrix() @ np.log(r) + posy.log_coefficients()
    peak = float(np.max(logs))
    if peak >= 709.0:  # exp overflows past this; the sum is inf regardless
        return math.inf
    return float(np.exp(peak) * np.exp(logs - peak).sum())


@dataclass(frozen=True, eq=False)
class GpProblem:
    """min objective s.t. inequalities <= 1, equalities == 1 (monomials)."""

    objective: Posynomial
    inequalities: tuple[Posynomial, ...] = ()
    equalities: tuple[Monomial, ...] = ()
    variable_names: tuple[str, ...] = ()
    variable_roles: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        object.__setattr__(self, "equalities", tuple(self.equalities))
        n = self.objective.n_vars
        if any(p.n_vars != n for p in self.inequalities):
            raise ValueError("inequality variable count mismatch")
        if any(m.n_vars != n for m in self.equalities):
            raise ValueError("equality variable count mismatch")
        names = tuple(self.variable_names) or tuple(
            f"r[{i}]" for i in range(n)
        )
        roles = tuple(self.variable_roles) or ("",) * n
        if len(names) != n or len(roles) != n:
            raise ValueError("variable names/roles must cover every variable")
        object.__setattr__(self, "variable_names", names)
        object.__setattr__(self, "variable_roles", roles)

    @property
    def n_vars(self) -> int:
        return self.objective.n_vars


@dataclass(frozen=True, eq=False)
class ConvexGp:
    """Log-space image of a GpProblem: every monomial is exp(A s + b)."""

    obj_exponents: np.ndarray  # (terms, vars)
    obj_logcoeffs: np.ndarray
    ineq_exponents: tuple[np.ndarray, ...]
    ineq_logcoeffs: tuple[np.ndarray, ...]
    eq_exponents: np.ndarray   # (constraints, vars); rows a_w of a_w . s + b_w = 0
    eq_logcoeffs: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.obj_exponents.shape[1]

    def objective_value(self, s: np.ndarray) -> float:
        logs = self.obj_exponents @ s + self.obj_logcoeffs
        peak = float(np.max(logs))
        return float(np.exp(peak) * np.exp(logs - peak).sum())


def to_convex_form(problem: GpProblem) -> ConvexGp:
    return ConvexGp(
        obj_exponents=problem.objective.exponent_matrix(),
        obj_logcoeffs=problem.objective.log_coefficients(),
        ineq_exponents=tuple(p.exponent_matrix() for p in problem.inequalities),
        ineq_logcoeffs=tuple(p.log_coefficients() for p in problem.inequalities),
        eq_exponents=(
            np.array([m.exponents for m in problem.equalities])
            if problem.equalities else np.zeros((0, problem.n_vars))
        ),
        eq_logcoeffs=np.array([m.log_coefficient for m in problem.equalities]),
    )


def _posynomial_payload(posy: Posynomial) -> dict:
    return {
        "log_coefficients": [t.log_coefficient for t in posy.terms],
        "exponents": [[float(e) for e in t.exponents] for t in posy.terms],
    }


def _posynomial_from_payload(data: dict) -> Posynomial:
    return Posynomial(terms=tuple(
        Monomial(coefficient=float(np.exp(lc)), exponents=np.asarray(ex, dtype=float))
        for lc, ex in zip(data["log_coefficients"], data["exponents"])
    ))


def problem_to_json(problem: GpProblem) -> str:
    payload = {
        "variables": list(problem.variable_names),
        "roles": list(problem.variable_roles),
        "objective": _posynomial_payload(problem.objective),
        "inequalities": [_posynomial_payload(p) for p in problem.inequalities],
        "equalities": [
            {
                "log_coefficient": m.log_coefficient,
                "exponents": [float(e) for e in m.exponents],
            }
            for m in problem.equalities
        ],
    }
    return json.dumps(payload, indent=2)


def problem_from_json(text: str) -> GpProblem:
    payload = json.loads(text)
    return GpProblem(
        objective=_posynomial_from_payload(payload["objective"]),
        inequalities=tuple(
            _posynomial_from_payload(p) for p in payload["inequalities"]
        ),
        equalities=tuple(
            Monomial(
                coefficient=float(np.exp(m["log_coefficient"])),
                exponents=np.asarray(m["exponents"], dtype=float),
            )
            for m in payload["equalities"]
        ),
        variable_names=tuple(payload["variables"]),
        variable_roles=tuple(payload["roles"]),
    )
