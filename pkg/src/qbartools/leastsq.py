"""Damped (Levenberg-Marquardt) least squares with Marquardt diagonal scaling.

Small self-contained solver used by the resonance and decay fitters.  The
residual and Jacobian are supplied as callables; parameters with wildly
different magnitudes are handled by scaling the damping term with the
diagonal of the normal matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFitError


@dataclass
class LmResult:
    x: np.ndarray
    cost: float                # sum of squared residuals at x
    n_iter: int                # accepted iterations
    converged: bool
    grad_norm: float
    cost_history: list = field(default_factory=list)  # cost after each accepted step
    jacobian: np.ndarray | None = None
    residual: np.ndarray | None = None


def solve_lm(residual_fn, jacobian_fn, x0, tol=1e-10, max_iter=200,
             lam0=1e-3, accept_fn=None) -> LmResult:
    """Minimize ||r(x)||^2 by damped Gauss-Newton steps.

    residual_fn(x) -> r (1-D array); jacobian_fn(x) -> dr/dx with shape
    (len(r), len(x)).  accept_fn(x) may veto candidate parameter vectors
    (e.g. to keep quality factors positive).  Converged when the largest
    relative parameter step falls below tol, the relative cost decrease falls
    below tol, the scale-weighted gradient max_i |g_i| (|x_i| + 1) falls
    below tol * max(1, cost), or no damped step can lower the cost any
    further (roundoff floor).  Accepted steps never increase the cost.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = residual_fn(x)
    cost = float(r @ r)
    lam = lam0
    history = [cost]
    converged = False
    n_accepted = 0
    grad_norm = np.inf
    jac = None

    for _ in range(max_iter):
        jac = jacobian_fn(x)
        g = jac.T @ r
        # per-parameter scale weighting keeps unit choices (Hz vs rad) from
        # dominating the test
        grad_norm = float(np.max(np.abs(g) * (np.abs(x) + 1.0)))
        if grad_norm <= tol * max(1.0, cost):
            converged = True
            break

        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag <= 0] = 1.0

        stepped = False
        for _trial in range(60):
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                raise DegenerateFitError("singular normal matrix") from None
            x_new = x - delta
            if accept_fn is not None and not accept_fn(x_new):
                lam *= 4.0
                continue
            r_new = residual_fn(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                rel_step = float(np.max(np.abs(delta) / (np.abs(x) + 1e-300)))
                decrease = cost - cost_new
                x, r, cost = x_new, r_new, cost_new
                history.append(cost)
                n_accepted += 1
                lam = max(lam / 3.0, 1e-14)
                stepped = True
                if rel_step < tol or decrease <= tol * max(cost, 1e-300):
                    converged = True
                break
            lam *= 4.0
        if not stepped:
            # damping exhausted without any cost increase being avoidable:
            # we are at the representable minimum
            converged = True
        if converged or not stepped:
            break

    if jac is None:
        jac = jacobian_fn(x)
    return LmResult(x=x, cost=cost, n_iter=n_accepted, converged=converged,
                    grad_norm=grad_norm, cost_history=history,
                    jacobian=jac, residual=r)


def covariance_from_fit(jac: np.ndarray, cost: float, n_params: int) -> np.ndarray:
    """Residual-variance-scaled inverse normal matrix.

    sigma^2 = cost / (n_res - n_params); cov = sigma^2 (J^T J)^{-1}.
    Raises DegenerateFitError when the normal matrix is singular.
    """
    n_res = jac.shape[0]
    dof = max(n_res - n_params, 1)
    jtj = jac.T @ jac
    try:
        inv = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        raise DegenerateFitError("singular normal matrix") from None
    return (cost / dof) * inv
