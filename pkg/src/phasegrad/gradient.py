"""Loss gradients with respect to centered natural frequencies.

Three estimators of the same vector, kept deliberately independent so
they can cross-check each other:

* two-phase: nudge the outputs with strength beta and read
  -(theta^beta - theta*) / beta off the physical displacement;
* analytical: -Jtilde^{-1} e through the implicit function theorem,
  where e is the output phase error embedded in reduced coordinates;
* finite difference: re-solve under +-h perturbations of each reduced
  centered frequency coordinate and difference the loss.

Gradients are indexed by unpinned node: values[k-1] corresponds to
node k (node 0 is the phase reference and has no coordinate). The
per-edge coupling gradient from the same pair of equilibria is
[cos(theta_j* - theta_i*) - cos(theta_j^b - theta_i^b)] / beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import equilibrium as eq
from . import graph as graphmod
from .equilibrium import EquilibriumNotConverged, NudgeSpec
from .graph import CouplingGraph, FloatArray


class ZeroVectorError(ValueError):
    """Cosine similarity of a zero vector is undefined."""


@dataclass(frozen=True)
class LossSpec:
    """Quadratic phase loss over a set of output nodes."""

    outputs: tuple[int, ...]
    targets: tuple[float, ...]

    def __post_init__(self):
        if len(self.outputs) == 0:
            raise ValueError("outputs must be nonempty")
        if len(self.outputs) != len(self.targets):
            raise ValueError("outputs and targets must align")


@dataclass(frozen=True)
class GradientVector:
    """kind is 'frequency' (per unpinned node) or 'coupling' (per edge).
    beta_used is 0 for estimators that take the exact beta -> 0 limit."""

    values: FloatArray
    kind: str
    beta_used: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if self.kind not in ("frequency", "coupling"):
            raise ValueError(f"unknown gradient kind {self.kind!r}")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite gradient")


def loss(theta: FloatArray, spec: LossSpec) -> float:
    """0.5 * sum of squared phase errors at the outputs, unwrapped."""
    total = 0.0
    for node, tgt in zip(spec.outputs, spec.targets):
        d = theta[node] - tgt
        total += 0.5 * d * d
    return total


def _solved_free(g: CouplingGraph, omega: FloatArray, *,
                 omega_is_centered: bool = False) -> eq.EquilibriumResult:
    res = eq.solve(g, omega, omega_is_centered=omega_is_centered)
    if not res.converged:
        raise EquilibriumNotConverged(
            f"free equilibrium stalled at residual {res.residual_inf:.3e}")
    return res


def grad_two_phase(g: CouplingGraph, omega: FloatArray, spec: LossSpec,
                   beta: float) -> GradientVector:
    """Equilibrium-propagation estimate at finite beta."""
    free = _solved_free(g, omega)
    nudge = NudgeSpec(beta=beta, targets=spec.targets, outputs=spec.outputs)
    nudged = eq.solve(g, omega, nudge, warm_start=free.theta_star)
    if not nudged.converged:
        raise EquilibriumNotConverged(
            f"nudged equilibrium stalled at residual {nudged.residual_inf:.3e}")
    disp = (nudged.theta_star - free.theta_star)[1:]
    return GradientVector(values=-disp / beta, kind="frequency", beta_used=beta)


def grad_analytical(g: CouplingGraph, omega: FloatArray,
                    spec: LossSpec) -> GradientVector:
    """Exact gradient -Jtilde^{-1} e via a linear solve (no inverse formed).

    -Jtilde is symmetric positive definite at stable equilibria of a
    symmetric network, so a Cholesky solve is tried first; any failure
    falls back to LU.
    """
    free = _solved_free(g, omega)
    jac_red = graphmod.reduce(eq.jacobian(free.theta_star, g), 0)
    err = np.zeros(g.n)
    for node, tgt in zip(spec.outputs, spec.targets):
        err[node] = free.theta_star[node] - tgt
    err_red = err[1:]
    a = -jac_red  # grad = -Jtilde^{-1} e = (-Jtilde)^{-1} e
    try:
        c, low = scipy.linalg.cho_factor(a, check_finite=False)
        values = scipy.linalg.cho_solve((c, low), err_red, check_finite=False)
    except scipy.linalg.LinAlgError:
        values = np.linalg.solve(a, err_red)
    return GradientVector(values=values, kind="frequency", beta_used=0.0)


def grad_finite_difference(g: CouplingGraph, omega: FloatArray, spec: LossSpec,
                           h: float = 1e-5) -> GradientVector:
    """Centered differences in the reduced centered-frequency coordinates.

    Each unpinned coordinate k is shifted by +-h with no re-centering
    (the perturbed vector is fed to the solver as already centered),
    matching the coordinate system the other estimators differentiate.
    """
    free = _solved_free(g, omega)
    omega_c = eq.center_frequencies(np.asarray(omega, dtype=np.float64))
    values = np.empty(g.n - 1)
    for k in range(1, g.n):
        shifted = omega_c.copy()
        shifted[k] += h
        plus = _solved(g, shifted, free.theta_star)
        shifted[k] -= 2 * h
        minus = _solved(g, shifted, free.theta_star)
        values[k - 1] = (loss(plus.theta_star, spec)
                         - loss(minus.theta_star, spec)) / (2 * h)
    return GradientVector(values=values, kind="frequency", beta_used=0.0)


def _solved(g: CouplingGraph, omega_c: FloatArray,
            warm: FloatArray) -> eq.EquilibriumResult:
    res = eq.solve(g, omega_c, warm_start=warm, omega_is_centered=True)
    if not res.converged:
        raise EquilibriumNotConverged(
            f"perturbed equilibrium stalled at residual {res.residual_inf:.3e}")
    return res


def grad_coupling(theta_star: FloatArray, theta_beta: FloatArray, beta: float,
                  edges) -> GradientVector:
    """Per-edge coupling gradient from the same two equilibria."""
    theta_star = np.asarray(theta_star, dtype=np.float64)
    theta_beta = np.asarray(theta_beta, dtype=np.float64)
    values = np.empty(len(edges))
    for idx, (i, j, _) in enumerate(edges):
        free_cos = np.cos(theta_star[j] - theta_star[i])
        nudged_cos = np.cos(theta_beta[j] - theta_beta[i])
        values[idx] = (free_cos - nudged_cos) / beta
    return GradientVector(values=values, kind="coupling", beta_used=beta)


def cosine_similarity(a: FloatArray, b: FloatArray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))
