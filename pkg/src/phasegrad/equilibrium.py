"""Free and nudged Kuramoto equilibria.

The synchronized state of dtheta_i/dt = omega_i + sum_j K_ij sin(theta_j
- theta_i) is a root of the same expression with mean-centered
frequencies. Global rotation is removed by pinning node 0 to phase zero
and solving the reduced system over the remaining N-1 nodes with damped
Newton iteration. A nudge adds a restoring force -beta (theta_i -
target_i) at output nodes; its Jacobian contribution is -beta on the
corresponding diagonal entries.

Phases are kept unwrapped throughout: downstream gradient formulas take
differences of equilibria, which modular reduction would corrupt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import CouplingGraph, FloatArray


class EquilibriumNotConverged(RuntimeError):
    """Raised by callers that require convergence (training skips instead)."""


@dataclass(frozen=True)
class OscillatorState:
    """Phase and natural-frequency configuration with node `pin` at 0."""

    theta: FloatArray
    omega: FloatArray
    pin: int = 0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        omega = np.asarray(self.omega, dtype=np.float64)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "omega", omega)
        if theta.shape != omega.shape or theta.ndim != 1:
            raise ValueError("theta and omega must be 1-d and the same length")
        if not 0 <= self.pin < theta.shape[0]:
            raise ValueError("pin index out of range")
        if theta[self.pin] != 0.0:
            raise ValueError("pinned phase must be exactly 0")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(omega))):
            raise ValueError("non-finite entries")


@dataclass(frozen=True)
class NudgeSpec:
    """Weak clamp of output phases toward targets with strength beta."""

    beta: float
    targets: tuple[float, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if len(self.targets) != len(self.outputs):
            raise ValueError("targets and outputs must align")
        if len(self.outputs) == 0:
            raise ValueError("empty output set")


@dataclass(frozen=True)
class EquilibriumResult:
    theta_star: FloatArray
    residual_inf: float
    iterations: int
    jacobian_cond: float
    converged: bool


def center_frequencies(omega: FloatArray) -> FloatArray:
    """omega minus its mean; the coordinate the dynamics actually see."""
    omega = np.asarray(omega, dtype=np.float64)
    if omega.size == 0:
        raise ValueError("empty frequency vector")
    return omega - omega.mean()


def _nudge_arrays(nudge: NudgeSpec | None, g: CouplingGraph):
    if nudge is None:
        return 0.0, *_kernels.no_nudge()
    if not set(nudge.outputs) <= set(g.output_nodes):
        raise ValueError("nudged nodes must be output nodes of the graph")
    out = np.array(nudge.outputs, dtype=np.int64)
    tgt = np.array(nudge.targets, dtype=np.float64)
    return float(nudge.beta), out, tgt


def residual(theta: FloatArray, omega_c: FloatArray, g: CouplingGraph,
             nudge: NudgeSpec | None = None) -> FloatArray:
    """Full N-vector of equilibrium-equation residuals at `theta`."""
    beta, out, tgt = _nudge_arrays(nudge, g)
    return _kernels.residual_full(
        np.ascontiguousarray(theta, dtype=np.float64),
        np.ascontiguousarray(omega_c, dtype=np.float64),
        g.coupling_matrix(), beta, out, tgt)


def jacobian(theta: FloatArray, g: CouplingGraph,
             nudge: NudgeSpec | None = None) -> FloatArray:
    """Full N x N derivative of the residual with respect to theta."""
    beta, out, _ = _nudge_arrays(nudge, g)
    return _kernels.jacobian_full(
        np.ascontiguousarray(theta, dtype=np.float64),
        g.coupling_matrix(), beta, out)


def condition_number(m: FloatArray) -> float:
    """2-norm condition number, sigma_max / sigma_min.

    Symmetric input goes through the eigenvalue route (singular values
    of a symmetric matrix are the absolute eigenvalues); anything else
    falls back to a full SVD.
    """
    m = np.asarray(m, dtype=np.float64)
    scale = np.max(np.abs(m)) or 1.0
    if np.max(np.abs(m - m.T)) <= 1e-12 * scale:
        mags = np.abs(np.linalg.eigvalsh(m))
    else:
        mags = np.linalg.svd(m, compute_uv=False)
    lo = mags.min()
    if lo == 0.0:
        return np.inf
    return float(mags.max() / lo)


def solve(g: CouplingGraph, omega: FloatArray,
          nudge: NudgeSpec | None = None,
          warm_start: FloatArray | None = None, *,
          tol: float = 1e-12, max_iter: int = 200,
          omega_is_centered: bool = False) -> EquilibriumResult:
    """Damped Newton solve of the reduced system, pinned at node 0.

    Starts from `warm_start` (any full phase vector; entry 0 is forced
    to zero) or from zero phases. Residuals and convergence are judged
    in the max norm over the reduced equations at tolerance `tol`. The
    returned condition number is that of the reduced Jacobian, with the
    nudge term included when one is active.

    Non-convergence is reported in the result, not raised; callers that
    need a hard failure check `.converged`.
    """
    omega = np.ascontiguousarray(omega, dtype=np.float64)
    if omega.shape[0] != g.n:
        raise ValueError("omega length does not match graph size")
    omega_c = omega if omega_is_centered else center_frequencies(omega)
    omega_c = np.ascontiguousarray(omega_c)
    beta, out, tgt = _nudge_arrays(nudge, g)
    theta0 = (np.zeros(g.n) if warm_start is None
              else np.ascontiguousarray(warm_start, dtype=np.float64).copy())
    k_mat = g.coupling_matrix()
    theta, res_inf, iters, ok = _kernels.newton_solve(
        k_mat, omega_c, beta, out, tgt, theta0, tol, max_iter)
    from . import graph as _graph
    jac_red = _graph.reduce(_kernels.jacobian_full(theta, k_mat, beta, out), 0)
    cond = condition_number(jac_red)
    return EquilibriumResult(
        theta_star=theta, residual_inf=float(res_inf), iterations=int(iters),
        jacobian_cond=cond, converged=bool(ok))
