"""Frequency initialization strategies for oscillator networks.

Four ways to choose the natural-frequency vector a network starts
training from: small random frequencies on the learnable nodes, a
deterministic seed built from the eigenmodes of the coupling graph's
Laplacian, a bare output dipole, and a screened pick over several
random draws.

All initializers leave input-node entries at zero; inputs are driven
by data, not by learnable frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import solve
from .graph import CouplingGraph, DisconnectedGraphError, eig_symmetric, laplacian, reduce


class SpectrallyIndistinguishableError(ValueError):
    """The two output nodes cannot be separated by any Laplacian mode."""


@dataclass(frozen=True)
class SeedSpec:
    """Parameters of the spectral seeding rule.

    out1 and out2 are the output node indices the seed should drive
    apart. alpha_max is the largest absolute frequency after
    normalization.
    """

    out1: int
    out2: int
    alpha_max: float = 0.3

    def __post_init__(self) -> None:
        if self.out1 == self.out2:
            raise ValueError("out1 and out2 must differ")
        if not self.alpha_max > 0:
            raise ValueError("alpha_max must be positive")


def spectral_seed(g: CouplingGraph, spec: SeedSpec) -> np.ndarray:
    """Deterministic frequency seed from the graph's Laplacian eigenmodes.

    Builds the Laplacian of the coupling graph at its initial weights,
    pins node 0, and eigendecomposes the reduced matrix. Each mode is
    weighted by its signed output separation divided by its eigenvalue,
    and the modes are summed. The result is scaled so the largest
    absolute entry equals spec.alpha_max, then the pinned node and all
    input nodes are set to zero.

    The eigenvector sign convention is fixed inside eig_symmetric, so
    the returned vector is reproducible. Swapping out1 and out2 negates
    the vector.
    """
    for out in (spec.out1, spec.out2):
        if not 0 <= out < g.n:
            raise ValueError(f"output index {out} out of range")
        if out == 0:
            raise ValueError("output node coincides with the pinned reference node")

    lap = laplacian(g, g.edge_weights())
    lap_red = reduce(lap, 0)
    decomp = eig_symmetric(lap_red)
    evals = decomp.eigenvalues
    evecs = decomp.eigenvectors

    scale = float(evals[-1]) if evals.size else 0.0
    if evals.size == 0 or evals[0] <= 1e-12 * max(scale, 1.0):
        raise DisconnectedGraphError(
            "reduced Laplacian is singular; the coupling graph is not connected"
        )

    r1, r2 = spec.out1 - 1, spec.out2 - 1
    separation = evecs[r1, :] - evecs[r2, :]
    if np.max(np.abs(separation)) < 1e-12:
        raise SpectrallyIndistinguishableError(
            "no Laplacian mode separates the two output nodes"
        )

    omega = np.zeros(g.n)
    omega[1:] = evecs @ (separation / evals)
    omega *= spec.alpha_max / np.max(np.abs(omega))
    omega[0] = 0.0
    for node in g.input_nodes:
        omega[node] = 0.0
    return omega


def random_init(g: CouplingGraph, sigma: float, rng) -> np.ndarray:
    """Gaussian frequencies on hidden and output nodes, zero on inputs.

    Entries are drawn in ascending node order so the draw sequence is
    well defined for a given generator state.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    omega = np.zeros(g.n)
    for node in sorted(g.hidden_nodes + g.output_nodes):
        omega[node] = rng.normal(0.0, sigma)
    return omega


def output_only_init(g: CouplingGraph, magnitude: float) -> np.ndarray:
    """Antisymmetric dipole on the two outputs, zero everywhere else."""
    if len(g.output_nodes) != 2:
        raise ValueError("output-only initialization needs exactly two output nodes")
    out1, out2 = g.output_nodes
    omega = np.zeros(g.n)
    omega[out1] = magnitude
    omega[out2] = -magnitude
    return omega


def multi_start_screen(
    g: CouplingGraph, n_starts: int, rng, sigma: float = 0.3
) -> np.ndarray:
    """Best of several random inits, scored by free-run output separation.

    Draws n_starts random frequency vectors, solves the free equilibrium
    for each, and keeps the one whose outputs sit farthest apart in
    phase. Candidates whose solve does not converge score worst. Ties go
    to the earliest draw, so n_starts=1 reproduces random_init exactly.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be at least 1")
    if len(g.output_nodes) != 2:
        raise ValueError("screening needs exactly two output nodes")
    out1, out2 = g.output_nodes

    best = None
    best_score = -np.inf
    for _ in range(n_starts):
        omega = random_init(g, sigma, rng)
        result = solve(g, omega)
        if result.converged:
            score = abs(result.theta_star[out1] - result.theta_star[out2])
        else:
            score = -np.inf
        if best is None or score > best_score:
            best = omega
            best_score = score
    return best
