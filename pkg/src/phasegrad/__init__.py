"""Equilibrium-propagation gradients on Kuramoto oscillator networks.

Submodules stay import-light; pull in what you need directly, e.g.
``from phasegrad.equilibrium import solve``. The training kernels live
behind numba and compile on first use.
"""

__version__ = "0.1.0"
