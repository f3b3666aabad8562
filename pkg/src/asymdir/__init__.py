"""Numerical companion for the asymptotic Dirichlet problem for ``Q[u] = 0``
on rotationally symmetric Hadamard manifolds.

Modules: ``operator`` (structure functions ``a``), ``manifold`` (warping
functions), ``barrier`` (the radial supersolution), ``sc_geometry`` (the
hypersurfaces ``S_R``), ``exhaustion`` (the bump/step skeleton), ``solver``
(discrete Dirichlet problems and oracles) and ``cli``.
"""

__version__ = "0.1.0"

from . import barrier, exhaustion, manifold, operator, sc_geometry, solver  # noqa: E402,F401
from .errors import (  # noqa: E402,F401
    AsymDirError,
    CalibrationError,
    ConfigError,
    DomainError,
    IntegratorError,
    NonConvergenceError,
    PreconditionError,
    RangeError,
    VerificationError,
)
