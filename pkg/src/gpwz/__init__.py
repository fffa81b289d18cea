"""Leading-order asymptotics of the Gurevich-Pitaevskii solution of KdV.

Modules
-------
specfun      complete elliptic integrals and Jacobi functions
outer        outer branches of the cusp cubic
modulation   Whitham-zone modulation parameters and residual checks
asymptotics  modulated cnoidal wave and composite evaluation
gp_bvp       fixed-t boundary value solver for the fourth-order ODE
phase_fit    phase-shift and error-scaling fits
cli          command-line interface (``gpwz``)
"""

__version__ = "0.1.0"
