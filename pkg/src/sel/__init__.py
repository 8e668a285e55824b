"""sel: a desk-scale laboratory for singular fully nonlinear elliptic systems.

Solves F(D2u, Du, u, x) = u**(-p) * v**(-q) (and its companion equation)
with zero Dirichlet data on intervals, rectangles and disks, classifies
exponent regimes, builds barrier functions, and fits boundary asymptotics.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
