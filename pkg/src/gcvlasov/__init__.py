"""Strong-magnetic-field Vlasov-Poisson toolkit.

Full-orbit particle-in-cell and drift-kinetic (guiding-center) solvers with
the diagnostics needed to compare them as the cyclotron period goes to zero.
"""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
