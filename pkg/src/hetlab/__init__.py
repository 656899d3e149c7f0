"""Heteroclinic solutions of -(phi(|u'|)u')' + V'(u) = 0.

Two routes are provided: the first-order reduction y' = G^{-1}(V(y))
(``cauchy``) and direct minimisation of the discrete action
(``minimizer``).  ``verify`` checks a computed profile against the
structural properties every heteroclinic must have.
"""

from ._backend import BACKEND
from .errors import HetlabError

__version__ = "0.1.0"
__all__ = ["BACKEND", "HetlabError", "__version__"]
