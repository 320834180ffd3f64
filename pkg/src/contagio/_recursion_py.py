"""NumPy implementation of the two-table loss recursion.

Fallback kernel used when the compiled extension is unavailable.  Both
kernels expose the same ``alpha_beta_forward`` signature and must stay
numerically identical; the test suite cross-checks them.
"""
import numpy as np

BACKEND = "python"


def advance_tables(alpha, beta, p, u, v, d):
    """Add one name to the (alpha, beta) state and return the new tables.

    ``alpha[h, k]`` carries the no-active-infection states (h realized units,
    k units at risk); ``beta[h, k]`` the infected states (h idiosyncratic
    units, k contagion units).  Shifting by ``d`` implements the index
    offsets of the recursion; out-of-range source terms are zero.
    """
    d = int(d)
    stay = (1.0 - p) * u
    expose = (1.0 - p) * (1.0 - u)
    alpha_new = stay * alpha
    alpha_new[:, d:] += expose * alpha[:, :-d]
    alpha_new[d:, :] += p * (1.0 - v) * alpha[:-d, :]
    beta_new = stay * beta
    beta_new[:, d:] += expose * beta[:, :-d]
    beta_new[d:, :] += p * beta[:-d, :]
    beta_new[d:, :] += p * v * alpha[:-d, :]
    return alpha_new, beta_new


def alpha_beta_forward(p, u, v, d):
    """Run the full recursion; returns the final (alpha, beta) arrays."""
    total = int(np.sum(d))
    alpha = np.zeros((total + 1, total + 1))
    beta = np.zeros((total + 1, total + 1))
    alpha[0, 0] = 1.0
    for pj, uj, vj, dj in zip(p, u, v, d):
        alpha, beta = advance_tables(alpha, beta, pj, uj, vj, dj)
    return alpha, beta
