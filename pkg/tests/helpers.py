"""Independent oracles used by the tests.

Everything here is deliberately written from the model definitions with
plain loops and brute force, not via the library's own code paths, so that
tests compare two independent routes to the same quantity.
"""

from itertools import permutations

import numpy as np
from scipy.optimize import linprog


# ----------------------------------------------------------------------
# direct recursive exposure models (items are 0-based item-at-rank tuples)


def dbn_exposure_direct(items, gamma, kappa, rho):
    """Generic model: eps_k = eps_{k-1} * gamma * (1 - kappa*rho[d_{k-1}])."""
    n = len(items)
    out = [0.0] * n
    eps = 1.0
    for rank, item in enumerate(items):
        out[item] = eps
        eps = eps * gamma * (1.0 - kappa * rho[item])
    return np.array(out)


def cm_exposure_direct(items, alpha):
    """Cascade: eps_k = eps_{k-1} * (1 - alpha[d_{k-1}])."""
    out = [0.0] * len(items)
    eps = 1.0
    for item in items:
        out[item] = eps
        eps = eps * (1.0 - alpha[item])
    return np.array(out)


def sdbn_exposure_direct(items, alpha, sigma):
    """Simplified model: eps_k = eps_{k-1} * (1 - alpha*sigma at d_{k-1})."""
    out = [0.0] * len(items)
    eps = 1.0
    for item in items:
        out[item] = eps
        eps = eps * (1.0 - alpha[item] * sigma[item])
    return np.array(out)


def dcm_exposure_direct(items, alpha, lam):
    """Dependent-click: eps_k = eps_{k-1} * (1 - alpha*(1-lam) at d_{k-1})."""
    out = [0.0] * len(items)
    eps = 1.0
    for item in items:
        out[item] = eps
        eps = eps * (1.0 - alpha[item] * (1.0 - lam))
    return np.array(out)


def ccm_exposure_direct(items, alpha, tau1, tau2, tau3):
    """Click-chain: eps_k = eps_{k-1} * (a((1-a)t2 + a t3) + (1-a)t1)."""
    out = [0.0] * len(items)
    eps = 1.0
    for item in items:
        out[item] = eps
        a = alpha[item]
        eps = eps * (a * ((1.0 - a) * tau2 + a * tau3) + (1.0 - a) * tau1)
    return np.array(out)


# ----------------------------------------------------------------------
# brute-force polytope machinery


def all_rankings(n):
    return list(permutations(range(n)))


def vertex_matrix(gamma, kappa, rho):
    """(n!, n) matrix of exposure vectors of every ranking, via the oracle."""
    return np.vstack(
        [dbn_exposure_direct(items, gamma, kappa, rho) for items in all_rankings(len(rho))]
    )


def hull_contains(point, vertices):
    """Exact membership in conv(vertices) as a linear feasibility problem."""
    count = vertices.shape[0]
    a_eq = np.vstack([vertices.T, np.ones(count)])
    b_eq = np.append(np.asarray(point, dtype=float), 1.0)
    result = linprog(
        c=np.zeros(count),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0.0, None),
        method="highs",
    )
    return result.status == 0


def random_hull_point(rng, vertices, atoms=None):
    """Random convex combination of hull vertices (feasible by construction)."""
    count = vertices.shape[0]
    k = atoms or int(rng.integers(2, min(count, 8) + 1))
    picks = rng.choice(count, size=k, replace=False)
    weights = rng.dirichlet(np.ones(k))
    return weights @ vertices[picks]
