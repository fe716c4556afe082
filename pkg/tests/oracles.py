"""Reference computations shared by several test modules."""
import math

import numpy as np
from scipy import integrate

from appletasting.core import sigmoid


def _mu(theta, x, game):
    p = sigmoid(theta * x)
    return game.l01 * p, 1.0 + (game.l11 - 1.0) * p


def grid_ids(grid, weights, x, game):
    """Regret and information gain integrals over a discrete posterior on a 1-d grid."""
    w = weights / weights.sum()
    mu0, mu1 = _mu(grid, x, game)
    best = np.minimum(mu0, mu1)
    info = 0.0
    for c in (0, 1):
        lik = sigmoid(grid * x) if c == 1 else sigmoid(-grid * x)
        p_c = w @ lik
        # KL(pi || pi | C=c) = sum pi log(pi / pi_c), with pi_c = pi * lik / p_c
        info += p_c * (w @ np.log(p_c / lik))
    return w @ (mu0 - best), w @ (mu1 - best), info


def uniform_ids(x, game, lo=-1.0, hi=1.0):
    """The same integrals for a continuous uniform posterior, by adaptive quadrature."""
    dens = 1.0 / (hi - lo)
    kink = [game.boundary_logit / x] if lo < game.boundary_logit / x < hi else None

    def q(f):
        return integrate.quad(lambda t: dens * f(t), lo, hi, points=kink, epsabs=1e-13)[0]

    d0 = q(lambda t: max(0.0, _mu(t, x, game)[0] - _mu(t, x, game)[1]))
    d1 = q(lambda t: max(0.0, _mu(t, x, game)[1] - _mu(t, x, game)[0]))
    p1 = q(lambda t: sigmoid(t * x))
    elog1 = q(lambda t: math.log(sigmoid(t * x)))
    elog0 = q(lambda t: math.log(sigmoid(-t * x)))
    info = p1 * (math.log(p1) - elog1) + (1 - p1) * (math.log(1 - p1) - elog0)
    return d0, d1, info
