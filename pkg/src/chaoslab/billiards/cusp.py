"""Scale constant of the stable law for tables with a cusp.

I_psi = 1/4 int_0^pi (psi(q'', phi) + psi(q', phi)) sin(phi)**(1/alpha) dphi
sigma = 2 I_psi / (eta |dQ|),  alpha = eta / (eta - 1)

q' and q'' are the coordinates of the cusp tip seen from the two curves
meeting there; psi is evaluated at those one-sided limits.
"""
import warnings

import numpy as np
from scipy import integrate

from ..errors import ConfigurationError, ConvergenceError


def cusp_alpha(eta):
    return eta / (eta - 1.0)


def _integrand(psi, q1, q2, alpha):
    def f(phi):
        return 0.25 * (psi(q2, phi) + psi(q1, phi)) * np.sin(phi) ** (1.0 / alpha)

    return f


def cusp_integral(eta, psi, q_prime, q_double_prime, tol=1e-10):
    """I_psi by adaptive quadrature."""
    if eta < 2.0:
        raise ConfigurationError(f"cusp exponent must be at least 2, got {eta}")
    f = _integrand(psi, q_prime, q_double_prime, cusp_alpha(eta))
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, 0.0, np.pi, epsabs=tol, epsrel=1e-12, limit=200)
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"cusp integral did not converge: {exc}") from None
    if err > 10 * tol:
        raise ConvergenceError(f"cusp integral error estimate {err:.2e} above {tol:g}")
    return float(val)


def cusp_integral_riemann(eta, psi, q_prime, q_double_prime, points=10**6):
    """Midpoint-rule value of I_psi, used as an independent check."""
    h = np.pi / points
    phi = (np.arange(points) + 0.5) * h
    f = _integrand(psi, q_prime, q_double_prime, cusp_alpha(eta))
    return float(np.sum(f(phi)) * h)


def cusp_sigma(eta, psi, q_prime, q_double_prime, total_length, tol=1e-10):
    """sigma = 2 I_psi / (eta |dQ|)."""
    if not total_length > 0:
        raise ConfigurationError("total boundary length must be positive")
    return 2.0 * cusp_integral(eta, psi, q_prime, q_double_prime, tol) / (eta * total_length)


def tip_coordinates(table):
    """(q', q'') of the cusp tip: end of the inward curve and start of the outward one."""
    tips = []
    for k, p in zip(table.kinds, table.pieces):
        if k == 2:
            start = float(table.offsets[table.pieces.index(p)])
            tips.append(start if p.params[3] > 0 else start + p.length)
    if len(tips) != 2:
        raise ConfigurationError("table has no cusp")
    return max(tips), min(tips)
