"""Constitutive scalar functions of the density.

Implements the viscosity law h(rho) = rho + eps*rho^(7/8) + eps*rho^gamma
and the whole family it generates: the second viscosity g = rho*h' - h, the
effective potential phi with rho*phi' = h', the damping coefficient
ptilde(rho) = lambda(eps)*(rho^(1/eps^2) + rho^(-1/eps^2)), the cold
pressure p with p' = mu*ptilde*h'/rho, and the entropy density f with
p = rho*f' - f.

p and f are evaluated from canonical six-term closed forms regenerated from
those defining relations (term-by-term antiderivatives with no integration
constant for p, no homogeneous C*rho term for f).  All rho^(+-1/eps^2)
terms are evaluated in log space: the amplitude carries the factor
lambda(eps) = exp(-1/eps^4), which underflows on its own for eps below
about 0.28, while rho^(1/eps^2) alone can overflow; combining the exponents
first keeps every term finite whenever its true value is representable and
lets tiny terms underflow gracefully to zero.

All evaluators are pure, accept scalars or numpy arrays, and apply the same
ufunc chain either way, so field-wise evaluation is bit-identical to
point-wise evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import instrumentation
from .errors import DomainError
from .params import ModelParams, derived_mu, epsilon_f

__all__ = [
    "CoefficientSet",
    "eval_h", "eval_h_prime", "eval_h_second", "eval_g",
    "eval_phi", "eval_phi_prime", "eval_ptilde",
    "eval_p", "eval_p_prime", "eval_f", "eval_f_prime", "eval_f_second",
    "pressure_terms", "entropy_terms",
]


def _as_positive(rho, what: str, strict: bool = True):
    arr = np.asarray(rho, dtype=np.float64)
    if strict:
        if np.any(arr <= 0.0):
            raise DomainError(f"{what} requires rho > 0")
    else:
        if np.any(arr < 0.0):
            raise DomainError(f"{what} requires rho >= 0")
    return arr


def eval_h(rho, params: ModelParams):
    """Viscosity law h(rho) = rho + eps*(rho^(7/8) + rho^gamma);  h(0) = 0."""
    r = _as_positive(rho, "h", strict=False)
    if params.eps == 0.0:
        return r + 0.0
    return r + params.eps * (r**0.875 + r**params.gamma)


def eval_h_prime(rho, params: ModelParams):
    """h'(rho) = 1 + eps*((7/8)*rho^(-1/8) + gamma*rho^(gamma-1));  >= 1 for rho > 0."""
    r = _as_positive(rho, "h'", strict=False)
    if params.eps == 0.0:
        return np.ones_like(r) if r.shape else 1.0
    with np.errstate(divide="ignore"):
        return 1.0 + params.eps * (0.875 * r**-0.125 + params.gamma * r ** (params.gamma - 1.0))


def eval_h_second(rho, params: ModelParams):
    """h''(rho) = eps*(-(7/64)*rho^(-9/8) + gamma*(gamma-1)*rho^(gamma-2)).

    Diverges at rho = 0 (exponent 7/8 - 2 < 0); the divergence is flagged by
    an infinite return value, never extrapolated.
    """
    r = _as_positive(rho, "h''", strict=False)
    g = params.gamma
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    with np.errstate(divide="ignore"):
        return params.eps * (-(7.0 / 64.0) * r**-1.125 + g * (g - 1.0) * r ** (g - 2.0))


def eval_g(rho, params: ModelParams):
    """Second viscosity g = rho*h' - h = eps*(-(1/8)*rho^(7/8) + (gamma-1)*rho^gamma)."""
    r = _as_positive(rho, "g", strict=False)
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    return params.eps * (-(0.125) * r**0.875 + (params.gamma - 1.0) * r**params.gamma)


def eval_phi(rho, params: ModelParams):
    """Effective potential: the antiderivative of h'(rho)/rho with zero constants,
    phi(rho) = log(rho) - 7*eps*rho^(-1/8) + (eps*gamma/(gamma-1))*rho^(gamma-1).

    Only grad(phi) enters the dynamics; the additive normalization is a
    convention.  eps = 0 gives log(rho).
    """
    r = _as_positive(rho, "phi")
    if params.eps == 0.0:
        return np.log(r)
    g = params.gamma
    return np.log(r) + params.eps * (-7.0 * r**-0.125 + g / (g - 1.0) * r ** (g - 1.0))


def eval_phi_prime(rho, params: ModelParams):
    """phi'(rho) = h'(rho)/rho."""
    r = _as_positive(rho, "phi'")
    return eval_h_prime(r, params) / r


def eval_ptilde(rho, params: ModelParams):
    """Damping coefficient lambda(eps)*(rho^(1/eps^2) + rho^(-1/eps^2)).

    Evaluated as exp(log(lambda) + a*|log rho|)*(1 + exp(-2a*|log rho|)) with
    a = 1/eps^2, which never forms rho^(1/eps^2) on its own.
    """
    r = _as_positive(rho, "ptilde")
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    instrumentation.bump("eval_ptilde")
    a = 1.0 / params.eps**2
    logl = -1.0 / params.eps**4
    al = a * np.abs(np.log(r))
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(logl + al) * (1.0 + np.exp(-2.0 * al))


# --- canonical six-term closed forms -------------------------------------
#
# Each term is (sign, log|amplitude|, exponent); amplitudes all carry the
# factor mu*lambda(eps).  With a = 1/eps^2:
#
#   p: +mu*eps^2*L * rho^a              f: +mu*eps^4*L/(1-eps^2)                     * rho^a
#      +7*mu*eps^3*L/(8-eps^2) ^        +56*mu*eps^5*L/((8-eps^2)(8-9eps^2))         * rho^(a-1/8)
#      +mu*eps^3*L*g/(1+eps^2(g-1))     +mu*eps^5*L*g/((1+eps^2(g-1))(1+eps^2(g-2))) * rho^(a+g-1)
#      -mu*eps^2*L * rho^-a             +mu*eps^4*L/(1+eps^2)                        * rho^-a
#      -7*mu*eps^3*L/(8+eps^2)          +56*mu*eps^5*L/((8+eps^2)(8+9eps^2))         * rho^(-a-1/8)
#      -mu*eps^3*L*g/(1-eps^2(g-1))     +mu*eps^5*L*g/((1-eps^2(g-1))(1-eps^2(g-2))) * rho^(-a+g-1)


def _check_regularized(params: ModelParams, what: str) -> tuple[float, float, float]:
    if params.eps <= 0.0:
        raise DomainError(f"{what} requires eps > 0")
    ef = epsilon_f(params.gamma)
    if params.eps >= ef:
        raise DomainError(
            f"{what} requires eps < eps_f(gamma) = {ef:.6g}, got eps = {params.eps}")
    mu = derived_mu(params.nu, params.kappa)
    return mu, params.eps, params.gamma


def pressure_terms(params: ModelParams) -> list[tuple[float, float, float]]:
    """Canonical cold-pressure terms as (sign, log|amplitude|, exponent)."""
    mu, e, g = _check_regularized(params, "p")
    a = 1.0 / e**2
    logl = -1.0 / e**4
    lm, le = math.log(mu), math.log(e)
    return [
        (+1.0, lm + 2 * le + logl, a),
        (+1.0, lm + 3 * le + math.log(7.0 / (8.0 - e**2)) + logl, a - 0.125),
        (+1.0, lm + 3 * le + math.log(g / (1.0 + e**2 * (g - 1.0))) + logl, a + g - 1.0),
        (-1.0, lm + 2 * le + logl, -a),
        (-1.0, lm + 3 * le + math.log(7.0 / (8.0 + e**2)) + logl, -a - 0.125),
        (-1.0, lm + 3 * le + math.log(g / (1.0 - e**2 * (g - 1.0))) + logl, -a + g - 1.0),
    ]


def entropy_terms(params: ModelParams) -> list[tuple[float, float, float]]:
    """Canonical entropy-density terms as (sign, log|amplitude|, exponent)."""
    mu, e, g = _check_regularized(params, "f")
    a = 1.0 / e**2
    logl = -1.0 / e**4
    lm, le = math.log(mu), math.log(e)
    return [
        (+1.0, lm + 4 * le - math.log(1.0 - e**2) + logl, a),
        (+1.0, lm + 5 * le + math.log(56.0 / ((8.0 - e**2) * (8.0 - 9.0 * e**2))) + logl,
         a - 0.125),
        (+1.0, lm + 5 * le + math.log(g / ((1.0 + e**2 * (g - 1.0)) * (1.0 + e**2 * (g - 2.0))))
         + logl, a + g - 1.0),
        (+1.0, lm + 4 * le - math.log(1.0 + e**2) + logl, -a),
        (+1.0, lm + 5 * le + math.log(56.0 / ((8.0 + e**2) * (8.0 + 9.0 * e**2))) + logl,
         -a - 0.125),
        (+1.0, lm + 5 * le + math.log(g / ((1.0 - e**2 * (g - 1.0)) * (1.0 - e**2 * (g - 2.0))))
         + logl, -a + g - 1.0),
    ]


def _eval_terms(terms, logr, order: int):
    """Sum sign * d^order/drho^order [exp(logA + s*log rho)] over terms."""
    out = 0.0
    with np.errstate(over="ignore", under="ignore"):
        for sign, loga, s in terms:
            if order == 0:
                coef = sign
                shift = 0.0
            elif order == 1:
                coef = sign * s
                shift = 1.0
            else:
                coef = sign * s * (s - 1.0)
                shift = 2.0
            out = out + coef * np.exp(loga + (s - shift) * logr)
    return out


def eval_p(rho, params: ModelParams):
    """Cold pressure from the canonical closed form; zero when eps = 0."""
    r = _as_positive(rho, "p")
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    instrumentation.bump("eval_p")
    return _eval_terms(pressure_terms(params), np.log(r), 0)


def eval_p_prime(rho, params: ModelParams):
    """p'(rho) = mu*ptilde(rho)*h'(rho)/rho (the defining relation)."""
    r = _as_positive(rho, "p'")
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    mu = derived_mu(params.nu, params.kappa)
    return mu * eval_ptilde(r, params) * eval_h_prime(r, params) / r


def eval_f(rho, params: ModelParams):
    """Entropy density from the canonical closed form; zero when eps = 0."""
    r = _as_positive(rho, "f")
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    return _eval_terms(entropy_terms(params), np.log(r), 0)


def eval_f_prime(rho, params: ModelParams):
    r = _as_positive(rho, "f'")
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    return _eval_terms(entropy_terms(params), np.log(r), 1)


def eval_f_second(rho, params: ModelParams):
    """f''(rho); positive for every rho > 0 when eps < eps_f(gamma)."""
    r = _as_positive(rho, "f''")
    if params.eps == 0.0:
        return np.zeros_like(r) if r.shape else 0.0
    return _eval_terms(entropy_terms(params), np.log(r), 2)


@dataclass(frozen=True)
class CoefficientSet:
    """Bundle of all constitutive functions for a fixed parameter set."""

    params: ModelParams
    h: Callable
    h_prime: Callable
    h_second: Callable
    g: Callable
    phi: Callable
    phi_prime: Callable
    ptilde: Callable
    p: Callable
    p_prime: Callable
    f: Callable
    f_prime: Callable
    f_second: Callable

    @classmethod
    def from_params(cls, params: ModelParams) -> "CoefficientSet":
        def bind(fn):
            return lambda rho: fn(rho, params)

        return cls(
            params=params,
            h=bind(eval_h), h_prime=bind(eval_h_prime), h_second=bind(eval_h_second),
            g=bind(eval_g), phi=bind(eval_phi), phi_prime=bind(eval_phi_prime),
            ptilde=bind(eval_ptilde), p=bind(eval_p), p_prime=bind(eval_p_prime),
            f=bind(eval_f), f_prime=bind(eval_f_prime), f_second=bind(eval_f_second),
        )
