"""Viscous stress and the capillarity tensor in its equivalent divergence forms.

The capillarity (dispersive) contribution enters the momentum equation only
through its divergence, which admits three algebraically equivalent forms:

  A:  2*rho*grad( h'(rho) * div(h'(rho) grad sqrt(rho)) / sqrt(rho) )
  B:  div( h * hess(phi(rho)) ) + grad( g * lap(phi(rho)) )
  C:  grad( h' * lap(h) ) - 4 * div( (h' grad sqrt(rho)) (x) (h' grad sqrt(rho)) )

with rho*phi' = h'.  Form C is the solver default: being a pure divergence
it contributes exactly zero to the total momentum on the torus.  Forms A
and B exist for the identity suite and the entropy diagnostics.  At eps = 0
(h = rho) all three reduce to the classical quantum/Bohm term
2*rho*grad(lap(sqrt rho)/sqrt rho).

sqrt(rho) and h' grad(sqrt rho) are always formed point-wise and then
differentiated spectrally; roots are never taken after differentiation, so
the composition order is deterministic for the identity tests.
"""

from __future__ import annotations

import numpy as np

from . import instrumentation
from .coeffs import eval_g, eval_h, eval_h_prime, eval_phi
from .errors import DensityNonPositive
from .fields import PeriodicGrid, ScalarField, TensorField, VectorField
from .params import ModelParams

__all__ = [
    "viscous_stress", "div_k_form_a", "div_k_form_b", "div_k_form_c",
    "bohm_div_k", "div_k_form_a_arr", "div_k_form_b_arr", "div_k_form_c_arr",
]


def _positive_values(rho) -> np.ndarray:
    vals = rho.values if isinstance(rho, ScalarField) else np.asarray(rho)
    if vals.min() <= 0.0:
        raise DensityNonPositive(f"density minimum {vals.min():.3e} is not positive")
    return vals


def viscous_stress(rho, v, params: ModelParams):
    """Both parts (h*Dv, g*div v*I) of the stress tensor, as TensorFields."""
    grid = v.grid if isinstance(v, VectorField) else rho.grid
    r = _positive_values(rho)
    vv = v.values if isinstance(v, VectorField) else np.asarray(v)
    G = grid.grad_vector_arr(vv)
    Dv = 0.5 * (G + np.swapaxes(G, 0, 1))
    divv = np.trace(G, axis1=0, axis2=1)
    h = eval_h(r, params)
    g = eval_g(r, params)
    eye = np.eye(grid.dim).reshape((grid.dim, grid.dim) + (1,) * grid.dim)
    return (TensorField(grid, h * Dv), TensorField(grid, g * divv * eye))


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[:, None] * b[None, :]


def div_k_form_a_arr(grid: PeriodicGrid, rho: np.ndarray, params: ModelParams) -> np.ndarray:
    instrumentation.bump("div_k")
    sq = np.sqrt(rho)
    hp = eval_h_prime(rho, params)
    inner = grid.div_arr(hp * grid.grad_arr(sq))
    return 2.0 * rho * grid.grad_arr(hp * inner / sq)


def div_k_form_b_arr(grid: PeriodicGrid, rho: np.ndarray, params: ModelParams) -> np.ndarray:
    instrumentation.bump("div_k")
    phi = eval_phi(rho, params)
    h = eval_h(rho, params)
    g = eval_g(rho, params)
    H = grid.hessian_arr(phi)
    lap_phi = np.trace(H, axis1=0, axis2=1)
    return grid.div_tensor_arr(h * H) + grid.grad_arr(g * lap_phi)


def div_k_form_c_arr(grid: PeriodicGrid, rho: np.ndarray, params: ModelParams) -> np.ndarray:
    instrumentation.bump("div_k")
    sq = np.sqrt(rho)
    hp = eval_h_prime(rho, params)
    a = hp * grid.grad_arr(sq)
    h = eval_h(rho, params)
    return (grid.grad_arr(hp * grid.laplacian_arr(h))
            - 4.0 * grid.div_tensor_arr(_outer(a, a)))


def _wrap(form_arr):
    def op(rho: ScalarField, params: ModelParams) -> VectorField:
        r = _positive_values(rho)
        return VectorField(rho.grid, form_arr(rho.grid, r, params))
    return op


div_k_form_a = _wrap(div_k_form_a_arr)
div_k_form_b = _wrap(div_k_form_b_arr)
div_k_form_c = _wrap(div_k_form_c_arr)


def bohm_div_k(rho: ScalarField, form: str = "a") -> VectorField:
    """The eps = 0 quantum term 2*rho*grad(lap(sqrt rho)/sqrt rho) in the
    requested equivalent form ('a', 'b' = rho-weighted log-Hessian, or
    'c' = conservative)."""
    r = _positive_values(rho)
    grid = rho.grid
    zero = ModelParams(nu=1.0, kappa=0.5, gamma=2.0, eps=0.0, dim=grid.dim)
    form_arr = {"a": div_k_form_a_arr, "b": div_k_form_b_arr, "c": div_k_form_c_arr}[form]
    return VectorField(grid, form_arr(grid, r, zero))
