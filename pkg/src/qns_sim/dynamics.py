"""State, right-hand sides, the velocity transform, and explicit time stepping.

Both formulations evolve (density, momentum) in conserved form:

  primitive:  d rho/dt = -div(m),            m = rho*u
              d m /dt  = -div(m (x) u) - grad(rho^gamma + p(rho)) - ptilde(rho)*u
                         + 2*nu*[div(h Du) + grad(g div u)] + kappa^2 * divK_C

  effective:  d rho/dt = -div(m) + c*lap(h(rho)),            m = rho*v
              d m /dt  = -div(m (x) v) - grad(rho^gamma) - tilde_lambda(c)*grad(p)
                         - ptilde(rho)*v + c*lap(h v)
                         + 2*(nu-c)*div(h Dv) + (2*nu-c)*grad(g div v)
                         + tilde_kappa_sq(c) * divK_C

with v = u + c*grad(phi(rho)).  At c = mu both residual coefficients vanish
exactly (factored evaluation in params), and the cold pressure and
capillarity code paths are skipped entirely.

The right-hand sides gather all forward and inverse transforms of a stage
into four batched FFT calls; this is what keeps desk-scale runs (n <= 256,
tens of thousands of RK4 steps) in the seconds-to-a-minute range.

Explicit classical RK4 with a conservative stability clamp carries the time
integration.  Density positivity is enforced by aborting, never clipping:
clipping would silently corrupt the energy and entropy ledgers this
artifact exists to certify.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import instrumentation
from .coeffs import (eval_g, eval_h, eval_h_prime, eval_p, eval_phi,
                     eval_ptilde)
from .errors import DensityNonPositive, DomainError, StepTooSmall
from .fields import PeriodicGrid, ScalarField, VectorField
from .params import DerivedConstants, ModelParams

__all__ = [
    "State", "StepControl", "RunResult",
    "rhs_primitive", "rhs_effective", "to_effective", "to_primitive",
    "transform_residual", "step", "run",
    "make_density", "make_velocity",
]

PRIMITIVE = "primitive"
EFFECTIVE = "effective"


@dataclass(frozen=True)
class State:
    """Density / momentum pair with a formulation tag and time stamp."""

    rho: ScalarField
    mom: VectorField
    formulation: str = PRIMITIVE
    c: float | None = None          # transform constant for effective states
    time: float = 0.0
    mass0: float = field(default=None)

    def __post_init__(self):
        if self.formulation not in (PRIMITIVE, EFFECTIVE):
            raise DomainError(f"unknown formulation {self.formulation!r}")
        if self.formulation == EFFECTIVE and self.c is None:
            raise DomainError("effective states need the transform constant c")
        if self.rho.min() <= 0.0:
            raise DensityNonPositive(
                f"state density minimum {self.rho.min():.3e} is not positive")
        if self.mass0 is None:
            object.__setattr__(self, "mass0", self.rho.grid.integrate_arr(self.rho.values))

    @property
    def grid(self) -> PeriodicGrid:
        return self.rho.grid

    @classmethod
    def primitive(cls, grid: PeriodicGrid, rho: np.ndarray, u: np.ndarray | None = None,
                  mom: np.ndarray | None = None, time: float = 0.0) -> "State":
        rho = np.asarray(rho, dtype=np.float64)
        if (u is None) == (mom is None):
            raise DomainError("give exactly one of u or mom")
        m = rho * np.asarray(u, dtype=np.float64) if mom is None else np.asarray(mom)
        return cls(ScalarField.from_values(grid, rho),
                   VectorField.from_values(grid, m), PRIMITIVE, None, time)

    def mass(self) -> float:
        return self.grid.integrate_arr(self.rho.values)


@dataclass
class StepControl:
    """Time-step selection and positivity policy."""

    t_end: float
    cfl_safety: float = 0.3
    dt_max: float | None = None
    positivity_floor: float = 1e-10

    def __post_init__(self):
        if not (0.0 < self.cfl_safety <= 1.0):
            raise DomainError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.t_end < 0.0:
            raise DomainError("t_end must be >= 0")


def _grad_shift(grid: PeriodicGrid, rho: np.ndarray, params: ModelParams,
                c: float) -> np.ndarray:
    """c * rho * grad(phi(rho)) = c * 2*sqrt(rho)*h'(rho)*grad(sqrt rho), point-wise."""
    sq = np.sqrt(rho)
    return c * 2.0 * sq * eval_h_prime(rho, params) * grid.grad_arr(sq)


def to_effective(state: State, params: ModelParams, c: float) -> State:
    """Shift momentum by c*rho*grad(phi): (rho, rho*u) -> (rho, rho*v)."""
    if state.formulation != PRIMITIVE:
        raise DomainError("to_effective expects a primitive state")
    grid = state.grid
    mom_v = state.mom.values + _grad_shift(grid, state.rho.values, params, c)
    return State(state.rho, VectorField(grid, mom_v), EFFECTIVE, c, state.time)


def to_primitive(state: State, params: ModelParams) -> State:
    """Exact algebraic inverse of to_effective."""
    if state.formulation != EFFECTIVE:
        raise DomainError("to_primitive expects an effective state")
    grid = state.grid
    mom_u = state.mom.values - _grad_shift(grid, state.rho.values, params, state.c)
    return State(state.rho, VectorField(grid, mom_u), PRIMITIVE, None, state.time)


# -- fused right-hand sides --------------------------------------------------


def _rhs_primitive_arrays(grid: PeriodicGrid, rho: np.ndarray, mom: np.ndarray,
                          params: ModelParams, der: DerivedConstants,
                          collect: dict | None = None):
    d = grid.dim
    S = grid.shape
    u = mom / rho
    flux = mom[:, None] * u[None, :]
    P = rho**params.gamma + eval_p(rho, params)
    sq = np.sqrt(rho)
    h = eval_h(rho, params)

    # forward batch 1: [mom(d), flux(d*d), P, u(d), sq, h]
    fwd1 = np.concatenate([mom, flux.reshape((d * d,) + S), P[None], u,
                           sq[None], h[None]])
    F1 = grid.rfft(fwd1)
    ik, mask, mk2 = grid._ik, grid._mask, grid._mk2
    i_flux, i_p = d, d + d * d
    i_u, i_sq, i_h = i_p + 1, i_p + 1 + d, i_p + 2 + d

    # inverse batch 1: [divmom, divflux(d), gradP(d), gradu(d*d), gradsq(d), laph]
    B1 = 2 + 3 * d + d * d
    inv1 = np.empty((B1,) + F1.shape[1:], dtype=complex)
    inv1[0] = sum(ik[a] * F1[a] for a in range(d))
    for i in range(d):
        inv1[1 + i] = mask * sum(ik[j] * F1[i_flux + i * d + j] for j in range(d))
    for a in range(d):
        inv1[1 + d + a] = ik[a] * F1[i_p]
    for i in range(d):
        for j in range(d):
            inv1[1 + 2 * d + i * d + j] = ik[j] * F1[i_u + i]
    for a in range(d):
        inv1[1 + 2 * d + d * d + a] = ik[a] * F1[i_sq]
    inv1[B1 - 1] = mk2 * F1[i_h]
    out1 = grid.irfft(inv1)

    divmom = out1[0]
    divflux = out1[1:1 + d]
    gradP = out1[1 + d:1 + 2 * d]
    gradu = out1[1 + 2 * d:1 + 2 * d + d * d].reshape((d, d) + S)
    gradsq = out1[1 + 2 * d + d * d:1 + 3 * d + d * d]
    laph = out1[B1 - 1]

    Du = 0.5 * (gradu + np.swapaxes(gradu, 0, 1))
    divu = np.trace(gradu, axis1=0, axis2=1)
    hp = eval_h_prime(rho, params)
    a_vec = hp * gradsq
    instrumentation.bump("div_k")

    # forward batch 2: [h*Du(d*d), g*divu, hp*laph, a(x)a(d*d)]
    fwd2 = np.concatenate([
        (eval_h(rho, params) * Du).reshape((d * d,) + S),
        (eval_g(rho, params) * divu)[None],
        (hp * laph)[None],
        (a_vec[:, None] * a_vec[None, :]).reshape((d * d,) + S),
    ])
    F2 = grid.rfft(fwd2)
    i_g, i_s2, i_aa = d * d, d * d + 1, d * d + 2

    inv2 = np.empty((4 * d,) + F2.shape[1:], dtype=complex)
    for i in range(d):
        inv2[i] = sum(ik[j] * F2[i * d + j] for j in range(d))           # div(h Du)
        inv2[d + i] = ik[i] * F2[i_g]                                     # grad(g divu)
        inv2[2 * d + i] = ik[i] * F2[i_s2]                                # grad(h' lap h)
        inv2[3 * d + i] = sum(ik[j] * F2[i_aa + i * d + j] for j in range(d))  # div(a(x)a)
    out2 = grid.irfft(inv2)

    divk = out2[2 * d:3 * d] - 4.0 * out2[3 * d:4 * d]
    if collect is not None:
        collect["divk_integral"] = np.array(
            [grid.integrate_arr(divk[i]) for i in range(d)])

    drho = -divmom
    dmom = (-divflux - gradP - eval_ptilde(rho, params) * u
            + 2.0 * params.nu * (out2[0:d] + out2[d:2 * d])
            + params.kappa**2 * divk)
    return drho, dmom


def _rhs_effective_arrays(grid: PeriodicGrid, rho: np.ndarray, mom: np.ndarray,
                          params: ModelParams, der: DerivedConstants, c: float,
                          collect: dict | None = None):
    d = grid.dim
    S = grid.shape
    tl = der.tilde_lambda(c)
    tk2 = der.tilde_kappa_sq(c)
    v = mom / rho
    flux = mom[:, None] * v[None, :]
    P = rho**params.gamma
    if tl != 0.0:
        P = P + tl * eval_p(rho, params)
    h = eval_h(rho, params)
    hv = h * v

    with_k = tk2 != 0.0
    parts = [mom, flux.reshape((d * d,) + S), P[None], v, h[None], hv]
    if with_k:
        sq = np.sqrt(rho)
        parts.append(sq[None])
    F1 = grid.rfft(np.concatenate(parts))
    ik, mask, mk2 = grid._ik, grid._mask, grid._mk2
    i_flux, i_p = d, d + d * d
    i_v, i_h, i_hv = i_p + 1, i_p + 1 + d, i_p + 2 + d
    i_sq = i_hv + d

    B1 = 2 + 3 * d + d * d + (d if with_k else 0)
    inv1 = np.empty((B1,) + F1.shape[1:], dtype=complex)
    inv1[0] = sum(ik[a] * F1[a] for a in range(d))
    for i in range(d):
        inv1[1 + i] = mask * sum(ik[j] * F1[i_flux + i * d + j] for j in range(d))
    for a in range(d):
        inv1[1 + d + a] = ik[a] * F1[i_p]
    for i in range(d):
        for j in range(d):
            inv1[1 + 2 * d + i * d + j] = ik[j] * F1[i_v + i]
    inv1[1 + 2 * d + d * d] = mk2 * F1[i_h]
    for i in range(d):
        inv1[2 + 2 * d + d * d + i] = mk2 * F1[i_hv + i]
    if with_k:
        for a in range(d):
            inv1[2 + 3 * d + d * d + a] = ik[a] * F1[i_sq]
    out1 = grid.irfft(inv1)

    divmom = out1[0]
    divflux = out1[1:1 + d]
    gradP = out1[1 + d:1 + 2 * d]
    gradv = out1[1 + 2 * d:1 + 2 * d + d * d].reshape((d, d) + S)
    laph = out1[1 + 2 * d + d * d]
    lap_hv = out1[2 + 2 * d + d * d:2 + 3 * d + d * d]

    Dv = 0.5 * (gradv + np.swapaxes(gradv, 0, 1))
    divv = np.trace(gradv, axis1=0, axis2=1)

    parts2 = [(h * Dv).reshape((d * d,) + S), (eval_g(rho, params) * divv)[None]]
    if with_k:
        instrumentation.bump("div_k")
        gradsq = out1[2 + 3 * d + d * d:2 + 4 * d + d * d]
        hp = eval_h_prime(rho, params)
        a_vec = hp * gradsq
        parts2.append((hp * laph)[None])
        parts2.append((a_vec[:, None] * a_vec[None, :]).reshape((d * d,) + S))
    F2 = grid.rfft(np.concatenate(parts2))
    i_g = d * d
    B2 = 2 * d + (2 * d if with_k else 0)
    inv2 = np.empty((B2,) + F2.shape[1:], dtype=complex)
    for i in range(d):
        inv2[i] = sum(ik[j] * F2[i * d + j] for j in range(d))
        inv2[d + i] = ik[i] * F2[i_g]
        if with_k:
            inv2[2 * d + i] = ik[i] * F2[i_g + 1]
            inv2[3 * d + i] = sum(ik[j] * F2[i_g + 2 + i * d + j] for j in range(d))
    out2 = grid.irfft(inv2)

    drho = -divmom + c * laph
    dmom = (-divflux - gradP - eval_ptilde(rho, params) * v
            + c * lap_hv
            + 2.0 * (params.nu - c) * out2[0:d]
            + (2.0 * params.nu - c) * out2[d:2 * d])
    if with_k:
        dmom = dmom + tk2 * (out2[2 * d:3 * d] - 4.0 * out2[3 * d:4 * d])
    if collect is not None:
        collect["divk_integral"] = np.zeros(d)
    return drho, dmom


def _check_positive(rho: np.ndarray, floor: float, when: str, time: float):
    m = rho.min()
    if m <= floor:
        raise DensityNonPositive(
            f"density minimum {m:.6e} fell to the positivity floor {floor:.1e} "
            f"({when}); aborting rather than clipping", time=time)


def _rhs_for(state: State, params: ModelParams, der: DerivedConstants):
    if state.formulation == PRIMITIVE:
        return lambda r, m, collect=None: _rhs_primitive_arrays(
            state.grid, r, m, params, der, collect)
    c = state.c
    if not (0.0 < c <= der.mu):
        raise DomainError(f"transform constant c = {c} outside (0, mu = {der.mu}]")
    return lambda r, m, collect=None: _rhs_effective_arrays(
        state.grid, r, m, params, der, c, collect)


def rhs_primitive(state: State, params: ModelParams):
    """Right-hand side of the primitive formulation as (ScalarField, VectorField)."""
    if state.formulation != PRIMITIVE:
        raise DomainError("rhs_primitive expects a primitive state")
    der = params.derived()
    drho, dmom = _rhs_primitive_arrays(state.grid, state.rho.values,
                                       state.mom.values, params, der)
    return ScalarField(state.grid, drho), VectorField(state.grid, dmom)


def rhs_effective(state: State, params: ModelParams, c: float | None = None):
    """Right-hand side of the effective formulation at transform constant c."""
    if state.formulation != EFFECTIVE:
        raise DomainError("rhs_effective expects an effective state")
    c = state.c if c is None else c
    der = params.derived()
    if not (0.0 < c <= der.mu):
        raise DomainError(f"transform constant c = {c} outside (0, mu = {der.mu}]")
    drho, dmom = _rhs_effective_arrays(state.grid, state.rho.values,
                                       state.mom.values, params, der, c)
    return ScalarField(state.grid, drho), VectorField(state.grid, dmom)


def transform_residual(state: State, params: ModelParams, c: float) -> float:
    """Discrete L2 mismatch between d/dt(rho, rho*v) computed (a) from the
    effective right-hand side on the transformed state and (b) from the
    primitive right-hand side pushed through the transform, whose momentum
    shift rate is -c*grad(div(h u) + g div u) by the continuity equation.

    The two agree exactly in the continuum; the residual measures aliasing
    plus rounding and must fall at the discretization rate.
    """
    if state.formulation != PRIMITIVE:
        raise DomainError("transform_residual expects a primitive state")
    grid = state.grid
    der = params.derived()
    rho = state.rho.values
    mom = state.mom.values

    eff = to_effective(state, params, c)
    drho_a, dmom_a = _rhs_effective_arrays(grid, rho, eff.mom.values, params, der, c)

    drho_b, dmom_p = _rhs_primitive_arrays(grid, rho, mom, params, der)
    u = mom / rho
    h = eval_h(rho, params)
    g = eval_g(rho, params)
    divu = np.trace(grid.grad_vector_arr(u), axis1=0, axis2=1)
    shift_rate = -c * grid.grad_arr(grid.div_arr(h * u) + g * divu)
    dmom_b = dmom_p + shift_rate

    diff2 = grid.integrate_arr((drho_a - drho_b) ** 2)
    diff2 += sum(grid.integrate_arr((dmom_a[i] - dmom_b[i]) ** 2) for i in range(grid.dim))
    return math.sqrt(diff2)


def pick_dt(state: State, params: ModelParams, control: StepControl) -> float:
    """Stable step: safety * min(advective, viscous, dispersive) capped by an
    explicit RK4 stability clamp.

    The viscous bound is dx^2/(2 nu max h'); the dispersive one comes from
    the linearized dispersion relation omega = kappa h' k^2 of the
    third-order term (second order in k against the first-order system), so
    it also scales like dx^2.  The clamp 0.9 * 2.785/|lambda_max| guards the
    stiffest mode directly.
    """
    grid = state.grid
    rho = state.rho.values
    u = state.mom.values / rho
    umax = float(np.sqrt(np.sum(u * u, axis=0)).max())
    hpmax = float(np.max(eval_h_prime(rho, params)))
    kmax = math.pi * grid.n / grid.length
    cs = math.sqrt(params.gamma * float(rho.max()) ** (params.gamma - 1.0))

    dt_adv = grid.dx / umax if umax > 0 else math.inf
    dt_visc = grid.dx**2 / (2.0 * params.nu * hpmax)
    dt_disp = 2.8 / (params.kappa * hpmax * kmax**2)
    lam = math.hypot(2.0 * params.nu * hpmax * kmax**2,
                     params.kappa * hpmax * kmax**2 + (umax + cs) * kmax)
    dt = min(control.cfl_safety * min(dt_adv, dt_visc, dt_disp),
             0.9 * 2.785 / lam)
    if control.dt_max is not None:
        dt = min(dt, control.dt_max)
    if control.t_end > 0 and dt < 1e-12 * control.t_end:
        raise StepTooSmall(f"dt = {dt:.3e} below 1e-12 * t_end = {control.t_end:.3e}")
    return dt


def _rk4(rhs, rho, mom, dt, floor, time):
    k1r, k1m = rhs(rho, mom)
    r = rho + 0.5 * dt * k1r
    _check_positive(r, floor, "RK4 stage 2", time)
    k2r, k2m = rhs(r, mom + 0.5 * dt * k1m)
    r = rho + 0.5 * dt * k2r
    _check_positive(r, floor, "RK4 stage 3", time)
    k3r, k3m = rhs(r, mom + 0.5 * dt * k2m)
    r = rho + dt * k3r
    _check_positive(r, floor, "RK4 stage 4", time)
    k4r, k4m = rhs(r, mom + dt * k3m)
    rho_new = rho + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    mom_new = mom + (dt / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
    _check_positive(rho_new, floor, "step output", time + dt)
    return rho_new, mom_new


def step(state: State, params: ModelParams, control: StepControl,
         dt: float | None = None) -> State:
    """Advance one accepted RK4 step; dt defaults to the stable pick."""
    der = params.derived()
    rhs = _rhs_for(state, params, der)
    if dt is None:
        dt = pick_dt(state, params, control)
    rho, mom = _rk4(rhs, state.rho.values, state.mom.values, dt,
                    control.positivity_floor, state.time)
    return State(ScalarField(state.grid, rho), VectorField(state.grid, mom),
                 state.formulation, state.c, state.time + dt)


@dataclass
class RunResult:
    params: ModelParams
    control: StepControl
    grid: PeriodicGrid
    formulation: str
    dt: float
    n_steps: int
    records: list
    final: State
    states: list | None = None          # [(t, rho, mom)] at record cadence
    divk_integral_max: np.ndarray | None = None
    wall_time: float = 0.0


def run(initial: State, params: ModelParams, control: StepControl,
        diag_every: int = 1, keep_states: bool = False,
        track_divk: bool = False, bd_c: float | None = None,
        moment_delta: float = 0.25) -> RunResult:
    """March the system to t_end with a constant step and record diagnostics
    every diag_every steps (uniform cadence; an off-cadence trailing segment
    is not recorded).  The final state always lands exactly on t_end."""
    from . import diagnostics as diag   # deferred: diagnostics imports this module

    der = params.derived()
    rhs = _rhs_for(initial, params, der)
    grid = initial.grid
    t0 = _time.perf_counter()

    if control.t_end <= 0.0:
        n_steps, dt = 0, 0.0
    else:
        dt = pick_dt(initial, params, control)
        n_steps = max(1, math.ceil(control.t_end / dt - 1e-9))
        dt = control.t_end / n_steps

    rho = initial.rho.values.copy()
    mom = initial.mom.values.copy()
    records = []
    states = [] if keep_states else None
    divk_max = np.zeros(grid.dim) if track_divk else None

    def record(k, r, m):
        t = initial.time + k * dt
        st = State(ScalarField(grid, r), VectorField(grid, m),
                   initial.formulation, initial.c, t)
        records.append(diag.compute_record(st, params, bd_c=bd_c,
                                           moment_delta=moment_delta))
        if keep_states:
            states.append((t, r.copy(), m.copy()))

    record(0, rho, mom)
    for k in range(n_steps):
        if track_divk and initial.formulation == PRIMITIVE:
            aux = {}
            _rhs_primitive_arrays(grid, rho, mom, params, der, collect=aux)
            divk_max = np.maximum(divk_max, np.abs(aux["divk_integral"]))
        rho, mom = _rk4(rhs, rho, mom, dt, control.positivity_floor,
                        initial.time + k * dt)
        if (k + 1) % diag_every == 0:
            record(k + 1, rho, mom)

    final = State(ScalarField(grid, rho), VectorField(grid, mom),
                  initial.formulation, initial.c,
                  initial.time + n_steps * dt)
    diag.fill_residuals(records)
    return RunResult(params=params, control=control, grid=grid,
                     formulation=initial.formulation, dt=dt, n_steps=n_steps,
                     records=records, final=final, states=states,
                     divk_integral_max=divk_max,
                     wall_time=_time.perf_counter() - t0)


# -- initial data ------------------------------------------------------------


def make_density(grid: PeriodicGrid, mean: float, amps=(), modes=(), phases=None,
                 rho_min: float = 0.1) -> np.ndarray:
    """rho0 = mean + sum_j amps[j]*cos(2 pi modes[j] x_(j mod dim) + phases[j]),
    with positivity guaranteed a priori: mean - sum |amps| >= rho_min > 0."""
    amps = tuple(amps)
    modes = tuple(modes)
    if phases is None:
        phases = (0.0,) * len(amps)
    if len(amps) != len(modes) or len(amps) != len(phases):
        raise DomainError("amps, modes and phases must have equal length")
    if rho_min <= 0 or mean - sum(abs(a) for a in amps) < rho_min:
        raise DomainError(
            f"density profile violates positivity: mean - sum|amps| = "
            f"{mean - sum(abs(a) for a in amps):.6g} < rho_min = {rho_min}")
    xs = grid.axes()
    out = np.full(grid.shape, float(mean))
    for j, (a, k, ph) in enumerate(zip(amps, modes, phases)):
        out = out + a * np.cos(2.0 * np.pi * k * xs[j % grid.dim] / grid.length + ph)
    return out


def make_velocity(grid: PeriodicGrid, kind: str = "sine", amps=(), modes=(),
                  phases=None, seed: int = 0) -> np.ndarray:
    """Band-limited initial velocities: 'sine' component waves, 'gradient' of a
    cosine potential, or seeded 'random' low-mode fields."""
    amps = tuple(amps)
    modes = tuple(modes)
    if phases is None:
        phases = (0.0,) * len(amps)
    if len(amps) != len(modes) or len(amps) != len(phases):
        raise DomainError("amps, modes and phases must have equal length")
    xs = grid.axes()
    tau = 2.0 * np.pi / grid.length
    if kind == "sine":
        out = np.zeros((grid.dim,) + grid.shape)
        for j, (a, k, ph) in enumerate(zip(amps, modes, phases)):
            comp = j % grid.dim
            out[comp] += a * np.sin(tau * k * xs[comp] + ph)
        return out
    if kind == "gradient":
        pot = np.zeros(grid.shape)
        for j, (a, k, ph) in enumerate(zip(amps, modes, phases)):
            pot = pot + a * np.cos(tau * k * xs[j % grid.dim] + ph)
        return grid.grad_arr(pot)
    if kind == "random":
        rng = np.random.default_rng(seed)
        scale = amps[0] if amps else 0.1
        out = np.zeros((grid.dim,) + grid.shape)
        for comp in range(grid.dim):
            for k in (1, 2, 3):
                for ax in range(grid.dim):
                    out[comp] += (scale * rng.normal() / k
                                  * np.cos(tau * k * xs[ax] + rng.uniform(0, 2 * np.pi)))
        return out
    raise DomainError(f"unknown velocity kind {kind!r}")
