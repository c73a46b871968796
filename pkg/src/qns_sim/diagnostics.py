"""Functionals, dissipation ledgers, and per-step balance residuals.

Every a priori estimate the solver is meant to respect is monitored here as
a signed balance: a functional series sampled at the record cadence, the
named dissipation integrals, and a residual |dF/dt + dissipation| formed
with a fourth-order centered difference across stored records.  Residuals
of a correct trajectory shrink at the integrator/stencil order under time
refinement and spectrally in n; they do not vanish identically, because the
trajectory is the discrete one the solver actually produced.

All diagnostics are pure functions of (state, params); calling twice yields
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import (eval_f, eval_f_second, eval_g, eval_h, eval_h_prime,
                     eval_phi, eval_ptilde)
from .dynamics import EFFECTIVE, PRIMITIVE, State, to_effective
from .errors import DensityNonPositive, DomainError
from .params import ModelParams

__all__ = [
    "EnergyReport", "BdReport", "RenormReport", "DiagnosticsRecord",
    "energy", "bd_entropy", "mv_functional", "renormalized_ledger", "moment",
    "uniform_bound_suite", "compute_record", "fill_residuals", "write_csv",
    "UF_NAMES",
]

UF_NAMES = (
    "uf_kinetic",            # int rho |u|^2
    "uf_grad_sqrt_w",        # int |h' grad sqrt(rho)|^2
    "uf_mass_pressure",      # int (rho + rho^gamma)
    "uf_entropy",            # int f(rho)
    "uf_grad_sqrt",          # int |grad sqrt(rho)|^2
    "uf_grad_rho_ghalf",     # int |grad rho^(gamma/2)|^2
    "uf_hess_sqrt",          # int |hess sqrt(rho)|^2
    "uf_grad_rho_quarter",   # int |grad rho^(1/4)|^4
)


def _primitive_parts(state: State, params: ModelParams):
    if state.formulation != PRIMITIVE:
        raise DomainError("diagnostic expects a primitive-formulation state")
    grid = state.grid
    rho = state.rho.values
    if rho.min() <= 0.0:
        raise DensityNonPositive("diagnostic on non-positive density")
    u = state.mom.values / rho
    return grid, rho, u


@dataclass(frozen=True)
class EnergyReport:
    value: float
    d_visc_h: float    # 2 nu int h |Du|^2
    d_visc_g: float    # 2 nu int g |div u|^2
    d_damp: float      # int ptilde |u|^2

    @property
    def dissipation(self) -> float:
        return self.d_visc_h + self.d_visc_g + self.d_damp


def energy(state: State, params: ModelParams) -> EnergyReport:
    """Physical energy int rho|u|^2/2 + rho^gamma/(gamma-1) + f(rho)
    + 2 kappa^2 |h' grad sqrt(rho)|^2 and its three dissipation integrals."""
    grid, rho, u = _primitive_parts(state, params)
    gsq = grid.grad_arr(np.sqrt(rho))
    hp = eval_h_prime(rho, params)
    e_dens = (0.5 * rho * np.sum(u * u, axis=0)
              + rho**params.gamma / (params.gamma - 1.0)
              + eval_f(rho, params)
              + 2.0 * params.kappa**2 * hp**2 * np.sum(gsq * gsq, axis=0))

    G = grid.grad_vector_arr(u)
    Du = 0.5 * (G + np.swapaxes(G, 0, 1))
    divu = np.trace(G, axis1=0, axis2=1)
    h = eval_h(rho, params)
    g = eval_g(rho, params)
    pt = eval_ptilde(rho, params)
    I = grid.integrate_arr
    return EnergyReport(
        value=I(e_dens),
        d_visc_h=2.0 * params.nu * I(h * np.sum(Du * Du, axis=(0, 1))),
        d_visc_g=2.0 * params.nu * I(g * divu * divu),
        d_damp=I(pt * np.sum(u * u, axis=0)),
    )


BD_TERM_NAMES = (
    "bd_rot",          # c int h |Av|^2
    "bd_visc",         # (2nu-c) int (h|Dv|^2 + g|div v|^2)
    "bd_damp",         # int ptilde |v|^2
    "bd_pressure",     # c gamma int h' |grad rho|^2 rho^(gamma-2)
    "bd_entropy",      # c tilde_lambda int h' |grad rho|^2 f''
    "bd_cap_h",        # c tilde_kappa^2 int h |hess phi|^2
    "bd_cap_g",        # c tilde_kappa^2 int g |lap phi|^2
)


@dataclass(frozen=True)
class BdReport:
    c: float
    value: float
    terms: tuple   # seven scalars, ordered as BD_TERM_NAMES

    @property
    def dissipation(self) -> float:
        return sum(self.terms)


def bd_entropy(state: State, params: ModelParams, c: float) -> BdReport:
    """Entropy functional of the transformed system at transform constant c,
    B_c = int rho|v|^2/2 + rho^gamma/(gamma-1) + tilde_lambda f
        + 2 tilde_kappa^2 |h' grad sqrt rho|^2,   v = u + c grad(phi),
    and its seven dissipation terms.  The residual-capillarity and
    residual-cold-pressure weights vanish exactly at c = mu."""
    der = params.derived()
    if not (0.0 < c <= der.mu):
        raise DomainError(f"transform constant c = {c} outside (0, mu = {der.mu}]")
    grid, rho, _ = _primitive_parts(state, params)
    v = to_effective(state, params, c).mom.values / rho
    tl = der.tilde_lambda(c)
    tk2 = der.tilde_kappa_sq(c)

    sq = np.sqrt(rho)
    gsq = grid.grad_arr(sq)
    hp = eval_h_prime(rho, params)
    value = grid.integrate_arr(
        0.5 * rho * np.sum(v * v, axis=0)
        + rho**params.gamma / (params.gamma - 1.0)
        + tl * eval_f(rho, params)
        + 2.0 * tk2 * hp**2 * np.sum(gsq * gsq, axis=0))

    G = grid.grad_vector_arr(v)
    Dv = 0.5 * (G + np.swapaxes(G, 0, 1))
    Av = 0.5 * (G - np.swapaxes(G, 0, 1))
    divv = np.trace(G, axis1=0, axis2=1)
    h = eval_h(rho, params)
    g = eval_g(rho, params)
    grho = 2.0 * sq * gsq                   # grad rho, chain rule through sqrt
    grho2 = np.sum(grho * grho, axis=0)
    I = grid.integrate_arr

    t_rot = c * I(h * np.sum(Av * Av, axis=(0, 1)))
    t_visc = (2.0 * params.nu - c) * I(h * np.sum(Dv * Dv, axis=(0, 1)) + g * divv**2)
    t_damp = I(eval_ptilde(rho, params) * np.sum(v * v, axis=0))
    t_press = c * params.gamma * I(hp * grho2 * rho ** (params.gamma - 2.0))
    if tl != 0.0:
        t_entropy = c * tl * I(hp * grho2 * eval_f_second(rho, params))
    else:
        t_entropy = 0.0
    if tk2 != 0.0:
        Hphi = grid.hessian_arr(eval_phi(rho, params))
        lap_phi = np.trace(Hphi, axis1=0, axis2=1)
        t_cap_h = c * tk2 * I(h * np.sum(Hphi * Hphi, axis=(0, 1)))
        t_cap_g = c * tk2 * I(g * lap_phi**2)
    else:
        t_cap_h = 0.0
        t_cap_g = 0.0
    return BdReport(c=c, value=value,
                    terms=(t_rot, t_visc, t_damp, t_press, t_entropy, t_cap_h, t_cap_g))


def _effective_w(state: State, params: ModelParams):
    """The mu-transformed velocity of a state, plus grid and rho."""
    der = params.derived()
    if state.formulation == PRIMITIVE:
        eff = to_effective(state, params, der.mu)
    elif state.c == der.mu:
        eff = state
    else:
        raise DomainError("need a primitive state or an effective state at c = mu")
    rho = eff.rho.values
    return eff.grid, rho, eff.mom.values / rho


def mv_functional(state: State, params: ModelParams) -> float:
    """Log-improved kinetic moment int rho (1 + |w|^2/2) log(1 + |w|^2/2)
    of the mu-transformed velocity w = u + mu grad(phi)."""
    grid, rho, w = _effective_w(state, params)
    t = 0.5 * np.sum(w * w, axis=0)
    return grid.integrate_arr(rho * (1.0 + t) * np.log1p(t))


def moment(state: State, params: ModelParams, delta: float) -> float:
    """Kinetic moment int rho |w|^(2+2*delta), delta in (0, 1)."""
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if state.formulation != EFFECTIVE:
        raise DomainError("moment expects an effective-formulation state")
    grid = state.grid
    rho = state.rho.values
    w2 = np.sum((state.mom.values / rho) ** 2, axis=0)
    return grid.integrate_arr(rho * w2 ** (1.0 + delta))


def _beta_family(beta_id: str, delta: float | None):
    """beta, beta', beta'' for the renormalization families."""
    if beta_id == "mv-log":
        return (lambda t: (1.0 + t) * np.log1p(t),
                lambda t: np.log1p(t) + 1.0,
                lambda t: 1.0 / (1.0 + t))
    if beta_id == "power":
        d = 0.0 if delta is None else float(delta)
        if d == 0.0:
            return (lambda t: t, lambda t: np.ones_like(t), lambda t: np.zeros_like(t))
        if not (0.0 < d < 1.0):
            raise DomainError(f"power-family delta must lie in [0, 1), got {d}")

        def b2(t):
            with np.errstate(divide="ignore", invalid="ignore"):
                out = (1.0 + d) * d * t ** (d - 1.0)
            return np.where(t > 0.0, out, 0.0)

        return (lambda t: t ** (1.0 + d), lambda t: (1.0 + d) * t**d, b2)
    raise DomainError(f"unknown beta family {beta_id!r}")


@dataclass(frozen=True)
class RenormReport:
    beta_id: str
    delta: float | None
    functional: float          # int rho beta(|w|^2/2)
    lhs_terms: dict            # named dissipation-side integrals
    rhs_terms: dict            # named source-side integrals

    @property
    def balance_sum(self) -> float:
        """What d/dt(functional) must equal: sum(rhs) - sum(lhs)."""
        return sum(self.rhs_terms.values()) - sum(self.lhs_terms.values())


def renormalized_ledger(state: State, params: ModelParams, beta_id: str = "mv-log",
                        delta: float | None = None) -> RenormReport:
    """Every integral term of the renormalized |w|^2-balance for the
    mu-transformed system, for beta in the log family (1+t)log(1+t) or the
    power family t^(1+delta).  beta(t) = t reduces the ledger to the
    |w|^2-energy balance and must match the entropy ledger at c = mu
    term by term."""
    if state.formulation != EFFECTIVE:
        raise DomainError("renormalized_ledger expects an effective state at c = mu")
    der = params.derived()
    if state.c != der.mu:
        raise DomainError(f"renormalized ledger is defined at c = mu = {der.mu}")
    grid = state.grid
    rho = state.rho.values
    w = state.mom.values / rho
    mu, nu = der.mu, params.nu

    beta, beta1, beta2 = _beta_family(beta_id, delta)
    t = 0.5 * np.sum(w * w, axis=0)
    b1, b2 = beta1(t), beta2(t)

    G = grid.grad_vector_arr(w)
    Dw = 0.5 * (G + np.swapaxes(G, 0, 1))
    Aw = 0.5 * (G - np.swapaxes(G, 0, 1))
    divw = np.trace(G, axis1=0, axis2=1)
    Dww = np.einsum("ij...,j...->i...", Dw, w)
    Aww = np.einsum("ij...,j...->i...", Aw, w)
    Dww2 = np.sum(Dww * Dww, axis=0)
    Aww2 = np.sum(Aww * Aww, axis=0)
    h = eval_h(rho, params)
    g = eval_g(rho, params)
    grad_pgamma = grid.grad_arr(rho**params.gamma)
    I = grid.integrate_arr

    def guarded(x):
        # beta'' may diverge at w = 0 while its factor vanishes there
        return np.where(np.isfinite(b2), x, 0.0)

    lhs = {
        "rot_w2": mu * I(guarded(h * Aww2 * b2)),
        "rot": mu * I(h * np.sum(Aw * Aw, axis=(0, 1)) * b1),
        "visc_d": (2.0 * nu - mu) * I(h * np.sum(Dw * Dw, axis=(0, 1)) * b1),
        "visc_g": (2.0 * nu - mu) * I(g * divw**2 * b1),
        "damp": I(eval_ptilde(rho, params) * np.sum(w * w, axis=0) * b1),
        "visc_w2": (2.0 * nu - mu) * I(guarded(h * Dww2 * b2)),
    }
    rhs = {
        "pressure": -I(np.sum(grad_pgamma * w, axis=0) * b1),
        "cross_da": -2.0 * nu * I(guarded(h * np.sum(Dww * Aww, axis=0) * b2)),
        "cross_gd": -(2.0 * nu - mu) * I(guarded(
            g * divw * np.sum(w * Dww, axis=0) * b2)),
    }
    return RenormReport(beta_id=beta_id, delta=delta,
                        functional=I(rho * beta(t)), lhs_terms=lhs, rhs_terms=rhs)


def uniform_bound_suite(state: State, params: ModelParams) -> dict:
    """The monitored integrals whose suprema the theory bounds independently
    of eps; returned as an ordered name -> value mapping (UF_NAMES)."""
    grid, rho, u = _primitive_parts(state, params)
    sq = np.sqrt(rho)
    gsq = grid.grad_arr(sq)
    gsq2 = np.sum(gsq * gsq, axis=0)
    hp = eval_h_prime(rho, params)
    g_ghalf = grid.grad_arr(rho ** (0.5 * params.gamma))
    hess_sq = grid.hessian_arr(sq)
    g_quart = grid.grad_arr(rho**0.25)
    I = grid.integrate_arr
    return {
        "uf_kinetic": I(rho * np.sum(u * u, axis=0)),
        "uf_grad_sqrt_w": I(hp**2 * gsq2),
        "uf_mass_pressure": I(rho + rho**params.gamma),
        "uf_entropy": I(eval_f(rho, params)),
        "uf_grad_sqrt": I(gsq2),
        "uf_grad_rho_ghalf": I(np.sum(g_ghalf * g_ghalf, axis=0)),
        "uf_hess_sqrt": I(np.sum(hess_sq * hess_sq, axis=(0, 1))),
        "uf_grad_rho_quarter": I(np.sum(g_quart * g_quart, axis=0) ** 2),
    }


@dataclass
class DiagnosticsRecord:
    """Per-record ledger row; residual fields are filled after the run."""

    time: float
    mass: float
    momentum: tuple
    energy: float
    d_visc_h: float
    d_visc_g: float
    d_damp: float
    energy_residual: float
    bd_value: float
    bd_terms: tuple
    bd_residual: float
    mv: float
    moment: float
    rho_min: float
    rho_max: float
    uf: dict
    bd_c: float


def compute_record(state: State, params: ModelParams, bd_c: float | None = None,
                   moment_delta: float = 0.25) -> DiagnosticsRecord:
    """Assemble the full ledger row for one state (effective states are
    transformed back to primitive variables first)."""
    from .dynamics import to_primitive   # local to avoid import cycle at load

    der = params.derived()
    if bd_c is None:
        bd_c = der.mu
    prim = state if state.formulation == PRIMITIVE else to_primitive(state, params)
    grid = prim.grid
    rho = prim.rho.values
    e = energy(prim, params)
    bd = bd_entropy(prim, params, bd_c)
    eff = to_effective(prim, params, der.mu)
    return DiagnosticsRecord(
        time=state.time,
        mass=grid.integrate_arr(rho),
        momentum=tuple(grid.integrate_arr(prim.mom.values[i]) for i in range(grid.dim)),
        energy=e.value, d_visc_h=e.d_visc_h, d_visc_g=e.d_visc_g, d_damp=e.d_damp,
        energy_residual=float("nan"),
        bd_value=bd.value, bd_terms=bd.terms, bd_residual=float("nan"),
        mv=mv_functional(prim, params),
        moment=moment(eff, params, moment_delta),
        rho_min=float(rho.min()), rho_max=float(rho.max()),
        uf=uniform_bound_suite(prim, params),
        bd_c=bd_c,
    )


def _fd4(series: np.ndarray, k: int, dt: float) -> float:
    """Fourth-order centered first derivative at index k."""
    return (-series[k + 2] + 8.0 * series[k + 1]
            - 8.0 * series[k - 1] + series[k - 2]) / (12.0 * dt)


def fill_residuals(records: list) -> None:
    """Fill |dF/dt + dissipation| on interior records of a uniformly spaced
    series (edges keep NaN)."""
    if len(records) < 5:
        return
    times = np.array([r.time for r in records])
    dts = np.diff(times)
    if dts.min() <= 0 or (dts.max() - dts.min()) > 1e-9 * dts.max():
        return   # non-uniform cadence: residuals stay NaN
    dt = float(dts.mean())
    E = np.array([r.energy for r in records])
    D = np.array([r.d_visc_h + r.d_visc_g + r.d_damp for r in records])
    B = np.array([r.bd_value for r in records])
    BD = np.array([sum(r.bd_terms) for r in records])
    for k in range(2, len(records) - 2):
        records[k].energy_residual = abs(_fd4(E, k, dt) + D[k])
        records[k].bd_residual = abs(_fd4(B, k, dt) + BD[k])


def csv_columns(dim: int) -> list:
    cols = ["t", "mass"] + [f"mom_{ax}" for ax in "xyz"[:dim]]
    cols += ["E", "D_visc_h", "D_visc_g", "D_damp", "E_residual", "B_c"]
    cols += [f"bd_term_{i}" for i in range(1, 8)]
    cols += ["B_residual", "MV", "moment", "rho_min", "rho_max"]
    cols += list(UF_NAMES)
    return cols


def write_csv(path, records: list, dim: int, provenance: list | None = None) -> None:
    """Ledger CSV: mandatory header row, 17 significant digits, optional
    provenance comment lines embedding the resolved configuration."""
    def fmt(x):
        return f"{x:.17g}"

    with open(path, "w", encoding="utf-8") as fh:
        for line in provenance or []:
            fh.write(f"# {line}\n")
        fh.write(",".join(csv_columns(dim)) + "\n")
        for r in records:
            row = [r.time, r.mass, *r.momentum,
                   r.energy, r.d_visc_h, r.d_visc_g, r.d_damp, r.energy_residual,
                   r.bd_value, *r.bd_terms, r.bd_residual,
                   r.mv, r.moment, r.rho_min, r.rho_max,
                   *[r.uf[name] for name in UF_NAMES]]
            fh.write(",".join(fmt(x) for x in row) + "\n")
