"""Model parameters, derived constants, and admissibility checks.

The regularized system is governed by four numbers: the viscosity
coefficient nu, the dispersive coefficient kappa, the adiabatic exponent
gamma, and the regularization strength eps (eps = 0 selects the formal
unregularized system).  Everything else the solver needs is derived here:
the effective-velocity constant mu, the damping amplitude lambda(eps), the
admissibility threshold eps_f(gamma), and the residual capillarity /
cold-pressure fractions for a general transform constant c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

__all__ = [
    "ModelParams",
    "DerivedConstants",
    "AdmissibilityReport",
    "derived_mu",
    "epsilon_f",
    "check_admissible",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical and regularization parameters.

    nu, kappa > 0 are the viscosity and dispersive coefficients, gamma > 1
    the adiabatic exponent, eps >= 0 the regularization strength and dim the
    spatial dimension (1 is a development/test scale, the admissibility
    hypotheses target 2 and 3).
    """

    nu: float
    kappa: float
    gamma: float
    eps: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.eps < 0:
            raise DomainError(f"eps must be >= 0, got {self.eps}")

    def derived(self) -> "DerivedConstants":
        return DerivedConstants.from_params(self)


def derived_mu(nu: float, kappa: float) -> float:
    """Effective-velocity constant mu = nu - sqrt(nu^2 - kappa^2).

    Requires 0 < kappa < nu; the result is the smaller root of
    c^2 - 2*nu*c + kappa^2 and lies in (0, nu).
    """
    if not (0.0 < kappa < nu):
        raise DomainError(f"need 0 < kappa < nu, got nu={nu}, kappa={kappa}")
    return nu - math.sqrt(nu * nu - kappa * kappa)


def _eps_sq_constraints(gamma: float) -> list[tuple[str, float]]:
    """Upper bounds on eps^2 for every entropy-density term to stay positive
    with positive second derivative, named by the constraint that produces
    them."""
    cons = [
        ("1 - eps^2 > 0", 1.0),
        ("8 - 9*eps^2 > 0", 8.0 / 9.0),
        ("1 - eps^2*(gamma-1) > 0", 1.0 / (gamma - 1.0)),
    ]
    if gamma < 2.0:
        cons.append(("1 + eps^2*(gamma-2) > 0", 1.0 / (2.0 - gamma)))
    elif gamma > 2.0:
        cons.append(("1 - eps^2*(gamma-2) > 0", 1.0 / (gamma - 2.0)))
    return cons


def epsilon_f(gamma: float) -> float:
    """Supremum of admissible regularization strengths for exponent gamma.

    Largest eps such that all six closed-form entropy-density terms have
    positive amplitude and positive second derivative for every rho > 0;
    computed as the minimum over the closed-form sign constraints on the
    term exponents and denominators.
    """
    if gamma <= 1.0:
        raise DomainError(f"gamma must be > 1, got {gamma}")
    return math.sqrt(min(bound for _, bound in _eps_sq_constraints(gamma)))


@dataclass(frozen=True)
class DerivedConstants:
    """Scalars derived from a ModelParams instance.

    mu and mu_plus are the two roots of c^2 - 2*nu*c + kappa^2, so the
    residual capillarity tilde_kappa_sq(c) is evaluated in factored form
    (c - mu)(c - mu_plus) and vanishes exactly (not just to rounding) at
    c = mu.
    """

    nu: float
    kappa: float
    gamma: float
    eps: float
    mu: float
    mu_plus: float
    lambda_eps: float
    eps_f: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "DerivedConstants":
        mu = derived_mu(p.nu, p.kappa)
        mu_plus = p.nu + math.sqrt(p.nu * p.nu - p.kappa * p.kappa)
        lam = math.exp(-1.0 / p.eps**4) if p.eps > 0 else 0.0
        return cls(
            nu=p.nu,
            kappa=p.kappa,
            gamma=p.gamma,
            eps=p.eps,
            mu=mu,
            mu_plus=mu_plus,
            lambda_eps=lam,
            eps_f=epsilon_f(p.gamma),
        )

    def tilde_kappa_sq(self, c: float) -> float:
        """Residual capillarity kappa^2 - 2*nu*c + c^2 for transform constant c."""
        return (c - self.mu) * (c - self.mu_plus)

    def tilde_lambda(self, c: float) -> float:
        """Residual cold-pressure fraction (mu - c)/mu."""
        return (self.mu - c) / self.mu


@dataclass
class AdmissibilityReport:
    """Structured pass/fail listing of every hypothesis on (nu, kappa, gamma, eps)."""

    params: ModelParams
    checks: list = field(default_factory=list)  # (name, passed, detail) triples
    derived: DerivedConstants | None = None

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self) -> list:
        return [(name, detail) for name, ok, detail in self.checks if not ok]

    def format(self) -> str:
        lines = [f"admissibility for nu={self.params.nu} kappa={self.params.kappa} "
                 f"gamma={self.params.gamma} eps={self.params.eps} dim={self.params.dim}"]
        for name, ok, detail in self.checks:
            lines.append(f"  [{'pass' if ok else 'FAIL'}] {name}: {detail}")
        if self.derived is not None:
            d = self.derived
            lines.append(f"  derived: mu={d.mu:.12g} lambda(eps)={d.lambda_eps:.6g} "
                         f"eps_f(gamma)={d.eps_f:.12g}")
        lines.append(f"  overall: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def check_admissible(params: ModelParams) -> AdmissibilityReport:
    """Check every hypothesis for the given dimension; failures are reported,
    never raised."""
    p = params
    rep = AdmissibilityReport(params=p)
    add = rep.checks.append

    add(("nu > 0", p.nu > 0, f"nu = {p.nu}"))
    add(("kappa > 0", p.kappa > 0, f"kappa = {p.kappa}"))
    add(("kappa < nu", p.kappa < p.nu, f"kappa = {p.kappa}, nu = {p.nu}"))
    add(("gamma > 1", p.gamma > 1, f"gamma = {p.gamma}"))

    if p.dim == 3:
        lo, hi = p.kappa**2, 9.0 / 8.0 * p.kappa**2
        nusq = p.nu**2
        add(("kappa^2 < nu^2 < (9/8)*kappa^2 (dim 3)",
             lo < nusq < hi,
             f"kappa^2 = {lo:.6g}, nu^2 = {nusq:.6g}, (9/8)kappa^2 = {hi:.6g}"))
        add(("1 < gamma < 3 (dim 3)", 1 < p.gamma < 3, f"gamma = {p.gamma}"))

    if p.gamma > 1 and p.eps > 0:
        ef = epsilon_f(p.gamma)
        add(("eps < eps_f(gamma)", p.eps < ef, f"eps = {p.eps}, eps_f = {ef:.6g}"))
    else:
        add(("eps >= 0", p.eps >= 0, f"eps = {p.eps}"))

    if p.kappa > 0 and p.nu > p.kappa and p.gamma > 1:
        rep.derived = DerivedConstants.from_params(p)
    return rep
