"""Dissipation symbols rho(k) = mu * exp(G(k)) and their growth exponents."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Family(str, enum.Enum):
    EXPONENTIAL = "exponential"
    COSH = "cosh"
    STRETCHED_EXPONENTIAL = "stretched_exponential"
    POWER_LAPLACIAN = "power_laplacian"


@dataclass(frozen=True)
class DissipationSymbol:
    """Fourier symbol of the dissipative operator.

    Exponential families are parametrised by ``sigma``; cosh by ``k_d``.
    Either may be given and the other is filled in via ``k_d = 1/(2 sigma)``.
    """

    family: Family = Family.COSH
    mu: float = 1.0
    sigma: float | None = None
    k_d: float | None = None
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        sigma, k_d = self.sigma, self.k_d
        if sigma is None and k_d is None:
            sigma, k_d = 0.5, 1.0
        elif sigma is None:
            sigma = 1.0 / (2.0 * k_d)
        elif k_d is None:
            k_d = 1.0 / (2.0 * sigma)
        elif not math.isclose(k_d, 1.0 / (2.0 * sigma), rel_tol=1e-12):
            raise ValueError(f"inconsistent sigma={sigma} and k_d={k_d}; need k_d = 1/(2 sigma)")
        for name, val in (("mu", self.mu), ("sigma", sigma), ("k_d", k_d), ("alpha", self.alpha)):
            if not val > 0:
                raise ValueError(f"{name} must be positive, got {val}")
        object.__setattr__(self, "sigma", float(sigma))
        object.__setattr__(self, "k_d", float(k_d))

    @classmethod
    def exponential(cls, mu=1.0, sigma=0.5):
        return cls(Family.EXPONENTIAL, mu, sigma=sigma)

    @classmethod
    def cosh(cls, mu=1.0, k_d=1.0):
        return cls(Family.COSH, mu, k_d=k_d)

    @classmethod
    def stretched(cls, alpha, mu=1.0, sigma=0.5):
        return cls(Family.STRETCHED_EXPONENTIAL, mu, sigma=sigma, alpha=alpha)

    @classmethod
    def power_laplacian(cls, alpha=1.0, mu=1.0):
        return cls(Family.POWER_LAPLACIAN, mu, alpha=alpha)

    def k_tilde(self, k):
        """Nondimensional wavenumber k / k_d."""
        return k / self.k_d

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "mu": self.mu,
            "sigma": self.sigma,
            "k_d": self.k_d,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DissipationSymbol":
        unknown = set(d) - {"family", "mu", "sigma", "k_d", "alpha"}
        if unknown:
            raise KeyError(sorted(unknown)[0])
        return cls(
            Family(d.get("family", "cosh")),
            float(d.get("mu", 1.0)),
            sigma=d.get("sigma"),
            k_d=d.get("k_d"),
            alpha=float(d.get("alpha", 1.0)),
        )


def rate(sym: DissipationSymbol, k) -> float:
    """Dissipation rate rho(k) >= 0. Overflows to ``inf`` for huge exponents."""
    ak = abs(k)
    fam = sym.family
    try:
        if fam is Family.EXPONENTIAL:
            return sym.mu * math.exp(2 * sym.sigma * ak)
        if fam is Family.STRETCHED_EXPONENTIAL:
            return sym.mu * math.exp(2 * sym.sigma * ak**sym.alpha)
        if fam is Family.COSH:
            x = ak / sym.k_d
            # sinh form keeps relative accuracy for x << 1
            return sym.mu * 2.0 * math.sinh(x / 2) ** 2
        return sym.mu * ak ** (2 * sym.alpha)
    except OverflowError:
        return math.inf


def growth_exponent(sym: DissipationSymbol, k) -> float:
    """G(k) = ln(rho(k) / mu), evaluated without overflowing rho."""
    ak = abs(k)
    fam = sym.family
    if fam is Family.EXPONENTIAL:
        return 2 * sym.sigma * ak
    if fam is Family.STRETCHED_EXPONENTIAL:
        return 2 * sym.sigma * ak**sym.alpha
    if ak == 0:
        raise ValueError(f"{fam.value} symbol has zero rate at k=0; G(0) is undefined")
    if fam is Family.COSH:
        x = ak / sym.k_d
        if x > 40:
            # cosh(x) - 1 = e^x/2 * (1 - 2e^-x + e^-2x)
            return x - math.log(2) + 2 * math.log1p(-math.exp(-x))
        return math.log(2.0) + 2 * math.log(math.sinh(x / 2))
    return 2 * sym.alpha * math.log(ak)
