"""Exact Fourier coefficients for data supported on the k > 0 half line.

With ``u0(x) = i A exp(i x)`` and ``uhat(k, t) = i A^k vhat(k, t)`` the
Burgers equation in Fourier space becomes the real recursion

    vhat(1, t) = exp(-rho(1) t)
    vhat(k, t) = (k/2) int_0^t exp(-(t-s) rho(k)) sum_{p=1}^{k-1} vhat(p, s) vhat(k-p, s) ds

(the two factors of ``i`` from the product cancel the ``-i`` of the
advection term). Every ``vhat(k, .)`` is therefore a finite sum of terms
``c t^m exp(-lambda t)`` whose rates are nonnegative integer combinations
of ``rho(1), ..., rho(k)``. Rates are stored as integer multiplicity tuples
so that merging like terms is exact; coefficients are mpmath floats.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

import mpmath as mp

from .dissipation import DissipationSymbol, Family

DEFAULT_PRECISION = 256
CHECK_PRECISION = 384
DEFAULT_TERM_CAP = 20_000_000

RateKey = tuple  # multiplicities (n_1, ..., n_K), trailing zeros stripped


class TermCapExceeded(RuntimeError):
    def __init__(self, k: int, count: int, cap: int):
        super().__init__(f"term count {count} exceeds cap {cap} at k={k}")
        self.k = k
        self.count = count
        self.cap = cap


def make_key(multiplicities: Iterable[int]) -> RateKey:
    key = list(multiplicities)
    while key and key[-1] == 0:
        key.pop()
    if any(n < 0 for n in key):
        raise ValueError(f"negative multiplicity in {key}")
    return tuple(key)


def unit_key(k: int) -> RateKey:
    return (0,) * (k - 1) + (1,)


def add_keys(a: RateKey, b: RateKey) -> RateKey:
    if len(a) < len(b):
        a, b = b, a
    return tuple(x + y for x, y in zip(a, b)) + a[len(b) :]


def key_wavenumber(key: RateKey) -> int:
    """sum_p p * n_p: the wavenumber a rate combination belongs to."""
    return sum(p * n for p, n in enumerate(key, start=1))


def big_rate(sym: DissipationSymbol, k: int) -> mp.mpf:
    """rho(k) at the current mpmath precision."""
    ak = abs(k)
    mu = mp.mpf(sym.mu)
    fam = sym.family
    if fam is Family.EXPONENTIAL:
        return mu * mp.exp(2 * mp.mpf(sym.sigma) * ak)
    if fam is Family.STRETCHED_EXPONENTIAL:
        return mu * mp.exp(2 * mp.mpf(sym.sigma) * mp.mpf(ak) ** mp.mpf(sym.alpha))
    if fam is Family.COSH:
        return mu * (mp.cosh(mp.mpf(ak) / mp.mpf(sym.k_d)) - 1)
    return mu * mp.mpf(ak) ** (2 * mp.mpf(sym.alpha))


class RateTable:
    """Cache of rho(p) and of the rates attached to keys, at one precision."""

    def __init__(self, sym: DissipationSymbol, prec: int):
        self.sym = sym
        self.prec = prec
        self._rho: list = [None]
        self._lam: dict[RateKey, mp.mpf] = {}

    def rho(self, p: int) -> mp.mpf:
        with mp.workprec(self.prec):
            while len(self._rho) <= p:
                self._rho.append(big_rate(self.sym, len(self._rho)))
        return self._rho[p]

    def rate(self, key: RateKey) -> mp.mpf:
        lam = self._lam.get(key)
        if lam is None:
            with mp.workprec(self.prec):
                lam = mp.fsum(n * self.rho(p) for p, n in enumerate(key, start=1) if n)
            self._lam[key] = lam
        return lam


@dataclass(eq=False)
class ExpSum:
    """sum over terms of ``c * t^m * exp(-lambda(key) t)``.

    ``terms`` maps ``(key, m)`` to the coefficient ``c``.
    """

    rates: RateTable
    terms: dict = field(default_factory=dict)

    @property
    def prec(self) -> int:
        return self.rates.prec

    def __len__(self) -> int:
        return len(self.terms)

    def max_degree(self) -> int:
        return max((m for _, m in self.terms), default=0)

    def wavenumbers(self) -> set[int]:
        return {key_wavenumber(key) for key, _ in self.terms}


def _collect(rates: RateTable, acc: dict) -> ExpSum:
    return ExpSum(rates, {km: c for km, c in acc.items() if c != 0})


def convolve(a: ExpSum, b: ExpSum) -> ExpSum:
    """Product of two exponential sums, like terms merged."""
    if a.rates is not b.rates:
        raise ValueError("exponential sums built from different rate tables")
    acc: dict = defaultdict(mp.mpf)
    with mp.workprec(a.prec):
        for (ka, ma), ca in a.terms.items():
            for (kb, mb), cb in b.terms.items():
                acc[(add_keys(ka, kb), ma + mb)] += ca * cb
    return _collect(a.rates, acc)


def _add_convolution(acc: dict, a: ExpSum, b: ExpSum) -> None:
    for (ka, ma), ca in a.terms.items():
        for (kb, mb), cb in b.terms.items():
            acc[(add_keys(ka, kb), ma + mb)] += ca * cb


def integrate_against_kernel(s: ExpSum, k: int, sym: DissipationSymbol | None = None, scale=1) -> ExpSum:
    """``scale * int_0^t exp(-(t - s') rho(k)) s(s') ds'`` as an exponential sum.

    Non-resonant terms use the closed-form antiderivative of
    ``s^m exp(delta s)``; a key equal to the singleton of ``k`` gives the
    resonant ``t^(m+1)/(m+1)`` branch, and rates closer than
    ``2^(-prec/2) rho(k)`` use a four-term Taylor expansion in ``delta``.
    """
    rates = s.rates
    if sym is not None and sym != rates.sym:
        raise ValueError("symbol differs from the one the exponential sum was built with")
    acc: dict = defaultdict(mp.mpf)
    with mp.workprec(rates.prec):
        _integrate_into(acc, s.terms.items(), k, rates, mp.mpf(scale))
    return _collect(rates, acc)


def _integrate_into(acc: dict, items, k: int, rates: RateTable, scale) -> None:
    ek = unit_key(k)
    r = rates.rho(k)
    eps_res = mp.ldexp(r, -(rates.prec // 2))
    for (key, m), c in items:
        c = c * scale
        if key == ek:
            acc[(ek, m + 1)] += c / (m + 1)
            continue
        delta = r - rates.rate(key)
        if abs(delta) < eps_res:
            # int_0^t s^m e^{delta s} ds ~ sum_n delta^n t^(m+n+1) / (n! (m+n+1))
            term = c
            for n in range(4):
                acc[(ek, m + n + 1)] += term / (m + n + 1)
                term = term * delta / (n + 1)
            continue
        # int_0^t s^m e^{delta s} ds
        #   = e^{delta t} sum_j (-1)^(m-j) m!/(j! delta^(m-j+1)) t^j - (-1)^m m!/delta^(m+1)
        inv = 1 / delta
        coef = c * inv  # j = m term
        acc[(key, m)] += coef
        for j in range(m - 1, -1, -1):
            coef = -coef * (j + 1) * inv
            acc[(key, j)] += coef
        acc[(ek, 0)] -= coef  # coef is now (-1)^m m! c / delta^(m+1)


def initial_term(rates: RateTable) -> ExpSum:
    with mp.workprec(rates.prec):
        return ExpSum(rates, {(unit_key(1), 0): mp.mpf(1)})


def compute_coefficients(
    K: int,
    sym: DissipationSymbol,
    prec: int = DEFAULT_PRECISION,
    term_cap: int = DEFAULT_TERM_CAP,
) -> list[ExpSum]:
    """Exact ``vhat(k, .)`` for ``k = 1..K`` as exponential sums.

    The result does not depend on the initial amplitude; use
    :func:`physical_coefficient` to recover ``uhat``.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    rates = RateTable(sym, prec)
    v = [None, initial_term(rates)]
    total = 1
    for k in range(2, K + 1):
        acc: dict = defaultdict(mp.mpf)
        with mp.workprec(prec):
            # symmetric pairs (p, k-p) counted once and doubled
            for p in range(1, k // 2 + 1):
                part: dict = defaultdict(mp.mpf)
                _add_convolution(part, v[p], v[k - p])
                weight = mp.mpf(k) if 2 * p != k else mp.mpf(k) / 2
                _integrate_into(acc, part.items(), k, rates, weight)
        vk = _collect(rates, acc)
        bad = [key for key, _ in vk.terms if key_wavenumber(key) != k]
        if bad:
            raise AssertionError(f"rate key {bad[0]} violates wavenumber conservation at k={k}")
        total += len(vk)
        if total > term_cap:
            raise TermCapExceeded(k, total, term_cap)
        v.append(vk)
    return v[1:]


def evaluate(s: ExpSum, t) -> mp.mpf:
    """Value at time ``t >= 0``, summed in order of decreasing magnitude."""
    with mp.workprec(s.prec):
        t = mp.mpf(t)
        if t < 0:
            raise ValueError("t must be nonnegative")
        vals = []
        for (key, m), c in s.terms.items():
            if m and t == 0:
                continue
            vals.append(c * (t**m if m else 1) * mp.exp(-s.rates.rate(key) * t))
        vals.sort(key=abs, reverse=True)
        return mp.fsum(vals)


def physical_coefficient(vhat_value, k: int, amplitude=1) -> mp.mpc:
    """uhat(k) = i A^k vhat(k) for initial data i A exp(i x)."""
    return mp.mpc(0, 1) * mp.mpmathify(amplitude) ** k * vhat_value


def values_at(K: int, sym: DissipationSymbol, t=1, prec: int = DEFAULT_PRECISION, term_cap=DEFAULT_TERM_CAP):
    """``[vhat(1, t), ..., vhat(K, t)]`` at working precision ``prec``."""
    sums = compute_coefficients(K, sym, prec, term_cap)
    return [evaluate(s, t) for s in sums]


@dataclass(frozen=True)
class ConsistencyCheck:
    value: mp.mpf
    check_value: mp.mpf
    agreeing_digits: float
    required_digits: int

    @property
    def passed(self) -> bool:
        return self.agreeing_digits >= self.required_digits


def consistency_check(
    K: int,
    sym: DissipationSymbol,
    t=1,
    prec: int = DEFAULT_PRECISION,
    check_prec: int = CHECK_PRECISION,
    digits: int = 40,
    term_cap: int = DEFAULT_TERM_CAP,
) -> ConsistencyCheck:
    """Recompute ``vhat(K, t)`` at ``check_prec`` bits and count agreeing digits."""
    lo = evaluate(compute_coefficients(K, sym, prec, term_cap)[-1], t)
    hi = evaluate(compute_coefficients(K, sym, check_prec, term_cap)[-1], t)
    return ConsistencyCheck(lo, hi, agreeing_digits(lo, hi), digits)


def agreeing_digits(a, b) -> float:
    """-log10 of the relative difference (inf when identical)."""
    with mp.workprec(2 * CHECK_PRECISION):
        a, b = mp.mpf(a), mp.mpf(b)
        if a == b:
            return math.inf
        scale = max(abs(a), abs(b))
        return float(-mp.log10(abs(a - b) / scale))
