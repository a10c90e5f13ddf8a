"""Independent reference computations used by the tests.

None of these share code paths with the package: convolutions are plain
double loops, phi functions come from their Taylor series, and the
half-space coefficients come from Gauss-Legendre quadrature of the integral
equation, marching panel by panel in time.
"""

from __future__ import annotations

import math

import mpmath as mp


def brute_convolution(a: dict, b: dict, k_max: int) -> dict:
    """sum_{p+q=k} a(p) b(q) over |p|, |q|, |k| <= k_max."""
    out = {}
    for k in range(-k_max, k_max + 1):
        s = 0j
        for p in range(-k_max, k_max + 1):
            q = k - p
            if abs(q) <= k_max:
                s += a.get(p, 0) * b.get(q, 0)
        out[k] = s
    return out


def phi_series(z, j: int, dps: int = 40):
    """phi_j(z) = sum_n z^n / (n + j)!"""
    with mp.workdps(dps):
        z = mp.mpf(z)
        return mp.nsum(lambda n: z**n / mp.factorial(n + j), [0, mp.inf])


def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1] at the current precision (Newton on P_n)."""
    nodes, weights = [], []
    for i in range(1, n + 1):
        x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
        for _ in range(100):
            p0, p1 = mp.mpf(1), x
            for m in range(2, n + 1):
                p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < mp.eps * 4:
                break
        p0, p1 = mp.mpf(1), x
        for m in range(2, n + 1):
            p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
        dp = n * (x * p1 - p0) / (x * x - 1)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    return nodes, weights


def _integration_matrix(nodes, weights):
    """Q[j][i] = int_{-1}^{x_j} l_i(x) dx, each integral by Gauss-Legendre on [-1, x_j]."""
    n = len(nodes)

    def lagrange(i, x):
        v = mp.mpf(1)
        for m in range(n):
            if m != i:
                v *= (x - nodes[m]) / (nodes[i] - nodes[m])
        return v

    Q = []
    for xj in nodes:
        half = (xj + 1) / 2
        sub = [(-1 + half * (y + 1), half * w) for y, w in zip(nodes, weights)]
        Q.append([mp.fsum(w * lagrange(i, y) for y, w in sub) for i in range(n)])
    return Q


def halfspace_quadrature(K: int, rho, t_end=1, dps: int = 60, n_nodes: int = 40, n_panels: int = 200):
    """vhat(k, t_end) for k = 1..K from the Duhamel form

        vhat(k, t) = (k/2) int_0^t exp(-(t-s) rho(k)) sum_p vhat(p, s) vhat(k-p, s) ds,

    with vhat(1, t) = exp(-rho(1) t). ``rho(k)`` must return an mpf.
    """
    with mp.workdps(dps):
        nodes, weights = gauss_legendre(n_nodes)
        Q = _integration_matrix(nodes, weights)
        t_end = mp.mpf(t_end)
        h = t_end / n_panels
        rates = [None] + [mp.mpf(rho(k)) for k in range(1, K + 1)]
        offsets = [h * (x + 1) / 2 for x in nodes]
        # vals[k][panel][i]: vhat(k) at node i of the panel
        vals = [None]
        vals.append(
            [[mp.exp(-rates[1] * (j * h + o)) for o in offsets] for j in range(n_panels)]
        )
        end = {1: mp.exp(-rates[1] * t_end)}
        for k in range(2, K + 1):
            r = rates[k]
            start = mp.mpf(0)
            panels = []
            for j in range(n_panels):
                S = [
                    mp.fsum(vals[p][j][i] * vals[k - p][j][i] for p in range(1, k))
                    for i in range(n_nodes)
                ]
                g = [mp.exp(r * o) * s for o, s in zip(offsets, S)]
                inner = [h / 2 * mp.fsum(q * gi for q, gi in zip(row, g)) for row in Q]
                panels.append(
                    [mp.exp(-r * o) * (start + k * inner[i] / 2) for i, o in enumerate(offsets)]
                )
                full = h / 2 * mp.fsum(w * gi for w, gi in zip(weights, g))
                start = mp.exp(-r * h) * (start + k * full / 2)
            vals.append(panels)
            end[k] = start
        return [end[k] for k in range(1, K + 1)]


def vhat2_closed_form(rho1, rho2, t):
    """(exp(-2 rho1 t) - exp(-rho2 t)) / (rho2 - 2 rho1)."""
    return (mp.exp(-2 * rho1 * t) - mp.exp(-rho2 * t)) / (rho2 - 2 * rho1)


def delta2_klogk_terminal(k: float) -> float:
    """Leading asymptotics of the canonical-stack output for exp(-(1/ln 2) k ln k).

    Log gives -(1/ln 2) f(k) with f = x ln x; the backward second difference
    at k is f''(k-1) + f''''(k-1)/12 + ... = 1/(k-1) + 1/(6 (k-1)^3);
    inverting and differencing once more gives -ln 2 (1 + O(k^-3)) whose
    first correction is computed here from the series.
    """
    def inv_d2(x):
        c = x - 1
        return -math.log(2) / (1 / c + 1 / (6 * c**3) + 1 / (15 * c**5))

    return inv_d2(k) - inv_d2(k - 1)
