"""Dominant-balance predictions and asymptotic extrapolation of spectra.

Sequences are processed in the precision they arrive in: Python/numpy
floats stay floats, mpmath values stay mpmath values.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence as _Seq

import mpmath as mp

from .dissipation import DissipationSymbol, Family, growth_exponent

LN2 = math.log(2)
DOUBLE_BITS = 53


class TransformError(ArithmeticError):
    def __init__(self, transform: str, index: int, reason: str, stage: int | None = None):
        where = f"stage {stage} " if stage is not None else ""
        super().__init__(f"{where}{transform}: {reason} at index {index}")
        self.transform = transform
        self.index = index
        self.stage = stage


class PipelineError(ValueError):
    pass


class BalanceError(ValueError):
    pass


def _is_big(x) -> bool:
    return isinstance(x, (mp.mpf, mp.mpc))


def _bits(x) -> int:
    return mp.mp.prec if _is_big(x) else DOUBLE_BITS


@dataclass(frozen=True)
class Sequence:
    """Real sequence ``values[i] = s(start_index + i)``.

    ``precision`` holds the significand bits of each entry (53 for doubles).
    """

    start_index: int
    values: tuple
    label: str = ""
    precision: tuple = ()

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if not self.precision:
            object.__setattr__(self, "precision", tuple(_bits(v) for v in vals))
        elif len(self.precision) != len(vals):
            raise ValueError("precision metadata length differs from values")
        for i, v in enumerate(vals):
            if not (mp.isfinite(v) if _is_big(v) else math.isfinite(v)):
                raise ValueError(f"non-finite entry at index {self.start_index + i}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def indices(self) -> range:
        return range(self.start_index, self.start_index + len(self.values))

    def __getitem__(self, k: int):
        return self.values[k - self.start_index]

    def items(self):
        return zip(self.indices, self.values)

    def floats(self) -> list[float]:
        return [float(v) for v in self.values]

    def window(self, k_lo: int | None = None, k_hi: int | None = None) -> "Sequence":
        lo = self.start_index if k_lo is None else max(k_lo, self.start_index)
        hi = self.indices[-1] if k_hi is None else min(k_hi, self.indices[-1])
        a, b = lo - self.start_index, hi - self.start_index + 1
        return Sequence(lo, self.values[a:b], self.label, self.precision[a:b])


class TransformId(str, enum.Enum):
    LOG = "Log"
    D = "D"
    I = "I"  # noqa: E741
    R = "R"
    SR = "SR"


CANONICAL_STACK = (TransformId.LOG, TransformId.D, TransformId.D, TransformId.I, TransformId.D)

# (entries consumed beyond the output length, shift of start_index)
_STENCIL = {
    TransformId.LOG: (0, 0),
    TransformId.I: (0, 0),
    TransformId.D: (1, 1),
    TransformId.R: (1, 1),
    TransformId.SR: (2, 1),
}


def parse_stack(spec: str | _Seq) -> tuple[TransformId, ...]:
    """``"Log,D,D,I,D"`` -> tuple of TransformId."""
    names = spec.split(",") if isinstance(spec, str) else spec
    by_name = {t.value.lower(): t for t in TransformId}
    out = []
    for name in names:
        if isinstance(name, TransformId):
            out.append(name)
            continue
        try:
            out.append(by_name[name.strip().lower()])
        except KeyError:
            raise ValueError(f"unknown transform {name!r}") from None
    return tuple(out)


def apply_transform(t: TransformId, s: Sequence, stage: int | None = None) -> Sequence:
    """Apply one transform.

    D and R are backward: the output at ``k`` combines ``s(k)`` and
    ``s(k-1)``. SR is centred at ``k``. Log and I act pointwise.
    """
    t = TransformId(t)
    with mp.workprec(max(s.precision, default=DOUBLE_BITS)):
        return _apply(t, s, stage)


def _apply(t: TransformId, s: Sequence, stage: int | None) -> Sequence:
    width, shift = _STENCIL[t]
    v, bits = s.values, s.precision
    n = len(v)
    if n - width < 1:
        raise TransformError(t.value, s.start_index, f"sequence of length {n} too short", stage)

    def fail(i, reason):
        raise TransformError(t.value, s.start_index + i, reason, stage)

    out: list = []
    if t is TransformId.LOG:
        for i, x in enumerate(v):
            if x == 0:
                fail(i, "log of zero")
            out.append(mp.log(abs(x)) if _is_big(x) else math.log(abs(x)))
        obits = bits
    elif t is TransformId.I:
        for i, x in enumerate(v):
            if x == 0:
                fail(i, "division by zero")
            out.append(1 / x)
        obits = bits
    elif t is TransformId.D:
        out = [v[i + 1] - v[i] for i in range(n - 1)]
        obits = tuple(min(bits[i], bits[i + 1]) for i in range(n - 1))
    elif t is TransformId.R:
        for i in range(n - 1):
            if v[i] == 0:
                fail(i, "division by zero")
            out.append(v[i + 1] / v[i])
        obits = tuple(min(bits[i], bits[i + 1]) for i in range(n - 1))
    else:
        for i in range(1, n - 1):
            if v[i] == 0:
                fail(i, "division by zero")
            out.append(v[i + 1] * v[i - 1] / (v[i] * v[i]))
        obits = tuple(min(bits[i - 1 : i + 2]) for i in range(1, n - 1))
    return Sequence(s.start_index + shift, tuple(out), f"{t.value}({s.label})", tuple(obits))


@dataclass
class ExtrapolationReport:
    stack: tuple
    stages: list = field(default_factory=list)  # (TransformId, Sequence)
    terminal_fit: object = None
    c_star: object = None
    discrepancy_trace: Sequence | None = None
    tail_length: int = 0

    @property
    def terminal(self) -> Sequence:
        return self.stages[-1][1]

    @property
    def canonical(self) -> bool:
        return tuple(self.stack) == CANONICAL_STACK

    def best_discrepancy(self, k_lo: int | None = None, k_hi: int | None = None):
        """(k, value) of the smallest |discrepancy| within the window."""
        w = self.discrepancy_trace.window(k_lo, k_hi)
        return min(w.items(), key=lambda kv: abs(kv[1]))

    def to_dict(self) -> dict:
        return {
            "stack": [t.value for t in self.stack],
            "stages": [{"transform": t.value, **_seq_dict(s)} for t, s in self.stages],
            "terminal_fit": format_number(self.terminal_fit, max(self.terminal.precision)),
            "tail_length": self.tail_length,
            "c_star": None
            if self.c_star is None
            else format_number(self.c_star, max(self.terminal.precision)),
            "discrepancy_trace": _seq_dict(self.discrepancy_trace),
        }


def format_number(x, bits: int | None = None) -> str:
    """Round-trip decimal string: repr for doubles, all significant digits for mpf."""
    if _is_big(x):
        dps = mp.libmp.repr_dps(bits or mp.mp.prec)
        return mp.nstr(x, dps, strip_zeros=False, min_fixed=1, max_fixed=0)
    return repr(float(x))


def _seq_dict(s: Sequence) -> dict:
    return {
        "start_index": s.start_index,
        "label": s.label,
        "values": [format_number(x, b) for x, b in zip(s.values, s.precision)],
        "precision": list(s.precision),
    }


def _ln2_like(x):
    return mp.log(2) if _is_big(x) else LN2


def run_pipeline(s: Sequence, stack=CANONICAL_STACK) -> ExtrapolationReport:
    """Apply ``stack`` in order and fit the terminal stage by its tail median.

    The tail is the last ``max(3, round(0.2 * n))`` entries. For the
    canonical Log, D, D, I, D stack the terminal constant ``u5`` gives
    ``c_star = -1/u5`` and the discrepancy trace is ``u5(k) + ln 2``;
    otherwise the trace is the terminal stage minus the fit.
    """
    stack = parse_stack(stack)
    if not stack:
        raise PipelineError("empty transform stack")
    report = ExtrapolationReport(stack)
    cur = s
    for i, t in enumerate(stack, start=1):
        cur = apply_transform(t, cur, stage=i)
        report.stages.append((t, cur))
    with mp.workprec(max(cur.precision, default=DOUBLE_BITS)):
        _fit_terminal(report, cur)
    return report


def _fit_terminal(report: ExtrapolationReport, cur: Sequence) -> None:
    n = len(cur)
    tail = max(3, round(0.2 * n))
    if n < tail:
        raise PipelineError(f"terminal stage has {n} entries, need at least {tail} for the fit")
    fit = statistics.median(cur.values[-tail:])
    report.terminal_fit = fit
    report.tail_length = tail
    if report.canonical:
        if fit == 0:
            raise PipelineError("terminal fit is zero; C* undefined")
        report.c_star = -1 / fit
        ln2 = _ln2_like(fit)
        trace = tuple(x + ln2 for x in cur.values)
    else:
        trace = tuple(x - fit for x in cur.values)
    report.discrepancy_trace = Sequence(cur.start_index, trace, f"discrepancy({cur.label})", cur.precision)


def naive_discrepancy(spectrum: Sequence, k_d: float = 1.0, t_label: float = 1.0) -> Sequence:
    """Discr(k) = -ln|u(k)| / (kt ln kt) - 1/ln 2 with kt = k / k_d."""
    with mp.workprec(max(spectrum.precision, default=DOUBLE_BITS)):
        out = _discr_values(spectrum, k_d)
    return Sequence(spectrum.start_index, tuple(out), f"Discr(t={t_label})", spectrum.precision)


def _discr_values(spectrum: Sequence, k_d: float) -> list:
    out = []
    for k, x in spectrum.items():
        if not x > 0:
            raise ValueError(f"nonpositive spectrum entry at k={k}")
        big = _is_big(x)
        kt = mp.mpf(k) / mp.mpf(k_d) if big else k / k_d
        log = mp.log if big else math.log
        if kt <= 1:
            raise ValueError(f"k/k_d = {kt} at k={k}: need k/k_d > 1")
        out.append(-log(x) / (kt * log(kt)) - 1 / log(2))
    return out


class KLogK(NamedTuple):
    coefficient: float  # F(k) ~ coefficient * kt ln kt


class PowerAlpha(NamedTuple):
    coefficient: float  # F(k) ~ coefficient * |k|^alpha
    alpha: float


@dataclass(frozen=True)
class BalancePrediction:
    symbol: DissipationSymbol
    F_values: dict
    closed_form: KLogK | PowerAlpha
    minimum_condition: bool


def dyadic_F(G, n_max: int, F1: float = 0.0) -> dict[int, float]:
    """F(2^n) = 2^n [F(1) + sum_{j=1}^n G(2^j)/2^j] for n = 0..n_max."""
    out = {1: F1}
    acc = F1
    for j in range(1, n_max + 1):
        acc += G(2**j) / 2**j
        out[2**j] = 2**j * acc
    return out


def _convex_on_dyadics(F: dict[int, float]) -> bool:
    ks = sorted(F)
    slopes = [(F[b] - F[a]) / (b - a) for a, b in zip(ks, ks[1:])]
    return all(s2 >= s1 for s1, s2 in zip(slopes, slopes[1:]))


def solve_balance(sym: DissipationSymbol, n_max: int, F1: float = 0.0) -> BalancePrediction:
    """Solve 2F(k/2) = F(k) - G(k) on dyadic wavenumbers.

    ``minimum_condition`` reports whether the produced F is convex on the
    dyadic points, i.e. whether ``p = k/2`` really minimises ``F(p) + F(k-p)``.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    fam = sym.family
    if fam is Family.POWER_LAPLACIAN:
        raise BalanceError(
            "power-law symbol: G(k) grows only logarithmically, F(p)+F(k-p) has no strict "
            "minimum at p=k/2"
        )
    if fam is Family.STRETCHED_EXPONENTIAL and sym.alpha < 1:
        raise BalanceError(
            f"alpha={sym.alpha} < 1: p=k/2 is a maximum, not a minimum, of F(p)+F(k-p)"
        )
    F = dyadic_F(lambda k: growth_exponent(sym, k), n_max, F1)
    if fam is Family.STRETCHED_EXPONENTIAL and sym.alpha > 1:
        form = PowerAlpha(2 * sym.sigma / (1 - 2 ** (1 - sym.alpha)), sym.alpha)
    else:
        form = KLogK(1 / LN2)
    return BalancePrediction(sym, F, form, _convex_on_dyadics(F))


class DecayCheck(NamedTuple):
    passed: bool
    first_violation: int | None


def check_decay_bound(
    spectrum: Sequence, k_d: float, C: float, k_min: int, k_max: int | None = None
) -> DecayCheck:
    """Is |u(k)| <= exp(-C kt ln kt) for every k in [k_min, k_max]?

    ``k_max`` should be the last noise-free wavenumber.
    """
    if not C < 1 / (2 * LN2):
        raise ValueError(f"C={C} must be below 1/(2 ln 2)")
    if not k_min / k_d > math.e:
        raise ValueError(f"k_min/k_d = {k_min / k_d} must exceed e")
    for k, x in spectrum.window(k_min, k_max).items():
        kt = k / k_d
        bound = math.exp(-C * kt * math.log(kt))
        if abs(float(x)) > bound:
            return DecayCheck(False, k)
    return DecayCheck(True, None)
