"""Alternating power series in the dimensionless Caldirola coefficients.

``kbar_n = (-1)^n pi^(2n) / (2n+1)!`` so that ``sum_n kbar_n x^(2n) = sin(pi x)/(pi x)``.

At integer ``x = m`` the partial sums cancel from a peak term of roughly
``exp(pi m) / (pi m)`` down to an O(1) result. Terms are therefore generated
in double-double arithmetic (error-free products, ~32 significant digits)
and accumulated exactly with :func:`math.fsum`; the certified range for the
double-precision contract is ``|m| <= 8``, beyond which results carry a
precision warning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

CERTIFIED_MAX = 8
DEFAULT_NTRUNC = 300

# relative size at which a term is considered negligible against the peak
_STOP_RATIO = 1e-32
# the truncation order must at least reach terms this small
_REQUIRED_RATIO = 1e-16

_PI_DD = (math.pi, 1.2246467991473532e-16)
_SPLITTER = 134217729.0  # 2**27 + 1


class PrecisionWarning(UserWarning):
    """Cancellation in a series exceeds the certified double-precision budget."""


# -- double-double primitives (Dekker / Knuth error-free transformations) --

def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_mul(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    p, e = _two_prod(a[0], b[0])
    e += a[0] * b[1] + a[1] * b[0]
    return _quick_two_sum(p, e)


def _dd_div(a: tuple[float, float], d: float) -> tuple[float, float]:
    q1 = a[0] / d
    p, e = _two_prod(q1, d)
    s, t = _two_sum(a[0], -p)
    t = t - e + a[1]
    q2 = (s + t) / d
    return _quick_two_sum(q1, q2)


@dataclass
class SeriesAccumulator:
    """Running state of ``sum_n w(n) kbar_n x^(2n)``.

    The term recurrence ``t_(n+1) = t_n * (-(pi x)^2) / ((2n+2)(2n+3))`` never
    forms a factorial. Weighted terms are kept as double-double pairs and
    summed exactly on demand.
    """

    x: float
    n_trunc: int = DEFAULT_NTRUNC
    n: int = 0
    term: tuple[float, float] = (1.0, 0.0)
    peak: float = 0.0
    parts: dict = field(default_factory=dict)

    def __post_init__(self):
        px = _dd_mul(_PI_DD, (float(self.x), 0.0))
        sq = _dd_mul(px, px)
        self._ratio = (-sq[0], -sq[1])

    def advance(self) -> None:
        n = self.n
        self.term = _dd_div(_dd_mul(self.term, self._ratio), float((2 * n + 2) * (2 * n + 3)))
        self.n = n + 1

    def add(self, name: str, weight: float) -> None:
        p, e = _two_prod(self.term[0], weight)
        self.parts.setdefault(name, []).extend((p, e + self.term[1] * weight))

    def total(self, name: str) -> float:
        return math.fsum(self.parts.get(name, ()))


@dataclass(frozen=True)
class SeriesResult:
    """A summed series together with its cancellation diagnostics."""

    value: float
    terms: int
    peak: float
    lost_digits: float
    warning: str | None = None

    def __float__(self) -> float:
        return self.value


def kbar(n: int) -> float:
    """``(-1)^n pi^(2n) / (2n+1)!``, by recurrence."""
    if n < 0:
        raise ValueError(f"index must be non-negative, got {n}")
    acc = SeriesAccumulator(1.0)
    for _ in range(n):
        acc.advance()
    return acc.term[0] + acc.term[1]


def _run(x: float, weights: dict, n_trunc: int) -> tuple[dict, int, float]:
    acc = SeriesAccumulator(x, n_trunc)
    last = 1.0
    peak_index = 0.5 * math.pi * abs(x)
    while True:
        mag = abs(acc.term[0])
        acc.peak = max(acc.peak, mag)
        for name, w in weights.items():
            acc.add(name, w(acc.n))
        last = mag
        if acc.n > peak_index and mag <= _STOP_RATIO * acc.peak:
            break
        if acc.n >= n_trunc:
            if last > _REQUIRED_RATIO * acc.peak:
                raise ValueError(
                    f"n_trunc={n_trunc} too small for x={x}: last term {last:.3e} "
                    f"exceeds 1e-16 of the peak {acc.peak:.3e}"
                )
            break
        acc.advance()
    return {name: acc.total(name) for name in weights}, acc.n + 1, acc.peak


def _diagnose(x: float, peak: float, what: str) -> tuple[float, str | None]:
    lost = math.log10(peak) if peak > 1 else 0.0
    msg = None
    if abs(x) > CERTIFIED_MAX:
        msg = (
            f"{what} at |x|={abs(x):g} exceeds the certified range |x| <= {CERTIFIED_MAX}; "
            f"about {lost:.1f} digits lost to cancellation"
        )
        warnings.warn(msg, PrecisionWarning, stacklevel=3)
    return lost, msg


def sinc_series(x: float, n_trunc: int = DEFAULT_NTRUNC) -> SeriesResult:
    """Partial sum of ``sum_n kbar_n x^(2n)``, which tends to ``sin(pi x)/(pi x)``."""
    sums, terms, peak = _run(x, {"s": lambda n: 1.0}, n_trunc)
    lost, msg = _diagnose(x, peak, "sinc series")
    return SeriesResult(sums["s"], terms, peak, lost, msg)


def _check_mode(m: int) -> None:
    if int(m) != m or m < 1:
        raise ValueError(f"mode number must be a positive integer, got {m!r}")


def a_coefficient(m: int, n_trunc: int = DEFAULT_NTRUNC) -> SeriesResult:
    """``A_m = (1/2) sum_n n kbar_n m^(2n)``; analytically ``(-1)^m / 4``.

    The ``n = 0`` term is included; it vanishes through the factor ``n``.
    """
    _check_mode(m)
    sums, terms, peak = _run(float(m), {"a": lambda n: float(n)}, n_trunc)
    lost, msg = _diagnose(m, peak * math.pi * m, "A_m")
    return SeriesResult(0.5 * sums["a"], terms, peak, lost, msg)


def b_coefficient(m: int, n_trunc: int = DEFAULT_NTRUNC) -> SeriesResult:
    """``B_m = 1 + 2 sum_{n>=0} (n + 1/2) kbar_n m^(2n)``; analytically ``1 + (-1)^m``.

    Starting at ``n = 0`` makes ``B_m = 1 + 4 A_m + sinc(m)``. Starting at
    ``n = 1`` instead would give ``B_m - 1 = (-1)^m``.
    """
    _check_mode(m)
    sums, terms, peak = _run(float(m), {"b": lambda n: n + 0.5}, n_trunc)
    lost, msg = _diagnose(m, peak * math.pi * m, "B_m")
    return SeriesResult(1.0 + 2.0 * sums["b"], terms, peak, lost, msg)
