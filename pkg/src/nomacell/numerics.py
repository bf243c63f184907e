"""Numerical kernel: adaptive quadrature, incomplete gamma functions and
bracketed root finding.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Callable
from dataclasses import dataclass


class NumericsError(ArithmeticError):
    """Base class for failures inside the numerical kernel."""


class ConvergenceError(NumericsError):
    """An iterative method ran out of iterations before meeting its tolerance."""


class BracketError(NumericsError, ValueError):
    """The supplied interval does not bracket a sign change."""

    def __init__(self, lo: float, hi: float, f_lo: float, f_hi: float):
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi
        super().__init__(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}"
        )


class DomainError(NumericsError, ValueError):
    """Argument outside the supported domain."""


@dataclass(frozen=True)
class Tolerance:
    """Accuracy request shared by all iterative routines.

    Attributes:
        rel: relative tolerance.
        abs: absolute tolerance.
        max_iter: subdivisions (quadrature) or iterations (root finding).
    """

    rel: float = 1e-10
    abs: float = 1e-14
    max_iter: int = 60

    def __post_init__(self):
        if not self.rel > 0:
            raise ValueError(f"rel must be > 0, got {self.rel}")
        if not self.abs >= 0:
            raise ValueError(f"abs must be >= 0, got {self.abs}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")


DEFAULT_TOL = Tolerance()

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half, centre last).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
# Gauss 7-point weights, attached to the odd-indexed Kronrod nodes above.
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(centre)
    kronrod = fc * _WGK[7]
    gauss = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        fsum = f(centre - dx) + f(centre + dx)
        kronrod += _WGK[j] * fsum
        if j % 2 == 1:
            gauss += _WG[j // 2] * fsum
    kronrod *= half
    gauss *= half
    if not (math.isfinite(kronrod) and math.isfinite(gauss)):
        raise DomainError(f"integrand is not finite on [{a!r}, {b!r}]")
    return kronrod, abs(kronrod - gauss)


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Integrate ``f`` over ``[lo, hi]`` with globally adaptive Gauss-Kronrod.

    The interval with the largest error estimate is bisected until the summed
    estimate satisfies ``err <= max(tol.abs, tol.rel * |I|)``. The estimate is
    the raw |K15 - G7| difference, which is pessimistic for smooth integrands.

    Raises:
        DomainError: if ``lo > hi`` or the integrand evaluates non-finite.
        ConvergenceError: if ``tol.max_iter`` bisections do not suffice.
    """
    if not lo <= hi:
        raise DomainError(f"integration bounds must satisfy lo <= hi, got [{lo!r}, {hi!r}]")
    if lo == hi:
        return 0.0

    value, err = _gk15(f, lo, hi)
    # max-heap on error via negated keys
    heap = [(-err, lo, hi, value)]
    total_err = err
    for _ in range(tol.max_iter):
        if total_err <= max(tol.abs, tol.rel * abs(value)):
            return value
        neg_err, a, b, part = heapq.heappop(heap)
        m = 0.5 * (a + b)
        left, left_err = _gk15(f, a, m)
        right, right_err = _gk15(f, m, b)
        heapq.heappush(heap, (-left_err, a, m, left))
        heapq.heappush(heap, (-right_err, m, b, right))
        # re-sum rather than update in place to avoid drift
        value = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    if total_err <= max(tol.abs, tol.rel * abs(value)):
        return value
    raise ConvergenceError(
        f"quadrature on [{lo!r}, {hi!r}] did not converge in {tol.max_iter} "
        f"subdivisions: value={value!r}, error estimate={total_err!r}"
    )


def _check_shape(s: float, x: float) -> None:
    if not s > 0:
        raise DomainError(f"incomplete gamma requires s > 0, got s={s!r}")
    if not x >= 0:
        raise DomainError(f"incomplete gamma requires x >= 0, got x={x!r}")


def _lower_series(s: float, x: float) -> float:
    # gamma(s, x) = x^s e^-x sum_n x^n / (s (s+1) ... (s+n))
    term = 1.0 / s
    total = term
    denom = s
    for _ in range(10_000):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * 1e-17:
            return total * math.exp(s * math.log(x) - x)
    raise ConvergenceError(f"lower incomplete gamma series failed for s={s!r}, x={x!r}")


def _upper_continued_fraction(s: float, x: float) -> float:
    # Modified Lentz evaluation of Gamma(s, x) = x^s e^-x / (x + 1 - s - 1(1-s)/(x + 3 - s - ...))
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(s * math.log(x) - x)
    raise ConvergenceError(f"upper incomplete gamma fraction failed for s={s!r}, x={x!r}")


def lower_incomplete_gamma(s: float, x: float) -> float:
    """Lower incomplete gamma ``integral_0^x t^(s-1) e^-t dt`` (not normalised).

    ``x`` may be ``math.inf``, giving ``Gamma(s)``.
    """
    _check_shape(s, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.gamma(s)
    if x < s + 1.0:
        return _lower_series(s, x)
    return math.gamma(s) - _upper_continued_fraction(s, x)


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Upper incomplete gamma ``integral_x^inf t^(s-1) e^-t dt`` (not normalised)."""
    _check_shape(s, x)
    if x == 0:
        return math.gamma(s)
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return math.gamma(s) - _lower_series(s, x)
    return _upper_continued_fraction(s, x)


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Brent's method on a sign-changing bracket.

    Inverse quadratic / secant steps are used when they stay inside the
    bracket and shrink it fast enough; otherwise the step is a bisection, so
    convergence is guaranteed for continuous ``f``. Stops when
    ``|f(x)| <= tol.abs`` or the bracket is narrower than ``tol.rel * |x|``.

    Non-finite function values are tolerated (treated by sign) so callers may
    return ``inf`` past a pole or an overflow.

    Raises:
        BracketError: ``f(lo)`` and ``f(hi)`` share a strict sign.
        ConvergenceError: ``tol.max_iter`` iterations exhausted.
    """
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if math.isnan(fa) or math.isnan(fb):
        raise DomainError(f"f is NaN at a bracket end: f({a!r})={fa!r}, f({b!r})={fb!r}")
    if fa == 0:
        return a
    if fb == 0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError(a, b, fa, fb)

    if abs(fa) < abs(fb):
        a, b, fa, fb = b, a, fb, fa
    c, fc = a, fa
    d = e = b - a

    for _ in range(tol.max_iter):
        if abs(fb) <= tol.abs:
            return b
        xtol = 0.5 * max(tol.rel * abs(b), 4.0 * 2.220446049250313e-16 * abs(b), 1e-300)
        m = 0.5 * (c - b)
        if abs(m) <= xtol:
            return b

        interpolate = (
            abs(e) >= xtol
            and abs(fa) > abs(fb)
            and math.isfinite(fa)
            and math.isfinite(fb)
            and math.isfinite(fc)
        )
        if interpolate:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(xtol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m

        a, fa = b, fb
        b = b + d if abs(d) > xtol else b + math.copysign(xtol, m)
        fb = f(b)
        if math.isnan(fb):
            raise DomainError(f"f returned NaN at x={b!r}")
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb

    raise ConvergenceError(
        f"root finding did not converge in {tol.max_iter} iterations; "
        f"last bracket [{min(b, c)!r}, {max(b, c)!r}]"
    )
