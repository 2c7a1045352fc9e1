"""Scalar special functions.

Euler Gamma (with reflection to negative arguments), the Gauss
hypergeometric function restricted to nonpositive argument, the double
gamma function, Barnes G, moments of the generalized beta law, and the
2x2 connection matrix between hypergeometric solution bases.

Everything here is a pure function of its arguments; evaluator objects are
immutable after construction apart from an internal memo cache, so all
operations are safe to call concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DegenerateCError, DomainError, PoleError
from .quadrature import geometric_edges, integrate_panels

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_POLE_TOL = 1e-12  # absolute tolerance for nonpositive-integer detection

_SERIES_TOL = 1e-16
_SERIES_MAX_TERMS = 100_000


def _sinpi(x: float) -> float:
    """sin(pi*x) with exact argument reduction (accurate near integers)."""
    n = round(x)
    r = x - n
    s = math.sin(math.pi * r)
    return s if (n % 2 == 0) else -s


def is_nonpositive_integer(x: float, tol: float = _POLE_TOL) -> bool:
    return x <= 0.5 and abs(x - round(x)) <= tol


def gammaln_signed(x: float) -> tuple[float, float]:
    """(log|Gamma(x)|, sign of Gamma(x)).

    Negative arguments go through the reflection formula
    Gamma(x) = pi / (sin(pi x) Gamma(1-x)), so only positive arguments ever
    reach lgamma.  Raises PoleError at nonpositive integers.
    """
    if is_nonpositive_integer(x):
        raise PoleError(f"Gamma pole at x={x!r}")
    if x > 0.0:
        return math.lgamma(x), 1.0
    s = _sinpi(x)
    # log Gamma(x) = log pi - log|sin(pi x)| - log Gamma(1-x)
    logval = math.log(math.pi) - math.log(abs(s)) - math.lgamma(1.0 - x)
    return logval, math.copysign(1.0, s)


def gamma_fn(x: float) -> float:
    """Euler Gamma for real non-pole arguments."""
    logval, sign = gammaln_signed(x)
    return sign * math.exp(logval)


@dataclass(frozen=True)
class HypTriple:
    """Parameters (a, b, c) of a Gauss hypergeometric function."""

    a_param: float
    b_param: float
    c_param: float

    def __post_init__(self):
        if is_nonpositive_integer(self.c_param):
            raise DegenerateCError(f"lower parameter c={self.c_param!r} degenerates the series")


def _hyp2f1_series(a: float, b: float, c: float, z: float) -> float:
    """Defining power series, for |z| < 1."""
    term = 1.0
    total = 1.0
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (1.0 + k)) * z
        total += term
        if abs(term) <= _SERIES_TOL * abs(total):
            return total
    raise ConvergenceError(
        f"hypergeometric series did not converge: a={a}, b={b}, c={c}, z={z}"
    )


def hyp2f1_negative(params: HypTriple, t: float) -> float:
    """F(a, b, c, t) for t <= 0.

    The series is summed directly on (-0.5, 0]; for t <= -0.5 the Pfaff
    transformation F(a,b,c,t) = (1-t)^(-a) F(a, c-b, c, t/(t-1)) maps the
    argument into (0, 1) where the series converges.
    """
    if t > 0.0:
        raise DomainError(f"argument must be <= 0, got {t!r}")
    a, b, c = params.a_param, params.b_param, params.c_param
    if t == 0.0:
        return 1.0
    if t > -0.5:
        return _hyp2f1_series(a, b, c, t)
    z = t / (t - 1.0)
    return (1.0 - t) ** (-a) * _hyp2f1_series(a, c - b, c, z)


def _dgamma_series_coeffs(q: float, x: float, order: int = 10) -> np.ndarray:
    """Taylor coefficients about t=0 of the double gamma log-integrand.

    The integrand is
        [e^{-xt} - e^{-Qt/2}] / [(1-e^{-mt})(1-e^{-nt}) t]
        - (Q/2-x)^2/2 * e^{-t}/t + (x-Q/2)/t^2
    with m n = 1 and m + n = Q; the 1/t^2 and 1/t parts cancel identically
    and the remainder is computed by series division.
    """
    m = q / 2.0 + math.sqrt(max(q * q / 4.0 - 1.0, 0.0))
    n = q - m
    k_max = order + 3
    fac = np.cumprod(np.concatenate(([1.0], np.arange(1.0, k_max + 2))))
    j = np.arange(0, k_max + 1)
    # numerator e^{-xt} - e^{-Qt/2} = sum_{j>=1} a_j t^j
    a = ((-x) ** j - (-q / 2.0) ** j) / fac[: k_max + 1]
    # h(u) = (1-e^{-u})/u; denominator / t^2 = h(mt) h(nt)
    i = np.arange(0, k_max)
    h = (-1.0) ** i / fac[1 : k_max + 1]
    den = np.convolve(h * m**i, h * n**i)[:k_max]  # den[0] = 1
    num = a[1 : k_max + 1]
    quot = np.empty(k_max)
    for k in range(k_max):
        quot[k] = num[k] - (np.dot(quot[:k], den[k:0:-1]) if k else 0.0)
    d = q / 2.0 - x
    k = np.arange(order)
    return quot[2 : order + 2] - (d * d / 2.0) * (-1.0) ** (k + 1) / fac[k + 1]


@dataclass
class DoubleGamma:
    """Evaluator for the double gamma function at fixed gamma in (0, 2].

    gamma = 2 is admitted solely as the bridge to the Barnes G function.
    The quasi-periods are m = gamma/2 and n = 2/gamma with m*n = 1, and
    q = m + n.  Evaluation strategy: on the base window the defining
    integral is computed with a Taylor-series head below `series_switch`,
    adaptive Gauss-Legendre panels up to a cutoff T, and the algebraic
    (x - q/2)/T tail added in closed form; arguments above q are reduced
    into the window with the two shift equations, arguments below a small
    floor are lifted by the m-shift (the function has a simple pole at 0).
    """

    gamma: float
    quad_rel_tol: float = 1e-13
    series_switch: float = 1e-3
    q: float = field(init=False)
    _cache: dict = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.gamma <= 2.0:
            raise DomainError(f"gamma must be in (0, 2], got {self.gamma!r}")
        self.q = self.gamma / 2.0 + 2.0 / self.gamma
        self._m = self.gamma / 2.0
        self._n = 2.0 / self.gamma
        self._x_floor = 0.05
        self._cache = {}

    def _integrand(self, x: float, t: np.ndarray) -> np.ndarray:
        q = self.q
        gap = (0.5 * q - x) * t
        # expm1 form only where the two exponentials nearly cancel
        with np.errstate(over="ignore", invalid="ignore"):
            near = np.exp(-0.5 * q * t) * np.expm1(np.where(np.abs(gap) < 1.0, gap, 0.0))
        num = np.where(np.abs(gap) < 1.0, near, np.exp(-x * t) - np.exp(-0.5 * q * t))
        den = np.expm1(-self._m * t) * np.expm1(-self._n * t)
        return (num / den) / t - 0.5 * (0.5 * q - x) ** 2 * np.exp(-t) / t + (x - 0.5 * q) / t**2

    def _ln_window(self, x: float) -> float:
        s = self.series_switch
        coeffs = _dgamma_series_coeffs(self.q, x)
        k = np.arange(1, len(coeffs) + 1)
        head = float(np.sum(coeffs * s**k / k))
        mu = min(x, 0.5 * self.q, 1.0)
        t_cut = max(45.0, (45.0 + math.log(max(1.0, 1.0 / mu))) / mu)
        body = integrate_panels(
            lambda t: self._integrand(x, t),
            geometric_edges(s, t_cut),
            rel_tol=self.quad_rel_tol,
        )
        return head + body + (x - 0.5 * self.q) / t_cut

    def _ln_shift_m(self, y: float) -> float:
        """ln of Gamma_{m}(y)/Gamma_{m}(y+m) per the m-shift equation."""
        g = self.gamma
        return math.lgamma(0.5 * g * y) + (0.5 - 0.5 * g * y) * math.log(0.5 * g) - _LOG_SQRT_2PI

    def _ln_shift_n(self, y: float) -> float:
        g = self.gamma
        return math.lgamma(2.0 * y / g) + (2.0 * y / g - 0.5) * math.log(0.5 * g) - _LOG_SQRT_2PI

    def log_value(self, x: float) -> float:
        """ln of the double gamma function at x > 0."""
        if not x > 0.0:
            raise DomainError(f"double gamma needs x > 0, got {x!r}")
        if not math.isfinite(x):
            raise DomainError(f"non-finite argument {x!r}")
        cached = self._cache.get(x)
        if cached is not None:
            return cached
        shift = 0.0
        y = x
        while y < self._x_floor:
            shift += self._ln_shift_m(y)
            y += self._m
        while y > self.q:
            # reduce by the larger quasi-period when it stays above the floor
            step = self._n if y - self._n >= self._x_floor else self._m
            y -= step
            shift -= self._ln_shift_n(y) if step == self._n else self._ln_shift_m(y)
        val = self._ln_window(y) + shift
        self._cache[x] = val
        return val


_EVALUATORS: dict[float, DoubleGamma] = {}


def double_gamma_evaluator(gamma: float) -> DoubleGamma:
    """Shared per-gamma evaluator (memoized; safe under the GIL)."""
    ev = _EVALUATORS.get(gamma)
    if ev is None:
        ev = DoubleGamma(gamma)
        _EVALUATORS[gamma] = ev
    return ev


def log_double_gamma(gamma: float, x: float) -> float:
    return double_gamma_evaluator(gamma).log_value(x)


def barnes_g(x: float) -> float:
    """Barnes G function for x > 0, through the gamma=2 double gamma."""
    if not x > 0.0:
        raise DomainError(f"Barnes G needs x > 0, got {x!r}")
    # G(x) = (2 pi)^(x/2 - 1/2) / Gamma_1(x)
    return math.exp((0.5 * x - 0.5) * math.log(2.0 * math.pi) - log_double_gamma(2.0, x))


@dataclass(frozen=True)
class Beta22Params:
    """Shape parameters of the generalized beta law on [0, 1].

    The first two base parameters are fixed to (1, 4/gamma^2).  b1 and b2
    may be any reals for which the moment formula's double gamma arguments
    stay positive (that is checked per requested moment, not here).
    """

    gamma: float
    b0: float
    b1: float
    b2: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 2.0:
            raise DomainError(f"gamma must be in (0, 2), got {self.gamma!r}")
        if not self.b0 > 0.0:
            raise DomainError(f"b0 must be positive, got {self.b0!r}")


def beta22_log_moment(params: Beta22Params, p: float) -> float:
    """ln E[beta_{2,2}(1, 4/gamma^2; b0, b1, b2)^p], for p > -b0.

    Eight double gamma values; every argument must be positive.
    """
    if not p > -params.b0:
        raise DomainError(f"need p > -b0, got p={p!r}, b0={params.b0!r}")
    m = params.gamma / 2.0
    b0, b1, b2 = params.b0, params.b1, params.b2
    b12 = b1 + b2  # grouped so the formula is bit-exact under b1 <-> b2
    plus = (m * (p + b0), m * (b0 + b1), m * (b0 + b2), m * (p + (b0 + b12)))
    minus = (m * b0, m * (p + (b0 + b1)), m * (p + (b0 + b2)), m * (b0 + b12))
    for arg in plus + minus:
        if not arg > 0.0:
            raise DomainError(f"double gamma argument {arg!r} not positive")
    lv = double_gamma_evaluator(params.gamma).log_value
    return (
        lv(plus[0]) + (lv(plus[1]) + lv(plus[2])) + lv(plus[3])
        - lv(minus[0]) - (lv(minus[1]) + lv(minus[2])) - lv(minus[3])
    )


def connection_coeffs(params: HypTriple, d1: float, d2: float) -> tuple[float, float]:
    """Map expansion-at-infinity constants (d1, d2) to expansion-at-zero ones.

    Change of basis between the two solution families of the hypergeometric
    equation, valid when c, a-b and the matrix Gamma arguments avoid
    nonpositive integers.
    """
    a, b, c = params.a_param, params.b_param, params.c_param

    def ratio(args_num, args_den):
        logv = 0.0
        sign = 1.0
        for arg in args_num:
            lg, s = gammaln_signed(arg)
            logv += lg
            sign *= s
        for arg in args_den:
            lg, s = gammaln_signed(arg)
            logv -= lg
            sign *= s
        return sign * math.exp(logv)

    m11 = ratio((1.0 - c, a - b + 1.0), (a - c + 1.0, 1.0 - b))
    m21 = ratio((c - 1.0, a - b + 1.0), (a, c - b))
    if d2 == 0.0:
        return m11 * d1, m21 * d1
    m12 = ratio((1.0 - c, b - a + 1.0), (b - c + 1.0, 1.0 - a))
    m22 = ratio((c - 1.0, b - a + 1.0), (b, c - a))
    return m11 * d1 + m12 * d2, m21 * d1 + m22 * d2
