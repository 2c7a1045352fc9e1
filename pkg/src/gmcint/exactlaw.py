"""Closed-form quantities for the total mass of GMC on the unit interval.

Exact fractional moments, the Selberg product for integer moments, shift
equation ratios, the moment normalization constant, reflection
coefficients, the product-of-independent-laws decomposition, derivative
martingale moments, and the hypergeometric-basis prediction for the two
auxiliary observables.

All products of Gamma-type factors are assembled in log space; signs are
tracked separately where individual Euler Gamma factors can be negative.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import BoundsError, DegenerateParamsError, DomainError
from .specfun import (
    Beta22Params,
    HypTriple,
    beta22_log_moment,
    connection_coeffs,
    double_gamma_evaluator,
    gammaln_signed,
    hyp2f1_negative,
    log_double_gamma,
)

_INT_GUARD = 1e-9  # distance to the nearest integer below which the basis degenerates
_LARGE_T_SWITCH = -100.0  # beyond this the mapped series argument is too close to 1
_CANCEL_LIMIT = 1e8  # max tolerated cancellation between the two basis terms


@dataclass(frozen=True)
class GmcParams:
    """Moment order p and endpoint weight exponents (a, b) at coupling gamma."""

    gamma: float
    p: float
    a: float
    b: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 2.0:
            raise DomainError(f"gamma must be in (0, 2), got {self.gamma!r}")


class ObservableKind(enum.Enum):
    """Insertion power of the moving weight (x - t)^chi in the observable."""

    POWER_GAMMA_SQ_OVER_4 = "gamma-sq-over-4"
    POWER_ONE = "one"

    def chi(self, gamma: float) -> float:
        return gamma * gamma / 4.0 if self is ObservableKind.POWER_GAMMA_SQ_OVER_4 else 1.0


class ShiftKind(enum.Enum):
    A_PLUS_GAMMA_SQ_OVER_4 = "a+gamma^2/4"
    A_PLUS_ONE = "a+1"
    P_MINUS_ONE_TO_P = "p-1->p"


def bounds_check(params: GmcParams) -> bool:
    """True iff the moment is non-trivial (finite and nonzero).

    Requires a, b > -gamma^2/4 - 1 and p strictly below
    min(4/gamma^2, 1 + (4/gamma^2)(1+a), 1 + (4/gamma^2)(1+b)).
    """
    g2over4 = params.gamma * params.gamma / 4.0
    four_over_g2 = 1.0 / g2over4
    if not (params.a > -g2over4 - 1.0 and params.b > -g2over4 - 1.0):
        return False
    p_cap = min(
        four_over_g2,
        1.0 + four_over_g2 * (1.0 + params.a),
        1.0 + four_over_g2 * (1.0 + params.b),
    )
    return params.p < p_cap


def _require_bounds(params: GmcParams) -> None:
    if not bounds_check(params):
        raise BoundsError(f"moment does not exist for {params}")


def log_exact_moment(params: GmcParams) -> float:
    """ln of the exact fractional moment."""
    _require_bounds(params)
    g, p, a, b = params.gamma, params.p, params.a, params.b
    m = g / 2.0
    n = 2.0 / g
    ab = (a + 1.0) + (b + 1.0)  # grouped so a <-> b symmetry is bit-exact
    dg = double_gamma_evaluator(g).log_value
    num = (
        p * math.log(2.0 * math.pi)
        + (dg(n * (a + 1.0) - (p - 1.0) * m) + dg(n * (b + 1.0) - (p - 1.0) * m))
        + dg(n * ab - (p - 2.0) * m)
        + dg(n - p * m)
    )
    den = (
        p * (g * g / 4.0) * math.log(m)
        + p * math.lgamma(1.0 - g * g / 4.0)
        + dg(n)
        + (dg(n * (a + 1.0) + m) + dg(n * (b + 1.0) + m))
        + dg(n * ab - (2.0 * p - 2.0) * m)
    )
    return num - den


def exact_moment(params: GmcParams) -> float:
    return math.exp(log_exact_moment(params))


def selberg_product(gamma: float, p: int, a: float, b: float) -> float:
    """Integer moment as the finite product of Euler Gamma ratios.

    The independent route against which the analytic continuation is
    checked; all arguments are positive whenever the bounds hold.
    """
    if p != int(p) or p < 0:
        raise DomainError(f"p must be a nonnegative integer, got {p!r}")
    p = int(p)
    if not (a > -1.0 and b > -1.0):
        raise DomainError("selberg product needs a, b > -1")
    _require_bounds(GmcParams(gamma, float(p), a, b))
    g2over4 = gamma * gamma / 4.0
    logval = 0.0
    for j in range(1, p + 1):
        logval += (
            math.lgamma(1.0 + a - (j - 1) * g2over4)
            + math.lgamma(1.0 + b - (j - 1) * g2over4)
            + math.lgamma(1.0 - j * g2over4)
            - math.lgamma(2.0 + a + b - (p + j - 2) * g2over4)
            - math.lgamma(1.0 - g2over4)
        )
    return math.exp(logval)


def c_of_p(gamma: float, p: float) -> float:
    """Normalization constant of the moment formula at weight exponents 0."""
    if not 0.0 < gamma < 2.0:
        raise DomainError(f"gamma must be in (0, 2), got {gamma!r}")
    m = gamma / 2.0
    n = 2.0 / gamma
    if not p < 4.0 / (gamma * gamma):
        raise DomainError(f"need p < 4/gamma^2, got p={p!r}")
    dg = double_gamma_evaluator(gamma).log_value
    logval = (
        p * math.log(2.0 * math.pi)
        - p * math.lgamma(1.0 - gamma * gamma / 4.0)
        + p * (gamma * gamma / 4.0) * math.log(n)
        + dg(n - p * m)
        - dg(n)
    )
    return math.exp(logval)


def shift_ratio(params: GmcParams, kind: ShiftKind) -> float:
    """Closed-form ratio of the moment at shifted parameters to the base one."""
    g, p, a, b = params.gamma, params.p, params.a, params.b
    u = g * g / 4.0
    v = 4.0 / (g * g)
    if kind is ShiftKind.A_PLUS_GAMMA_SQ_OVER_4:
        shifted = GmcParams(g, p, a + u, b)
        args_num = (1.0 + a + u, 2.0 + a + b - (2.0 * p - 2.0) * u)
        args_den = (1.0 + a - (p - 1.0) * u, 2.0 + a + b - (p - 2.0) * u)
    elif kind is ShiftKind.A_PLUS_ONE:
        shifted = GmcParams(g, p, a + 1.0, b)
        args_num = (v * (1.0 + a) + 1.0, v * (2.0 + a + b) - (2.0 * p - 2.0))
        args_den = (v * (1.0 + a) - (p - 1.0), v * (2.0 + a + b) - (p - 2.0))
    elif kind is ShiftKind.P_MINUS_ONE_TO_P:
        shifted = GmcParams(g, p - 1.0, a, b)
        args_num = (
            1.0 - p * u,
            1.0 + a - (p - 1.0) * u,
            1.0 + b - (p - 1.0) * u,
            2.0 + a + b - (p - 2.0) * u,
        )
        args_den = (
            1.0 - u,
            2.0 + a + b - (2.0 * p - 3.0) * u,
            2.0 + a + b - (2.0 * p - 2.0) * u,
        )
    else:
        raise DomainError(f"unknown shift kind {kind!r}")
    _require_bounds(params)
    _require_bounds(shifted)
    logval = 0.0
    sign = 1.0
    for arg in args_num:
        lg, s = gammaln_signed(arg)
        logval += lg
        sign *= s
    for arg in args_den:
        lg, s = gammaln_signed(arg)
        logval -= lg
        sign *= s
    return sign * math.exp(logval)


def reflection_boundary_1d(gamma: float, alpha: float) -> float:
    """Tail constant of GMC with a boundary insertion of strength alpha."""
    q = gamma / 2.0 + 2.0 / gamma
    if not gamma / 2.0 < alpha < q:
        raise DomainError(f"alpha must lie in (gamma/2, Q), got {alpha!r}")
    s = (2.0 / gamma) * (q - alpha)  # tail exponent
    dg = double_gamma_evaluator(gamma).log_value
    logval = (
        (s - 0.5) * math.log(2.0 * math.pi)
        + ((gamma / 2.0) * (q - alpha) - 0.5) * math.log(2.0 / gamma)
        - math.log(q - alpha)
        - s * math.lgamma(1.0 - gamma * gamma / 4.0)
        + dg(alpha - gamma / 2.0)
        - dg(q - alpha)
    )
    return math.exp(logval)


def reflection_bulk_2d(gamma: float, alpha: float) -> float:
    """Tail constant of two-dimensional GMC with a bulk insertion."""
    q = gamma / 2.0 + 2.0 / gamma
    if not gamma / 2.0 < alpha < q:
        raise DomainError(f"alpha must lie in (gamma/2, Q), got {alpha!r}")
    s = (2.0 / gamma) * (q - alpha)
    logval = s * (math.log(math.pi) + math.lgamma(gamma * gamma / 4.0))
    logval -= s * math.lgamma(1.0 - gamma * gamma / 4.0)
    logval += math.log(gamma / (2.0 * (q - alpha)))
    sign = -1.0
    lg, sg = gammaln_signed(-(gamma / 2.0) * (q - alpha))
    logval += lg
    sign *= sg
    logval -= math.lgamma((gamma / 2.0) * (q - alpha))
    logval -= math.lgamma((2.0 / gamma) * (q - alpha))
    return sign * math.exp(logval)


def law_decomposition_log_moment(params: GmcParams) -> float:
    """ln of the moment assembled from five independent laws.

    Constant * log-normal * circle-mass law * three inverse generalized
    beta variables; evaluating the inverse-beta moments at -p.
    """
    _require_bounds(params)
    g, p, a, b = params.gamma, params.p, params.a, params.b
    v = 4.0 / (g * g)
    ln_const = math.log(2.0 * math.pi) - (3.0 * (1.0 + g * g / 4.0) + 2.0 * (a + b)) * math.log(2.0)
    ln_l = p * p * g * g * math.log(2.0) / 2.0
    ln_y = math.lgamma(1.0 - p * g * g / 4.0) - p * math.lgamma(1.0 - g * g / 4.0)
    x1 = Beta22Params(g, 1.0 + v * (1.0 + a), (b - a) * v / 2.0, (b - a) * v / 2.0)
    x2 = Beta22Params(g, 1.0 + v * (2.0 + a + b) / 2.0, 0.5, v / 2.0)
    x3 = Beta22Params(g, 1.0 + v, 0.5 + v * (1.0 + a + b) / 2.0, 0.5 + v * (1.0 + a + b) / 2.0)
    return (
        p * ln_const
        + ln_l
        + ln_y
        + beta22_log_moment(x1, -p)
        + beta22_log_moment(x2, -p)
        + beta22_log_moment(x3, -p)
    )


def derivative_martingale_moment(p: float) -> float:
    """Moment of twice the derivative-martingale total mass, for p < 1."""
    if not p < 1.0:
        raise DomainError(f"need p < 1, got {p!r}")
    g1 = double_gamma_evaluator(2.0).log_value
    logval = (
        p * math.log(2.0 * math.pi)
        + g1(1.0 - p)
        + 2.0 * g1(2.0 - p)
        + g1(4.0 - p)
        - 2.0 * g1(2.0)
        - g1(4.0 - 2.0 * p)
    )
    return math.exp(logval)


def hyp_triple(params: GmcParams, kind: ObservableKind) -> HypTriple:
    """Hypergeometric equation parameters for the chosen observable."""
    g, p, a, b = params.gamma, params.p, params.a, params.b
    u = g * g / 4.0
    if kind is ObservableKind.POWER_GAMMA_SQ_OVER_4:
        return HypTriple(-p * u, -(a + b + 1.0) - (2.0 - p) * u, -a - u)
    v = 4.0 / (g * g)
    return HypTriple(-p, -v * (a + b + 2.0) + p - 1.0, -v * (1.0 + a))


def _check_generic(triple: HypTriple) -> None:
    for name, val in (("c", triple.c_param), ("a-b", triple.a_param - triple.b_param)):
        if abs(val - round(val)) < _INT_GUARD:
            raise DegenerateParamsError(
                f"parameter {name}={val!r} within {_INT_GUARD} of an integer"
            )


def predict_observable(params: GmcParams, kind: ObservableKind, t: float) -> float:
    """Value of the auxiliary observable at t <= 0, from the exact moment.

    The expansion-at-infinity constants are (exact moment, 0); the
    connection matrix maps them to the expansion-at-zero basis, which is
    then summed.  The two representations are the same analytic function;
    the |t|^-1 basis is evaluated instead when the expansion-at-zero terms
    would cancel by more than eight orders (their difference shrinks like
    |t|^(-a_param) while each grows like |t|^(1-c_param)) or when t is
    below -100, where the mapped series argument approaches 1 and would
    exhaust the term cap.
    """
    if t > 0.0:
        raise DomainError(f"observable defined for t <= 0, got {t!r}")
    _require_bounds(params)
    chi = kind.chi(params.gamma)
    _require_bounds(GmcParams(params.gamma, params.p, params.a + chi, params.b))
    triple = hyp_triple(params, kind)
    _check_generic(triple)
    a, b, c = triple.a_param, triple.b_param, triple.c_param
    d1 = exact_moment(params)
    if t == 0.0:
        c1, _ = connection_coeffs(triple, d1, 0.0)
        return c1
    c1, c2 = connection_coeffs(triple, d1, 0.0)
    cancellation = abs(c2 / d1) * abs(t) ** (1.0 - c + a)
    if t < _LARGE_T_SWITCH or cancellation > _CANCEL_LIMIT:
        tail = hyp2f1_negative(HypTriple(a, 1.0 + a - c, 1.0 + a - b), 1.0 / t)
        return d1 * abs(t) ** (-a) * tail
    first = c1 * hyp2f1_negative(triple, t)
    second = c2 * abs(t) ** (1.0 - c) * hyp2f1_negative(
        HypTriple(1.0 + a - c, 1.0 + b - c, 2.0 - c), t
    )
    return first + second
