"""Independent high-precision oracles, used to pin a handful of spot values.

Everything here is computed with mpmath from the defining integrals and
series, never through the package code paths it is used to check.
"""
import mpmath as mp

mp.mp.dps = 40


def ln_dgamma(gamma, x):
    """Log of the double gamma function straight from its integral."""
    gamma = mp.mpf(gamma)
    x = mp.mpf(x)
    m = gamma / 2
    n = 2 / gamma
    q = m + n

    def f(t):
        t = mp.mpf(t)
        num = mp.e ** (-q * t / 2) * mp.expm1((q / 2 - x) * t)
        den = mp.expm1(-m * t) * mp.expm1(-n * t)
        return (num / den) / t - ((q / 2 - x) ** 2 / 2) * mp.e ** (-t) / t + (x - q / 2) / t**2

    mu = min(x, q / 2, mp.mpf(1))
    t_cut = mp.mpf(130) / mu
    with mp.workdps(100):
        val = mp.quad(f, [mp.mpf("1e-20"), mp.mpf("0.1"), 1, 10, t_cut])
        val += (x - q / 2) / t_cut
    return +val


def exact_moment(g, p, a, b):
    """Closed-form moment assembled from the oracle double gamma."""
    g = mp.mpf(g)
    p = mp.mpf(p)
    a = mp.mpf(a)
    b = mp.mpf(b)
    m = g / 2
    n = 2 / g
    num = (
        p * mp.log(2 * mp.pi)
        + ln_dgamma(g, n * (a + 1) - (p - 1) * m)
        + ln_dgamma(g, n * (b + 1) - (p - 1) * m)
        + ln_dgamma(g, n * (a + b + 2) - (p - 2) * m)
        + ln_dgamma(g, n - p * m)
    )
    den = (
        p * (g**2 / 4) * mp.log(m)
        + p * mp.log(mp.gamma(1 - g**2 / 4))
        + ln_dgamma(g, n)
        + ln_dgamma(g, n * (a + 1) + m)
        + ln_dgamma(g, n * (b + 1) + m)
        + ln_dgamma(g, n * (a + b + 2) - (2 * p - 2) * m)
    )
    return mp.e ** (num - den)
