"""Special functions and orthonormal polynomial families.

Everything here is real-argument and vectorised over ``x`` with numpy.
Polynomials use their three-term recurrences; the explicit finite sums are
kept (``*_series``) because the tests use them as oracles.
"""

import math

import numpy as np

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _lanczos_sum(x):
    # x is the shifted argument (z - 1)
    a = np.full_like(x, _LANCZOS[0])
    for k in range(1, len(_LANCZOS)):
        a = a + _LANCZOS[k] / (x + k)
    return a


def loggamma(z):
    """log|Gamma(z)| for real z (Lanczos, reflection below 1/2)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 0.5
    if np.any(small):
        zs = z[small]
        out[small] = np.log(np.pi / np.abs(np.sin(np.pi * zs))) - loggamma(1.0 - zs)
    big = ~small
    if np.any(big):
        x = z[big] - 1.0
        t = x + _LANCZOS_G + 0.5
        out[big] = 0.5 * np.log(2 * np.pi) + (x + 0.5) * np.log(t) - t + np.log(_lanczos_sum(x))
    return out if out.ndim else float(out)


def gamma(z):
    """Gamma function for real z (poles give inf)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 0.5
    if np.any(small):
        zs = z[small]
        out[small] = np.pi / (np.sin(np.pi * zs) * gamma(1.0 - zs))
    big = ~small
    if np.any(big):
        x = z[big] - 1.0
        t = x + _LANCZOS_G + 0.5
        out[big] = np.sqrt(2 * np.pi) * t ** (x + 0.5) * np.exp(-t) * _lanczos_sum(x)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- polynomials

def hermite_series(n, x):
    """H_n(x) from the explicit finite sum."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for k in range(n // 2 + 1):
        c = (-1) ** k * math.factorial(n) / (math.factorial(k) * math.factorial(n - 2 * k))
        total = total + c * (2 * x) ** (n - 2 * k)
    return total


def hermite(n, x):
    """Physicists' Hermite polynomial H_n(x)."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    if n <= 12:
        return hermite_series(n, x)
    h0, h1 = np.ones_like(x), 2 * x
    for k in range(1, n):
        h0, h1 = h1, 2 * x * h1 - 2 * k * h0
    return h1


def _check_nu(nu):
    if not nu > -1:
        raise ValueError(f"Laguerre parameter must satisfy nu > -1, got {nu}")


def laguerre_series(n, nu, x):
    """L_n^(nu)(x) from the explicit finite sum."""
    _check_nu(nu)
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for k in range(n + 1):
        # (nu+k+1)_{n-k} / ((n-k)! k!)
        poch = 1.0
        for j in range(n - k):
            poch *= nu + k + 1 + j
        total = total + poch / (math.factorial(n - k) * math.factorial(k)) * (-x) ** k
    return total


def laguerre(n, nu, x):
    """Generalised Laguerre polynomial L_n^(nu)(x), nu > -1."""
    _check_nu(nu)
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    if n <= 12:
        return laguerre_series(n, nu, x)
    l0, l1 = np.ones_like(x), 1 + nu - x
    for k in range(1, n):
        l0, l1 = l1, ((2 * k + 1 + nu - x) * l1 - (k + nu) * l0) / (k + 1)
    return l1


def hermite_table(nmax, x, weighted=False):
    """Rows phi_0..phi_nmax of the orthonormal Hermite family at x.

    phi_n = H_n / sqrt(2^n n!) is orthonormal for exp(-x^2)/sqrt(pi) dx.
    With ``weighted=True`` the rows are multiplied by
    (exp(-x^2)/sqrt(pi))^(1/2), i.e. orthonormal in L^2(dx); this is the
    form that survives large n and large |x|.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x) if weighted else 1.0
    if nmax >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def laguerre_table(nmax, nu, x, weighted=False):
    """Rows phi^(nu)_0..phi^(nu)_nmax, orthonormal for y^nu e^-y / Gamma(nu+1) dy.

    ``weighted=True`` folds in the square root of that density.
    """
    _check_nu(nu)
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    if weighted:
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.exp(0.5 * (nu * np.log(x) - x - loggamma(nu + 1.0)))
        out[0] = np.where(x > 0, w, 0.0 if nu > 0 else (np.inf if nu < 0 else 1.0))
    else:
        out[0] = 1.0
    if nmax >= 1:
        out[1] = (1 + nu - x) * out[0] / np.sqrt(1 + nu)
    for n in range(1, nmax):
        a = np.sqrt((n + 1) * (n + nu + 1))
        b = np.sqrt(n * (n + nu))
        out[n + 1] = ((2 * n + 1 + nu - x) * out[n] - b * out[n - 1]) / a
    return out


def phi_normalized(kind, n, x, nu=0.0):
    """Orthonormalised polynomial value.

    kind is "hermite" (phi_n = H_n/sqrt(2^n n!)) or "laguerre"
    (sqrt(n! Gamma(nu+1)/Gamma(n+nu+1)) L_n^(nu)).
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    if kind == "hermite":
        return hermite_table(n, x)[n]
    if kind == "laguerre":
        return laguerre_table(n, nu, x)[n]
    raise ValueError(f"unknown family {kind!r}")


# --------------------------------------------------------------------- Bessel

def _check_bessel_args(nu, x):
    if not nu > -1:
        raise ValueError(f"order must satisfy nu > -1, got {nu}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("argument must be >= 0")
    return x


def _bessel_j_series(nu, x):
    h = 0.5 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.exp(nu * np.log(h) - loggamma(nu + 1.0)) if nu != 0 else np.ones_like(x)
    term = np.where(x == 0, 1.0 if nu == 0 else 0.0, term)
    total = term.copy()
    q = -h * h
    for k in range(1, 120):
        term = term * q / (k * (k + nu))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total) + 1e-300):
            break
    return total


def _hankel_coeffs(nu, kmax):
    mu = 4.0 * nu * nu
    a = [1.0]
    for k in range(1, kmax + 1):
        a.append(a[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return a


def _bessel_j_asymptotic(nu, x):
    a = _hankel_coeffs(nu, 60)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    done = np.zeros(x.shape, dtype=bool)
    prev = np.full_like(x, np.inf)
    for k in range(len(a)):
        t = a[k] / x ** k
        mag = np.abs(t)
        active = ~done & (mag < prev)
        sgn = (-1) ** (k // 2)
        if k % 2 == 0:
            p = np.where(active, p + sgn * t, p)
        else:
            q = np.where(active, q + sgn * t, q)
        done |= ~active | (mag < 1e-17)
        prev = np.where(active, mag, prev)
        if np.all(done):
            break
    w = x - 0.5 * nu * np.pi - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(w) - q * np.sin(w))


def _bessel_j_miller(nu, x):
    # backward recurrence normalised by sum_m (nu+2m) Gamma(nu+m)/m! J_{nu+2m} = (x/2)^nu
    kstart = int(np.max(x)) + 60
    kstart += kstart % 2
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    for k in range(kstart, -1, -1):
        order = nu + k
        if k % 2 == 0:
            m = k // 2
            if m == 0:
                w = gamma(nu + 1.0)
            else:
                w = (nu + 2 * m) * math.exp(float(loggamma(nu + m)) - math.lgamma(m + 1))
            norm = norm + w * j
        if k == 0:
            result = j
            break
        jm1 = 2.0 * order / x * j - jp1
        jp1, j = j, jm1
        big = np.abs(j) > 1e250
        if np.any(big):
            s = np.where(big, 1e-250, 1.0)
            j, jp1, norm = j * s, jp1 * s, norm * s
    return result * (0.5 * x) ** nu / norm


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x), nu > -1, x >= 0."""
    x = _check_bessel_args(nu, x)
    xf = np.atleast_1d(x)
    out = np.empty_like(xf)
    lo = xf < 5.0
    far = xf >= max(25.0, nu * nu)
    mid = ~lo & ~far
    if np.any(lo):
        out[lo] = _bessel_j_series(nu, xf[lo])
    if np.any(mid):
        out[mid] = _bessel_j_miller(nu, xf[mid])
    if np.any(far):
        out[far] = _bessel_j_asymptotic(nu, xf[far])
    return out.reshape(x.shape) if x.ndim else float(out[0])


def _bessel_i_series_scaled(nu, x):
    h = 0.5 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.exp(nu * np.log(h) - loggamma(nu + 1.0) - x) if nu != 0 else np.exp(-x)
    term = np.where(x == 0, 1.0 if nu == 0 else 0.0, term)
    total = term.copy()
    q = h * h
    for k in range(1, 400):
        term = term * q / (k * (k + nu))
        total = total + term
        if np.all(term <= 1e-17 * total + 1e-300):
            break
    return total


def _bessel_i_asymptotic_scaled(nu, x):
    a = _hankel_coeffs(nu, 60)
    s = np.zeros_like(x)
    prev = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    for k in range(len(a)):
        t = (-1) ** k * a[k] / x ** k
        mag = np.abs(t)
        active = ~done & (mag < prev)
        s = np.where(active, s + t, s)
        done |= ~active | (mag < 1e-17)
        prev = np.where(active, mag, prev)
        if np.all(done):
            break
    return s / np.sqrt(2 * np.pi * x)


def bessel_i_scaled(nu, x):
    """exp(-x) I_nu(x), the overflow-free form."""
    x = _check_bessel_args(nu, x)
    xf = np.atleast_1d(x)
    out = np.empty_like(xf)
    far = xf >= max(25.0, nu * nu)
    if np.any(~far):
        out[~far] = _bessel_i_series_scaled(nu, xf[~far])
    if np.any(far):
        out[far] = _bessel_i_asymptotic_scaled(nu, xf[far])
    return out.reshape(x.shape) if x.ndim else float(out[0])


def bessel_i(nu, x):
    """Modified Bessel function of the first kind I_nu(x), nu > -1, x >= 0."""
    x = _check_bessel_args(nu, x)
    return bessel_i_scaled(nu, x) * np.exp(x)


# ----------------------------------------------------------------------- Airy

_AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
_AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))


def _airy_maclaurin(x):
    x3 = x ** 3
    f = np.ones_like(x)
    g = x.copy()
    fp = np.zeros_like(x)
    gp = np.ones_like(x)
    tf = np.ones_like(x)
    tg = x.copy()
    tfp = np.ones_like(x)
    tgp = np.ones_like(x)
    for k in range(1, 60):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        f = f + tf
        g = g + tg
        # f' = sum 3k t_k / x, g' = sum (3k+1) s_k / x, built without dividing by x
        tfp = (x * x / (3 * k - 1)) if k == 1 else tfp * x3 / ((3 * k - 3) * (3 * k - 1))
        tgp = tgp * x3 / ((3 * k) * (3 * k - 2)) if k > 1 else x3 / 3.0
        fp = fp + tfp
        gp = gp + tgp
        if np.all(np.abs(tf) + np.abs(tg) < 1e-18 * (np.abs(f) + np.abs(g))):
            break
    ai = _AI0 * f + _AIP0 * g
    aip = _AI0 * fp + _AIP0 * gp
    return ai, aip


def _airy_uv(kmax):
    u = [1.0]
    for k in range(1, kmax + 1):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1)))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, kmax + 1)]
    return u, v


def _truncated(coef, zeta, sign_pattern, parity=None):
    # sum of sign * coef[k] / zeta^k over k of the given parity, stopped at the smallest term
    s = np.zeros_like(zeta)
    prev = np.full_like(zeta, np.inf)
    done = np.zeros(zeta.shape, dtype=bool)
    for k in range(len(coef)):
        if parity is not None and k % 2 != parity:
            continue
        t = sign_pattern(k) * coef[k] / zeta ** k
        mag = np.abs(t)
        active = ~done & (mag < prev)
        s = np.where(active, s + t, s)
        done |= ~active | (mag < 1e-18)
        prev = np.where(active, mag, prev)
        if np.all(done):
            break
    return s


def _airy_asymptotic(x):
    u, v = _airy_uv(40)
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    pos = x > 0
    if np.any(pos):
        z = x[pos]
        zeta = 2.0 / 3.0 * z ** 1.5
        e = np.exp(-zeta) / (2 * np.sqrt(np.pi))
        alt = lambda k: (-1) ** k
        ai[pos] = e / z ** 0.25 * _truncated(u, zeta, alt)
        aip[pos] = -e * z ** 0.25 * _truncated(v, zeta, alt)
    neg = ~pos
    if np.any(neg):
        z = -x[neg]
        zeta = 2.0 / 3.0 * z ** 1.5
        alt2 = lambda k: (-1) ** (k // 2)
        ue = _truncated(u, zeta, alt2, 0)
        uo = _truncated(u, zeta, alt2, 1)
        ve = _truncated(v, zeta, alt2, 0)
        vo = _truncated(v, zeta, alt2, 1)
        c, s = np.cos(zeta - np.pi / 4), np.sin(zeta - np.pi / 4)
        ai[neg] = (c * ue + s * uo) / (np.sqrt(np.pi) * z ** 0.25)
        aip[neg] = z ** 0.25 * (s * ve - c * vo) / np.sqrt(np.pi)
    return ai, aip


def airy_pair(x):
    """(Ai(x), Ai'(x)) for real x."""
    x = np.asarray(x, dtype=float)
    xf = np.atleast_1d(x)
    ai = np.empty_like(xf)
    aip = np.empty_like(xf)
    inner = np.abs(xf) <= 6.0
    if np.any(inner):
        ai[inner], aip[inner] = _airy_maclaurin(xf[inner])
    if np.any(~inner):
        ai[~inner], aip[~inner] = _airy_asymptotic(xf[~inner])
    if x.ndim == 0:
        return float(ai[0]), float(aip[0])
    return ai.reshape(x.shape), aip.reshape(x.shape)


def airy(x):
    """Airy function Ai(x)."""
    return airy_pair(x)[0]


def airy_prime(x):
    """Derivative Ai'(x)."""
    return airy_pair(x)[1]
