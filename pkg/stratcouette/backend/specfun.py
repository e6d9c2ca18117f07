"""
Complex special functions used by the explicit solution formulas.

This module contains:
- the Gamma function (Lanczos rational approximation plus reflection)
- Kummer's M series and the Whittaker functions M_{0,+-gamma}, W_{0,gamma}
- W', W'' computed independently of the Whittaker ODE
- the modified Bessel function K_0
- the analytic-continuation jump of W across the negative real axis
- small-argument structure of W used to build singular quadrature panels

All evaluators are vectorized over the argument for a fixed index and return
a Python complex for scalar input.
"""

import cmath
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from stratcouette.backend.core_types import DEGENERACY_THRESHOLD, FlowParams
from stratcouette.backend.errors import (
    BranchCutError,
    DegenerateIndexError,
    DomainError,
    NearDegenerateIndexError,
    NonConvergenceError,
    PoleError,
)

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
LOG4 = math.log(4.0)

SERIES_RADIUS = 60.0
MAX_TERMS = 500
SERIES_TOL = 1e-16

# regime boundaries for W_{0,gamma}
SMALL_RADIUS = 2.0
ASYMPTOTIC_RADIUS = 40.0
LEFT_SECTOR = 0.75 * math.pi
ASYMPTOTIC_MAX_TERMS = 30

# trapezoid step of the Laplace integral in s = log u
LAPLACE_STEP = 0.1
LAPLACE_UPPER = 4.0

# K_0 regime boundaries
K0_SERIES_RADIUS = 2.0
K0_ASYMPTOTIC_RADIUS = 25.0


# -------------------------------------------------
# Small helpers
# -------------------------------------------------

def _as_array(z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    return np.atleast_1d(arr), arr.ndim == 0


def _finish(values: np.ndarray, scalar: bool):
    return complex(values[0]) if scalar else values


def _as_gamma(gamma) -> complex:
    if isinstance(gamma, FlowParams):
        return complex(gamma.gamma)
    if isinstance(gamma, WhittakerIndex):
        return complex(gamma.gamma)
    return complex(gamma)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == round(z.real)


def check_index(gamma) -> complex:
    """Reject indices the W evaluators cannot handle."""
    gamma = _as_gamma(gamma)
    if gamma == 0:
        return gamma
    if abs(gamma) < DEGENERACY_THRESHOLD:
        raise NearDegenerateIndexError(
            "0 < |gamma| < 1e-8: connection formula cancels catastrophically", {"gamma": gamma}
        )
    two_gamma = 2 * gamma
    if two_gamma.imag == 0 and abs(two_gamma.real - round(two_gamma.real)) < 1e-12:
        raise DegenerateIndexError("2*gamma is a nonzero integer", {"gamma": gamma})
    return gamma


def check_cut(zeta: np.ndarray) -> None:
    on_cut = (zeta.imag == 0) & (zeta.real <= 0)
    if np.any(on_cut):
        raise BranchCutError(
            "argument on the branch cut (-inf, 0]", {"zeta": complex(zeta[on_cut][0])}
        )


# -------------------------------------------------
# Gamma function
# -------------------------------------------------

# rational Lanczos sum scaled by exp(-g), highest degree first
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_NUM = np.array([
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
])
_LANCZOS_DEN = np.array([
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
])


def _lanczos_gamma(z: np.ndarray) -> np.ndarray:
    ratio = np.polyval(_LANCZOS_NUM, z) / np.polyval(_LANCZOS_DEN, z)
    return ratio * np.exp((z - 0.5) * (np.log(z + _LANCZOS_G - 0.5) - 1.0))


def complex_gamma(z):
    """
    Gamma function on the complex plane.
    Lanczos approximation for Re z >= 1/2, reflection formula otherwise.
    """
    zz, scalar = _as_array(z)
    poles = (zz.imag == 0) & (zz.real <= 0) & (zz.real == np.round(zz.real))
    if np.any(poles):
        raise PoleError("Gamma has a pole at nonpositive integers", {"z": complex(zz[poles][0])})

    out = np.empty_like(zz)
    right = zz.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_gamma(zz[right])
    left = ~right
    if np.any(left):
        w = zz[left]
        out[left] = np.pi / (np.sin(np.pi * w) * _lanczos_gamma(1.0 - w))
    return _finish(out, scalar)


# -------------------------------------------------
# Kummer and Whittaker M functions
# -------------------------------------------------

def _kummer_series(a: complex, b: complex, zeta: np.ndarray, max_terms: int = MAX_TERMS) -> np.ndarray:
    term = np.ones_like(zeta)
    total = np.ones_like(zeta)
    radius = float(np.max(np.abs(zeta))) if zeta.size else 0.0
    for s in range(max_terms):
        term = term * ((a + s) / ((b + s) * (s + 1))) * zeta
        total = total + term
        if s + 1 > radius and np.all(np.abs(term) <= SERIES_TOL * np.abs(total)):
            return total
    raise NonConvergenceError(
        "Kummer series did not converge",
        {"a": a, "b": b, "max_terms": max_terms, "radius": radius},
    )


def _kummer_derivatives(a: complex, b: complex, zeta: np.ndarray, order: int) -> list[np.ndarray]:
    """M, M', M'' through M^(k)(a,b,z) = (a)_k/(b)_k M(a+k, b+k, z)."""
    out = [_kummer_series(a, b, zeta)]
    coef = 1.0 + 0j
    for k in range(1, order + 1):
        coef *= (a + k - 1) / (b + k - 1)
        out.append(coef * _kummer_series(a + k, b + k, zeta))
    return out


def kummer_m(a, b, zeta, series_radius: float = SERIES_RADIUS, max_terms: int = MAX_TERMS):
    """
    Kummer's confluent hypergeometric function M(a, b, zeta) by its power series.
    """
    a, b = complex(a), complex(b)
    if _is_nonpositive_integer(b):
        raise DomainError("Kummer parameter b is a nonpositive integer", {"b": b})
    zz, scalar = _as_array(zeta)
    if np.any(np.abs(zz) > series_radius):
        raise DomainError(
            "argument outside the Kummer series radius",
            {"max_abs_zeta": float(np.max(np.abs(zz))), "series_radius": series_radius},
        )
    return _finish(_kummer_series(a, b, zz, max_terms=max_terms), scalar)


def _whittaker_m_derivatives(c: complex, zeta: np.ndarray, order: int = 2) -> list[np.ndarray]:
    """
    M_{0,c} = f * K with f = exp(-z/2) z^(1/2+c), K = M(1/2+c, 1+2c, z).
    (fK)' = f (g'K + K'),  (fK)'' = f ((g'^2 + g'')K + 2g'K' + K'').
    """
    q = 0.5 + c
    kum = _kummer_derivatives(q, 1.0 + 2.0 * c, zeta, order)
    f = np.exp(-0.5 * zeta + q * np.log(zeta))
    out = [f * kum[0]]
    if order >= 1:
        g1 = -0.5 + q / zeta
        out.append(f * (g1 * kum[0] + kum[1]))
    if order >= 2:
        g2 = -q / zeta ** 2
        out.append(f * ((g1 * g1 + g2) * kum[0] + 2.0 * g1 * kum[1] + kum[2]))
    return out


def whittaker_m(gamma, sign: int, zeta):
    """
    M_{0,+-gamma}(zeta) = exp(-zeta/2) zeta^(1/2 +- gamma) M(1/2 +- gamma, 1 +- 2 gamma, zeta)
    on the principal branch.
    """
    gamma = _as_gamma(gamma)
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1", {"sign": sign})
    c = sign * gamma
    if _is_nonpositive_integer(1.0 + 2.0 * c):
        raise DegenerateIndexError("1 +- 2*gamma is a nonpositive integer", {"gamma": gamma, "sign": sign})
    zz, scalar = _as_array(zeta)
    check_cut(zz)
    if np.any(np.abs(zz) > SERIES_RADIUS):
        raise DomainError("argument outside the Kummer series radius", {"series_radius": SERIES_RADIUS})
    return _finish(_whittaker_m_derivatives(c, zz, order=0)[0], scalar)


def connection_coefficients(gamma: complex) -> tuple[complex, complex]:
    """(A, B) with W = A M_{0,gamma} + B M_{0,-gamma}."""
    a = complex_gamma(-2.0 * gamma) / complex_gamma(0.5 - gamma)
    b = complex_gamma(2.0 * gamma) / complex_gamma(0.5 + gamma)
    return a, b


# -------------------------------------------------
# W_{0,gamma}: evaluation regimes
# -------------------------------------------------

def _log_series_terms(zeta: np.ndarray, max_terms: int = MAX_TERMS):
    """
    Yield (k, p_k, q_k) with P = sum p_k zeta^2k, Q = sum q_k zeta^2k,
    p_k = psi(k+1) q_k and q_k = 1 / (16^k k!^2).
    """
    q = 1.0
    harmonic = 0.0
    for k in range(max_terms):
        if k > 0:
            q /= 16.0 * k * k
            harmonic += 1.0 / k
        yield k, (harmonic - EULER_GAMMA) * q, q


def _w_log_series(zeta: np.ndarray, order: int, sheet: int = 0) -> list[np.ndarray]:
    """
    W_{0,0}(zeta) = pi^(-1/2) zeta^(1/2) [P(zeta) - (log zeta - log 4) Q(zeta)].
    sheet = +-1 evaluates the continuation zeta = z e^(+-i pi) from z in the right
    half plane (log z -> log z + i pi sheet, zeta^(1/2) -> i sheet z^(1/2)).
    """
    log_z = np.log(zeta)
    if sheet:
        log_z = log_z + 1j * math.pi * sheet
    lterm = log_z - LOG4
    sums = [np.zeros_like(zeta) for _ in range(order + 1)]
    radius = float(np.max(np.abs(zeta)))
    zeta2 = zeta * zeta
    power = np.ones_like(zeta)
    for k, pk, qk in _log_series_terms(zeta):
        e = 2 * k + 0.5
        base = pk - qk * lterm
        contrib = [power * base]
        if order >= 1:
            contrib.append(power * (pk * e - qk * (e * lterm + 1.0)) / zeta)
        if order >= 2:
            contrib.append(
                power * (pk * e * (e - 1.0) - qk * (e * (e - 1.0) * lterm + 2.0 * e - 1.0)) / zeta2
            )
        for j in range(order + 1):
            sums[j] = sums[j] + contrib[j]
        if 2 * k > radius and np.all(np.abs(contrib[0]) <= SERIES_TOL * np.abs(sums[0])):
            break
        power = power * zeta2
    else:
        raise NonConvergenceError("logarithmic W series did not converge", {"radius": radius})

    root = np.exp(0.5 * np.log(zeta)) / math.sqrt(math.pi)
    if sheet:
        root = root * (1j * sheet)
    # sheet continuation flips the sign of d/dzeta: zeta = -z
    flip = -1.0 if sheet else 1.0
    return [root * sums[j] * flip ** j for j in range(order + 1)]


def _w_connection(gamma: complex, zeta: np.ndarray, order: int) -> list[np.ndarray]:
    a, b = connection_coefficients(gamma)
    plus = _whittaker_m_derivatives(gamma, zeta, order)
    minus = _whittaker_m_derivatives(-gamma, zeta, order)
    return [a * plus[j] + b * minus[j] for j in range(order + 1)]


def _w_continuation(gamma: complex, zeta: np.ndarray, order: int) -> list[np.ndarray]:
    """
    Left sector |arg zeta| > 3pi/4 through M_{0,c}(z e^(+-i pi)) = +-i e^(+-c pi i) M_{0,c}(z),
    z = -zeta. d/dzeta = -d/dz.
    """
    sheet = np.where(zeta.imag > 0, 1.0, -1.0)
    z = -zeta
    if gamma == 0:
        out = [np.empty_like(zeta) for _ in range(order + 1)]
        for s in (1.0, -1.0):
            mask = sheet == s
            if np.any(mask):
                vals = _w_log_series(z[mask], order, sheet=int(s))
                for j in range(order + 1):
                    out[j][mask] = vals[j]
        return out

    a, b = connection_coefficients(gamma)
    plus = _whittaker_m_derivatives(gamma, z, order)
    minus = _whittaker_m_derivatives(-gamma, z, order)
    fa = 1j * sheet * a * np.exp(1j * math.pi * gamma * sheet)
    fb = 1j * sheet * b * np.exp(-1j * math.pi * gamma * sheet)
    return [(-1.0) ** j * (fa * plus[j] + fb * minus[j]) for j in range(order + 1)]


def _laplace_nodes(gamma: complex) -> np.ndarray:
    lower = -39.0 / (gamma.real + 0.5)
    return np.arange(lower, LAPLACE_UPPER + LAPLACE_STEP / 2, LAPLACE_STEP)


def _w_laplace(gamma: complex, zeta: np.ndarray, order: int, block: int = 512) -> list[np.ndarray]:
    """
    W = exp(-zeta/2)/Gamma(1/2+gamma) int_0^inf e^(-u) u^(gamma-1/2) (1+u/zeta)^(gamma-1/2) du,
    trapezoid rule in s = log u; derivatives taken under the integral.
    """
    s = _laplace_nodes(gamma)
    u = np.exp(s)
    p = gamma - 0.5
    base = np.exp(-u + (gamma + 0.5) * s) * LAPLACE_STEP
    norm = complex_gamma(0.5 + gamma)

    out = [np.empty_like(zeta) for _ in range(order + 1)]
    for start in range(0, zeta.size, block):
        zb = zeta[start:start + block][:, None]
        g = 1.0 + u[None, :] / zb
        logg = np.log(g)
        gp = np.exp(p * logg)
        integrals = [np.sum(base * gp, axis=1)]
        if order >= 1:
            gp1 = gp / g
            integrals.append(np.sum(base * p * gp1 * (-u / zb ** 2), axis=1))
        if order >= 2:
            gp2 = gp1 / g
            integrals.append(
                np.sum(base * (p * (p - 1.0) * gp2 * u ** 2 / zb ** 4 + p * gp1 * 2.0 * u / zb ** 3), axis=1)
            )
        pref = np.exp(-0.5 * zeta[start:start + block]) / norm
        i0 = integrals[0]
        out[0][start:start + block] = pref * i0
        if order >= 1:
            out[1][start:start + block] = pref * (-0.5 * i0 + integrals[1])
        if order >= 2:
            out[2][start:start + block] = pref * (0.25 * i0 - integrals[1] + integrals[2])
    return out


def asymptotic_coefficients(gamma: complex, n_terms: int = ASYMPTOTIC_MAX_TERMS) -> np.ndarray:
    """a_k = (-1)^k (1/2+gamma)_k (1/2-gamma)_k / k!."""
    coefs = np.empty(n_terms, dtype=complex)
    coefs[0] = 1.0
    for k in range(n_terms - 1):
        coefs[k + 1] = -coefs[k] * (0.5 + gamma + k) * (0.5 - gamma + k) / (k + 1)
    return coefs


def _w_asymptotic(gamma: complex, zeta: np.ndarray, order: int) -> list[np.ndarray]:
    """
    W ~ exp(-zeta/2) S, S = sum a_k zeta^-k, summed until the term drops below
    1e-17 |S| or starts to grow (the first omitted term bounds the tail).
    """
    coefs = asymptotic_coefficients(gamma)
    inv = 1.0 / zeta
    sums = [np.zeros_like(zeta) for _ in range(3)]
    active = np.ones(zeta.shape, dtype=bool)
    previous = np.full(zeta.shape, np.inf)
    power = np.ones_like(zeta)
    for k, a in enumerate(coefs):
        term = a * power
        size = np.abs(term)
        active &= size <= previous
        sums[0] = sums[0] + np.where(active, term, 0)
        sums[1] = sums[1] + np.where(active, -k * term * inv, 0)
        sums[2] = sums[2] + np.where(active, k * (k + 1) * term * inv * inv, 0)
        active &= size > 1e-17 * np.abs(sums[0])
        previous = size
        if not np.any(active):
            break
        power = power * inv

    e = np.exp(-0.5 * zeta)
    s0, s1, s2 = sums
    out = [e * s0]
    if order >= 1:
        out.append(e * (-0.5 * s0 + s1))
    if order >= 2:
        out.append(e * (0.25 * s0 - s1 + s2))
    return out


def regime_of(gamma, zeta):
    """Name of the evaluation regime used for each argument."""
    zz, scalar = _as_array(zeta)
    r = np.abs(zz)
    names = np.where(
        r <= SMALL_RADIUS,
        "series",
        np.where(
            r > ASYMPTOTIC_RADIUS,
            "asymptotic",
            np.where(np.abs(np.angle(zz)) > LEFT_SECTOR, "continuation", "integral"),
        ),
    )
    return str(names[0]) if scalar else names


def whittaker_derivatives(gamma, zeta, order: int = 2):
    """
    (W, W', W'') of W_{0,gamma} up to `order`, vectorized over zeta.
    """
    gamma = check_index(gamma)
    zz, scalar = _as_array(zeta)
    check_cut(zz)

    r = np.abs(zz)
    small = r <= SMALL_RADIUS
    large = r > ASYMPTOTIC_RADIUS
    middle = ~small & ~large
    left = middle & (np.abs(np.angle(zz)) > LEFT_SECTOR)
    right = middle & ~left

    out = [np.empty_like(zz) for _ in range(order + 1)]
    series = (lambda g, z, o: _w_log_series(z, o)) if gamma == 0 else _w_connection
    for mask, func in ((small, series), (right, _w_laplace), (left, _w_continuation), (large, _w_asymptotic)):
        if np.any(mask):
            vals = func(gamma, zz[mask], order)
            for j in range(order + 1):
                out[j][mask] = vals[j]
    if scalar:
        return tuple(complex(v[0]) for v in out)
    return tuple(out)


def whittaker_w(gamma, zeta):
    """W_{0,gamma}(zeta), decaying like exp(-zeta/2) at infinity."""
    return whittaker_derivatives(gamma, zeta, order=0)[0]


def whittaker_w_prime(gamma, zeta):
    return whittaker_derivatives(gamma, zeta, order=1)[1]


def whittaker_w_second(gamma, zeta):
    """W'' from the differentiated representations, never from the ODE."""
    return whittaker_derivatives(gamma, zeta, order=2)[2]


def scaled_w(gamma, m: int, x, order: int = 0):
    """W(x) = W_{0,gamma}(2 m x) and its x-derivatives."""
    vals = whittaker_derivatives(gamma, 2.0 * m * np.asarray(x, dtype=complex), order)
    return tuple(v * (2.0 * m) ** j for j, v in enumerate(vals))


# -------------------------------------------------
# Modified Bessel function K_0
# -------------------------------------------------

def _k0_series(x: np.ndarray) -> np.ndarray:
    lterm = np.log(x) - math.log(2.0)
    y = x * x / 4.0
    total = np.zeros_like(x)
    power = np.ones_like(x)
    q = 1.0
    harmonic = 0.0
    for k in range(MAX_TERMS):
        if k > 0:
            q /= k * k
            harmonic += 1.0 / k
        term = power * q * ((harmonic - EULER_GAMMA) - lterm)
        total = total + term
        if k > 2 and np.all(np.abs(term) <= SERIES_TOL * np.abs(total)):
            return total
        power = power * y
    raise NonConvergenceError("K0 series did not converge")


def _k0_trapezoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        strip = 0.5 * math.pi - abs(cmath.phase(xi))
        h = min(0.1, strip / 6.0)
        upper = math.acosh(45.0 / xi.real + 1.0)
        s = np.arange(0.0, upper + h, h)
        f = np.exp(-xi * np.cosh(s))
        out[i] = h * (np.sum(f) - 0.5 * f[0])
    return out


def _k0_asymptotic(x: np.ndarray) -> np.ndarray:
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (-(2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) * total


def bessel_k0(zeta):
    """
    K_0(zeta) for Re zeta > 0: ascending series (|zeta| <= 2), trapezoid rule on
    int_0^inf exp(-zeta cosh s) ds (2 < |zeta| <= 25), asymptotic series beyond.
    """
    zz, scalar = _as_array(zeta)
    if np.any(zz.real <= 0):
        raise DomainError("bessel_k0 needs Re zeta > 0", {"zeta": complex(zz[zz.real <= 0][0])})
    r = np.abs(zz)
    out = np.empty_like(zz)
    small = r <= K0_SERIES_RADIUS
    large = r > K0_ASYMPTOTIC_RADIUS
    middle = ~small & ~large
    for mask, func in ((small, _k0_series), (middle, _k0_trapezoid), (large, _k0_asymptotic)):
        if np.any(mask):
            out[mask] = func(zz[mask])
    return _finish(out, scalar)


# -------------------------------------------------
# Analytic continuation across the cut
# -------------------------------------------------

def _continued_w(gamma: complex, z: np.ndarray, sheet: int) -> np.ndarray:
    """W_{0,gamma}(z e^(i pi sheet)) for Re z > 0 through the M decomposition."""
    if gamma == 0:
        return _w_log_series(z, 0, sheet=sheet)[0]
    a, b = connection_coefficients(gamma)
    plus = _whittaker_m_derivatives(gamma, z, 0)[0]
    minus = _whittaker_m_derivatives(-gamma, z, 0)[0]
    return 1j * sheet * (
        a * cmath.exp(1j * math.pi * gamma * sheet) * plus
        + b * cmath.exp(-1j * math.pi * gamma * sheet) * minus
    )


def continuation_jump(gamma, eta, epsilon: float, m: int):
    """
    W(-eta + i eps) - W(-eta - i eps) with W(x) = W_{0,gamma}(2 m x), built from
    the continuation identity of M_{0,+-gamma}. Tends to 2i cos(gamma pi) W(eta).
    """
    gamma = check_index(gamma)
    ee, scalar = _as_array(eta)
    if np.any(ee.imag != 0) or np.any(ee.real <= 0):
        raise DomainError("continuation_jump needs eta > 0", {"eta": eta})
    if not 0 < epsilon < 1:
        raise DomainError("continuation_jump needs 0 < epsilon < 1", {"epsilon": epsilon})
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError("wavenumber m must be an integer >= 1", {"m": m})

    x = ee.real
    z_up = 2.0 * m * (x - 1j * epsilon)
    z_dn = 2.0 * m * (x + 1j * epsilon)
    if np.any(np.abs(z_up) > SERIES_RADIUS):
        raise DomainError("2 m |eta| exceeds the Kummer series radius", {"eta": eta, "m": m})
    jump = _continued_w(gamma, z_up, 1) - _continued_w(gamma, z_dn, -1)
    return _finish(jump, scalar)


# -------------------------------------------------
# Small-argument structure
# -------------------------------------------------

class WhittakerIndex(BaseModel):
    """Second index gamma of W_{0,gamma} with its degeneracy flag."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gamma: complex
    is_degenerate: bool

    @model_validator(mode="after")
    def _check_flag(self):
        if self.is_degenerate != (abs(self.gamma) < DEGENERACY_THRESHOLD):
            raise DomainError("is_degenerate inconsistent with |gamma|", {"gamma": self.gamma})
        return self

    @classmethod
    def of(cls, gamma) -> "WhittakerIndex":
        gamma = _as_gamma(gamma)
        return cls(gamma=gamma, is_degenerate=abs(gamma) < DEGENERACY_THRESHOLD)


class SmallArgExpansion(BaseModel):
    """
    Leading small-zeta behaviour W ~ zeta^exponent (times log zeta when has_log).
    envelope_bound is the sup of the analytic factor on the unit half-disk.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    exponent: complex
    has_log: bool
    envelope_bound: float

    @property
    def envelope_exponent(self) -> float:
        return float(self.exponent.real)


def small_arg_expansion(gamma) -> SmallArgExpansion:
    index = WhittakerIndex.of(gamma)
    g = 0j if index.is_degenerate else index.gamma
    exponent = complex(0.5 - g)

    r = np.logspace(-6, 0, 25)
    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 9)
    zeta = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    w = whittaker_w(g, zeta)
    envelope = np.abs(zeta ** exponent)
    if index.is_degenerate:
        envelope = envelope * (1.0 + np.abs(np.log(zeta)))
    bound = float(np.max(np.abs(w) / envelope))
    return SmallArgExpansion(exponent=exponent, has_log=index.is_degenerate, envelope_bound=bound)


def whittaker_components(gamma, m: int, eta, weight: str) -> list[tuple[complex, int, np.ndarray]]:
    """
    Split w(eta) in {W, W/eta, W'} (W(eta) = W_{0,gamma}(2 m eta)) into terms
    eta^p (log eta)^l g(eta) with g analytic at eta = 0.
    Returns a list of (p, l, g values). Intended for 2 m eta <= 2.
    """
    gamma = check_index(gamma)
    x, _ = _as_array(eta)
    zeta = 2.0 * m * x
    scale = 2.0 * m

    if gamma != 0:
        comps = []
        a, b = connection_coefficients(gamma)
        for c, coef in ((gamma, a), (-gamma, b)):
            q = 0.5 + c
            kum = _kummer_derivatives(q, 1.0 + 2.0 * c, zeta, 1)
            e = np.exp(-0.5 * zeta)
            f0 = e * kum[0]
            lead = coef * scale ** q
            if weight == "W":
                comps.append((complex(q), 0, lead * f0))
            elif weight == "W_over_eta":
                comps.append((complex(q - 1.0), 0, lead * f0))
            elif weight == "W_prime":
                f1 = e * (-0.5 * kum[0] + kum[1])
                comps.append((complex(q - 1.0), 0, lead * (q * f0 + zeta * f1)))
            else:
                raise DomainError(f"unknown weight: {weight}")
        return comps

    # gamma = 0: W = c0 eta^(1/2) [(P - ell Q) - log(eta) Q]
    c0 = math.sqrt(scale / math.pi)
    ell = math.log(scale) - LOG4
    zeta2 = zeta * zeta
    p_sum = np.zeros_like(zeta)
    q_sum = np.zeros_like(zeta)
    zp_sum = np.zeros_like(zeta)
    zq_sum = np.zeros_like(zeta)
    power = np.ones_like(zeta)
    for k, pk, qk in _log_series_terms(zeta):
        p_sum = p_sum + pk * power
        q_sum = q_sum + qk * power
        zp_sum = zp_sum + 2 * k * pk * power
        zq_sum = zq_sum + 2 * k * qk * power
        if k > 1 and np.all(np.abs(qk * power) <= SERIES_TOL * np.abs(q_sum)):
            break
        power = power * zeta2
    g0 = c0 * (p_sum - ell * q_sum)
    g1 = -c0 * q_sum
    if weight == "W":
        return [(0.5 + 0j, 0, g0), (0.5 + 0j, 1, g1)]
    if weight == "W_over_eta":
        return [(-0.5 + 0j, 0, g0), (-0.5 + 0j, 1, g1)]
    if weight == "W_prime":
        # eta g' = zeta dg/dzeta
        eg0 = c0 * (zp_sum - ell * zq_sum)
        eg1 = -c0 * zq_sum
        return [(-0.5 + 0j, 0, 0.5 * g0 + eg0 + g1), (-0.5 + 0j, 1, 0.5 * g1 + eg1)]
    raise DomainError(f"unknown weight: {weight}")
