"""Special functions and correlated normal sampling.

Everything here is vectorized over numpy arrays and free of shared state:
random streams are explicit ``numpy.random.Generator`` values owned by the
caller.
"""

import math

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from asianpath.errors import DegenerateCorrelationError, ParameterError

_SQRT2 = math.sqrt(2.0)
_TWO_PI = 2.0 * math.pi

# Gauss-Legendre half-rules on [-1, 1] (positive abscissae), by correlation regime.
_GL6 = (
    np.array([0.9324695142031522, 0.6612093864662647, 0.2386191860831970]),
    np.array([0.1713244923791705, 0.3607615730481384, 0.4679139345726904]),
)
_GL12 = (
    np.array([0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
              0.5873179542866171, 0.3678314989981802, 0.1252334085114692]),
    np.array([0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
              0.2031674267230659, 0.2334925365383547, 0.2491470458134029]),
)
_GL20 = (
    np.array([0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
              0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
              0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
              0.07652652113349733]),
    np.array([0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
              0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
              0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
              0.1527533871307259]),
)


def _scalar_or_array(values: np.ndarray):
    return values.item() if values.ndim == 0 else values


def erf(x: ArrayLike):
    return _scalar_or_array(special.erf(np.asarray(x, dtype=float)))


def std_normal_cdf(x: ArrayLike):
    """Phi(x) = (1 + erf(x / sqrt 2)) / 2, evaluated through erfc for tail accuracy."""
    return _scalar_or_array(0.5 * special.erfc(-np.asarray(x, dtype=float) / _SQRT2))


def log_std_normal_cdf(x: ArrayLike):
    return _scalar_or_array(special.log_ndtr(np.asarray(x, dtype=float)))


def require_open_correlation(rho: float) -> float:
    if not -1.0 < rho < 1.0:
        raise DegenerateCorrelationError(rho)
    return rho


def _gauss_legendre_on_0_2(rho: float):
    """Nodes and weights of the rule on [0, 2] picked by |rho|."""
    if abs(rho) < 0.3:
        x, w = _GL6
    elif abs(rho) < 0.75:
        x, w = _GL12
    else:
        x, w = _GL20
    return np.concatenate([1.0 - x, 1.0 + x]), np.concatenate([w, w])


def _bvnu(h: np.ndarray, k: np.ndarray, r: float) -> np.ndarray:
    """P(X > h, Y > k) for finite h, k (Drezner-Wesolowsky with Genz's refinements)."""
    phi = std_normal_cdf
    hk = h * k
    x, w = _gauss_legendre_on_0_2(r)

    if abs(r) < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = 0.5 * math.asin(r)
        sn = np.sin(asr * x)
        terms = np.exp((sn * hk[..., None] - hs[..., None]) / (1.0 - sn * sn))
        return terms @ w * asr / _TWO_PI + np.asarray(phi(-h)) * np.asarray(phi(-k))

    if r < 0:
        k = -k
        hk = -hk
    bvn = np.zeros_like(h)
    if abs(r) < 1:
        a_s = 1.0 - r * r
        a = math.sqrt(a_s)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 80.0
        asr = -0.5 * (bs / a_s + hk)
        bvn = np.where(
            asr > -100,
            a * np.exp(asr) * (1.0 - c * (bs - a_s) * (1.0 - d * bs) / 3.0 + c * d * a_s * a_s),
            0.0,
        )
        b = np.sqrt(bs)
        sp = math.sqrt(_TWO_PI) * np.asarray(phi(-b / a))
        bvn = bvn - np.where(
            hk > -100,
            np.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0),
            0.0,
        )
        a = 0.5 * a
        xs = (a * x) ** 2  # shape (n,)
        asr = -0.5 * (bs[..., None] / xs + hk[..., None])
        sp = 1.0 + c[..., None] * xs * (1.0 + 5.0 * d[..., None] * xs)
        rs = np.sqrt(1.0 - xs)
        ep = np.exp(-0.5 * hk[..., None] * xs / (1.0 + rs) ** 2) / rs
        terms = np.where(asr > -100, np.exp(np.maximum(asr, -100.0)) * (sp - ep), 0.0)
        bvn = (a * (terms @ w) - bvn) / _TWO_PI

    if r > 0:
        return bvn + np.asarray(phi(-np.maximum(h, k)))
    tail = np.where(h < 0, np.asarray(phi(k)) - np.asarray(phi(h)),
                    np.asarray(phi(-h)) - np.asarray(phi(-k)))
    return np.where(h >= k, -bvn, tail - bvn)


def bivariate_normal_cdf(a: ArrayLike, b: ArrayLike, chi: float):
    """N[a, b; chi] = P(X <= a, Y <= b) for standard normals with correlation chi.

    a and b broadcast against each other; chi is a scalar in [-1, 1]. The
    limits chi = +-1 are evaluated in closed form.
    """
    if not -1.0 <= chi <= 1.0:
        raise ParameterError(f"correlation chi={chi} outside [-1, 1]")
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    phi_a = np.asarray(std_normal_cdf(a))
    phi_b = np.asarray(std_normal_cdf(b))

    if chi == 1.0:
        result = np.asarray(std_normal_cdf(np.minimum(a, b)))
    elif chi == -1.0:
        result = np.maximum(0.0, phi_a + phi_b - 1.0)
    elif chi == 0.0:
        result = phi_a * phi_b
    else:
        finite = np.isfinite(a) & np.isfinite(b)
        h = np.where(finite, -a, 0.0)
        k = np.where(finite, -b, 0.0)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            result = np.where(finite, _bvnu(h, k, chi), 0.0)
        # Infinite limits collapse onto the marginals.
        result = np.where(np.isposinf(a), phi_b, result)
        result = np.where(np.isposinf(b), phi_a, result)
        result = np.where(np.isneginf(a) | np.isneginf(b), 0.0, result)

    return _scalar_or_array(np.clip(result, 0.0, 1.0))


def make_stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for lane ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_correlated_pair(rng: np.random.Generator, rho: float, size=None, antithetic: bool = False):
    """Draw (z1, z2) with z2 = rho z1 + sqrt(1 - rho^2) z_perp.

    With ``antithetic`` the second half of the sample mirrors the first
    (both z1 and z_perp flipped); ``size`` must then be an integer.
    """
    if not -1.0 <= rho <= 1.0:
        raise ParameterError(f"correlation rho={rho} outside [-1, 1]")
    if antithetic:
        half = -(-int(size) // 2)
        z1 = rng.standard_normal(half)
        zp = rng.standard_normal(half)
        z1 = np.concatenate([z1, -z1])[:size]
        zp = np.concatenate([zp, -zp])[:size]
    else:
        z1 = rng.standard_normal(size)
        zp = rng.standard_normal(size)
    z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * zp
    return z1, z2
