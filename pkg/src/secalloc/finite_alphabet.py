"""Mutual information and MMSE of equiprobable M-ary constellations over
complex AWGN, the per-subchannel power that maximizes the scalar secrecy
rate, and the curve families used to study it.

The MI integral is evaluated with a 2-D tensor Gauss-Hermite rule after
the change of variables z = sqrt(rho) a_i + n, so the Gaussian weight is
exactly the noise density and the integrand reduces to a log-sum-exp over
the constellation; the same exponent table drives the conditional-mean
estimator for the MMSE.  All exponent sums are max-stabilized, so values
stay finite at arbitrarily large rho.
"""

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_hermite

from .errors import InputError, NumericalError
from .gsvd import SubchannelSet
from .model import LOG2E, make_rng

#: Default Gauss-Hermite nodes per real axis.  Chosen so that doubling the
#: order changes I(rho) by no more than 1e-8 for every builtin constellation
#: over rho in [0.1, 50].
DEFAULT_NODES = 192

_LN2 = float(np.log(2.0))


@dataclass
class Constellation:
    """Unit-energy M-ary alphabet with equiprobable symbols."""

    name: str
    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.complex128).ravel()
        m = self.points.shape[0]
        if m < 2:
            raise InputError(f"constellation needs at least 2 points, got {m}")
        if not np.all(np.isfinite(self.points.view(np.float64))):
            raise InputError("constellation contains non-finite points")
        energy = float(np.mean(np.abs(self.points) ** 2))
        if abs(energy - 1.0) > 1e-12:
            raise InputError(
                f"constellation must have unit average energy, got {energy:.15g}"
            )
        d = np.abs(self.points[:, None] - self.points[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min() <= 1e-12:
            raise InputError("constellation points must be distinct")

    @property
    def m(self) -> int:
        return self.points.shape[0]


def _bpsk():
    return np.array([1.0, -1.0], dtype=np.complex128)


def _qpsk():
    return np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=np.complex128) / np.sqrt(2.0)


def _psk8():
    return np.exp(2j * np.pi * np.arange(8) / 8.0)


def _qam16():
    pts = np.array([x + 1j * y for x in (-3, -1, 1, 3) for y in (-3, -1, 1, 3)])
    return pts / np.sqrt(10.0)


_BUILTINS = {"bpsk": _bpsk, "qpsk": _qpsk, "8psk": _psk8, "16qam": _qam16}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin_constellation(name: str) -> Constellation:
    key = str(name).lower()
    if key not in _BUILTINS:
        raise InputError(f"unknown constellation {name!r}; builtins: {BUILTIN_NAMES}")
    return Constellation(name=key, points=_BUILTINS[key]())


@dataclass
class ScalarWiretap:
    """One scalar wiretap channel: squared destination gain h2 = |h|^2 and
    squared eavesdropper gain z2 = |z|^2, both over unit noise."""

    h2: float
    z2: float

    def __post_init__(self):
        self.h2 = float(self.h2)
        self.z2 = float(self.z2)
        if not np.isfinite(self.h2) or self.h2 < 0:
            raise InputError(f"h2 must be nonnegative, got {self.h2}")
        if not np.isfinite(self.z2) or self.z2 < 0:
            raise InputError(f"z2 must be nonnegative, got {self.z2}")


@dataclass
class QuadratureSpec:
    """How to evaluate the MI/MMSE integrals: the Gauss-Hermite tensor rule
    with `nodes` points per axis, or a seeded Monte-Carlo fallback."""

    scheme: str = "gauss-hermite"
    nodes: int = DEFAULT_NODES
    mc_samples: int = 100000
    seed: int = 12345

    def __post_init__(self):
        if self.scheme not in ("gauss-hermite", "monte-carlo"):
            raise InputError(f"unknown quadrature scheme {self.scheme!r}")
        self.nodes = int(self.nodes)
        if self.nodes < 16:
            raise InputError(f"quadrature nodes must be >= 16, got {self.nodes}")
        self.mc_samples = int(self.mc_samples)
        if self.mc_samples < 1000:
            raise InputError(f"mc_samples must be >= 1000, got {self.mc_samples}")


DEFAULT_QUAD = QuadratureSpec()


@functools.lru_cache(maxsize=8)
def _gh_grid(nodes: int):
    """Cached complex 2-D Gauss-Hermite grid and weights for E over CN(0,1).
    Returned arrays are read-only and shared across threads."""
    t, w = roots_hermite(nodes)
    n = (t[:, None] + 1j * t[None, :]).ravel()
    wt = (np.outer(w, w) / np.pi).ravel()
    n.flags.writeable = False
    wt.flags.writeable = False
    return n, wt


def _validate_rho(rho):
    arr = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    if arr.ndim != 1:
        raise InputError("rho must be a scalar or 1-D array")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise InputError("rho must be finite and nonnegative")
    return arr, np.isscalar(rho) or np.ndim(rho) == 0


def _exponents(points, rho_chunk, n):
    """Pairwise exponents -|sqrt(rho)(a_i - a_m) + n|^2 + |n|^2, which is
    all the integrands need; shape (R, M, M, G)."""
    d0 = points[:, None] - points[None, :]
    d0sq = np.abs(d0) ** 2
    re_dn = np.real(np.conj(d0)[:, :, None] * n[None, None, :])
    srho = np.sqrt(rho_chunk)
    return (
        -(rho_chunk[:, None, None, None] * d0sq[None, :, :, None])
        - 2.0 * srho[:, None, None, None] * re_dn[None, :, :, :]
    )


def _chunks(total, size):
    for start in range(0, total, size):
        yield start, min(start + size, total)


def _mi_gauss_hermite(points, rho, nodes):
    n, wt = _gh_grid(nodes)
    m = points.shape[0]
    out = np.empty(rho.shape[0])
    chunk = max(1, int(3e7) // (m * m * n.shape[0]))
    for lo, hi in _chunks(rho.shape[0], chunk):
        E = _exponents(points, rho[lo:hi], n)
        mx = E.max(axis=2, keepdims=True)
        lse = mx[:, :, 0, :] + np.log(np.sum(np.exp(E - mx), axis=2))
        out[lo:hi] = np.log2(m) - (lse / _LN2 * wt).sum(axis=(1, 2)) / m
    return out


def _mmse_gauss_hermite(points, rho, nodes):
    n, wt = _gh_grid(nodes)
    m = points.shape[0]
    out = np.empty(rho.shape[0])
    chunk = max(1, int(3e7) // (m * m * n.shape[0]))
    for lo, hi in _chunks(rho.shape[0], chunk):
        E = _exponents(points, rho[lo:hi], n)
        E -= E.max(axis=2, keepdims=True)
        p = np.exp(E)
        p /= p.sum(axis=2, keepdims=True)
        xhat = np.einsum("m,rimg->rig", points, p)
        err = np.abs(points[None, :, None] - xhat) ** 2
        out[lo:hi] = (err * wt).sum(axis=(1, 2)) / m
    return out


def mutual_information(c: Constellation, rho, quad: QuadratureSpec = DEFAULT_QUAD):
    """I(rho) in bits for y = sqrt(rho) x + n, x equiprobable on the
    constellation, n ~ CN(0, 1).  Accepts a scalar or 1-D array of SNRs;
    values lie in [0, log2 M]."""
    arr, scalar = _validate_rho(rho)
    if quad.scheme == "monte-carlo":
        out = np.array([mutual_information_mc(c, r, quad.mc_samples, quad.seed) for r in arr])
    else:
        out = _mi_gauss_hermite(c.points, arr, quad.nodes)
    out = np.clip(out, 0.0, np.log2(c.m))
    return float(out[0]) if scalar else out


def mmse(c: Constellation, rho, quad: QuadratureSpec = DEFAULT_QUAD):
    """Minimum mean-square error of estimating x from y = sqrt(rho) x + n.

    The conditional mean uses the Gaussian posterior over the constellation;
    values lie in [0, 1] for a unit-energy alphabet."""
    arr, scalar = _validate_rho(rho)
    if quad.scheme == "monte-carlo":
        out = np.array([mmse_mc(c, r, quad.mc_samples, quad.seed) for r in arr])
    else:
        out = _mmse_gauss_hermite(c.points, arr, quad.nodes)
    out = np.clip(out, 0.0, None)
    return float(out[0]) if scalar else out


def mutual_information_mc(c: Constellation, rho: float, n_samples: int, seed: int) -> float:
    """Monte-Carlo estimate of I(rho): sample the transmitted symbol and the
    noise, average the log-likelihood ratio.  Deterministic for fixed seed."""
    rho = float(rho)
    if rho < 0:
        raise InputError("rho must be nonnegative")
    rng = make_rng(seed)
    pts = c.points
    m = c.m
    d0 = pts[:, None] - pts[None, :]
    total = 0.0
    done = 0
    while done < n_samples:
        cnt = min(1 << 18, n_samples - done)
        idx = rng.integers(m, size=cnt)
        noise = (rng.standard_normal(cnt) + 1j * rng.standard_normal(cnt)) / np.sqrt(2.0)
        d = np.sqrt(rho) * d0[idx, :]
        E = -np.abs(d) ** 2 - 2.0 * np.sqrt(rho) * np.real(np.conj(d) * noise[:, None])
        mx = E.max(axis=1)
        lse = mx + np.log(np.sum(np.exp(E - mx[:, None]), axis=1))
        total += float(np.sum(np.log2(m) - lse / _LN2))
        done += cnt
    return total / n_samples


def mmse_mc(c: Constellation, rho: float, n_samples: int, seed: int) -> float:
    """Monte-Carlo estimate of the MMSE at SNR rho, fixed seed."""
    rho = float(rho)
    if rho < 0:
        raise InputError("rho must be nonnegative")
    rng = make_rng(seed)
    pts = c.points
    m = c.m
    d0 = pts[:, None] - pts[None, :]
    total = 0.0
    done = 0
    while done < n_samples:
        cnt = min(1 << 18, n_samples - done)
        idx = rng.integers(m, size=cnt)
        noise = (rng.standard_normal(cnt) + 1j * rng.standard_normal(cnt)) / np.sqrt(2.0)
        d = np.sqrt(rho) * d0[idx, :]
        E = -np.abs(d + noise[:, None]) ** 2
        E -= E.max(axis=1, keepdims=True)
        p = np.exp(E)
        p /= p.sum(axis=1, keepdims=True)
        xhat = p @ pts
        total += float(np.sum(np.abs(pts[idx] - xhat) ** 2))
        done += cnt
    return total / n_samples


def i_mmse_residual(c: Constellation, rho: float, drho: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """|central-difference dI/drho - MMSE(rho) log2 e|, both sides computed
    independently.  Small residual is the standard consistency check between
    the two integrals."""
    rho = float(rho)
    drho = float(drho)
    if rho <= 0:
        raise InputError("rho must be positive")
    if not 0 < drho <= rho / 10.0:
        raise InputError("drho must lie in (0, rho/10]")
    vals = mutual_information(c, np.array([rho + drho, rho - drho]), quad)
    deriv = (vals[0] - vals[1]) / (2.0 * drho)
    return float(abs(deriv - mmse(c, rho, quad) * LOG2E))


def secrecy_rate_finite(c: Constellation, s: ScalarWiretap, P: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """I(h2 P) - I(z2 P) in bits for transmit power P."""
    P = float(P)
    if P < 0:
        raise InputError("P must be nonnegative")
    vals = mutual_information(c, np.array([s.h2 * P, s.z2 * P]), quad)
    return float(vals[0] - vals[1])


def secrecy_rate_derivative(c: Constellation, s: ScalarWiretap, P, quad: QuadratureSpec = DEFAULT_QUAD):
    """d/dP of the scalar secrecy rate:
    (h2 MMSE(h2 P) - z2 MMSE(z2 P)) log2 e."""
    arr, scalar = _validate_rho(P)
    vals = mmse(c, np.concatenate([s.h2 * arr, s.z2 * arr]), quad)
    out = (s.h2 * vals[: arr.shape[0]] - s.z2 * vals[arr.shape[0] :]) * LOG2E
    return float(out[0]) if scalar else out


def gaussian_mmse(rho):
    """MMSE of a Gaussian input: 1 / (1 + rho)."""
    return 1.0 / (1.0 + np.asarray(rho, dtype=float))


def exponential_mmse(rho):
    """Idealized exponentially decaying MMSE model: exp(-rho)."""
    return np.exp(-np.asarray(rho, dtype=float))


def find_popt_from_mmse(mmse_fn, h2: float, z2: float, delta: float = 1e-6, p_cap: float = 1e9) -> float:
    """Power at which h2 MMSE(h2 P) - z2 MMSE(z2 P) changes sign, found by
    geometric bracket expansion followed by bisection to width delta.

    Returns +inf when the derivative never turns negative below p_cap,
    which is the Gaussian-MMSE behavior (no finite maximizer).
    """
    h2 = float(h2)
    z2 = float(z2)
    if not (np.isfinite(h2) and np.isfinite(z2)) or not h2 > z2 or not z2 > 0:
        raise InputError(f"need h2 > z2 > 0, got h2={h2}, z2={z2}")
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")

    def deriv(P):
        return h2 * float(mmse_fn(h2 * P)) - z2 * float(mmse_fn(z2 * P))

    p_ul = 1.0
    while deriv(p_ul) >= 0.0:
        p_ul *= 2.0
        if p_ul > p_cap:
            return np.inf
    p_ll = 0.0 if p_ul == 1.0 else p_ul / 2.0
    while p_ul - p_ll > delta:
        mid = 0.5 * (p_ll + p_ul)
        if deriv(mid) >= 0.0:
            p_ll = mid
        else:
            p_ul = mid
    return 0.5 * (p_ll + p_ul)


def find_popt(c: Constellation, s: ScalarWiretap, quad: QuadratureSpec = DEFAULT_QUAD,
              delta: float = 1e-6, p_cap: float = 1e9) -> float:
    """Unique power maximizing the scalar secrecy rate for this constellation
    (the finite-alphabet secrecy rate is unimodal in P)."""
    return find_popt_from_mmse(lambda r: mmse(c, r, quad), s.h2, s.z2, delta, p_cap)


def mmse_inverse(mmse_fn, alpha: float, tol: float = 1e-10, rho_cap: float = 1e9) -> float:
    """Inverse of a strictly decreasing MMSE function by bisection:
    the rho with mmse(rho) = alpha, matched to tolerance tol in alpha."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise InputError(f"alpha must lie in (0, 1], got {alpha}")
    if float(mmse_fn(0.0)) <= alpha:
        return 0.0
    hi = 1.0
    while float(mmse_fn(hi)) > alpha:
        hi *= 2.0
        if hi > rho_cap:
            raise NumericalError(
                f"mmse does not reach alpha={alpha:.3e} below rho={rho_cap:.3e}"
            )
    lo = 0.0 if hi == 1.0 else hi / 2.0
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = float(mmse_fn(mid))
        if abs(val - alpha) <= tol:
            return mid
        if val > alpha:
            lo = mid
        else:
            hi = mid
    return mid


def beta_alpha_curve(model, s: ScalarWiretap, alpha_grid, quad: QuadratureSpec = DEFAULT_QUAD,
                     tol: float = 1e-10) -> list:
    """The eavesdropper-branch MMSE as a function of the destination-branch
    MMSE: beta(alpha) = MMSE((z2/h2) MMSE^-1(alpha)).

    model is "gaussian" or "exponential" (closed forms) or a Constellation
    (numeric inversion).  Returns a list of (alpha, beta) pairs.
    """
    grid = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    if np.any(grid <= 0.0) or np.any(grid > 1.0):
        raise InputError("alpha grid must lie in (0, 1]")
    if s.h2 <= 0:
        raise InputError("h2 must be positive for the beta-alpha map")
    ratio = s.z2 / s.h2

    if isinstance(model, str):
        key = model.lower()
        if key == "gaussian":
            beta = 1.0 / (1.0 + ratio * (1.0 / grid - 1.0))
        elif key == "exponential":
            beta = grid ** ratio
        else:
            raise InputError(f"unknown MMSE model {model!r}")
        return list(zip(grid.tolist(), beta.tolist()))

    if not isinstance(model, Constellation):
        raise InputError("model must be 'gaussian', 'exponential', or a Constellation")
    fn = lambda r: mmse(model, r, quad)
    out = []
    for alpha in grid:
        rho = mmse_inverse(fn, float(alpha), tol=tol)
        out.append((float(alpha), float(fn(ratio * rho))))
    return out


def subchannel_caps(s_set: SubchannelSet, c: Constellation, quad: QuadratureSpec = DEFAULT_QUAD,
                    delta: float = 1e-6) -> np.ndarray:
    """Per-subchannel power cap: the secrecy-rate-maximizing power of the
    scalar wiretap channel with gains (a_i, b_i).  Subchannels with b_i = 0
    get +inf (their secrecy rate never decreases with power)."""
    caps = np.empty(s_set.l)
    for i in range(s_set.l):
        if s_set.b[i] == 0.0:
            caps[i] = np.inf
        else:
            caps[i] = find_popt(c, ScalarWiretap(s_set.a[i], s_set.b[i]), quad, delta)
    return caps


def sum_secrecy_finite(s_set: SubchannelSet, c: Constellation, q, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Finite-alphabet secrecy rate sum_i [I(a_i q_i) - I(b_i q_i)] in bits
    for subchannel powers q."""
    q = np.asarray(q, dtype=float)
    if q.shape != (s_set.l,):
        raise InputError(f"q must have length l={s_set.l}, got shape {q.shape}")
    if s_set.l == 0:
        return 0.0
    vals = mutual_information(c, np.concatenate([s_set.a * q, s_set.b * q]), quad)
    return float(np.sum(vals[: s_set.l]) - np.sum(vals[s_set.l :]))
