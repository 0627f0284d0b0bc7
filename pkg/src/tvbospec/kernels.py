"""Stationary correlation functions and their spectral descriptions.

Temporal kernels are normalized correlation functions k(0) = 1 on the real
line; spatial kernels live on the unit cube [0, 1]^d.  Every temporal kernel
carries a spectral density under the ordinary-frequency Fourier convention

    S(w) = integral k(u) exp(-2*pi*i*u*w) du,

so that integral S(w) dw = k(0) = 1.  Kernels fall into four classes
according to the support of S: broadband (unbounded continuous support),
band-limited (bounded continuous), almost-periodic (discrete infinite) and
low-rank (discrete finite).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.fft import dct

from .errors import ToleranceUnreachable, WrongClass

__all__ = [
    "TemporalFamily",
    "SpatialFamily",
    "ClassTag",
    "KernelClass",
    "TemporalKernel",
    "SpatialKernel",
    "LowRankKernel",
    "eval_temporal",
    "spectral_density",
    "spectral_lines",
    "classify",
    "low_rank_approx",
    "kernel_to_dict",
    "kernel_from_dict",
]

_MATERN_NUS = (0.5, 1.5, 2.5)
_WEIGHT_TOL = 1e-9


class TemporalFamily(str, enum.Enum):
    RBF = "rbf"
    MATERN = "matern"
    RATIONAL_QUADRATIC = "rational_quadratic"
    SINC = "sinc"
    SINC_SQUARED = "sinc_squared"
    PERIODIC = "periodic"
    COSINE_SUM = "cosine_sum"


class SpatialFamily(str, enum.Enum):
    RBF = "rbf"
    MATERN = "matern"


class ClassTag(str, enum.Enum):
    BROADBAND = "broadband"
    BAND_LIMITED = "band_limited"
    ALMOST_PERIODIC = "almost_periodic"
    LOW_RANK = "low_rank"


@dataclass(frozen=True)
class KernelClass:
    """Spectral-support class of a temporal kernel.

    The (bounded, discrete) support pair maps bijectively to the tag:
    (False, False) broadband, (True, False) band-limited,
    (False, True) almost-periodic, (True, True) low-rank.
    """

    tag: ClassTag
    support_bounded: bool
    support_discrete: bool

    @staticmethod
    def from_support(bounded: bool, discrete: bool) -> "KernelClass":
        tag = {
            (False, False): ClassTag.BROADBAND,
            (True, False): ClassTag.BAND_LIMITED,
            (False, True): ClassTag.ALMOST_PERIODIC,
            (True, True): ClassTag.LOW_RANK,
        }[(bounded, discrete)]
        return KernelClass(tag, bounded, discrete)

    @property
    def is_discrete(self) -> bool:
        return self.support_discrete


def _as_array(u):
    return np.asarray(u, dtype=float)


@dataclass(frozen=True)
class TemporalKernel:
    """A stationary temporal correlation function.

    Only the fields relevant to the chosen family are used; the classmethod
    constructors are the intended entry points.  ``lines`` holds
    (frequency, weight) pairs for the cosine-sum family, with nonnegative
    frequencies and weights summing to one (the zero-frequency entry is the
    constant term).
    """

    family: TemporalFamily
    lengthscale: float = 1.0
    nu: float | None = None
    alpha: float | None = None
    bandlimit: float | None = None
    period: float | None = None
    lines: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        f = self.family
        if f in (TemporalFamily.RBF, TemporalFamily.MATERN,
                 TemporalFamily.RATIONAL_QUADRATIC, TemporalFamily.PERIODIC):
            if not self.lengthscale > 0:
                raise ValueError("lengthscale must be positive")
        if f is TemporalFamily.MATERN:
            if self.nu not in _MATERN_NUS:
                raise ValueError(f"Matern smoothness must be one of {_MATERN_NUS}")
        if f is TemporalFamily.RATIONAL_QUADRATIC:
            if self.alpha is None or not self.alpha > 0.5:
                raise ValueError("rational quadratic needs shape alpha > 0.5 "
                                 "(spectral density diverges at 0 otherwise)")
        if f in (TemporalFamily.SINC, TemporalFamily.SINC_SQUARED):
            if self.bandlimit is None or not self.bandlimit > 0:
                raise ValueError("band-limited kernels need a positive bandlimit")
        if f is TemporalFamily.PERIODIC:
            if self.period is None or not self.period > 0:
                raise ValueError("periodic kernel needs a positive period")
        if f is TemporalFamily.COSINE_SUM:
            if not self.lines:
                raise ValueError("cosine-sum kernel needs at least one line")
            total = 0.0
            for freq, weight in self.lines:
                if freq < 0:
                    raise ValueError("line frequencies must be nonnegative")
                if not 0 < weight <= 1:
                    raise ValueError("line weights must lie in (0, 1]")
                total += weight
            if abs(total - 1.0) > _WEIGHT_TOL:
                raise ValueError(f"line weights must sum to 1, got {total!r}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def rbf(cls, lengthscale: float = 1.0) -> "TemporalKernel":
        return cls(TemporalFamily.RBF, lengthscale=lengthscale)

    @classmethod
    def matern(cls, nu: float, lengthscale: float = 1.0) -> "TemporalKernel":
        return cls(TemporalFamily.MATERN, lengthscale=lengthscale, nu=nu)

    @classmethod
    def rational_quadratic(cls, lengthscale: float = 1.0,
                           alpha: float = 1.0) -> "TemporalKernel":
        return cls(TemporalFamily.RATIONAL_QUADRATIC,
                   lengthscale=lengthscale, alpha=alpha)

    @classmethod
    def sinc(cls, bandlimit: float = 1.0) -> "TemporalKernel":
        return cls(TemporalFamily.SINC, bandlimit=bandlimit)

    @classmethod
    def sinc_squared(cls, bandlimit: float = 1.0) -> "TemporalKernel":
        return cls(TemporalFamily.SINC_SQUARED, bandlimit=bandlimit)

    @classmethod
    def periodic(cls, period: float = 1.0,
                 lengthscale: float = 1.0) -> "TemporalKernel":
        return cls(TemporalFamily.PERIODIC, lengthscale=lengthscale,
                   period=period)

    @classmethod
    def cosine_sum(cls, lines) -> "TemporalKernel":
        return cls(TemporalFamily.COSINE_SUM,
                   lines=tuple((float(f), float(w)) for f, w in lines))

    # -- evaluation -------------------------------------------------------

    def __call__(self, u):
        return eval_temporal(self, u)

    @property
    def kernel_class(self) -> KernelClass:
        return classify(self)


def eval_temporal(kernel: TemporalKernel, u):
    """Evaluate the correlation k(u) at lags ``u`` (scalar or array).

    Removable singularities (the sinc families at u = 0) return the limit
    value 1.
    """
    u = _as_array(u)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    f = kernel.family
    ell = kernel.lengthscale
    if f is TemporalFamily.RBF:
        out = np.exp(-(u * u) / (2.0 * ell * ell))
    elif f is TemporalFamily.MATERN:
        r = np.abs(u) / ell
        if kernel.nu == 0.5:
            out = np.exp(-r)
        elif kernel.nu == 1.5:
            s = math.sqrt(3.0) * r
            out = (1.0 + s) * np.exp(-s)
        else:  # nu == 2.5
            s = math.sqrt(5.0) * r
            out = (1.0 + s + s * s / 3.0) * np.exp(-s)
    elif f is TemporalFamily.RATIONAL_QUADRATIC:
        a = kernel.alpha
        out = (1.0 + (u * u) / (2.0 * a * ell * ell)) ** (-a)
    elif f is TemporalFamily.SINC:
        x = 2.0 * np.pi * kernel.bandlimit * u
        out = np.ones_like(x)
        nz = x != 0
        out[nz] = np.sin(x[nz]) / x[nz]
    elif f is TemporalFamily.SINC_SQUARED:
        x = np.pi * kernel.bandlimit * u
        out = np.ones_like(x)
        nz = x != 0
        out[nz] = (np.sin(x[nz]) / x[nz]) ** 2
    elif f is TemporalFamily.PERIODIC:
        s = np.sin(np.pi * u / kernel.period)
        out = np.exp(-2.0 * s * s / (ell * ell))
    else:  # COSINE_SUM
        out = np.zeros_like(u)
        for freq, weight in kernel.lines:
            out += weight * np.cos(2.0 * np.pi * freq * u)
    return float(out[0]) if scalar else out


def classify(kernel: TemporalKernel) -> KernelClass:
    """Classify a temporal kernel by the support of its spectral density."""
    f = kernel.family
    if f in (TemporalFamily.RBF, TemporalFamily.MATERN,
             TemporalFamily.RATIONAL_QUADRATIC):
        return KernelClass.from_support(bounded=False, discrete=False)
    if f in (TemporalFamily.SINC, TemporalFamily.SINC_SQUARED):
        return KernelClass.from_support(bounded=True, discrete=False)
    if f is TemporalFamily.PERIODIC:
        return KernelClass.from_support(bounded=False, discrete=True)
    return KernelClass.from_support(bounded=True, discrete=True)


def _continuous_density(kernel: TemporalKernel, w: np.ndarray) -> np.ndarray:
    f = kernel.family
    ell = kernel.lengthscale
    if f is TemporalFamily.RBF:
        return ell * math.sqrt(2.0 * math.pi) * np.exp(
            -2.0 * np.pi ** 2 * ell ** 2 * w ** 2)
    if f is TemporalFamily.MATERN:
        nu = kernel.nu
        two_nu = 2.0 * nu
        const = (2.0 * math.sqrt(math.pi) * special.gamma(nu + 0.5)
                 * two_nu ** nu / (special.gamma(nu) * ell ** two_nu))
        return const * (two_nu / ell ** 2 + 4.0 * np.pi ** 2 * w ** 2) ** (-(nu + 0.5))
    if f is TemporalFamily.RATIONAL_QUADRATIC:
        # Fourier dual of the Matern family: with a = sqrt(2 alpha) * ell,
        #   S(w) = a * (2 sqrt(pi) / Gamma(alpha)) (pi a |w|)^(alpha-1/2)
        #          * K_{alpha-1/2}(2 pi a |w|)
        # with the finite w -> 0 limit a sqrt(pi) Gamma(alpha-1/2)/Gamma(alpha).
        alpha = kernel.alpha
        a = math.sqrt(2.0 * alpha) * ell
        order = alpha - 0.5
        x = 2.0 * np.pi * a * np.abs(w)
        out = np.empty_like(x)
        small = x < 1e-12
        out[small] = (a * math.sqrt(math.pi)
                      * special.gamma(order) / special.gamma(alpha))
        xs = x[~small]
        out[~small] = (a * 2.0 * math.sqrt(math.pi) / special.gamma(alpha)
                       * (0.5 * xs) ** order * special.kv(order, xs))
        return out
    if f is TemporalFamily.SINC:
        # Boxcar on the half-open interval [-tau, tau): with observations at
        # frequencies (i - n/2)/(n delta) this makes the number of positive
        # sampled eigenvalues exactly n*min(1, 2*tau*delta) at commensurate
        # sampling rates.
        tau = kernel.bandlimit
        return np.where((w >= -tau) & (w < tau), 1.0 / (2.0 * tau), 0.0)
    if f is TemporalFamily.SINC_SQUARED:
        tau = kernel.bandlimit
        return np.maximum(0.0, 1.0 - np.abs(w) / tau) / tau
    raise WrongClass(f"{f.value} has no continuous spectral density")


def spectral_lines(kernel: TemporalKernel, tol: float = 1e-12):
    """Two-sided spectral lines [(frequency, weight), ...] of a discrete-
    support kernel, heaviest first, truncated once the omitted mass is
    below ``tol``.

    The periodic kernel exp(-2 sin^2(pi u / r) / l^2) has lines at p / r
    with weights exp(-z) I_p(z), z = 1 / l^2.
    """
    f = kernel.family
    if f is TemporalFamily.COSINE_SUM:
        lines = []
        for freq, weight in kernel.lines:
            if freq == 0.0:
                lines.append((0.0, weight))
            else:
                lines.append((freq, weight / 2.0))
                lines.append((-freq, weight / 2.0))
        lines.sort(key=lambda fw: (-fw[1], abs(fw[0]), fw[0] < 0))
        return lines
    if f is TemporalFamily.PERIODIC:
        z = 1.0 / kernel.lengthscale ** 2
        r = kernel.period
        lines = [(0.0, float(special.ive(0, z)))]
        total = lines[0][1]
        p = 1
        while total < 1.0 - tol and p < 10_000:
            w = float(special.ive(p, z))
            lines.append((p / r, w))
            lines.append((-p / r, w))
            total += 2.0 * w
            p += 1
        lines.sort(key=lambda fw: (-fw[1], abs(fw[0]), fw[0] < 0))
        return lines
    raise WrongClass(f"{f.value} has a continuous spectral density")


def spectral_density(kernel: TemporalKernel, omega=0.0):
    """Spectral density of the kernel.

    Continuous-support classes return S(omega) evaluated at the given
    frequencies; discrete-support classes ignore ``omega`` and return the
    full spectral-line list from :func:`spectral_lines`.
    """
    if classify(kernel).is_discrete:
        return spectral_lines(kernel)
    w = _as_array(omega)
    scalar = w.ndim == 0
    out = _continuous_density(kernel, np.atleast_1d(w))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Spatial kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpatialKernel:
    """A stationary correlation function on the unit cube [0, 1]^d."""

    family: SpatialFamily
    lengthscales: tuple[float, ...]
    nu: float | None = None

    def __post_init__(self):
        if not self.lengthscales or any(l <= 0 for l in self.lengthscales):
            raise ValueError("lengthscales must be positive, one per dimension")
        if self.family is SpatialFamily.MATERN and self.nu not in _MATERN_NUS:
            raise ValueError(f"Matern smoothness must be one of {_MATERN_NUS}")

    @property
    def dimension(self) -> int:
        return len(self.lengthscales)

    @classmethod
    def rbf(cls, lengthscales) -> "SpatialKernel":
        if np.isscalar(lengthscales):
            lengthscales = (float(lengthscales),)
        return cls(SpatialFamily.RBF, tuple(float(l) for l in lengthscales))

    @classmethod
    def matern(cls, nu: float, lengthscales) -> "SpatialKernel":
        if np.isscalar(lengthscales):
            lengthscales = (float(lengthscales),)
        return cls(SpatialFamily.MATERN,
                   tuple(float(l) for l in lengthscales), nu=nu)

    def pairwise(self, X, Y) -> np.ndarray:
        """Correlation matrix k(X[i], Y[j]) for point arrays (n, d), (m, d)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[1] != self.dimension or Y.shape[1] != self.dimension:
            from .errors import DimensionMismatch
            raise DimensionMismatch(
                f"points have dimension {X.shape[1]}/{Y.shape[1]}, "
                f"kernel expects {self.dimension}")
        ell = np.asarray(self.lengthscales)
        diff = (X[:, None, :] - Y[None, :, :]) / ell
        sq = np.sum(diff * diff, axis=-1)
        if self.family is SpatialFamily.RBF:
            return np.exp(-0.5 * sq)
        r = np.sqrt(sq)
        if self.nu == 0.5:
            return np.exp(-r)
        if self.nu == 1.5:
            s = math.sqrt(3.0) * r
            return (1.0 + s) * np.exp(-s)
        s = math.sqrt(5.0) * r
        return (1.0 + s + s * s / 3.0) * np.exp(-s)

    def __call__(self, X, Y) -> np.ndarray:
        return self.pairwise(X, Y)


# ---------------------------------------------------------------------------
# Low-rank kernels and the cosine-transform approximation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LowRankKernel:
    """A finite cosine expansion c0 + sum_j c_j cos(2 pi w_j u).

    Coefficients are nonnegative (up to floating-point noise) and sum to one
    together with the constant term.
    """

    c0: float
    coefficients: tuple[float, ...] = field(default=())
    frequencies: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if len(self.coefficients) != len(self.frequencies):
            raise ValueError("coefficients and frequencies must pair up")
        if self.c0 < -_WEIGHT_TOL or any(c < -_WEIGHT_TOL for c in self.coefficients):
            raise ValueError("low-rank coefficients must be nonnegative")
        if any(f <= 0 for f in self.frequencies):
            raise ValueError("cosine frequencies must be positive")
        total = self.c0 + sum(self.coefficients)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"coefficients must sum to 1, got {total!r}")

    @property
    def rank(self) -> int:
        """Number of nonzero eigenvalues of any induced kernel matrix."""
        return (1 if self.c0 > 0 else 0) + 2 * len(self.coefficients)

    def __call__(self, u):
        u = _as_array(u)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        out = np.full_like(u, self.c0)
        for c, w in zip(self.coefficients, self.frequencies):
            out += c * np.cos(2.0 * np.pi * w * u)
        return float(out[0]) if scalar else out

    def as_temporal(self) -> TemporalKernel:
        lines = []
        if self.c0 > 0:
            lines.append((0.0, self.c0))
        lines.extend(zip(self.frequencies, self.coefficients))
        return TemporalKernel.cosine_sum(lines)


def _dct1_candidates(values: np.ndarray, delta: float):
    """Type-I cosine transform of ``values`` as (coefficient, frequency)
    pairs such that values[j] = sum_i a_i cos(2 pi f_i * j * delta)."""
    n = len(values)
    coeffs = dct(values, type=1) / (n - 1.0)
    coeffs[0] /= 2.0
    coeffs[-1] /= 2.0
    freqs = np.arange(n) / (2.0 * (n - 1) * delta)
    return coeffs, freqs


def _greedy_truncation(coeffs, freqs, target, grid, eps):
    """Drop coefficients smallest-in-magnitude-first while the renormalized
    grid reconstruction stays within eps; returns (coeffs, freqs) or None if
    even the full set misses eps."""
    basis = np.cos(2.0 * np.pi * np.outer(grid, freqs))  # (n, m)
    recon = basis @ coeffs
    if float(np.max(np.abs(recon - target))) > eps:
        return None
    order = np.argsort(np.abs(coeffs))
    keep = np.ones(len(coeffs), dtype=bool)
    resid = recon - target
    for idx in order:
        trial = resid - coeffs[idx] * basis[:, idx]
        kept = keep.copy()
        kept[idx] = False
        total = float(np.sum(coeffs[kept]))
        if total <= 0:
            break
        # residual after the final renormalization to unit total weight
        trial_renorm = (trial + target) / total - target
        if np.max(np.abs(trial_renorm)) <= eps:
            keep = kept
            resid = trial
    kept_coeffs = coeffs[keep] / float(np.sum(coeffs[keep]))
    return kept_coeffs, freqs[keep]


def _assemble_low_rank(coeffs, freqs) -> LowRankKernel:
    c0 = 0.0
    cos_c = []
    cos_f = []
    for c, f in zip(coeffs, freqs):
        if f == 0.0:
            c0 += float(c)
        else:
            cos_c.append(float(c))
            cos_f.append(float(f))
    return LowRankKernel(c0=c0, coefficients=tuple(cos_c),
                         frequencies=tuple(cos_f))


def low_rank_approx(kernel: TemporalKernel, delta: float, n: int,
                    eps: float) -> LowRankKernel:
    """Approximate a discrete-support kernel by a low-rank cosine kernel.

    The returned kernel matches k(j*delta) for j in [0, n-1] within ``eps``
    in sup norm, with as few cosine terms as a smallest-first truncation
    allows.  Accuracy is guaranteed on the sampled grid only.

    Truncation candidates come from the type-I cosine transform of the
    sampled sequence, which is sparse exactly when the sampling step is
    commensurate with the kernel's line structure.  Otherwise the transform
    needs signed coefficients (spectral leakage), which cannot form a
    correlation function, so the construction falls back to truncating the
    kernel's own spectral lines - valid at any step.

    Raises ToleranceUnreachable when no nonnegative truncation meets
    ``eps``, WrongClass for kernels with continuous spectral support.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    if eps <= 0:
        raise ValueError("tolerance must be positive")
    if not classify(kernel).is_discrete:
        raise WrongClass("low-rank approximation applies to discrete-support "
                         "kernels only")
    grid = np.arange(n) * delta
    target = eval_temporal(kernel, grid)

    if kernel.family is not TemporalFamily.COSINE_SUM:
        coeffs, freqs = _dct1_candidates(target, delta)
        result = _greedy_truncation(coeffs, freqs, target, grid, eps)
        if result is not None and np.all(result[0] >= -_WEIGHT_TOL):
            kept_coeffs, kept_freqs = result
            return _assemble_low_rank(np.maximum(kept_coeffs, 0.0), kept_freqs)

    # line-truncation route: one-sided lines of the kernel itself
    line_tol = min(eps * 1e-3, 1e-13)
    one_sided: dict[float, float] = {}
    for f, w in spectral_lines(kernel, tol=line_tol):
        one_sided[abs(f)] = one_sided.get(abs(f), 0.0) + w
    freqs = np.array(sorted(one_sided))
    coeffs = np.array([one_sided[f] for f in freqs])
    coeffs = coeffs / float(np.sum(coeffs))
    result = _greedy_truncation(coeffs, freqs, target, grid, eps)
    if result is None:
        raise ToleranceUnreachable(
            f"no nonnegative cosine truncation reaches eps={eps:.3e} on the "
            f"sampled grid")
    return _assemble_low_rank(*result)


# ---------------------------------------------------------------------------
# JSON round-tripping (field names documented in schemas/kernel_schema.json)
# ---------------------------------------------------------------------------


def kernel_to_dict(kernel) -> dict:
    """Serialize a temporal or spatial kernel to a plain JSON-able dict."""
    if isinstance(kernel, TemporalKernel):
        d = {"kind": "temporal", "family": kernel.family.value}
        f = kernel.family
        if f in (TemporalFamily.RBF, TemporalFamily.MATERN,
                 TemporalFamily.RATIONAL_QUADRATIC, TemporalFamily.PERIODIC):
            d["lengthscale"] = kernel.lengthscale
        if f is TemporalFamily.MATERN:
            d["nu"] = kernel.nu
        if f is TemporalFamily.RATIONAL_QUADRATIC:
            d["alpha"] = kernel.alpha
        if f in (TemporalFamily.SINC, TemporalFamily.SINC_SQUARED):
            d["bandlimit"] = kernel.bandlimit
        if f is TemporalFamily.PERIODIC:
            d["period"] = kernel.period
        if f is TemporalFamily.COSINE_SUM:
            d["lines"] = [[f_, w] for f_, w in kernel.lines]
        return d
    if isinstance(kernel, SpatialKernel):
        d = {"kind": "spatial", "family": kernel.family.value,
             "lengthscales": list(kernel.lengthscales)}
        if kernel.family is SpatialFamily.MATERN:
            d["nu"] = kernel.nu
        return d
    raise TypeError(f"not a kernel: {kernel!r}")


def kernel_from_dict(d: dict):
    """Inverse of :func:`kernel_to_dict`."""
    kind = d.get("kind")
    if kind == "temporal":
        family = TemporalFamily(d["family"])
        if family is TemporalFamily.COSINE_SUM:
            return TemporalKernel.cosine_sum(d["lines"])
        return TemporalKernel(
            family,
            lengthscale=float(d.get("lengthscale", 1.0)),
            nu=d.get("nu"),
            alpha=d.get("alpha"),
            bandlimit=d.get("bandlimit"),
            period=d.get("period"),
        )
    if kind == "spatial":
        family = SpatialFamily(d["family"])
        return SpatialKernel(family,
                             tuple(float(l) for l in d["lengthscales"]),
                             nu=d.get("nu"))
    raise ValueError(f"unknown kernel kind {kind!r}")
