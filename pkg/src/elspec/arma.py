"""ARMA(p,q) models: validation, spectral densities, log-spectral gradients,
and simulation.

Sign convention: the operators are phi(B) = 1 - phi_1 B - ... - phi_p B^p and
theta(B) = 1 - theta_1 B - ... - theta_q B^q, so an MA(1) reads
Z_t = a_t - theta * a_{t-1}.  Coefficients exported from tools that use the
opposite MA sign must be negated before building an ArmaSpec.

The full parameter vector is beta = (phi_1..phi_p, theta_1..theta_q, sigma2);
beta1 drops sigma2.
"""

from __future__ import annotations

import enum
from dataclasses import InitVar, dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import InputError, InvalidModelError

# Root-modulus slack used by the stationarity/invertibility test; avoids
# flakiness for coefficients sitting numerically on the unit circle.
STATIONARITY_MARGIN = 1e-8

_FD_STEP = 1e-6


class NoiseKind(enum.Enum):
    """Innovation distribution; both members are mean zero with finite
    fourth moment."""

    STANDARD_NORMAL = "normal"
    CENTERED_CHI2_5 = "chi2_5"  # chi-square(5) draw minus its mean 5


def max_companion_modulus(coeffs) -> float:
    """Largest eigenvalue modulus of the companion matrix of the recursion
    x_t = c_1 x_{t-1} + ... + c_r x_{t-r}.

    The coefficients are the lag weights of 1 - c_1 B - ... - c_r B^r, so a
    value below 1 means all polynomial roots lie outside the unit circle.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.size == 0 or not np.any(c):
        return 0.0
    roots = np.roots(np.concatenate(([1.0], -c)))
    return float(np.max(np.abs(roots)))


@dataclass(frozen=True, eq=False)
class ArmaSpec:
    """ARMA(p,q) parameterization.

    Invariants (checked unless ``validate=False``): the AR polynomial is
    stationary, the MA polynomial invertible (all companion eigenvalues of
    modulus < 1 - STATIONARITY_MARGIN), and sigma2 > 0.
    """

    ar: np.ndarray = field(default=())
    ma: np.ndarray = field(default=())
    sigma2: float = 1.0
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        object.__setattr__(self, "ar", np.atleast_1d(np.asarray(self.ar, dtype=float)))
        object.__setattr__(self, "ma", np.atleast_1d(np.asarray(self.ma, dtype=float)))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if validate:
            if self.sigma2 <= 0.0:
                raise InvalidModelError(f"sigma2 must be positive, got {self.sigma2}")
            mod_ar = max_companion_modulus(self.ar)
            if mod_ar >= 1.0 - STATIONARITY_MARGIN:
                raise InvalidModelError(
                    f"AR polynomial is not stationary (companion modulus {mod_ar:.6g})"
                )
            mod_ma = max_companion_modulus(self.ma)
            if mod_ma >= 1.0 - STATIONARITY_MARGIN:
                raise InvalidModelError(
                    f"MA polynomial is not invertible (companion modulus {mod_ma:.6g})"
                )

    @property
    def p(self) -> int:
        return int(self.ar.size)

    @property
    def q(self) -> int:
        return int(self.ma.size)

    @property
    def order(self) -> tuple[int, int]:
        return (self.p, self.q)

    @property
    def beta1(self) -> np.ndarray:
        """Parameters of interest (phi's then theta's), sigma2 excluded."""
        return np.concatenate([self.ar, self.ma])

    @property
    def beta(self) -> np.ndarray:
        """Full parameter vector (phi's, theta's, sigma2)."""
        return np.concatenate([self.ar, self.ma, [self.sigma2]])

    @classmethod
    def from_beta1(cls, order, beta1, sigma2=1.0, validate=True) -> "ArmaSpec":
        p, q = order
        beta1 = np.asarray(beta1, dtype=float)
        if beta1.size != p + q:
            raise InputError(f"expected {p + q} parameters for order {order}, got {beta1.size}")
        return cls(ar=beta1[:p], ma=beta1[p:], sigma2=sigma2, validate=validate)

    @classmethod
    def from_beta(cls, order, beta, validate=True) -> "ArmaSpec":
        p, q = order
        beta = np.asarray(beta, dtype=float)
        if beta.size != p + q + 1:
            raise InputError(f"expected {p + q + 1} parameters for order {order}, got {beta.size}")
        return cls(ar=beta[:p], ma=beta[p : p + q], sigma2=beta[-1], validate=validate)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observed real-valued series with its sample mean cached."""

    values: np.ndarray
    mean: float = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size < 4:
            raise InputError(f"series must have at least 4 observations, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise InputError("series contains non-finite values")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mean", float(vals.mean()))

    @property
    def T(self) -> int:
        return int(self.values.size)


def _poly_mod2(coeffs, omega):
    """|1 - c_1 e^{-iw} - ... - c_r e^{-iwr}|^2, vectorized over omega."""
    w = np.asarray(omega, dtype=float)
    val = np.ones(w.shape, dtype=complex)
    for lag, c in enumerate(np.atleast_1d(coeffs), start=1):
        if c != 0.0:
            val = val - c * np.exp(-1j * lag * w)
    return np.abs(val) ** 2


def spectrum_shape(spec: ArmaSpec, omega):
    """Variance-free spectrum g1(w) = |theta(e^{-iw})|^2 / |phi(e^{-iw})|^2 / (2*pi),
    so that the spectral density is sigma2 * g1."""
    return _poly_mod2(spec.ma, omega) / _poly_mod2(spec.ar, omega) / (2.0 * np.pi)


def spectral_density(spec: ArmaSpec, omega):
    """Spectral density g(w) = sigma2/(2*pi) * |theta(e^{-iw})|^2 / |phi(e^{-iw})|^2."""
    return spec.sigma2 * spectrum_shape(spec, omega)


def _closed_form_gradient(spec, w, profile):
    # Valid only for p <= 1 and q <= 1.
    cols = []
    if spec.p == 1:
        phi = spec.ar[0]
        a = 1.0 - 2.0 * phi * np.cos(w) + phi * phi
        cols.append((2.0 * np.cos(w) - 2.0 * phi) / a)
    if spec.q == 1:
        theta = spec.ma[0]
        a = 1.0 - 2.0 * theta * np.cos(w) + theta * theta
        cols.append((2.0 * theta - 2.0 * np.cos(w)) / a)
    if not profile:
        cols.append(np.full(w.shape, 1.0 / spec.sigma2))
    if not cols:
        return np.empty(w.shape + (0,))
    return np.stack(cols, axis=-1)


def _fd_gradient(spec, w, profile):
    # Central differences of ln g; evaluated on raw coefficient arrays so
    # a perturbation crossing the stationarity margin is still computable.
    npar = spec.p + spec.q
    cols = []
    base = spec.beta1

    def log_shape(vec):
        ar, ma = vec[: spec.p], vec[spec.p :]
        return np.log(_poly_mod2(ma, w)) - np.log(_poly_mod2(ar, w))

    for i in range(npar):
        h = _FD_STEP * max(1.0, abs(base[i]))
        up, dn = base.copy(), base.copy()
        up[i] += h
        dn[i] -= h
        cols.append((log_shape(up) - log_shape(dn)) / (2.0 * h))
    if not profile:
        cols.append(np.full(w.shape, 1.0 / spec.sigma2))
    if not cols:
        return np.empty(w.shape + (0,))
    return np.stack(cols, axis=-1)


def log_spectral_gradient(spec: ArmaSpec, omega, profile: bool = False):
    """Gradient of ln g (or of the sigma2-free ln g1 when ``profile``).

    Components are ordered (phi's, theta's[, sigma2]).  Closed forms are used
    for p,q <= 1; higher orders fall back to central finite differences with
    step 1e-6.  Returns shape (k,) for scalar omega, (len(omega), k) otherwise.
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if spec.p <= 1 and spec.q <= 1:
        grad = _closed_form_gradient(spec, w, profile)
    else:
        grad = _fd_gradient(spec, w, profile)
    return grad[0] if scalar else grad


def simulate(
    spec: ArmaSpec,
    T: int,
    noise: NoiseKind = NoiseKind.STANDARD_NORMAL,
    seed: int = 0,
    center: str = "exact",
) -> TimeSeries:
    """Simulate a length-T realization of phi(B) Z_t = theta(B) a_t.

    Innovations are sqrt(sigma2) times a standard-normal draw or a centered
    chi-square(5) draw (five squared standard normals minus 5; variance 10
    before scaling, not re-standardized).  ``center`` selects exact-mean
    centering ("exact", the default: chi-square draws have their mean 5
    removed) or additional per-sample centering ("empirical": the realized
    innovation mean is subtracted too).  A presample of 500 + 10*(p+q) steps,
    started from zero, is discarded.  Deterministic given ``seed``.
    """
    if T < 4:
        raise InputError(f"need T >= 4, got {T}")
    if center not in ("exact", "empirical"):
        raise InputError(f"unknown centering {center!r}; use 'exact' or 'empirical'")
    rng = np.random.default_rng(seed)
    burn = 500 + 10 * (spec.p + spec.q)
    m = T + burn
    if noise is NoiseKind.STANDARD_NORMAL:
        a = rng.standard_normal(m)
    elif noise is NoiseKind.CENTERED_CHI2_5:
        a = np.sum(rng.standard_normal((m, 5)) ** 2, axis=1) - 5.0
    else:
        raise InputError(f"unknown noise kind {noise!r}")
    a *= np.sqrt(spec.sigma2)
    if center == "empirical":
        a = a - a.mean()
    # lfilter applies z_t = sum phi_i z_{t-i} + a_t - sum theta_m a_{t-m}
    # with zero initial conditions.
    b = np.concatenate(([1.0], -spec.ma))
    a_poly = np.concatenate(([1.0], -spec.ar))
    z = lfilter(b, a_poly, a)
    return TimeSeries(z[burn:])
