"""Qutrit dephasing channel and the correlated reference-phase noise behind it.

The channel multiplies the entries of a qutrit state elementwise by::

    M = [[1,   eta,   eta  ],
         [eta, 1,     kappa],
         [eta, kappa, 1    ]]

``eta`` is the coherence kept between the signal level |0> and the degenerate
reference pair {|1>, |2>}; ``kappa`` is the coherence kept inside that pair.
It is completely positive iff ``0 <= eta <= 1`` and ``2 eta^2 - 1 <= kappa <= 1``.

Physically the channel is the average of ``exp(-i (phi1 |1><1| + phi2 |2><2|))``
over random reference phases.  Two ensembles are provided: symmetric two-valued
kicks ``+-phi0`` and a zero-mean bivariate Gaussian, both with correlation
coefficient ``c``.  Indices here are zero-based, so the one-based labels
|1>, |2>, |3> map to 0, 1, 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _random
from .errors import NumericalError, PhysicalityError, ValidationError
from .qmath import TOL, check_density_matrix, ket_to_dm

CP_REGION = "0 <= eta <= 1 and 2*eta**2 - 1 <= kappa <= 1"


def _real(x, name: str) -> float:
    if isinstance(x, complex) or np.iscomplexobj(x):
        if np.imag(x) != 0:
            raise ValidationError(f"{name} must be real, got {x!r}")
        x = np.real(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {x!r}")
    return x


def multiplier_matrix(eta: float, kappa: float) -> np.ndarray:
    return np.array([[1.0, eta, eta], [eta, 1.0, kappa], [eta, kappa, 1.0]])


@dataclass(frozen=True)
class CPDiagnostic:
    """Outcome of a complete-positivity check, reported in two equivalent forms."""

    eta: float
    kappa: float
    inequality: bool
    psd: bool
    min_eigenvalue: float

    @property
    def agree(self) -> bool:
        return self.inequality == self.psd

    def __bool__(self) -> bool:
        return self.inequality

    def describe(self) -> str:
        verdict = "inside" if self.inequality else "outside"
        return (
            f"(eta={self.eta:g}, kappa={self.kappa:g}) is {verdict} the CP region "
            f"[{CP_REGION}]; multiplier min eigenvalue {self.min_eigenvalue:.3e}"
        )


def cp_check(eta, kappa=None) -> CPDiagnostic:
    """Check complete positivity of the channel ``(eta, kappa)``.

    Accepts either two reals or a single :class:`DephasingParams`.  The result
    is truthy iff the closed-form inequalities hold (boundary included within
    ``TOL.cp_boundary``).  The diagnostic also carries the equivalent test
    "multiplier matrix is PSD and eta >= 0".
    """
    if kappa is None:
        eta, kappa = eta.eta, eta.kappa
    eta = _real(eta, "eta")
    kappa = _real(kappa, "kappa")
    tol = TOL.cp_boundary
    ineq = (-tol <= eta <= 1 + tol) and (2 * eta**2 - 1 - tol <= kappa <= 1 + tol)
    lam_min = float(np.linalg.eigvalsh(multiplier_matrix(eta, kappa))[0])
    psd = lam_min >= -TOL.validation and eta >= -tol
    return CPDiagnostic(eta, kappa, ineq, psd, lam_min)


@dataclass(frozen=True)
class DephasingParams:
    """Channel parameters; construction fails outside the CP region."""

    eta: float
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "eta", _real(self.eta, "eta"))
        object.__setattr__(self, "kappa", _real(self.kappa, "kappa"))
        diag = cp_check(self.eta, self.kappa)
        if not diag:
            raise PhysicalityError(
                f"channel not completely positive: requires {CP_REGION}, "
                f"got eta={self.eta!r}, kappa={self.kappa!r}"
            )

    @property
    def multiplier(self) -> np.ndarray:
        return multiplier_matrix(self.eta, self.kappa)


def as_params(params) -> DephasingParams:
    if isinstance(params, DephasingParams):
        return params
    if isinstance(params, (Kicks, Gaussian)):
        return noise_to_dephasing(params)
    eta, kappa = params
    return DephasingParams(eta, kappa)


@dataclass(frozen=True)
class PureProbe:
    """Probe sqrt(q)|0> + sqrt((1-q)/2)(|1> + |2>)."""

    q: float

    def __post_init__(self):
        q = _real(self.q, "q")
        if not 0.0 <= q <= 1.0:
            raise ValidationError(f"q must lie in [0, 1], got {q}")
        object.__setattr__(self, "q", q)

    @property
    def vector(self) -> np.ndarray:
        b = math.sqrt((1 - self.q) / 2)
        return np.array([math.sqrt(self.q), b, b], dtype=complex)

    @property
    def density(self) -> np.ndarray:
        return ket_to_dm(self.vector)


def _check_c(c) -> float:
    c = _real(c, "c")
    if not -1.0 <= c <= 1.0:
        raise ValidationError(f"correlation coefficient must lie in [-1, 1], got {c}")
    return c


@dataclass(frozen=True)
class Kicks:
    """Reference phases jump to +-phi0 with P(same sign) = (1+c)/2."""

    phi0: float
    c: float

    def __post_init__(self):
        phi0 = _real(self.phi0, "phi0")
        if not 0.0 <= phi0 <= math.pi / 2 + 1e-15:
            raise ValidationError(f"phi0 must lie in [0, pi/2], got {phi0}")
        object.__setattr__(self, "phi0", phi0)
        object.__setattr__(self, "c", _check_c(self.c))

    def outcomes(self) -> list[tuple[float, float, float]]:
        """The four ``(phi1, phi2, probability)`` kick configurations."""
        p, a = self.phi0, (1 + self.c) / 4
        b = (1 - self.c) / 4
        return [(p, p, a), (-p, -p, a), (p, -p, b), (-p, p, b)]


@dataclass(frozen=True)
class Gaussian:
    """Zero-mean bivariate normal reference phases with equal widths sigma."""

    sigma: float
    c: float

    def __post_init__(self):
        sigma = _real(self.sigma, "sigma")
        if not sigma > 0:
            raise ValidationError(f"sigma must be positive, got {sigma}")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "c", _check_c(self.c))

    @classmethod
    def from_variance(cls, sigma2: float, c: float) -> "Gaussian":
        return cls(math.sqrt(sigma2), c)

    @property
    def variance(self) -> float:
        return self.sigma**2

    @property
    def covariance(self) -> np.ndarray:
        s2 = self.variance
        return np.array([[s2, self.c * s2], [self.c * s2, s2]])

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        phi1 = self.sigma * z1
        phi2 = self.sigma * (self.c * z1 + math.sqrt(max(0.0, 1 - self.c**2)) * z2)
        return phi1, phi2


NoiseModel = Union[Kicks, Gaussian]


def noise_to_dephasing(model: NoiseModel) -> DephasingParams:
    """Channel parameters produced by a noise ensemble.

    Kicks give ``eta = cos(phi0)``, ``kappa = eta^2 + c (1 - eta^2)``; the
    Gaussian model gives ``eta = exp(-sigma^2/2)``, ``kappa = exp(-sigma^2 (1-c))``.
    """
    if isinstance(model, Kicks):
        eta = math.cos(model.phi0)
        # cos(pi/2) is 6e-17 in floating point; keep the kick boundary exact
        eta = 0.0 if abs(eta) < 1e-15 else eta
        return DephasingParams(eta, eta**2 + model.c * (1 - eta**2))
    if isinstance(model, Gaussian):
        s2 = model.variance
        return DephasingParams(math.exp(-s2 / 2), math.exp(-s2 * (1 - model.c)))
    raise TypeError(f"unknown noise model {model!r}")


def gaussian_from_dephasing(eta: float, kappa: float) -> Gaussian:
    """Invert the Gaussian mapping; only ``eta**4 <= kappa <= 1`` is reachable."""
    if not 0 < eta < 1:
        raise ValidationError("Gaussian noise needs 0 < eta < 1")
    s2 = -2 * math.log(eta)
    c = 1 - math.log(kappa) / (2 * math.log(eta)) if kappa > 0 else -math.inf
    if not -1 - 1e-12 <= c <= 1 + 1e-12:
        raise ValidationError(f"kappa={kappa} outside the Gaussian range [eta^4, 1]")
    return Gaussian.from_variance(s2, min(1.0, max(-1.0, c)))


def dephase_general(rho, params) -> np.ndarray:
    """Apply the channel to any qutrit state (elementwise multiplier form)."""
    params = as_params(params)
    a = check_density_matrix(rho)
    if a.shape != (3, 3):
        raise ValidationError(f"expected a qutrit state, got shape {a.shape}")
    return a * params.multiplier


def dephase(probe, params) -> np.ndarray:
    """Output state of the channel acting on a :class:`PureProbe` (or a bare ``q``)."""
    if not isinstance(probe, PureProbe):
        probe = PureProbe(probe)
    params = as_params(params)
    q = probe.q
    x = params.eta * math.sqrt(q * (1 - q) / 2)
    h = (1 - q) / 2
    return np.array(
        [[q, x, x], [x, h, params.kappa * h], [x, params.kappa * h, h]], dtype=complex
    )


def _phase_conjugate(rho: np.ndarray, phi1, phi2, weights) -> np.ndarray:
    """sum_k w_k U_k rho U_k^dag with U_k = diag(1, e^{-i phi1_k}, e^{-i phi2_k})."""
    phases = np.stack(
        [np.zeros_like(phi1), np.asarray(phi1, float), np.asarray(phi2, float)], axis=1
    )
    d = np.exp(-1j * phases)
    out = np.einsum("k,kj,jl,kl->jl", np.asarray(weights, float), d, rho, d.conj())
    return out


def _gauss_hermite_average(model: Gaussian, rho: np.ndarray, order: int) -> np.ndarray:
    x, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / w.sum()
    z1, z2 = np.meshgrid(x, x, indexing="ij")
    ww = np.outer(w, w).ravel()
    z1, z2 = z1.ravel(), z2.ravel()
    phi1 = model.sigma * z1
    phi2 = model.sigma * (model.c * z1 + math.sqrt(max(0.0, 1 - model.c**2)) * z2)
    return _phase_conjugate(rho, phi1, phi2, ww)


def ensemble_average_channel(
    model: NoiseModel,
    rho,
    *,
    method: str = "quadrature",
    order: int = 64,
    samples: int = 200_000,
    seed: int = 0,
    chunk: int = 50_000,
    workers: int = 1,
    tol: float = 1e-8,
) -> np.ndarray:
    """Average ``U(phi) rho U(phi)^dag`` over the noise ensemble directly.

    Kicks use the exact four-term sum.  Gaussian noise uses tensor Gauss-Hermite
    quadrature of ``order`` nodes per axis (checked against ``order // 2``; a
    gap above ``tol`` raises NumericalError) or, with ``method="montecarlo"``,
    ``samples`` seeded draws split into fixed chunks.
    """
    a = check_density_matrix(rho)
    if a.shape != (3, 3):
        raise ValidationError(f"expected a qutrit state, got shape {a.shape}")
    if isinstance(model, Kicks):
        phi1, phi2, w = (np.array(v) for v in zip(*model.outcomes()))
        return _phase_conjugate(a, phi1, phi2, w)
    if not isinstance(model, Gaussian):
        raise TypeError(f"unknown noise model {model!r}")
    if method == "quadrature":
        fine = _gauss_hermite_average(model, a, order)
        coarse = _gauss_hermite_average(model, a, max(2, order // 2))
        gap = float(np.max(np.abs(fine - coarse)))
        if gap > tol:
            raise NumericalError(
                f"Gauss-Hermite quadrature (order {order}) not converged: "
                f"achieved {gap:.2e} > {tol:g}",
                achieved=gap,
            )
        return fine
    if method == "montecarlo":
        n_chunks = -(-samples // chunk)

        def run(i: int) -> np.ndarray:
            n = min(chunk, samples - i * chunk)
            phi1, phi2 = model.sample(n, _random.stream(seed, i))
            return _phase_conjugate(a, phi1, phi2, np.full(n, 1.0 / samples))

        return sum(_random.map_ordered(run, n_chunks, workers))
    raise ValueError(f"unknown method {method!r}")
