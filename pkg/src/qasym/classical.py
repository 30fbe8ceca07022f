"""Coherent-light operation of the interferometer under Gaussian reference-phase noise.

The phase is read from the intensity difference ``I = N1 - N2`` and its
variance is propagated to the phase, ``Var(theta) = Var(I) / |d<I>/dtheta|^2``.
The variance of ``I`` splits (law of total variance) into a shot-noise part
``E[Var(I | phi)]`` and a phase-noise part ``Var(E[I | phi])``.

Two closed forms are easy to get wrong, so both are derived here directly
from the Gaussian averages and checked against :func:`mc_classical_oracle`:

* the phase-noise part at general theta is::

      n0^2 q (1-q) [1 + e^{(c-1)s2} - e^{-2 s2} (cos 2theta (e^{(1-c)s2} + 1) + 4 e^{s2} sin^2 theta)]

  with a minus sign in front of the theta-dependent group (with a plus sign
  it would not vanish at theta = 0, c = -1);
* the large-intensity floor of the phase variance at theta = 0 is
  ``sinh((c+1) s2/2) cosh((c-1) s2/2) = (sinh s2 + sinh(c s2)) / 2``; the
  expression ``(eta^-2 - eta^2 + eta^-2c - eta^2c) / 2`` is twice this.

Here ``s2 = sigma^2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _random
from .channel import Gaussian, noise_to_dephasing
from .errors import NumericalError, ValidationError
from .metrology import qfi_closed


@dataclass(frozen=True)
class CoherentConfig:
    n0: float
    q: float
    noise: Gaussian
    theta: float = 0.0

    def __post_init__(self):
        if not self.n0 > 0:
            raise ValidationError(f"mean photon number must be positive, got {self.n0}")
        if not 0 < self.q < 1:
            raise ValidationError(
                f"q must lie strictly inside (0, 1), got {self.q}: the shot-noise term diverges"
            )
        if not isinstance(self.noise, Gaussian):
            raise ValidationError("coherent-light analysis uses the Gaussian noise model")

    def to_dict(self) -> dict:
        return {"n0": self.n0, "q": self.q, "sigma": self.noise.sigma, "c": self.noise.c,
                "theta": self.theta}


@dataclass(frozen=True)
class IdiffMoments:
    mean: float
    slope: float
    var_quantum: float
    var_classical: float

    @property
    def var_total(self) -> float:
        return self.var_quantum + self.var_classical


@dataclass(frozen=True)
class ClassicalStats:
    mean_idiff: float
    slope: float
    var_quantum: float
    var_classical: float
    quantum_term: float
    classical_term: float
    var_theta: float
    asymptotic_floor: float
    qfi_single_photon: float

    def to_dict(self) -> dict:
        return asdict(self)


def mean_counts_three_arm(cfg: CoherentConfig, phi1, phi2):
    """Mean photon numbers at the three outputs for fixed reference phases."""
    n0, q, th = cfg.n0, cfg.q, cfg.theta
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    common = 1 + q + (1 - q) * np.cos(phi1 - phi2)
    fringe = 2 * math.sqrt(q * (1 - q)) * (np.sin(th - phi1) + np.sin(th - phi2))
    n1 = n0 / 4 * (common + fringe)
    n2 = n0 / 4 * (common - fringe)
    n3 = n0 / 2 * (1 - q) * (1 - np.cos(phi1 - phi2))
    return n1, n2, n3


def mean_counts_four_arm(cfg: CoherentConfig, phi1, phi2):
    """Mean photon numbers when each reference arm has its own interferometer."""
    n0, q, th = cfg.n0, cfg.q, cfg.theta
    a = 2 * math.sqrt(q * (1 - q))
    s1 = a * np.sin(th - np.asarray(phi1, dtype=float))
    s2 = a * np.sin(th - np.asarray(phi2, dtype=float))
    return n0 / 4 * (1 + s1), n0 / 4 * (1 - s1), n0 / 4 * (1 + s2), n0 / 4 * (1 - s2)


def idiff_moments(cfg: CoherentConfig) -> IdiffMoments:
    n0, q, th = cfg.n0, cfg.q, cfg.theta
    s2, c = cfg.noise.variance, cfg.noise.c
    amp = 2 * n0 * math.sqrt(q * (1 - q)) * math.exp(-s2 / 2)
    var_q = n0 / 2 * (1 + q + (1 - q) * math.exp((c - 1) * s2))
    bracket = (
        1
        + math.exp((c - 1) * s2)
        - math.exp(-2 * s2)
        * (math.cos(2 * th) * (math.exp((1 - c) * s2) + 1) + 4 * math.exp(s2) * math.sin(th) ** 2)
    )
    var_c = n0**2 * q * (1 - q) * max(0.0, bracket)
    return IdiffMoments(amp * math.sin(th), amp * math.cos(th), var_q, var_c)


def asymptotic_variance(noise: Gaussian) -> float:
    """Phase-variance floor as n0 -> infinity at theta = 0 (independent of q)."""
    s2, c = noise.variance, noise.c
    return math.sinh((c + 1) * s2 / 2) * math.cosh((c - 1) * s2 / 2)


def _stats(cfg: CoherentConfig, m: IdiffMoments, qfi: float) -> ClassicalStats:
    if abs(m.slope) < 1e-300 or abs(m.slope) / cfg.n0 < 1e-12:
        raise NumericalError(
            f"signal slope vanishes at theta={cfg.theta}: error propagation diverges",
            achieved=m.slope,
        )
    sl2 = m.slope**2
    qt, ct = m.var_quantum / sl2, m.var_classical / sl2
    return ClassicalStats(
        mean_idiff=m.mean,
        slope=m.slope,
        var_quantum=m.var_quantum,
        var_classical=m.var_classical,
        quantum_term=qt,
        classical_term=ct,
        var_theta=qt + ct,
        asymptotic_floor=asymptotic_variance(cfg.noise),
        qfi_single_photon=qfi,
    )


def error_prop_variance(cfg: CoherentConfig) -> ClassicalStats:
    """Error-propagated phase variance of the three-arm scheme."""
    qfi = qfi_closed(cfg.q, noise_to_dephasing(cfg.noise)).value
    return _stats(cfg, idiff_moments(cfg), qfi)


def four_arm_variance(cfg: CoherentConfig) -> ClassicalStats:
    """Same analysis when the two reference arms are read out separately.

    The mean signal and the phase-noise part are unchanged, but the shot
    noise is the full n0 regardless of the correlation, so the quantum term
    equals the three-arm value at c = 1.
    """
    m = idiff_moments(cfg)
    m4 = IdiffMoments(m.mean, m.slope, cfg.n0, m.var_classical)
    eta = noise_to_dephasing(cfg.noise).eta
    qfi = qfi_closed(cfg.q, (eta, 1.0)).value
    return _stats(cfg, m4, qfi)


@dataclass(frozen=True)
class MonteCarloStats:
    samples: int
    seed: int
    mean: float
    mean_se: float
    var_total: float
    var_total_se: float
    var_quantum: float
    var_quantum_se: float
    var_classical: float
    var_classical_se: float

    def to_dict(self) -> dict:
        return asdict(self)

    def z_scores(self, m: IdiffMoments) -> dict[str, float]:
        def z(x, ref, se):
            return (x - ref) / se if se > 0 else (0.0 if x == ref else math.inf)

        return {
            "mean": z(self.mean, m.mean, self.mean_se),
            "var_total": z(self.var_total, m.var_total, self.var_total_se),
            "var_quantum": z(self.var_quantum, m.var_quantum, self.var_quantum_se),
            "var_classical": z(self.var_classical, m.var_classical, self.var_classical_se),
        }


def _var_se(x: np.ndarray) -> tuple[float, float]:
    """Sample variance and its large-sample standard error from the 4th moment."""
    d = x - x.mean()
    m2 = float(np.mean(d**2))
    m4 = float(np.mean(d**4))
    n = len(x)
    return m2 * n / (n - 1), math.sqrt(max(0.0, m4 - m2**2) / n)


def mc_classical_oracle(
    cfg: CoherentConfig,
    samples: int = 1_000_000,
    seed: int = 0,
    *,
    four_arm: bool = False,
    chunk: int = 100_000,
    workers: int = 1,
) -> MonteCarloStats:
    """Brute-force statistics of the intensity difference.

    Draws reference phases from the bivariate Gaussian, then Poisson photon
    counts with the corresponding means, and estimates:

    * the mean and total variance of ``I = N1 - N2`` (plus ``N3 - N4`` for the
      four-arm scheme);
    * the phase-noise part as the variance of the conditional mean ``E[I | phi]``;
    * the shot-noise part as the mean of ``(I - E[I | phi])^2``.

    Chunk ``k`` uses the random stream ``(seed, k)``, so results do not
    depend on ``workers``.
    """
    if samples < 10_000:
        raise ValidationError("the oracle needs at least 10^4 samples")
    n_chunks = -(-samples // chunk)

    def run(k: int):
        n = min(chunk, samples - k * chunk)
        rng = _random.stream(seed, k)
        phi1, phi2 = cfg.noise.sample(n, rng)
        if four_arm:
            m1, m2, m3, m4 = mean_counts_four_arm(cfg, phi1, phi2)
            cond = m1 - m2 + m3 - m4
            i = rng.poisson(m1) - rng.poisson(m2) + rng.poisson(m3) - rng.poisson(m4)
        else:
            m1, m2, _ = mean_counts_three_arm(cfg, phi1, phi2)
            cond = m1 - m2
            i = rng.poisson(m1) - rng.poisson(m2)
        return i.astype(float), cond

    parts = _random.map_ordered(run, n_chunks, workers)
    i = np.concatenate([p[0] for p in parts])
    cond = np.concatenate([p[1] for p in parts])
    n = len(i)
    resid2 = (i - cond) ** 2
    var_t, var_t_se = _var_se(i)
    var_c, var_c_se = _var_se(cond)
    return MonteCarloStats(
        samples=n,
        seed=int(seed),
        mean=float(i.mean()),
        mean_se=float(i.std(ddof=1) / math.sqrt(n)),
        var_total=var_t,
        var_total_se=var_t_se,
        var_quantum=float(resid2.mean()),
        var_quantum_se=float(resid2.std(ddof=1) / math.sqrt(n)),
        var_classical=var_c,
        var_classical_se=var_c_se,
    )
