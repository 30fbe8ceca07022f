"""Three-arm single-photon interferometer: click model, simulation and estimation.

Detector 1 and 2 see the signal arm interfered with the symmetric combination
of the two reference arms; detector 3 sees the antisymmetric combination of
the reference arms only.  With intrinsic visibility ``v`` the click
probabilities at phase ``theta`` around a working point ``theta0`` are::

    p3 = (1 - q) (1 - v kappa) / 2
    f  = v eta sqrt(q (1 - q)) sin(theta - theta0)
    p1 = (1 - p3) / 2 + f,    p2 = (1 - p3) / 2 - f
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional

import numpy as np

from . import _random
from .channel import (
    DephasingParams,
    Gaussian,
    Kicks,
    NoiseModel,
    as_params,
    multiplier_matrix,
)
from .errors import DegenerateEstimateError, ValidationError
from .metrology import FisherReport, PhaseEncoding, classical_fi, encode_phase, qfi_closed
from .qmath import TOL, check_density_matrix, ket_to_dm

Normalization = Literal["fringe", "visibility"]


def _noise_to_dict(noise: Optional[NoiseModel]) -> Optional[dict]:
    if noise is None:
        return None
    kind = "kicks" if isinstance(noise, Kicks) else "gaussian"
    return {"model": kind, **asdict(noise)}


def _noise_from_dict(d: Optional[dict]) -> Optional[NoiseModel]:
    if d is None:
        return None
    d = dict(d)
    kind = d.pop("model")
    return Kicks(**d) if kind == "kicks" else Gaussian(**d)


@dataclass(frozen=True)
class InterferometerConfig:
    q: float
    params: DephasingParams
    v: float = 1.0
    theta0: float = 0.0
    noise: Optional[NoiseModel] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", as_params(self.params))
        if not 0.0 <= self.q <= 1.0:
            raise ValidationError(f"q must lie in [0, 1], got {self.q}")
        if not 0.0 <= self.v <= 1.0:
            raise ValidationError(f"visibility v must lie in [0, 1], got {self.v}")

    @classmethod
    def from_noise(cls, q: float, noise: NoiseModel, v: float = 1.0, theta0: float = 0.0):
        return cls(q, as_params(noise), v, theta0, noise)

    @property
    def eta(self) -> float:
        return self.params.eta

    @property
    def kappa(self) -> float:
        return self.params.kappa

    @property
    def fringe_slope(self) -> float:
        """v eta sqrt(q (1-q)): amplitude of the fringe term f."""
        return self.v * self.eta * math.sqrt(self.q * (1 - self.q))

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "eta": self.eta,
            "kappa": self.kappa,
            "v": self.v,
            "theta0": self.theta0,
            "noise": _noise_to_dict(self.noise),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InterferometerConfig":
        return cls(
            d["q"],
            DephasingParams(d["eta"], d["kappa"]),
            d.get("v", 1.0),
            d.get("theta0", 0.0),
            _noise_from_dict(d.get("noise")),
        )


@dataclass(frozen=True)
class OutcomeProbabilities:
    p1: float
    p2: float
    p3: float
    f_theta: float = 0.0

    def __post_init__(self):
        ps = (self.p1, self.p2, self.p3)
        if min(ps) < -TOL.validation or max(ps) > 1 + TOL.validation:
            raise ValidationError(f"probabilities out of range: {ps}")
        if abs(sum(ps) - 1) > 1e-12:
            raise ValidationError(f"probabilities sum to {sum(ps)!r}")

    def __iter__(self):
        return iter((self.p1, self.p2, self.p3))

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])


def outcome_probs(cfg: InterferometerConfig, theta: float) -> OutcomeProbabilities:
    p3 = 0.5 * (1 - cfg.q) * (1 - cfg.v * cfg.kappa)
    f = cfg.fringe_slope * math.sin(theta - cfg.theta0)
    half = (1 - p3) / 2
    return OutcomeProbabilities(half + f, half - f, p3, f)


def outcome_prob_derivatives(cfg: InterferometerConfig, theta: float) -> tuple[float, float, float]:
    df = cfg.fringe_slope * math.cos(theta - cfg.theta0)
    return df, -df, 0.0


def fisher_information(cfg: InterferometerConfig, theta: Optional[float] = None) -> FisherReport:
    """Classical FI of the three-detector measurement (default: at the working point)."""
    theta = cfg.theta0 if theta is None else theta
    return classical_fi(outcome_probs(cfg, theta), outcome_prob_derivatives(cfg, theta))


def optimal_projectors(theta0: float = 0.0) -> np.ndarray:
    """Rank-one projectors of the three detectors, stacked as shape (3, 3, 3).

    Detector 1/2 vectors are |0>/sqrt(2) +- i e^{i theta0} (|1> + |2>)/2 and
    detector 3 is (|1> - |2>)/sqrt(2).  The phase sign is chosen so that the
    fringe goes as sin(theta - theta0) for the encoding exp(-i theta G).
    """
    ph = 1j * np.exp(1j * theta0) / 2
    r = 1 / math.sqrt(2)
    kets = [
        np.array([r, ph, ph]),
        np.array([r, -ph, -ph]),
        np.array([0.0, r, -r], dtype=complex),
    ]
    return np.stack([ket_to_dm(k) for k in kets])


def born_probabilities(rho, theta: float, theta0: float = 0.0, v: float = 1.0) -> np.ndarray:
    """Click probabilities of a qutrit state by the Born rule.

    Imperfect interference ``v`` is modelled as a uniform loss of all
    coherences by the factor ``v`` before the phase is imprinted.
    """
    a = check_density_matrix(rho) * multiplier_matrix(v, v)
    a = encode_phase(a, PhaseEncoding(theta))
    return np.real(np.einsum("kij,ji->k", optimal_projectors(theta0), a))


def visibility(cfg: InterferometerConfig) -> float:
    """Fringe contrast of detector 1 between theta0 +- pi/2."""
    num = 4 * cfg.fringe_slope
    den = 1 + cfg.q + cfg.v * cfg.kappa * (1 - cfg.q)
    return num / den if den > 0 else 0.0


def fringe_visibility(cfg: InterferometerConfig) -> float:
    """Same contrast computed from the click probabilities themselves."""
    hi = outcome_probs(cfg, cfg.theta0 + math.pi / 2).p1
    lo = outcome_probs(cfg, cfg.theta0 - math.pi / 2).p1
    return (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0


@dataclass(frozen=True)
class CountRecord:
    n1: int
    n2: int
    n3: int
    theta: float
    config: Optional[dict] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if min(self.n1, self.n2, self.n3) < 0:
            raise ValidationError("counts must be non-negative")

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def N(self) -> int:
        return self.n1 + self.n2 + self.n3

    def to_dict(self) -> dict:
        return {"theta": self.theta, "counts": list(self.counts), "config": self.config, "seed": self.seed}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "CountRecord":
        n1, n2, n3 = (int(n) for n in d["counts"])
        return cls(n1, n2, n3, float(d["theta"]), d.get("config"), d.get("seed"))

    @classmethod
    def from_json(cls, s: str) -> "CountRecord":
        return cls.from_dict(json.loads(s))


# Detector order used when mapping uniforms to clicks: 2, 3, 1.  The estimate
# is then monotone in the uniform, so runs sharing a seed are quantile-coupled
# and differences between configurations are resolved with little noise.
_DRAW_ORDER = np.array([1, 2, 0])


def _outcome_indices(probs, u: np.ndarray) -> np.ndarray:
    """Zero-based detector index for each uniform in ``u``."""
    probs = np.asarray(probs, dtype=float)
    return _DRAW_ORDER[_random.categorical_inverse_cdf(probs[_DRAW_ORDER], u)]


def _draw_counts(probs, n: int, rng: np.random.Generator) -> np.ndarray:
    return np.bincount(_outcome_indices(probs, rng.random(n)), minlength=3)


def _kick_setting_probs(cfg: InterferometerConfig, phi1: float, phi2: float, theta: float) -> np.ndarray:
    psi = np.array(
        [math.sqrt(cfg.q), math.sqrt((1 - cfg.q) / 2) * np.exp(-1j * phi1),
         math.sqrt((1 - cfg.q) / 2) * np.exp(-1j * phi2)]
    )
    p = born_probabilities(ket_to_dm(psi), theta, cfg.theta0, cfg.v)
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _largest_remainder(n: int, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    raw = n * w / w.sum()
    alloc = np.floor(raw).astype(int)
    short = n - alloc.sum()
    order = np.argsort(-(raw - alloc), kind="stable")
    alloc[order[:short]] += 1
    return alloc


def sample_counts(
    cfg: InterferometerConfig,
    theta: float,
    N: int,
    seed: int,
    mode: Literal["direct", "kicks"] = "direct",
) -> CountRecord:
    """Simulate ``N`` detected photons at phase ``theta``.

    ``mode="direct"`` draws from the averaged click distribution.
    ``mode="kicks"`` mimics measuring each of the four kick settings
    separately: ``N`` is split over the settings in proportion to their
    probabilities (largest remainder) and each share is drawn from that
    setting's own distribution.
    """
    if N < 1:
        raise ValidationError(f"N must be at least 1, got {N}")
    if mode == "direct":
        counts = _draw_counts(outcome_probs(cfg, theta).as_array(), N, _random.stream(seed))
    elif mode == "kicks":
        if not isinstance(cfg.noise, Kicks):
            raise ValidationError("kick-resolved sampling needs a config built from a Kicks model")
        settings = cfg.noise.outcomes()
        shares = _largest_remainder(N, [w for _, _, w in settings])
        counts = np.zeros(3, dtype=int)
        for k, ((phi1, phi2, _), n) in enumerate(zip(settings, shares)):
            if n:
                p = _kick_setting_probs(cfg, phi1, phi2, theta)
                counts += _draw_counts(p, int(n), _random.stream(seed, k))
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    n1, n2, n3 = (int(c) for c in counts)
    return CountRecord(n1, n2, n3, float(theta), cfg.to_dict(), int(seed))


def estimator_scale(cfg: InterferometerConfig, normalization: Normalization = "fringe") -> float:
    """Magnitude of the estimate returned for a click in detector 1 or 2.

    ``"fringe"`` uses 1 / (2 v eta sqrt(q(1-q))), which makes the estimator
    locally unbiased and efficient.  ``"visibility"`` replaces the intrinsic
    ``v`` by the fringe contrast from :func:`visibility`; that variant is
    biased (its slope at theta0 is v / contrast) and is kept for comparison.
    """
    if not 0 < cfg.q < 1 or cfg.eta <= 0 or cfg.v <= 0:
        raise DegenerateEstimateError(
            f"estimator undefined for q={cfg.q}, eta={cfg.eta}, v={cfg.v}"
        )
    base = cfg.eta * math.sqrt(cfg.q * (1 - cfg.q))
    if normalization == "fringe":
        return 1 / (2 * cfg.v * base)
    if normalization == "visibility":
        return 1 / (2 * visibility(cfg) * base)
    raise ValueError(f"unknown normalization {normalization!r}")


def locally_unbiased_estimate(outcome, cfg: InterferometerConfig, normalization: Normalization = "fringe"):
    """Single-shot estimate of theta - theta0 for detector outcome 1, 2 or 3.

    Accepts a scalar outcome or an integer array of outcomes; the estimate
    is ``theta0`` plus (+a, -a, 0) respectively.
    """
    a = estimator_scale(cfg, normalization)
    x = np.asarray(outcome)
    if not np.all(np.isin(x, (1, 2, 3))):
        raise ValidationError("outcomes must be 1, 2 or 3")
    est = cfg.theta0 + np.select([x == 1, x == 2], [a, -a], 0.0)
    return float(est) if est.ndim == 0 else est


def estimator_moments(
    cfg: InterferometerConfig, theta: float, normalization: Normalization = "fringe"
) -> tuple[float, float]:
    """Exact single-shot mean and variance of the estimator at ``theta``."""
    a = estimator_scale(cfg, normalization)
    p = outcome_probs(cfg, theta)
    mean = cfg.theta0 + a * (p.p1 - p.p2)
    second = a**2 * (p.p1 + p.p2)
    return mean, second - (mean - cfg.theta0) ** 2


@dataclass(frozen=True)
class EstimationReport:
    """Bootstrap estimation summary.

    ``variance`` is the spread of the per-set mean estimates and
    ``precision = 1 / (set_size * variance)``; ``precision_stderr`` is the
    normal-theory standard error of that precision over ``n_sets`` sets.
    """

    mean: float
    variance: float
    precision: float
    precision_stderr: float
    n_sets: int
    set_size: int
    seed: int
    counts: tuple[int, int, int]
    fisher: Optional[float] = None
    qfi: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["counts"] = list(self.counts)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def bootstrap_precision(
    counts: CountRecord,
    n_sets: int,
    set_size: int,
    cfg: InterferometerConfig,
    seed: int,
    *,
    normalization: Normalization = "fringe",
    workers: int = 1,
) -> EstimationReport:
    """Resample measured outcomes with replacement and measure estimator spread.

    Each of the ``n_sets`` sets draws ``set_size`` outcomes from the empirical
    click frequencies of ``counts`` (inverse CDF on the set's own random
    stream, keyed by ``(seed, set_index)``) and records the mean single-shot
    estimate.  Results do not depend on ``workers``.
    """
    if counts.N == 0:
        raise DegenerateEstimateError("empty count record")
    if n_sets < 2 or set_size < 1:
        raise ValidationError("need n_sets >= 2 and set_size >= 1")
    freq = np.asarray(counts.counts, dtype=float) / counts.N
    a = estimator_scale(cfg, normalization)
    values = np.array([a, -a, 0.0])

    def one_set(i: int) -> float:
        u = _random.stream(seed, i).random(set_size)
        n = np.bincount(_outcome_indices(freq, u), minlength=3)
        return float(values @ n) / set_size

    means = np.array(_random.map_ordered(one_set, n_sets, workers))
    var = float(np.var(means, ddof=1))
    if var <= 0:
        raise DegenerateEstimateError("estimator variance vanishes: outcomes are deterministic")
    precision = 1.0 / (set_size * var)
    fi = fisher_information(cfg)
    return EstimationReport(
        mean=cfg.theta0 + float(means.mean()),
        variance=var,
        precision=precision,
        precision_stderr=precision * math.sqrt(2.0 / (n_sets - 1)),
        n_sets=int(n_sets),
        set_size=int(set_size),
        seed=int(seed),
        counts=counts.counts,
        fisher=fi.value,
        qfi=qfi_closed(cfg.q, cfg.params).value,
    )
