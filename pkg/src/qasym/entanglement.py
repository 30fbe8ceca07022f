"""Maximally correlated two-qutrit states obtained by dephasing one half of
sqrt(q)|00> + sqrt((1-q)/2)(|11> + |22>), and their distillable entanglement.

For states of the form sum_ij alpha_ij |ii><jj| the distillable entanglement
and the relative entropy of entanglement coincide and equal
S(rho_B) - S(rho_AB), which in turn equals the relative entropy of coherence
of the qutrit state alpha.  Only this closed form is implemented; other
state families need a convex optimisation over separable states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import as_params, cp_check, dephase
from .qmath import (
    TOL,
    check_density_matrix,
    partial_trace,
    shannon_entropy,
    vn_entropy,
)


@dataclass(frozen=True)
class MaxCorrState:
    alpha: np.ndarray
    density: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha = check_density_matrix(self.alpha)
        d = alpha.shape[0]
        rho = np.zeros((d * d, d * d), dtype=complex)
        diag = np.arange(d) * (d + 1)  # flat index of |ii>
        rho[np.ix_(diag, diag)] = alpha
        rho.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "density", rho)

    @property
    def dim(self) -> int:
        return self.alpha.shape[0]

    def reduced(self, keep: str = "B") -> np.ndarray:
        return partial_trace(self.density, [self.dim, self.dim], [1 if keep == "B" else 0])


def mc_state(q: float, params) -> MaxCorrState:
    return MaxCorrState(dephase(q, as_params(params)))


def distillable_entanglement(state: MaxCorrState) -> float:
    """S(rho_B) - S(rho_AB) in ebits, evaluated on the explicit 9x9 state."""
    rho_b = state.reduced("B")
    # entries of the reduced state below the clip are roundoff, not coherences
    rho_b = np.where(np.abs(rho_b) < TOL.degenerate, 0.0, rho_b)
    return max(0.0, vn_entropy(rho_b) - vn_entropy(state.density))


def rel_entropy_coherence(rho) -> float:
    """S(diag rho) - S(rho) in bits, in the computational basis."""
    a = check_density_matrix(rho)
    return max(0.0, shannon_entropy(np.real(np.diag(a))) - vn_entropy(a))


def optimize_q_entanglement(params, grid_resolution: float = 1e-3) -> tuple[float, float]:
    """Grid search of the probe weight q maximizing E_d at fixed channel.

    Ties are broken towards the smallest q.  Optimality is only claimed
    within this probe family.
    """
    p = as_params(params)
    n = int(round(1 / grid_resolution))
    qs = np.linspace(0.0, 1.0, n + 1)
    ed = np.array([rel_entropy_coherence(dephase(q, p)) for q in qs])
    k = int(np.argmax(ed))
    return float(qs[k]), float(ed[k])


@dataclass(frozen=True)
class KappaSweep:
    q: float
    eta: float
    kappas: np.ndarray
    ed: np.ndarray
    slopes: np.ndarray
    gain_intervals: list[tuple[float, float]]
    kappa_at_min: float | None

    @property
    def empty(self) -> bool:
        return len(self.kappas) < 2

    @property
    def has_gain(self) -> bool:
        return bool(self.gain_intervals)


def kappa_gain_region(q: float, eta: float, kappas=None, n: int = 401) -> KappaSweep:
    """Sweep E_d over the physical kappa range at fixed (q, eta).

    ``slopes[i]`` is the forward difference dE_d/dkappa on
    ``[kappas[i], kappas[i+1]]``.  ``gain_intervals`` are maximal runs of
    intervals with ``kappa > 0`` and negative slope, i.e. where lowering
    kappa raises the entanglement.  ``kappa_at_min`` is the grid minimiser
    of E_d over the sweep.
    """
    lo = 2 * eta**2 - 1
    if kappas is None:
        kappas = np.linspace(lo, 1.0, n) if 1.0 - lo > TOL.cp_boundary else np.array([1.0])
    kappas = np.asarray([k for k in np.asarray(kappas, float) if cp_check(eta, k)])
    ed = np.array([rel_entropy_coherence(dephase(q, (eta, k))) for k in kappas])
    slopes = np.diff(ed) / np.diff(kappas) if len(kappas) > 1 else np.array([])

    intervals: list[tuple[float, float]] = []
    start = None
    for i, s in enumerate(slopes):
        gaining = s < -1e-12 and kappas[i] > 0
        if gaining and start is None:
            start = kappas[i]
        if not gaining and start is not None:
            intervals.append((float(start), float(kappas[i])))
            start = None
    if start is not None:
        intervals.append((float(start), float(kappas[len(slopes)])))

    k_min = float(kappas[int(np.argmin(ed))]) if len(kappas) > 1 else None
    return KappaSweep(float(q), float(eta), kappas, ed, slopes, intervals, k_min)
