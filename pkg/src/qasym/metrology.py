"""Phase encoding, SLD / quantum Fisher information and asymmetry measures."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .channel import as_params, dephase
from .errors import DivergentInformation, DomainError, ValidationError
from .qmath import (
    TOL,
    check_density_matrix,
    check_hermitian,
    eigh,
    pinch_blocks,
    trace_norm,
    vn_entropy,
)

#: Generator with the signal level at energy 1 and a degenerate zero-energy pair.
DEFAULT_GENERATOR = np.diag([1.0, 0.0, 0.0]).astype(complex)

Method = Literal["closed_form", "sld_numeric", "classical_from_probs"]


@dataclass(frozen=True)
class FisherReport:
    value: float
    method: Method

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class PhaseEncoding:
    theta: float = 0.0
    generator: np.ndarray = field(default_factory=lambda: DEFAULT_GENERATOR.copy())

    @property
    def unitary(self) -> np.ndarray:
        """exp(-i theta G), built from the spectral decomposition of G."""
        lam, vec = eigh(self.generator)
        return (vec * np.exp(-1j * self.theta * lam)) @ vec.conj().T


def encode_phase(rho, enc: PhaseEncoding) -> np.ndarray:
    a = check_density_matrix(rho)
    g = check_hermitian(enc.generator)
    if g.shape != a.shape:
        raise ValidationError(f"generator shape {g.shape} does not match state shape {a.shape}")
    u = enc.unitary
    return u @ a @ u.conj().T


def phase_derivative(rho, generator=DEFAULT_GENERATOR) -> np.ndarray:
    """d/dtheta of the encoded state: -i [G, rho]."""
    a = np.asarray(rho, dtype=complex)
    g = np.asarray(generator, dtype=complex)
    return -1j * (g @ a - a @ g)


def sld(rho, drho) -> np.ndarray:
    """Symmetric logarithmic derivative L solving 2 drho = L rho + rho L.

    Computed in the eigenbasis of ``rho``; eigenvalue pairs whose sum is below
    ``TOL.sld_kernel`` are treated as kernel directions and contribute zero.
    """
    a = check_density_matrix(rho)
    d = check_hermitian(drho, tol=TOL.validation)
    if abs(np.trace(d)) > TOL.validation:
        raise ValidationError(f"drho must be traceless, trace is {np.trace(d):.3e}")
    lam, vec = eigh(a)
    d_eig = vec.conj().T @ d @ vec
    denom = lam[:, None] + lam[None, :]
    mask = denom > TOL.sld_kernel
    l_eig = np.zeros_like(d_eig)
    l_eig[mask] = 2 * d_eig[mask] / denom[mask]
    return vec @ l_eig @ vec.conj().T


def qfi_numeric(rho, generator=DEFAULT_GENERATOR, theta: float = 0.0) -> FisherReport:
    """QFI of ``rho`` for the phase imprinted by ``generator``, via the SLD."""
    rho_t = encode_phase(rho, PhaseEncoding(theta, np.asarray(generator, dtype=complex)))
    drho = phase_derivative(rho_t, generator)
    L = sld(rho_t, drho)
    value = float(np.real(np.trace(drho @ L)))
    return FisherReport(max(0.0, value), "sld_numeric")


def qfi_closed(q: float, params) -> FisherReport:
    """8 eta^2 q (1-q) / (kappa + 1 + q (1 - kappa)) for the dephased probe."""
    p = as_params(params)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    den = p.kappa + 1 + q * (1 - p.kappa)
    if den <= 0:
        # only q = 0 at kappa = -1, where the numerator vanishes as well
        return FisherReport(0.0, "closed_form")
    return FisherReport(8 * p.eta**2 * q * (1 - q) / den, "closed_form")


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if kappa < -1.0 or kappa > 1.0 + TOL.cp_boundary:
        raise DomainError(f"kappa must lie in [-1, 1], got {kappa}")
    if kappa == -1.0:
        warnings.warn("kappa = -1: optimal probe degenerates to q -> 0", RuntimeWarning, stacklevel=3)
    return min(kappa, 1.0)


def q_opt(kappa: float) -> float:
    """Signal weight q maximizing the QFI at a given kappa.

    Written as sqrt(kappa+1) / (sqrt(2) + sqrt(kappa+1)), which equals
    1 / (sqrt(2/(kappa+1)) + 1) and stays finite at kappa = -1 (limit 0).
    """
    s = math.sqrt(_check_kappa(kappa) + 1)
    return s / (math.sqrt(2) + s)


def qfi_max(params) -> float:
    """QFI at the optimal probe, 8 eta^2 / (sqrt(kappa+1) + sqrt(2))^2.

    This is the factored form of 8 eta^2 (kappa - 2 sqrt(2) sqrt(kappa+1) + 3) / (kappa-1)^2;
    the factoring removes the 0/0 at kappa = 1, where it gives eta^2.
    """
    p = as_params(params)
    s = math.sqrt(_check_kappa(p.kappa) + 1)
    return 8 * p.eta**2 / (s + math.sqrt(2)) ** 2


def classical_fi(probs, dprobs) -> FisherReport:
    """Fisher information sum_i dp_i^2 / p_i of a discrete outcome distribution."""
    p = np.asarray(list(probs), dtype=float)
    dp = np.asarray(list(dprobs), dtype=float)
    if p.shape != dp.shape:
        raise ValidationError("probabilities and derivatives differ in length")
    if abs(p.sum() - 1) > TOL.validation or np.any(p < -TOL.validation):
        raise ValidationError(f"not a probability vector: {p}")
    if abs(dp.sum()) > TOL.validation:
        raise ValidationError(f"derivatives must sum to zero, got {dp.sum():.3e}")
    total = 0.0
    for pi, dpi in zip(p, dp):
        if pi < TOL.degenerate:
            if abs(dpi) < TOL.degenerate:
                continue
            raise DivergentInformation(f"outcome with p={pi:.3e} has derivative {dpi:.3e}")
        total += dpi**2 / pi
    return FisherReport(float(total), "classical_from_probs")


def _eigenspace_labels(generator, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues grouped into degenerate blocks: (block energies, labels, eigenvectors)."""
    lam, vec = eigh(generator)
    energies: list[float] = []
    labels = np.empty(len(lam), dtype=int)
    for i, x in enumerate(lam):
        for n, e in enumerate(energies):
            if abs(x - e) <= tol:
                labels[i] = n
                break
        else:
            energies.append(float(x))
            labels[i] = len(energies) - 1
    return np.array(energies), labels, vec


def rel_entropy_asymmetry(rho, generator=DEFAULT_GENERATOR) -> float:
    """S(rho dephased onto the eigenspaces of G) - S(rho), in bits."""
    a = check_density_matrix(rho)
    _, labels, vec = _eigenspace_labels(generator)
    r = vec.conj().T @ a @ vec
    blocks = [list(np.flatnonzero(labels == n)) for n in range(labels.max() + 1)]
    return max(0.0, vn_entropy(pinch_blocks(r, blocks)) - vn_entropy(r))


def modes_asymmetry_norm(rho, generator=DEFAULT_GENERATOR, tol: float = 1e-9) -> float:
    """Sum over nonzero energy gaps w of the trace norm of the mode rho^(w).

    The mode rho^(w) keeps the entries of rho connecting eigenspaces of G whose
    energies differ by w.
    """
    a = check_density_matrix(rho)
    energies, labels, vec = _eigenspace_labels(generator)
    r = vec.conj().T @ a @ vec
    gap = energies[labels][:, None] - energies[labels][None, :]
    modes: list[float] = []
    for g in gap.ravel():
        if abs(g) > tol and not any(abs(g - w) <= tol for w in modes):
            modes.append(float(g))
    return float(sum(trace_norm(np.where(np.abs(gap - w) <= tol, r, 0.0)) for w in modes))


def dephased_probe_qfi_numeric(q: float, params) -> FisherReport:
    """Numeric (SLD-path) QFI of the dephased probe, for cross-checks."""
    return qfi_numeric(dephase(q, params))

