"""Small dense Hermitian-matrix numerics: validation, spectra, entropies, norms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    validation: float = 1e-10
    entropy_clip: float = 1e-12
    sld_kernel: float = 1e-10
    cp_boundary: float = 1e-12
    degenerate: float = 1e-14


TOL = Tolerances()


def _as_square(a, name="matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def check_hermitian(op, tol: float = TOL.hermitian) -> np.ndarray:
    """Return ``op`` as a read-only complex array after checking Hermiticity.

    Raises ValidationError naming the first entry pair ``(j, k)`` whose
    deviation ``|a[j, k] - conj(a[k, j])|`` exceeds ``tol``.
    """
    a = _as_square(op, "operator")
    dev = np.abs(a - a.conj().T)
    if dev.max() > tol:
        j, k = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise ValidationError(
            f"operator is not Hermitian: entries ({j}, {k}) and ({k}, {j}) "
            f"differ by {dev[j, k]:.3e} > {tol:g}"
        )
    return _frozen(a)


def check_density_matrix(rho, tol: float = TOL.validation) -> np.ndarray:
    """Validate a density matrix (Hermitian, unit trace, PSD) and return it read-only."""
    a = check_hermitian(rho)
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix trace is {tr!r}, expected 1 within {tol:g}")
    lam_min = np.linalg.eigvalsh(a)[0]
    if lam_min < -tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return a


def is_density_matrix(rho, tol: float = TOL.validation) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValidationError:
        return False
    return True


def eigh(op) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian operator.

    Returns ascending real eigenvalues and a unitary whose columns are the
    corresponding eigenvectors.
    """
    a = check_hermitian(op)
    # symmetrize away the sub-tolerance anti-Hermitian part
    lam, vec = np.linalg.eigh(0.5 * (a + a.conj().T))
    return lam, vec


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def _entropy_of_spectrum(lam: np.ndarray) -> float:
    lam = np.clip(np.real(lam), 0.0, 1.0)
    lam = lam[lam > TOL.entropy_clip]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def vn_entropy(rho) -> float:
    """Von Neumann entropy in bits."""
    a = check_density_matrix(rho)
    return _entropy_of_spectrum(np.linalg.eigvalsh(a))


def shannon_entropy(p) -> float:
    """Shannon entropy of a probability vector in bits."""
    return _entropy_of_spectrum(np.asarray(p, dtype=float))


def purity(rho) -> float:
    a = check_density_matrix(rho)
    return float(np.real(np.trace(a @ a)))


def trace_norm(op) -> float:
    """Sum of singular values of any (possibly rectangular) matrix."""
    a = np.asarray(op, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(np.atleast_2d(a), compute_uv=False)))


def _check_partition(blocks: Sequence[Sequence[int]], dim: int) -> list[list[int]]:
    flat = [int(i) for b in blocks for i in b]
    if any(len(b) == 0 for b in blocks):
        raise ValidationError("partition contains an empty block")
    if sorted(flat) != list(range(dim)):
        raise ValidationError(
            f"blocks {blocks!r} do not partition indices 0..{dim - 1} exactly once"
        )
    return [[int(i) for i in b] for b in blocks]


def pinch_blocks(rho, blocks: Sequence[Sequence[int]]) -> np.ndarray:
    """Zero every entry coupling two different blocks of a partition.

    Indices are zero-based: ``[[0], [1, 2]]`` keeps the lower-right 2x2 block
    and the (0, 0) entry of a qutrit state.
    """
    a = check_density_matrix(rho)
    parts = _check_partition(blocks, a.shape[0])
    label = np.empty(a.shape[0], dtype=int)
    for n, b in enumerate(parts):
        label[b] = n
    out = np.where(label[:, None] == label[None, :], a, 0.0)
    return _frozen(out)


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced state on the subsystems listed in ``keep``."""
    a = _as_square(rho, "state")
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != a.shape[0]:
        raise ValidationError(f"dims {dims} do not match matrix size {a.shape[0]}")
    n = len(dims)
    keep = sorted(int(k) for k in keep)
    traced = [i for i in range(n) if i not in keep]
    t = a.reshape(dims + dims)
    # trace pairs from the highest axis down so earlier axis numbers stay valid
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return _frozen(t.reshape(d_keep, d_keep))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble random state, mostly for tests and property checks."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
