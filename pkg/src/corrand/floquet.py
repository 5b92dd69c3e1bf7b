"""Vertical sine transform, fiber operators, and the spine spectral density.

On a Dirichlet box the vertical sine modes diagonalize the spine hopping
exactly, so the transform is unitary in the discrete normalization and the
2D spine model block-diagonalizes into tridiagonal fibers
h_p = (1D chain) + (omega(n1) - 2*gamma*cos(p) at n1=0).  The corner spectral
density follows from the boundary values of Sigma(E) = -1/G(0,0;E):

    f(E) = (1/(pi*gamma)) * 1{|Sigma| < 2 gamma} * sqrt(1 - Sigma^2/(4 gamma^2)).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .greens import NumericsError, halfline_cf, halfline_spectral_measure
from . import boole


def p_grid(rows: int) -> np.ndarray:
    """Dirichlet sine nodes p_k = pi k / (rows + 1), k = 1..rows."""
    return np.pi * np.arange(1, rows + 1) / (rows + 1)


def sine_kernel(rows: int) -> np.ndarray:
    """Kernel K[k, n2] = sqrt(2/pi) sin(p_k (n2 + 1))."""
    p = p_grid(rows)
    n2 = np.arange(rows)
    return np.sqrt(2.0 / np.pi) * np.sin(np.outer(p, n2 + 1))


def sine_transform(psi: np.ndarray) -> np.ndarray:
    """Transform (n1, n2) -> (n1, p_k) along the vertical axis."""
    psi = np.asarray(psi)
    return psi @ sine_kernel(psi.shape[1]).T


def inverse_sine_transform(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g)
    rows = g.shape[1]
    dp = np.pi / (rows + 1)
    return dp * (g @ sine_kernel(rows))


def transformed_norm(g: np.ndarray) -> float:
    """Norm on the transformed side: Riemann weight dp = pi/(rows+1) is exact."""
    rows = np.asarray(g).shape[1]
    dp = np.pi / (rows + 1)
    return float(np.sqrt(dp * np.sum(np.abs(g) ** 2)))


@dataclass(frozen=True)
class FiberOperator:
    """Tridiagonal fiber: 1D chain with boundary shift -2*gamma*cos(p) at site 0."""

    p: float
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        m += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return m


def fiber(omegas: np.ndarray, gamma: float, p: float, cols: int) -> FiberOperator:
    om = np.asarray(omegas, dtype=float)
    if om.size < cols:
        raise ValueError("not enough columns sampled")
    d = om[:cols].copy()
    d[0] -= 2.0 * gamma * np.cos(p)
    return FiberOperator(p=float(p), diag=d, offdiag=-np.ones(cols - 1))


def sigma_scan(
    omegas: np.ndarray,
    e_grid: np.ndarray,
    eta: float,
    length: int | None = None,
    richardson: bool = False,
) -> np.ndarray:
    """Sigma(E + i eta) = -1/G(0,0; E + i eta) over an energy grid.

    With ``richardson`` the eta and eta/2 evaluations are combined to cancel
    the O(eta^2) error of the real part near the real axis.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    e = np.asarray(e_grid, dtype=float)
    sig = halfline_cf(omegas, e + 1j * eta, length).sigma
    if not richardson:
        return sig
    sig_half = halfline_cf(omegas, e + 0.5j * eta, length).sigma
    return (4.0 * sig_half - sig) / 3.0


@dataclass
class SpectralDensity:
    """Sampled corner density with its regularization and coupling."""

    grid: np.ndarray
    density: np.ndarray
    eta: float
    gamma: float

    def mass(self) -> float:
        return float(np.trapezoid(self.density, self.grid))

    def support_measure(self) -> float:
        """Length of {density > 0}, midpoint convention at the edges."""
        pos = self.density > 0
        if not np.any(pos):
            return 0.0
        e = self.grid
        total = 0.0
        idx = np.flatnonzero(pos)
        # split into runs of consecutive grid indices
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [idx.size - 1]])
        for a, b in zip(starts, ends):
            i0, i1 = idx[a], idx[b]
            left = e[i0] if i0 == 0 else 0.5 * (e[i0 - 1] + e[i0])
            right = e[i1] if i1 == e.size - 1 else 0.5 * (e[i1] + e[i1 + 1])
            total += right - left
        return float(total)


def spectral_density(
    omegas: np.ndarray,
    gamma: float,
    e_grid: np.ndarray,
    eta: float,
    length: int | None = None,
    richardson: bool = True,
) -> SpectralDensity:
    """Corner density of the spine model on a grid, from the Sigma formula."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    sig = np.real(sigma_scan(omegas, e_grid, eta, length, richardson=richardson))
    x = sig / (2.0 * gamma)
    inside = np.abs(x) < 1.0
    dens = np.where(inside, np.sqrt(np.clip(1.0 - x * x, 0.0, 1.0)) / (np.pi * gamma), 0.0)
    return SpectralDensity(grid=np.asarray(e_grid, float), density=dens, eta=eta, gamma=gamma)


def band_adapted_grid(
    omegas: np.ndarray,
    gamma: float,
    length: int | None = None,
    points_per_band: int = 128,
    pad: float = 1.0,
    pad_points: int = 32,
) -> np.ndarray:
    """Energy grid resolving every support band of the corner density.

    The bands are the level-set intervals {|omega(0) - E - F(E)| < 2 gamma}
    of the horizontal half-line's corner Borel transform F; their endpoints
    are found exactly by branch bisection and each band gets a uniform
    sub-grid, so trapezoid masses converge fast despite ~length bands.
    """
    om = np.asarray(omegas, dtype=float)
    last = om.size - 1 if length is None else int(length)
    m = halfline_spectral_measure(om[1 : last + 1])
    v = boole.level_roots(m, om[0] - 2.0 * gamma)
    w = boole.level_roots(m, om[0] + 2.0 * gamma)
    pieces = [np.linspace(a, b, points_per_band + 1) for a, b in zip(v, w)]
    lo = v[0] - pad
    hi = w[-1] + pad
    pieces.append(np.linspace(lo, v[0], pad_points, endpoint=False))
    pieces.append(np.linspace(w[-1], hi, pad_points + 1)[1:])
    grid = np.unique(np.concatenate(pieces))
    return grid


class Classification(str, Enum):
    RECURRENT = "recurrent"
    TRANSIENT = "transient"
    OUTSIDE = "outside"


def classify(e: float, omega_max: float, density: float, threshold: float = 0.0) -> Classification:
    """Label an energy: the window [-2, 2+omega_max) is recurrent spectrum;
    outside it, positive density marks transient spectrum."""
    if -2.0 <= e < 2.0 + omega_max:
        return Classification.RECURRENT
    if density > threshold:
        return Classification.TRANSIENT
    return Classification.OUTSIDE


def classify_density(
    sd: SpectralDensity, omega_max: float, threshold: float | None = None
) -> list[Classification]:
    """Per-grid-point labels; default threshold is 10x the density noise floor."""
    if threshold is None:
        threshold = 10.0 * 1e-9 / (np.pi * sd.gamma)
    return [classify(e, omega_max, d, threshold) for e, d in zip(sd.grid, sd.density)]


def critical_gamma(
    omegas: np.ndarray, eta: float, length: int | None = None, omega_max: float | None = None
) -> float:
    """Critical spine coupling |Sigma(E_c)| / 2 at the band edge E_c = 2 + omega_max.

    Above E_c the transient window {|Sigma| < 2 gamma} is nonempty exactly
    when gamma exceeds this value.
    """
    om = np.asarray(omegas, dtype=float)
    if omega_max is None:
        omega_max = float(om.max())
    e_c = 2.0 + float(omega_max)
    sig = sigma_scan(om, np.array([e_c]), eta, length, richardson=True)[0]
    val = abs(np.real(sig)) / 2.0
    if not np.isfinite(val) or val < 1e-12:
        raise NumericsError(f"Sigma({e_c}) = {sig} is at the numerical floor")
    return float(val)


def transient_mass(
    omegas: np.ndarray,
    gamma: float,
    omega_max: float,
    length: int | None = None,
    eta: float = 1e-9,
    points: int = 800,
) -> float:
    """Integrated density above the recurrent window's edge E_c = 2 + omega_max.

    Sigma is increasing with slope >= 1 above the finite-volume spectrum, so
    the transient band, when present, is a single interval (E_c, e*) with
    Sigma(e*) = 2 gamma; e* is bracketed in (E_c, E_c + 2 gamma].
    """
    om = np.asarray(omegas, dtype=float)
    e_c = 2.0 + float(omega_max)

    def sig(e: float) -> float:
        return float(np.real(sigma_scan(om, np.array([e]), eta, length)[0]))

    if sig(e_c) >= 2.0 * gamma:
        return 0.0
    lo, hi = e_c, e_c + 2.0 * gamma + 1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sig(mid) < 2.0 * gamma:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * max(1.0, abs(hi)):
            break
    grid = np.linspace(e_c, lo, points)
    sd = spectral_density(om, gamma, grid, eta, length, richardson=False)
    return sd.mass()
