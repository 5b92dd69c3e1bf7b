"""Resolvent entries three ways: sparse solve, continued fraction, closed form.

All evaluations stay strictly in the upper half plane.  Diagonal entries are
Herglotz (positive imaginary part), which both the continued fraction and the
quadratic corner formula rely on to select roots unambiguously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal

from .boole import PointMeasure
from .disorder import Hamiltonian
from .lattice import Vertex, vertex_to_index

ETA_FLOOR = 1e-6  # sparse resolvent conditioning floor on Im z


class NumericsError(RuntimeError):
    """A numerical result violates a structural guarantee (Herglotz, residual)."""


def _check_upper(z: complex, floor: float = 0.0) -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"spectral parameter needs Im z > 0, got {z}")
    if z.imag < floor:
        raise ValueError(f"Im z = {z.imag} is below the conditioning floor {floor}")
    return z


class ResolventSolver:
    """Cached sparse LU of (H - z) for repeated entries at one spectral point."""

    def __init__(self, h: Hamiltonian | sp.spmatrix, z: complex):
        self.z = _check_upper(z, ETA_FLOOR)
        mat = h.matrix if isinstance(h, Hamiltonian) else h
        self.h = h if isinstance(h, Hamiltonian) else None
        n = mat.shape[0]
        shifted = (mat - self.z * sp.identity(n, format="csr")).tocsc()
        self._lu = spla.splu(shifted)
        self._mat = mat
        self._cols: dict[int, np.ndarray] = {}

    def column(self, j: int) -> np.ndarray:
        """Column (H - z)^-1 e_j, i.e. G(., j; z)."""
        if j not in self._cols:
            e = np.zeros(self._mat.shape[0], dtype=complex)
            e[j] = 1.0
            x = self._lu.solve(e)
            res = np.linalg.norm(self._mat @ x - self.z * x - e)
            if not np.isfinite(res) or res > 1e-8 * max(1.0, np.linalg.norm(x)):
                raise NumericsError(f"sparse resolvent solve residual {res:.3e} at z={self.z}")
            self._cols[j] = x
        return self._cols[j]

    def entry(self, i: int, j: int) -> complex:
        return complex(self.column(j)[i])


def greens_entry(h: Hamiltonian, u: Vertex, v: Vertex, z: complex) -> complex:
    """G(u, v; z) = <delta_u, (H - z)^-1 delta_v> from a sparse direct solve."""
    solver = ResolventSolver(h, z)
    return solver.entry(vertex_to_index(h.lattice, u), vertex_to_index(h.lattice, v))


@dataclass
class HalflineGreens:
    """Corner data of a finite half-line chain: G(0,0), G+(1,1), and -1/G(0,0)."""

    g00: complex | np.ndarray
    g11plus: complex | np.ndarray
    sigma: complex | np.ndarray


def halfline_cf(omegas: np.ndarray, z: complex | np.ndarray, length: int | None = None) -> HalflineGreens:
    """Backward continued fraction for the half-line chain on sites 0..length.

    g_L = 1/(omega_L - z), g_j = 1/(omega_j - z - g_{j+1}); g_0 is the corner
    Green's function and g_1 the corner of the sub-chain starting at site 1.
    Vectorized over z (any shape); every denominator keeps Im != 0 when
    Im z > 0, so the recursion cannot break down.
    """
    om = np.asarray(omegas, dtype=float)
    last = om.size - 1 if length is None else int(length)
    if last < 0 or last >= om.size:
        raise ValueError(f"length {length} outside the sampled range 0..{om.size - 1}")
    z = np.asarray(z, dtype=complex)
    g = 1.0 / (om[last] - z)
    g_next = np.zeros_like(g)
    for j in range(last - 1, -1, -1):
        g_next = g
        g = 1.0 / (om[j] - z - g)
    sigma = -1.0 / g
    if z.ndim == 0:
        return HalflineGreens(g00=complex(g), g11plus=complex(g_next), sigma=complex(sigma))
    return HalflineGreens(g00=g, g11plus=g_next, sigma=sigma)


def sym_corner_formula(omegas: np.ndarray, gamma: float, z: complex | np.ndarray) -> complex | np.ndarray:
    """Corner Green's function of the spine model from its quadratic relation.

    With a = omega(0) - z - G+(1,1; z) of the horizontal half-line, the corner
    entry solves gamma^2 G^2 - a G + 1 = 0; the root with Im G > 0 is the
    physical one and tends to 1/a as gamma -> 0.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    om = np.asarray(omegas, dtype=float)
    if om.size < 2:
        raise ValueError("need at least two columns for the corner formula")
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("spectral parameter needs Im z > 0")
    gplus = halfline_cf(om[1:], z).g00
    a = om[0] - z - gplus
    disc = np.sqrt(a * a - 4.0 * gamma * gamma)
    # avoid cancellation: take the root paired with |a + s| large, recover the
    # other from the product r1*r2 = 1/gamma^2
    s = np.where(np.real(np.conj(a) * disc) >= 0, disc, -disc)
    r_big = (a + s) / (2.0 * gamma * gamma)
    r_small = 1.0 / (gamma * gamma * r_big)
    root = np.where(np.imag(r_big) > 0, r_big, r_small)
    if np.any(np.imag(root) <= 0):
        raise NumericsError("no Herglotz root of the corner quadratic (Im z > 0 violated?)")
    return root if root.ndim else complex(root)


def feenberg_check(
    h: Hamiltonian,
    cut_edge: tuple[Vertex, Vertex],
    u: Vertex,
    v: Vertex,
    z: complex,
) -> float:
    """Residual of the bridge factorization G(u,v) = w_e G(u,e-) G+(e+,v).

    ``cut_edge`` must be a bridge separating u (on the e- side) from v (on the
    e+ side); G+ is the Green's function of the graph with the edge deleted.
    """
    lat = h.lattice
    i_minus = vertex_to_index(lat, cut_edge[0])
    i_plus = vertex_to_index(lat, cut_edge[1])
    iu = vertex_to_index(lat, u)
    iv = vertex_to_index(lat, v)
    w_e = lat.matrix[i_minus, i_plus]
    if w_e == 0:
        raise ValueError(f"{cut_edge} is not an edge")

    cut = h.matrix.tolil(copy=True)
    cut[i_minus, i_plus] = 0.0
    cut[i_plus, i_minus] = 0.0
    cut = cut.tocsr()

    n_comp, labels = csgraph.connected_components(abs(cut), directed=False)
    if labels[i_minus] == labels[i_plus]:
        raise ValueError(f"edge {cut_edge} is not a bridge")
    if labels[iu] != labels[i_minus] or labels[iv] != labels[i_plus]:
        raise ValueError("u must sit on the e- side and v on the e+ side of the cut")

    full = ResolventSolver(h, z)
    g_total = full.entry(iu, iv)
    g_left = full.entry(iu, i_minus)
    g_plus = ResolventSolver(cut, z).entry(i_plus, iv)
    return abs(g_total - w_e * g_left * g_plus)


def halfline_spectral_measure(omegas: np.ndarray) -> PointMeasure:
    """Corner spectral measure of the finite half-line chain on the given sites.

    Eigen-expansion of the tridiagonal chain:
    G(0,0; z) = sum_n |phi_n(0)|^2 / (lambda_n - z), an atomic Borel transform.
    """
    om = np.asarray(omegas, dtype=float)
    if om.size == 0:
        raise ValueError("need at least one site")
    if om.size == 1:
        return PointMeasure.from_atoms(om, np.ones(1))
    vals, vecs = eigh_tridiagonal(om, -np.ones(om.size - 1))
    return PointMeasure.from_atoms(vals, vecs[0, :] ** 2)
