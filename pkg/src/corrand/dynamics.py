"""Time evolution and time-averaged position moments by two independent routes.

Desk-scale boxes use exact eigen-decompositions, so the damped time integral

    M_q(T) = (2/T) int_0^inf exp(-2t/T) <0| e^{itH} |X|^q e^{-itH} |0> dt

is evaluated analytically in the eigenbasis (route "time").  The independent
route "energy" integrates the resolvent row |G(n, 0; E + i/T)|^2 over a real
energy grid; agreement of the two is a sharp contour/Plancherel identity test.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.linalg import eigh_tridiagonal, hessenberg
from scipy.linalg import lapack as _lapack

from .disorder import Hamiltonian
from .floquet import p_grid, sine_kernel
from .lattice import GraphSpec, Kind, Vertex, position_norm, vertex_to_index

_BLOCK = 1024


def evolve(h: Hamiltonian, psi0: np.ndarray, t: float) -> np.ndarray:
    """psi_t = exp(-itH) psi0 via the cached eigen-decomposition."""
    lam, v = h.eigensystem()
    return v @ (np.exp(-1j * t * lam) * (v.T @ np.asarray(psi0, dtype=complex)))


def delta_state(h: Hamiltonian, vertex: Vertex = (0, 0)) -> np.ndarray:
    psi = np.zeros(h.n)
    psi[vertex_to_index(h.lattice, vertex)] = 1.0
    return psi


def position_weights(h: Hamiltonian, q: float) -> np.ndarray:
    w = np.array([position_norm(v) for v in h.lattice.vertices], dtype=float)
    return w**q


def _lorentzian_pair_sum(lam: np.ndarray, s: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """sum_{jk} S_jk rho^2/(rho^2 + (lam_j - lam_k)^2), blocked, one value per rho."""
    out = np.zeros(rhos.size)
    for j0 in range(0, lam.size, _BLOCK):
        j1 = min(j0 + _BLOCK, lam.size)
        d2 = (lam[j0:j1, None] - lam[None, :]) ** 2
        sb = s[j0:j1, :]
        for i, rho in enumerate(rhos):
            r2 = rho * rho
            out[i] += float(np.sum(sb * (r2 / (r2 + d2))))
    return out


def moments_time(h: Hamiltonian, q: float, ts, origin: Vertex = (0, 0)) -> float | np.ndarray:
    """Damped time-averaged q-moment, exact in the eigenbasis.

    Each eigenpair gap Delta contributes through
    (2/T) int_0^inf e^{-2t/T} e^{i Delta t} dt = (2/T)/((2/T) + i Delta),
    so there is no time-discretization error.  ``ts`` may be a scalar or an
    increasing array of averaging times.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    ts_arr = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts_arr <= 0):
        raise ValueError("averaging times must be positive")
    lam, v = h.eigensystem()
    i0 = vertex_to_index(h.lattice, origin)
    c = v[i0, :]
    w = position_weights(h, q)
    big_w = v.T @ (w[:, None] * v)
    s = (c[:, None] * c[None, :]) * big_w
    out = _lorentzian_pair_sum(lam, s, 2.0 / ts_arr)
    return out if np.ndim(ts) else float(out[0])


def _gershgorin(h: Hamiltonian) -> tuple[float, float]:
    pot = h.potential()
    deg = np.asarray(np.abs(h.lattice.matrix).sum(axis=1)).ravel()
    return float((pot - deg).min()), float((pot + deg).max())


def _tridiagonalize(h: Hamiltonian) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthogonal reduction H = Q T Q^T with T tridiagonal; cached on h."""
    cached = getattr(h, "_tridiag", None)
    if cached is None:
        t3, qmat = hessenberg(h.matrix.toarray(), calc_q=True)
        d = np.diag(t3).copy()
        e = 0.5 * (np.diag(t3, -1) + np.diag(t3, 1))
        cached = (d, e, qmat)
        h._tridiag = cached
    return cached


def moments_energy(
    h: Hamiltonian,
    q: float,
    ts,
    origin: Vertex = (0, 0),
    margin: float = 4.0,
    step_factor: float = 0.5,
    n_max: float | None = None,
) -> float | np.ndarray:
    """Moment via the resolvent-row energy integral at z = E + i/T.

    M_q(T) = (1/(pi T)) sum_n |n|^q  int |G(n, 0; E + i/T)|^2 dE, evaluated by
    trapezoid quadrature with step = step_factor / T on a grid covering the
    spectrum with the given margin.  The resolvent rows come from an
    orthogonal tridiagonal reduction plus shifted banded solves, not from the
    eigen-decomposition used by :func:`moments_time`.  ``n_max`` optionally
    truncates the position sum to |n| <= n_max.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    ts_arr = np.atleast_1d(np.asarray(ts, dtype=float))
    d, e, qmat = _tridiagonalize(h)
    i0 = vertex_to_index(h.lattice, origin)
    rhs0 = qmat[i0, :].astype(complex)
    w = position_weights(h, q)
    if n_max is not None:
        w = np.where(position_weights(h, 1.0) <= n_max, w, 0.0)
    lo, hi = _gershgorin(h)
    out = np.empty(ts_arr.size)
    gtsv = _lapack.zgtsv
    for it, t_avg in enumerate(ts_arr):
        eta = 1.0 / t_avg
        step = step_factor * eta
        grid = np.arange(lo - margin, hi + margin + step, step)
        ys = np.empty((d.size, grid.size), dtype=complex)
        for iz, energy in enumerate(grid):
            z = energy + 1j * eta
            _, _, _, x, info = gtsv(e.astype(complex), d - z, e.astype(complex), rhs0)
            if info != 0:
                raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
            ys[:, iz] = x
        g_rows = qmat @ ys
        integrand = w @ (np.abs(g_rows) ** 2)
        out[it] = np.trapezoid(integrand, grid) / (np.pi * t_avg)
    return out if np.ndim(ts) else float(out[0])


def cesaro_transition(h: Hamiltonian, phi: np.ndarray, psi: np.ndarray, t_avg: float) -> float:
    """(1/T) int_0^T |<phi, e^{itH} psi>|^2 dt, exact in the eigenbasis."""
    if t_avg <= 0:
        raise ValueError("T must be positive")
    lam, v = h.eigensystem()
    a = (v.T @ np.asarray(phi, complex).conj()).conj() * (v.T @ np.asarray(psi, complex))
    total = 0.0
    for j0 in range(0, lam.size, _BLOCK):
        j1 = min(j0 + _BLOCK, lam.size)
        delta = lam[j0:j1, None] - lam[None, :]
        kern = np.sinc(delta * t_avg / np.pi)
        total += float(np.real(np.sum((a[j0:j1, None] * a[None, :].conj()) * kern)))
    return total


def boundary_mass(h: Hamiltonian, t: float, origin: Vertex = (0, 0), margin: int = 5) -> float:
    """Probability mass within ``margin`` sites of the truncation boundary at time t."""
    spec = h.lattice.spec
    psi = evolve(h, delta_state(h, origin), t)
    mask = np.array(
        [(v[0] >= spec.cols - margin) or (v[1] >= spec.rows - margin) for v in h.lattice.vertices]
    )
    return float(np.sum(np.abs(psi[mask]) ** 2))


@dataclass
class MomentCurve:
    """Sampled moment series with its evaluation route and averaging count."""

    q: float
    ts: np.ndarray
    values: np.ndarray
    route: str  # "time" | "energy"
    realizations: int
    stderr: np.ndarray | None = None

    def to_csv(self) -> str:
        lines = ["q,T,value,stderr,route,realizations"]
        err = self.stderr if self.stderr is not None else np.zeros_like(self.values)
        for t, v, s in zip(self.ts, self.values, err):
            lines.append(f"{self.q!r},{t!r},{v!r},{s!r},{self.route},{self.realizations}")
        return "\n".join(lines) + "\n"


def growth_exponent(curve: MomentCurve) -> float:
    """Least-squares slope of log M against q log T.

    Needs at least 5 points spanning at least 1.5 decades in T and strictly
    positive moment values.
    """
    ts = np.asarray(curve.ts, dtype=float)
    vals = np.asarray(curve.values, dtype=float)
    if ts.size < 5:
        raise ValueError("need at least 5 points for an exponent fit")
    if ts.max() / ts.min() < 10.0**1.5 * (1 - 1e-9):
        raise ValueError("fit window must span at least 1.5 decades")
    if np.any(vals <= 0):
        raise ValueError("moment values must be positive for a log fit")
    slope = np.polyfit(curve.q * np.log(ts), np.log(vals), 1)[0]
    return float(slope)


class SymFiberModel:
    """Exact eigen-structure of the spine model via its vertical fibers.

    The Dirichlet sine modes block-diagonalize the spine model, so the full
    eigensystem is rows-many tridiagonal problems of size cols.  Moments with
    integer q expand |n|^q = sum_m C(q,m) n1^m n2^(q-m), and every factor is
    a matrix element either within one fiber (n1) or between sine modes (n2).
    Cross-validated against the dense route on small boxes.
    """

    def __init__(self, spec: GraphSpec, omegas: np.ndarray):
        if spec.kind is not Kind.SYM:
            raise ValueError("fiber model only applies to the sym kind")
        self.spec = spec
        om = np.asarray(omegas, dtype=float)[: spec.cols]
        self.ps = p_grid(spec.rows)
        self.smat = np.sqrt(2.0 / (spec.rows + 1)) * np.sin(
            np.outer(self.ps, np.arange(spec.rows) + 1)
        )  # orthonormal sine modes, shape (rows, rows) = (k, n2)
        evals = np.empty((spec.rows, spec.cols))
        evecs = np.empty((spec.rows, spec.cols, spec.cols))
        off = -np.ones(spec.cols - 1)
        for i, p in enumerate(self.ps):
            diag = om.copy()
            diag[0] -= 2.0 * spec.gamma * np.cos(p)
            evals[i], evecs[i] = eigh_tridiagonal(diag, off)
        self.evals = evals
        self.evecs = evecs

    def origin_amplitudes(self, origin: Vertex = (0, 0)) -> np.ndarray:
        n1, n2 = origin
        return self.evecs[:, n1, :] * self.smat[:, n2][:, None]  # (k, j)

    def eigenvalues(self) -> np.ndarray:
        """Multiset of all box eigenvalues (fiber union)."""
        return np.sort(self.evals.ravel())

    def moments_time(self, q: int, ts, origin: Vertex = (0, 0)) -> np.ndarray:
        if q != int(q) or q < 0:
            raise ValueError("fiber moment route needs integer q >= 0")
        q = int(q)
        ts_arr = np.atleast_1d(np.asarray(ts, dtype=float))
        rows, cols = self.spec.rows, self.spec.cols
        c = self.origin_amplitudes(origin)
        n1 = np.arange(cols, dtype=float)
        n2 = np.arange(rows, dtype=float)
        # sine-mode moment matrices Y^(r)[k,k'] = <s_k| n2^r |s_k'>
        ys = [self.smat @ (n2[:, None] ** r * self.smat.T) for r in range(q + 1)]
        # per-power weighted eigenvector stacks (n1^m U), shape (k, n1, j)
        ums = [self.evecs * (n1[None, :, None] ** m) for m in range(q + 1)]
        rhos = 2.0 / ts_arr
        out = np.zeros(ts_arr.size)
        for k in range(rows):
            u_k = self.evecs[k]  # (n1, j)
            wk = np.zeros((cols, rows, cols))  # (j, k', j')
            for m in range(q + 1):
                x = np.tensordot(u_k, ums[m], axes=([0], [1]))  # (j, k', j')
                wk += comb(q, m) * ys[q - m][k][None, :, None] * x
            s_k = c[k][:, None, None] * c[None, :, :] * wk
            d2 = (self.evals[k][:, None, None] - self.evals[None, :, :]) ** 2
            for i, rho in enumerate(rhos):
                r2 = rho * rho
                out[i] += float(np.sum(s_k * (r2 / (r2 + d2))))
        return out if np.ndim(ts) else float(out[0])

    def wavefunction(self, t: float, origin: Vertex = (0, 0)) -> np.ndarray:
        """psi_t on the (n2, n1) grid."""
        c = self.origin_amplitudes(origin)
        psih = np.einsum("kaj,kj->ka", self.evecs.astype(complex), np.exp(-1j * t * self.evals) * c)
        return self.smat.T @ psih  # (n2, n1)

    def boundary_mass(self, t: float, origin: Vertex = (0, 0), margin: int = 5) -> float:
        m = np.abs(self.wavefunction(t, origin)) ** 2
        return float(m[-margin:, :].sum() + m[:-margin, -margin:].sum())
