"""Column-constant random potentials and Hamiltonian assembly H = -A + V.

The potential takes one value per column, V(n1, n2) = omega(n1), so the
randomness is perfectly correlated along vertical lines.  Samples are a pure
function of (seed, realization_index); distinct realizations use independent
substreams so disorder averages do not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .lattice import GraphSpec, LatticeOperator, Vertex

DISTRIBUTIONS = ("uniform", "density")


@dataclass(frozen=True)
class DisorderSpec:
    """Bounded disorder on [0, omega_max] with a reproducible stream identity.

    ``distribution`` is either "uniform" or "density"; the latter draws from a
    piecewise-constant density given by ``density`` values on equal-width bins
    covering [0, omega_max] (normalized internally).
    """

    distribution: str = "uniform"
    omega_max: float = 1.0
    seed: int = 0
    realization_index: int = 0
    density: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.omega_max < 0:
            raise ValueError(f"omega_max must be nonnegative, got {self.omega_max}")
        if self.realization_index < 0:
            raise ValueError("realization_index must be nonnegative")
        if self.distribution == "density":
            if self.density is None or len(self.density) == 0:
                raise ValueError("distribution 'density' needs density bin values")
            d = np.asarray(self.density, dtype=float)
            if np.any(d < 0) or not np.any(d > 0):
                raise ValueError("density values must be nonnegative and not all zero")
            if self.omega_max <= 0:
                raise ValueError("distribution 'density' needs omega_max > 0")

    def rho_sup(self) -> float:
        """Sup norm of the single-site density (after normalization)."""
        if self.omega_max == 0:
            raise ValueError("degenerate distribution (omega_max = 0) has no density")
        if self.distribution == "uniform":
            return 1.0 / self.omega_max
        d = np.asarray(self.density, dtype=float)
        h = self.omega_max / d.size
        return float(d.max() / (d.sum() * h))

    def realization(self, k: int) -> "DisorderSpec":
        return replace(self, realization_index=int(k))

    def _rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence((int(self.seed), int(self.realization_index)))
        return np.random.default_rng(ss)


@dataclass(frozen=True)
class DisorderSample:
    """One column-potential vector omega(0..cols-1)."""

    omegas: np.ndarray
    spec: DisorderSpec

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        object.__setattr__(self, "omegas", om)
        if om.ndim != 1:
            raise ValueError("omegas must be a vector")
        if om.size and (om.min() < 0 or om.max() > self.spec.omega_max + 1e-12):
            raise ValueError("sample leaves [0, omega_max]")


def sample(spec: DisorderSpec, cols: int) -> DisorderSample:
    """Draw one realization; deterministic in (seed, realization_index)."""
    if cols < 1:
        raise ValueError("cols must be >= 1")
    rng = spec._rng()
    u = rng.random(cols)
    if spec.distribution == "uniform" or spec.omega_max == 0:
        om = spec.omega_max * u
    else:
        d = np.asarray(spec.density, dtype=float)
        cdf = np.concatenate([[0.0], np.cumsum(d)])
        cdf /= cdf[-1]
        h = spec.omega_max / d.size
        bins = np.searchsorted(cdf, u, side="right") - 1
        bins = np.clip(bins, 0, d.size - 1)
        frac = (u - cdf[bins]) / np.maximum(cdf[bins + 1] - cdf[bins], 1e-300)
        om = (bins + frac) * h
    return DisorderSample(omegas=om, spec=spec)


def sample_to_csv(s: DisorderSample) -> str:
    lines = ["n1,omega"]
    lines += [f"{i},{w!r}" for i, w in enumerate(s.omegas)]
    return "\n".join(lines) + "\n"


@dataclass(eq=False)
class Hamiltonian:
    """Sparse symmetric H = -A + diag(V), V(n1, n2) = omega(n1).

    Immutable after assembly; the dense eigensystem is computed lazily and
    cached (desk-scale boxes only).
    """

    lattice: LatticeOperator
    sample: DisorderSample
    matrix: sp.csr_matrix = field(repr=False)
    _eigs: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    _tridiag: tuple | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.lattice.n_vertices

    def potential(self) -> np.ndarray:
        return np.array([self.sample.omegas[v[0]] for v in self.lattice.vertices])

    def norm_bound(self) -> float:
        """Schur bound: max weighted degree plus the potential range."""
        row_sums = np.abs(self.lattice.matrix).sum(axis=1).max()
        return float(row_sums + np.abs(self.sample.omegas).max(initial=0.0))

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense (eigenvalues, eigenvectors); cached on first use."""
        if self._eigs is None:
            w, v = np.linalg.eigh(self.matrix.toarray())
            self._eigs = (w, v)
        return self._eigs


def assemble(lattice: LatticeOperator, s: DisorderSample) -> Hamiltonian:
    if s.omegas.size < lattice.spec.cols:
        raise ValueError(
            f"sample has {s.omegas.size} columns but the lattice needs {lattice.spec.cols}"
        )
    v = np.array([s.omegas[n1] for n1, _ in lattice.vertices])
    h = (-lattice.matrix + sp.diags(v)).tocsr()
    h.sort_indices()
    return Hamiltonian(lattice=lattice, sample=s, matrix=h)


def realize(model: GraphSpec, disorder: DisorderSpec, k: int | None = None) -> Hamiltonian:
    """Convenience: build lattice, draw realization k, assemble."""
    from .lattice import build

    spec = disorder if k is None else disorder.realization(k)
    lat = build(model)
    return assemble(lat, sample(spec, model.cols))
