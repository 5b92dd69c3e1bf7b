"""Exact level-set and tail identities for Borel transforms of point measures.

For F(E) = sum_n p_n / (u_n - E) with positive weights, E + F(E) is strictly
increasing from -inf to +inf on each of the N+1 branches between consecutive
poles, so {alpha < E + F(E) < beta} is a disjoint union of N+1 intervals whose
total length is exactly beta - alpha; likewise |{F > t}| = (sum p_n) / t.
Roots are found by per-branch bisection, which the monotonicity makes
unconditionally safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MAX_BISECT = 200


@dataclass(frozen=True)
class PointMeasure:
    """Finite atomic measure: strictly increasing locations, positive weights."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.locations, dtype=float)
        p = np.asarray(self.weights, dtype=float)
        if u.shape != p.shape or u.ndim != 1 or u.size == 0:
            raise ValueError("locations and weights must be matching nonempty vectors")
        if np.any(p <= 0):
            raise ValueError("weights must be positive")
        if np.any(np.diff(u) <= 0):
            raise ValueError("locations must be strictly increasing (canonicalize first)")
        object.__setattr__(self, "locations", u)
        object.__setattr__(self, "weights", p)

    @property
    def n_atoms(self) -> int:
        return self.locations.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def from_atoms(cls, locations, weights) -> "PointMeasure":
        """Canonicalize: sort, merge duplicate locations, drop zero weights."""
        u = np.asarray(locations, dtype=float)
        p = np.asarray(weights, dtype=float)
        if u.shape != p.shape or u.ndim != 1:
            raise ValueError("locations and weights must be matching vectors")
        if np.any(p < 0):
            raise ValueError("weights must be nonnegative")
        order = np.argsort(u, kind="stable")
        u, p = u[order], p[order]
        uu, inverse = np.unique(u, return_inverse=True)
        pp = np.zeros_like(uu)
        np.add.at(pp, inverse, p)
        keep = pp > 0
        if not np.any(keep):
            raise ValueError("measure has no mass")
        return cls(locations=uu[keep], weights=pp[keep])

    def to_csv(self) -> str:
        lines = ["u,p"]
        lines += [f"{u!r},{p!r}" for u, p in zip(self.locations, self.weights)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PointMeasure":
        rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        if rows and rows[0].strip().lower() == "u,p":
            rows = rows[1:]
        pairs = [tuple(map(float, ln.split(","))) for ln in rows]
        u, p = zip(*pairs)
        return cls.from_atoms(np.array(u), np.array(p))


def borel_transform(m: PointMeasure, z: complex | np.ndarray) -> complex | np.ndarray:
    """F(z) = sum p_n / (u_n - z); Herglotz in the upper half plane."""
    z = np.asarray(z)
    if np.isrealobj(z) and np.any(np.isin(z, m.locations)):
        raise ValueError("Borel transform evaluated at an atom")
    out = np.sum(m.weights / (m.locations - z[..., None]), axis=-1)
    return out if out.ndim else out[()]


def _f_shifted(m: PointMeasure, e: np.ndarray, level: np.ndarray) -> np.ndarray:
    """E + F(E) - level, vectorized over branch arrays."""
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.sum(m.weights[None, :] / (m.locations[None, :] - e[:, None]), axis=1)
    return e + f - level


def _f_plain(m: PointMeasure, e: np.ndarray, level: np.ndarray) -> np.ndarray:
    """F(E) - level, vectorized over branch arrays."""
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.sum(m.weights[None, :] / (m.locations[None, :] - e[:, None]), axis=1)
    return f - level


def _bisect_branches(m, lo, hi, level, func) -> np.ndarray:
    """Vectorized bisection on monotone branches with f(lo)<0<f(hi).

    Brackets sit one ulp inside the poles; if an endpoint already crosses the
    level (atom weight below resolution) the endpoint itself is the root.
    """
    lo = lo.copy()
    hi = hi.copy()
    level = np.broadcast_to(level, lo.shape).astype(float)
    flo = func(m, lo, level)
    fhi = func(m, hi, level)
    done_lo = flo >= 0
    done_hi = fhi <= 0
    roots = np.where(done_lo, lo, np.where(done_hi, hi, np.nan))
    active = ~(done_lo | done_hi)
    scale = np.maximum(np.abs(lo), np.abs(hi)) + 1.0
    for _ in range(_MAX_BISECT):
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        fm = func(m, mid, level)
        go_hi = active & (fm < 0)
        go_lo = active & ~(fm < 0)
        lo[go_hi] = mid[go_hi]
        hi[go_lo] = mid[go_lo]
        converged = active & (hi - lo <= 1e-15 * scale)
        roots[converged] = 0.5 * (lo + hi)[converged]
        active &= ~converged
    if np.any(active):
        roots[active] = 0.5 * (lo + hi)[active]
    if np.any(np.isnan(roots)):
        raise RuntimeError("bisection failed to bracket a branch root")
    return roots


def _level_roots(m: PointMeasure, level: float) -> np.ndarray:
    """All N+1 roots of E + F(E) = level, one per monotone branch."""
    u = m.locations
    c = m.total_mass
    lo_unbounded = min(u[0], level) - c - 1.0
    hi_unbounded = max(u[-1], level) + c + 1.0
    lo = np.concatenate([[lo_unbounded], np.nextafter(u, np.inf)])
    hi = np.concatenate([np.nextafter(u, -np.inf), [hi_unbounded]])
    return _bisect_branches(m, lo, hi, np.float64(level), _f_shifted)


def level_set_measure(m: PointMeasure, alpha: float, beta: float) -> float:
    """Lebesgue measure of {E : alpha < E + F(E) < beta}; equals beta - alpha."""
    if not alpha < beta:
        if alpha == beta:
            return 0.0
        raise ValueError("need alpha < beta")
    v = _level_roots(m, alpha)
    w = _level_roots(m, beta)
    return float(np.sum(w - v))


def tail_measure(m: PointMeasure, t: float) -> float:
    """Lebesgue measure of {E : F(E) > t} for t > 0; equals total_mass / t.

    On each branch with right endpoint u_n, F increases through t at a root
    e_n and the branch contributes (e_n, u_n).
    """
    if not t > 0:
        raise ValueError("need t > 0")
    u = m.locations
    c = m.total_mass
    lo_first = u[0] - max(c / t, 1.0) - 1.0
    lo = np.concatenate([[lo_first], np.nextafter(u[:-1], np.inf)])
    hi = np.nextafter(u, -np.inf)
    roots = _bisect_branches(m, lo, hi, np.float64(t), _f_plain)
    return float(np.sum(u - roots))


def level_roots(m: PointMeasure, level: float) -> np.ndarray:
    """Public root accessor (sorted, interlacing the atoms)."""
    return _level_roots(m, level)


def finite_volume_support(m: PointMeasure, gamma: float, omega0: float) -> float:
    """Support measure of the spine spectral density at coupling gamma.

    The density lives on {|omega0 - E - F(E)| < 2*gamma}, a level set of
    E + F(E), so its Lebesgue measure is exactly 4*gamma.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0:
        return 0.0
    return level_set_measure(m, omega0 - 2.0 * gamma, omega0 + 2.0 * gamma)
