"""Disorder-averaged experiment pipelines shared by the CLI and the scripts.

Realizations are computed in a thread pool but every stream is keyed by its
realization index and reductions run in index order, so results are identical
for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .disorder import DisorderSpec, assemble, sample
from .dynamics import MomentCurve, SymFiberModel, boundary_mass, growth_exponent, moments_energy, moments_time
from .estimators import DecayFit, anderson_decay_scan, apriori_constant, gamma_threshold
from .lattice import GraphSpec, Kind, Vertex, build


@dataclass
class MomentExperiment:
    curve: MomentCurve
    guard_mass: np.ndarray        # max over realizations, per T
    admissible: np.ndarray        # guard_mass < threshold
    window: slice | None = None   # fit window chosen by select_fit_window


def _one_realization_moments(
    model: GraphSpec,
    disorder: DisorderSpec,
    q: float,
    ts: np.ndarray,
    k: int,
    origin: Vertex,
    route: str,
    guard_margin: int,
):
    om = sample(disorder.realization(k), model.cols).omegas
    use_fiber = model.kind is Kind.SYM and route == "time" and float(q).is_integer()
    if use_fiber:
        fib = SymFiberModel(model, om)
        vals = np.asarray(fib.moments_time(int(q), ts, origin))
        guard = np.array([fib.boundary_mass(t, origin, guard_margin) for t in ts])
        return vals, guard
    h = assemble(build(model), sample(disorder.realization(k), model.cols))
    if route == "time":
        vals = np.asarray(moments_time(h, q, ts, origin))
    elif route == "energy":
        vals = np.asarray(moments_energy(h, q, ts, origin))
    else:
        raise ValueError(f"unknown route {route!r}")
    guard = np.array([boundary_mass(h, t, origin, guard_margin) for t in ts])
    return vals, guard


def run_moment_experiment(
    model: GraphSpec,
    disorder: DisorderSpec,
    q: float,
    ts,
    realizations: int,
    threads: int = 1,
    route: str = "time",
    origin: Vertex = (0, 0),
    guard_margin: int = 5,
    guard_threshold: float = 1e-3,
) -> MomentExperiment:
    """Average the moment curve over disorder realizations with a boundary guard."""
    ts = np.asarray(ts, dtype=float)

    def work(k: int):
        return _one_realization_moments(model, disorder, q, ts, k, origin, route, guard_margin)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(realizations)))
    else:
        results = [work(k) for k in range(realizations)]
    vals = np.stack([r[0] for r in results])
    guards = np.stack([r[1] for r in results])
    mean = vals.mean(axis=0)
    stderr = (
        vals.std(axis=0, ddof=1) / np.sqrt(realizations) if realizations > 1 else np.zeros_like(mean)
    )
    guard_mass = guards.max(axis=0)
    curve = MomentCurve(q=q, ts=ts, values=mean, route=route, realizations=realizations, stderr=stderr)
    return MomentExperiment(curve=curve, guard_mass=guard_mass, admissible=guard_mass < guard_threshold)


def select_fit_window(
    ts: np.ndarray, admissible: np.ndarray, min_points: int = 5, min_decades: float = 1.5
) -> slice:
    """Latest guard-admissible suffix of the T grid spanning enough decades.

    Asymptotics live at late times, so the window ends at the largest
    admissible T and extends back just far enough to span ``min_decades``.
    """
    ts = np.asarray(ts, dtype=float)
    ok = np.asarray(admissible, dtype=bool)
    n_prefix = int(np.argmin(ok)) if not ok.all() else ts.size
    if n_prefix == 0:
        raise ValueError("no admissible averaging times (boundary mass too large)")
    t_end = ts[n_prefix - 1]
    span = 10.0**min_decades
    start = int(np.searchsorted(ts, t_end / span * (1 - 1e-9)))
    if n_prefix - start < min_points or ts[start] > t_end / span * (1 + 1e-9):
        raise ValueError(
            "admissible times cannot host a fit window "
            f"({n_prefix - start} points, need >= {min_points} spanning {min_decades} decades)"
        )
    return slice(start, n_prefix)


def windowed_exponent(exp: MomentExperiment, min_points: int = 5, min_decades: float = 1.5) -> float:
    win = select_fit_window(exp.curve.ts, exp.admissible, min_points, min_decades)
    exp.window = win
    sub = MomentCurve(
        q=exp.curve.q,
        ts=exp.curve.ts[win],
        values=exp.curve.values[win],
        route=exp.curve.route,
        realizations=exp.curve.realizations,
    )
    return growth_exponent(sub)


@dataclass
class ContrastResult:
    """Side-by-side growth exponents of the two models under shared disorder."""

    sym_experiment: MomentExperiment
    diag_experiment: MomentExperiment
    sym_exponent: float
    diag_exponent: float
    mu_and_hat: float
    c_ap: float
    gamma0: float
    diag_gamma: float
    onedim_fit: DecayFit = field(repr=False)


def contrast_experiment(
    sym_model: GraphSpec,
    diag_ell: int,
    diag_cols: int,
    diag_rows: int,
    disorder: DisorderSpec,
    q: float = 1.0,
    sym_ts=None,
    diag_ts=None,
    realizations: int = 20,
    threads: int = 1,
    threshold_s: float = 0.5,
    threshold_z: complex | None = None,
    threshold_distances=None,
    threshold_realizations: int = 100,
    threshold_length: int = 60,
    c_w: float = 1.0,
    gamma_fraction: float = 0.5,
    diag_gamma: float | None = None,
    guard_margin: int = 5,
    guard_threshold: float = 1e-3,
) -> ContrastResult:
    """The headline experiment: ballistic spine model vs suppressed staircase.

    The staircase coupling defaults to ``gamma_fraction`` times the threshold
    gamma_0 derived from a 1D decay scan under the same disorder.
    """
    if threshold_z is None:
        threshold_z = 2.0 + 0.5 * disorder.omega_max + 0.05j  # mid-spectrum
    if threshold_distances is None:
        threshold_distances = np.arange(1, 16)
    fit = anderson_decay_scan(
        disorder, threshold_s, threshold_z, threshold_distances, threshold_realizations, threshold_length
    )
    mu_hat = fit.decay_rate
    c_ap = apriori_constant(threshold_s, disorder.omega_max, disorder.rho_sup(), c_w)
    gamma0 = gamma_threshold(threshold_s, diag_ell, mu_hat, c_ap)
    if diag_gamma is None:
        diag_gamma = gamma_fraction * gamma0
    diag_model = GraphSpec(kind=Kind.DIAG, gamma=diag_gamma, ell=diag_ell, cols=diag_cols, rows=diag_rows)

    if sym_ts is None:
        sym_ts = np.geomspace(1.0, 128.0, 8)
    if diag_ts is None:
        diag_ts = np.geomspace(1.0, 4096.0, 13)
    sym_exp = run_moment_experiment(
        sym_model, disorder, q, sym_ts, realizations, threads, "time", (0, 0), guard_margin, guard_threshold
    )
    diag_exp = run_moment_experiment(
        diag_model, disorder, q, diag_ts, realizations, threads, "time", (0, 0), guard_margin, guard_threshold
    )
    return ContrastResult(
        sym_experiment=sym_exp,
        diag_experiment=diag_exp,
        sym_exponent=windowed_exponent(sym_exp),
        diag_exponent=windowed_exponent(diag_exp),
        mu_and_hat=mu_hat,
        c_ap=c_ap,
        gamma0=gamma0,
        diag_gamma=diag_gamma,
        onedim_fit=fit,
    )
