"""Off-grid direction-of-arrival estimation with a uniform linear array.

Builds the structured-perturbation measurement model for a sensor array
observing far-field narrowband sources: the nominal matrix collects
steering vectors at uniform grid points, the perturbation matrix collects
their normalized derivatives, and grid offsets appear as the bounded
column scalings of the sensing model. Recoveries map back to angles
through the grid.

Angles are parametrized by theta = cos(direction), so the domain is
(-1, 1] throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import compute_drip, drip_threshold
from .model import SensingEnsemble, stream
from .recovery import AaOptions, RecoveryResult, recover_aa_p_bpdn

__all__ = [
    "DoaGrid",
    "DoaScene",
    "DoaModel",
    "DoaEstimate",
    "steering_vector",
    "steering_derivative",
    "build_grid_model",
    "model_error_bound",
    "simulate_scene",
    "grid_truth",
    "estimate_doa",
    "mse_lower_bound",
    "gen_two_source_scene",
    "min_sensors_for_condition",
]


@dataclass(frozen=True)
class DoaGrid:
    """Uniform sampling grid of cell centers on (-1, 1].

    The n points are (2l - 1)/n - 1 for l = 1..n: strictly increasing
    with spacing 2/n, and every theta in [-1, 1] lies within 1/n of one.
    """

    n: int
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError("grid size n must be an even integer >= 2")
        pts = (2.0 * np.arange(1, self.n + 1) - 1.0) / self.n - 1.0
        object.__setattr__(self, "points", pts)

    def nearest(self, theta: float) -> int:
        """Index of the grid point closest to ``theta``."""
        return int(np.argmin(np.abs(self.points - theta)))


@dataclass(frozen=True)
class DoaScene:
    """Source directions and complex amplitudes.

    Attributes
    ----------
    theta : ndarray
        Source positions in (-1, 1], pairwise distinct.
    s : ndarray
        Complex amplitudes, one per source.
    """

    theta: np.ndarray
    s: np.ndarray

    def __post_init__(self) -> None:
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        s = np.atleast_1d(np.asarray(self.s, dtype=complex))
        if theta.shape != s.shape or theta.ndim != 1:
            raise ValueError("theta and s must be 1-D of equal length")
        if np.unique(theta).size != theta.size:
            raise ValueError("source positions must be distinct")
        if np.any(theta <= -1.0) or np.any(theta > 1.0):
            raise ValueError("source positions must lie in (-1, 1]")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "s", s)

    @property
    def k(self) -> int:
        return self.theta.size

    def __len__(self) -> int:
        return self.theta.size


@dataclass(frozen=True)
class DoaModel:
    """Grid-based structured-perturbation model of a uniform linear array.

    Attributes
    ----------
    ens : SensingEnsemble
        Complex ensemble whose nominal columns are steering vectors at the
        grid points and whose perturbation columns are their derivatives
        scaled to unit norm.
    kappa : float
        Norm of every derivative column before scaling; the scaling makes
        grid offsets of delta theta appear as column scalings of size
        kappa * delta theta.
    r : float
        Perturbation radius kappa / n; offsets within half a grid cell
        stay inside it.
    eps_model : float
        Bound on the linearization remainder for ``sources`` sources of
        total amplitude norm ``s_norm``, used as the recovery tolerance.
    grid : DoaGrid
    m : int
        Sensor count.
    sources : int
        Source count the remainder bound was evaluated for.
    s_norm : float
        Amplitude norm the remainder bound was evaluated for.
    """

    ens: SensingEnsemble
    kappa: float
    r: float
    eps_model: float
    grid: DoaGrid
    m: int
    sources: int
    s_norm: float


@dataclass(frozen=True)
class DoaEstimate:
    """Recovered source positions with the backing sparse recovery.

    ``theta_hat`` is sorted ascending; ``support`` holds the grid indices
    in the same order. Off-support perturbation entries are zero.
    """

    theta_hat: np.ndarray
    support: np.ndarray
    x_hat: np.ndarray
    beta_hat: np.ndarray
    result: RecoveryResult


def steering_vector(m: int, theta: float) -> np.ndarray:
    """Unit-norm array response of an m-sensor uniform linear array.

    Entry l (1-based) is (1/sqrt(m)) exp{i pi (l - (m+1)/2) theta}; every
    entry has modulus 1/sqrt(m), so the norm is exactly 1.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    offsets = np.arange(1, m + 1) - (m + 1) / 2.0
    return np.exp(1j * np.pi * offsets * theta) / math.sqrt(m)


def steering_derivative(m: int, theta: float) -> np.ndarray:
    """Derivative of :func:`steering_vector` with respect to ``theta``.

    Its norm is kappa(m) = (pi/2) sqrt((m^2 - 1)/3) for every theta.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    offsets = np.arange(1, m + 1) - (m + 1) / 2.0
    phase = 1j * np.pi * offsets
    return phase * np.exp(phase * theta) / math.sqrt(m)


def _kappa(m: int) -> float:
    return 0.5 * math.pi * math.sqrt((m * m - 1) / 3.0)


def build_grid_model(
    m: int, n: int, *, sources: int = 1, s_norm: float = 1.0
) -> DoaModel:
    """Assemble the grid model for an m-sensor array over an n-point grid.

    The nominal matrix stacks steering vectors at the grid points; the
    perturbation matrix stacks derivative vectors divided by their common
    norm kappa, so both have exactly unit columns and the radius is
    r = kappa / n. The stored recovery tolerance ``eps_model`` is
    :func:`model_error_bound` at the given source count and amplitude
    norm.

    Parameters
    ----------
    m : int
        Sensors; at least 2 (a single sensor has a zero derivative norm).
    n : int
        Grid size, even.
    sources : int, keyword
        Source count for the remainder bound.
    s_norm : float, keyword
        Amplitude norm for the remainder bound.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    grid = DoaGrid(n)
    kappa = _kappa(m)
    a_cols = np.stack([steering_vector(m, t) for t in grid.points], axis=1)
    b_cols = np.stack(
        [steering_derivative(m, t) / kappa for t in grid.points], axis=1
    )
    ens = SensingEnsemble(A=a_cols, B=b_cols, r=kappa / n)
    return DoaModel(
        ens=ens,
        kappa=kappa,
        r=kappa / n,
        eps_model=model_error_bound(m, n, sources, s_norm),
        grid=grid,
        m=m,
        sources=sources,
        s_norm=s_norm,
    )


def model_error_bound(m: int, n: int, k: int, s_norm: float) -> float:
    """Bound on the norm of the grid-linearization remainder.

    For k sources with amplitude norm ``s_norm`` placed anywhere within
    half a grid cell of their nearest grid points,

        eps = (sqrt(k) s_norm pi^2 / (8 n^2))
              * sqrt((3 m^4 - 10 m^2 + 7) / 15).

    The radical is the norm of the second derivative of the steering
    vector (constant over theta) up to the factor 1/4, so the bound is
    the exact worst-case Taylor remainder summed over sources.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if n < 2:
        raise ValueError("n must be at least 2")
    if k < 1:
        raise ValueError("k must be at least 1")
    if s_norm < 0:
        raise ValueError("s_norm must be nonnegative")
    radical = math.sqrt((3.0 * m**4 - 10.0 * m**2 + 7.0) / 15.0)
    return math.sqrt(k) * s_norm * math.pi**2 / (8.0 * n * n) * radical


def simulate_scene(scene: DoaScene, m: int) -> np.ndarray:
    """Noise-free array snapshot: the sum of steering vectors times amplitudes."""
    y = np.zeros(m, dtype=complex)
    for theta_j, s_j in zip(scene.theta, scene.s):
        y += steering_vector(m, theta_j) * s_j
    return y


def grid_truth(
    scene: DoaScene, model: DoaModel
) -> tuple[np.ndarray, np.ndarray]:
    """Ground-truth sparse vector and column scalings for a scene.

    Each source is assigned to its nearest grid point: the sparse vector
    carries the amplitude there and the scaling entry is
    kappa * (theta - nearest grid point), which lies in [-r, r]. Raises
    when two sources share a nearest grid point (the grid cannot separate
    them).

    Returns
    -------
    (x_o, beta_o)
        Complex length-n signal and real length-n scalings.
    """
    n = model.grid.n
    x_o = np.zeros(n, dtype=complex)
    beta_o = np.zeros(n)
    taken: set[int] = set()
    for theta_j, s_j in zip(scene.theta, scene.s):
        idx = model.grid.nearest(theta_j)
        if idx in taken:
            raise ValueError("two sources share a nearest grid point")
        taken.add(idx)
        x_o[idx] = s_j
        beta_o[idx] = model.kappa * (theta_j - model.grid.points[idx])
    return x_o, beta_o


def estimate_doa(
    y: np.ndarray, model: DoaModel, aopts: AaOptions | None = None
) -> DoaEstimate:
    """Estimate source positions from one snapshot.

    Runs the alternating sparse recovery on the grid model at tolerance
    ``model.eps_model``, takes the ``model.sources`` largest-magnitude
    entries of the recovered signal as the support, and maps each support
    point back to an angle by adding its recovered scaling divided by
    kappa. Estimates are sorted ascending; a global phase on ``y`` leaves
    them unchanged.
    """
    result = recover_aa_p_bpdn(model.ens, np.asarray(y), model.eps_model, aopts)
    order = np.argsort(-np.abs(result.x_hat), kind="stable")
    support = np.sort(order[: model.sources])
    theta_hat = model.grid.points[support] + result.beta_hat[support] / model.kappa
    ascending = np.argsort(theta_hat, kind="stable")
    return DoaEstimate(
        theta_hat=theta_hat[ascending],
        support=support[ascending],
        x_hat=result.x_hat,
        beta_hat=result.beta_hat,
        result=result,
    )


def mse_lower_bound(n: int) -> float:
    """Mean squared angle error of nearest-grid assignment, 1 / (3 n^2).

    A position uniform within one grid cell is off from the cell center
    by a uniform variable on [-1/n, 1/n], whose second moment is this
    value; estimators constrained to grid points cannot average below it.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return 1.0 / (3.0 * n * n)


def gen_two_source_scene(n: int, seed) -> DoaScene:
    """Two unit-amplitude sources in fixed off-grid bands, random phases.

    The first source is uniform on [2/n, 4/n], the second on
    [12/n, 14/n]; amplitudes are unit-modulus with independent uniform
    phases. Draw order is positions then phases, so identical seeds give
    identical scenes.
    """
    rng = stream(seed)
    theta1 = rng.uniform(2.0 / n, 4.0 / n)
    theta2 = rng.uniform(12.0 / n, 14.0 / n)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=2)
    return DoaScene(
        theta=np.array([theta1, theta2]), s=np.exp(1j * phases)
    )


def min_sensors_for_condition(
    n: int,
    sources: int,
    m_lo: int,
    m_hi: int,
    *,
    workers: int = 1,
    budget: int | None = None,
) -> int:
    """Smallest sensor count whose grid model passes the recovery condition.

    Checks, for the duplicate isometry constant of order 4 * sources of
    the grid model, whether it falls below :func:`drip_threshold` at the
    model radius, and bisects over [m_lo, m_hi] assuming the condition is
    monotone in the sensor count (more sensors never hurt isometry for
    this model family). Enumeration is exact; each probe inspects
    C(n, 2 * sources) supports.

    Raises
    ------
    ValueError
        If the condition fails at ``m_hi`` or already holds at ``m_lo``
        (the boundary lies outside the bracket).
    """
    if m_lo >= m_hi:
        raise ValueError("need m_lo < m_hi")

    kwargs = {} if budget is None else {"budget": budget}

    def condition(m: int) -> bool:
        model = build_grid_model(m, n, sources=sources)
        report = compute_drip(model.ens, 2 * sources, workers=workers, **kwargs)
        return report.delta_bar < drip_threshold(model.r)

    if not condition(m_hi):
        raise ValueError(f"condition still fails at m_hi = {m_hi}")
    if condition(m_lo):
        raise ValueError(f"condition already holds at m_lo = {m_lo}")
    lo, hi = m_lo, m_hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if condition(mid):
            hi = mid
        else:
            lo = mid
    return hi
