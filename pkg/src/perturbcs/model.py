"""Measurement model with a structured sensing-matrix perturbation.

Measurements follow ``y = (A + B diag(beta)) x + e`` where the nominal
matrix ``A`` and the perturbation basis ``B`` are known, the perturbation
coefficients ``beta`` are unknown but entrywise bounded by a radius ``r``,
and the additive noise satisfies ``||e||_2 <= epsilon``.

All generators draw from numpy's PCG64 through an explicit ``SeedSequence``
key, so every stream is reproducible and cheap to derive: trial ``i`` of a
run with master seed ``s`` uses the key ``(s, i)``, and role substreams
extend the key, e.g. ``(s, i, ROLE_SIGNAL)``.  Reproducibility is promised
within this implementation only, not across numpy versions or platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ROLE_ENSEMBLE",
    "ROLE_SIGNAL",
    "ROLE_PERTURBATION",
    "ROLE_NOISE",
    "CompressibleSpec",
    "GroundTruth",
    "MeasurementSet",
    "SensingEnsemble",
    "best_k_term",
    "gen_gaussian_ensemble",
    "gen_noise",
    "gen_perturbation",
    "gen_signal",
    "measure",
    "stream",
]

ROLE_ENSEMBLE = 0
ROLE_SIGNAL = 1
ROLE_PERTURBATION = 2
ROLE_NOISE = 3

_UNIT_COLUMN_TOL = 1e-12


def stream(seed) -> np.random.Generator:
    """Return the PCG64 generator derived from a seed key.

    Parameters
    ----------
    seed : int, tuple of int, SeedSequence, or Generator
        Entropy key.  Tuples derive substreams, e.g. ``(master_seed, i)``
        for trial ``i``.  A Generator is passed through unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class SensingEnsemble:
    """Known model pair (A, B) plus the perturbation radius r.

    Columns of both matrices must have unit l2 norm; ``r >= 0`` bounds
    ``|beta_j|``.  Real and complex fields are both supported.
    """

    A: np.ndarray
    B: np.ndarray
    r: float

    def __post_init__(self) -> None:
        self.A = np.asarray(self.A)
        self.B = np.asarray(self.B)
        if self.A.ndim != 2 or self.A.shape != self.B.shape:
            raise ValueError("A and B must be matrices of identical shape")
        if self.r < 0:
            raise ValueError("perturbation radius must be nonnegative")
        for name, mat in (("A", self.A), ("B", self.B)):
            norms = np.linalg.norm(mat, axis=0)
            if np.max(np.abs(norms - 1.0)) > _UNIT_COLUMN_TOL:
                raise ValueError(f"columns of {name} must have unit norm")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def perturbed(self, beta: np.ndarray) -> np.ndarray:
        """Return ``A + B diag(beta)`` for a coefficient vector beta."""
        beta = np.asarray(beta)
        return self.A + self.B * beta[np.newaxis, :]

    def stacked(self) -> np.ndarray:
        """Return the concatenated model matrix ``[A, B]``."""
        return np.hstack([self.A, self.B])


@dataclass(frozen=True)
class CompressibleSpec:
    """Power-law magnitude template ``c_q * j ** (-q)``, j = 1..n."""

    n: int
    q: float = 1.5
    c_q: float = 2.8843

    def magnitudes(self) -> np.ndarray:
        j = np.arange(1, self.n + 1, dtype=float)
        return self.c_q * j ** (-self.q)


@dataclass
class GroundTruth:
    """One synthetic instance: signal, perturbation, noise, noise bound."""

    x_o: np.ndarray
    beta_o: np.ndarray
    e: np.ndarray
    epsilon: float
    k: int


@dataclass
class MeasurementSet:
    """Observed vector together with the noise-norm bound used to solve."""

    y: np.ndarray
    epsilon: float


def gen_gaussian_ensemble(m: int, n: int, r: float, seed) -> SensingEnsemble:
    """Draw a Gaussian ensemble with centered, unit-norm columns.

    Entries of A and B are i.i.d. standard normal from two substreams of
    ``seed``; each column then has its mean subtracted (skipped when
    ``m == 1``, where centering would zero the column) and is scaled to
    unit norm.  Identical ``(m, n, r, seed)`` give bit-identical output.
    """
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    child_a, child_b = root.spawn(2)
    mats = []
    for child in (child_a, child_b):
        g = np.random.Generator(np.random.PCG64(child))
        mat = g.standard_normal((m, n))
        if m > 1:
            mat -= mat.mean(axis=0, keepdims=True)
        norms = np.linalg.norm(mat, axis=0)
        if np.any(norms == 0.0):
            raise ValueError("degenerate zero column drawn; use a different seed")
        mats.append(mat / norms)
    return SensingEnsemble(A=mats[0], B=mats[1], r=float(r))


def gen_signal(
    n: int,
    k: int,
    kind: str = "unit-spikes",
    seed=0,
    spec: CompressibleSpec | None = None,
) -> np.ndarray:
    """Draw a ground-truth signal.

    Kinds
    -----
    ``unit-spikes``
        k entries of magnitude 1 with independent random signs, at k
        support positions drawn without replacement.
    ``positive-spikes``
        same supports, all entries +1.
    ``compressible``
        dense signal: the template magnitudes of ``spec`` (default
        ``CompressibleSpec(n)``) under a random permutation and random
        signs.  ``k`` is ignored.
    """
    rng = stream(seed)
    if kind == "compressible":
        spec = spec if spec is not None else CompressibleSpec(n)
        if spec.n != n:
            raise ValueError("template length must match n")
        mags = spec.magnitudes()
        signs = rng.choice([-1.0, 1.0], size=n)
        perm = rng.permutation(n)
        x = np.zeros(n)
        x[perm] = mags * signs
        return x
    if not 0 <= k <= n:
        raise ValueError("sparsity k must lie in [0, n]")
    support = rng.choice(n, size=k, replace=False)
    x = np.zeros(n)
    if kind == "unit-spikes":
        x[support] = rng.choice([-1.0, 1.0], size=k)
    elif kind == "positive-spikes":
        x[support] = 1.0
    else:
        raise ValueError(f"unknown signal kind: {kind!r}")
    return x


def gen_perturbation(n: int, r: float, seed) -> np.ndarray:
    """Draw beta with i.i.d. entries uniform on [-r, r]."""
    if r < 0:
        raise ValueError("perturbation radius must be nonnegative")
    return stream(seed).uniform(-r, r, size=n)


def gen_noise(m: int, epsilon: float, seed) -> np.ndarray:
    """Draw Gaussian noise rescaled so that ``||e||_2 == epsilon`` exactly."""
    if epsilon < 0:
        raise ValueError("noise bound must be nonnegative")
    if epsilon == 0.0:
        return np.zeros(m)
    rng = stream(seed)
    e = rng.standard_normal(m)
    norm = np.linalg.norm(e)
    while norm == 0.0:  # astronomically unlikely; keeps the contract exact
        e = rng.standard_normal(m)
        norm = np.linalg.norm(e)
    return e * (epsilon / norm)


def measure(ens: SensingEnsemble, gt: GroundTruth) -> MeasurementSet:
    """Form ``y = (A + B diag(beta_o)) x_o + e``."""
    if np.linalg.norm(gt.e) > gt.epsilon * (1 + 1e-12) + 1e-300:
        raise ValueError("noise vector violates its own norm bound")
    y = ens.perturbed(gt.beta_o) @ gt.x_o + gt.e
    return MeasurementSet(y=y, epsilon=gt.epsilon)


def best_k_term(x: np.ndarray, k: int) -> np.ndarray:
    """Return the best k-term approximation of x (largest moduli kept).

    Ties are broken toward the lower index, so the result is a
    deterministic function of the input.
    """
    x = np.asarray(x)
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = np.zeros_like(x)
    if k == 0:
        return out
    if k >= x.size:
        return x.copy()
    order = np.argsort(-np.abs(x), kind="stable")
    keep = order[:k]
    out[keep] = x[keep]
    return out
