"""Restricted-isometry diagnostics and recovery error bounds.

Exhaustive (or sampled) computation of restricted isometry constants,
including the duplicate variant for stacked ensembles ``[A, B]`` where the
same support indexes both blocks, together with the admissibility
thresholds and closed-form error-bound constants of the recovery
guarantees, and error metrics for recovered signal/perturbation pairs.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import GroundTruth, SensingEnsemble, best_k_term

__all__ = [
    "ENUMERATION_BUDGET",
    "RipReport",
    "DRipReport",
    "BoundReport",
    "compute_ric",
    "compute_drip",
    "drip_threshold",
    "max_perturbation_radius",
    "sparse_bound_constants",
    "compressible_bound_constants",
    "baseline_bound_constants",
    "error_metrics",
    "spectral_norm",
]

# Largest support count enumerated exactly without explicit opt-in to
# sampling; C(90, 4) ~ 2.56e6 stays inside it.
ENUMERATION_BUDGET = 5_000_000

# Supports per batched eigensolve; Gram blocks are at most 2k x 2k so a few
# thousand per batch keeps memory in the tens of megabytes.
_BATCH_SIZE = 4096

_POWER_SEED = 0x5EC7
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RipReport:
    """Restricted isometry constant of order ``k`` for one matrix.

    Attributes
    ----------
    k : int
        Support size the constant ranges over.
    delta : float
        Largest extreme-eigenvalue deviation of any k-column Gram matrix
        from the identity: max(lambda_max - 1, 1 - lambda_min).
    enumerated_supports : int
        Number of supports inspected.
    exact : bool
        True when every support was enumerated; False marks a sampled
        lower bound.
    """

    k: int
    delta: float
    enumerated_supports: int
    exact: bool = True


@dataclass(frozen=True)
class DRipReport:
    """Duplicate restricted isometry constant of a stacked ensemble.

    The reported constant is of order ``2k``: each size-k support selects
    the same k columns from both blocks of ``[A, B]``, giving a 2k-column
    submatrix.

    Attributes
    ----------
    k : int
        Shared support size, so the constant is the order-2k one.
    delta_bar : float
        Largest extreme-eigenvalue deviation over all joint supports.
    enumerated_supports : int
        Number of supports inspected.
    exact : bool
        True when every support was enumerated; False marks a sampled
        lower bound.
    """

    k: int
    delta_bar: float
    enumerated_supports: int
    exact: bool = True


@dataclass(frozen=True)
class BoundReport:
    """Admissibility check plus named error-bound constants.

    Constants are exposed both through the ``constants`` mapping and as
    attributes (``report.C``, ``report.C0`` and so on). Whenever the
    admissibility condition fails the bound constants are reported as
    ``inf``; auxiliary quantities that remain well defined (such as the
    denominators ``a`` and ``b``) keep their computed values.

    Attributes
    ----------
    condition_met : bool
        True when the isometry constant is below the threshold required
        by the guarantee.
    threshold : float
        The admissibility threshold the input was compared against.
    constants : dict of str to float
        Named constants of the guarantee.
    psi_spectral_norm : float or None
        Spectral norm of the stacked matrix used in the scaled constants,
        when one participates in the bound.
    """

    condition_met: bool
    threshold: float
    constants: dict[str, float] = field(default_factory=dict)
    psi_spectral_norm: float | None = None

    def __getattr__(self, name: str) -> float:
        constants = object.__getattribute__(self, "constants")
        try:
            return constants[name]
        except KeyError:
            raise AttributeError(
                f"BoundReport has no field or constant {name!r}"
            ) from None


def _deviation_of_batch(gram: np.ndarray, supports: np.ndarray) -> float:
    """Largest Gram-eigenvalue deviation over a batch of supports."""
    sub = gram[supports[:, :, None], supports[:, None, :]]
    evals = np.linalg.eigvalsh(sub)
    dev = np.maximum(evals[:, -1] - 1.0, 1.0 - evals[:, 0])
    return float(dev.max())


def _stacked_supports(supports: np.ndarray, offset: int) -> np.ndarray:
    return np.hstack([supports, supports + offset])


def _scan_first_indices(
    gram: np.ndarray,
    n: int,
    k: int,
    first_indices: tuple[int, ...],
    duplicate_offset: int,
) -> tuple[float, int]:
    """Enumerate all supports whose smallest index lies in ``first_indices``.

    Returns the local deviation maximum and the number of supports seen.
    Partition-independent because max-reduction is order-insensitive.
    """
    best = 0.0
    count = 0
    buffer: list[tuple[int, ...]] = []

    def flush() -> None:
        nonlocal best, count
        if not buffer:
            return
        supports = np.asarray(buffer, dtype=np.intp)
        if duplicate_offset:
            supports = _stacked_supports(supports, duplicate_offset)
        best = max(best, _deviation_of_batch(gram, supports))
        count += len(buffer)
        buffer.clear()

    for first in first_indices:
        for tail in itertools.combinations(range(first + 1, n), k - 1):
            buffer.append((first, *tail))
            if len(buffer) >= _BATCH_SIZE:
                flush()
    flush()
    return best, count


def _exact_max_deviation(
    gram: np.ndarray, n: int, k: int, duplicate_offset: int, workers: int
) -> tuple[float, int]:
    first_indices = tuple(range(n - k + 1))
    if workers <= 1:
        return _scan_first_indices(gram, n, k, first_indices, duplicate_offset)
    # Round-robin assignment balances the shrinking tail counts per index.
    parts = [first_indices[w::workers] for w in range(workers)]
    best = 0.0
    count = 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_scan_first_indices, gram, n, k, part, duplicate_offset)
            for part in parts
            if part
        ]
        for future in futures:
            local_best, local_count = future.result()
            best = max(best, local_best)
            count += local_count
    return best, count


def _sampled_max_deviation(
    gram: np.ndarray,
    n: int,
    k: int,
    duplicate_offset: int,
    trials: int,
    seed: int,
) -> tuple[float, int]:
    rng = np.random.default_rng(seed)
    best = 0.0
    remaining = trials
    while remaining > 0:
        block = min(remaining, _BATCH_SIZE)
        # Uniform random k-subsets: first k slots of random permutations.
        supports = np.argsort(rng.random((block, n)), axis=1)[:, :k]
        supports = np.sort(supports, axis=1)
        if duplicate_offset:
            supports = _stacked_supports(supports, duplicate_offset)
        best = max(best, _deviation_of_batch(gram, supports))
        remaining -= block
    return best, trials


def _max_deviation(
    matrix: np.ndarray,
    n: int,
    k: int,
    mode: str,
    duplicate_offset: int,
    sample_trials: int | None,
    seed: int,
    workers: int,
    budget: int,
) -> tuple[float, int, bool]:
    gram = matrix.conj().T @ matrix
    if mode == "exact":
        total = math.comb(n, k)
        if total > budget:
            raise ValueError(
                f"exact enumeration needs {total} supports which exceeds the "
                f"budget of {budget}; pass mode='sampled' with sample_trials "
                "to accept a flagged lower bound"
            )
        delta, count = _exact_max_deviation(gram, n, k, duplicate_offset, workers)
        return delta, count, True
    if mode == "sampled":
        if sample_trials is None or sample_trials < 1:
            raise ValueError("mode='sampled' requires sample_trials >= 1")
        delta, count = _sampled_max_deviation(
            gram, n, k, duplicate_offset, sample_trials, seed
        )
        return delta, count, False
    raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")


def compute_ric(
    matrix: np.ndarray,
    k: int,
    mode: str = "exact",
    *,
    sample_trials: int | None = None,
    seed: int = 0,
    workers: int = 1,
    budget: int = ENUMERATION_BUDGET,
) -> RipReport:
    """Restricted isometry constant of order ``k`` by support enumeration.

    Parameters
    ----------
    matrix : ndarray
        Measurement matrix, shape (m, n), real or complex.
    k : int
        Support size; requires 1 <= k <= min(m, n).
    mode : {'exact', 'sampled'}
        'exact' enumerates every support and fails loudly when the count
        exceeds ``budget``; 'sampled' inspects ``sample_trials`` random
        supports and reports a lower bound flagged by ``exact=False``.
    sample_trials : int, optional
        Number of random supports in sampled mode.
    seed : int
        Seed for the sampled-mode support draw.
    workers : int
        Process count for exact enumeration; supports are partitioned by
        first index and combined by max-reduction, so the result does not
        depend on the partitioning.
    budget : int
        Largest support count accepted in exact mode.

    Returns
    -------
    RipReport
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError("matrix must be two dimensional")
    m, n = matrix.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k must satisfy 1 <= k <= min(m, n) = {min(m, n)}")
    delta, count, exact = _max_deviation(
        matrix, n, k, mode, 0, sample_trials, seed, workers, budget
    )
    return RipReport(k=k, delta=delta, enumerated_supports=count, exact=exact)


def compute_drip(
    ens: SensingEnsemble,
    k: int,
    mode: str = "exact",
    *,
    sample_trials: int | None = None,
    seed: int = 0,
    workers: int = 1,
    budget: int = ENUMERATION_BUDGET,
) -> DRipReport:
    """Order-2k duplicate restricted isometry constant of ``[A, B]``.

    Every size-k support T selects the 2k columns ``[A_T, B_T]`` of the
    stacked matrix; the same T indexes both blocks. Rank-deficient Grams
    (for instance duplicated columns when B equals A) are reported as
    deviations >= 1, not raised.

    Parameters mirror :func:`compute_ric` with C(n, k) joint supports.

    Returns
    -------
    DRipReport
    """
    if not 1 <= k <= min(ens.m, ens.n):
        raise ValueError(
            f"k must satisfy 1 <= k <= min(m, n) = {min(ens.m, ens.n)}"
        )
    psi = ens.stacked()
    delta, count, exact = _max_deviation(
        psi, ens.n, k, mode, ens.n, sample_trials, seed, workers, budget
    )
    return DRipReport(k=k, delta_bar=delta, enumerated_supports=count, exact=exact)


def drip_threshold(r: float) -> float:
    """Admissibility threshold on the order-4k duplicate constant.

    Returns ``1 / (sqrt(2 (1 + r^2)) + 1)``, the largest duplicate
    isometry constant under which sparse recovery from measurements with
    column scalings bounded by ``r`` is guaranteed. Decreases from
    ``sqrt(2) - 1`` at r = 0 toward 0 as r grows.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    return 1.0 / (math.sqrt(2.0 * (1.0 + r * r)) + 1.0)


def max_perturbation_radius(delta_bar: float) -> float:
    """Largest admissible perturbation radius at a given isometry constant.

    Inverts :func:`drip_threshold`: returns
    ``sqrt((1/2) (1/delta_bar - 1)^2 - 1)`` when the radicand is positive
    and 0.0 otherwise (no radius is admissible once ``delta_bar`` reaches
    ``sqrt(2) - 1``).
    """
    if not 0.0 < delta_bar < 1.0:
        raise ValueError("delta_bar must lie in (0, 1)")
    radicand = 0.5 * (1.0 / delta_bar - 1.0) ** 2 - 1.0
    return math.sqrt(radicand) if radicand > 0.0 else 0.0


def sparse_bound_constants(
    delta_bar_4k: float, r: float, psi_norm: float
) -> BoundReport:
    """Error-bound constants for exactly sparse recovery.

    Evaluates, for a signal bound ``C`` and a perturbation bound ``C_p``,

        C   = 4 sqrt(1 + d) / (1 - (sqrt(2 (1 + r^2)) + 1) d)
        C_p = (2 + sqrt(1 + r^2) psi_norm C) / sqrt(1 - d)

    at ``d = delta_bar_4k``, provided ``d < drip_threshold(r)``; both are
    ``inf`` when the condition fails.

    Parameters
    ----------
    delta_bar_4k : float
        Order-4k duplicate isometry constant of the stacked ensemble.
    r : float
        Perturbation radius.
    psi_norm : float
        Spectral norm of the stacked matrix ``[A, B]``.
    """
    if delta_bar_4k < 0:
        raise ValueError("delta_bar_4k must be nonnegative")
    if psi_norm < 0:
        raise ValueError("psi_norm must be nonnegative")
    threshold = drip_threshold(r)
    met = delta_bar_4k < threshold
    if met:
        d = delta_bar_4k
        c_sig = 4.0 * math.sqrt(1.0 + d) / (
            1.0 - (math.sqrt(2.0 * (1.0 + r * r)) + 1.0) * d
        )
        c_ptb = (2.0 + math.sqrt(1.0 + r * r) * psi_norm * c_sig) / math.sqrt(
            1.0 - d
        )
    else:
        c_sig = math.inf
        c_ptb = math.inf
    return BoundReport(
        condition_met=met,
        threshold=threshold,
        constants={"C": c_sig, "C_p": c_ptb},
        psi_spectral_norm=psi_norm,
    )


def compressible_bound_constants(
    delta_bar_4k: float, r: float, psi_norm: float, k: int
) -> BoundReport:
    """Error-bound constants for recovery of compressible signals.

    With ``d = delta_bar_4k``, ``t = sqrt(2 (1 + r^2))``,
    ``a = 1 - (t + 1) d`` and ``b = sqrt(1 - d)``:

        C0   = 2 (1 + (t - 1) d) / a
        C1   = 2 sqrt(2) r d / a
        C0_p = sqrt(1 + r^2) psi_norm C0 / b
        C1_p = (sqrt(1 + r^2) C1 + 2 r) psi_norm / b
        C2   = C    of :func:`sparse_bound_constants`
        C2_p = C_p  of :func:`sparse_bound_constants`

    The constants themselves do not depend on ``k``; the error bound they
    enter is stated for the best k-term approximation of the signal, so the
    support size is recorded as part of the call contract. When the
    admissibility condition fails the C-constants are ``inf`` while the
    denominators ``a`` and ``b`` keep their computed values.
    """
    if delta_bar_4k < 0:
        raise ValueError("delta_bar_4k must be nonnegative")
    if psi_norm < 0:
        raise ValueError("psi_norm must be nonnegative")
    if k < 1:
        raise ValueError("k must be at least 1")
    threshold = drip_threshold(r)
    met = delta_bar_4k < threshold
    d = delta_bar_4k
    t = math.sqrt(2.0 * (1.0 + r * r))
    scale = math.sqrt(1.0 + r * r)
    a = 1.0 - (t + 1.0) * d
    b = math.sqrt(1.0 - d) if d < 1.0 else 0.0
    if met:
        c0 = 2.0 * (1.0 + (t - 1.0) * d) / a
        c1 = 2.0 * _SQRT2 * r * d / a
        c0_p = scale * psi_norm * c0 / b
        c1_p = (scale * c1 + 2.0 * r) * psi_norm / b
        sparse = sparse_bound_constants(delta_bar_4k, r, psi_norm)
        c2 = sparse.C
        c2_p = sparse.C_p
    else:
        c0 = c1 = c0_p = c1_p = c2 = c2_p = math.inf
    return BoundReport(
        condition_met=met,
        threshold=threshold,
        constants={
            "a": a,
            "b": b,
            "C0": c0,
            "C1": c1,
            "C0_p": c0_p,
            "C1_p": c1_p,
            "C2": c2,
            "C2_p": c2_p,
        },
        psi_spectral_norm=psi_norm,
    )


def baseline_bound_constants(delta_2k: float, eps_ratio_2k: float) -> BoundReport:
    """Error-bound constants for unperturbed and nominal-matrix recovery.

    ``C0_std`` and ``C1_std`` bound recovery with an exactly known matrix
    and require ``delta_2k < sqrt(2) - 1``:

        C0_std = 2 (1 + (sqrt(2) - 1) d) / (1 - (sqrt(2) + 1) d)
        C1_std = 4 sqrt(1 + d) / (1 - (sqrt(2) + 1) d)

    ``C_ptb`` bounds recovery with the nominal matrix when the relative
    spectral perturbation over 2k-column submatrices is at most
    ``e = eps_ratio_2k`` and requires ``d < sqrt(2) / (1 + e)^2 - 1``:

        C_ptb = 4 sqrt(1 + d) (1 + e)
                / (1 - (sqrt(2) + 1) ((1 + d) (1 + e)^2 - 1))

    The perturbed condition implies the unperturbed one, so the reported
    threshold is the perturbed-case one; at ``e = 0`` the two coincide and
    ``C_ptb`` equals ``C1_std``.
    """
    if delta_2k < 0:
        raise ValueError("delta_2k must be nonnegative")
    if eps_ratio_2k < 0:
        raise ValueError("eps_ratio_2k must be nonnegative")
    d = delta_2k
    e = eps_ratio_2k
    std_met = d < _SQRT2 - 1.0
    if std_met:
        denom = 1.0 - (_SQRT2 + 1.0) * d
        c0_std = 2.0 * (1.0 + (_SQRT2 - 1.0) * d) / denom
        c1_std = 4.0 * math.sqrt(1.0 + d) / denom
    else:
        c0_std = math.inf
        c1_std = math.inf
    ptb_threshold = _SQRT2 / (1.0 + e) ** 2 - 1.0
    ptb_met = d < ptb_threshold
    if ptb_met:
        inflated = (1.0 + d) * (1.0 + e) ** 2 - 1.0
        c_ptb = (
            4.0 * math.sqrt(1.0 + d) * (1.0 + e)
            / (1.0 - (_SQRT2 + 1.0) * inflated)
        )
    else:
        c_ptb = math.inf
    return BoundReport(
        condition_met=std_met and ptb_met,
        threshold=ptb_threshold,
        constants={"C0_std": c0_std, "C1_std": c1_std, "C_ptb": c_ptb},
        psi_spectral_norm=None,
    )


def error_metrics(gt: GroundTruth, res, k: int) -> dict[str, float]:
    """Recovery error metrics against a known ground truth.

    Parameters
    ----------
    gt : GroundTruth
        True signal and perturbation.
    res : RecoveryResult
        Recovered pair; needs ``x_hat`` and ``beta_hat`` attributes.
    k : int
        Support size used for the best k-term reference.

    Returns
    -------
    dict
        ``signal_err``: l2 error of the recovered signal.
        ``beta_err``: l2 norm of the perturbation error weighted
        entrywise by the best k-term approximation of the true signal,
        so off-support perturbation entries do not count.
        ``support_match``: fraction of the k dominant true entries also
        among the k dominant recovered entries.
    """
    x_hat = np.asarray(res.x_hat)
    beta_hat = np.asarray(res.beta_hat, dtype=float)
    if x_hat.shape != gt.x_o.shape or beta_hat.shape != gt.beta_o.shape:
        raise ValueError("recovered shapes do not match the ground truth")
    if k < 1:
        raise ValueError("k must be at least 1")
    signal_err = float(np.linalg.norm(x_hat - gt.x_o))
    x_k = best_k_term(gt.x_o, k)
    beta_err = float(np.linalg.norm((beta_hat - gt.beta_o) * x_k))
    support_true = np.flatnonzero(x_k)
    support_hat = np.flatnonzero(best_k_term(x_hat, k))
    overlap = np.intersect1d(support_hat, support_true).size
    return {
        "signal_err": signal_err,
        "beta_err": beta_err,
        "support_match": overlap / k,
    }


def spectral_norm(matrix: np.ndarray, rel_tol: float = 1e-10) -> float:
    """Spectral norm by power iteration on the Gram matrix.

    Iterates on the smaller of ``M* M`` and ``M M*`` from a fixed-seed
    random start, stopping once successive singular-value estimates agree
    to ``rel_tol`` relatively. Deterministic for a given input.
    """
    mat = np.asarray(matrix)
    if mat.ndim != 2:
        raise ValueError("matrix must be two dimensional")
    if mat.size == 0 or not np.any(mat):
        return 0.0
    if mat.shape[0] < mat.shape[1]:
        gram = mat @ mat.conj().T
    else:
        gram = mat.conj().T @ mat
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(gram.shape[0])
    if np.iscomplexobj(gram):
        v = v + 1j * rng.standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(100_000):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        # Rayleigh quotient of the Gram matrix is the squared singular value.
        sigma_new = math.sqrt(float(np.real(np.vdot(v, gram @ v))))
        if abs(sigma_new - sigma) <= rel_tol * max(sigma_new, 1e-300):
            return sigma_new
        sigma = sigma_new
    return sigma
