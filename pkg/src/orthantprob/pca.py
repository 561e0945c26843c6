"""Correlation analogue: principal components versus original variables.

For centered Gaussian data with a known covariance, estimate how often a
principal component is more correlated (in absolute value) with a response
than an original variable is.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .montecarlo import GENERATOR_NAME, McEstimate, check_seed, spawn_generators

COVARIANCE_KINDS = ("identity", "diagonal", "random_spd")
Z_MODELS = ("random_direction", "noisy_linear", "independent")


class NonSymmetricError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class DegenerateDataError(ValueError):
    """A correlation was requested for a constant vector."""


@dataclass(frozen=True)
class CovarianceSpec:
    p: int
    kind: str = "identity"
    spectrum: tuple[float, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if self.kind not in COVARIANCE_KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        if self.kind == "identity":
            return
        if self.spectrum is None:
            raise ValueError(f"{self.kind} covariance needs a spectrum")
        spec = tuple(float(x) for x in self.spectrum)
        object.__setattr__(self, "spectrum", spec)
        if len(spec) != self.p:
            raise ValueError(f"spectrum has {len(spec)} entries, expected {self.p}")
        if any(not x > 0 for x in spec):
            raise ValueError("spectrum entries must be positive")
        if any(a < b for a, b in zip(spec, spec[1:])):
            raise ValueError("spectrum must be listed in nonincreasing order")
        if self.kind == "random_spd" and self.seed is None:
            raise ValueError("random_spd covariance needs a seed")


def random_orthogonal(p: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormalize a Gaussian matrix by modified Gram-Schmidt.

    The triangular factor has a positive diagonal (each column norm), which
    makes the result Haar distributed.
    """
    q = rng.standard_normal((p, p))
    for k in range(p):
        for i in range(k):
            q[:, k] -= (q[:, i] @ q[:, k]) * q[:, i]
        q[:, k] /= np.linalg.norm(q[:, k])
    return q


def make_spd(spec: CovarianceSpec) -> np.ndarray:
    if spec.kind == "identity":
        return np.eye(spec.p)
    lam = np.asarray(spec.spectrum)
    if spec.kind == "diagonal":
        return np.diag(lam)
    q = random_orthogonal(spec.p, np.random.Generator(np.random.PCG64(spec.seed)))
    a = (q * lam) @ q.T
    return 0.5 * (a + a.T)


@dataclass
class PcBasis:
    components: np.ndarray  # columns are PC directions, eigenvalue-descending
    eigenvalues: np.ndarray
    sweeps: int = 0


def _off_diagonal_norm(a: np.ndarray) -> float:
    # not sum(a^2) - sum(diag^2): that cancels catastrophically near convergence
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def eigen_decompose(a, tol: float = 1e-12, max_sweeps: int = 100) -> PcBasis:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Pivots run row by row over the strict upper triangle, so the result is
    deterministic. Iteration stops once the off-diagonal Frobenius mass is at
    most ``tol * ||A||_F``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    scale = np.linalg.norm(a)
    if np.abs(a - a.T).max(initial=0.0) > 1e-10 * max(scale, 1.0):
        raise NonSymmetricError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    target = tol * scale

    for sweep in range(max_sweeps + 1):
        if _off_diagonal_norm(a) <= target:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta**2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return PcBasis(components=v[:, order], eigenvalues=w[order], sweeps=sweep)


def pearson_corr(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("need two 1-d vectors of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateDataError("correlation with a constant vector")
    return max(-1.0, min(1.0, float(xc @ yc) / (sx * sy)))


@dataclass(frozen=True)
class ZModel:
    """How the response is generated from a data matrix."""

    kind: str = "random_direction"
    noise: float = 1.0

    def __post_init__(self):
        if self.kind not in Z_MODELS:
            raise ValueError(f"unknown response model {self.kind!r}")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")

    def draw(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        n, p = x.shape
        if self.kind == "independent":
            return rng.standard_normal(n)
        beta = rng.standard_normal(p)
        beta /= np.linalg.norm(beta)
        z = x @ beta
        if self.kind == "noisy_linear":
            z = z + self.noise * rng.standard_normal(n)
        return z


@dataclass
class ExperimentReport:
    config: dict
    # (k, i), 1-based -> frequency of |rho(Y_k, Z)| >= |rho(X_i, Z)|
    estimates: dict[tuple[int, int], McEstimate]
    n_trials: int
    n_obs: int
    skipped: int
    seed: int
    pc_source: str
    generator: str = GENERATOR_NAME
    notes: list[str] = field(default_factory=list)

    @property
    def skip_rate(self) -> float:
        return self.skipped / self.n_trials

    def matrix(self) -> np.ndarray:
        p = self.config["p"]
        out = np.full((p, p), np.nan)
        for (k, i), est in self.estimates.items():
            out[k - 1, i - 1] = est.estimate
        return out


def _abs_corrs(data: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.array([abs(pearson_corr(col, z)) for col in data.T])


def run_experiment(spec: CovarianceSpec, k: int, i: int, n_obs: int, n_trials: int,
                   z_model: ZModel, seed: int, full_matrix: bool = False,
                   sample_pca: bool = False) -> ExperimentReport:
    """Estimate ``P[|rho(Y_k, Z)| >= |rho(X_i, Z)|]`` by repeated trials.

    ``k`` and ``i`` are 1-based. PC directions come from the population
    covariance unless ``sample_pca`` is set, in which case each trial uses
    the eigenvectors of its own sample covariance.
    """
    p = spec.p
    if not (1 <= k <= p and 1 <= i <= p):
        raise ValueError(f"k and i must lie in 1..{p}")
    if n_obs < 10 * p:
        raise ValueError(f"n_obs must be >= 10 p = {10 * p}")
    if n_trials < 100:
        raise ValueError("n_trials must be >= 100")
    check_seed(seed)

    sigma = make_spd(spec)
    basis = eigen_decompose(sigma)
    q = basis.components
    mix = q * np.sqrt(np.clip(basis.eigenvalues, 0.0, None))  # X = G mix^T has cov Sigma

    pairs = [(kk, ii) for kk in range(1, p + 1) for ii in range(1, p + 1)] if full_matrix else [(k, i)]
    hits = dict.fromkeys(pairs, 0)
    skipped = 0
    for rng in spawn_generators(seed, n_trials):
        x = rng.standard_normal((n_obs, p)) @ mix.T
        z = z_model.draw(x, rng)
        pcs = eigen_decompose(np.cov(x, rowvar=False)).components if sample_pca else q
        try:
            ry = _abs_corrs(x @ pcs, z)
            rx = _abs_corrs(x, z)
        except DegenerateDataError:
            skipped += 1
            continue
        for kk, ii in pairs:
            if ry[kk - 1] >= rx[ii - 1]:
                hits[kk, ii] += 1

    done = n_trials - skipped
    if done == 0:
        raise DegenerateDataError("every trial was degenerate")
    estimates = {pair: McEstimate.from_counts(h, done, seed) for pair, h in hits.items()}
    config = {
        "p": p,
        "covariance": asdict(spec),
        "k": k,
        "i": i,
        "n_obs": n_obs,
        "n_trials": n_trials,
        "z_model": asdict(z_model),
        "seed": seed,
        "full_matrix": full_matrix,
        "sample_pca": sample_pca,
    }
    notes = []
    if np.ptp(basis.eigenvalues) == 0.0 and not sample_pca:
        notes.append("all eigenvalues tie: the PC basis is the identity, so k == i compares a "
                     "variable with itself and is always an event")
    return ExperimentReport(
        config=config,
        estimates=estimates,
        n_trials=n_trials,
        n_obs=n_obs,
        skipped=skipped,
        seed=seed,
        pc_source="sample" if sample_pca else "population",
        notes=notes,
    )
