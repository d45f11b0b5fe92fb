"""Closed-form Gaussian mutual information and MMSE, geometric projection
pairs, and the numerical inequality checkers behind the verification
suites.

All mutual informations are restricted to Gaussian inputs so both sides of
every inequality have closed forms; the inequalities under test hold for
arbitrary inputs, and the Gaussian slice is the verifiable one. Natural
logarithm (nats) throughout; any base conversion belongs to presentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelSampler
from .regions import AntennaConfig

MARGIN_SLACK = 1e-9


@dataclass
class GaussianSource:
    """Zero-mean circularly symmetric complex Gaussian input with covariance
    ``sigma`` (Hermitian PSD). An optional power budget bounds the trace.
    """

    sigma: np.ndarray
    power_budget: float | None = None

    def __post_init__(self):
        mat = np.asarray(self.sigma, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(mat))):
            raise ValueError("covariance must be Hermitian to 1e-12")
        mat = (mat + mat.conj().T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(mat)
        if np.min(eigvals) < -1e-12 * max(1.0, float(np.max(np.abs(eigvals)))):
            raise ValueError(f"covariance is not PSD (min eigenvalue {np.min(eigvals):g})")
        if np.min(eigvals) < 0:
            eigvals = np.clip(eigvals, 0.0, None)
            mat = (eigvecs * eigvals[None, :]) @ eigvecs.conj().T
            mat = (mat + mat.conj().T) / 2.0
        self.sigma = mat
        if self.power_budget is not None:
            tr = float(np.trace(mat).real)
            if tr > self.power_budget * (1 + 1e-12) + 1e-12:
                raise ValueError(f"trace {tr:g} exceeds power budget {self.power_budget:g}")

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @classmethod
    def isotropic(cls, dim: int, power: float) -> "GaussianSource":
        """White input with total power ``power`` spread over ``dim`` antennas."""
        return cls((power / dim) * np.eye(dim), power_budget=power)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, scale: float = 1.0) -> "GaussianSource":
        """Random Wishart-type covariance with mean diagonal ``scale``."""
        a = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
        return cls(scale * (a @ a.conj().T) / dim)


def _logdet_hermitian(mat: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(mat)
    return float(logdet)


def gaussian_mi(h: np.ndarray, src: GaussianSource, sigma2: float) -> float:
    """Mutual information of y = H x + z in nats, for x ~ CN(0, Sigma) and
    white noise z ~ CN(0, sigma2 I): ``log det(I + H Sigma H^H / sigma2)``.
    """
    if sigma2 <= 0:
        raise ValueError(f"noise variance must be positive, got {sigma2}")
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[1] != src.dim:
        raise ValueError(f"channel shape {h.shape} does not match source dimension {src.dim}")
    n = h.shape[0]
    gram = np.eye(n) + (h @ src.sigma @ h.conj().T) / sigma2
    return _logdet_hermitian(gram)


def _gaussian_mi_batch(h_batch: np.ndarray, sigma: np.ndarray, sigma2: float) -> np.ndarray:
    n = h_batch.shape[1]
    gram = np.eye(n) + (h_batch @ sigma @ h_batch.conj().swapaxes(-1, -2)) / sigma2
    _, logdet = np.linalg.slogdet(gram)
    return logdet


@dataclass
class MonteCarloEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n_samples: int


def mac_sum_mi(cfg: AntennaConfig, power: float, sigma2: float,
               sampler_direct: ChannelSampler, sampler_cross: ChannelSampler,
               n_samples: int) -> MonteCarloEstimate:
    """Monte Carlo estimate of the two-user MAC sum rate at receiver 1:
    ``E log det(I + P/(sigma2 M1) H11 H11^H + P/(sigma2 M2) H21 H21^H)``.
    """
    if power < 0 or sigma2 <= 0:
        raise ValueError("power must be nonnegative and noise variance positive")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if sampler_direct.shape != (cfg.N1, cfg.M1):
        raise ValueError(
            f"direct sampler shape {sampler_direct.shape} does not match (N1, M1)=({cfg.N1}, {cfg.M1})"
        )
    if sampler_cross.shape != (cfg.N1, cfg.M2):
        raise ValueError(
            f"cross sampler shape {sampler_cross.shape} does not match (N1, M2)=({cfg.N1}, {cfg.M2})"
        )
    rho1 = power / (sigma2 * cfg.M1)
    rho2 = power / (sigma2 * cfg.M2)
    h11 = sampler_direct.draw(n_samples)
    h21 = sampler_cross.draw(n_samples)
    gram = (
        np.eye(cfg.N1)
        + rho1 * (h11 @ h11.conj().swapaxes(-1, -2))
        + rho2 * (h21 @ h21.conj().swapaxes(-1, -2))
    )
    _, logdet = np.linalg.slogdet(gram)
    mean = float(np.mean(logdet))
    stderr = float(np.std(logdet, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return MonteCarloEstimate(mean=mean, stderr=stderr, n_samples=n_samples)


@dataclass
class SlopeFit:
    """Least-squares fit of rate against log(1 + SNR); the slope is the
    empirical DoF (pre-log) estimate."""

    slope: float
    intercept: float
    rms_residual: float
    slope_stderr: float


def estimate_dof_slope(curve) -> SlopeFit:
    """Fit rate_nats = slope * ln(1 + 10^(snr_db/10)) + intercept.

    ``curve`` is a sequence of (snr_db, rate_nats) pairs with at least four
    points and strictly increasing SNR.
    """
    pts = list(curve)
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points for a slope fit, got {len(pts)}")
    snr_db = np.asarray([p[0] for p in pts], dtype=float)
    rate = np.asarray([p[1] for p in pts], dtype=float)
    if np.any(np.diff(snr_db) <= 0):
        raise ValueError("SNR grid must be strictly increasing")
    x = np.log1p(10.0 ** (snr_db / 10.0))
    xm = x - x.mean()
    sxx = float(np.dot(xm, xm))
    slope = float(np.dot(xm, rate) / sxx)
    intercept = float(rate.mean() - slope * x.mean())
    resid = rate - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    dof = len(pts) - 2
    stderr = float(np.sqrt(np.dot(resid, resid) / dof / sxx)) if dof > 0 else 0.0
    return SlopeFit(slope=slope, intercept=intercept, rms_residual=rms, slope_stderr=stderr)


def mmse_gaussian(src: GaussianSource, gamma: float, sigma2: float) -> float:
    """Minimum mean-square error of estimating x ~ CN(0, Sigma) from
    ``sqrt(gamma) x + z`` with z ~ CN(0, sigma2 I):
    ``trace(Sigma - gamma Sigma (gamma Sigma + sigma2 I)^-1 Sigma)``.
    Nonincreasing in gamma.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    if sigma2 <= 0:
        raise ValueError(f"noise variance must be positive, got {sigma2}")
    sigma = src.sigma
    a = gamma * sigma + sigma2 * np.eye(src.dim)
    x = np.linalg.solve(a, sigma)
    val = np.trace(sigma).real - gamma * np.trace(sigma @ x).real
    return float(val)


def immse_mi(src: GaussianSource, sigma2: float, order: int = 64) -> float:
    """Mutual information of x + z recovered by integrating the MMSE:
    ``int_0^1 mmse(gamma) / sigma2 dgamma`` with Gauss-Legendre quadrature.
    Must match ``gaussian_mi(I, src, sigma2)`` to quadrature accuracy.
    """
    if order < 8:
        raise ValueError(f"quadrature order must be at least 8, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    gammas = (nodes + 1.0) / 2.0
    total = 0.0
    for g, w in zip(gammas, weights):
        total += (w / 2.0) * mmse_gaussian(src, float(g), sigma2) / sigma2
    return float(total)


@dataclass
class GeometricPair:
    """Weights p_i and row-orthonormal matrices B_i with
    ``sum_i p_i B_i^H B_i = I``; the hypothesis of the projection
    super-additivity inequality.
    """

    weights: tuple
    matrices: tuple

    def __post_init__(self):
        self.weights = tuple(float(p) for p in self.weights)
        self.matrices = tuple(np.asarray(b, dtype=complex) for b in self.matrices)
        if len(self.weights) != len(self.matrices):
            raise ValueError("need one weight per matrix")
        if not self.weights:
            raise ValueError("pair must be nonempty")
        if any(p <= 0 for p in self.weights):
            raise ValueError("weights must be positive")
        dim = self.matrices[0].shape[1]
        acc = np.zeros((dim, dim), dtype=complex)
        for p, b in zip(self.weights, self.matrices):
            if b.ndim != 2 or b.shape[1] != dim:
                raise ValueError("all matrices must share the ambient dimension")
            gram = b @ b.conj().T
            if np.max(np.abs(gram - np.eye(b.shape[0]))) > 1e-10:
                raise ValueError("each B_i must have orthonormal rows (to 1e-10)")
            acc += p * (b.conj().T @ b)
        if np.max(np.abs(acc - np.eye(dim))) > 1e-10:
            raise ValueError("sum_i p_i B_i^H B_i must equal the identity (to 1e-10)")

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[1]


def build_geometric_pair(m: int, l: int) -> GeometricPair:
    """Cyclic-window geometric pair in dimension m.

    B_i selects the standard basis rows with indices i, i+1, ..., i+l-1
    (mod m); every index falls in exactly l of the m windows, so weights
    p_i = 1/l satisfy the geometric condition exactly. With l = m every
    B_i is a permutation of the full basis (the equality case).
    """
    if not 1 <= l <= m:
        raise ValueError(f"need 1 <= l <= m, got l={l}, m={m}")
    eye = np.eye(m)
    mats = []
    for i in range(m):
        rows = [(i + j) % m for j in range(l)]
        mats.append(eye[rows, :])
    return GeometricPair(weights=(1.0 / l,) * m, matrices=tuple(mats))


@dataclass
class InequalityReport:
    """Outcome of one numerical inequality check.

    ``margin = lhs - rhs`` in nats. The verdict is ``violated`` only when
    the margin is below ``-(3 * stderr + 1e-9)``, separating genuine
    counterexamples from Monte Carlo and rounding noise; non-finite
    estimates give ``inconclusive``.
    """

    lhs: float
    rhs: float
    margin: float
    stderr: float
    verdict: str

    def to_json_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "stderr": self.stderr,
            "verdict": self.verdict,
        }


def _verdict(margin: float, stderr: float) -> str:
    if not (math.isfinite(margin) and math.isfinite(stderr)):
        return "inconclusive"
    return "holds" if margin >= -(3.0 * stderr + MARGIN_SLACK) else "violated"


def _report(lhs: float, rhs: float, stderr: float = 0.0) -> InequalityReport:
    margin = lhs - rhs
    return InequalityReport(lhs=lhs, rhs=rhs, margin=margin, stderr=stderr,
                            verdict=_verdict(margin, stderr))


def check_theorem2(src: GaussianSource, pair: GeometricPair, sigma2: float) -> InequalityReport:
    """Super-additivity under weighted orthonormal projections:
    ``sum_i p_i I(B_i(x + z); x) >= I(x + z; x)``.

    Since B_i B_i^H = I the projected noise stays white, so each term is
    ``log det(I + B_i Sigma B_i^H / sigma2)``. Both sides are closed form;
    stderr is zero.
    """
    if pair.dim != src.dim:
        raise ValueError(f"pair dimension {pair.dim} does not match source dimension {src.dim}")
    lhs = 0.0
    for p, b in zip(pair.weights, pair.matrices):
        lhs += p * gaussian_mi(b, src, sigma2)
    rhs = gaussian_mi(np.eye(src.dim), src, sigma2)
    return _report(lhs, rhs)


def _logplus_det_squared(diag: np.ndarray) -> float:
    """log+ of the squared-gain determinant, i.e. max(0, sum_k ln d_k^2)."""
    return max(0.0, float(2.0 * np.sum(np.log(diag))))


def check_lemma2(src: GaussianSource, diag1, diag2, sigma2: float) -> InequalityReport:
    """Lower bound on the information change when the diagonal gain matrix
    is swapped:

    ``I(L1 x + z; x) >= I(L2 x + z; x) - logplus(det(L2^2)) - logplus(det(Lmin^-2))``

    with ``Lmin = min(L1, L2)`` entrywise. The correction terms are in
    squared-gain (power) units: for circularly symmetric complex noise the
    data-processing argument bounds the loss by the log ratio of noise
    powers, which doubles the amplitude-domain constant.
    """
    d1 = np.asarray(diag1, dtype=float)
    d2 = np.asarray(diag2, dtype=float)
    if d1.ndim != 1 or d2.ndim != 1 or d1.shape != d2.shape:
        raise ValueError("diagonals must be 1-D arrays of equal length")
    if d1.shape[0] != src.dim:
        raise ValueError(f"diagonal length {d1.shape[0]} does not match source dimension {src.dim}")
    if np.any(d1 <= 0) or np.any(d2 <= 0):
        raise ValueError("diagonal entries must be positive")
    dmin = np.minimum(d1, d2)
    mi1 = gaussian_mi(np.diag(d1), src, sigma2)
    mi2 = gaussian_mi(np.diag(d2), src, sigma2)
    correction = _logplus_det_squared(d2) + max(0.0, float(-2.0 * np.sum(np.log(dmin))))
    return _report(mi1, mi2 - correction)


def check_lemma3(m_tx: int, n1: int, n2: int, src: GaussianSource, sigma2: float,
                 sampler1: ChannelSampler, sampler2: ChannelSampler,
                 n_samples: int) -> InequalityReport:
    """Weighted comparison of the information delivered through two
    isotropic channels of different receive dimension (N1 <= N2):

    ``(min(N2, M) / min(N1, M)) * E I(H1 x + z1; x | H1)
      >= E I(H2 x + z2; x | H2) + C``

    where C is the explicit constant assembled from the amplitude
    corrections of the decomposition route (singular values clipped at 1,
    squared-gain units), estimated from the same channel draws as the two
    information terms so the sampling noise of the margin is shared.
    """
    if n1 > n2:
        raise ValueError(f"need N1 <= N2, got N1={n1}, N2={n2}")
    if sampler1.shape != (n1, m_tx) or sampler2.shape != (n2, m_tx):
        raise ValueError(
            f"sampler shapes {sampler1.shape}, {sampler2.shape} do not match "
            f"({n1}, {m_tx}), ({n2}, {m_tx})"
        )
    if src.dim != m_tx:
        raise ValueError(f"source dimension {src.dim} does not match M={m_tx}")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    ratio = min(n2, m_tx) / min(n1, m_tx)
    h1 = sampler1.draw(n_samples)
    h2 = sampler2.draw(n_samples)
    a = _gaussian_mi_batch(h1, src.sigma, sigma2)
    b = _gaussian_mi_batch(h2, src.sigma, sigma2)
    s1 = np.linalg.svd(h1, compute_uv=False)
    s2 = np.linalg.svd(h2, compute_uv=False)
    with np.errstate(divide="ignore"):
        # log+(1/det Lmin'^2) terms are -2 sum log min(s, 1), always >= 0.
        c1 = -2.0 * np.sum(np.log(np.minimum(s1, 1.0)), axis=1)
        c2 = np.maximum(0.0, 2.0 * np.sum(np.log(s2), axis=1))
        c3 = -2.0 * np.sum(np.log(np.minimum(s2, 1.0)), axis=1)
    per_draw_margin = ratio * (a + c1) - b + c2 + c3
    mean_margin = float(np.mean(per_draw_margin))
    stderr = float(np.std(per_draw_margin, ddof=1) / np.sqrt(n_samples))
    lhs = ratio * float(np.mean(a))
    constant = -(ratio * float(np.mean(c1)) + float(np.mean(c2)) + float(np.mean(c3)))
    rhs = float(np.mean(b)) + constant
    return InequalityReport(lhs=lhs, rhs=rhs, margin=mean_margin, stderr=stderr,
                            verdict=_verdict(mean_margin, stderr))
