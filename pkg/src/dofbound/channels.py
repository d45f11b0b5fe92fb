"""Isotropic fading samplers, the amplitude/phase SVD decomposition with
randomized phase factor, and statistical isotropy testing.

A matrix-valued distribution is isotropic when R and R @ Q are identically
distributed for every fixed unitary Q. Full distributional equality is not
testable from samples, so :func:`check_isotropy` tests a falsifiable
necessary condition: scalar projections of R and R @ Q must agree in
distribution for a handful of fixed random probes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

MODELS = ("rayleigh", "scaled_haar", "scaled_column", "constant")


def sample_haar_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw Haar-uniform n x n unitary matrices.

    Uses QR of a complex Ginibre matrix with the phases of the triangular
    factor's diagonal absorbed into Q, which makes the law exactly Haar.
    With ``size=None`` returns one (n, n) matrix, else a (size, n, n) stack.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.einsum("...ii->...i", r)
    q = q * (d / np.abs(d))[..., None, :]
    return q


def sample_rayleigh(n_rows: int, n_cols: int, rng: np.random.Generator,
                    size: int | None = None) -> np.ndarray:
    """Draw i.i.d. circularly symmetric complex Gaussian matrices with unit
    variance per entry, so the expected squared Frobenius norm is
    ``n_rows * n_cols``.
    """
    if n_rows < 1 or n_cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {n_rows} x {n_cols}")
    shape = (n_rows, n_cols) if size is None else (size, n_rows, n_cols)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass
class SvdTriple:
    """SVD factors (W, Lambda, V) of one channel realization.

    ``w`` is N x K with orthonormal columns, ``s`` holds the K singular
    values in descending order (K = min(M, N), zeros retained), and ``v``
    is M x K with orthonormal columns. After randomization ``v`` is no
    longer the SVD factor of the input; see :func:`lemma1_decompose`.
    """

    w: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def lam(self) -> np.ndarray:
        """The K x K diagonal amplitude matrix."""
        return np.diag(self.s)

    def reconstruct(self) -> np.ndarray:
        """w @ diag(s) @ v^H; equals the input only for the deterministic factor."""
        return (self.w * self.s[None, :]) @ self.v.conj().T


def lemma1_decompose(r_mat: np.ndarray, rng: np.random.Generator,
                     randomize: bool = True) -> SvdTriple:
    """Decompose a channel matrix into amplitude and phase factors.

    Computes the SVD ``R = W diag(s) V0^H`` and, when ``randomize`` is
    true, replaces V0 by ``Q^H V0`` for a fresh Haar unitary Q. For an
    isotropic input law this leaves the joint law of (W, s) unchanged
    while making V uniform on the set of M x K matrices with orthonormal
    columns, independent of (W, s). Zero singular values are retained.
    """
    r_mat = np.asarray(r_mat, dtype=complex)
    if r_mat.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(r_mat.real)) or not np.all(np.isfinite(r_mat.imag)):
        raise ValueError("matrix entries must be finite")
    w, s, vh = np.linalg.svd(r_mat, full_matrices=False)
    v = vh.conj().T
    if randomize:
        q = sample_haar_unitary(r_mat.shape[1], rng)
        v = q.conj().T @ v
    return SvdTriple(w=w, s=s, v=v)


def elementwise_min_diag(diag1, diag2):
    """Entrywise minimum of two real nonnegative diagonals.

    Accepts either 1-D arrays of diagonal entries or 2-D diagonal matrices
    (both arguments in the same form); returns the same form.
    """
    d1 = np.asarray(diag1)
    d2 = np.asarray(diag2)
    if d1.shape != d2.shape:
        raise ValueError(f"size mismatch: {d1.shape} vs {d2.shape}")
    as_matrix = d1.ndim == 2
    if as_matrix:
        if d1.shape[0] != d1.shape[1]:
            raise ValueError("diagonal matrices must be square")
        off1 = d1 - np.diag(np.diag(d1))
        off2 = d2 - np.diag(np.diag(d2))
        if np.any(off1 != 0) or np.any(off2 != 0):
            raise ValueError("matrices must be diagonal")
        d1 = np.diag(d1)
        d2 = np.diag(d2)
    elif d1.ndim != 1:
        raise ValueError("expected 1-D diagonals or 2-D diagonal matrices")
    if np.any(np.iscomplex(d1)) or np.any(np.iscomplex(d2)):
        raise ValueError("diagonals must be real")
    d1 = d1.real.astype(float)
    d2 = d2.real.astype(float)
    if np.any(d1 < 0) or np.any(d2 < 0):
        raise ValueError("diagonals must be nonnegative")
    out = np.minimum(d1, d2)
    return np.diag(out) if as_matrix else out


@dataclass
class ChannelSampler:
    """Seeded sampler of N x M channel matrices.

    Models:

    - ``rayleigh``: i.i.d. CSCG entries, unit variance (isotropic).
    - ``scaled_haar``: ``scale`` times a Haar partial isometry (isotropic,
      non-Gaussian positive control).
    - ``scaled_column``: Rayleigh with the first column multiplied by
      ``scale`` (adversarial, not isotropic).
    - ``constant``: one fixed full-rank matrix drawn at construction
      (adversarial, not isotropic).

    Repeated draws with the same seed reproduce the same sequence. A
    sampler instance owns its generator state and is single-owner; for
    parallel work derive child seeds instead of sharing an instance.
    """

    model: str
    n_rows: int
    n_cols: int
    seed: int | np.random.SeedSequence
    scale: float | None = None
    _rng: np.random.Generator = field(init=False, repr=False)
    _fixed: np.ndarray | None = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown channel model {self.model!r}; expected one of {MODELS}")
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if self.scale is None:
            self.scale = 10.0 if self.model == "scaled_column" else 1.0
        self._rng = np.random.default_rng(self.seed)
        if self.model == "constant":
            self._fixed = sample_rayleigh(self.n_rows, self.n_cols, self._rng)

    @property
    def shape(self) -> tuple:
        return (self.n_rows, self.n_cols)

    def draw(self, n: int) -> np.ndarray:
        """Draw the next ``n`` matrices as an (n, N, M) array."""
        if n < 1:
            raise ValueError("draw count must be positive")
        if self.model == "rayleigh":
            return sample_rayleigh(self.n_rows, self.n_cols, self._rng, size=n)
        if self.model == "scaled_haar":
            k = max(self.n_rows, self.n_cols)
            q = sample_haar_unitary(k, self._rng, size=n)
            return self.scale * q[:, : self.n_rows, : self.n_cols]
        if self.model == "scaled_column":
            h = sample_rayleigh(self.n_rows, self.n_cols, self._rng, size=n)
            h[:, :, 0] *= self.scale
            return h
        return np.broadcast_to(self._fixed, (n, self.n_rows, self.n_cols)).copy()

    def to_config(self) -> dict:
        if not isinstance(self.seed, int):
            raise ValueError("only integer-seeded samplers are serializable")
        doc = {"model": self.model, "N": self.n_rows, "M": self.n_cols, "seed": self.seed}
        if self.scale != (10.0 if self.model == "scaled_column" else 1.0):
            doc["scale"] = self.scale
        return doc

    @classmethod
    def from_config(cls, doc: dict) -> "ChannelSampler":
        return cls(model=doc["model"], n_rows=doc["N"], n_cols=doc["M"],
                   seed=doc["seed"], scale=doc.get("scale"))


@dataclass
class IsotropyReport:
    """Per-probe p-values of the two-sample projection test and the overall
    family-wise verdict. ``passed`` is False only when some probe falls
    below ``level / n_probes`` (Bonferroni). A pass is a necessary-condition
    verdict, never a proof of isotropy.
    """

    p_values: list
    level: float
    passed: bool

    @property
    def threshold(self) -> float:
        return self.level / len(self.p_values)

    def to_json_dict(self) -> dict:
        return {
            "p_values": list(self.p_values),
            "level": self.level,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def check_isotropy(sampler: ChannelSampler, n_samples: int = 2000, n_probes: int = 4,
                   seed: int = 0, level: float = 0.01, probes=None) -> IsotropyReport:
    """Two-sample test of right-unitary invariance.

    For each probe, a fixed random unitary Q and a fixed random partial
    isometry P are drawn; the scalar statistic ``Re tr(R @ P)`` is compared
    between fresh draws of R and fresh draws of R @ Q by a two-sample
    Kolmogorov-Smirnov test. The overall verdict is a fail when any probe's
    p-value drops below ``level / n_probes``.
    """
    if n_samples < 1000:
        raise ValueError(f"need n_samples >= 1000 for a calibrated test, got {n_samples}")
    n, m = sampler.shape
    if probes is None:
        prng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x150,)))
        probes = []
        for _ in range(n_probes):
            q = sample_haar_unitary(m, prng)
            k = max(m, n)
            iso = sample_haar_unitary(k, prng)[:m, :n]
            probes.append((q, iso))
    p_values = []
    for q, proj in probes:
        if q.shape != (m, m) or proj.shape != (m, n):
            raise ValueError(
                f"probe shape mismatch: sampler is {n} x {m}, "
                f"expected Q of ({m}, {m}) and projector of ({m}, {n})"
            )
        base = sampler.draw(n_samples)
        rotated = sampler.draw(n_samples) @ q
        t_base = np.einsum("sij,ji->s", base, proj).real
        t_rot = np.einsum("sij,ji->s", rotated, proj).real
        p_values.append(float(stats.ks_2samp(t_base, t_rot).pvalue))
    threshold = level / len(p_values)
    passed = all(p >= threshold for p in p_values)
    return IsotropyReport(p_values=p_values, level=level, passed=passed)


def matrix_to_json(mat: np.ndarray) -> dict:
    """Serialize a complex matrix as row-major [re, im] pairs."""
    mat = np.asarray(mat, dtype=complex)
    return {
        "rows": mat.shape[0],
        "cols": mat.shape[1],
        "data": [[float(z.real), float(z.imag)] for z in mat.ravel(order="C")],
    }


def matrix_from_json(doc: dict) -> np.ndarray:
    data = np.asarray(doc["data"], dtype=float)
    flat = data[:, 0] + 1j * data[:, 1]
    return flat.reshape(doc["rows"], doc["cols"])
