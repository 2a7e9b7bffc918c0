"""Dense complex linear-algebra primitives.

Everything here works on ``complex128`` arrays; real inputs are promoted.
Discrete decisions (ranks, definiteness) are returned together with the
numerical margin they relied on, see :class:`Decision`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DomainError, InputError, NumericalError, RangeError

__all__ = [
    "Tolerances", "Decision", "HermitianSplit", "PolarFactors", "SpectralData",
    "SpectralSummary", "IndexPair", "as_matrix", "hermitian_split",
    "polar_decompose", "numerical_rank", "rank_decision", "definiteness",
    "matrix_sqrt_psd", "matrix_exponential", "spectral_quantities",
    "semisimple_flags", "min_index_rank_vs_gram", "kernel_basis",
    "TOLERANCE_PRESETS", "tolerances_from_env",
]

# ||lambda_i - lambda_j|| below this puts two eigenvalues into one cluster
EIG_CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances. All relative to the norm of the matrix tested.

    ``tol_rank=None`` means the dimension-dependent default ``n * 2**-40``.
    """

    tol_rank: Optional[float] = None
    tol_psd: float = 1e-10
    tol_sym: float = 1e-10
    tol_recon: float = 1e-10
    tol_unit: float = 1e-12

    def __post_init__(self):
        for name in ("tol_rank", "tol_psd", "tol_sym", "tol_recon", "tol_unit"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v >= 0):
                raise InputError(f"{name} must be a nonnegative finite number, got {v!r}")

    def rank_cutoff(self, n):
        return n * 2.0 ** -40 if self.tol_rank is None else self.tol_rank

    def as_dict(self, n=None):
        d = {
            "tol_rank": self.tol_rank,
            "tol_psd": self.tol_psd,
            "tol_sym": self.tol_sym,
            "tol_recon": self.tol_recon,
            "tol_unit": self.tol_unit,
        }
        if n is not None:
            d["tol_rank_effective"] = self.rank_cutoff(n)
        return d

    def updated(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


TOLERANCE_PRESETS = {
    "default": Tolerances(),
    "strict": Tolerances(tol_rank=1e-14, tol_psd=1e-13, tol_sym=1e-13,
                         tol_recon=1e-12, tol_unit=1e-13),
    "loose": Tolerances(tol_rank=1e-8, tol_psd=1e-8, tol_sym=1e-8,
                        tol_recon=1e-8, tol_unit=1e-10),
}


def tolerances_from_env(environ=None):
    """Preset named by ``HYPOINDEX_TOL_PROFILE`` (``default`` if unset)."""
    environ = os.environ if environ is None else environ
    name = environ.get("HYPOINDEX_TOL_PROFILE", "default")
    try:
        return TOLERANCE_PRESETS[name]
    except KeyError:
        raise InputError(
            f"unknown tolerance profile {name!r}; choose from {sorted(TOLERANCE_PRESETS)}"
        ) from None


@dataclass
class Decision:
    """One discrete numerical decision and the margin it relied on.

    For ``kind == "rank"``: ``low`` is the smallest singular value kept,
    ``high`` the largest one dropped (relative to sigma_1).
    For ``kind == "definite"``: ``low`` is the smallest eigenvalue relative
    to the matrix norm and ``high`` is unused.
    """

    kind: str
    label: str
    value: object
    cutoff: float
    low: float
    high: float = 0.0
    indeterminate: bool = False

    def as_dict(self):
        return {
            "kind": self.kind, "label": self.label, "value": self.value,
            "cutoff": self.cutoff, "low": self.low, "high": self.high,
            "indeterminate": self.indeterminate,
        }


@dataclass
class HermitianSplit:
    H: np.ndarray
    S: np.ndarray


@dataclass
class PolarFactors:
    P: np.ndarray
    U: np.ndarray
    Q: np.ndarray
    unique: bool  # U is unique iff A is nonsingular


@dataclass
class SpectralData:
    eigenvalues: np.ndarray
    semisimple_flags: np.ndarray
    singular_values: np.ndarray


@dataclass
class SpectralSummary:
    spectrum: SpectralData
    alpha: float
    mu: float
    rho: float
    sigma_max: float


@dataclass
class IndexPair:
    m_rank: Optional[int]
    m_gram: Optional[int]
    audit: list = field(default_factory=list)

    @property
    def indeterminate(self):
        return any(d.indeterminate for d in self.audit)

    @property
    def agree(self):
        return self.m_rank == self.m_gram


def as_matrix(A, name="A", square=True):
    """Convert to a finite complex128 2-D array, raising InputError otherwise."""
    try:
        M = np.array(A, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: cannot convert to a complex matrix ({exc})") from None
    if M.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise InputError(f"{name} must be square, got shape {M.shape}")
    if M.size == 0:
        raise InputError(f"{name} is empty")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def _herm(M):
    return (M + M.conj().T) / 2


def _norm2(M):
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def hermitian_split(A):
    """Split ``A = H + S`` into Hermitian and skew-Hermitian parts.

    >>> sp = hermitian_split([[1, -1], [1, 0]])
    >>> sp.H.real
    array([[1., 0.],
           [0., 0.]])
    """
    A = as_matrix(A)
    AH = A.conj().T
    return HermitianSplit(H=(A + AH) / 2, S=(A - AH) / 2)


def _svd(M):
    try:
        return np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed for matrix of shape {M.shape}: {exc}") from None


def polar_decompose(A, tol=Tolerances()):
    """Polar factors ``A = P U = U Q`` from one SVD ``A = W diag(s) V^H``.

    ``U = W V^H``, ``P = W diag(s) W^H``, ``Q = V diag(s) V^H``. For singular
    ``A`` the unitary factor is not unique; this choice is the canonical SVD
    one and ``unique`` is False.
    """
    A = as_matrix(A)
    W, s, Vh = _svd(A)
    V = Vh.conj().T
    U = W @ Vh
    P = _herm((W * s) @ W.conj().T)
    Q = _herm((V * s) @ Vh)
    n = A.shape[0]
    nonsingular = s[-1] > tol.rank_cutoff(n) * s[0] if s[0] > 0 else False
    return PolarFactors(P=P, U=U, Q=Q, unique=bool(nonsingular))


def rank_decision(M, tol=Tolerances(), label="rank", n=None, scale=None):
    """Numerical rank of a (possibly rectangular) matrix with its gap audit.

    Singular values ``<= cutoff * sigma_1`` count as zero, where
    ``cutoff = tol.rank_cutoff(n)`` and ``n`` defaults to the row count.
    A known natural ``scale`` replaces ``sigma_1`` when it is larger, so a
    matrix made only of rounding noise has rank zero.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0] if n is None else n
    cutoff = tol.rank_cutoff(n)
    if M.size == 0:
        return Decision("rank", label, 0, cutoff, 0.0, 0.0)
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return Decision("rank", label, 0, cutoff, 0.0, 0.0)
    rel = s / max(s[0], scale or 0.0)
    r = int(np.sum(rel > cutoff))
    low = float(rel[r - 1]) if r > 0 else 0.0
    high = float(rel[r]) if r < len(rel) else 0.0
    indeterminate = (r > 0 and low < 10 * cutoff) or high > cutoff / 10
    return Decision("rank", label, r, cutoff, low, high, bool(indeterminate))


def numerical_rank(M, tol=Tolerances()):
    """Count of singular values above ``tol_rank * sigma_1`` (0 for M = 0)."""
    return rank_decision(M, tol).value


def definiteness(M, tol=Tolerances(), label="definite"):
    """Positive definiteness test of the Hermitian part of ``M``.

    Positive definite iff ``lambda_min > tol_psd * ||M||``; values within one
    decade of the threshold are flagged ``indeterminate``.
    """
    Hm = _herm(np.asarray(M, dtype=complex))
    nrm = _norm2(Hm)
    if nrm == 0.0:
        return Decision("definite", label, False, tol.tol_psd, 0.0)
    lam_min = float(np.linalg.eigvalsh(Hm)[0]) / nrm
    thr = tol.tol_psd
    ok = lam_min > thr
    indeterminate = thr / 10 < lam_min < 10 * thr if thr > 0 else False
    return Decision("definite", label, bool(ok), thr, lam_min, 0.0, bool(indeterminate))


def _check_hermitian(M, tol, name):
    nrm = max(_norm2(M), 1.0)
    if np.linalg.norm(M - M.conj().T, 2) > tol.tol_sym * nrm:
        raise DomainError(f"{name} is not Hermitian within tol_sym={tol.tol_sym}")


def matrix_sqrt_psd(M, tol=Tolerances()):
    """Hermitian PSD square root by eigendecomposition.

    Eigenvalues in ``[-tol_psd * ||M||, 0)`` are clamped to zero.
    """
    M = as_matrix(M, "M")
    _check_hermitian(M, tol, "M")
    w, V = np.linalg.eigh(_herm(M))
    scale = max(abs(w).max(), 1e-300)
    if w[0] < -tol.tol_psd * scale:
        raise DomainError(f"M is not positive semi-definite (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return _herm((V * np.sqrt(w)) @ V.conj().T)


def matrix_exponential(A, t=1.0):
    """``expm(A t)`` by scaling and squaring with a degree-13 Pade approximant.

    Raises RangeError when ``mu(A) t`` is so large that the result overflows.
    """
    A = as_matrix(A)
    if not np.isfinite(t):
        raise InputError("t must be finite")
    mu = float(np.linalg.eigvalsh(_herm(A))[-1])
    if mu * t > 700.0:
        raise RangeError(f"exp(A t) overflows: mu(A) * t = {mu * t:.3g}")
    E = scipy.linalg.expm(A * t)
    if not np.all(np.isfinite(E)):
        raise RangeError("exp(A t) produced non-finite entries")
    return E


def _clusters(eigs, atol=EIG_CLUSTER_TOL):
    """Group eigenvalue indices by single-linkage within ``atol``."""
    n = len(eigs)
    labels = list(range(n))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= atol:
                labels[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def semisimple_flags(A, eigs=None, tol=Tolerances()):
    """Per eigenvalue: geometric multiplicity equals the cluster size."""
    A = as_matrix(A)
    n = A.shape[0]
    if eigs is None:
        eigs = np.linalg.eigvals(A)
    flags = np.ones(n, dtype=bool)
    eye = np.eye(n)
    for group in _clusters(eigs):
        if len(group) == 1:
            continue
        lam = np.mean(eigs[group])
        geo = n - numerical_rank(A - lam * eye, tol)
        flags[group] = geo >= len(group)
    return flags


def spectral_quantities(A, tol=Tolerances()):
    """Eigenvalues, singular values and the scalars alpha, mu, rho, sigma_max.

    alpha is the spectral abscissa, mu the Euclidean logarithmic norm
    (largest eigenvalue of the Hermitian part), rho the spectral radius.
    """
    A = as_matrix(A)
    try:
        eigs = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from None
    sv = np.linalg.svd(A, compute_uv=False)
    spec = SpectralData(eigenvalues=eigs, semisimple_flags=semisimple_flags(A, eigs, tol),
                        singular_values=sv)
    return SpectralSummary(
        spectrum=spec,
        alpha=float(eigs.real.max()),
        mu=float(np.linalg.eigvalsh(_herm(A))[-1]),
        rho=float(abs(eigs).max()),
        sigma_max=float(sv[0]),
    )


def kernel_basis(M, tol=Tolerances(), n=None):
    """Orthonormal basis (columns) of the numerical right kernel of ``M``."""
    M = np.asarray(M, dtype=complex)
    r = rank_decision(M, tol, n=n).value
    _, _, Vh = np.linalg.svd(M)
    return Vh[r:].conj().T


def _unit(M):
    nrm = _norm2(M)
    return M / nrm if nrm > 0 else M


def min_index_rank_vs_gram(D, C, m_max, tol=Tolerances(), label=""):
    """Smallest ``m <= m_max`` for the rank and the Gram criterion.

    Rank criterion: ``rank[D, C D, ..., C^m D] = n``.
    Gram criterion: ``sum_{j<=m} C^j D (C^H)^j`` positive definite.
    Either is ``None`` if no such ``m`` exists. For PSD ``D`` the two are
    equal. ``D`` and ``C`` are normalised to unit spectral norm first; neither
    criterion depends on positive scalings.
    """
    D = as_matrix(D, "D")
    C = as_matrix(C, "C")
    n = D.shape[0]
    if C.shape != D.shape:
        raise InputError(f"D and C must have the same shape, got {D.shape} and {C.shape}")
    _check_hermitian(D, tol, "D")
    D = _herm(D)
    w = np.linalg.eigvalsh(D)
    if w[0] < -tol.tol_psd * max(abs(w).max(), 1e-300):
        raise DomainError(f"D is not positive semi-definite (min eigenvalue {w[0]:.3e})")
    D = _unit(D)
    C = _unit(C)

    audit = []
    m_rank = m_gram = None
    rank_margin = np.inf
    block = D
    kalman = D
    gram = np.zeros_like(D)
    tag = f"{label}:" if label else ""
    for m in range(m_max + 1):
        if m > 0:
            block = C @ block
            kalman = np.hstack([kalman, block])
        term = block @ np.linalg.matrix_power(C.conj().T, m) if m else D
        gram = gram + term
        if m_rank is None:
            dec = rank_decision(kalman, tol, label=f"{tag}kalman m={m}", n=n)
            audit.append(dec)
            if dec.value == n:
                m_rank = m
                rank_margin = dec.low
        if m_gram is None:
            dec = definiteness(gram, tol, label=f"{tag}gram m={m}")
            if not dec.value and m_rank is not None and rank_margin ** 2 < 10 * tol.tol_psd:
                # The Gram eigenvalues are squares of singular values of
                # [D^(1/2), C D^(1/2), ...], so the Gram test resolves only
                # half the digits the rank test does. A rank certificate
                # whose margin squared is below the Gram margin cannot be
                # confirmed by the Gram route: near-miss, not a contradiction.
                dec.indeterminate = True
            audit.append(dec)
            if dec.value:
                m_gram = m
        if m_rank is not None and m_gram is not None:
            break
    return IndexPair(m_rank=m_rank, m_gram=m_gram, audit=audit)
