"""Discrete-time classification and hypocontractivity indices.

``A`` is the system matrix of ``x_{k+1} = A x_k``. It is semi-contractive
when ``sigma_max(A) <= 1``; the hypocontractivity index is the smallest
``m`` with ``I - (A^H)^{m+1} A^{m+1}`` positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coercivity import _abs_rank, _consensus, _reconcile
from .errors import ConsistencyError, DomainError, PreconditionError
from .matcore import (
    EIG_CLUSTER_TOL, Decision, Tolerances, _clusters, _herm, _norm2, as_matrix,
    definiteness, min_index_rank_vs_gram, polar_decompose, rank_decision,
    semisimple_flags,
)
from .staircase import index_from_staircase, staircase_uq

__all__ = [
    "DiscreteClassification", "DhcIndexResult", "DshcIndexResult",
    "classify_discrete", "dhc_index", "scaled_dhc_index", "power_norm_profile",
    "power_norm_index", "unit_modulus_test", "defect_matrix",
]

DHC_METHODS = ("kalman_D1", "gram_D2", "polar_D1prime", "polar_gram_D2prime",
               "staircase", "power_norm")


@dataclass
class DiscreteClassification:
    stable: bool
    asymptotically_stable: bool
    semi_contractive: bool
    contractive: bool
    hypocontractive: bool
    rho: float
    sigma_max: float
    defect_index: int
    indeterminate: list = field(default_factory=list)


@dataclass
class DhcIndexResult:
    exists: bool
    m_dhc: Optional[int]
    per_method: dict
    witness_vector: Optional[np.ndarray] = None
    tolerance_audit: list = field(default_factory=list)
    power_gap: Optional[float] = None
    indeterminate: bool = False
    candidates: list = field(default_factory=list)


@dataclass
class DshcIndexResult:
    sigma_max: float
    exists: bool
    m_dshc: Optional[int]
    criterion_exists: bool = False
    inner: Optional[DhcIndexResult] = None


def defect_matrix(A):
    """``I - A^H A``, Hermitian by construction."""
    A = np.asarray(A, dtype=complex)
    return _herm(np.eye(A.shape[0]) - A.conj().T @ A)


def classify_discrete(A, tol=Tolerances()):
    """Stability and (semi-)contractivity flags of ``x_{k+1} = A x_k``."""
    A = as_matrix(A)
    n = A.shape[0]
    eigs = np.linalg.eigvals(A)
    mod = np.abs(eigs)
    flags = semisimple_flags(A, eigs, tol)
    on_circle = np.abs(mod - 1) <= EIG_CLUSTER_TOL
    stable = bool(np.all(mod <= 1 + EIG_CLUSTER_TOL) and np.all(flags[on_circle]))
    asym = bool(np.all(mod < 1 - EIG_CLUSTER_TOL))
    smax = float(np.linalg.svd(A, compute_uv=False)[0])
    semi = smax <= 1 + tol.tol_psd
    # rounding-level defect eigenvalues are zero, as in dhc_index
    w, E = np.linalg.eigh(defect_matrix(A))
    w[np.abs(w) <= tol.rank_cutoff(n)] = 0.0
    D = _herm((E * w) @ E.conj().T)
    contr = definiteness(D, tol)
    contractive = bool(contr.value and smax < 1)
    defect = rank_decision(D, tol, n=n).value
    indeterminate = []
    if contr.indeterminate:
        indeterminate.append("contractive")
    if tol.tol_psd / 10 < abs(smax - 1) < 10 * tol.tol_psd:
        indeterminate.append("semi_contractive")
    if np.any((np.abs(mod - 1) > EIG_CLUSTER_TOL / 10) & (np.abs(mod - 1) < 10 * EIG_CLUSTER_TOL)):
        indeterminate.append("stable")
    if semi and not stable:
        indeterminate.append("stable")
        stable = True
    return DiscreteClassification(
        stable=stable, asymptotically_stable=asym, semi_contractive=bool(semi),
        contractive=contractive, hypocontractive=asym, rho=float(mod.max()),
        sigma_max=smax, defect_index=defect, indeterminate=sorted(set(indeterminate)),
    )


def _require_semi_contractive(A, tol):
    smax = np.linalg.svd(A, compute_uv=False)[0]
    if smax > 1 + tol.tol_psd:
        raise PreconditionError(
            f"matrix is not semi-contractive (sigma_max = {smax:.6g}); "
            "use scaled_dhc_index for general matrices")
    return smax


def power_norm_profile(A, j_max):
    """``[(j, ||A^j||_2) for j = 1..j_max]``."""
    A = as_matrix(A)
    if int(j_max) < 1:
        raise DomainError("j_max must be a positive integer")
    out = []
    P = np.eye(A.shape[0], dtype=complex)
    for j in range(1, int(j_max) + 1):
        P = P @ A
        out.append((j, float(np.linalg.svd(P, compute_uv=False)[0])))
    return out


def _power_margin(sv, tol, n):
    """Smallest eigenvalue of ``I - (A^H)^j A^j`` relative to its norm, from
    the singular values ``sv`` of ``A^j``. Eigenvalues under the rank cutoff
    count as zero (see :func:`dhc_index`)."""
    d = 1 - np.asarray(sv) ** 2
    d[np.abs(d) <= tol.rank_cutoff(n)] = 0.0
    scale = np.abs(d).max()
    return float(d[0] / scale) if scale > 0 else 0.0


def power_norm_index(A, tol=Tolerances(), m_max=None):
    """Last ``j`` with ``||A^j|| = 1`` for semi-contractive ``A``.

    A power counts as strictly below one when
    ``1 - ||A^j||^2 > tol_psd * ||I - (A^H)^j A^j||``, i.e. the same margin the
    Gram test uses, but evaluated from singular values of ``A^j``. Returns
    ``(m, gap, decisions)`` with ``m = None`` if no drop happens by
    ``m_max + 1`` (default ``n - 1``).
    """
    A = as_matrix(A)
    n = A.shape[0]
    m_max = n - 1 if m_max is None else m_max
    P = np.eye(n, dtype=complex)
    audit = []
    for m in range(m_max + 1):
        P = P @ A
        sv = np.linalg.svd(P, compute_uv=False)
        rel = _power_margin(sv, tol, n)
        thr = tol.tol_psd
        dec = Decision("definite", f"power_norm j={m + 1}", bool(rel > thr), thr, float(rel),
                       indeterminate=bool(thr / 10 < rel < 10 * thr))
        audit.append(dec)
        if dec.value:
            return m, float(1 - sv[0]), audit
    return None, None, audit


def _invariant_eigvec(D, C, A, tol):
    """Eigenvector of ``A`` in the orthogonal complement of the Kalman space
    ``range[D, C D, ..., C^{n-1} D]`` (``C = A^H``); this complement is
    ``A``-invariant and lies in ``ker D``."""
    n = D.shape[0]
    blocks = [D]
    for _ in range(n - 1):
        blocks.append(C @ blocks[-1])
    K = np.hstack(blocks)
    Uk, _, _ = np.linalg.svd(K)
    r = rank_decision(K, tol, n=n).value
    W = Uk[:, r:]
    if W.shape[1] == 0:
        return None
    _, Y = np.linalg.eig(W.conj().T @ A @ W)
    v = W @ Y[:, 0]
    return v / np.linalg.norm(v)


def _snap(M, lo, hi, cut):
    """Clip the spectrum of Hermitian ``M`` to ``[lo, hi]`` and snap
    eigenvalues within ``cut`` of either end onto it."""
    w, E = np.linalg.eigh(_herm(M))
    w = np.clip(w, lo, hi)
    w[w - lo <= cut] = lo
    w[hi - w <= cut] = hi
    return _herm((E * w) @ E.conj().T)


def dhc_index(A, tol=Tolerances()):
    """Hypocontractivity index of a semi-contractive matrix.

    Six routes: Kalman rank and Gram sum for ``(A^H, I - A^H A)``, Kalman
    rank and Gram sum for the polar pair ``(U^H, I - Q^2)``, the ``(U, Q)``
    staircase form, and the first power with ``||A^j|| < 1``. When no index
    exists the witness is an eigenvector of ``A`` in ``ker(I - A^H A)``.
    """
    A = as_matrix(A)
    _require_semi_contractive(A, tol)
    n = A.shape[0]
    # The defects below are differences from I, whose norm is the natural
    # scale: eigenvalues under the rank cutoff are rounding noise and are
    # zeroed, otherwise the unit normalisation downstream would amplify them.
    cut = tol.rank_cutoff(n)
    D = _snap(defect_matrix(A), 0.0, 1.0, cut)
    audit = []
    direct = min_index_rank_vs_gram(D, A.conj().T, n - 1, tol, label="D")
    audit += direct.audit
    pf = polar_decompose(A, tol)
    Dp = _snap(np.eye(n) - pf.Q @ pf.Q, 0.0, 1.0, cut)
    polar = min_index_rank_vs_gram(Dp, pf.U.conj().T, n - 1, tol, label="polar")
    audit += polar.audit
    Qc = _snap(pf.Q, 0.0, 1.0, cut)
    form = staircase_uq(pf.U, Qc, tol)
    audit += form.audit
    m_pow, gap, pow_audit = power_norm_index(A, tol)
    audit += pow_audit

    per_method = {
        "kalman_D1": direct.m_rank,
        "gram_D2": direct.m_gram,
        "polar_D1prime": polar.m_rank,
        "polar_gram_D2prime": polar.m_gram,
        "staircase": index_from_staircase(form).index,
        "power_norm": m_pow,
    }
    exists_flags = [v is not None for v in per_method.values()]
    indeterminate, candidates = _reconcile(per_method, exists_flags, audit, "dhc_index")
    m = _consensus(per_method, direct.m_rank) if indeterminate else direct.m_gram
    witness = None
    if m is None:
        witness = _invariant_eigvec(D, A.conj().T, A, tol)
    return DhcIndexResult(
        exists=m is not None, m_dhc=m, per_method=per_method, witness_vector=witness,
        tolerance_audit=audit, power_gap=gap, indeterminate=indeterminate,
        candidates=candidates,
    )


def scaled_dhc_index(A, tol=Tolerances()):
    """Hypocontractivity index of ``A / sigma_max(A)`` for nonzero ``A``.

    Existence is cross-checked with the polar criterion: no eigenvector of
    ``Q`` for the eigenvalue ``sigma_max`` may be an eigenvector of ``U``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    smax = float(np.linalg.svd(A, compute_uv=False)[0])
    if smax == 0.0:
        raise DomainError("scaled_dhc_index requires a nonzero matrix")
    inner = dhc_index(A / smax, tol)
    pf = polar_decompose(A, tol)
    w, E = np.linalg.eigh(pf.Q)
    Emax = E[:, smax - w <= tol.rank_cutoff(n) * smax]
    criterion_exists = True
    eu = np.linalg.eigvals(pf.U)
    for group in _clusters(eu):
        lam = np.mean(eu[group])
        X = (pf.U - lam * np.eye(n)) @ Emax
        if _abs_rank(X, tol.rank_cutoff(n)) < Emax.shape[1]:
            criterion_exists = False
            break
    if criterion_exists != inner.exists and not inner.indeterminate:
        raise ConsistencyError(
            f"scaled_dhc_index: polar criterion says exists={criterion_exists}, "
            f"index computation says exists={inner.exists}")
    return DshcIndexResult(sigma_max=smax, exists=inner.exists, m_dshc=inner.m_dhc,
                           criterion_exists=criterion_exists, inner=inner)


@dataclass
class UnitModulusResult:
    has_unit_modulus_eigenvalue: bool
    witness: Optional[np.ndarray]


def _left_null_sweep(Cadj, D, tol):
    """Sweep ``rank[lam I - Cadj, D]`` over the eigenvalues of ``Cadj``."""
    n = D.shape[0]
    eigs = np.linalg.eigvals(Cadj)
    audit = []
    for group in _clusters(eigs):
        lam = np.mean(eigs[group])
        M = np.hstack([lam * np.eye(n) - Cadj, D])
        dec = rank_decision(M, tol, n=n, label=f"pbh lambda={lam:.6g}", scale=1.0)
        audit.append(dec)
        if dec.value < n:
            Uw, _, _ = np.linalg.svd(M)
            w = Uw[:, -1]
            return True, w / np.linalg.norm(w), audit
    return False, None, audit


def unit_modulus_test(A, tol=Tolerances()):
    """Does the semi-contractive ``A`` have an eigenvalue of modulus one?

    Three tests must agree: the eigenvalues themselves, an eigenvector of
    ``A`` in ``ker(I - A^H A)``, and an eigenvector of the polar factor ``U``
    in ``ker(I - Q)``.
    """
    A = as_matrix(A)
    _require_semi_contractive(A, tol)
    eig_test = bool(np.any(np.abs(np.abs(np.linalg.eigvals(A)) - 1) <= EIG_CLUSTER_TOL))
    D = defect_matrix(A)
    structural, witness, audit = _left_null_sweep(A.conj().T, D, tol)
    pf = polar_decompose(A, tol)
    Dq = _herm(np.eye(A.shape[0]) - pf.Q)
    polar, _, audit_p = _left_null_sweep(pf.U.conj().T, Dq, tol)
    audit += audit_p
    if len({eig_test, structural, polar}) != 1 and not any(d.indeterminate for d in audit):
        raise ConsistencyError(
            f"unit_modulus_test: eigenvalue={eig_test}, structural={structural}, "
            f"polar={polar}", audit=[d.as_dict() for d in audit])
    return UnitModulusResult(has_unit_modulus_eigenvalue=structural,
                             witness=witness if structural else None)
