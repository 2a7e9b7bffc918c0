"""Continuous-time classification and hypocoercivity indices.

Conventions: ``A`` denotes a system matrix of ``x' = A x``; ``B`` the
matrix of ``x' = -B x``. ``B`` is accretive when its Hermitian part is
positive semi-definite.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConsistencyError, DomainError, PreconditionError
from .matcore import (
    EIG_CLUSTER_TOL, Tolerances, _clusters, _herm, _norm2, as_matrix, definiteness,
    hermitian_split, kernel_basis, matrix_sqrt_psd, min_index_rank_vs_gram,
    rank_decision, semisimple_flags,
)
from .staircase import index_from_staircase, staircase_jr

__all__ = [
    "ContinuousClassification", "HcIndexResult", "ShcIndexResult",
    "classify_continuous", "hc_index", "shifted_hc_index", "shc_equivalence_check",
    "verify_inverse_index", "accretive_transform", "imaginary_axis_test",
]

HC_METHODS = ("kalman_BS", "gram_BS", "kalman_fullB", "staircase", "pbh_witness")


@dataclass
class ContinuousClassification:
    stable: bool
    asymptotically_stable: bool
    semi_dissipative: bool
    dissipative: bool
    accretive_negation: bool
    negative_hypocoercive: bool
    alpha: float
    mu: float
    indeterminate: list = field(default_factory=list)


@dataclass
class HcIndexResult:
    exists: bool
    m_hc: Optional[int]
    per_method: dict
    witness_vector: Optional[np.ndarray] = None
    tolerance_audit: list = field(default_factory=list)
    kernel_dim: int = 0
    indeterminate: bool = False
    candidates: list = field(default_factory=list)


@dataclass
class ShcIndexResult:
    lambda_min_BH: float
    shifted_matrix_accretive: bool
    exists: bool
    m_shc: Optional[int]
    criterion_exists: bool = False
    inner: Optional[HcIndexResult] = None


def _axis_threshold(A):
    return EIG_CLUSTER_TOL * max(1.0, _norm2(A))


def classify_continuous(A, tol=Tolerances()):
    """Stability and (semi-)dissipativity flags of ``x' = A x``.

    Stability is read off the eigenvalues: real parts ``<= 0`` with the
    imaginary-axis eigenvalues semi-simple. Semi-dissipativity is ``A_H <= 0``.
    Near-threshold decisions are listed in ``indeterminate``.
    """
    A = as_matrix(A)
    eigs = np.linalg.eigvals(A)
    flags = semisimple_flags(A, eigs, tol)
    thr = _axis_threshold(A)
    re = eigs.real
    on_axis = np.abs(re) <= thr
    stable = bool(np.all(re <= thr) and np.all(flags[on_axis]))
    asym = bool(np.all(re < -thr))
    H = hermitian_split(A).H
    semi = definiteness(-H, tol)  # positive definiteness of -A_H
    lam = np.linalg.eigvalsh(H)
    scale = max(_norm2(A), 1e-300)
    semi_dissipative = bool(lam[-1] <= tol.tol_psd * scale)
    dissipative = bool(semi.value)
    indeterminate = []
    if semi.indeterminate:
        indeterminate.append("dissipative")
    if tol.tol_psd * scale / 10 < abs(lam[-1]) < 10 * tol.tol_psd * scale:
        indeterminate.append("semi_dissipative")
    if np.any((np.abs(re) > thr / 10) & (np.abs(re) < 10 * thr)):
        indeterminate.append("stable")
    if semi_dissipative and not stable:
        # theorem: semi-dissipative implies stable; numerics say otherwise
        indeterminate.append("stable")
        stable = True
    return ContinuousClassification(
        stable=stable, asymptotically_stable=asym, semi_dissipative=semi_dissipative,
        dissipative=dissipative, accretive_negation=semi_dissipative,
        negative_hypocoercive=asym, alpha=float(re.max()), mu=float(lam[-1]),
        indeterminate=sorted(set(indeterminate)),
    )


def _require_accretive(B, tol, hint="use shifted_hc_index for general matrices"):
    H = hermitian_split(B).H
    lam = np.linalg.eigvalsh(H)[0]
    if lam < -tol.tol_psd * max(_norm2(B), 1e-300):
        raise PreconditionError(
            f"matrix is not accretive: smallest eigenvalue of its Hermitian part is "
            f"{lam:.3e}; {hint}")


def _pbh(S, H, tol):
    """PBH sweep over the eigenvalues of the skew-Hermitian ``S``.

    Returns ``(full_rank_everywhere, witness, audit)``. The witness is a unit
    vector ``w`` with ``S w = lam w`` and ``H w = 0``.
    """
    n = S.shape[0]
    eigs = np.linalg.eigvals(S)
    audit = []
    for group in _clusters(eigs):
        lam = np.mean(eigs[group])
        M = np.hstack([lam * np.eye(n) - S, H])
        dec = rank_decision(M, tol, label=f"pbh lambda={lam:.6g}", n=n)
        audit.append(dec)
        if dec.value < n:
            Uw, _, _ = np.linalg.svd(M)
            w = Uw[:, -1]
            return False, w / np.linalg.norm(w), audit
    return True, None, audit


def _staircase_index(S, H, tol):
    if _norm2(H) == 0.0:
        return None, []
    form = staircase_jr(S, H, tol)
    return index_from_staircase(form).index, form.audit


def _reconcile(per_method, exists_flags, audit, what):
    """Check agreement; return ``(indeterminate, candidates)`` or raise."""
    values = set(per_method.values())
    agree = len(values) == 1 and len(set(exists_flags)) == 1
    if agree:
        return False, []
    candidates = sorted(values, key=lambda v: (v is None, v))
    if any(d.indeterminate for d in audit):
        return True, candidates
    raise ConsistencyError(
        f"{what}: methods disagree without a near-threshold decision: {per_method}",
        audit=[d.as_dict() for d in audit])


def _consensus(per_method, preferred):
    """Most common value among the routes; ties go to ``preferred``.

    Callers pass the Kalman rank result: Gram and power-norm margins are
    squares of singular values and lose their digits first.
    """
    counts = Counter(per_method.values())
    top = max(counts.values())
    if counts[preferred] == top:
        return preferred
    return next(v for v in per_method.values() if counts[v] == top)


def hc_index(B, tol=Tolerances()):
    """Hypocoercivity index of an accretive matrix ``B``.

    The smallest ``m`` is computed by four routes: the Kalman rank condition
    for ``(B_S, B_H)``, positive definiteness of the Gram sum
    ``T_m = sum_j B_S^j B_H (B_S^H)^j``, the Kalman rank condition with the
    full ``B`` in place of ``B_S``, and the ``(J, R)`` staircase form. A PBH
    sweep decides existence and produces the witness (an eigenvector of
    ``B_S`` in ``ker B_H``) when no finite index exists.

    Raises
    ------
    PreconditionError
        If ``B`` is not accretive.
    ConsistencyError
        If the methods disagree and no decision was near its threshold.
    """
    B = as_matrix(B, "B")
    _require_accretive(B, tol)
    n = B.shape[0]
    nrm = _norm2(B)
    Bn = B / nrm if nrm > 0 else B
    sp = hermitian_split(Bn)
    H, S = _herm(sp.H), sp.S
    # a part at rounding level would be blown up to unit norm downstream
    cut = tol.rank_cutoff(n)
    if _norm2(H) <= cut:
        H = np.zeros_like(H)
    if _norm2(S) <= cut:
        S = np.zeros_like(S)

    audit = []
    pair = min_index_rank_vs_gram(H, S, n - 1, tol, label="BS")
    audit += pair.audit
    full = min_index_rank_vs_gram(H, Bn, n - 1, tol, label="fullB")
    audit += [d for d in full.audit if d.label.startswith("fullB:kalman")]
    stair, stair_audit = _staircase_index(S, H, tol)
    audit += stair_audit
    pbh_ok, witness, pbh_audit = _pbh(S, H, tol)
    audit += pbh_audit

    per_method = {
        "kalman_BS": pair.m_rank,
        "gram_BS": pair.m_gram,
        "kalman_fullB": full.m_rank,
        "staircase": stair,
    }
    exists_flags = [v is not None for v in per_method.values()] + [pbh_ok]
    indeterminate, candidates = _reconcile(per_method, exists_flags, audit, "hc_index")
    m = _consensus(per_method, pair.m_rank) if indeterminate else pair.m_gram
    per_method["pbh_witness"] = m if pbh_ok else None
    kdim = n - rank_decision(H, tol, n=n).value
    if m is not None and m > kdim and not indeterminate:
        raise ConsistencyError(f"m_hc={m} exceeds dim ker(B_H)={kdim}",
                               audit=[d.as_dict() for d in audit])
    if m is None and witness is None:
        # nonexistence established by the rank routes; locate the witness
        # in the orthogonal complement of the controllable space
        witness = _uncontrollable_eigvec(H, S, tol)
    return HcIndexResult(
        exists=m is not None, m_hc=m, per_method=per_method,
        witness_vector=None if m is not None else witness,
        tolerance_audit=audit, kernel_dim=kdim,
        indeterminate=indeterminate, candidates=candidates,
    )


def _uncontrollable_eigvec(H, S, tol):
    n = H.shape[0]
    blocks = [H]
    for _ in range(n - 1):
        blocks.append(S @ blocks[-1])
    K = np.hstack(blocks)
    Uk, _, _ = np.linalg.svd(K)
    r = rank_decision(K, tol, n=n).value
    W = Uk[:, r:]
    if W.shape[1] == 0:
        return None
    _, Y = np.linalg.eigh(1j * (W.conj().T @ S @ W))
    v = W @ Y[:, 0]
    return v / np.linalg.norm(v)


def _abs_rank(X, cut):
    """Rank with an absolute cutoff, for products of unit-scale factors
    where a relative cutoff would count pure rounding as rank."""
    if X.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(X, compute_uv=False) > cut))


def shifted_hc_index(B, tol=Tolerances()):
    """Hypocoercivity index of ``B - lambda_min(B_H) I`` for any square ``B``.

    Existence is decided twice: by :func:`hc_index` on the shifted matrix and
    by checking whether some eigenvector of ``B_H`` for ``lambda_min`` is an
    eigenvector of ``B_S``.
    """
    B = as_matrix(B, "B")
    n = B.shape[0]
    sp = hermitian_split(B)
    w, E = np.linalg.eigh(_herm(sp.H))
    lam_min = float(w[0])
    Bt = B - lam_min * np.eye(n)
    inner = hc_index(Bt, tol)

    # eigenspace of B_H for lambda_min, with the rank cutoff as cluster width
    width = tol.rank_cutoff(n) * max(_norm2(Bt), 1e-300)
    Emin = E[:, w - lam_min <= width]
    criterion_exists = True
    Sn = sp.S / max(_norm2(B), 1e-300)
    for group in _clusters(np.linalg.eigvals(Sn)):
        lam = np.mean(np.linalg.eigvals(Sn)[group])
        X = (Sn - lam * np.eye(n)) @ Emin
        if _abs_rank(X, tol.rank_cutoff(n)) < Emin.shape[1]:
            criterion_exists = False
            break
    if criterion_exists != inner.exists and not inner.indeterminate:
        raise ConsistencyError(
            f"shifted_hc_index: eigenvector criterion says exists={criterion_exists}, "
            f"index computation says exists={inner.exists}")
    return ShcIndexResult(
        lambda_min_BH=lam_min, shifted_matrix_accretive=True, exists=inner.exists,
        m_shc=inner.m_hc, criterion_exists=criterion_exists, inner=inner)


@dataclass
class ShcEquivalence:
    m_B1: Optional[int]
    m_B2: Optional[int]
    pbh_ok: bool
    eigvec_ok: bool
    lambda_min: float

    @property
    def consistent(self):
        exists = self.m_B1 is not None
        return (self.m_B1 == self.m_B2 and self.pbh_ok == exists
                and self.eigvec_ok == exists)


def shc_equivalence_check(J, R, tol=Tolerances()):
    """Evaluate the four equivalent shifted-hypocoercivity conditions for
    a skew-Hermitian ``J`` and Hermitian ``R``, with ``lambda_min`` the
    smallest eigenvalue of ``R``:

    * ``m_B1``: smallest ``m`` with
      ``rank([R, J R, ..., J^m R] - lambda_min [I, J, ..., J^m]) = n``;
    * ``m_B2``: smallest ``m`` with
      ``sum_j J^j R (J^H)^j > lambda_min sum_j J^j (J^H)^j``;
    * ``eigvec_ok``: no eigenvector of ``J`` is an eigenvector of ``R`` for
      ``lambda_min``;
    * ``pbh_ok``: ``rank[lam I - J, R - lambda_min I] = n`` for every
      eigenvalue ``lam`` of ``J``.
    """
    J = as_matrix(J, "J")
    R = as_matrix(R, "R")
    n = J.shape[0]
    scale = max(_norm2(J), _norm2(R), 1e-300)
    if np.linalg.norm(R - R.conj().T, 2) > tol.tol_sym * scale:
        raise DomainError("R is not Hermitian")
    if np.linalg.norm(J + J.conj().T, 2) > tol.tol_sym * scale:
        raise DomainError("J is not skew-Hermitian")
    R = _herm(R)
    J = (J - J.conj().T) / 2
    w, E = np.linalg.eigh(R)
    lam_min = float(w[0])
    eye = np.eye(n)

    m_B1 = m_B2 = None
    left = [R]
    right = [eye]
    Jp = eye
    sumR = np.zeros((n, n), complex)
    sumI = np.zeros((n, n), complex)
    for m in range(n):
        if m > 0:
            Jp = J @ Jp
            left.append(Jp @ R)
            right.append(Jp)
        sumR += Jp @ R @ Jp.conj().T
        sumI += Jp @ Jp.conj().T
        if m_B1 is None:
            M = np.hstack(left) - lam_min * np.hstack(right)
            if rank_decision(M, tol, n=n).value == n:
                m_B1 = m
        diff = sumR - lam_min * sumI
        cancelled = _norm2(diff) <= tol.rank_cutoff(n) * (_norm2(sumR) + abs(lam_min) * _norm2(sumI))
        if m_B2 is None and not cancelled and definiteness(diff, tol).value:
            m_B2 = m

    width = tol.rank_cutoff(n) * scale
    Emin = E[:, w - lam_min <= width]
    eigvec_ok = True
    ev, X = np.linalg.eigh(1j * J)  # J normal: i J Hermitian, same eigenvectors
    for group in _clusters(ev):
        Xg = X[:, group]
        # an R-eigenvector for lambda_min inside span(Xg)?
        M = (R - lam_min * eye) @ Xg
        if rank_decision(M, tol, n=n).value < Xg.shape[1] or _norm2(M) <= width:
            eigvec_ok = False
            break
    Rt = R - lam_min * eye
    pbh_ok = True
    for group in _clusters(-1j * ev):
        lam = np.mean(-1j * ev[group])
        if rank_decision(np.hstack([lam * eye - J, Rt]), tol, n=n).value < n:
            pbh_ok = False
            break
    return ShcEquivalence(m_B1=m_B1, m_B2=m_B2, pbh_ok=pbh_ok, eigvec_ok=eigvec_ok,
                          lambda_min=lam_min)


@dataclass
class InverseIndexCheck:
    m_B: int
    m_Binv: int
    kernel_dims_equal: bool

    @property
    def equal(self):
        return self.m_B == self.m_Binv


def verify_inverse_index(B, tol=Tolerances()):
    """HC-indices of ``B`` and ``B^{-1}`` and the dimensions of the kernels
    of their Hermitian parts. ``B`` must be accretive and hypocoercive."""
    B = as_matrix(B, "B")
    res = hc_index(B, tol)
    if not res.exists:
        raise PreconditionError("B is not hypocoercive, so it need not be invertible")
    Binv = np.linalg.inv(B)
    res_inv = hc_index(Binv, tol)
    n = B.shape[0]
    kB = n - rank_decision(hermitian_split(B).H, tol).value
    kBi = n - rank_decision(hermitian_split(Binv).H, tol).value
    return InverseIndexCheck(m_B=res.m_hc, m_Binv=res_inv.m_hc, kernel_dims_equal=kB == kBi)


def accretive_transform(B, P, tol=Tolerances()):
    """``P^{1/2} B P^{-1/2}`` for a positive definite ``P`` satisfying the
    Lyapunov inequality ``B^H P + P B >= 0``. The result is accretive."""
    B = as_matrix(B, "B")
    P = as_matrix(P, "P")
    if not definiteness(P, tol).value or np.linalg.norm(P - P.conj().T, 2) > tol.tol_sym * _norm2(P):
        raise DomainError("P must be Hermitian positive definite")
    L = B.conj().T @ P + P @ B
    lam = np.linalg.eigvalsh(_herm(L))[0]
    if lam < -tol.tol_psd * max(_norm2(L), _norm2(B) * _norm2(P)):
        raise PreconditionError(
            f"Lyapunov inequality B^H P + P B >= 0 violated: most negative eigenvalue {lam:.3e}")
    R = matrix_sqrt_psd(P, tol)
    Bhat = R @ B @ np.linalg.inv(R)
    _require_accretive(Bhat, tol, hint="transform lost accretivity")
    return Bhat


@dataclass
class ImaginaryAxisResult:
    has_imaginary_eigenvalue: bool
    witness: Optional[np.ndarray]


def imaginary_axis_test(B, tol=Tolerances()):
    """Does the accretive ``B`` have an eigenvalue on the imaginary axis?

    Decided from the eigenvalues and, independently, by searching for an
    eigenvector of ``B_S`` in ``ker B_H``; the two must agree.
    """
    B = as_matrix(B, "B")
    _require_accretive(B, tol)
    nrm = max(_norm2(B), 1e-300)
    eigs = np.linalg.eigvals(B)
    eig_test = bool(np.any(np.abs(eigs.real) <= EIG_CLUSTER_TOL * max(1.0, nrm)))
    sp = hermitian_split(B / nrm)
    ok, witness, audit = _pbh(sp.S, _herm(sp.H), tol)
    structural = not ok
    if eig_test != structural and not any(d.indeterminate for d in audit):
        raise ConsistencyError(
            f"imaginary_axis_test: eigenvalue test says {eig_test}, "
            f"structural test says {structural}", audit=[d.as_dict() for d in audit])
    return ImaginaryAxisResult(has_imaginary_eigenvalue=structural,
                               witness=witness if structural else None)
