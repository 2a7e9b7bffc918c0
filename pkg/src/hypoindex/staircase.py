"""Unitary staircase reductions of matrix pairs.

Two kinds are supported:

``JR``
    ``(J, R)`` with ``J`` skew-Hermitian and ``R`` Hermitian. ``V J V^H``
    becomes block tridiagonal, ``V R V^H = diag(R1, 0)`` with ``R1``
    nonsingular.
``UQ``
    ``(U, Q)`` with ``U`` unitary and ``Q`` Hermitian with spectrum in
    ``[0, 1]``. ``V U V^H`` becomes block upper Hessenberg,
    ``V Q V^H = diag(Q1, I, ..., I)`` with ``Q1`` contractive.

In both cases the last block ``n_s`` is decoupled from the rest. When
``n_s == 0`` the index of the underlying matrix is ``s - 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, InputError
from .matcore import Decision, Tolerances, as_matrix

__all__ = ["StaircaseForm", "StaircaseIndex", "staircase_jr", "staircase_uq",
           "index_from_staircase", "validate_staircase"]


@dataclass
class StaircaseForm:
    V: np.ndarray
    block_sizes: list
    transformed_first: np.ndarray
    transformed_second: np.ndarray
    subdiagonal_blocks: list
    kind: str
    audit: list = field(default_factory=list)

    @property
    def s(self):
        return len(self.block_sizes)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(int)

    @property
    def indeterminate(self):
        return any(d.indeterminate for d in self.audit)


@dataclass
class StaircaseIndex:
    finite: bool
    index: Optional[int]


def _block_diag_unitary(n, start, *blocks):
    T = np.eye(n, dtype=complex)
    o = start
    for B in blocks:
        k = B.shape[0]
        T[o:o + k, o:o + k] = B
        o += k
    return T


def _reduce(F, G, V, n1, tol, kind):
    """Compress the sub-diagonal blocks of ``F`` by successive SVDs.

    ``F``, ``G`` are already in the Step-0 basis ``V`` with the first block of
    size ``n1``. Returns the finished form.
    """
    n = F.shape[0]
    cutoff = tol.rank_cutoff(n)
    scale = np.linalg.norm(F, 2)
    sizes = [n1]
    sub = []
    audit = []
    o_prev, o = 0, n1
    while True:
        rem = n - o
        if rem == 0:
            sizes.append(0)
            break
        X = F[o:, o_prev:o]
        W, sv, Vh = np.linalg.svd(X)
        rel = sv / scale if scale > 0 else np.zeros_like(sv)
        r = int(np.sum(rel > cutoff))
        low = float(rel[r - 1]) if r > 0 else 0.0
        high = float(rel[r]) if r < len(rel) else 0.0
        audit.append(Decision(
            "rank", f"staircase block {len(sizes) + 1}", r, cutoff, low, high,
            bool((r > 0 and low < 10 * cutoff) or high > cutoff / 10)))
        if r == 0:
            sizes.append(rem)
            break
        T = _block_diag_unitary(n, o_prev, Vh, W.conj().T)
        F = T @ F @ T.conj().T
        G = T @ G @ T.conj().T
        V = T @ V
        # exact zeros below the new subdiagonal block
        F[o + r:, o_prev:o] = 0.0
        sizes.append(r)
        o_prev, o = o, o + r
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    for i in range(1, len(sizes) - 1):
        sub.append(F[offs[i]:offs[i + 1], offs[i - 1]:offs[i]].copy())
    return StaircaseForm(V=V, block_sizes=sizes, transformed_first=F,
                         transformed_second=G, subdiagonal_blocks=sub, kind=kind,
                         audit=audit)


def _herm_check(M, sign, tol, name):
    nrm = max(np.linalg.norm(M, 2), 1.0)
    if np.linalg.norm(M - sign * M.conj().T, 2) > tol.tol_sym * nrm:
        what = "Hermitian" if sign > 0 else "skew-Hermitian"
        raise DomainError(f"{name} is not {what} within tol_sym={tol.tol_sym}")


def staircase_jr(J, R, tol=Tolerances()):
    """Staircase form of a skew-Hermitian/Hermitian pair ``(J, R)``.

    Step 0 orders an eigenbasis of ``R`` so that its nonzero eigenvalues come
    first (block ``n1``); the remaining steps compress ``J``'s sub-diagonal
    blocks exactly as for the ``(U, Q)`` pair.
    """
    J = as_matrix(J, "J")
    R = as_matrix(R, "R")
    if J.shape != R.shape:
        raise InputError(f"J and R must have equal shapes, got {J.shape} and {R.shape}")
    _herm_check(J, -1, tol, "J")
    _herm_check(R, 1, tol, "R")
    J = (J - J.conj().T) / 2
    R = (R + R.conj().T) / 2
    n = J.shape[0]
    w, E = np.linalg.eigh(R)
    rmax = abs(w).max()
    if rmax == 0.0:
        raise DomainError("R must be nonzero")
    nonzero = abs(w) > tol.rank_cutoff(n) * rmax
    order = np.concatenate([np.flatnonzero(nonzero), np.flatnonzero(~nonzero)])
    V1 = E[:, order]
    n1 = int(nonzero.sum())
    V = V1.conj().T
    F = V @ J @ V1
    G = V @ R @ V1
    G[n1:, :] = 0.0
    G[:, n1:] = 0.0
    return _reduce(F, G, V, n1, tol, "JR")


def staircase_uq(U, Q, tol=Tolerances()):
    """Staircase form of a unitary/semi-contractive-Hermitian pair ``(U, Q)``.

    Step 0 splits ``Q``'s eigenvalues into those within ``tol_psd`` of one
    (identity block, placed last) and the rest (contractive block ``Q1``).
    Steps 1 and 2 compress the sub-diagonal blocks of ``U`` by SVDs until a
    block is empty or numerically zero.
    """
    U = as_matrix(U, "U")
    Q = as_matrix(Q, "Q")
    if U.shape != Q.shape:
        raise InputError(f"U and Q must have equal shapes, got {U.shape} and {Q.shape}")
    n = U.shape[0]
    if np.linalg.norm(U.conj().T @ U - np.eye(n), 2) > max(tol.tol_unit, 1e-12) * 10 * n:
        raise DomainError("U is not unitary")
    _herm_check(Q, 1, tol, "Q")
    Q = (Q + Q.conj().T) / 2
    w, E = np.linalg.eigh(Q)
    if w[0] < -tol.tol_psd or w[-1] > 1 + tol.tol_psd:
        raise DomainError(f"spectrum of Q must lie in [0, 1], got [{w[0]:.3e}, {w[-1]:.3e}]")
    ones = w >= 1 - tol.tol_psd
    order = np.concatenate([np.flatnonzero(~ones), np.flatnonzero(ones)])
    V1 = E[:, order]
    n1 = int((~ones).sum())
    V = V1.conj().T
    F = V @ U @ V1
    G = V @ Q @ V1
    G[n1:, :] = 0.0
    G[:, n1:] = 0.0
    G[n1:, n1:] = np.eye(n - n1)
    if n1 == 0:
        # Q = I: nothing contractive, the whole space is the decoupled block
        return StaircaseForm(V=V, block_sizes=[0, n], transformed_first=F,
                             transformed_second=G, subdiagonal_blocks=[], kind="UQ")
    return _reduce(F, G, V, n1, tol, "UQ")


def index_from_staircase(form):
    """``s - 2`` when the decoupled last block is empty, else not finite."""
    if form.block_sizes[-1] == 0:
        return StaircaseIndex(finite=True, index=form.s - 2)
    return StaircaseIndex(finite=False, index=None)


def _pattern(sizes, kind):
    """Boolean mask of entries allowed to be nonzero in the first matrix."""
    n = sum(sizes)
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    s = len(sizes)
    mask = np.zeros((n, n), dtype=bool)
    for i in range(s):
        for j in range(s):
            ri = slice(offs[i], offs[i + 1])
            cj = slice(offs[j], offs[j + 1])
            if i == s - 1 or j == s - 1:
                allowed = i == j
            elif kind == "JR":
                allowed = abs(i - j) <= 1
            else:
                allowed = i <= j + 1
            if not allowed:
                continue
            if i == j + 1:
                # [Sigma 0]: only the first sizes[i] columns
                mask[offs[i]:offs[i + 1], offs[j]:offs[j] + sizes[i]] = True
            elif kind == "JR" and j == i + 1:
                mask[offs[i]:offs[i] + sizes[j], offs[j]:offs[j + 1]] = True
            else:
                mask[ri, cj] = True
    return mask


def validate_staircase(form, first, second):
    """Relative residuals of every structural claim about ``form``.

    Returns a dict with keys ``unitarity``, ``reconstruction_first``,
    ``reconstruction_second``, ``structural_first``, ``structural_second``,
    ``sigma_last_offdiag`` (off-diagonal/imaginary part of the last
    sub-diagonal Sigma), ``monotone`` and ``sigma_min_subdiag`` (smallest
    singular value of any Sigma block, relative; ``None`` without blocks).
    """
    first = np.asarray(first, dtype=complex)
    second = np.asarray(second, dtype=complex)
    V = form.V
    n = V.shape[0]
    nf = max(np.linalg.norm(first, 2), 1e-300)
    ns = max(np.linalg.norm(second, 2), 1e-300)
    out = {
        "unitarity": float(np.linalg.norm(V @ V.conj().T - np.eye(n), 2)),
        "reconstruction_first": float(
            np.linalg.norm(V @ first @ V.conj().T - form.transformed_first, 2) / nf),
        "reconstruction_second": float(
            np.linalg.norm(V @ second @ V.conj().T - form.transformed_second, 2) / ns),
    }
    sizes = form.block_sizes
    mask = _pattern(sizes, form.kind)
    Ft = V @ first @ V.conj().T
    St = V @ second @ V.conj().T
    out["structural_first"] = float(np.abs(Ft[~mask]).max() / nf) if (~mask).any() else 0.0
    n1 = sizes[0]
    target = np.zeros((n, n), dtype=complex)
    target[:n1, :n1] = St[:n1, :n1]
    if form.kind == "UQ":
        target[n1:, n1:] = np.eye(n - n1)
    out["structural_second"] = float(np.abs(St - target).max() / ns)
    pos = sizes[:-1]
    out["monotone"] = bool(all(a >= b for a, b in zip(pos, pos[1:])) and
                           (len(pos) < 2 or pos[-1] > 0))
    if form.subdiagonal_blocks:
        last = form.subdiagonal_blocks[-1][:, :sizes[len(form.subdiagonal_blocks)]]
        off = last - np.diag(np.diag(last).real)
        out["sigma_last_offdiag"] = float(np.abs(off).max() / nf)
        mins = []
        for k, blk in enumerate(form.subdiagonal_blocks):
            sq = blk[:, :sizes[k + 1]]
            mins.append(np.linalg.svd(sq, compute_uv=False)[-1] / nf)
        out["sigma_min_subdiag"] = float(min(mins))
    else:
        out["sigma_last_offdiag"] = 0.0
        out["sigma_min_subdiag"] = None
    return out
