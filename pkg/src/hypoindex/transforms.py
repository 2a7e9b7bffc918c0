"""Cayley maps between continuous- and discrete-time systems, and
Lyapunov/Stein solvers.

``cayley``          ``A_d = (I + A_c)(I - A_c)^{-1}``
``inverse_cayley``  ``A_c = (A_d - alpha I)(A_d + alpha I)^{-1}``, ``|alpha| = 1``
``scaled_cayley``   ``A_d(t) = (I + t/2 A_c)(I - t/2 A_c)^{-1}``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coercivity import classify_continuous, hc_index
from .contractivity import classify_discrete, defect_matrix, dhc_index, power_norm_profile
from .errors import ConsistencyError, DomainError, NumericalError, PreconditionError, SingularityError
from .matcore import Tolerances, _herm, _norm2, as_matrix, definiteness, hermitian_split, rank_decision

__all__ = [
    "CayleyResult", "LyapunovSolution", "cayley", "inverse_cayley", "scaled_cayley",
    "index_preservation_check", "index_preservation_check_discrete",
    "solve_lyapunov_continuous", "solve_lyapunov_discrete", "stein_series",
    "lyapunov_cayley_map",
]

# minimal distance of an eigenvalue from the pole of the map
POLE_DISTANCE = 1e-10


@dataclass
class CayleyResult:
    image: np.ndarray
    direction: str
    shift_alpha: complex = 1.0
    well_defined: bool = True
    t: Optional[float] = None
    checks: dict = field(default_factory=dict)


def _mobius(num, den, pole_matrix, pole, what, hint=""):
    """``num @ inv(den)`` after checking that ``pole`` is not an eigenvalue."""
    eigs = np.linalg.eigvals(pole_matrix)
    dist = np.abs(eigs - pole)
    k = int(np.argmin(dist))
    if dist[k] <= POLE_DISTANCE * max(1.0, abs(pole)):
        raise SingularityError(
            f"{what} is not well-defined: eigenvalue {eigs[k]:.6g} is at the pole {pole:.6g}"
            + (f"; {hint}" if hint else ""), eigenvalue=complex(eigs[k]))
    try:
        return np.linalg.solve(den.T, num.T).T
    except np.linalg.LinAlgError:
        raise SingularityError(f"{what}: resolvent is singular", eigenvalue=complex(eigs[k])) from None


def _kernel_dim(M, tol, scale):
    return M.shape[0] - rank_decision(M, tol, scale=scale).value


def _continuous_to_discrete_checks(Ac, Ad, tol):
    cc = classify_continuous(Ac, tol)
    checks = {"negative_hypocoercive": cc.negative_hypocoercive,
              "semi_dissipative": cc.semi_dissipative}
    if cc.negative_hypocoercive:
        dc = classify_discrete(Ad, tol)
        checks["image_hypocontractive"] = dc.hypocontractive
        if not dc.hypocontractive:
            raise ConsistencyError("negative hypocoercive input mapped to a non-hypocontractive image")
    if cc.semi_dissipative:
        dc = classify_discrete(Ad, tol)
        checks["image_semi_contractive"] = dc.semi_contractive
        kc = _kernel_dim(hermitian_split(Ac).H, tol, _norm2(Ac))
        kd = _kernel_dim(defect_matrix(Ad), tol, 1.0)
        checks["kernel_dims"] = [kc, kd]
        if not dc.semi_contractive or kc != kd:
            raise ConsistencyError(
                f"semi-dissipative input: image semi-contractive={dc.semi_contractive}, "
                f"kernel dimensions {kc} vs {kd}")
    return checks


def cayley(A_c, tol=Tolerances()):
    """Cayley transform ``(I + A_c)(I - A_c)^{-1}``.

    Verifies that negative hypocoercive input maps to a hypocontractive
    image and that semi-dissipative input maps to a semi-contractive image
    with ``dim ker(A_H) = dim ker(I - A_d^H A_d)``.

    >>> cayley([[0.0]]).image.real
    array([[1.]])
    """
    Ac = as_matrix(A_c, "A_c")
    eye = np.eye(Ac.shape[0])
    Ad = _mobius(eye + Ac, eye - Ac, Ac, 1.0, "Cayley transform")
    checks = _continuous_to_discrete_checks(Ac, Ad, tol)
    return CayleyResult(image=Ad, direction="c_to_d", checks=checks)


def inverse_cayley(A_d, alpha=1.0, tol=Tolerances()):
    """Inverse Cayley transform ``(A_d - alpha I)(A_d + alpha I)^{-1}``.

    ``alpha`` must have unit modulus. Hypocontractive input maps to a
    negative hypocoercive image; semi-contractive input to a
    semi-dissipative one with equal kernel dimensions.
    """
    Ad = as_matrix(A_d, "A_d")
    alpha = complex(alpha)
    if abs(abs(alpha) - 1) > 1e-12:
        raise DomainError(f"alpha must have unit modulus, got |alpha| = {abs(alpha):.6g}")
    eye = np.eye(Ad.shape[0])
    Ac = _mobius(Ad - alpha * eye, Ad + alpha * eye, Ad, -alpha, "inverse Cayley transform",
                 hint="try another unit-modulus alpha")
    dc = classify_discrete(Ad, tol)
    checks = {"hypocontractive": dc.hypocontractive, "semi_contractive": dc.semi_contractive}
    if dc.hypocontractive:
        cc = classify_continuous(Ac, tol)
        checks["image_negative_hypocoercive"] = cc.negative_hypocoercive
        if not cc.negative_hypocoercive:
            raise ConsistencyError("hypocontractive input mapped to a non-stable image")
    if dc.semi_contractive:
        cc = classify_continuous(Ac, tol)
        kd = _kernel_dim(defect_matrix(Ad), tol, 1.0)
        kc = _kernel_dim(hermitian_split(Ac).H, tol, _norm2(Ac))
        checks["image_semi_dissipative"] = cc.semi_dissipative
        checks["kernel_dims"] = [kd, kc]
        if not cc.semi_dissipative or kc != kd:
            raise ConsistencyError(
                f"semi-contractive input: image semi-dissipative={cc.semi_dissipative}, "
                f"kernel dimensions {kd} vs {kc}")
    return CayleyResult(image=Ac, direction="d_to_c", shift_alpha=alpha, checks=checks)


def scaled_cayley(A_c, t, tol=Tolerances()):
    """``(I + t/2 A_c)(I - t/2 A_c)^{-1}`` for ``t > 0``.

    For semi-dissipative, negative hypocoercive ``A_c`` the image is checked
    to be hypocontractive with the same index as ``-A_c`` and with unit
    power norms up to that index.
    """
    Ac = as_matrix(A_c, "A_c")
    if not (np.isfinite(t) and t > 0):
        raise DomainError("t must be a positive real number")
    eye = np.eye(Ac.shape[0])
    h = t / 2
    Ad = _mobius(eye + h * Ac, eye - h * Ac, Ac, 1 / h, "scaled Cayley transform")
    checks = _continuous_to_discrete_checks(Ac, Ad, tol)
    if checks["negative_hypocoercive"] and checks["semi_dissipative"]:
        m_hc = hc_index(-Ac, tol).m_hc
        m_dhc = dhc_index(Ad, tol).m_dhc
        prof = [nrm for _, nrm in power_norm_profile(Ad, m_dhc + 1)]
        checks.update(m_hc=m_hc, m_dhc=m_dhc, profile=prof)
        if m_hc != m_dhc:
            raise ConsistencyError(f"scaled Cayley: m_hc={m_hc} but m_dhc={m_dhc}")
    return CayleyResult(image=Ad, direction="c_to_d", t=float(t), checks=checks)


@dataclass
class IndexPreservation:
    m_hc: int
    m_dhc: int

    @property
    def equal(self):
        return self.m_hc == self.m_dhc


def index_preservation_check(A_c, tol=Tolerances()):
    """HC-index of ``-A_c`` next to the dHC-index of its Cayley image."""
    Ac = as_matrix(A_c, "A_c")
    cc = classify_continuous(Ac, tol)
    if not (cc.semi_dissipative and cc.negative_hypocoercive):
        raise PreconditionError("A_c must be semi-dissipative and negative hypocoercive")
    m_hc = hc_index(-Ac, tol).m_hc
    m_dhc = dhc_index(cayley(Ac, tol).image, tol).m_dhc
    return IndexPreservation(m_hc=m_hc, m_dhc=m_dhc)


def index_preservation_check_discrete(A_d, tol=Tolerances()):
    """dHC-index of ``A_d`` next to the HC-index of ``-inverse_cayley(A_d)``."""
    Ad = as_matrix(A_d, "A_d")
    dc = classify_discrete(Ad, tol)
    if not (dc.semi_contractive and dc.hypocontractive):
        raise PreconditionError("A_d must be semi-contractive and hypocontractive")
    m_dhc = dhc_index(Ad, tol).m_dhc
    m_hc = hc_index(-inverse_cayley(Ad, tol=tol).image, tol).m_hc
    return IndexPreservation(m_hc=m_hc, m_dhc=m_dhc)


@dataclass
class LyapunovSolution:
    P: np.ndarray
    residual: float  # relative: ||res|| / (||A||^2 ||P|| + ||Q||)
    equation_kind: str
    positive_definite: bool
    condition: float


def _solve_vec(K, Q, kind):
    n = Q.shape[0]
    cond = float(np.linalg.cond(K))
    if not np.isfinite(cond) or cond > 1e14:
        raise NumericalError(f"{kind} Lyapunov system is ill-conditioned (cond ~ {cond:.3g})")
    p = np.linalg.solve(K, -Q.reshape(-1, order="F"))
    return _herm(p.reshape(n, n, order="F")), cond


def _check_rhs(Q, n, tol, name):
    Q = as_matrix(Q, name)
    if Q.shape != (n, n):
        raise DomainError(f"{name} must be {n}x{n}")
    if np.linalg.norm(Q - Q.conj().T, 2) > tol.tol_sym * max(_norm2(Q), 1.0):
        raise DomainError(f"{name} must be Hermitian")
    if np.linalg.eigvalsh(_herm(Q))[0] < -tol.tol_psd * max(_norm2(Q), 1e-300):
        raise DomainError(f"{name} must be positive semi-definite")
    return _herm(Q)


def _relative(res, A, P, Q):
    den = _norm2(A) ** 2 * _norm2(P) + _norm2(Q)
    return float(_norm2(res) / den) if den > 0 else float(_norm2(res))


def solve_lyapunov_continuous(A, Qc, tol=Tolerances()):
    """Solve ``A^H P + P A = -Qc`` through the Kronecker-vectorised system
    ``(I kron A^H + A^T kron I) vec(P) = -vec(Qc)``."""
    A = as_matrix(A)
    n = A.shape[0]
    Qc = _check_rhs(Qc, n, tol, "Qc")
    alpha = np.linalg.eigvals(A).real.max()
    if alpha >= 0:
        raise PreconditionError(f"A must be asymptotically stable (alpha(A) = {alpha:.3g})")
    eye = np.eye(n)
    K = np.kron(eye, A.conj().T) + np.kron(A.T, eye)
    P, cond = _solve_vec(K, Qc, "continuous")
    res = A.conj().T @ P + P @ A + Qc
    return LyapunovSolution(P=P, residual=_relative(res, A, P, Qc), equation_kind="continuous",
                            positive_definite=bool(definiteness(P, tol).value), condition=cond)


def solve_lyapunov_discrete(A, Qd, tol=Tolerances()):
    """Solve the Stein equation ``A^H P A - P = -Qd`` through
    ``(A^T kron A^H - I) vec(P) = -vec(Qd)``."""
    A = as_matrix(A)
    n = A.shape[0]
    Qd = _check_rhs(Qd, n, tol, "Qd")
    rho = np.abs(np.linalg.eigvals(A)).max()
    if rho >= 1:
        raise PreconditionError(f"A must have spectral radius < 1 (rho(A) = {rho:.6g})")
    K = np.kron(A.T, A.conj().T) - np.eye(n * n)
    P, cond = _solve_vec(K, Qd, "discrete")
    res = A.conj().T @ P @ A - P + Qd
    return LyapunovSolution(P=P, residual=_relative(res, A, P, Qd), equation_kind="discrete",
                            positive_definite=bool(definiteness(P, tol).value), condition=cond)


def stein_series(A, Qd, term_tol=1e-14, max_terms=1_000_000):
    """Truncated series ``sum_j (A^H)^j Qd A^j``, stopped once a term's norm
    drops below ``term_tol``."""
    A = as_matrix(A)
    Qd = as_matrix(Qd, "Qd")
    P = np.zeros_like(Qd)
    term = Qd.copy()
    for _ in range(max_terms):
        P += term
        if _norm2(term) < term_tol:
            return _herm(P)
        term = A.conj().T @ term @ A
    raise NumericalError("Stein series did not converge")


@dataclass
class LyapunovCayleyResult:
    P: np.ndarray
    Qd: np.ndarray
    A_d: np.ndarray
    residual_c: float
    residual_d: float


def lyapunov_cayley_map(A_c, Qc, tol=Tolerances()):
    """Solve the continuous equation for ``A_c`` and check that the same ``P``
    solves the Stein equation for ``cayley(A_c)`` with
    ``Qd = 2 (I - A_c^H)^{-1} Qc (I - A_c)^{-1}``. Residuals are relative, as
    in :class:`LyapunovSolution`."""
    Ac = as_matrix(A_c, "A_c")
    sol = solve_lyapunov_continuous(Ac, Qc, tol)
    n = Ac.shape[0]
    eye = np.eye(n)
    inv = np.linalg.inv(eye - Ac)
    Qc = _herm(as_matrix(Qc, "Qc"))
    Qd = _herm(2 * inv.conj().T @ Qc @ inv)
    Ad = cayley(Ac, tol).image
    res_d = Ad.conj().T @ sol.P @ Ad - sol.P + Qd
    return LyapunovCayleyResult(P=sol.P, Qd=Qd, A_d=Ad, residual_c=sol.residual,
                                residual_d=_relative(res_d, Ad, sol.P, Qd))
