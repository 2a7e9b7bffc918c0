"""Short-time decay of propagator norms and discrete power profiles.

For an accretive hypocoercive ``B`` with index ``m``,
``||exp(-B t)|| = 1 - c t^a + O(t^{a+1})`` with ``a = 2 m + 1``. The fits
below estimate ``a`` and ``c`` from a log-log regression of the norm
deficit ``1 - ||exp(-B t)||``.

Deficits reach ``1e-18`` on the default window when ``m = 2``, far below
double-precision resolution of a norm near one, so the fits evaluate the
propagator in extended precision (mpmath). :func:`propagator_norm_samples`
stays in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from .coercivity import hc_index, shifted_hc_index
from .contractivity import _power_margin, classify_discrete, dhc_index, power_norm_profile, scaled_dhc_index
from .errors import DomainError, FitError, PreconditionError
from .matcore import Decision, Tolerances, _norm2, as_matrix, hermitian_split, matrix_exponential

__all__ = [
    "DecayFit", "EpsilonStudy", "DEFAULT_WINDOW", "DEFAULT_POINTS",
    "propagator_norm_samples", "short_time_exponent_fit", "shifted_decay_fit",
    "epsilon_scaling_study", "discrete_power_report", "default_grid",
]

DEFAULT_WINDOW = (1e-3, 10 ** -1.5)
DEFAULT_POINTS = 25
FIT_FLOOR = 1e-13
MP_DPS = 50


@dataclass
class DecayFit:
    t_samples: np.ndarray
    norms: np.ndarray
    a_est: float
    c_est: float
    a_expected: int
    lambda_shift: float
    fit_window: tuple
    r_squared: float
    deficits: np.ndarray = field(repr=False, default=None)

    @property
    def a_rounded(self):
        """``a_est`` rounded to the nearest odd integer."""
        return int(2 * round((self.a_est - 1) / 2) + 1)


@dataclass
class EpsilonStudy:
    eps_grid: np.ndarray
    c_values: np.ndarray
    slope_est: float
    slope_expected: float
    m_hc: int
    c_scaled_min: float
    c_scaled_max: float
    fits: list = field(default_factory=list, repr=False)


def default_grid(window=DEFAULT_WINDOW, points=DEFAULT_POINTS):
    return np.geomspace(window[0], window[1], points)


def propagator_norm_samples(B, t_grid):
    """``[(t, ||exp(-B t)||_2) for t in t_grid]`` in double precision."""
    B = as_matrix(B, "B")
    out = []
    for t in t_grid:
        t = float(t)
        if not (np.isfinite(t) and t > 0):
            raise DomainError(f"sample times must be positive and finite, got {t!r}")
        out.append((t, float(np.linalg.norm(matrix_exponential(-B, t), 2))))
    return out


def _norm_mp(B, t, shift):
    """``exp(shift t) ||exp(-B t)||_2`` as an mpmath number."""
    M = mpmath.matrix([[mpmath.mpc(complex(-x)) * t for x in row] for row in B])
    E = mpmath.expm(M)
    ev = mpmath.eigh(E.H * E, eigvals_only=True)
    return mpmath.sqrt(max(ev)) * mpmath.exp(shift * t)


def _sample_deficits(B, ts, shift):
    norms = np.empty(len(ts))
    deficits = np.empty(len(ts))
    with mpmath.workdps(MP_DPS):
        for k, t in enumerate(ts):
            nrm = _norm_mp(B, mpmath.mpf(float(t)), mpmath.mpf(shift))
            norms[k] = float(nrm)
            deficits[k] = float(1 - nrm)
    return norms, deficits


def _loglog(ts, deficits):
    X = np.vstack([np.log(ts), np.ones_like(ts)]).T
    y = np.log(deficits)
    (slope, icpt), *_ = np.linalg.lstsq(X, y, rcond=None)
    pred = X @ [slope, icpt]
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(np.exp(icpt)), r2


def _fit(B, expected_index, shift, window, points):
    attempts = [window, (window[0] * 10, window[1] * 10)]
    for lo, hi in attempts:
        ts = default_grid((lo, hi), points)
        norms, deficits = _sample_deficits(B, ts, shift)
        if np.all(deficits > 0) and deficits.max() > FIT_FLOOR:
            a, c, r2 = _loglog(ts, deficits)
            return DecayFit(t_samples=ts, norms=norms, a_est=a, c_est=c,
                            a_expected=2 * expected_index + 1, lambda_shift=float(shift),
                            fit_window=(float(lo), float(hi)), r_squared=r2,
                            deficits=deficits)
    raise FitError(
        f"norm deficit is not resolvable on t in [{attempts[-1][0]:.3g}, {attempts[-1][1]:.3g}] "
        f"(max deficit {deficits.max():.3g}); try a larger window")


def short_time_exponent_fit(B, expected_index, tol=Tolerances(), window=DEFAULT_WINDOW,
                            points=DEFAULT_POINTS):
    """Fit ``1 - ||exp(-B t)|| ~ c t^a`` for an accretive hypocoercive ``B``.

    ``expected_index`` sets ``a_expected = 2 * expected_index + 1``; the fit
    itself does not use it.
    """
    B = as_matrix(B, "B")
    lam = float(np.linalg.eigvalsh(hermitian_split(B).H)[0])
    if lam < -tol.tol_psd * max(_norm2(B), 1e-300):
        raise PreconditionError("B is not accretive; use shifted_decay_fit")
    if int(expected_index) < 0:
        raise DomainError("expected_index must be nonnegative")
    return _fit(B, int(expected_index), 0.0, window, points)


def shifted_decay_fit(B, tol=Tolerances(), window=DEFAULT_WINDOW, points=DEFAULT_POINTS):
    """Fit the algebraic factor of ``exp(lambda_min t) ||exp(-B t)||`` where
    ``lambda_min`` is the smallest eigenvalue of ``B_H``.

    ``a_expected = 2 m_SHC + 1`` with the shifted index computed here.
    """
    B = as_matrix(B, "B")
    shc = shifted_hc_index(B, tol)
    if not shc.exists:
        raise PreconditionError("B has no finite shifted hypocoercivity index")
    return _fit(B, shc.m_shc, shc.lambda_min_BH, window, points)


def epsilon_scaling_study(A, C, eps_grid, tol=Tolerances(), window=DEFAULT_WINDOW,
                          points=DEFAULT_POINTS):
    """Slope of ``log c_eps`` against ``log eps`` for ``B(eps) = eps A + C``.

    Every ``B(eps)`` must be accretive and hypocoercive with the same index
    ``m``; the expected slope is ``2 m``. ``c_scaled_min``/``c_scaled_max``
    are the extremes of ``c_eps * eps^(-2 m)`` over the grid.
    """
    A = as_matrix(A, "A")
    C = as_matrix(C, "C")
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or len(eps) < 2 or np.any(eps <= 0):
        raise DomainError("eps_grid must hold at least two positive values")
    m = None
    fits = []
    for e in eps:
        B = e * A + C
        try:
            res = hc_index(B, tol)
        except PreconditionError:
            raise PreconditionError(f"B(eps) is not accretive at eps={e:g}") from None
        if not res.exists:
            raise PreconditionError(f"B(eps) is not hypocoercive at eps={e:g}")
        if m is None:
            m = res.m_hc
        elif res.m_hc != m:
            raise PreconditionError(
                f"index varies across the grid: m={res.m_hc} at eps={e:g}, expected {m}")
        fits.append(short_time_exponent_fit(B, m, tol, window, points))
    c = np.array([f.c_est for f in fits])
    slope = float(np.polyfit(np.log(eps), np.log(c), 1)[0])
    scaled = c * eps ** (-2 * m)
    return EpsilonStudy(eps_grid=eps, c_values=c, slope_est=slope, slope_expected=2.0 * m,
                        m_hc=m, c_scaled_min=float(scaled.min()),
                        c_scaled_max=float(scaled.max()), fits=fits)


@dataclass
class PowerReport:
    profile: list
    m_from_profile: Optional[int]
    sigma_max: float
    scaled: bool
    m_gram: Optional[int] = None
    gap: Optional[float] = None
    indeterminate: bool = False


def discrete_power_report(A, tol=Tolerances()):
    """Read the (scaled) hypocontractivity index off the norms of powers.

    For semi-contractive ``A`` the index is the last ``j`` with
    ``||A^j|| = 1``; otherwise ``A`` is divided by ``sigma_max`` first and the
    reference curve is ``sigma_max^j``. ``m_gram`` is the index from the Gram
    route, for comparison.
    """
    A = as_matrix(A)
    n = A.shape[0]
    smax = float(np.linalg.svd(A, compute_uv=False)[0])
    if smax == 0.0:
        raise DomainError("discrete_power_report requires a nonzero matrix")
    scaled = not classify_discrete(A, tol).semi_contractive
    At = A / smax if scaled else A
    profile = power_norm_profile(A, n + 1)
    m_prof = None
    gap = None
    indeterminate = False
    P = np.eye(n, dtype=complex)
    for j in range(1, n + 1):
        P = P @ At
        sv = np.linalg.svd(P, compute_uv=False)
        rel = _power_margin(sv, tol, n)
        dec = Decision("definite", f"profile j={j}", bool(rel > tol.tol_psd), tol.tol_psd, float(rel))
        indeterminate |= tol.tol_psd / 10 < rel < 10 * tol.tol_psd
        if dec.value:
            m_prof = j - 1
            gap = float(1 - sv[0])
            break
    if scaled:
        m_gram = scaled_dhc_index(A, tol).m_dshc
    else:
        m_gram = dhc_index(A, tol).m_dhc
    return PowerReport(profile=profile, m_from_profile=m_prof, sigma_max=smax, scaled=scaled,
                       m_gram=m_gram, gap=gap, indeterminate=bool(indeterminate))
