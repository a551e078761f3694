"""Band spectra of periodic models through their matrix-valued symbol.

For a model whose transfer matrices repeat after ``N`` pair steps, the
operator is unitarily equivalent to multiplication by a ``2N x 2N`` matrix
function ``T(e^{ix}) = sum_{k=-2}^{2} e^{ikx} T_k`` on ``L^2`` of the circle.
The eigenvalues of ``T(e^{ix})`` as functions of ``x`` are the band functions
and their ranges make up the spectrum.  A linear slope ``a`` in ``alpha``
only rotates the spectrum by ``exp(-i a)``.

Basis ordering of the symbol: the ``N`` even sites of a cell first, then the
``N`` odd sites.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .arcs import TWO_PI, ArcSet
from .models import CouplingPair, PeriodicPhases, PhaseModel, TwoValuedPhases, require_variant

__all__ = [
    "ArcSet", "BandFunctions", "NuPhases", "SymbolMatrix", "band_arcs", "band_functions",
    "limit_spectrum", "model_band_arcs", "nu_phases", "symbol", "symbol_matrix",
    "t1_eigenvalues", "two_periodic_closed_form", "two_periodic_eigenvalues",
]


@dataclass(frozen=True)
class NuPhases:
    """The per-cell phase combinations ``nu_plus`` and ``nu_minus`` (length ``N``).

    ``nu_plus[k]`` belongs to the bond ``(2k, 2k+1)`` and ``nu_minus[k]`` to
    the bond ``(2k-1, 2k)``; both arrays are reduced mod ``2*pi`` and extend
    periodically.
    """

    nu_plus: np.ndarray = field(repr=False)
    nu_minus: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.mod(np.atleast_1d(np.asarray(self.nu_plus, float)), TWO_PI)
        m = np.mod(np.atleast_1d(np.asarray(self.nu_minus, float)), TWO_PI)
        if p.shape != m.shape or p.ndim != 1 or p.size == 0:
            raise ValueError("nu_plus and nu_minus must be non-empty arrays of equal length")
        object.__setattr__(self, "nu_plus", p)
        object.__setattr__(self, "nu_minus", m)

    @property
    def N(self) -> int:
        return int(self.nu_plus.size)


def nu_phases(model: PhaseModel) -> NuPhases:
    """Phase combinations of a periodic model, reduced to its pair period.

    ``nu_plus[k] = theta_{2k} + theta_{2k+1} - (pi_{2k} - pi_{2k+1})`` and
    ``nu_minus[k] = theta_{2k} + theta_{2k-1} + (pi_{2k} - pi_{2k-1})`` with
    site indices taken mod the model's period.  The slope ``a`` does not
    enter; it is applied later as a rotation.  For the two-valued model this
    gives the constants ``theta_sum - delta`` and ``theta_sum + delta``.

    Raises
    ------
    WrongVariantError
        Unless the model is periodic or two-valued.
    """
    require_variant(model, PeriodicPhases, TwoValuedPhases)
    if model.defects:
        raise ValueError("a model with local defects is not periodic")
    n_site = model.N
    n = model.pair_period
    th = np.asarray(model.theta, float)
    pi = np.asarray(model.pi, float)
    k = np.arange(n)
    e, p, m = (2 * k) % n_site, (2 * k + 1) % n_site, (2 * k - 1) % n_site
    return NuPhases(th[e] + th[p] - (pi[e] - pi[p]), th[e] + th[m] + (pi[e] - pi[m]))


@dataclass(frozen=True, eq=False)
class SymbolMatrix:
    """Laurent coefficients ``T_{-2} .. T_2`` of the symbol.

    ``coeffs[j]`` multiplies ``exp(i (j - 2) x)``.  Calling the object
    evaluates ``T(e^{ix})`` for scalar or array ``x``.
    """

    coeffs: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.coeffs.shape[-1])

    def __call__(self, x):
        x = np.asarray(x, float)
        ph = np.exp(1j * np.multiply.outer(x, np.arange(-2, 3)))
        return np.tensordot(ph, self.coeffs, axes=([-1], [0]))

    def unitarity_defect(self, xs) -> float:
        """Largest entry of ``|T^* T - I|`` over the points ``xs``."""
        m = self(np.atleast_1d(xs))
        g = np.conj(np.swapaxes(m, -1, -2)) @ m
        return float(np.max(np.abs(g - np.eye(self.size))))


def symbol_matrix(nu: NuPhases, coupling: CouplingPair) -> SymbolMatrix:
    """Assemble the five coefficient matrices of the symbol.

    With ``D_pm = diag(exp(-i nu_pm))``, the cyclic matrices ``W_u`` (entries
    ``exp(-i nu_minus[k+1])`` at ``(k, k+1)``) and ``W_l`` (entries
    ``exp(-i nu_plus[k])`` at ``(k+1, k)``), indices mod ``N``::

        T_2  = -t^2 [[0, 0], [0, W_u]]     T_1  = irt [[0, D_-], [W_u, 0]]
        T_0  = r^2 [[D_-, 0], [0, D_+]]
        T_-1 = irt [[0, W_l], [D_+, 0]]     T_-2 = -t^2 [[W_l, 0], [0, 0]]
    """
    n = nu.N
    t, r = coupling.t, coupling.r
    d_plus = np.diag(np.exp(-1j * nu.nu_plus))
    d_minus = np.diag(np.exp(-1j * nu.nu_minus))
    k = np.arange(n)
    w_u = np.zeros((n, n), complex)
    w_l = np.zeros((n, n), complex)
    # for N = 1 both land on the single diagonal entry
    w_u[k, (k + 1) % n] = np.exp(-1j * nu.nu_minus[(k + 1) % n])
    w_l[(k + 1) % n, k] = np.exp(-1j * nu.nu_plus)
    z = np.zeros((n, n))

    def blk(a, b, c, d):
        return np.block([[a, b], [c, d]])

    coeffs = np.stack([
        -t * t * blk(w_l, z, z, z),
        1j * r * t * blk(z, w_l, d_plus, z),
        r * r * blk(d_minus, z, z, d_plus),
        1j * r * t * blk(z, d_minus, w_u, z),
        -t * t * blk(z, z, z, w_u),
    ]).astype(complex)
    return SymbolMatrix(coeffs)


def symbol(x, nu: NuPhases, coupling: CouplingPair) -> np.ndarray:
    """Evaluate ``T(e^{ix})``; ``x`` may be an array (leading axes are kept)."""
    return symbol_matrix(nu, coupling)(x)


def _eig_unitary(m):
    """Eigenvalues and orthonormal eigenvectors of a normal matrix via complex Schur."""
    tri, z = schur(m, output="complex")
    return np.diag(tri).copy(), z


@dataclass(frozen=True, eq=False)
class BandFunctions:
    """Eigenvalue tracks of the symbol over a grid of ``x``.

    Attributes
    ----------
    x : ndarray, shape (n,)
    values : ndarray, shape (n, 2N)
        ``values[i, j]`` is track ``j`` at ``x[i]``; columns follow the
        eigenvectors continuously.
    ambiguous : tuple of int
        Grid indices where the overlap matching was not clear-cut
        (near-degenerate crossings).
    nu, coupling
        The symbol data, kept for endpoint refinement.
    """

    x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    ambiguous: tuple
    nu: NuPhases
    coupling: CouplingPair

    @property
    def n_tracks(self) -> int:
        return int(self.values.shape[1])

    @property
    def angles(self) -> np.ndarray:
        """Track angles unwrapped along ``x``."""
        return np.unwrap(np.angle(self.values), axis=0)

    def unimodularity_defect(self) -> float:
        return float(np.max(np.abs(np.abs(self.values) - 1.0)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"{p}_{j}" for j in range(self.n_tracks) for p in ("re", "im")])
            for xi, row in zip(self.x, self.values):
                w.writerow([repr(float(xi))] + [repr(float(v)) for z in row for v in (z.real, z.imag)])


def band_functions(nu: NuPhases, coupling: CouplingPair, x_grid, *,
                   overlap_tol: float = 0.25) -> BandFunctions:
    """Eigensolve the symbol on ``x_grid`` and follow each eigenvalue continuously.

    Consecutive grid points are matched by the assignment that maximises the
    total squared eigenvector overlap.  A grid point is flagged as ambiguous
    when some eigenvector has a second overlap above ``overlap_tol``.

    Parameters
    ----------
    nu : NuPhases
    coupling : CouplingPair
    x_grid : array_like
        Increasing grid with at least ``4 N`` points.
    """
    x = np.asarray(x_grid, float)
    if x.ndim != 1 or x.size < 4 * nu.N:
        raise ValueError(f"x grid needs at least {4 * nu.N} points")
    if np.any(np.diff(x) <= 0):
        raise ValueError("x grid must be strictly increasing")
    mats = symbol_matrix(nu, coupling)(x)
    size = mats.shape[-1]
    values = np.empty((x.size, size), complex)
    ambiguous = []
    prev = None
    for i, m in enumerate(mats):
        ev, vec = _eig_unitary(m)
        if prev is not None:
            ov = np.abs(prev.conj().T @ vec) ** 2
            rows, cols = linear_sum_assignment(-ov)
            order = cols[np.argsort(rows)]
            ev, vec = ev[order], vec[:, order]
            ov = ov[:, order]
            second = np.sort(ov, axis=1)[:, -2] if size > 1 else np.zeros(1)
            if np.any(second > overlap_tol):
                ambiguous.append(i)
        values[i] = ev
        prev = vec
    return BandFunctions(x, values, tuple(ambiguous), nu, coupling)


def _refine_extreme(bands: BandFunctions, j: int, i: int, sign: float) -> float:
    """Refine the extreme angle of track ``j`` near grid index ``i``.

    ``sign=+1`` refines a minimum and ``-1`` a maximum.  Returns the angle on
    the unwrapped branch of the track.
    """
    x = bands.x
    h_lo = x[i] - x[i - 1] if i > 0 else x[1] - x[0]
    h_hi = x[i + 1] - x[i] if i + 1 < x.size else x[-1] - x[-2]
    ref = bands.values[i, j]
    ref_angle = bands.angles[i, j]
    sym = symbol_matrix(bands.nu, bands.coupling)

    def rel(xx):
        ev = np.linalg.eigvals(sym(xx))
        mu = ev[np.argmin(np.abs(ev - ref))]
        return float(np.angle(mu / ref))

    res = minimize_scalar(lambda xx: sign * rel(xx), bounds=(x[i] - h_lo, x[i] + h_hi),
                          method="bounded", options={"xatol": 1e-12})
    best = min(sign * rel(x[i]), float(res.fun))
    return ref_angle + sign * best


def band_arcs(bands: BandFunctions, a: float = 0.0, *, refine: bool = True,
              degenerate_tol: float = 1e-10) -> ArcSet:
    """Union of the track ranges, rotated by ``exp(-i a)``.

    Each track's angular range is read off the unwrapped angles; with
    ``refine=True`` both extremes are polished by bounded scalar
    minimisation around the best grid point.  Tracks whose range is below
    ``degenerate_tol`` are reported as isolated points of the result.
    """
    ang = bands.angles
    intervals, points = [], []
    for j in range(bands.n_tracks):
        i_lo, i_hi = int(np.argmin(ang[:, j])), int(np.argmax(ang[:, j]))
        lo, hi = ang[i_lo, j], ang[i_hi, j]
        if hi - lo < degenerate_tol:
            points.append(lo - a)
            continue
        if refine and hi - lo < TWO_PI:
            lo = _refine_extreme(bands, j, i_lo, 1.0)
            hi = _refine_extreme(bands, j, i_hi, -1.0)
        intervals.append((lo - a, hi - a))
    return ArcSet.from_intervals(intervals, points)


def model_band_arcs(model: PhaseModel, n_x: int = 512, **kw) -> ArcSet:
    """Band arcs of a periodic or two-valued model, slope included."""
    nu = nu_phases(model)
    xs = np.linspace(0.0, TWO_PI, max(n_x, 4 * nu.N), endpoint=False)
    return band_arcs(band_functions(nu, model.coupling, xs), model.a, **kw)


def two_periodic_eigenvalues(x, delta: float, theta_sum: float, a: float,
                             coupling: CouplingPair) -> np.ndarray:
    """Closed-form band functions of the two-valued model.

    Returns an array ``(..., 2)`` holding
    ``exp(-i (a + theta_sum)) (c +- i sqrt(1 - c^2))`` with
    ``c = r^2 cos(delta) - t^2 cos(2x + delta)``.  The symbol of
    :func:`symbol_matrix` at ``x`` has these eigenvalues at ``-x`` (the two
    parametrisations run around the circle in opposite directions); the
    band ranges coincide.
    """
    x = np.asarray(x, float)
    c = coupling.r ** 2 * math.cos(delta) - coupling.t ** 2 * np.cos(2 * x + delta)
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    rot = np.exp(-1j * (a + theta_sum))
    return rot * np.stack((c + 1j * s, c - 1j * s), axis=-1)


def two_periodic_closed_form(delta: float, theta_sum: float, a: float,
                             coupling: CouplingPair) -> ArcSet:
    """Band arcs of the two-valued model without any eigensolve.

    ``c`` ranges over ``[r^2 cos(delta) - t^2, r^2 cos(delta) + t^2]`` (clipped
    to ``[-1, 1]``); the spectrum is the image of ``exp(+-i arccos c)``
    rotated by ``-(a + theta_sum)``.
    """
    base = coupling.r ** 2 * math.cos(delta)
    c_lo = max(-1.0, base - coupling.t ** 2)
    c_hi = min(1.0, base + coupling.t ** 2)
    phi_lo, phi_hi = math.acos(c_hi), math.acos(c_lo)
    centre = -(a + theta_sum)
    if phi_hi - phi_lo == 0.0:
        return ArcSet.from_intervals([], [centre + phi_lo, centre - phi_lo])
    return ArcSet.from_intervals([(centre + phi_lo, centre + phi_hi),
                                  (centre - phi_hi, centre - phi_lo)])


def t1_eigenvalues(nu: NuPhases, x, *, shifted: bool = True) -> np.ndarray:
    """Eigenvalues of the fully transmitting symbol from the two cyclic families.

    The families are ``exp(-2ix) mu`` with ``mu**N = exp(-i sum(nu_plus))``
    and ``exp(2ix) mu`` with ``mu**N = exp(-i sum(nu_minus))``.  Taken literally
    at ``x`` they match the symbol only up to a factor ``-1``; with
    ``shifted=True`` they are evaluated at ``x - pi/2``, which absorbs that
    sign and reproduces the symbol eigenvalues point by point.  Either way
    the union over ``x`` is the same set.

    Returns
    -------
    ndarray, shape (..., 2N)
    """
    x = np.asarray(x, float)
    if shifted:
        x = x - np.pi / 2
    n = nu.N
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    fam_p = np.exp(-1j * nu.nu_plus.sum() / n) * roots
    fam_m = np.exp(-1j * nu.nu_minus.sum() / n) * roots
    return np.concatenate((np.exp(-2j * x)[..., None] * fam_p,
                           np.exp(2j * x)[..., None] * fam_m), axis=-1)


def limit_spectrum(nu: NuPhases, endpoint: str):
    """Spectrum at the decoupled or fully transmitting endpoint.

    Parameters
    ----------
    endpoint : {"t=0", "t=1"}

    Returns
    -------
    ndarray or ArcSet
        For ``"t=0"`` the ``2N`` eigenvalue angles ``-nu`` (sorted, with
        multiplicity; each is an infinitely degenerate eigenvalue of the
        operator).  For ``"t=1"`` the union of the cyclic families, which
        wind around the whole circle.
    """
    if endpoint in ("t=0", "0", 0):
        return np.sort(np.mod(-np.concatenate((nu.nu_minus, nu.nu_plus)), TWO_PI))
    if endpoint in ("t=1", "1", 1):
        # each family exp(-+2ix) mu covers the circle as x runs over a period
        return ArcSet.full()
    raise ValueError("endpoint must be 't=0' or 't=1'")
