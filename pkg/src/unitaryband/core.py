"""Scattering blocks, finite windows of the monodromy operator and its stencil.

The operator acts on sequences indexed by lattice sites.  It is the product
``U = U_o @ U_e`` of two block-diagonal unitaries: ``U_e`` carries the
scattering block ``S_j`` on the site pair ``(j, j+1)`` for even ``j`` and
``U_o`` does the same for odd ``j``.  The result is pentadiagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WindowTooSmallError
from .models import (
    AlmostPeriodicPhases,
    CouplingPair,
    EvenExtension,
    ExplicitPhases,
    PeriodicPhases,
    PhaseModel,
    PhaseTriple,
    RandomPhases,
    TProfile,
    TwoValuedPhases,
    circular_distance,
    wrap_angle,
)

__all__ = [
    "AlmostPeriodicPhases", "BandWindow", "Classification", "CouplingPair", "EvenExtension",
    "ExplicitPhases", "PeriodicPhases", "PhaseModel", "PhaseTriple", "RandomPhases",
    "StencilResult", "TProfile", "TwoValuedPhases", "apply_monodromy", "build_windowed_unitary",
    "circular_distance", "classify_tridiagonal", "gauge_phases", "scattering_block",
    "scattering_blocks", "wrap_angle",
]


def scattering_blocks(theta, alpha, gamma, t) -> np.ndarray:
    """Vectorised scattering blocks.

    Parameters
    ----------
    theta, alpha, gamma : array_like
        Phases, broadcast together.
    t : array_like
        Transmission amplitudes in ``[0, 1]``; ``r = sqrt(1 - t**2)``.

    Returns
    -------
    ndarray of shape ``(..., 2, 2)``
        ``exp(-i theta) [[r e^{-i alpha}, i t e^{i gamma}], [i t e^{-i gamma}, r e^{i alpha}]]``.
    """
    theta, alpha, gamma, t = np.broadcast_arrays(*(np.asarray(x, float) for x in
                                                   (theta, alpha, gamma, t)))
    r = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    pre = np.exp(-1j * theta)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = pre * r * np.exp(-1j * alpha)
    out[..., 0, 1] = pre * 1j * t * np.exp(1j * gamma)
    out[..., 1, 0] = pre * 1j * t * np.exp(-1j * gamma)
    out[..., 1, 1] = pre * r * np.exp(1j * alpha)
    return out


def scattering_block(phases: PhaseTriple, coupling: CouplingPair) -> np.ndarray:
    """The 2x2 unitary scattering block for one site pair.

    Examples
    --------
    >>> scattering_block(PhaseTriple(0, 0, 0), CouplingPair.from_t(1.0))
    array([[0.+0.j, 0.+1.j],
           [0.+1.j, 0.+0.j]])
    """
    pre = np.exp(-1j * phases.theta)
    r, t = coupling.r, coupling.t
    return pre * np.array(
        [[r * np.exp(-1j * phases.alpha), 1j * t * np.exp(1j * phases.gamma)],
         [1j * t * np.exp(-1j * phases.gamma), r * np.exp(1j * phases.alpha)]])


@dataclass(frozen=True, eq=False)
class BandWindow:
    """Dense finite section of the monodromy operator.

    Attributes
    ----------
    start, stop : int
        First and last lattice site (inclusive) represented by the rows.
    matrix : ndarray
        Complex square matrix of size ``stop - start + 1``.
    edge : str
        How the cut was closed: ``"identity"`` (dangling half-blocks replaced
        by 1x1 identity entries) or ``"halfline"`` (left edge of the half-line
        operator, right edge as ``"identity"``).
    """

    start: int
    stop: int
    matrix: np.ndarray = field(repr=False)
    edge: str = "identity"

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.start, self.stop + 1)

    @property
    def size(self) -> int:
        return self.stop - self.start + 1

    def unitarity_defect(self) -> float:
        """Largest entry of ``|U^* U - I|`` (column-pair inner product deviation)."""
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))

    def bandwidth(self, tol=0.0) -> int:
        """Largest ``|i - j|`` with ``|U_ij| > tol``."""
        i, j = np.nonzero(np.abs(self.matrix) > tol)
        return int(np.max(np.abs(i - j))) if i.size else 0


def _block_diagonal(model: PhaseModel, lo: int, hi: int, parity: int, left_fill=1.0) -> np.ndarray:
    """Block-diagonal factor carrying ``S_j`` on ``(j, j+1)`` for ``j % 2 == parity``.

    Sites of the window ``[lo, hi]`` whose partner falls outside are given the
    1x1 entry ``left_fill`` (left edge) or ``1`` (right edge).
    """
    n = hi - lo + 1
    out = np.zeros((n, n), dtype=complex)
    first = lo if lo % 2 == parity else lo + 1
    js = np.arange(first, hi, 2)
    if js.size:
        th, al, ga = model.phases(js)
        blocks = scattering_blocks(th, al, ga, model.t_at(js))
        idx = js - lo
        out[idx, idx] = blocks[:, 0, 0]
        out[idx, idx + 1] = blocks[:, 0, 1]
        out[idx + 1, idx] = blocks[:, 1, 0]
        out[idx + 1, idx + 1] = blocks[:, 1, 1]
    if first == lo + 1:
        out[0, 0] = left_fill
    last_covered = js[-1] + 1 if js.size else lo
    if last_covered < hi:
        out[n - 1, n - 1] = 1.0
    return out


def build_windowed_unitary(model: PhaseModel, blocks: int, offset: int = 0) -> BandWindow:
    """Dense window of ``U = U_o U_e`` on the sites ``offset .. offset + 2*blocks - 1``.

    Half-blocks that would stick out of the window are replaced by 1x1
    identity entries, which keeps the window exactly unitary.  Rows other
    than the two edge rows coincide with the infinite operator.

    Parameters
    ----------
    model : PhaseModel
    blocks : int
        Number ``K >= 2`` of site pairs.
    offset : int
        First site of the window.

    Raises
    ------
    WindowTooSmallError
        If ``blocks < 2``.
    """
    if blocks < 2:
        raise WindowTooSmallError(f"need at least 2 blocks, got {blocks}")
    lo, hi = int(offset), int(offset) + 2 * int(blocks) - 1
    u_e = _block_diagonal(model, lo, hi, 0)
    u_o = _block_diagonal(model, lo, hi, 1)
    return BandWindow(lo, hi, u_o @ u_e, "identity")


@dataclass(frozen=True, eq=False)
class StencilResult:
    """Output of :func:`apply_monodromy`.

    ``trusted[n]`` is False for sites whose exact image needs input
    coefficients outside the supplied window.
    """

    values: np.ndarray
    trusted: np.ndarray
    start: int

    @property
    def untrusted_sites(self) -> np.ndarray:
        return self.start + np.flatnonzero(~self.trusted)


def apply_monodromy(coeffs, model: PhaseModel, start: int = 0) -> StencilResult:
    """Apply the operator to coefficients on sites ``start .. start + n - 1``.

    Each basis vector is mapped to its four-term image (two sites back, two
    forward); contributions landing outside the window are dropped and
    coefficients outside the window are taken as zero.  Row ``2k`` of the
    operator reads columns ``2k-2 .. 2k+1`` and row ``2k+1`` reads
    ``2k .. 2k+3``; rows reading outside the window are flagged as untrusted.

    Parameters
    ----------
    coeffs : array_like of complex
        Coefficients ``c_n`` on the window.
    model : PhaseModel
    start : int
        Site index of ``coeffs[0]``.

    Returns
    -------
    StencilResult
    """
    c = np.asarray(coeffs, dtype=complex)
    n = c.size
    if n < 4:
        raise WindowTooSmallError("the stencil needs at least 4 sites")
    start = int(start)
    stop = start + n - 1
    ext = np.arange(start - 1, stop + 2)
    th, al, ga = model.phases(ext)
    tt = model.t_at(ext)
    rr = np.sqrt(np.clip(1.0 - tt * tt, 0.0, None))
    out = np.zeros(n + 4, dtype=complex)    # padded by two sites on each side

    def at(arr, sites):
        return arr[sites - (start - 1)]

    sites = np.arange(start, stop + 1)
    for parity in (0, 1):
        m = sites[sites % 2 == parity]
        cm = c[m - start]
        pos = m - start + 2     # position in the padded output
        if parity == 0:
            # image of phi_{2k}, with 2k = m
            km1, k0, kp1 = m - 1, m, m + 1
            ph_b = np.exp(-1j * (at(th, k0) + at(th, km1)))
            ph_f = np.exp(-1j * (at(th, k0) + at(th, kp1)))
            out[pos - 1] += cm * 1j * at(rr, k0) * at(tt, km1) * ph_b * np.exp(-1j * (at(al, k0) - at(ga, km1)))
            out[pos] += cm * at(rr, k0) * at(rr, km1) * ph_b * np.exp(-1j * (at(al, k0) - at(al, km1)))
            out[pos + 1] += cm * 1j * at(rr, kp1) * at(tt, k0) * ph_f * np.exp(-1j * (at(ga, k0) + at(al, kp1)))
            out[pos + 2] += -cm * at(tt, k0) * at(tt, kp1) * ph_f * np.exp(-1j * (at(ga, k0) + at(ga, kp1)))
        else:
            # image of phi_{2k+1}, with 2k = m - 1
            k0 = m - 1
            km1, kp1 = k0 - 1, k0 + 1
            ph_b = np.exp(-1j * (at(th, k0) + at(th, km1)))
            ph_f = np.exp(-1j * (at(th, k0) + at(th, kp1)))
            out[pos - 2] += -cm * at(tt, k0) * at(tt, km1) * ph_b * np.exp(1j * (at(ga, k0) + at(ga, km1)))
            out[pos - 1] += cm * 1j * at(tt, k0) * at(rr, km1) * ph_b * np.exp(1j * (at(ga, k0) + at(al, km1)))
            out[pos] += cm * at(rr, k0) * at(rr, kp1) * ph_f * np.exp(1j * (at(al, k0) - at(al, kp1)))
            out[pos + 1] += cm * 1j * at(rr, k0) * at(tt, kp1) * ph_f * np.exp(1j * (at(al, k0) - at(ga, kp1)))
    # row 2k reads columns 2k-2 .. 2k+1, row 2k+1 reads columns 2k .. 2k+3
    lo_col = np.where(sites % 2 == 0, sites - 2, sites - 1)
    trusted = (lo_col >= start) & (lo_col + 3 <= stop)
    return StencilResult(out[2:-2], trusted, start)


def gauge_phases(gamma_seq) -> np.ndarray:
    """Diagonal gauge that removes the ``gamma`` phases from a window.

    Returns ``zeta`` with ``zeta[0] = 0`` and ``zeta[j] - zeta[j-1] = -gamma[j-1]``.
    Conjugating a window by ``diag(exp(i zeta))``, i.e. forming
    ``D^{-1} U D``, gives the window of the same model with ``gamma = 0``.
    """
    g = np.asarray(gamma_seq, dtype=float)
    zeta = np.zeros(g.size)
    if g.size > 1:
        zeta[1:] = -np.cumsum(g[:-1])
    return wrap_angle(zeta)


@dataclass(frozen=True)
class Classification:
    """Result of :func:`classify_tridiagonal`.

    ``kind`` is one of ``"shift_like"``, ``"block_decomposition"``,
    ``"not_tridiagonal"`` or ``"not_unitary"``.  For block decompositions,
    ``blocks`` lists ``(first_index, size)`` pairs; a block that wraps
    around the corner of a cyclic window starts at the last index.
    """

    kind: str
    blocks: tuple = ()
    direction: int = 0
    cyclic: bool = False

    @property
    def block_sizes(self) -> tuple:
        return tuple(size for _, size in self.blocks)


def classify_tridiagonal(matrix, tol: float = 1e-12) -> Classification:
    """Check the shift-or-blocks dichotomy for a finite tridiagonal unitary.

    A unitary matrix whose entries vanish off the three central diagonals is
    either a (weighted) shift or a direct sum of 1x1 and 2x2 blocks.  For
    windows of size ``n >= 5`` the two corner entries are allowed as well, so
    that cyclic shifts and blocks straddling the corner are recognised.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix.
    tol : float
        Threshold below which an entry counts as zero; also the unitarity
        tolerance.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    n = m.shape[0]
    if np.max(np.abs(m.conj().T @ m - np.eye(n))) > max(tol, 1e-14) * max(1, n):
        return Classification("not_unitary")
    big = np.abs(m) > tol
    i, j = np.nonzero(big)
    dist = np.abs(i - j)
    cyclic = n >= 5
    allowed = (dist <= 1) | (cyclic & (dist == n - 1))
    if not np.all(allowed):
        return Classification("not_tridiagonal")
    uses_corner = cyclic and bool(big[0, n - 1] or big[n - 1, 0])
    nxt = (np.arange(n) + 1) % n
    idx = np.arange(n)
    limit = n if uses_corner else n - 1
    bond = np.zeros(n, dtype=bool)     # bond[k] links k and k+1 (mod n)
    bond[:limit] = big[idx[:limit], nxt[:limit]] | big[nxt[:limit], idx[:limit]]
    if uses_corner and np.all(bond):
        up = np.abs(m[idx, nxt])
        down = np.abs(m[nxt, idx])
        if np.all(np.abs(np.diag(m)) <= tol):
            if np.all(np.abs(up - 1.0) <= 1e3 * tol + 1e-12) and np.all(down <= tol):
                return Classification("shift_like", direction=-1, cyclic=True)
            if np.all(np.abs(down - 1.0) <= 1e3 * tol + 1e-12) and np.all(up <= tol):
                return Classification("shift_like", direction=1, cyclic=True)
        return Classification("block_decomposition", blocks=((0, n),), cyclic=True)
    # connected components along the (possibly cyclic) chain of bonds
    if uses_corner:
        first = int(np.flatnonzero(~bond)[0]) + 1
        order = [(first + s) % n for s in range(n)]
    else:
        order = list(range(n))
    blocks = []
    run_start, run_len = order[0], 1
    for a in order[:-1]:
        if bond[a]:
            run_len += 1
        else:
            blocks.append((run_start, run_len))
            run_start, run_len = (a + 1) % n, 1
    blocks.append((run_start, run_len))
    return Classification("block_decomposition", blocks=tuple(blocks), cyclic=uses_corner)
