"""Real 4x4 representation of complex 2x2 matrices.

``rho`` maps ``(x, y)`` in C^2 to ``(Re x, -Im x, Re y, -Im y)`` in R^4 and
``tau`` maps a complex 2x2 matrix to the real 4x4 matrix whose 2x2 blocks are
``Re(a) I + Im(a) J`` with ``J = [[0, 1], [-1, 0]]``.  Together they satisfy
``rho(T u) = tau(T) rho(u)``; ``tau`` is an injective algebra homomorphism
onto the subalgebra of block matrices of that form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["I2", "J2", "Real4", "rho", "rho_inverse", "tau", "tau_matrix", "untau",
           "frobenius", "verify_algebra"]

I2 = np.eye(2)
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def rho(u) -> np.ndarray:
    """Real 4-vector ``(Re x, -Im x, Re y, -Im y)`` of ``u = (x, y)``.

    Accepts stacks of shape ``(..., 2)``.
    """
    u = np.asarray(u, dtype=complex)
    out = np.empty(u.shape[:-1] + (4,))
    out[..., 0::2] = u.real
    out[..., 1::2] = -u.imag
    return out


def rho_inverse(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[..., 0::2] - 1j * v[..., 1::2]


def tau_matrix(a) -> np.ndarray:
    """Real 4x4 image of complex 2x2 matrices, vectorised over leading axes."""
    a = np.asarray(a, dtype=complex)
    re, im = a.real, a.imag
    out = np.empty(a.shape[:-2] + (4, 4))
    # block (i, j) = re_ij * I + im_ij * J
    out[..., 0::2, 0::2] = re
    out[..., 1::2, 1::2] = re
    out[..., 0::2, 1::2] = im
    out[..., 1::2, 0::2] = -im
    return out


def untau(m) -> np.ndarray:
    """Inverse of :func:`tau_matrix` on the subalgebra (reads the even rows)."""
    m = np.asarray(m, dtype=float)
    return m[..., 0::2, 0::2] + 1j * m[..., 0::2, 1::2]


@dataclass(frozen=True, eq=False)
class Real4:
    """Element of the subalgebra of real 4x4 matrices with ``aI + bJ`` blocks.

    Only the eight block coefficients are stored (as one complex 2x2 array);
    the 4x4 matrix is rebuilt on demand, so the block structure holds by
    construction.
    """

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex).reshape(2, 2))

    @property
    def matrix(self) -> np.ndarray:
        return tau_matrix(self.coeffs)

    @property
    def block_coefficients(self) -> np.ndarray:
        """``(2, 2, 2)`` array of ``(a, b)`` pairs, block ``(i, j) = a I + b J``."""
        return np.stack((self.coeffs.real, self.coeffs.imag), axis=-1)

    def __matmul__(self, other):
        if isinstance(other, Real4):
            return Real4(self.coeffs @ other.coeffs)
        return self.matrix @ other

    def __add__(self, other):
        return Real4(self.coeffs + other.coeffs)

    def transpose(self) -> "Real4":
        return Real4(self.coeffs.conj().T)

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def tau(a) -> Real4:
    """Image of a complex 2x2 matrix in the real subalgebra."""
    return Real4(a)


def frobenius(a) -> float:
    """``sqrt(sum of squared singular values)``, i.e. the Frobenius norm."""
    return float(np.linalg.norm(a))


def _random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def verify_algebra(samples: int = 1000, seed: int = 0, path=None) -> dict:
    """Check the algebraic and metric identities of ``rho`` and ``tau`` on random data.

    Parameters
    ----------
    samples : int
        Number of random draws (at least 1).
    seed : int
    path : str or Path, optional
        When given, the report is also written there as JSON.

    Returns
    -------
    dict
        Maximum deviation per identity, keyed by a short name.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    A = _random_complex(rng, (samples, 2, 2))
    B = _random_complex(rng, (samples, 2, 2))
    u = _random_complex(rng, (samples, 2))
    v = _random_complex(rng, (samples, 2))
    al = _random_complex(rng, samples)
    s = rng.normal(size=samples)
    # unit Frobenius norm keeps all deviations on the same scale
    A /= np.linalg.norm(A, axis=(1, 2))[:, None, None]
    B /= np.linalg.norm(B, axis=(1, 2))[:, None, None]
    tA, tB = tau_matrix(A), tau_matrix(B)
    H = A + np.conj(np.swapaxes(A, 1, 2))
    # well-conditioned invertible samples for the inverse identity
    C = A + 2.0 * np.eye(2)
    dets = np.linalg.det(A)
    unimod = A / np.sqrt(dets)[:, None, None]

    def worst(x):
        return float(np.max(np.abs(x))) if np.size(x) else 0.0

    def inner(x, y):
        return np.einsum("...i,...i->...", np.conj(x), y)

    rep = {}
    rep["additivity"] = worst(tau_matrix(A + B) - (tA + tB))
    rep["real_homogeneity"] = worst(tau_matrix(s[:, None, None] * A) - s[:, None, None] * tA)
    rep["multiplicativity"] = worst(tau_matrix(A @ B) - tA @ tB)
    rep["adjoint"] = worst(tau_matrix(np.conj(np.swapaxes(A, 1, 2))) - np.swapaxes(tA, 1, 2))
    rep["inverse"] = worst(tau_matrix(np.linalg.inv(C)) - np.linalg.inv(tau_matrix(C)))
    rep["norm_sqrt2"] = worst(np.linalg.norm(tA, axis=(1, 2)) - np.sqrt(2.0) * np.linalg.norm(A, axis=(1, 2)))
    rep["rho_norm"] = worst(np.linalg.norm(rho(u), axis=1) - np.linalg.norm(u, axis=1))
    rep["rho_additivity"] = worst(rho(u + v) - rho(u) - rho(v))
    rep["rho_scalar"] = worst(rho(al[:, None] * u)
                              - (al.real[:, None] * rho(u) + al.imag[:, None] * rho(1j * u)))
    rep["intertwining"] = worst(rho(np.einsum("nij,nj->ni", A, u)) - np.einsum("nij,nj->ni", tA, rho(u)))
    rep["rho_i_orthogonal"] = worst(np.einsum("ni,ni->n", rho(1j * u), rho(u)))
    Tv = np.einsum("nij,nj->ni", A, v)
    tv = np.einsum("nij,nj->ni", tA, rho(v))
    rep["real_inner_product"] = worst(np.einsum("ni,ni->n", rho(u), tv) - inner(u, Tv).real)
    rep["imag_inner_product"] = worst(np.einsum("ni,ni->n", rho(1j * u), tv) - inner(u, Tv).imag)
    rep["unimodular_det"] = worst(np.abs(np.linalg.det(tau_matrix(unimod))) - 1.0)
    ev_h = np.sort(np.linalg.eigvalsh(H), axis=1)
    ev_t = np.sort(np.linalg.eigvalsh(tau_matrix(H)), axis=1)
    rep["selfadjoint_doubling"] = worst(ev_t - np.repeat(ev_h, 2, axis=1))
    rep["selfadjoint_symmetric"] = worst(tau_matrix(H) - np.swapaxes(tau_matrix(H), 1, 2))
    if path is not None:
        with open(path, "w") as fh:
            json.dump({"samples": samples, "seed": seed, "max_deviation": rep}, fh, indent=2,
                      sort_keys=True)
    return rep
