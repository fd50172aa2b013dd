"""Graded finite-dimensional operators and spectral calculus.

A grading splits C^n into a positive and a negative sector, with the grading
involution gamma = diag(+1, ..., +1, -1, ..., -1).  Operators carry an optional
parity label: even operators commute with gamma (block diagonal), odd operators
anticommute (block off-diagonal).  Parity is enforced at the level of exact
block sparsity, not up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DomainError,
    InternalConsistencyError,
    NegativityError,
    NotInvertibleError,
    ParityError,
)

EPS_EIG = 1e-10
EPS_PSD = 1e-10
EPS_INV = 1e-10

_PARITIES = ("even", "odd", "none")


@dataclass(frozen=True)
class GradedSpace:
    """Dimensions of the positive and negative sector of a graded C^n."""

    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValueError("sector dimensions must be nonnegative")
        if self.n_plus + self.n_minus < 1:
            raise ValueError("graded space must have dimension at least 1")

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def gamma_diag(self) -> np.ndarray:
        g = np.ones(self.n)
        g[self.n_plus:] = -1.0
        return g

    def gamma_matrix(self) -> np.ndarray:
        return np.diag(self.gamma_diag).astype(complex)

    def gamma(self) -> "GradedOperator":
        return GradedOperator(self.gamma_matrix(), self, parity="even", hermitian=True)

    def balanced(self) -> bool:
        return self.n_plus == self.n_minus


def _hermitize(m: np.ndarray) -> np.ndarray:
    # (m + m^H)/2 entrywise: the result satisfies a[i,j] == conj(a[j,i])
    # bit-exactly because IEEE addition is commutative.
    return (m + m.conj().T) / 2.0


def _dead_blocks_zero(m: np.ndarray, space: GradedSpace, parity: str) -> bool:
    k = space.n_plus
    if parity == "even":
        return not (np.any(m[:k, k:]) or np.any(m[k:, :k]))
    if parity == "odd":
        return not (np.any(m[:k, :k]) or np.any(m[k:, k:]))
    return True


def _snap_parity(m: np.ndarray, space: GradedSpace, expected: str, tol: float):
    """Zero the forbidden blocks of m if they are negligible.

    Returns (matrix, parity). Falls back to parity "none" when the forbidden
    blocks carry real weight, so a wrong expectation never silently destroys
    data.
    """
    if expected == "none":
        return m, "none"
    k = space.n_plus
    out = m.copy()
    if expected == "even":
        crumbs = max(
            np.abs(m[:k, k:]).max(initial=0.0), np.abs(m[k:, :k]).max(initial=0.0)
        )
        if crumbs > tol:
            return m, "none"
        out[:k, k:] = 0.0
        out[k:, :k] = 0.0
    else:
        crumbs = max(
            np.abs(m[:k, :k]).max(initial=0.0), np.abs(m[k:, k:]).max(initial=0.0)
        )
        if crumbs > tol:
            return m, "none"
        out[:k, :k] = 0.0
        out[k:, k:] = 0.0
    return out, expected


@dataclass
class SpectralDecomposition:
    """Validated eigendecomposition T = U diag(w) U^H of a hermitian operator."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residual: float
    orth_defect: float


class GradedOperator:
    """A matrix on a graded space with parity and hermiticity bookkeeping.

    Hermitian inputs are symmetrized on construction, so ``matrix`` equals its
    own conjugate transpose bit-exactly whenever ``hermitian`` is set.  Parity
    labels are checked against exact block sparsity and rejected otherwise.
    """

    __slots__ = ("matrix", "space", "parity", "hermitian", "_eig", "_eigvals_cache")

    def __init__(self, matrix, space: GradedSpace, parity: str = "none",
                 hermitian: bool = False):
        m = np.array(matrix, dtype=complex)
        if m.shape != (space.n, space.n):
            raise ValueError(f"matrix shape {m.shape} does not match space dim {space.n}")
        if parity not in _PARITIES:
            raise ValueError(f"unknown parity {parity!r}")
        if hermitian:
            m = _hermitize(m)
        if not _dead_blocks_zero(m, space, parity):
            raise ParityError(
                f"operator declared {parity} has nonzero forbidden blocks"
            )
        self.matrix = m
        self.space = space
        self.parity = parity
        self.hermitian = bool(hermitian)
        self._eig = None
        self._eigvals_cache = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def even_from_blocks(cls, space: GradedSpace, top, bottom, hermitian=False):
        m = np.zeros((space.n, space.n), dtype=complex)
        k = space.n_plus
        m[:k, :k] = top
        m[k:, k:] = bottom
        return cls(m, space, parity="even", hermitian=hermitian)

    @classmethod
    def odd_from_block(cls, space: GradedSpace, lower, upper=None):
        """Odd operator from its lower-left block (positive to negative sector).

        When ``upper`` is omitted the adjoint block is used, giving a hermitian
        odd operator.
        """
        lower = np.asarray(lower, dtype=complex)
        if lower.shape != (space.n_minus, space.n_plus):
            raise ValueError(
                f"lower block must be {space.n_minus} x {space.n_plus}, got {lower.shape}"
            )
        herm = upper is None
        if upper is None:
            upper = lower.conj().T
        m = np.zeros((space.n, space.n), dtype=complex)
        k = space.n_plus
        m[k:, :k] = lower
        m[:k, k:] = upper
        return cls(m, space, parity="odd", hermitian=herm)

    @classmethod
    def snapped(cls, matrix, space: GradedSpace, expected_parity: str,
                hermitian=False, tol_scale: float = 1e-10):
        """Construct with forbidden blocks snapped to exact zero if negligible."""
        m = np.array(matrix, dtype=complex)
        scale = np.abs(m).max(initial=0.0)
        m, parity = _snap_parity(m, space, expected_parity, tol_scale * max(1.0, scale))
        return cls(m, space, parity=parity, hermitian=hermitian)

    # -- block access ------------------------------------------------------

    def block(self, row: str, col: str) -> np.ndarray:
        k = self.space.n_plus
        r = slice(0, k) if row == "+" else slice(k, self.space.n)
        c = slice(0, k) if col == "+" else slice(k, self.space.n)
        return self.matrix[r, c]

    @property
    def odd_block(self) -> np.ndarray:
        """Lower-left block, the part mapping the positive into the negative sector."""
        return self.block("-", "+")

    # -- spectral data -----------------------------------------------------

    def eig(self, eps_eig: float = EPS_EIG) -> SpectralDecomposition:
        """Eigendecomposition with residual validation, cached after first use."""
        if not self.hermitian:
            raise DomainError("eigendecomposition requires a hermitian operator")
        if self._eig is None:
            w, u = np.linalg.eigh(self.matrix)
            self._attach_eig(w, u, eps_eig)
        return self._eig

    def _attach_eig(self, w, u, eps_eig: float = EPS_EIG):
        """Install an externally computed eigendecomposition after validating it."""
        w = np.asarray(w, dtype=float)
        u = np.asarray(u, dtype=complex)
        scale = np.linalg.norm(self.matrix)
        residual = np.linalg.norm(self.matrix @ u - u * w)
        orth = np.linalg.norm(u.conj().T @ u - np.eye(len(w)))
        if residual > eps_eig * max(scale, 1e-300):
            raise InternalConsistencyError(
                f"eigendecomposition residual {residual:.3e} exceeds "
                f"{eps_eig:.1e} * ||T|| = {eps_eig * scale:.3e}"
            )
        if orth > eps_eig * max(1.0, np.sqrt(len(w))):
            raise InternalConsistencyError(
                f"eigenvector frame orthonormality defect {orth:.3e} too large"
            )
        self._eig = SpectralDecomposition(w, u, residual, orth)
        return self._eig

    def eigenvalues(self) -> np.ndarray:
        """Sorted spectrum; cheaper than eig() when vectors are not needed."""
        if self._eig is not None:
            return self._eig.eigenvalues
        if self._eigvals_cache is None:
            if not self.hermitian:
                raise DomainError("eigenvalues require a hermitian operator")
            self._eigvals_cache = np.linalg.eigvalsh(self.matrix)
        return self._eigvals_cache

    # -- arithmetic helpers (plain ndarray out, bookkeeping by callers) -----

    def __matmul__(self, other):
        if isinstance(other, GradedOperator):
            return self.matrix @ other.matrix
        return self.matrix @ other

    def norm(self) -> float:
        return operator_norm(self)


def _mul_parity(a: str, b: str) -> str:
    if a == "none" or b == "none":
        return "none"
    return "even" if a == b else "odd"


def operator_norm(op) -> float:
    """Largest singular value, exploiting hermiticity and block sparsity."""
    if not isinstance(op, GradedOperator):
        m = np.asarray(op)
        if m.size == 0:
            return 0.0
        return float(np.linalg.svd(m, compute_uv=False)[0])
    if op.hermitian:
        w = op.eigenvalues()
        return float(np.abs(w).max(initial=0.0))
    if op.parity == "odd":
        blocks = (op.block("-", "+"), op.block("+", "-"))
    elif op.parity == "even":
        blocks = (op.block("+", "+"), op.block("-", "-"))
    else:
        blocks = (op.matrix,)
    best = 0.0
    for b in blocks:
        if b.size:
            best = max(best, float(np.linalg.svd(b, compute_uv=False)[0]))
    return best


def func_calc(f: Callable, op: GradedOperator, eps_eig: float = EPS_EIG) -> GradedOperator:
    """Apply a scalar function to a hermitian operator through its spectrum.

    The function must return finite real values on every eigenvalue; a nan,
    infinity, or genuinely complex value raises DomainError naming the
    offending eigenvalue.  Parity of the result follows from the parity of the
    operator and the symmetry of f on the spectrum (an even function of an odd
    operator is even).
    """
    dec = op.eig(eps_eig)
    w = dec.eigenvalues
    vals = np.asarray(f(w))
    if vals.shape != w.shape:
        vals = np.broadcast_to(vals, w.shape).copy()
    if np.iscomplexobj(vals):
        if np.abs(vals.imag).max(initial=0.0) > 1e-12 * max(1.0, np.abs(vals).max()):
            bad = int(np.argmax(np.abs(vals.imag)))
            raise DomainError(
                f"f({w[bad]!r}) = {vals[bad]!r} is not real"
            )
        vals = vals.real
    vals = vals.astype(float)
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmin(np.isfinite(vals)))
        raise DomainError(f"f({w[bad]!r}) = {vals[bad]!r} is not finite")

    out = (dec.vectors * vals) @ dec.vectors.conj().T
    out = _hermitize(out)

    expected = "none"
    if op.parity == "even":
        expected = "even"
    elif op.parity == "odd":
        scale = max(1.0, np.abs(vals).max(initial=0.0))
        even_f = np.abs(np.asarray(f(-w)) - vals).max(initial=0.0) <= 1e-12 * scale
        odd_f = np.abs(np.asarray(f(-w)) + vals).max(initial=0.0) <= 1e-12 * scale
        if even_f:
            expected = "even"
        elif odd_f:
            expected = "odd"
    return GradedOperator.snapped(out, op.space, expected, hermitian=True)


def lipschitz_derivative(d_op: GradedOperator, op: GradedOperator) -> GradedOperator:
    """Commutator [D, T] = D T - T D, the discrete derivative of T along D."""
    if d_op.space != op.space:
        raise ValueError("operators live on different graded spaces")
    m = d_op.matrix @ op.matrix - op.matrix @ d_op.matrix
    parity = _mul_parity(d_op.parity, op.parity)
    return GradedOperator(m, op.space, parity=parity, hermitian=False)


def bounded_transform(op: GradedOperator) -> GradedOperator:
    """x -> x / sqrt(1 + x^2) applied spectrally; strictly a contraction."""
    return func_calc(lambda x: x / np.sqrt(1.0 + x * x), op)


def sqrt_positive(op: GradedOperator, eps_psd: float = EPS_PSD) -> GradedOperator:
    """Spectral square root with clamping of small negative rounding noise.

    Eigenvalues below -eps_psd * ||T|| fail loudly; everything in the noise
    band [-eps_psd * ||T||, 0) is clamped to zero before the root.
    """
    dec = op.eig()
    w = dec.eigenvalues
    scale = np.abs(w).max(initial=0.0)
    lo = float(w.min())
    if lo < -eps_psd * max(scale, 1e-300):
        raise NegativityError(
            f"operator is not positive semidefinite: eigenvalue {lo:.6e} "
            f"below tolerance {-eps_psd * scale:.3e}"
        )
    vals = np.sqrt(np.maximum(w, 0.0))
    out = (dec.vectors * vals) @ dec.vectors.conj().T
    out = _hermitize(out)
    expected = "even" if op.parity == "even" else "none"
    return GradedOperator.snapped(out, op.space, expected, hermitian=True)


def gap(op: GradedOperator, eps_inv: float = EPS_INV) -> float:
    """Distance from the spectrum to zero; fails if the operator is not invertible."""
    w = op.eigenvalues()
    scale = np.abs(w).max(initial=0.0)
    g = float(np.abs(w).min())
    if g <= eps_inv * max(scale, 1e-300):
        raise NotInvertibleError(
            f"smallest |eigenvalue| {g:.3e} is within {eps_inv:.1e} * ||T|| of zero"
        )
    return g
