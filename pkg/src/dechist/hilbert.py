"""Finite-dimensional Hilbert-space primitives.

States (always stored as density matrices), unitaries, exhaustive projector
families, time schedules, tensor products, Heisenberg-picture conjugation and
seeded Haar sampling. Everything is dense complex double precision; dimensions
stay small (d <= ~64), so validation works on max-norm residuals against an
absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_ATOL",
    "ValidationError",
    "State",
    "Unitary",
    "ProjectorFamily",
    "Schedule",
    "max_abs",
    "make_state_pure",
    "make_state_mixed",
    "maximally_mixed",
    "validate_projector_family",
    "family_from_basis",
    "heisenberg_projector",
    "tensor",
    "haar_random_unitary",
    "haar_unitary",
    "random_pure_state",
    "random_mixed_state",
]

DEFAULT_ATOL = 1e-10


class ValidationError(ValueError):
    """Raised when a constructed object violates one of its defining equations.

    Collects one (name, residual) entry per violated invariant so callers see
    every failure at once, not just the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        parts = [f"{name} (residual {residual:.3e})" for name, residual in self.violations]
        super().__init__("; ".join(parts))


def max_abs(matrix) -> float:
    """Max-norm (largest absolute entry); the residual measure used throughout."""
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def _as_complex_matrix(m, name="matrix"):
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError([(f"{name} must be square, got shape {arr.shape}", 0.0)])
    return arr


def _freeze(arr):
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class State:
    """A density matrix, with the originating pure vector kept when available."""

    rho: np.ndarray
    vector: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def is_pure(self) -> bool:
        """True iff the state was constructed from a pure vector."""
        return self.vector is not None


def make_state_pure(vector, atol: float = DEFAULT_ATOL) -> State:
    """Promote a normalized complex vector to the density matrix |v><v|.

    The vector must already be normalized; nothing is silently rescaled.
    """
    v = np.asarray(vector, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValidationError([("zero vector", 0.0)])
    if abs(norm - 1.0) > atol:
        raise ValidationError([("vector not normalized", abs(norm - 1.0))])
    rho = np.outer(v, v.conj())
    return State(rho=_freeze(rho), vector=_freeze(v).reshape(-1))


def make_state_mixed(matrix, atol: float = DEFAULT_ATOL) -> State:
    """Wrap a Hermitian, PSD, unit-trace matrix as a State.

    Each violated requirement is reported with its own residual.
    """
    m = _as_complex_matrix(matrix, "state")
    violations = []
    herm = max_abs(m - m.conj().T)
    if herm > atol:
        violations.append(("not Hermitian", herm))
    trace_residual = abs(np.trace(m) - 1.0)
    if trace_residual > atol:
        violations.append(("trace != 1", float(trace_residual)))
    if herm <= atol:
        eigenvalues = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if eigenvalues[0] < -atol:
            violations.append(("not PSD", float(-eigenvalues[0])))
    if violations:
        raise ValidationError(violations)
    return State(rho=_freeze(m))


def maximally_mixed(dim: int) -> State:
    return State(rho=_freeze(np.eye(dim) / dim))


@dataclass(frozen=True, eq=False)
class Unitary:
    """A d x d unitary matrix, validated on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex_matrix(self.matrix, "unitary")
        residual = max_abs(m.conj().T @ m - np.eye(m.shape[0]))
        if residual > DEFAULT_ATOL:
            raise ValidationError([("not unitary", residual)])
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "Unitary":
        return cls(np.eye(dim, dtype=complex))


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """An exhaustive, exclusive set of orthogonal projectors at one time slot."""

    members: tuple
    labels: tuple

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.members[0].shape[0]


def validate_projector_family(matrices, labels=None, atol: float = DEFAULT_ATOL) -> ProjectorFamily:
    """Check completeness, Hermiticity, idempotence and mutual orthogonality.

    One distinct violation entry per failed equation, each carrying the
    max-norm residual of the worst offender.
    """
    mats = [_as_complex_matrix(m, "projector") for m in matrices]
    if not mats:
        raise ValidationError([("empty family", 0.0)])
    dim = mats[0].shape[0]
    if any(m.shape[0] != dim for m in mats):
        raise ValidationError([("mixed dimensions in family", 0.0)])
    violations = []
    herm = max(max_abs(m - m.conj().T) for m in mats)
    if herm > atol:
        violations.append(("Hermiticity violated", herm))
    idem = max(max_abs(m @ m - m) for m in mats)
    if idem > atol:
        violations.append(("idempotence violated", idem))
    completeness = max_abs(sum(mats) - np.eye(dim))
    if completeness > atol:
        violations.append(("completeness violated", completeness))
    ortho = 0.0
    for a in range(len(mats)):
        for b in range(len(mats)):
            if a != b:
                ortho = max(ortho, max_abs(mats[a] @ mats[b]))
    if ortho > atol:
        violations.append(("orthogonality violated", ortho))
    if violations:
        raise ValidationError(violations)
    if labels is None:
        labels = tuple(str(i) for i in range(len(mats)))
    return ProjectorFamily(members=tuple(_freeze(m) for m in mats), labels=tuple(labels))


def family_from_basis(basis, blocks, labels=None, atol: float = DEFAULT_ATOL) -> ProjectorFamily:
    """Group the columns of an orthonormal basis into outcome projectors.

    `blocks` lists the column indices belonging to each outcome; the grouping
    cannot fail the family equations, but the result is validated anyway.
    """
    b = _as_complex_matrix(basis, "basis")
    dim = b.shape[0]
    seen = [i for block in blocks for i in block]
    if sorted(seen) != list(range(dim)):
        raise ValidationError([("blocks must partition the basis columns", 0.0)])
    mats = []
    for block in blocks:
        cols = b[:, list(block)]
        mats.append(cols @ cols.conj().T)
    return validate_projector_family(mats, labels=labels, atol=atol)


def heisenberg_projector(projector, unitary) -> np.ndarray:
    """Conjugate a Schroedinger-picture projector into the Heisenberg picture: U† P U."""
    p = _as_complex_matrix(projector, "projector")
    u = unitary.matrix if isinstance(unitary, Unitary) else _as_complex_matrix(unitary, "unitary")
    if u.shape[0] != p.shape[0]:
        raise ValidationError([("dimension mismatch", 0.0)])
    return u.conj().T @ p @ u


def tensor(a, b) -> np.ndarray:
    """Kronecker product; composite index (i, j) -> i * dim_b + j."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def haar_unitary(dim: int, rng: np.random.Generator) -> Unitary:
    """Haar-distributed unitary from a given generator.

    QR of a complex Ginibre matrix with the R-diagonal phase fix that makes
    the factorization unique.
    """
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return Unitary(q * phases)


def haar_random_unitary(dim: int, seed: int) -> Unitary:
    """Seeded Haar-random unitary; bitwise deterministic in (dim, seed)."""
    return haar_unitary(dim, np.random.default_rng(seed))


def random_pure_state(dim: int, rng: np.random.Generator) -> State:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return make_state_pure(v)


def random_mixed_state(dim: int, rng: np.random.Generator) -> State:
    """Hilbert-Schmidt-random density matrix: normalized G G† for Gaussian G."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return make_state_mixed(rho)


@dataclass(frozen=True, eq=False)
class Schedule:
    """Time slots with per-slot evolution unitaries and projector families.

    `evolutions[k]` maps the Schroedinger picture to the Heisenberg picture at
    slot k, i.e. the slot's projectors enter histories as U† P U.
    """

    times: tuple
    evolutions: tuple
    families: tuple

    def __post_init__(self):
        n = len(self.times)
        if n < 1 or len(self.evolutions) != n or len(self.families) != n:
            raise ValidationError([("schedule lists must share one length >= 1", 0.0)])
        if list(self.times) != sorted(self.times):
            raise ValidationError([("times must be strictly increasing", 0.0)])
        dim = self.families[0].dim
        for u, fam in zip(self.evolutions, self.families):
            if u.dim != dim or fam.dim != dim:
                raise ValidationError([("dimension mismatch across slots", 0.0)])

    @property
    def n_slots(self) -> int:
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.families[0].dim

    @property
    def shape(self) -> tuple:
        """Family sizes per slot; the fine-grained history count is their product."""
        return tuple(f.size for f in self.families)

    @classmethod
    def from_hamiltonian(cls, hamiltonian, times, families) -> "Schedule":
        """Build the per-slot unitaries exp(-i H t_k) by exact eigendecomposition."""
        h = _as_complex_matrix(hamiltonian, "hamiltonian")
        residual = max_abs(h - h.conj().T)
        if residual > DEFAULT_ATOL:
            raise ValidationError([("hamiltonian not Hermitian", residual)])
        eigenvalues, eigenvectors = np.linalg.eigh(h)
        evolutions = tuple(
            Unitary(eigenvectors @ np.diag(np.exp(-1j * eigenvalues * t)) @ eigenvectors.conj().T)
            for t in times
        )
        return cls(times=tuple(times), evolutions=evolutions, families=tuple(families))
