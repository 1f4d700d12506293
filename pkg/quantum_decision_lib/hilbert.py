"""
Dense complex linear algebra for small Hilbert spaces (dimension 2 to 8).

States, Hermitian operators, projectors, projection valued measures,
Born probabilities, expectations, commutators, common eigenbases,
superposition and interference.
"""
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple
import logging

import numpy as np
import scipy.linalg

from .exceptions import (
    DimensionMismatch,
    InvalidOperator,
    NonHermitianDrift,
    NotCommuting,
    OutOfRange,
    ZeroVector,
)

logger = logging.getLogger(__name__)

ComplexScalar = complex

MIN_DIMENSION = 2
MAX_DIMENSION = 8

CONSTRUCTOR_TOL = 1e-12
IDENTITY_TOL = 1e-10
EIGEN_TOL = 1e-8
ZERO_NORM = 1e-14
DEGENERACY_TOL = 1e-9


def _check_dimension(n: int) -> None:
    if not MIN_DIMENSION <= n <= MAX_DIMENSION:
        raise DimensionMismatch(
            f"dimension {n} outside supported range "
            f"[{MIN_DIMENSION}, {MAX_DIMENSION}]"
        )


def _as_vector(raw) -> np.ndarray:
    vec = np.array(raw, dtype=complex).reshape(-1)
    _check_dimension(vec.shape[0])
    if not np.all(np.isfinite(vec)):
        raise OutOfRange(f"non-finite amplitude in {vec}")
    return vec


def _as_matrix(raw) -> np.ndarray:
    mat = np.array(raw, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"expected square matrix, got {mat.shape}")
    _check_dimension(mat.shape[0])
    if not np.all(np.isfinite(mat)):
        raise InvalidOperator("non-finite matrix entry")
    return mat


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _same_dimension(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionMismatch(f"dimensions differ: {dims}")


def interleave(values: np.ndarray) -> List[float]:
    """Flatten complex values to [re0, im0, re1, im1, ...]."""
    flat = np.asarray(values, dtype=complex).reshape(-1)
    return [float(x) for z in flat for x in (z.real, z.imag)]


def deinterleave(values: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`interleave`."""
    arr = np.asarray(values, dtype=float)
    if arr.size % 2:
        raise DimensionMismatch("interleaved array has odd length")
    return arr[0::2] + 1j * arr[1::2]


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Unit-norm complex amplitude vector.
    """
    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_vector(self.amplitudes)
        norm_sq = float(np.vdot(vec, vec).real)
        if abs(norm_sq - 1.0) > CONSTRUCTOR_TOL:
            raise InvalidOperator(
                f"state norm^2 {norm_sq!r} differs from 1 "
                f"by more than {CONSTRUCTOR_TOL}"
            )
        object.__setattr__(self, "amplitudes", _frozen(vec))

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    def weights(self) -> np.ndarray:
        """Squared moduli of the amplitudes."""
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        _same_dimension(self.dimension, other.dimension)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def allclose(self, other: "StateVector", atol: float = IDENTITY_TOL) -> bool:
        return self.dimension == other.dimension and bool(
            np.allclose(self.amplitudes, other.amplitudes, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """
    Self-adjoint matrix.

    Entries are checked against their conjugate transpose within
    CONSTRUCTOR_TOL and then stored exactly symmetrized.
    """
    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_matrix(self.matrix)
        drift = np.max(np.abs(mat - mat.conj().T))
        if drift > CONSTRUCTOR_TOL:
            raise InvalidOperator(
                f"matrix is not Hermitian: max |A - A^dagger| = {drift:.3e}"
            )
        object.__setattr__(
            self, "matrix", _frozen((mat + mat.conj().T) / 2)
        )

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @classmethod
    def identity(cls, n: int) -> "HermitianOperator":
        return cls(np.eye(n, dtype=complex))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        return scipy.linalg.eigh(self.matrix, eigvals_only=True)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _same_dimension(self.dimension, other.dimension)
        return HermitianOperator(self.matrix + other.matrix)

    def scaled(self, factor: float) -> "HermitianOperator":
        return HermitianOperator(float(factor) * self.matrix)


@dataclass(frozen=True, eq=False)
class Projector:
    """
    Orthogonal projector of declared rank.
    """
    operator: HermitianOperator
    rank: int

    def __post_init__(self):
        mat = self.operator.matrix
        idem = np.max(np.abs(mat @ mat - mat))
        if idem > IDENTITY_TOL:
            raise InvalidOperator(f"projector not idempotent ({idem:.3e})")
        trace = float(np.trace(mat).real)
        if abs(trace - self.rank) > IDENTITY_TOL:
            raise InvalidOperator(
                f"projector trace {trace:.12g} does not match rank {self.rank}"
            )

    @classmethod
    def onto(cls, vectors: Sequence[Sequence[complex]]) -> "Projector":
        """Projector onto the span of the given vectors.

        Args:
            vectors: spanning vectors, need not be orthonormal

        Returns:
            Projector: the orthogonal projector onto their span
        """
        columns = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
        q = scipy.linalg.orth(columns)
        if q.shape[1] == 0:
            raise ZeroVector("cannot project onto the zero subspace")
        return cls(HermitianOperator(q @ q.conj().T), q.shape[1])

    @classmethod
    def basis_state(cls, n: int, index: int) -> "Projector":
        mat = np.zeros((n, n), dtype=complex)
        mat[index, index] = 1.0
        return cls(HermitianOperator(mat), 1)

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @property
    def dimension(self) -> int:
        return self.operator.dimension

    def complement(self) -> "Projector":
        n = self.dimension
        return Projector(
            HermitianOperator(np.eye(n) - self.matrix), n - self.rank
        )


@dataclass(frozen=True, eq=False)
class PVM:
    """
    Projection valued measure: labeled projectors, pairwise orthogonal,
    summing to the identity.
    """
    labels: Tuple[str, ...]
    projectors: Tuple[Projector, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        projectors = tuple(self.projectors)
        if len(labels) != len(projectors) or not projectors:
            raise InvalidOperator("PVM needs one label per projector")
        if len(set(labels)) != len(labels):
            raise InvalidOperator(f"duplicate PVM labels: {labels}")
        _same_dimension(*(p.dimension for p in projectors))
        n = projectors[0].dimension
        for i, pa in enumerate(projectors):
            for pb in projectors[i + 1:]:
                overlap = np.max(np.abs(pa.matrix @ pb.matrix))
                if overlap > IDENTITY_TOL:
                    raise InvalidOperator(
                        f"PVM projectors not orthogonal ({overlap:.3e})"
                    )
        total = sum(p.matrix for p in projectors)
        gap = np.max(np.abs(total - np.eye(n)))
        if gap > IDENTITY_TOL:
            raise InvalidOperator(f"PVM incomplete: |sum P - I| = {gap:.3e}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "projectors", projectors)

    @classmethod
    def canonical(cls, labels: Sequence[str]) -> "PVM":
        n = len(labels)
        return cls(
            tuple(labels),
            tuple(Projector.basis_state(n, k) for k in range(n)),
        )

    @classmethod
    def from_basis(
        cls, basis: np.ndarray, labels: Sequence[str],
    ) -> "PVM":
        """Rank-1 PVM from the columns of an orthonormal basis."""
        basis = np.asarray(basis, dtype=complex)
        projectors = tuple(
            Projector(HermitianOperator(np.outer(col, col.conj())), 1)
            for col in basis.T
        )
        return cls(tuple(labels), projectors)

    @classmethod
    def binary(
        cls, projector: Projector, labels: Tuple[str, str] = ("in", "out"),
    ) -> "PVM":
        """Two-outcome PVM {P, I - P}."""
        return cls(tuple(labels), (projector, projector.complement()))

    @property
    def dimension(self) -> int:
        return self.projectors[0].dimension

    def __iter__(self) -> Iterator[Tuple[str, Projector]]:
        return iter(zip(self.labels, self.projectors))

    def __getitem__(self, label: str) -> Projector:
        return self.projectors[self.labels.index(label)]


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """
    Unitary matrix, used to move states under a cognitive context.
    """
    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_matrix(self.matrix)
        gap = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if gap > IDENTITY_TOL:
            raise InvalidOperator(f"matrix is not unitary ({gap:.3e})")
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def from_generator(cls, generator: HermitianOperator) -> "UnitaryOperator":
        """exp(iH) for Hermitian H."""
        return cls(scipy.linalg.expm(1j * generator.matrix))

    @classmethod
    def identity(cls, n: int) -> "UnitaryOperator":
        return cls(np.eye(n, dtype=complex))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, state: StateVector) -> StateVector:
        _same_dimension(self.dimension, state.dimension)
        return normalize(self.matrix @ state.amplitudes)

    def conjugate(self, op: HermitianOperator) -> HermitianOperator:
        """U A U^dagger."""
        _same_dimension(self.dimension, op.dimension)
        return HermitianOperator(self.matrix @ op.matrix @ self.matrix.conj().T)


@dataclass(frozen=True, eq=False)
class CommonEigenbasis:
    """
    Orthonormal basis of joint eigenvectors with their eigenvalue pairs.
    Column k of ``vectors`` has eigenvalues (eigenvalues_a[k], eigenvalues_b[k]).
    """
    vectors: np.ndarray
    eigenvalues_a: np.ndarray
    eigenvalues_b: np.ndarray

    def reconstruction_error(
        self, op: HermitianOperator, eigenvalues: np.ndarray,
    ) -> float:
        rebuilt = (self.vectors * eigenvalues) @ self.vectors.conj().T
        return float(np.linalg.norm(op.matrix - rebuilt))


def normalize(raw) -> StateVector:
    """Scale a raw complex vector to unit norm.

    Args:
        raw: complex amplitudes of dimension 2 to 8

    Returns:
        StateVector: raw / ||raw||
    """
    vec = _as_vector(raw)
    norm = float(np.linalg.norm(vec))
    if norm <= ZERO_NORM:
        raise ZeroVector(f"cannot normalize vector of norm {norm:.3e}")
    return StateVector(vec / norm)


def _born(state: StateVector, matrix: np.ndarray) -> float:
    p = float(np.vdot(state.amplitudes, matrix @ state.amplitudes).real)
    if p < -CONSTRUCTOR_TOL or p > 1.0 + CONSTRUCTOR_TOL:
        raise InvalidOperator(f"Born probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def born_probabilities(state: StateVector, pvm: PVM) -> Dict[str, float]:
    """Born rule <v|P_c|v> for every outcome c of the measurement.

    Args:
        state: the state |v>
        pvm: the measurement

    Returns:
        Outcome label -> probability, in PVM label order
    """
    _same_dimension(state.dimension, pvm.dimension)
    return {label: _born(state, p.matrix) for label, p in pvm}


def expectation(state: StateVector, op: HermitianOperator) -> float:
    """Real expectation value <v|A|v>."""
    _same_dimension(state.dimension, op.dimension)
    value = complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    if abs(value.imag) >= IDENTITY_TOL:
        raise NonHermitianDrift(
            f"expectation has imaginary part {value.imag:.3e}"
        )
    return value.real


def commutator_norm(a: HermitianOperator, b: HermitianOperator) -> float:
    """Frobenius norm of AB - BA."""
    _same_dimension(a.dimension, b.dimension)
    return float(np.linalg.norm(a.matrix @ b.matrix - b.matrix @ a.matrix))


def _degenerate_blocks(values: np.ndarray) -> List[List[int]]:
    scale = max(1.0, float(np.max(np.abs(values))))
    blocks = [[0]]
    for k in range(1, len(values)):
        if values[k] - values[blocks[-1][-1]] <= DEGENERACY_TOL * scale:
            blocks[-1].append(k)
        else:
            blocks.append([k])
    return blocks


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    # first component above roundoff made real positive
    for z in vec:
        if abs(z) > CONSTRUCTOR_TOL:
            return vec * (abs(z) / z)
    return vec


def _amplitude_key(vec: np.ndarray) -> tuple:
    rounded = np.round(vec, 10)
    return tuple(x for z in rounded for x in (z.real, z.imag))


def _canonical_span(vectors: np.ndarray) -> List[np.ndarray]:
    """Basis of span(vectors) that depends on the subspace only.

    Columns of the subspace projector are orthogonalized greedily, largest
    residual first, then phase-fixed and sorted by amplitude.
    """
    proj = vectors @ vectors.conj().T
    basis: List[np.ndarray] = []
    for _ in range(vectors.shape[1]):
        residual = proj - sum(
            (np.outer(b, b.conj()) for b in basis), np.zeros_like(proj)
        ) @ proj
        norms = np.linalg.norm(residual, axis=0)
        col = residual[:, int(np.argmax(norms))]
        basis.append(col / np.linalg.norm(col))
    return sorted((_fix_phase(v) for v in basis), key=_amplitude_key)


def common_eigenbasis(
    a: HermitianOperator,
    b: HermitianOperator,
    tol: float = IDENTITY_TOL,
) -> CommonEigenbasis:
    """Joint eigenbasis of two commuting Hermitian operators.

    Eigenvectors of A are grouped into degenerate blocks; inside each block
    B is diagonalized on the restricted subspace. Columns are ordered by
    A-eigenvalue then B-eigenvalue, ascending, each with its first
    significant component real positive. Where both operators are
    degenerate the subspace basis is rebuilt from its projector and ordered
    lexicographically by amplitude, so it does not depend on the solver.

    Args:
        a: first operator
        b: second operator
        tol: maximum admitted commutator Frobenius norm

    Returns:
        CommonEigenbasis with reconstruction error at most EIGEN_TOL

    Raises:
        NotCommuting: if ||[A, B]|| exceeds tol or the joint basis does
            not reconstruct both operators
    """
    gap = commutator_norm(a, b)
    if gap > tol:
        raise NotCommuting(f"commutator norm {gap:.3e} exceeds {tol:.3e}")

    vals_a, vecs_a = scipy.linalg.eigh(a.matrix)
    columns, lam_a, lam_b = [], [], []
    for block in _degenerate_blocks(vals_a):
        q = vecs_a[:, block]
        restricted = q.conj().T @ b.matrix @ q
        restricted = (restricted + restricted.conj().T) / 2
        vals_b, inner = scipy.linalg.eigh(restricted)
        joint = q @ inner
        block_value = float(np.mean(vals_a[block]))
        for tie in _degenerate_blocks(vals_b):
            if len(tie) == 1:
                vectors = [_fix_phase(joint[:, tie[0]])]
            else:
                vectors = _canonical_span(joint[:, tie])
            tie_value = float(np.mean(vals_b[tie]))
            for v in vectors:
                columns.append(v)
                lam_a.append(block_value)
                lam_b.append(tie_value)

    basis = CommonEigenbasis(
        vectors=np.column_stack(columns),
        eigenvalues_a=np.array(lam_a),
        eigenvalues_b=np.array(lam_b),
    )
    for op, lam in ((a, basis.eigenvalues_a), (b, basis.eigenvalues_b)):
        err = basis.reconstruction_error(op, lam)
        if err > EIGEN_TOL:
            raise NotCommuting(
                f"joint eigenbasis reconstruction error {err:.3e}"
            )
    logger.debug(f"Common eigenbasis found, commutator norm {gap:.3e}")
    return basis


def superpose(
    a: ComplexScalar, w1: StateVector, b: ComplexScalar, w2: StateVector,
) -> StateVector:
    """Normalized a|w1> + b|w2>."""
    _same_dimension(w1.dimension, w2.dimension)
    return normalize(complex(a) * w1.amplitudes + complex(b) * w2.amplitudes)


def interference_terms(
    a: ComplexScalar,
    w1: StateVector,
    b: ComplexScalar,
    w2: StateVector,
    pvm: PVM,
) -> Dict[str, float]:
    """Cross terms 2 Re(conj(a) b <w1|P_c|w2>) per outcome.

    Before renormalization the superposed probability of outcome c is
    |a|^2 p_c(w1) + |b|^2 p_c(w2) + I_c.
    """
    _same_dimension(w1.dimension, w2.dimension, pvm.dimension)
    coeff = np.conj(complex(a)) * complex(b)
    return {
        label: float(2.0 * (coeff * np.vdot(
            w1.amplitudes, p.matrix @ w2.amplitudes
        )).real)
        for label, p in pvm
    }


def random_state(
    n: int, rng: np.random.Generator, real: bool = False,
) -> StateVector:
    """Haar-like random state from Gaussian amplitudes."""
    raw = rng.normal(size=n)
    if not real:
        raw = raw + 1j * rng.normal(size=n)
    return normalize(raw)


def random_unitary(
    n: int, rng: np.random.Generator, real: bool = False,
) -> UnitaryOperator:
    """Random unitary (orthogonal when real) via QR of a Gaussian matrix."""
    raw = rng.normal(size=(n, n))
    if not real:
        raw = raw + 1j * rng.normal(size=(n, n))
    q, r = scipy.linalg.qr(raw)
    phases = np.diag(r) / np.abs(np.diag(r))
    return UnitaryOperator(q * phases)


def hermitian_from_params(
    params: Sequence[float], n: int, real: bool = False,
) -> HermitianOperator:
    """Hermitian generator from n^2 real parameters (n(n-1)/2 when real).

    Real case yields i times a real antisymmetric matrix, so that
    exp(iH) is a real rotation.
    """
    params = np.asarray(params, dtype=float)
    mat = np.zeros((n, n), dtype=complex)
    upper = [(j, k) for j in range(n) for k in range(j + 1, n)]
    if real:
        if params.size != len(upper):
            raise DimensionMismatch(
                f"expected {len(upper)} generator parameters, got {params.size}"
            )
        for x, (j, k) in zip(params, upper):
            mat[j, k] = -1j * x
            mat[k, j] = 1j * x
        return HermitianOperator(mat)
    if params.size != n * n:
        raise DimensionMismatch(
            f"expected {n * n} generator parameters, got {params.size}"
        )
    mat[np.diag_indices(n)] = params[:n]
    rest = params[n:]
    for idx, (j, k) in enumerate(upper):
        z = rest[2 * idx] + 1j * rest[2 * idx + 1]
        mat[j, k] = z
        mat[k, j] = np.conj(z)
    return HermitianOperator(mat)


def operator_from_eigensystem(
    basis: np.ndarray, eigenvalues: Sequence[float],
) -> HermitianOperator:
    """Sum of lambda_k |q_k><q_k| over the basis columns."""
    basis = np.asarray(basis, dtype=complex)
    lam = np.asarray(eigenvalues, dtype=float)
    if basis.shape[1] != lam.size:
        raise DimensionMismatch(
            f"{basis.shape[1]} basis vectors for {lam.size} eigenvalues"
        )
    return HermitianOperator((basis * lam) @ basis.conj().T)
