"""Matrices over finite fields, classical forms and permutation matrices.

Matrices act on row vectors: ``v -> v @ g``. Every routine works on arrays
of element codes (see :mod:`hallcert.core.field`); the batched variants
accept stacks of shape ``(..., n, n)`` so the group engine can push whole
frontiers through one call.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy.combinatorics import Permutation

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    EvenCharacteristicOrthogonal,
    FieldMismatch,
    InconsistentTypeParameters,
    Singular,
)
from .field import FieldSpec, Fq, nonsquare

logger = logging.getLogger(__name__)

CODE_DTYPE = np.uint16
_INT64_LIMIT = 2**63


@dataclass(frozen=True, eq=False)
class Matrix:
    """A square matrix over one FieldSpec, stored as element codes."""

    field: FieldSpec
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=CODE_DTYPE)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got shape {arr.shape}")
        if arr.size and int(arr.max()) >= self.field.order:
            raise FieldMismatch(f"entry codes out of range for {self.field}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def entry(self, i: int, j: int) -> Fq:
        return self.field.from_code(int(self.entries[i, j]))

    def to_list(self) -> List[List[int]]:
        return self.entries.astype(int).tolist()

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return matmul(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.field, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"Matrix({self.to_list()} over {self.field})"


def from_ints(field: FieldSpec, rows: Sequence[Sequence[int]]) -> Matrix:
    """Matrix whose entries are images of integers (so -1 maps to p-1)."""
    return Matrix(field, np.array([[field.embed_int(x) for x in row] for row in rows]))


def from_codes(field: FieldSpec, rows: Sequence[Sequence[int]]) -> Matrix:
    return Matrix(field, np.array(rows))


def identity(field: FieldSpec, n: int) -> Matrix:
    return Matrix(field, np.eye(n, dtype=CODE_DTYPE))


def diag(field: FieldSpec, codes: Sequence[int]) -> Matrix:
    return Matrix(field, np.diag(np.array(codes, dtype=CODE_DTYPE)))


def scalar(field: FieldSpec, n: int, code: int) -> Matrix:
    return diag(field, [code] * n)


# ---------------------------------------------------------------------------
# Batched arithmetic on code arrays

def batch_matmul(field: FieldSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of (stacks of) code matrices, broadcasting leading axes."""
    if field.f == 1:
        prod = np.matmul(a.astype(np.int64), b.astype(np.int64)) % field.p
        return prod.astype(CODE_DTYPE)
    t = field.tables
    terms = t.mul[a[..., :, :, None], b[..., None, :, :]]
    acc = terms[..., :, 0, :]
    for k in range(1, terms.shape[-2]):
        acc = t.add[acc, terms[..., :, k, :]]
    return acc


def batch_conj(field: FieldSpec, a: np.ndarray) -> np.ndarray:
    """Entrywise a -> a^q for a matrix over F_{q^2}."""
    conj = field.tables.conj
    if conj is None:
        raise FieldMismatch(f"{field} has no quadratic subfield")
    return conj[a]


def batch_scale(field: FieldSpec, code: int, a: np.ndarray) -> np.ndarray:
    return field.tables.mul[code, a]


def encoding_weights(field: FieldSpec, n: int) -> np.ndarray:
    """Weights of the canonical int64 encoding sum(entry_k * q^k)."""
    if field.order ** (n * n) >= _INT64_LIMIT:
        raise BudgetExceeded(
            f"{n}x{n} matrices over {field} do not fit the int64 element encoding"
        )
    return np.array([field.order**k for k in range(n * n)], dtype=np.int64)


def batch_encode(field: FieldSpec, a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    flat = a.reshape(a.shape[:-2] + (n * n,)).astype(np.int64)
    return flat @ encoding_weights(field, n)


def batch_decode(field: FieldSpec, n: int, codes: np.ndarray) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    digits = (codes[..., None] // encoding_weights(field, n)) % field.order
    return digits.reshape(codes.shape + (n, n)).astype(CODE_DTYPE)


# ---------------------------------------------------------------------------
# Single-matrix operations

def _check_pair(a: Matrix, b: Matrix) -> None:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    if a.n != b.n:
        raise DimensionMismatch(f"{a.n}x{a.n} vs {b.n}x{b.n}")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    _check_pair(a, b)
    return Matrix(a.field, batch_matmul(a.field, a.entries, b.entries))


def _eliminate(field: FieldSpec, rows: np.ndarray, reduce_above: bool) -> Tuple[np.ndarray, List[int], int, int]:
    """Row-reduce a code array.

    Returns the reduced array, the pivot columns, the number of row swaps
    and the product of the pivots (before normalisation).
    """
    t = field.tables
    m = rows.astype(CODE_DTYPE).copy()
    n_rows, n_cols = m.shape
    pivots: List[int] = []
    swaps = 0
    pivot_product = 1
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nonzero = np.nonzero(m[r:, c])[0]
        if not len(nonzero):
            continue
        s = r + int(nonzero[0])
        if s != r:
            m[[r, s]] = m[[s, r]]
            swaps += 1
        pv = int(m[r, c])
        pivot_product = int(t.mul[pivot_product, pv])
        m[r] = t.mul[int(t.inv[pv]), m[r]]
        others = np.arange(n_rows) if reduce_above else np.arange(r + 1, n_rows)
        others = others[(others != r) & (m[others, c] != 0)]
        if len(others):
            factors = t.neg[m[others, c]]
            m[others] = t.add[m[others], t.mul[factors[:, None], m[r][None, :]]]
        pivots.append(c)
        r += 1
    return m, pivots, swaps, pivot_product


def det(a: Matrix) -> Fq:
    field = a.field
    _, pivots, swaps, pivot_product = _eliminate(field, a.entries, reduce_above=False)
    if len(pivots) < a.n:
        return field.zero()
    if swaps % 2:
        pivot_product = int(field.tables.neg[pivot_product])
    return field.from_code(pivot_product)


def matinv(a: Matrix) -> Matrix:
    field = a.field
    n = a.n
    aug = np.concatenate([a.entries, np.eye(n, dtype=CODE_DTYPE)], axis=1)
    reduced, pivots, _, _ = _eliminate(field, aug, reduce_above=True)
    if pivots[:n] != list(range(n)):
        raise Singular("matrix is not invertible")
    return Matrix(field, reduced[:, n:])


def transpose(a: Matrix) -> Matrix:
    return Matrix(a.field, a.entries.T)


def is_diagonal(a: Union[Matrix, np.ndarray]) -> bool:
    arr = a.entries if isinstance(a, Matrix) else a
    return not np.any(arr[~np.eye(arr.shape[-1], dtype=bool)])


# ---------------------------------------------------------------------------
# Subspaces, as canonical row-reduced bases

def row_space(field: FieldSpec, rows: np.ndarray) -> np.ndarray:
    """Reduced row echelon basis of the span of ``rows`` (zero rows dropped)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=CODE_DTYPE))
    if rows.shape[0] == 0:
        return rows
    reduced, pivots, _, _ = _eliminate(field, rows, reduce_above=True)
    return reduced[: len(pivots)]


def annihilator(field: FieldSpec, basis: np.ndarray) -> np.ndarray:
    """Columns spanning {w : basis @ w = 0}, as an (n, n - k) code array."""
    basis = row_space(field, basis)
    k, n = basis.shape
    if k == 0:
        return np.eye(n, dtype=CODE_DTYPE)
    reduced, pivots, _, _ = _eliminate(field, basis, reduce_above=True)
    free = [c for c in range(n) if c not in pivots]
    t = field.tables
    out = np.zeros((n, len(free)), dtype=CODE_DTYPE)
    for j, fc in enumerate(free):
        out[fc, j] = 1
        for i, pc in enumerate(pivots):
            out[pc, j] = t.neg[reduced[i, fc]]
    return out


def subspace_image(field: FieldSpec, basis: np.ndarray, g: np.ndarray) -> np.ndarray:
    return row_space(field, batch_matmul(field, basis, g))


# ---------------------------------------------------------------------------
# Classical forms

class FormKind(str, Enum):
    """Kind of form a classical group preserves."""

    LINEAR = "linear"
    SYMPLECTIC = "symplectic"
    HERMITIAN = "hermitian"
    QUADRATIC = "quadratic"


class Epsilon(str, Enum):
    """Witt type of a quadratic form."""

    PLUS = "+"
    MINUS = "-"
    CIRC = "circ"


@dataclass(frozen=True, eq=False)
class FormSpec:
    """A sesquilinear or quadratic form in a fixed basis.

    For the quadratic kind ``gram`` is the polarisation f(u, v) =
    Q(u+v) - Q(u) - Q(v), so Q(v) = f(v, v) / 2 in odd characteristic.
    """

    kind: FormKind
    field: FieldSpec
    n: int
    gram: np.ndarray
    epsilon: Optional[Epsilon] = None
    qvec: Optional[np.ndarray] = None
    basis_convention: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "epsilon": self.epsilon.value if self.epsilon else None,
            "n": self.n,
            "field": self.field.model_dump(mode="json"),
            "gram": self.gram.astype(int).tolist(),
            "qvec": self.qvec.astype(int).tolist() if self.qvec is not None else None,
            "basis_convention": self.basis_convention,
        }


def _blocks(n_blocks: int, block: np.ndarray, tail: Optional[np.ndarray] = None) -> np.ndarray:
    parts = [block] * n_blocks + ([tail] if tail is not None else [])
    size = sum(p.shape[0] for p in parts)
    out = np.zeros((size, size), dtype=CODE_DTYPE)
    pos = 0
    for p in parts:
        k = p.shape[0]
        out[pos : pos + k, pos : pos + k] = p
        pos += k
    return out


def standard_form(
    kind: Union[FormKind, str],
    epsilon: Optional[Union[Epsilon, str]],
    n: int,
    field: FieldSpec,
) -> FormSpec:
    """The canonical form for a classical group of the given kind.

    Symplectic forms use the basis e1, f1, e2, f2, ... with (e_i, f_i) = 1.
    Hermitian forms use an orthonormal basis over F_{q^2}. Quadratic forms
    are sum x_i^2 (odd dimension), hyperbolic planes x_{2i-1} x_{2i} (plus
    type) or hyperbolic planes followed by x^2 - nu y^2 with nu the least
    non-square (minus type).
    """
    kind = FormKind(kind)
    epsilon = Epsilon(epsilon) if epsilon else None
    p = field.p

    if kind == FormKind.LINEAR:
        return FormSpec(kind, field, n, np.eye(n, dtype=CODE_DTYPE), basis_convention="none")

    if kind == FormKind.SYMPLECTIC:
        if n % 2:
            raise InconsistentTypeParameters(f"symplectic forms need even dimension, got {n}")
        block = np.array([[0, 1], [p - 1, 0]])
        return FormSpec(kind, field, n, _blocks(n // 2, block), basis_convention="e1,f1,e2,f2")

    if kind == FormKind.HERMITIAN:
        if field.f % 2:
            raise InconsistentTypeParameters(f"hermitian forms live over F_(q^2), got {field}")
        return FormSpec(kind, field, n, np.eye(n, dtype=CODE_DTYPE), basis_convention="orthonormal")

    if p == 2:
        raise EvenCharacteristicOrthogonal(f"orthogonal groups need odd q, got {field}")
    if epsilon is None:
        epsilon = Epsilon.CIRC if n % 2 else None
    if epsilon is None or (epsilon == Epsilon.CIRC) != (n % 2 == 1):
        raise InconsistentTypeParameters(f"epsilon {epsilon} does not fit dimension {n}")

    t = field.tables
    two = field.embed_int(2)
    if epsilon == Epsilon.CIRC:
        gram = np.diag(np.full(n, two, dtype=CODE_DTYPE))
        qvec = np.ones(n, dtype=CODE_DTYPE)
        convention = "sum x_i^2"
    else:
        hyper = np.array([[0, 1], [1, 0]])
        if epsilon == Epsilon.PLUS:
            gram = _blocks(n // 2, hyper)
            qvec = np.zeros(n, dtype=CODE_DTYPE)
            convention = "hyperbolic pairs"
        else:
            nu = nonsquare(field)
            minus_nu = int(t.neg[nu])
            aniso = np.array([[two, 0], [0, int(t.mul[two, minus_nu])]])
            gram = _blocks(n // 2 - 1, hyper, aniso)
            qvec = np.zeros(n, dtype=CODE_DTYPE)
            qvec[-2:] = [1, minus_nu]
            convention = "hyperbolic pairs + x^2 - nu y^2"
    return FormSpec(kind, field, n, gram.astype(CODE_DTYPE), epsilon, qvec, convention)


def quadratic_values(form: FormSpec, vectors: np.ndarray) -> np.ndarray:
    """Q(v) for each row v, from Q(v) = f(v, v) / 2."""
    field = form.field
    t = field.tables
    fv = batch_matmul(field, vectors[:, None, :], form.gram)[:, 0, :]
    prod = t.mul[fv, vectors]
    acc = prod[:, 0]
    for k in range(1, prod.shape[1]):
        acc = t.add[acc, prod[:, k]]
    half = int(t.inv[field.embed_int(2)])
    return t.mul[half, acc]


def form_type(form_or_gram: Union[FormSpec, np.ndarray], field: Optional[FieldSpec] = None) -> Epsilon:
    """Witt type of an even-dimensional quadratic form from its discriminant."""
    if isinstance(form_or_gram, FormSpec):
        field, gram = form_or_gram.field, form_or_gram.gram
    else:
        gram = form_or_gram
    n = gram.shape[0]
    if n % 2:
        return Epsilon.CIRC
    d = det(Matrix(field, gram)).code
    if (n // 2) % 2:
        d = int(field.tables.neg[d])
    return Epsilon.PLUS if field.tables.is_square(d) else Epsilon.MINUS


def gram_transform(form: FormSpec, g: np.ndarray) -> np.ndarray:
    """g G g^T (g G conj(g)^T for hermitian forms), batched over g."""
    field = form.field
    right = np.swapaxes(g, -1, -2)
    if form.kind == FormKind.HERMITIAN:
        right = batch_conj(field, right)
    return batch_matmul(field, batch_matmul(field, g, form.gram), right)


def form_multiplier(g: Matrix, form: FormSpec) -> Optional[Fq]:
    """Multiplier λ with B(ug, vg) = λ B(u, v), or None when g is no similitude."""
    if g.n != form.n:
        raise DimensionMismatch(f"matrix of size {g.n} against a form of dimension {form.n}")
    if g.field != form.field:
        raise FieldMismatch(f"{g.field} vs {form.field}")
    field = form.field
    if form.kind == FormKind.LINEAR:
        return field.one()
    if form.kind == FormKind.QUADRATIC:
        code = _quadratic_multiplier(form, g.entries)
    else:
        code = _sesquilinear_multiplier(form, g.entries)
    return None if code is None else field.from_code(code)


def _ratio(field: FieldSpec, new: np.ndarray, old: np.ndarray) -> Optional[int]:
    t = field.tables
    nz = np.nonzero(old)[0]
    if not len(nz):
        return None
    i = int(nz[0])
    lam = int(t.mul[int(new[i]), int(t.inv[int(old[i])])])
    if lam == 0 or not np.array_equal(t.mul[lam, old], new):
        return None
    return lam


def _sesquilinear_multiplier(form: FormSpec, g: np.ndarray) -> Optional[int]:
    image = gram_transform(form, g)
    return _ratio(form.field, image.ravel(), form.gram.ravel())


def _quadratic_multiplier(form: FormSpec, g: np.ndarray) -> Optional[int]:
    n = form.n
    eye = np.eye(n, dtype=CODE_DTYPE)
    sums = [form.field.tables.add[eye[i], eye[j]] for i, j in combinations(range(n), 2)]
    vectors = np.concatenate([eye, np.array(sums, dtype=CODE_DTYPE).reshape(-1, n)])
    before = quadratic_values(form, vectors)
    after = quadratic_values(form, batch_matmul(form.field, vectors, g))
    return _ratio(form.field, after, before)


# ---------------------------------------------------------------------------
# Permutation matrices

PermLike = Union[Permutation, Sequence[int]]


def as_permutation(sigma: PermLike, n: Optional[int] = None) -> Permutation:
    """Accept a sympy Permutation or a 0-based image list."""
    if isinstance(sigma, Permutation):
        return sigma if n is None or sigma.size == n else Permutation(sigma.array_form, size=n)
    return Permutation(list(sigma), size=n)


def perm_from_cycles(cycles: Iterable[Sequence[int]], n: int) -> Permutation:
    """Permutation of {1..n} given by 1-based cycles, e.g. [(1, 3, 5, 9), (7, 10)]."""
    return Permutation([[c - 1 for c in cyc] for cyc in cycles], size=n)


def perm_matrix(sigma: PermLike, field: FieldSpec, n: Optional[int] = None) -> Matrix:
    """Row i carries a 1 in column sigma(i), so e_i @ P = e_sigma(i)."""
    perm = as_permutation(sigma, n)
    size = perm.size
    out = np.zeros((size, size), dtype=CODE_DTYPE)
    out[np.arange(size), perm.array_form] = 1
    return Matrix(field, out)


def signed_perm_witness(sigma: PermLike, field: FieldSpec, n: Optional[int] = None) -> Matrix:
    """PermMat(sigma) @ diag(sgn(sigma), 1, ..., 1); always of determinant 1."""
    perm = as_permutation(sigma, n)
    pm = perm_matrix(perm, field)
    sign = diag(field, [field.embed_int(perm.signature())] + [1] * (perm.size - 1))
    return matmul(pm, sign)
