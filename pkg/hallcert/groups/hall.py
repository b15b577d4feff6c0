"""Structural subgroups containing Hall pi-subgroups, and the existence criteria.

The containers are decomposition stabilizers (imprimitive and monomial
subgroups), subfield embeddings GL_k(q^a) <= GL_ka(q) and the split
GL_k(q^r) x GL_(r-1)(q). ``epi_condition`` decides whether a classical group
has a Hall pi-subgroup from arithmetic on q, n and pi alone.
"""

import logging
from dataclasses import dataclass, field as dc_field
from itertools import permutations, product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import (
    BudgetExceeded,
    DimensionTooSmall,
    EmptyPi,
    InvalidDecomposition,
    NoCandidateClause,
    PiContainsP,
    Singular,
    UnsupportedFamily,
)
from ..core.field import FieldSpec, e_value, field_for, make_field
from ..core.matrix import (
    CODE_DTYPE,
    Epsilon,
    FormKind,
    FormSpec,
    Matrix,
    annihilator,
    batch_conj,
    batch_encode,
    batch_matmul,
    det,
    diag,
    is_diagonal,
    matinv,
    quadratic_values,
    row_space,
)
from ..core.models import EpiVerdict, Family, GroupSpec
from .classical import all_vectors, group_order, standard_form_for, transvection_gens
from .engine import (
    CHUNK,
    ElementTable,
    SubgroupHandle,
    pi_part,
    prime_divisors,
    subgroup_closure,
)

logger = logging.getLogger(__name__)

# Largest vector space scanned when searching an adapted orthogonal basis.
MAX_SCAN_VECTORS = 4_000_000


# ---------------------------------------------------------------------------
# Decompositions

@dataclass(frozen=True, eq=False)
class Decomposition:
    """V = V_1 + ... + V_k + W, each subspace given by a reduced row basis.

    A stabilizing element permutes the parts V_i and maps W onto itself.
    """

    parts: Tuple[np.ndarray, ...]
    tail: Optional[np.ndarray] = None
    orthogonal: bool = False

    def __post_init__(self):
        if not self.parts:
            raise InvalidDecomposition("a decomposition needs at least one part")

    @property
    def n(self) -> int:
        return self.parts[0].shape[1]

    @property
    def dims(self) -> List[int]:
        return [p.shape[0] for p in self.parts]

    def to_dict(self) -> Dict[str, object]:
        return {
            "parts": [p.astype(int).tolist() for p in self.parts],
            "tail": self.tail.astype(int).tolist() if self.tail is not None else None,
            "orthogonal": self.orthogonal,
        }

    def validate(self, field: FieldSpec, form: Optional[FormSpec] = None) -> None:
        """Raise InvalidDecomposition unless the parts and tail form a (orthogonal) direct sum."""
        blocks = list(self.parts) + ([self.tail] if self.tail is not None and len(self.tail) else [])
        for b in blocks:
            if len(row_space(field, b)) != b.shape[0]:
                raise InvalidDecomposition("a part basis is linearly dependent")
        stacked = np.concatenate(blocks)
        if stacked.shape[0] != self.n or len(row_space(field, stacked)) != self.n:
            raise InvalidDecomposition("parts and tail do not form a direct sum of V")
        if not self.orthogonal or form is None or form.kind == FormKind.LINEAR:
            return
        for i, a in enumerate(blocks):
            if det(Matrix(field, _pairing(form, a, a))).code == 0:
                raise InvalidDecomposition(f"part {i} is degenerate")
            for j in range(i + 1, len(blocks)):
                if _pairing(form, a, blocks[j]).any():
                    raise InvalidDecomposition(f"parts {i} and {j} are not orthogonal")


def _pairing(form: FormSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of form values B(a_i, b_j)."""
    right = b.T
    if form.kind == FormKind.HERMITIAN:
        right = batch_conj(form.field, right)
    return batch_matmul(form.field, batch_matmul(form.field, a, form.gram), right)


def coordinate_decomposition(n: int, sizes: Sequence[int], tail: int = 0, orthogonal: bool = False) -> Decomposition:
    """Consecutive coordinate blocks of the given sizes, then a tail of ``tail`` coordinates."""
    eye = np.eye(n, dtype=CODE_DTYPE)
    parts, pos = [], 0
    for s in sizes:
        parts.append(eye[pos : pos + s])
        pos += s
    tail_basis = eye[pos : pos + tail] if tail else None
    if pos + tail != n:
        raise InvalidDecomposition(f"blocks {list(sizes)} + tail {tail} do not add up to {n}")
    return Decomposition(tuple(parts), tail_basis, orthogonal)


def sylow_plane_type(field: FieldSpec) -> Epsilon:
    """Type of the orthogonal planes whose torus holds a Sylow 2-subgroup: + for q = 1 mod 4, else -."""
    return Epsilon.PLUS if field.order % 4 == 1 else Epsilon.MINUS


def decompW(n: int, form: Optional[FormSpec] = None) -> Decomposition:
    """Two-dimensional blocks with a tail of dimension 0, 1 or 2.

    Without a quadratic form the blocks are coordinate pairs. For orthogonal
    groups every block is a plane of :func:`sylow_plane_type`, and a
    two-dimensional tail is a plane of the other type. Sums of x^2 and
    hyperbolic pairs already have such planes on coordinate pairs; otherwise
    an orthogonal basis of typed planes is searched.
    """
    orthogonal = form is not None and form.kind != FormKind.LINEAR
    if form is None or form.kind != FormKind.QUADRATIC or n % 2:
        return coordinate_decomposition(n, [2] * (n // 2), n % 2, orthogonal)
    eta = sylow_plane_type(form.field)
    k = n // 2
    planes = k if (eta == Epsilon.PLUS or k % 2 == 0) == (form.epsilon == Epsilon.PLUS) else k - 1
    if eta == Epsilon.PLUS:
        return coordinate_decomposition(n, [2] * planes, n - 2 * planes, True)
    basis = typed_plane_basis(form, eta, planes).entries
    parts = tuple(basis[2 * i : 2 * i + 2] for i in range(planes))
    tail = basis[2 * planes :] if 2 * planes < n else None
    return Decomposition(parts, tail, orthogonal=True)


def planes_and_lines_decomposition(n: int, basis: np.ndarray) -> Decomposition:
    """Four planes, three lines and (n = 12) a fixed line, in the given basis rows."""
    if n not in (11, 12):
        raise InvalidDecomposition(f"the plane/line decomposition needs n in (11, 12), got {n}")
    parts = [basis[2 * i : 2 * i + 2] for i in range(4)] + [basis[8 + i : 9 + i] for i in range(3)]
    tail = basis[11:12] if n == 12 else None
    return Decomposition(tuple(parts), tail, orthogonal=True)


def decomposition_stabilizer(G: ElementTable, D: Decomposition) -> SubgroupHandle:
    """All g in G permuting the parts of D and fixing its tail."""
    if D.n != G.n:
        raise InvalidDecomposition(f"decomposition of dimension {D.n} for a group of degree {G.n}")
    field = G.field
    D.validate(field, G.form if D.orthogonal else None)
    parts = [row_space(field, p) for p in D.parts]
    anns = [annihilator(field, p) for p in parts]
    tail_ann = annihilator(field, D.tail) if D.tail is not None and len(D.tail) else None

    keep = np.zeros(G.order, dtype=bool)
    for s in range(0, G.order, CHUNK):
        block = G.elements[s : s + CHUNK]
        ok = np.ones(len(block), dtype=bool)
        if tail_ann is not None:
            image = batch_matmul(field, D.tail[None], block)
            ok &= ~batch_matmul(field, image, tail_ann).any(axis=(1, 2))
        for i, part in enumerate(parts):
            image = batch_matmul(field, part[None], block)
            lands = np.zeros(len(block), dtype=bool)
            for j, other in enumerate(parts):
                if other.shape[0] == part.shape[0]:
                    lands |= ~batch_matmul(field, image, anns[j]).any(axis=(1, 2))
            ok &= lands
        keep[s : s + CHUNK] = ok
    H = SubgroupHandle(G, np.nonzero(keep)[0])
    logger.debug(f"stabilizer of {D.dims}+{0 if D.tail is None else len(D.tail)} in {G!r}: {H.order}")
    return H


def monomial_subgroup(G: ElementTable) -> SubgroupHandle:
    """Stabilizer of the coordinate lines (orthonormal lines for unitary groups)."""
    family = G.spec.family if G.spec is not None else None
    if family not in (Family.GL, Family.SL, Family.GU, Family.SU):
        raise UnsupportedFamily(f"monomial subgroups are built for GL/SL/GU/SU, not {family}")
    orthogonal = family.is_unitary
    return decomposition_stabilizer(G, coordinate_decomposition(G.n, [1] * G.n, 0, orthogonal))


def is_monomial(a: np.ndarray) -> np.ndarray:
    """Vectorised test: exactly one nonzero entry in every row and column."""
    nz = a != 0
    return np.all(nz.sum(axis=-1) == 1, axis=-1) & np.all(nz.sum(axis=-2) == 1, axis=-1)


# ---------------------------------------------------------------------------
# Subfield embeddings

@dataclass(frozen=True)
class SubfieldEmbedding:
    """F_{q^a} as a-dimensional F_q-space with basis gamma^0, ..., gamma^(a-1)."""

    base: FieldSpec
    big: FieldSpec
    a: int
    mult: np.ndarray  # (|big|, a, a): regular representation of each element

    def blow_up(self, m: np.ndarray) -> np.ndarray:
        """Replace each entry of a k x k matrix over F_{q^a} by its a x a block."""
        k = m.shape[0]
        a = self.a
        out = np.zeros((k * a, k * a), dtype=CODE_DTYPE)
        for i in range(k):
            for j in range(k):
                out[i * a : (i + 1) * a, j * a : (j + 1) * a] = self.mult[int(m[i, j])]
        return out


def _embed_base(base: FieldSpec, big: FieldSpec) -> np.ndarray:
    """Codes in ``big`` of the elements of ``base``, via a root of base's modulus."""
    tb = big.tables
    if base.f == 1:
        return np.arange(base.p, dtype=np.int64)
    for beta in range(big.order):
        acc = 0
        for c in reversed(base.modulus):
            acc = tb.add[tb.mul[acc, beta], c]
        if acc == 0:
            break
    else:
        raise ValueError(f"{base.modulus} has no root in {big}")
    images = np.zeros(base.order, dtype=np.int64)
    for code in range(base.order):
        coeffs = [(code // base.p**i) % base.p for i in range(base.f)]
        acc = 0
        for c in reversed(coeffs):
            acc = tb.add[tb.mul[acc, beta], c]
        images[code] = acc
    return images


def subfield_structure(q: int, a: int) -> SubfieldEmbedding:
    base = field_for(q)
    big = make_field(base.p, base.f * a)
    tb = big.tables
    emb = _embed_base(base, big)
    gamma = tb.primitive
    powers = [tb.power(gamma, j) for j in range(a)]
    coords = np.zeros((big.order, a), dtype=CODE_DTYPE)
    for tup in product(range(base.order), repeat=a):
        acc = 0
        for j, c in enumerate(tup):
            acc = tb.add[acc, tb.mul[emb[c], powers[j]]]
        coords[acc] = tup
    mult = np.zeros((big.order, a, a), dtype=CODE_DTYPE)
    for c in range(big.order):
        for j in range(a):
            mult[c, j] = coords[tb.mul[powers[j], c]]
    return SubfieldEmbedding(base, big, a, mult)


def _general_linear_gens(field: FieldSpec, k: int) -> List[Matrix]:
    return transvection_gens(field, k) + [diag(field, [field.tables.primitive] + [1] * (k - 1))]


def _pad(field: FieldSpec, block: np.ndarray, n: int, offset: int = 0) -> Matrix:
    out = np.eye(n, dtype=CODE_DTYPE)
    k = block.shape[0]
    out[offset : offset + k, offset : offset + k] = block
    return Matrix(field, out)


def _nontrivial(gens: List[Matrix]) -> List[Matrix]:
    return [g for g in gens if not np.array_equal(g.entries, np.eye(g.n, dtype=CODE_DTYPE))]


def subfield_embedding(n: int, q: int, a: int) -> List[Matrix]:
    """Generators of GL_[n/a](q^a) acting on F_q^([n/a] a), padded by the identity to degree n."""
    if a < 1 or n // a < 1:
        raise DimensionTooSmall(f"cannot embed GL_[{n}/{a}](q^{a}) in dimension {n}")
    base = field_for(q)
    if a == 1:
        return _nontrivial(_general_linear_gens(base, n))
    emb = subfield_structure(q, a)
    k = n // a
    return _nontrivial([_pad(base, emb.blow_up(g.entries), n) for g in _general_linear_gens(emb.big, k)])


def split_construction_BC(n: int, q: int, r: int) -> Tuple[List[Matrix], List[Matrix]]:
    """GL_[n/r](q^r) on the first [n/r] r coordinates and GL_(r-1)(q) on the next ones.

    The second block is cut to the coordinates that remain, and is empty when
    none do.
    """
    if n < r:
        raise DimensionTooSmall(f"n = {n} is smaller than r = {r}")
    base = field_for(q)
    first = subfield_embedding(n, q, r)
    used = (n // r) * r
    rest = min(r - 1, n - used)
    second: List[Matrix] = []
    if rest:
        second = _nontrivial([_pad(base, g.entries, n, used) for g in _general_linear_gens(base, rest)])
    return first, second


# ---------------------------------------------------------------------------
# Existence criteria

def _hat_spec(spec: GroupSpec) -> GroupSpec:
    return spec.model_copy(update={"family": spec.family.hat})


def _det_one_spec(spec: GroupSpec) -> GroupSpec:
    family = {Family.GL: Family.SL, Family.GU: Family.SU, Family.GSp: Family.Sp, Family.GO: Family.SO}
    return spec.model_copy(update={"family": family[spec.family.hat]})


def _all(values) -> bool:
    return all(values)


def epi_condition(spec: GroupSpec, pi: Sequence[int]) -> EpiVerdict:
    """Whether the general group of ``spec`` has a Hall pi-subgroup.

    Clauses are evaluated in order and the first that holds is reported.
    a = e(r, q) for the least prime r of pi meeting |G|, b = the common
    e(s, q) over the remaining primes s.
    """
    if spec.family == Family.USER:
        raise UnsupportedFamily("existence criteria apply to classical families only")
    pi = sorted(set(int(r) for r in pi))
    if not pi:
        raise EmptyPi("pi must contain at least one prime")
    p = field_for(spec.q).p
    if p in pi:
        raise PiContainsP(f"pi contains the characteristic {p}")

    hat = _hat_spec(spec)
    q, n = spec.q, spec.n
    order = group_order(hat)
    pi_g = prime_divisors(order)
    meet = [r for r in pi if r in pi_g]
    base = dict(group=hat, pi=pi, pi_of_group=pi_g)

    if not meet:
        return EpiVerdict(exists=True, case_label="trivial", **base)
    if len(meet) == 1:
        return EpiVerdict(exists=True, case_label="Sylow", r=meet[0], **base)

    if 2 in pi:
        if 3 in pi:
            return EpiVerdict(
                exists=None, case_label="no criterion (2, 3 in pi)", r=2, tau=meet[1:], **base
            )
        e2 = e_value(2, q)
        pi_g0 = prime_divisors(group_order(_det_one_spec(spec)))
        needed = sorted(set(pi) & set(pi_g0))
        torus = prime_divisors(q - 1 if e2 == 1 else q + 1)
        holds = set(needed) <= set(torus)
        label = f"parity e(2,q)={e2}: pi cap pi(G0) in pi(q{'-' if e2 == 1 else '+'}1)"
        return EpiVerdict(exists=holds, case_label=label, r=2, tau=meet[1:], a=e2, **base)

    r, tau = meet[0], meet[1:]
    a = e_value(r, q)
    bs = sorted({e_value(s, q) for s in tau})
    params = dict(r=r, tau=tau, a=a, **base)
    family = hat.family.value
    if len(bs) > 1:
        return EpiVerdict(exists=False, case_label=f"{family}: tau not e-homogeneous", **params)
    b = bs[0]
    params["b"] = b

    if hat.family == Family.GSp:
        m = n // 2
        if a == b and a % 2 == 0 and _all(2 * m < b * s for s in tau):
            return EpiVerdict(exists=True, case_label="GSp-(A)", **params)
        if a == b and a % 2 == 1 and _all(m < b * s for s in tau):
            return EpiVerdict(exists=True, case_label="GSp-(B)", **params)
        return EpiVerdict(exists=False, case_label="GSp: no clause", **params)

    if hat.family == Family.GO and hat.epsilon.value == "circ":
        return EpiVerdict(exists=None, case_label="GO odd dimension: no criterion", **params)

    if not _all(n < b * s for s in tau):
        return EpiVerdict(exists=False, case_label=f"{family}: n >= b*s", **params)

    if hat.family == Family.GL:
        return _epi_linear(spec, n, q, r, tau, a, b, params)
    if hat.family == Family.GU:
        return _epi_unitary(n, q, r, tau, a, b, params)
    return _epi_orthogonal(hat, n, tau, a, b, params)


def _epi_linear(spec, n, q, r, tau, a, b, params) -> EpiVerdict:
    r_part = pi_part(q ** (r - 1) - 1, [r])
    floor_eq = n // (r - 1) == n // r
    if a == b:
        return EpiVerdict(exists=True, case_label="GL-(A)", **params)
    if a == r - 1 and b == r and r_part == r and floor_eq:
        return EpiVerdict(exists=True, case_label="GL-(B)", **params)
    f = field_for(q).f
    for t in tau:
        if (
            a == r - 1
            and b == t
            and pi_part(q ** (t - 1) - 1, [r]) == r
            and n // (r - 1) == n // r + 1
            and n % r == (f - 1) % r
        ):
            note = "GL-(C) evaluated with f read as the field degree of q"
            logger.warning(note)
            return EpiVerdict(exists=True, case_label="GL-(C)", notes=[note], **params)
    if a == r - 1 and b == 1 and r_part == r and floor_eq:
        return EpiVerdict(exists=True, case_label="GL-(D)", **params)
    return EpiVerdict(exists=False, case_label="GL: no clause", **params)


def _epi_unitary(n, q, r, tau, a, b, params) -> EpiVerdict:
    if a == b and a % 4 == 0:
        return EpiVerdict(exists=True, case_label="GU-(A)", **params)
    if a == b and a % 4 == 2 and _all(2 * n < b * s for s in tau):
        return EpiVerdict(exists=True, case_label="GU-(B)", **params)
    if a == b and a % 2 == 1:
        return EpiVerdict(exists=True, case_label="GU-(C)", **params)

    half = (r - 1) // 2
    floor_eq = n // (r - 1) == n // r
    floor_next = n // (r - 1) == n // r + 1 and n % r == r - 1
    small = _all(n < 2 * s for s in tau)
    clauses = [
        ("D", r % 4 == 1 and a == r - 1 and b == 2 * r and floor_eq),
        ("E", r % 4 == 3 and a == half and b == 2 * r and floor_eq),
        ("F", r % 4 == 1 and a == r - 1 and b == 2 * r and floor_next),
        ("G", r % 4 == 3 and a == half and b == 2 * r and floor_next),
        ("H", r % 4 == 1 and a == r - 1 and b == 2 and small and floor_eq),
        ("I", r % 4 == 3 and a == half and b == 2 and small and floor_eq),
    ]
    printed = pi_part(q**n - 1, [r]) == r
    alternative = pi_part(q ** (r - 1) - 1, [r]) == r
    alternatives = {f"GU-({name}) with (q^(r-1)-1)_r = r": ok and alternative for name, ok in clauses}
    for name, ok in clauses:
        if ok and printed:
            return EpiVerdict(exists=True, case_label=f"GU-({name})", alternatives=alternatives, **params)
    if any(alternatives.values()):
        logger.warning(f"GU verdict differs under the (q^(r-1)-1)_r reading: {alternatives}")
    return EpiVerdict(exists=False, case_label="GU: no clause", alternatives=alternatives, **params)


def _epi_orthogonal(hat, n, tau, a, b, params) -> EpiVerdict:
    plus = hat.epsilon.value == "+"
    clauses = [
        ("A", plus and a == b and a % 2 == 0 and _all(n < b * s for s in tau)),
        ("B", plus and a == b and a % 2 == 1 and _all(n < 2 * b * s for s in tau)),
        ("C", not plus and a == b and a % 2 == 0 and _all(n < b * s for s in tau)),
        ("D", not plus and a == b and a % 2 == 1 and _all(n < b * s for s in tau)),
        ("E", not plus and a % 2 == 1 and b == 2 * a and n == 4 * a),
        ("F", not plus and b % 2 == 1 and a == 2 * b and n == 4 * b),
    ]
    for name, ok in clauses:
        if ok:
            return EpiVerdict(exists=True, case_label=f"GO-({name})", **params)
    return EpiVerdict(exists=False, case_label="GO: no clause", **params)


# ---------------------------------------------------------------------------
# Candidate containers

@dataclass
class HallCandidate:
    """A structural subgroup expected to contain a Hall pi-subgroup."""

    provenance: str
    decomposition: Optional[Decomposition] = None
    generators: List[Matrix] = dc_field(default_factory=list)
    container: Optional[SubgroupHandle] = None

    def realize(self, G: ElementTable) -> Optional[SubgroupHandle]:
        """The container as a subgroup of G, or None if its generators are not in G."""
        if self.container is not None and self.container.parent is G:
            return self.container
        if self.decomposition is not None:
            self.container = decomposition_stabilizer(G, self.decomposition)
            return self.container
        codes = batch_encode(G.field, np.stack([g.entries for g in self.generators]))
        ids = G.lookup(codes)
        if np.any(ids < 0):
            logger.debug(f"{self.provenance}: generators outside {G!r}")
            return None
        self.container = subgroup_closure(G, [int(i) for i in ids])
        return self.container


def hall_candidates(spec: GroupSpec, pi: Sequence[int], verdict: Optional[EpiVerdict] = None) -> List[HallCandidate]:
    """Structural containers for a Hall pi-subgroup of the group ``spec``, most specific first."""
    verdict = verdict or epi_condition(spec, pi)
    form = standard_form_for(spec)
    n, q = spec.n, spec.q
    family = spec.family.hat
    linear = family == Family.GL
    out: List[HallCandidate] = []

    def add_decomposition(label: str, D: Decomposition) -> None:
        try:
            D.validate(form.field, form if D.orthogonal else None)
        except InvalidDecomposition as e:
            logger.debug(f"{label} skipped: {e}")
            return
        out.append(HallCandidate(provenance=label, decomposition=D))

    def add_monomial(label: str) -> None:
        if family in (Family.GL, Family.GU):
            add_decomposition(label, coordinate_decomposition(n, [1] * n, 0, family == Family.GU))

    def add_generators(label: str, build) -> None:
        try:
            gens = build()
        except (BudgetExceeded, DimensionTooSmall) as e:
            logger.debug(f"{label} skipped: {e}")
            return
        if gens:
            out.append(HallCandidate(provenance=label, generators=gens))

    if verdict.r == 2 or 2 in verdict.pi:
        try:
            add_decomposition("decompW stabilizer", decompW(n, form))
        except (BudgetExceeded, InvalidDecomposition) as e:
            logger.debug(f"decompW stabilizer skipped: {e}")
        if 3 in verdict.pi:
            add_monomial("monomial (dim V_i = 1)")
            if family == Family.GO and n in (11, 12):
                basis = adapted_orthogonal_basis(form, _planes_and_lines_constrained(n)).entries
                add_decomposition("planes and lines stabilizer", planes_and_lines_decomposition(n, basis))
        else:
            add_monomial("monomial")
        return out

    a = verdict.a
    if a is None and verdict.r is not None:
        a = e_value(verdict.r, q)
    label = verdict.case_label
    monomial_first = label in ("GL-(D)", "GU-(D)", "GU-(E)", "GU-(F)", "GU-(G)", "GU-(H)", "GU-(I)")
    if a is not None:
        if monomial_first:
            add_monomial(f"monomial, case {label}")
        if linear and label in ("GL-(B)", "GL-(C)"):
            add_generators(
                f"GL_[n/r](q^r) x GL_(r-1)(q), case {label}",
                lambda: sum(split_construction_BC(n, q, verdict.r), []),
            )
        k = n // a
        if k >= 1 and a > 1:
            tail = n - k * a
            add_decomposition(
                f"blocks of dimension {a}", coordinate_decomposition(n, [a] * k, tail, not linear)
            )
        if linear and a > 1:
            add_generators(f"GL_[n/a](q^a) with a = {a}", lambda: subfield_embedding(n, q, a))
        if not monomial_first:
            add_monomial("monomial")
    return out


def _planes_and_lines_constrained(n: int) -> List[int]:
    """0-based positions sharing one Q-value: v1, v3, v5, v7 and the lines v9, v10, v11 (v12)."""
    return [0, 2, 4, 6, 8, 9, 10] + ([11] if n == 12 else [])


def hall_candidate(spec: GroupSpec, pi: Sequence[int]) -> HallCandidate:
    """The first structural container for ``spec`` and pi."""
    verdict = epi_condition(spec, pi)
    if verdict.exists is False:
        raise NoCandidateClause(f"{spec.label} has no Hall {verdict.pi}-subgroup ({verdict.case_label})")
    candidates = hall_candidates(spec, pi, verdict)
    if not candidates:
        raise NoCandidateClause(f"no structural container for {spec.label}, pi = {verdict.pi}")
    return candidates[0]


def candidate_subgroups(G: ElementTable, pi: Sequence[int]) -> Iterator[Tuple[SubgroupHandle, str]]:
    """Realize the structural containers of G's family inside G.

    A container whose pi-part falls short of |G|_pi cannot hold a Hall
    pi-subgroup and is dropped with a warning.
    """
    if G.spec is None:
        return
    try:
        candidates = hall_candidates(G.spec, pi)
    except (NoCandidateClause, UnsupportedFamily) as e:
        logger.info(f"no structural candidates for {G!r}: {e}")
        return
    target = pi_part(G.order, pi)
    for cand in candidates:
        H = cand.realize(G)
        if H is None:
            continue
        if pi_part(H.order, pi) != target:
            logger.warning(f"{cand.provenance} in {G!r}: pi-part {pi_part(H.order, pi)}, need {target}")
            continue
        yield H, cand.provenance


# ---------------------------------------------------------------------------
# Adapted bases

def adapted_orthogonal_basis(form: FormSpec, constrained: Sequence[int], value: int = 1) -> Matrix:
    """An orthogonal basis (as rows) with Q = ``value`` at the constrained positions.

    Positions are 0-based. Constrained vectors are chosen first, then the
    free ones, each time the least-index vector orthogonal to those chosen.
    """
    order = list(constrained) + [i for i in range(form.n) if i not in constrained]

    def wanted(pos: int, chosen: np.ndarray, qvals: np.ndarray) -> np.ndarray:
        return qvals == value if pos in constrained else qvals != 0

    return _greedy_orthogonal_basis(form, order, wanted)


def typed_plane_basis(form: FormSpec, plane_type: Epsilon, planes: int) -> Matrix:
    """An orthogonal basis whose rows (2i, 2i+1), i < ``planes``, span planes of ``plane_type``.

    The plane <u, v> with u, v orthogonal has type + exactly when -Q(u)Q(v)
    is a square. The rows after the planes are anisotropic vectors of the
    complement.
    """
    t = form.field.tables
    squares = np.array([t.is_square(c) for c in range(form.field.order)], dtype=bool)
    plus = plane_type == Epsilon.PLUS

    def wanted(pos: int, chosen: np.ndarray, qvals: np.ndarray) -> np.ndarray:
        mask = qvals != 0
        if pos % 2 and pos < 2 * planes:
            disc = t.mul[int(t.neg[chosen[pos - 1]]), qvals]
            mask &= squares[disc] == plus
        return mask

    return _greedy_orthogonal_basis(form, range(form.n), wanted)


def _greedy_orthogonal_basis(form: FormSpec, order: Sequence[int], wanted) -> Matrix:
    """Fill the basis positions in ``order``, each with the least-index vector orthogonal to
    those chosen and allowed by ``wanted(pos, chosen Q-values, all Q-values)``."""
    field = form.field
    n = form.n
    if field.order**n > MAX_SCAN_VECTORS:
        raise BudgetExceeded(f"{field.order}^{n} vectors exceed the basis search budget")
    vectors = all_vectors(field, n)
    qvals = quadratic_values(form, vectors)
    polar = batch_matmul(field, vectors, form.gram)
    alive = np.ones(len(vectors), dtype=bool)
    alive[0] = False
    basis = np.zeros((n, n), dtype=CODE_DTYPE)
    chosen = np.zeros(n, dtype=CODE_DTYPE)
    t = field.tables
    for pos in order:
        idx = np.nonzero(alive & wanted(pos, chosen, qvals))[0]
        if not len(idx):
            raise InvalidDecomposition(f"no vector with the required Q-value for position {pos}")
        v = vectors[idx[0]]
        basis[pos] = v
        chosen[pos] = qvals[idx[0]]
        # keep vectors orthogonal to v: polar(w) . v == 0
        dots = t.mul[polar, v[None, :]]
        acc = dots[:, 0]
        for k in range(1, n):
            acc = t.add[acc, dots[:, k]]
        alive &= acc == 0
    return Matrix(field, basis)


# ---------------------------------------------------------------------------
# Checks

@dataclass(frozen=True)
class InthomResult:
    """H cap A against the pi-part of A, and HA/A against the pi-part of G/A."""

    intersection_order: int
    a_pi_part: int
    hall_in_a: bool
    quotient_order: int
    quotient_pi_part: int
    hall_in_quotient: bool


def inthom_check(G: ElementTable, A: SubgroupHandle, H: SubgroupHandle, pi: Sequence[int]) -> InthomResult:
    """For normal A and a Hall pi-subgroup H of G: is H cap A Hall in A, and HA/A Hall in G/A?"""
    inter = np.intersect1d(H.members, A.members, assume_unique=True)
    a_part = pi_part(A.order, pi)
    image = H.order // len(inter)
    quotient = G.order // A.order
    q_part = pi_part(quotient, pi)
    return InthomResult(
        intersection_order=len(inter),
        a_pi_part=a_part,
        hall_in_a=len(inter) == a_part,
        quotient_order=quotient,
        quotient_pi_part=q_part,
        hall_in_quotient=image == q_part,
    )


@dataclass(frozen=True)
class CirculantReport:
    """H cap H^x for the monomial group H of GL_n(q) and x = I + C."""

    n: int
    q: int
    monomial_order: int
    intersection_order: int
    scalar_count: int
    diagonal_count: int
    contains_cycle: bool
    central: bool


def circulant_matrix(field: FieldSpec, n: int) -> Matrix:
    """1 on the diagonal and superdiagonal and in the (n, 1) corner."""
    m = np.eye(n, dtype=CODE_DTYPE)
    m[np.arange(n), (np.arange(n) + 1) % n] = 1
    return Matrix(field, m)


def monomial_elements(field: FieldSpec, n: int) -> np.ndarray:
    """All monomial matrices of GL_n(q), as a (n! (q-1)^n, n, n) code array."""
    units = np.arange(1, field.order, dtype=CODE_DTYPE)
    diags = np.array(list(product(units, repeat=n)), dtype=CODE_DTYPE)
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    out = np.zeros((len(perms), len(diags), n, n), dtype=CODE_DTYPE)
    rows = np.arange(n)
    for k, perm in enumerate(perms):
        out[k][:, rows, perm] = diags
    return out.reshape(-1, n, n)


def circulant_intersection(n: int, q: int) -> CirculantReport:
    """Intersect the monomial subgroup of GL_n(q) with its conjugate by I + C, without enumerating GL_n(q)."""
    field = field_for(q)
    x = circulant_matrix(field, n)
    if det(x).code == 0:
        raise Singular(f"I + C is singular over {field}")
    x_inv = matinv(x)
    mono = monomial_elements(field, n)
    keep = np.zeros(len(mono), dtype=bool)
    for s in range(0, len(mono), CHUNK):
        block = mono[s : s + CHUNK]
        conj = batch_matmul(field, batch_matmul(field, x.entries, block), x_inv.entries)
        keep[s : s + CHUNK] = is_monomial(conj)
    inter = mono[keep]
    diagonal = np.array([is_diagonal(m) for m in inter], dtype=bool)
    scalar = np.array([is_diagonal(m) and len(set(np.diag(m).tolist())) == 1 for m in inter], dtype=bool)
    cycle = np.zeros((n, n), dtype=CODE_DTYPE)
    cycle[np.arange(n), (np.arange(n) + 1) % n] = 1
    contains_cycle = bool(np.any(np.all(inter == cycle, axis=(1, 2))))
    report = CirculantReport(
        n=n,
        q=q,
        monomial_order=len(mono),
        intersection_order=len(inter),
        scalar_count=int(scalar.sum()),
        diagonal_count=int(diagonal.sum()),
        contains_cycle=contains_cycle,
        central=bool(scalar.all()),
    )
    logger.info(f"circulant check GL_{n}({q}): {report}")
    return report
