"""Standard generators and order formulas for the classical families.

GL and SL get explicit generators (adjacent transvections plus a diagonal
matrix). The form-preserving families are built by completion: start from a
few seed elements and append reflections or transvections, scanned in vector
index order, until the closure reaches the order given by the formula. The
resulting generator list is deterministic for a given (family, n, q).
"""

import logging
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence

import numpy as np

from ..core.context import DEFAULT_CAP
from ..core.errors import BudgetExceeded, InconsistentTypeParameters, UnsupportedFamily
from ..core.field import FieldSpec
from ..core.matrix import (
    CODE_DTYPE,
    FormKind,
    FormSpec,
    Matrix,
    diag,
    identity,
    quadratic_values,
    standard_form,
)
from ..core.models import Family, GroupSpec
from .engine import ElementTable, SubgroupHandle, closure

logger = logging.getLogger(__name__)

_FORM_KINDS = {
    Family.GL: FormKind.LINEAR,
    Family.SL: FormKind.LINEAR,
    Family.GU: FormKind.HERMITIAN,
    Family.SU: FormKind.HERMITIAN,
    Family.GSp: FormKind.SYMPLECTIC,
    Family.Sp: FormKind.SYMPLECTIC,
    Family.GO: FormKind.QUADRATIC,
    Family.O: FormKind.QUADRATIC,
    Family.SO: FormKind.QUADRATIC,
}


def _prod(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def group_order(spec: GroupSpec) -> int:
    """|G| from the classical order polynomials."""
    n, q, family = spec.n, spec.q, spec.family
    if family in (Family.GL, Family.SL):
        order = q ** (n * (n - 1) // 2) * _prod(q**i - 1 for i in range(1, n + 1))
        return order if family == Family.GL else order // (q - 1)
    if family in (Family.GU, Family.SU):
        order = q ** (n * (n - 1) // 2) * _prod(q**i - (-1) ** i for i in range(1, n + 1))
        return order if family == Family.GU else order // (q + 1)
    if family in (Family.GSp, Family.Sp):
        if n % 2:
            raise InconsistentTypeParameters(f"symplectic groups need even dimension, got {n}")
        m = n // 2
        order = q ** (m * m) * _prod(q ** (2 * i) - 1 for i in range(1, m + 1))
        return order * (q - 1) if family == Family.GSp else order
    if family.is_orthogonal:
        if q % 2 == 0:
            raise UnsupportedFamily(f"orthogonal groups in even characteristic are not supported (q={q})")
        m = n // 2
        if n % 2:
            isometries = 2 * q ** (m * m) * _prod(q ** (2 * i) - 1 for i in range(1, m + 1))
            similitudes = isometries * (q - 1) // 2
        else:
            sign = 1 if spec.epsilon.value == "+" else -1
            isometries = (
                2 * q ** (m * (m - 1)) * (q**m - sign) * _prod(q ** (2 * i) - 1 for i in range(1, m))
            )
            similitudes = isometries * (q - 1)
        if family == Family.O:
            return isometries
        if family == Family.SO:
            return isometries // 2
        return similitudes
    raise UnsupportedFamily(f"no order formula for family {family.value}")


def standard_form_for(spec: GroupSpec) -> FormSpec:
    """The form the family preserves, in the package's standard basis."""
    if spec.family == Family.USER:
        raise UnsupportedFamily("user groups carry no standard form")
    kind = _FORM_KINDS[spec.family]
    epsilon = spec.epsilon if kind == FormKind.QUADRATIC else None
    return standard_form(kind, epsilon, spec.n, spec.field())


def all_vectors(field: FieldSpec, n: int) -> np.ndarray:
    """Every vector of F^n as a (q^n, n) code array; row k has digits of k, first coordinate lowest."""
    q = field.order
    idx = np.arange(q**n, dtype=np.int64)
    return ((idx[:, None] // q ** np.arange(n, dtype=np.int64)) % q).astype(CODE_DTYPE)


def _vector_stream(field: FieldSpec, n: int) -> Iterator[np.ndarray]:
    q = field.order
    for k in range(1, q**n):
        yield np.array([(k // q**i) % q for i in range(n)], dtype=CODE_DTYPE)


def rank_one_update(form: FormSpec, v: np.ndarray, c: int) -> Matrix:
    """I + c (G v*^T) v, where v* is conj(v) for hermitian forms and v otherwise.

    With c chosen suitably this is a transvection, a reflection or a
    quasi-reflection centred on v.
    """
    field = form.field
    t = field.tables
    w = t.conj[v] if form.kind == FormKind.HERMITIAN else v
    gram = form.gram.astype(np.int64)
    col = np.zeros(form.n, dtype=CODE_DTYPE)
    for k in range(form.n):
        col = t.add[col, t.mul[gram[:, k], w[k]]]
    outer = t.mul[col[:, None], v[None, :]]
    eye = np.eye(form.n, dtype=CODE_DTYPE)
    return Matrix(field, t.add[eye, t.mul[c, outer]])


def hermitian_value(form: FormSpec, v: np.ndarray) -> int:
    """h(v, v) = v G conj(v)^T, or B(v, v) for bilinear forms."""
    field = form.field
    t = field.tables
    w = t.conj[v] if form.kind == FormKind.HERMITIAN else v
    acc = 0
    for i in range(form.n):
        for j in range(form.n):
            acc = t.add[acc, t.mul[t.mul[v[i], form.gram[i, j]], w[j]]]
    return int(acc)


# ---------------------------------------------------------------------------
# Element constructors

def transvection_gens(field: FieldSpec, n: int) -> List[Matrix]:
    """Adjacent elementary transvections x_{i,i+1}(t), x_{i+1,i}(t), t over an F_p-basis of F_q."""
    gens = []
    basis = [field.p**k for k in range(field.f)]
    for i in range(n - 1):
        for j, k in ((i, i + 1), (i + 1, i)):
            for tcode in basis:
                m = np.eye(n, dtype=CODE_DTYPE)
                m[j, k] = tcode
                gens.append(Matrix(field, m))
    return gens


def symplectic_transvection(form: FormSpec, v: np.ndarray) -> Matrix:
    return rank_one_update(form, v, 1)


def orthogonal_reflection(form: FormSpec, v: np.ndarray) -> Optional[Matrix]:
    """x -> x - f(x, v)/Q(v) v; None when v is singular."""
    t = form.field.tables
    qv = int(quadratic_values(form, v[None, :])[0])
    if qv == 0:
        return None
    return rank_one_update(form, v, int(t.neg[t.inv[qv]]))


def unitary_quasi_reflection(form: FormSpec, v: np.ndarray, zeta: int) -> Optional[Matrix]:
    """x -> x + (zeta - 1) h(x, v)/h(v, v) v; None when v is isotropic."""
    t = form.field.tables
    hv = hermitian_value(form, v)
    if hv == 0:
        return None
    c = t.mul[t.sub(zeta, 1), t.inv[hv]]
    return rank_one_update(form, v, int(c))


def unitary_transvection(form: FormSpec, v: np.ndarray) -> Optional[Matrix]:
    """x -> x + a h(x, v) v for isotropic v and a + a^q = 0."""
    t = form.field.tables
    if not v.any() or hermitian_value(form, v) != 0:
        return None
    a = next(c for c in range(1, form.field.order) if t.add[c, t.conj[c]] == 0)
    return rank_one_update(form, v, a)


def _unitary_zeta(field: FieldSpec, q: int) -> int:
    t = field.tables
    return t.power(t.primitive, q - 1)


def _similitude_gsp(field: FieldSpec, n: int) -> Matrix:
    omega = field.tables.primitive
    return diag(field, [omega, 1] * (n // 2))


def _similitude_go_even(form: FormSpec) -> Matrix:
    """A similitude with multiplier omega for an even-dimensional quadratic form."""
    field = form.field
    t = field.tables
    omega = t.primitive
    n = form.n
    if form.epsilon.value == "+":
        return diag(field, [omega, 1] * (n // 2))
    out = np.zeros((n, n), dtype=CODE_DTYPE)
    for k in range(n // 2 - 1):
        out[2 * k, 2 * k] = omega
        out[2 * k + 1, 2 * k + 1] = 1
    block = _anisotropic_similitude(form)
    out[n - 2 :, n - 2 :] = block
    return Matrix(field, out)


def _anisotropic_similitude(form: FormSpec) -> np.ndarray:
    """2x2 block A with Q(vA) = omega Q(v) on the anisotropic plane x^2 - nu y^2."""
    field = form.field
    t = field.tables
    omega = t.primitive
    c0, c1 = int(form.qvec[-2]), int(form.qvec[-1])

    def qval(x, y):
        return int(t.add[t.mul[c0, t.mul[x, x]], t.mul[c1, t.mul[y, y]]])

    def polar(a, b, c, d):
        return int(t.add[t.mul[c0, t.mul[a, c]], t.mul[c1, t.mul[b, d]]])

    target0 = int(t.mul[omega, c0])
    target1 = int(t.mul[omega, c1])
    q = field.order
    for a in range(q):
        for b in range(q):
            if qval(a, b) != target0:
                continue
            for c in range(q):
                for d in range(q):
                    if qval(c, d) == target1 and polar(a, b, c, d) == 0:
                        return np.array([[a, b], [c, d]], dtype=CODE_DTYPE)
    raise ValueError(f"no similitude of the anisotropic plane over {field}")


# ---------------------------------------------------------------------------
# Completion

def _complete(
    seeds: Sequence[Matrix],
    candidates: Iterator[Matrix],
    target: int,
    cap: int,
    spec: GroupSpec,
    form: FormSpec,
) -> ElementTable:
    gens = list(seeds)
    if not gens:
        gens.append(next(candidates))
    table = closure(gens, cap=cap, spec=spec, form=form)
    while table.order < target:
        for cand in candidates:
            if table.find(cand) is None:
                gens.append(cand)
                table = closure(gens, cap=cap, spec=spec, form=form)
                logger.debug(f"{spec.label}: {len(gens)} generators reach {table.order}/{target}")
                break
        else:
            raise ValueError(f"candidate generators for {spec.label} exhausted at order {table.order}")
    if table.order != target:
        raise ValueError(f"{spec.label} closed at {table.order}, expected {target}")
    return table


def _reflections(form: FormSpec) -> Iterator[Matrix]:
    for v in _vector_stream(form.field, form.n):
        r = orthogonal_reflection(form, v)
        if r is not None:
            yield r


def _symplectic_transvections(form: FormSpec) -> Iterator[Matrix]:
    for v in _vector_stream(form.field, form.n):
        yield symplectic_transvection(form, v)


def _unitary_elements(form: FormSpec, zeta: int) -> Iterator[Matrix]:
    for v in _vector_stream(form.field, form.n):
        m = unitary_quasi_reflection(form, v, zeta)
        yield m if m is not None else unitary_transvection(form, v)


def kernel_generators(table: ElementTable, values: np.ndarray) -> List[int]:
    """Schreier generators for the kernel of a homomorphism given by its value array.

    The transversal uses the least index with each value; the generators are
    u * rep(u)^-1 for u = t * s over transversal elements t and generators s.
    """
    uniq, first = np.unique(values, return_index=True)
    rep = dict(zip(uniq.tolist(), first.tolist()))
    inv = table.inverse
    out: List[int] = []
    for t_idx in first:
        for s in table.gen_ids:
            u = int(table.mul_ids(t_idx, s))
            g = int(table.mul_ids(u, inv[rep[int(values[u])]]))
            if g != 0 and g not in out:
                out.append(g)
    return out


def _isometry_spec(spec: GroupSpec) -> GroupSpec:
    family = Family.O if spec.family == Family.SO else Family.GU
    return spec.model_copy(update={"family": family})


@lru_cache(maxsize=16)
def build_group(spec: GroupSpec, cap: int = DEFAULT_CAP) -> ElementTable:
    """Enumerate the classical group described by ``spec``."""
    if spec.family == Family.USER:
        raise UnsupportedFamily("user groups are built with closure() from explicit generators")
    form = standard_form_for(spec)
    field = form.field
    n = spec.n
    target = group_order(spec)
    if target > cap:
        raise BudgetExceeded(f"|{spec.label}| = {target} exceeds the budget of {cap}", partial=0)
    logger.info(f"Building {spec.label} (order {target})")

    family = spec.family
    if family in (Family.GL, Family.SL):
        gens = transvection_gens(field, n)
        if family == Family.GL:
            gens.append(diag(field, [field.tables.primitive] + [1] * (n - 1)))
        if not gens:
            gens = [identity(field, n)]
        table = closure(gens, cap=cap, spec=spec, form=form)
        if table.order != target:
            raise ValueError(f"{spec.label} closed at {table.order}, expected {target}")
        return table

    if family in (Family.SO, Family.SU):
        parent_spec = _isometry_spec(spec)
        index = group_order(parent_spec) // target
        parent = build_group(parent_spec, cap * index)
        kernel = kernel_generators(parent, parent.det)
        gens = [parent.matrix(i) for i in kernel] or [identity(field, n)]
        table = closure(gens, cap=cap, spec=spec, form=form)
        if table.order != target:
            raise ValueError(f"{spec.label} closed at {table.order}, expected {target}")
        return table

    eye = np.eye(n, dtype=CODE_DTYPE)
    if family in (Family.Sp, Family.GSp):
        iso_spec = spec.model_copy(update={"family": Family.Sp})
        seeds = [symplectic_transvection(form, eye[i]) for i in range(n)]
        iso = _complete(seeds, _symplectic_transvections(form), group_order(iso_spec), cap, iso_spec, form)
        if family == Family.Sp:
            return iso
        gens = iso.generators + [_similitude_gsp(field, n)]
    elif family == Family.GU:
        zeta = _unitary_zeta(field, spec.q)
        seeds = [unitary_quasi_reflection(form, eye[0], zeta)]
        return _complete(seeds, _unitary_elements(form, zeta), target, cap, spec, form)
    else:
        iso_spec = spec.model_copy(update={"family": Family.O})
        seeds = [r for r in (orthogonal_reflection(form, eye[i]) for i in range(n)) if r is not None]
        iso = _complete(seeds, _reflections(form), group_order(iso_spec), cap, iso_spec, form)
        if family == Family.O:
            return iso
        omega = field.tables.primitive
        gens = iso.generators + [diag(field, [omega] * n)]
        if n % 2 == 0:
            gens.append(_similitude_go_even(form))

    table = closure(gens, cap=cap, spec=spec, form=form)
    if table.order != target:
        raise ValueError(f"{spec.label} closed at {table.order}, expected {target}")
    return table


def generators(spec: GroupSpec, cap: int = DEFAULT_CAP) -> List[Matrix]:
    """Deterministic generating matrices of the classical group ``spec``."""
    return build_group(spec, cap).generators


def det_one_subgroup(G: ElementTable):
    """G cap SL_n, as a normal subgroup of G."""
    return SubgroupHandle(G, np.nonzero(G.det == 1)[0])

