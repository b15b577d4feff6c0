"""Conjugating elements and intersection certificates.

A certificate records H, the conjugating elements x_1, ..., x_k, the
intersection H cap H^x_1 cap ... and whether it is central. Certificates are
plain pydantic models; replaying one rebuilds the group and must reproduce
the same canonical JSON.
"""

import logging
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.context import DEFAULT_CAP
from ..core.errors import (
    BudgetExceeded,
    IntermediateNotAbelian,
    KindDimensionMismatch,
    ReplayMismatch,
    Singular,
    WitnessNotInGroup,
)
from ..core.field import FieldSpec
from ..core.matrix import (
    Epsilon,
    FormKind,
    Matrix,
    det,
    from_ints,
    matinv,
    matmul,
    perm_from_cycles,
    signed_perm_witness,
    standard_form,
)
from ..core.models import (
    Certificate,
    Family,
    GroupSpec,
    SubgroupRecord,
    Verdict,
    matrix_from_json,
    matrix_to_json,
)
from .engine import (
    CHUNK,
    ElementTable,
    SubgroupHandle,
    center,
    closure,
    conjugate_subgroup,
    contains,
    intersect,
    is_abelian,
    kernel_HG,
    subgroup_generators,
)
from .hall import adapted_orthogonal_basis, circulant_matrix

logger = logging.getLogger(__name__)


class WitnessKind(str, Enum):
    """Signed permutation and circulant witnesses for the imprimitive cases."""

    LINEAR_ODD_N = "linear_odd_n"
    ORTH_ODD = "orth_odd"
    ORTH_EVEN = "orth_even"
    ORTH_11_12 = "orth_11_12"
    CIRCULANT_REMARK = "circulant_remark"


def sp4_witnesses(field: FieldSpec) -> Tuple[Matrix, Matrix, Matrix]:
    """Three elements of Sp_4(q) in the basis e1, f1, e2, f2."""
    x = from_ints(field, [[1, 0, -1, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 1, 0, 1]])
    y = from_ints(field, [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [1, 0, 0, 1]])
    z = from_ints(field, [[1, 0, 0, 0], [0, 1, 0, 1], [-1, 0, 1, 0], [0, 0, 0, 1]])
    return x, y, z


def lemma_witness_with_basis(
    kind: WitnessKind,
    n: int,
    field: FieldSpec,
    epsilon: Optional[Epsilon] = None,
) -> Tuple[Matrix, Optional[Matrix]]:
    """The witness in the standard basis, and the adapted basis (rows) when one was needed."""
    kind = WitnessKind(kind)
    if kind == WitnessKind.LINEAR_ODD_N:
        if n < 3 or n % 2 == 0:
            raise KindDimensionMismatch(f"{kind.value} needs odd n >= 3, got {n}")
        return signed_perm_witness(perm_from_cycles([range(1, n + 1)], n), field), None

    if kind == WitnessKind.ORTH_ODD:
        if n < 3 or n % 2 == 0:
            raise KindDimensionMismatch(f"{kind.value} needs odd n >= 3, got {n}")
        cycle = list(range(1, n - 1, 2)) + [n]
        return signed_perm_witness(perm_from_cycles([cycle], n), field), None

    if kind == WitnessKind.ORTH_EVEN:
        if n < 4 or n % 2:
            raise KindDimensionMismatch(f"{kind.value} needs even n >= 4, got {n}")
        sigma = perm_from_cycles([range(1, n, 2)], n)
        form = standard_form(FormKind.QUADRATIC, epsilon or Epsilon.PLUS, n, field)
        basis = adapted_orthogonal_basis(form, list(range(0, n, 2)))
        return _in_standard_basis(signed_perm_witness(sigma, field), basis), basis

    if kind == WitnessKind.ORTH_11_12:
        if n not in (11, 12):
            raise KindDimensionMismatch(f"{kind.value} needs n in (11, 12), got {n}")
        sigma = perm_from_cycles([(1, 3, 5, 9), (7, 10)], n)
        x = signed_perm_witness(sigma, field)
        if n == 11:
            return x, None
        form = standard_form(FormKind.QUADRATIC, epsilon or Epsilon.PLUS, n, field)
        basis = adapted_orthogonal_basis(form, [0, 2, 4, 6, 8, 9, 10, 11])
        return _in_standard_basis(x, basis), basis

    if n < 5 or n % 2 == 0:
        raise KindDimensionMismatch(f"{kind.value} needs odd n >= 5, got {n}")
    x = circulant_matrix(field, n)
    if det(x).code == 0:
        raise Singular(f"the circulant witness is singular over {field}")
    return x, None


def _in_standard_basis(x: Matrix, basis: Matrix) -> Matrix:
    """P^-1 X P: the map acting as X on coordinates with respect to the rows of P."""
    return matmul(matmul(matinv(basis), x), basis)


def lemma_witness(kind: WitnessKind, n: int, field: FieldSpec, epsilon: Optional[Epsilon] = None) -> Matrix:
    return lemma_witness_with_basis(kind, n, field, epsilon)[0]


# ---------------------------------------------------------------------------
# Verification

def _spec_of(G: ElementTable) -> GroupSpec:
    if G.spec is not None:
        return G.spec
    return GroupSpec(family=Family.USER, n=G.n, q=G.field.order)


def subgroup_record(G: ElementTable, H: SubgroupHandle) -> SubgroupRecord:
    return SubgroupRecord(
        group=_spec_of(G),
        order=H.order,
        members=[int(i) for i in H.members],
        generators=[matrix_to_json(G.matrix(i)) for i in subgroup_generators(H)],
    )


def verify_witnesses(
    G: ElementTable,
    H: SubgroupHandle,
    ws: Sequence[Matrix],
    pi: Sequence[int] = (),
    method: str = "explicit",
    seed: int = 0,
    budget: int = 0,
    cap: int = DEFAULT_CAP,
    change_of_basis: Optional[Matrix] = None,
) -> Certificate:
    """Intersect H with its conjugates by ws and classify the result."""
    ids = []
    for k, w in enumerate(ws):
        idx = G.find(w)
        if idx is None:
            raise WitnessNotInGroup(f"witness {k} is not an element of {G!r}")
        ids.append(idx)

    inter = H
    for idx in ids:
        inter = intersect([inter, conjugate_subgroup(H, idx)])
    Z = center(G)
    K = kernel_HG(G, H)
    central = inter.issubset(Z)
    equals_kernel = inter == K
    if central:
        verdict = Verdict.CENTRAL_CONTAINMENT
    elif equals_kernel:
        verdict = Verdict.KERNEL_EQUALS_CORE
    else:
        verdict = Verdict.FAILED
    logger.info(f"|H| = {H.order}, {len(ids)} conjugates meet in {inter.order}: {verdict.value}")

    spec = _spec_of(G)
    return Certificate(
        group=spec,
        field=G.field,
        cap=cap,
        pi=sorted(int(r) for r in pi),
        group_order=G.order,
        hall=subgroup_record(G, H),
        witnesses=[matrix_to_json(G.matrix(i)) for i in ids],
        witness_indices=ids,
        intersection_order=inter.order,
        intersection_members=[int(i) for i in inter.members],
        kernel_order=K.order,
        center_order=Z.order,
        central=central,
        equals_kernel=equals_kernel,
        verdict=verdict,
        method=method,
        seed=seed,
        budget=budget,
        change_of_basis=matrix_to_json(change_of_basis) if change_of_basis is not None else None,
        group_generators=[matrix_to_json(g) for g in G.generators] if spec.family == Family.USER else [],
    )


def _outside_conjugates(G: ElementTable, A: SubgroupHandle, targets: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """For each y, how many a in targets satisfy y a y^-1 in A."""
    inv = G.inverse
    conj = G.mul_ids(G.mul_ids(ys[:, None], targets[None, :]), inv[ys][:, None])
    return contains(A.members, conj).sum(axis=1)


def two_step_abelian_finish(
    G: ElementTable,
    H: SubgroupHandle,
    x: Matrix,
    budget: int = 200_000,
    pi: Sequence[int] = (),
    cap: int = DEFAULT_CAP,
    kind: Optional[WitnessKind] = None,
    change_of_basis: Optional[Matrix] = None,
) -> Certificate:
    """Check that A = H cap H^x is abelian, then find the least y with A cap A^y central.

    The certificate lists x, y and xy, since A cap A^y = H cap H^x cap H^y cap H^xy.
    Its method is "two-step", or "two-step:<kind>" when x is a named witness, and
    it records the adapted basis x was built in.
    """
    x_id = G.find(x)
    if x_id is None:
        raise WitnessNotInGroup(f"x is not an element of {G!r}")
    A = intersect([H, conjugate_subgroup(H, x_id)])
    if not is_abelian(A):
        raise IntermediateNotAbelian(f"H cap H^x of order {A.order} is not abelian")
    Z = center(G)
    targets = A.members[~contains(Z.members, A.members)]

    y_id = 0
    if len(targets):
        step = max(1, CHUNK // len(targets))
        y_id = None
        for s in range(0, min(G.order, budget), step):
            ys = np.arange(s, min(s + step, G.order, budget), dtype=np.int64)
            hits = _outside_conjugates(G, A, targets, ys)
            good = np.nonzero(hits == 0)[0]
            if len(good):
                y_id = int(ys[good[0]])
                break
        if y_id is None:
            raise BudgetExceeded(f"no y among the first {min(G.order, budget)} elements", partial=budget)
    logger.info(f"two-step finish: |A| = {A.order}, y = element {y_id}")
    y = G.matrix(y_id)
    method = "two-step" if kind is None else f"two-step:{WitnessKind(kind).value}"
    return verify_witnesses(
        G, H, [x, y, matmul(x, y)], pi=pi, method=method, budget=budget, cap=cap, change_of_basis=change_of_basis
    )


def right_coset_representatives(G: ElementTable, H: SubgroupHandle) -> np.ndarray:
    """Least element of every right coset Hg, in increasing order."""
    marked = np.zeros(G.order, dtype=bool)
    reps = []
    for g in range(G.order):
        if marked[g]:
            continue
        reps.append(g)
        marked[G.mul_ids(H.members, g)] = True
    return np.asarray(reps, dtype=np.int64)


def search_witnesses(
    G: ElementTable,
    H: SubgroupHandle,
    k_max: int = 4,
    budget: int = 200_000,
    pi: Sequence[int] = (),
    seed: int = 0,
    cap: int = DEFAULT_CAP,
) -> Optional[Certificate]:
    """Greedy witnesses: each step picks the conjugate that shrinks the running intersection most.

    H^g depends only on the coset Hg, so only least coset representatives
    are tried, in index order; ties go to the smaller index. Returns None if
    k_max conjugates do not reach the kernel H_G.
    """
    K = kernel_HG(G, H)
    reps = right_coset_representatives(G, H)
    inv = G.inverse
    cur = H
    chosen: List[int] = []
    evaluated = 0
    while cur.order > K.order:
        if len(chosen) == k_max:
            logger.info(f"greedy search stopped at |cur| = {cur.order} after {k_max} witnesses")
            return None
        best, best_count = -1, cur.order + 1
        step = max(1, CHUNK // cur.order)
        for s in range(0, len(reps), step):
            gs = reps[s : s + step]
            evaluated += len(gs)
            if evaluated > budget:
                raise BudgetExceeded(f"witness search exceeded {budget} evaluations", partial=len(chosen))
            conj = G.mul_ids(G.mul_ids(gs[:, None], cur.members[None, :]), inv[gs][:, None])
            counts = contains(H.members, conj).sum(axis=1)
            k = int(np.argmin(counts))
            if counts[k] < best_count:
                best, best_count = int(gs[k]), int(counts[k])
        chosen.append(best)
        cur = intersect([cur, conjugate_subgroup(H, best)])
        logger.debug(f"greedy step {len(chosen)}: element {best}, |cur| = {cur.order}")
    return verify_witnesses(
        G, H, [G.matrix(i) for i in chosen], pi=pi, method="greedy", seed=seed, budget=budget, cap=cap
    )


# ---------------------------------------------------------------------------
# Replay

def rebuild_group(cert: Certificate) -> ElementTable:
    """The group a certificate was computed in."""
    if cert.group.family == Family.USER:
        gens = [matrix_from_json(cert.field, g) for g in cert.group_generators]
        return closure(gens, cap=cert.cap)
    from .classical import build_group

    return build_group(cert.group, cert.cap)


def replay_certificate(cert: Certificate) -> Certificate:
    """Recompute a certificate from its inputs; raise ReplayMismatch unless it is identical."""
    G = rebuild_group(cert)
    if G.order != cert.group_order:
        raise ReplayMismatch(f"rebuilt group has order {G.order}, certificate says {cert.group_order}")
    H = SubgroupHandle(G, np.asarray(cert.hall.members, dtype=np.int64))
    ws = [matrix_from_json(cert.field, w) for w in cert.witnesses]
    basis = matrix_from_json(cert.field, cert.change_of_basis) if cert.change_of_basis else None
    again = verify_witnesses(
        G,
        H,
        ws,
        pi=cert.pi,
        method=cert.method,
        seed=cert.seed,
        budget=cert.budget,
        cap=cert.cap,
        change_of_basis=basis,
    )
    if again.canonical_json() != cert.canonical_json():
        raise ReplayMismatch("replayed certificate differs from the recorded one")
    return again
