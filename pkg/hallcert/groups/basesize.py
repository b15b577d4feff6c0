"""
Coset actions, base size and regular orbits.

G acts on the right cosets Omega of H by right multiplication. A tuple of
cosets is regular when its pointwise stabilizer is the kernel H_G of the
action, so G/H_G acts regularly on its orbit. Base size is the least k with
a regular k-tuple; Reg(m) counts regular orbits on Omega^m.

Both are computed by a stabilizer-chain search: the first point is fixed to
the coset H itself, and at each level only one point per orbit of the
current stabilizer is tried. Stabilizers are row subsets of the action of H
on Omega, which is tabulated once.
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.context import RunContext
from ..core.errors import BudgetExceeded, IntermediateNotAbelian
from ..core.models import MIN_DIMENSION, Bound, Family, GroupSpec, TheoremReport, Verdict
from .classical import build_group, det_one_subgroup, group_order
from .engine import (
    CHUNK,
    ElementTable,
    SubgroupHandle,
    find_hall_pi,
    is_abelian,
    is_solvable,
    kernel_HG,
    pi_part,
    structural_hall,
)
from .hall import epi_condition, inthom_check
from .witnesses import (
    WitnessKind,
    lemma_witness_with_basis,
    search_witnesses,
    sp4_witnesses,
    two_step_abelian_finish,
    verify_witnesses,
)

logger = logging.getLogger(__name__)


@dataclass
class CosetAction:
    """G acting on the right cosets of H.

    Cosets are numbered by their least member index, so coset 0 is H.
    ``images[k][c]`` is the coset of rep[c] * gens[k].
    """

    group: ElementTable
    subgroup: SubgroupHandle
    kernel: SubgroupHandle
    coset_of: np.ndarray
    reps: np.ndarray
    images: List[np.ndarray]

    @property
    def omega_size(self) -> int:
        return len(self.reps)

    @property
    def point_stabilizer_orders(self) -> np.ndarray:
        """|Stab(c)| per coset c; the stabilizer of Hg is H^g, so every entry is |H|."""
        return np.full(self.omega_size, self.subgroup.order, dtype=np.int64)

    def act(self, points: np.ndarray, g) -> np.ndarray:
        """Images of the given cosets under the element(s) g."""
        points = np.asarray(points, dtype=np.int64)
        return self.coset_of[self.group.mul_ids(self.reps[points], g)]


def coset_action(G: ElementTable, H: SubgroupHandle) -> CosetAction:
    coset_of = np.full(G.order, -1, dtype=np.int64)
    reps: List[int] = []
    for g in range(G.order):
        if coset_of[g] >= 0:
            continue
        coset_of[G.mul_ids(H.members, g)] = len(reps)
        reps.append(g)
    reps_arr = np.asarray(reps, dtype=np.int64)
    images = [coset_of[G.mul_ids(reps_arr, s)] for s in G.gen_ids]
    logger.info(f"{G!r} on the cosets of a subgroup of order {H.order}: degree {len(reps)}")
    return CosetAction(G, H, kernel_HG(G, H), coset_of, reps_arr, images)


def permutation_table(action: CosetAction, budget: int = 60_000_000) -> np.ndarray:
    """table[g, c]: the image of coset c under element g, for every g in G."""
    G = action.group
    cells = G.order * action.omega_size
    if cells > budget:
        raise BudgetExceeded(f"a {G.order} x {action.omega_size} action table exceeds {budget} cells", partial=0)
    table = np.empty((G.order, action.omega_size), dtype=np.int64)
    points = np.arange(action.omega_size, dtype=np.int64)
    step = max(1, CHUNK // action.omega_size)
    for s in range(0, G.order, step):
        g = np.arange(s, min(s + step, G.order), dtype=np.int64)
        table[s : s + step] = action.act(points[None, :], g[:, None])
    return table


def action_kernel(action: CosetAction, budget: int = 60_000_000) -> SubgroupHandle:
    """Elements fixing every coset."""
    table = permutation_table(action, budget)
    fixed = np.all(table == np.arange(action.omega_size), axis=1)
    return SubgroupHandle(action.group, np.nonzero(fixed)[0])


class StabilizerChain:
    """The stabilizer-chain search tree of an action, rooted at the tuple (H,).

    Nodes are arrays of rows into the action of H on Omega; a node's rows are
    the elements of H fixing every point chosen so far.
    """

    def __init__(self, action: CosetAction, node_budget: int = 200_000):
        self.action = action
        self.omega = action.omega_size
        self.kernel_order = action.kernel.order
        self.node_budget = node_budget
        self.nodes = 0
        H = action.subgroup
        table = np.empty((H.order, self.omega), dtype=np.int64)
        points = np.arange(self.omega, dtype=np.int64)
        step = max(1, CHUNK // self.omega)
        for s in range(0, H.order, step):
            h = H.members[s : s + step]
            table[s : s + step] = action.act(points[None, :], h[:, None])
        self.table = table
        self.root = np.arange(H.order, dtype=np.int64)

    def visit(self) -> None:
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise BudgetExceeded(f"stabilizer-chain search exceeded {self.node_budget} nodes", partial=self.nodes)

    def is_regular(self, rows: np.ndarray) -> bool:
        return len(rows) == self.kernel_order

    def children(self, rows: np.ndarray) -> List[Tuple[int, int, np.ndarray]]:
        """(point, orbit size, stabilizer rows) per orbit, smallest stabilizer first, then by point."""
        block = self.table[rows]
        least = block.min(axis=0)
        points, sizes = np.unique(least, return_counts=True)
        fixes = block[:, points] == points
        stab_sizes = fixes.sum(axis=0)
        order = np.lexsort((points, stab_sizes))
        return [(int(points[k]), int(sizes[k]), rows[fixes[:, k]]) for k in order]


def base_size(G: ElementTable, H: SubgroupHandle, k_max: int = 5, node_budget: int = 200_000) -> Bound:
    """Least k with a regular k-tuple of cosets, or a '> k_max' bound."""
    chain = StabilizerChain(coset_action(G, H), node_budget)

    def search(rows: np.ndarray, prefix: List[int], depth_left: int) -> Optional[List[int]]:
        chain.visit()
        if chain.is_regular(rows):
            return prefix
        if depth_left == 0:
            return None
        for point, _, stab in chain.children(rows):
            if len(stab) == len(rows):
                continue
            found = search(stab, prefix + [point], depth_left - 1)
            if found is not None:
                return found
        return None

    for k in range(1, k_max + 1):
        found = search(chain.root, [0], k - 1)
        if found is not None:
            logger.info(f"base size {k}, base {found}")
            return Bound(value=k, tuples=[found])
    return Bound(value=k_max, exact=False, relation=">")


def _regular_tuples_at_zero(chain: StabilizerChain, m: int) -> int:
    """Regular m-tuples whose first point is H, counted along the chain."""

    def count(rows: np.ndarray, depth: int) -> int:
        chain.visit()
        if chain.is_regular(rows):
            return chain.omega ** (m - depth)
        if depth == m:
            return 0
        return sum(size * count(stab, depth + 1) for _, size, stab in chain.children(rows))

    return count(chain.root, 1)


def _regular_representatives(
    chain: StabilizerChain, m: int, rng: Optional[np.random.Generator]
) -> Iterator[List[int]]:
    """One tuple per regular orbit on Omega^m; the child order is shuffled when rng is given."""

    def walk(rows: np.ndarray, prefix: List[int]) -> Iterator[List[int]]:
        chain.visit()
        if chain.is_regular(rows):
            for rest in product(range(chain.omega), repeat=m - len(prefix)):
                yield prefix + list(rest)
            return
        if len(prefix) == m:
            return
        kids = chain.children(rows)
        if rng is not None:
            kids = [kids[i] for i in rng.permutation(len(kids))]
        for point, _, stab in kids:
            yield from walk(stab, prefix + [point])

    yield from walk(chain.root, [0])


def reg_count(
    G: ElementTable,
    H: SubgroupHandle,
    m: int = 5,
    method: str = "exact",
    seed: int = 0,
    node_budget: int = 200_000,
    want: int = 5,
) -> Bound:
    """Number of regular orbits of G on Omega^m.

    ``exact`` counts regular tuples through the coset H along the stabilizer
    chain; each regular orbit holds |H : H_G| of them. ``lower-bound`` lists
    ``want`` pairwise inequivalent regular tuples and returns '>= want', or
    the exact count if the tree runs out first.
    """
    chain = StabilizerChain(coset_action(G, H), node_budget)
    if method == "exact":
        total = _regular_tuples_at_zero(chain, m)
        # a regular orbit meets the tuples starting at H in |Stab(H) : H_G| places
        per_orbit = int(chain.action.point_stabilizer_orders[0]) // chain.kernel_order
        logger.info(f"Reg({m}) = {total // per_orbit} ({chain.nodes} nodes)")
        return Bound(value=total // per_orbit)

    rng = np.random.default_rng(seed) if seed else None
    found: List[List[int]] = []
    for t in _regular_representatives(chain, m, rng):
        found.append(t)
        if len(found) == want:
            return Bound(value=want, exact=False, relation=">=", tuples=found)
    return Bound(value=len(found), tuples=found)


def reg_count_bruteforce(G: ElementTable, H: SubgroupHandle, m: int, budget: int = 60_000_000) -> int:
    """Reg(m) straight from the definition, over all of Omega^m."""
    action = coset_action(G, H)
    table = permutation_table(action, budget)
    omega = action.omega_size
    total = omega**m
    if total * G.order > budget:
        raise BudgetExceeded(f"|Omega|^{m} = {total} tuples exceed the budget", partial=0)
    regular = 0
    step = max(1, CHUNK // G.order)
    for s in range(0, total, step):
        flat = np.arange(s, min(s + step, total), dtype=np.int64)
        tuples = np.stack(np.unravel_index(flat, (omega,) * m), axis=1)
        fixed = np.all(table[:, tuples] == tuples[None], axis=2)
        regular += int(np.sum(fixed.sum(axis=0) == action.kernel.order))
    return regular // (G.order // action.kernel.order)


# ---------------------------------------------------------------------------
# Theorem instances

def locate_hall(
    G: ElementTable, pi: Sequence[int], strategy: str, budget: int
) -> Tuple[Optional[SubgroupHandle], Optional[str]]:
    """A Hall pi-subgroup and where it was found. A failed structural search widens to all of G."""
    target = pi_part(G.order, pi)
    if target in (1, G.order):
        return find_hall_pi(G, pi, strategy, budget), "trivial subgroup" if target == 1 else "whole group"
    if strategy == "structural" and G.spec is not None:
        H, provenance = structural_hall(G, pi, budget)
        if H is not None:
            return H, provenance
        logger.warning(f"No structural container of {G!r} held a Hall {list(pi)}-subgroup, searching all of G")
    H = find_hall_pi(G, pi, strategy="exhaustive", budget=budget)
    return H, None if H is None else "exhaustive search"


def certify(
    G: ElementTable, H: SubgroupHandle, pi: Sequence[int], ctx: RunContext, witness: Optional[str] = None
):
    """Witness certificate for H: the named construction witnesses, else greedy search."""
    spec = G.spec
    if witness is None and spec is not None and spec.family.hat == Family.GSp and spec.n == 4:
        witness = "sp4"
    if witness == "sp4":
        return verify_witnesses(G, H, list(sp4_witnesses(G.field)), pi=pi, method="sp4", cap=ctx.cap)
    if witness not in (None, "search"):
        eps = spec.epsilon if spec is not None else None
        x, basis = lemma_witness_with_basis(WitnessKind(witness), G.n, G.field, eps)
        try:
            return two_step_abelian_finish(
                G, H, x, ctx.search_budget, pi=pi, cap=ctx.cap, kind=WitnessKind(witness), change_of_basis=basis
            )
        except IntermediateNotAbelian as e:
            logger.warning(f"{e}; certifying x alone")
            return verify_witnesses(G, H, [x], pi=pi, method=witness, cap=ctx.cap, change_of_basis=basis)
    return search_witnesses(G, H, ctx.witness_kmax, ctx.search_budget, pi=pi, seed=ctx.seed, cap=ctx.cap)


def _comparisons(base: Bound, reg: Optional[Bound]) -> Dict[str, Optional[bool]]:
    out: Dict[str, Optional[bool]] = {}
    if base.exact:
        out["base_le_5"] = base.value <= 5
    else:
        out["base_le_5"] = False if base.value >= 5 else None
    if reg is None:
        out["reg_ge_5"] = out["reg_le_5"] = None
    elif reg.exact:
        out["reg_ge_5"] = reg.value >= 5
        out["reg_le_5"] = reg.value <= 5
    else:
        out["reg_ge_5"] = True if reg.value >= 5 else None
        out["reg_le_5"] = False if reg.value > 5 else None
    return out


def theorem_check(
    spec: GroupSpec,
    pi: Sequence[int],
    ctx: Optional[RunContext] = None,
    method: str = "exact",
    strategy: str = "structural",
    witness: Optional[str] = None,
) -> TheoremReport:
    """Everything the main theorem says about (G, pi), checked on the enumerated group.

    Budget overruns end the check early with status Budget; the report
    keeps whatever was computed before.
    """
    ctx = ctx or RunContext()
    pi = sorted(set(pi))
    report = TheoremReport(group=spec, pi=pi, status="Budget", reg_m=ctx.reg_m)
    report.epi = epi_condition(spec, pi)
    report.group_order = group_order(spec)

    hat = spec.family.hat
    if spec.n < MIN_DIMENSION.get(hat, 1):
        report.status = "OutOfScope"
        report.notes.append(f"dimension {spec.n} is below {MIN_DIMENSION[hat]} for {hat.value}")
        return report
    if report.epi.exists is False:
        report.status = "ExistsNo"
        report.notes.append(f"no Hall {pi}-subgroup: {report.epi.case_label}")
        return report

    try:
        G = build_group(spec, ctx.cap)
        if is_solvable(G.whole()):
            report.status = "OutOfScope"
            report.notes.append(f"{spec.label} is solvable")
            return report

        H, provenance = locate_hall(G, pi, strategy, ctx.hall_budget)
        if H is None:
            report.status = "NoHall"
            report.notes.append("no Hall subgroup was found")
            return report
        report.hall_order = H.order
        report.provenance = provenance
        report.hall_solvable = is_solvable(H)
        report.hall_abelian = is_abelian(H)
        report.hall_in_det_one = inthom_check(G, det_one_subgroup(G), H, pi).hall_in_a

        report.certificate = certify(G, H, pi, ctx, witness)
        if report.certificate is None:
            report.notes.append(f"greedy search used {ctx.witness_kmax} conjugates without reaching H_G")

        report.base_size = base_size(G, H, ctx.base_kmax, ctx.reg_node_budget)
        try:
            report.reg = reg_count(G, H, ctx.reg_m, method, ctx.seed, ctx.reg_node_budget)
        except BudgetExceeded as e:
            logger.warning(f"exact Reg({ctx.reg_m}) out of budget ({e}), listing regular orbits instead")
            report.notes.append(f"exact Reg out of budget: {e}")
            report.reg = reg_count(G, H, ctx.reg_m, "lower-bound", ctx.seed, ctx.reg_node_budget)
    except BudgetExceeded as e:
        report.notes.append(str(e))
        return report

    report.comparisons = _comparisons(report.base_size, report.reg)
    cert_ok = report.certificate is not None and report.certificate.verdict != Verdict.FAILED
    report.status = "Verified" if cert_ok and report.comparisons["base_le_5"] else "Failed"
    logger.info(f"{spec.label}, pi = {pi}: {report.status}")
    return report

