"""Exhaustive enumeration of desk-scale matrix groups.

An :class:`ElementTable` holds every element of a group as a stack of code
matrices in breadth-first discovery order, together with the Schreier tree
(parent, generator) that produced each element. Subgroups are sorted index
arrays into that table.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from sympy import factorint, primefactors

from ..core.context import DEFAULT_CAP
from ..core.errors import (
    BudgetExceeded,
    DimensionMismatch,
    FieldMismatch,
    IndexOutOfRange,
    NonInvertibleGenerator,
    ParentMismatch,
)
from ..core.field import FieldSpec
from ..core.matrix import (
    CODE_DTYPE,
    FormSpec,
    Matrix,
    batch_decode,
    batch_encode,
    batch_matmul,
    det,
    encoding_weights,
    form_multiplier,
    matinv,
)

logger = logging.getLogger(__name__)

CHUNK = 1 << 15


class ElementTable:
    """All elements of a finite matrix group, canonically indexed.

    Index 0 is the identity. ``parent[i]`` and ``via[i]`` record that
    element i was first found as ``element[parent[i]] @ gens[via[i]]``.
    """

    def __init__(
        self,
        field: FieldSpec,
        gens: np.ndarray,
        elements: np.ndarray,
        codes: np.ndarray,
        parent: np.ndarray,
        via: np.ndarray,
        level_starts: List[int],
        spec=None,
        form: Optional[FormSpec] = None,
    ):
        self.field = field
        self.n = elements.shape[-1]
        self.gens = gens
        self.elements = elements
        self.codes = codes
        self.parent = parent
        self.via = via
        self.level_starts = level_starts
        self.spec = spec
        self.form = form
        self._order = np.argsort(codes, kind="stable")
        self._sorted = codes[self._order]
        self.gen_ids: Tuple[int, ...] = tuple(int(i) for i in self.lookup(batch_encode(field, gens)))
        self._inverse: Optional[np.ndarray] = None
        self._det: Optional[np.ndarray] = None
        self._multiplier: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def order(self) -> int:
        return len(self.codes)

    @property
    def generators(self) -> List[Matrix]:
        return [Matrix(self.field, g) for g in self.gens]

    def matrix(self, i: int) -> Matrix:
        self.check_index(i)
        return Matrix(self.field, self.elements[i])

    def check_index(self, i: int) -> None:
        if not 0 <= int(i) < self.order:
            raise IndexOutOfRange(f"index {i} outside a table of {self.order} elements")

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        """Indices of the encoded matrices, -1 where absent."""
        codes = np.asarray(codes, dtype=np.int64)
        pos = np.searchsorted(self._sorted, codes)
        pos = np.minimum(pos, len(self._sorted) - 1)
        found = self._sorted[pos] == codes
        return np.where(found, self._order[pos], -1).astype(np.int64)

    def find(self, m: Union[Matrix, np.ndarray]) -> Optional[int]:
        arr = m.entries if isinstance(m, Matrix) else np.asarray(m, dtype=CODE_DTYPE)
        if isinstance(m, Matrix) and m.field != self.field:
            raise FieldMismatch(f"{m.field} vs {self.field}")
        if arr.shape != (self.n, self.n):
            raise DimensionMismatch(f"expected {self.n}x{self.n}, got {arr.shape}")
        idx = int(self.lookup(batch_encode(self.field, arr))[()])
        return None if idx < 0 else idx

    def mul_ids(self, a, b) -> np.ndarray:
        """Indices of element[a] @ element[b], elementwise; -1 if the product is not in the table."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        shape = a.shape
        a, b = a.ravel(), b.ravel()
        out = np.empty(len(a), dtype=np.int64)
        for s in range(0, len(a), CHUNK):
            prod = batch_matmul(self.field, self.elements[a[s : s + CHUNK]], self.elements[b[s : s + CHUNK]])
            out[s : s + CHUNK] = self.lookup(batch_encode(self.field, prod))
        return out.reshape(shape)

    def _propagate(self, gen_values: np.ndarray, combine: Callable) -> np.ndarray:
        """Extend a function on generators along the Schreier tree, level by level."""
        values = np.empty(self.order, dtype=gen_values.dtype)
        bounds = self.level_starts + [self.order]
        values[0] = combine(None, None)
        for start, end in zip(bounds[1:-1], bounds[2:]):
            values[start:end] = combine(values[self.parent[start:end]], gen_values[self.via[start:end]])
        return values

    def homomorphism(self, gen_values: Sequence[int]) -> np.ndarray:
        """Values of a homomorphism to F_q^* given its values on the generators."""
        mul = self.field.tables.mul
        gen_values = np.asarray(gen_values, dtype=CODE_DTYPE)

        def combine(prev, gv):
            return 1 if prev is None else mul[prev, gv]

        return self._propagate(gen_values, combine)

    @property
    def inverse(self) -> np.ndarray:
        """inverse[i] is the index of element[i]^-1."""
        if self._inverse is None:
            gen_inv = np.array([self.find(_inverse_of(self.field, g)) for g in self.gens], dtype=np.int64)
            inv = np.empty(self.order, dtype=np.int64)
            inv[0] = 0
            bounds = self.level_starts + [self.order]
            for start, end in zip(bounds[1:-1], bounds[2:]):
                # (parent * s)^-1 = s^-1 * parent^-1
                inv[start:end] = self.mul_ids(gen_inv[self.via[start:end]], inv[self.parent[start:end]])
            self._inverse = inv
        return self._inverse

    @property
    def det(self) -> np.ndarray:
        if self._det is None:
            self._det = self.homomorphism([det(g).code for g in self.generators])
        return self._det

    @property
    def multiplier(self) -> np.ndarray:
        """Similitude multiplier of every element with respect to ``form``."""
        if self._multiplier is None:
            values = [1] * len(self.gens)
            if self.form is not None:
                for k, g in enumerate(self.generators):
                    lam = form_multiplier(g, self.form)
                    if lam is None:
                        raise ValueError(f"generator {k} does not preserve the form up to a scalar")
                    values[k] = lam.code
            self._multiplier = self.homomorphism(values)
        return self._multiplier

    def conjugate_ids(self, ids: np.ndarray, g: int) -> np.ndarray:
        """Indices of g^-1 h g for h in ids."""
        ids = np.asarray(ids, dtype=np.int64)
        left = self.mul_ids(self.inverse[g], ids)
        return self.mul_ids(left, g)

    def whole(self) -> "SubgroupHandle":
        return SubgroupHandle(self, np.arange(self.order, dtype=np.int64), self.gen_ids)

    def trivial(self) -> "SubgroupHandle":
        return SubgroupHandle(self, np.zeros(1, dtype=np.int64), ())

    def __repr__(self) -> str:
        name = self.spec.label if self.spec is not None else f"<{len(self.gens)} generators>"
        return f"ElementTable({name}, order={self.order})"


def _inverse_of(field: FieldSpec, g: np.ndarray) -> np.ndarray:
    return matinv(Matrix(field, g)).entries


@dataclass(frozen=True, eq=False)
class SubgroupHandle:
    """A subgroup of an ElementTable, as a sorted array of element indices."""

    parent: ElementTable
    members: np.ndarray
    gen_ids: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        members = np.unique(np.asarray(self.members, dtype=np.int64))
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def order(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i: int) -> bool:
        return bool(contains(self.members, np.asarray([i]))[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubgroupHandle):
            return NotImplemented
        return self.parent is other.parent and np.array_equal(self.members, other.members)

    def __hash__(self) -> int:
        return hash((id(self.parent), self.members.tobytes()))

    def issubset(self, other: "SubgroupHandle") -> bool:
        return bool(np.all(contains(other.members, self.members)))

    def matrices(self) -> List[Matrix]:
        return [self.parent.matrix(i) for i in self.members]

    def generators(self) -> Tuple[int, ...]:
        if self.gen_ids is None:
            object.__setattr__(self, "gen_ids", subgroup_generators(self))
        return self.gen_ids

    def __repr__(self) -> str:
        return f"SubgroupHandle(order={self.order} in {self.parent!r})"


def contains(sorted_members: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Vectorised membership of ids in a sorted index array."""
    ids = np.asarray(ids, dtype=np.int64)
    if len(sorted_members) == 0:
        return np.zeros(ids.shape, dtype=bool)
    pos = np.minimum(np.searchsorted(sorted_members, ids), len(sorted_members) - 1)
    return sorted_members[pos] == ids


# ---------------------------------------------------------------------------
# Closure

def closure(
    gens: Sequence[Matrix],
    cap: int = DEFAULT_CAP,
    spec=None,
    form: Optional[FormSpec] = None,
) -> ElementTable:
    """Breadth-first product closure of ``gens``.

    Each level multiplies the frontier, in order, on the right by every
    generator in list order; the first occurrence of a new product fixes
    its index. This is the sequential BFS order, computed a level at a time.
    """
    if not gens:
        raise DimensionMismatch("closure needs at least one generator")
    if cap <= 0:
        raise ValueError(f"cap must be positive, got {cap}")
    field, n = gens[0].field, gens[0].n
    for g in gens:
        if g.field != field:
            raise FieldMismatch(f"generator over {g.field}, expected {field}")
        if g.n != n:
            raise DimensionMismatch(f"generator of size {g.n}, expected {n}")
        if det(g).code == 0:
            raise NonInvertibleGenerator(f"generator {g.to_list()} is singular")
    encoding_weights(field, n)

    gen_arr = np.stack([g.entries for g in gens]).astype(CODE_DTYPE)
    k = len(gens)
    ident = np.eye(n, dtype=CODE_DTYPE)[None]

    blocks = [ident]
    code_blocks = [batch_encode(field, ident)]
    parent_blocks = [np.array([-1], dtype=np.int64)]
    via_blocks = [np.array([-1], dtype=np.int64)]
    level_starts = [0]
    seen = code_blocks[0].copy()
    frontier, frontier_ids = ident, np.array([0], dtype=np.int64)
    total = 1

    while len(frontier):
        cand = np.empty(len(frontier) * k, dtype=np.int64)
        for s in range(0, len(frontier), CHUNK):
            chunk = frontier[s : s + CHUNK]
            prods = batch_matmul(field, chunk[:, None], gen_arr[None])
            cand[s * k : (s + len(chunk)) * k] = batch_encode(field, prods).ravel()
        uniq, first = np.unique(cand, return_index=True)
        pos = np.minimum(np.searchsorted(seen, uniq), len(seen) - 1)
        fresh = seen[pos] != uniq
        keep = np.sort(first[fresh])
        if not len(keep):
            break
        if total + len(keep) > cap:
            raise BudgetExceeded(
                f"closure exceeded the budget of {cap} elements", partial=total + len(keep)
            )
        new_codes = cand[keep]
        level_starts.append(total)
        code_blocks.append(new_codes)
        parent_blocks.append(frontier_ids[keep // k])
        via_blocks.append(keep % k)
        frontier = batch_decode(field, n, new_codes)
        blocks.append(frontier)
        frontier_ids = np.arange(total, total + len(keep), dtype=np.int64)
        total += len(keep)
        seen = np.sort(np.concatenate([seen, new_codes]))
        logger.debug(f"closure level {len(level_starts) - 1}: +{len(keep)} -> {total}")

    table = ElementTable(
        field=field,
        gens=gen_arr,
        elements=np.concatenate(blocks),
        codes=np.concatenate(code_blocks),
        parent=np.concatenate(parent_blocks),
        via=np.concatenate(via_blocks),
        level_starts=level_starts,
        spec=spec,
        form=form,
    )
    logger.info(f"Enumerated {table!r} in {len(level_starts)} levels")
    return table


def subgroup_closure(
    G: ElementTable, gen_ids: Sequence[int], limit: Optional[int] = None
) -> Optional[SubgroupHandle]:
    """Subgroup of G generated by the given indices; None once it outgrows ``limit``."""
    gens = np.asarray([int(g) for g in dict.fromkeys(int(g) for g in gen_ids) if int(g) != 0], dtype=np.int64)
    members = np.zeros(1, dtype=np.int64)
    frontier = members
    while len(frontier) and len(gens):
        prods = G.mul_ids(frontier[:, None], gens[None, :]).ravel()
        if np.any(prods < 0):
            raise ValueError("generator products left the table")
        new = np.unique(prods)
        new = new[~contains(members, new)]
        if not len(new):
            break
        members = np.union1d(members, new)
        if limit is not None and len(members) > limit:
            return None
        frontier = new
    return SubgroupHandle(G, members, tuple(int(g) for g in gens))


def subgroup_generators(H: SubgroupHandle) -> Tuple[int, ...]:
    """Greedy generating set: add the least member not yet generated."""
    G = H.parent
    gens: List[int] = []
    current = G.trivial()
    while current.order < H.order:
        missing = H.members[~contains(current.members, H.members)]
        gens.append(int(missing[0]))
        current = subgroup_closure(G, gens)
    return tuple(gens)


# ---------------------------------------------------------------------------
# Subgroup operations

def center(G: ElementTable) -> SubgroupHandle:
    """Elements commuting with every generator."""
    return centralizer(G, G.gen_ids)


def centralizer(G: ElementTable, ids: Iterable[int]) -> SubgroupHandle:
    """Elements of G commuting with every listed element."""
    central = np.ones(G.order, dtype=bool)
    for i in ids:
        g = G.elements[int(i)]
        for s in range(0, G.order, CHUNK):
            block = G.elements[s : s + CHUNK]
            central[s : s + CHUNK] &= np.all(
                batch_matmul(G.field, block, g) == batch_matmul(G.field, g, block), axis=(1, 2)
            )
    return SubgroupHandle(G, np.nonzero(central)[0])


def conjugate_subgroup(H: SubgroupHandle, g: int) -> SubgroupHandle:
    """H^g = {g^-1 h g : h in H}."""
    G = H.parent
    G.check_index(g)
    gens = None
    if H.gen_ids is not None:
        gens = tuple(int(x) for x in G.conjugate_ids(np.asarray(H.gen_ids, dtype=np.int64), g))
    return SubgroupHandle(G, G.conjugate_ids(H.members, g), gens)


def intersect(parts: Sequence[SubgroupHandle]) -> SubgroupHandle:
    if not parts:
        raise ValueError("intersect needs at least one subgroup")
    G = parts[0].parent
    members = parts[0].members
    for part in parts[1:]:
        if part.parent is not G:
            raise ParentMismatch("subgroups belong to different tables")
        members = np.intersect1d(members, part.members, assume_unique=True)
    return SubgroupHandle(G, members)


def kernel_HG(G: ElementTable, H: SubgroupHandle) -> SubgroupHandle:
    """Largest normal subgroup of G inside H (the core of H)."""
    if H.parent is not G:
        raise ParentMismatch("H is not a subgroup of this table")
    K = H
    stable = False
    while not stable:
        stable = True
        for s in G.gen_ids:
            conj = conjugate_subgroup(K, s)
            if conj != K:
                K = intersect([K, conj])
                stable = False
    return K


def is_normal(G: ElementTable, H: SubgroupHandle) -> bool:
    return all(conjugate_subgroup(H, s) == H for s in G.gen_ids)


def is_abelian(H: SubgroupHandle) -> bool:
    G = H.parent
    gens = np.asarray(H.generators(), dtype=np.int64)
    if len(gens) < 2:
        return True
    a, b = np.meshgrid(gens, gens)
    return bool(np.array_equal(G.mul_ids(a, b), G.mul_ids(b, a)))


def element_orders(G: ElementTable, ids: Optional[np.ndarray] = None) -> np.ndarray:
    """Orders of the listed elements (all elements by default)."""
    ids = np.arange(G.order, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64)
    orders = np.zeros(len(ids), dtype=np.int64)
    orders[ids == 0] = 1
    todo = np.nonzero(ids != 0)[0]
    power = ids[todo].copy()
    k = 1
    while len(todo):
        power = G.mul_ids(power, ids[todo])
        k += 1
        done = power == 0
        orders[todo[done]] = k
        todo, power = todo[~done], power[~done]
    return orders


def commutator_ids(G: ElementTable, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[a, b] = a^-1 b^-1 a b."""
    inv = G.inverse
    return G.mul_ids(G.mul_ids(inv[a], inv[b]), G.mul_ids(a, b))


def normal_closure(within: SubgroupHandle, gen_ids: Sequence[int]) -> SubgroupHandle:
    """Smallest subgroup normalised by ``within`` that contains gen_ids."""
    G = within.parent
    gens = list(dict.fromkeys(int(g) for g in gen_ids))
    K = subgroup_closure(G, gens)
    while True:
        extra = []
        for s in within.generators():
            conj = G.conjugate_ids(np.asarray(K.generators(), dtype=np.int64), s)
            extra.extend(int(c) for c in conj if not contains(K.members, np.asarray([c]))[0])
        if not extra:
            return K
        gens = list(dict.fromkeys(list(K.generators()) + extra))
        K = subgroup_closure(G, gens)


def derived_subgroup(H: SubgroupHandle) -> SubgroupHandle:
    gens = np.asarray(H.generators(), dtype=np.int64)
    if len(gens) < 2:
        return H.parent.trivial()
    a, b = np.meshgrid(gens, gens)
    comms = commutator_ids(H.parent, a.ravel(), b.ravel())
    comms = [int(c) for c in comms if c != 0]
    if not comms:
        return H.parent.trivial()
    return normal_closure(H, comms)


def is_solvable(H: SubgroupHandle) -> bool:
    """Walk the derived series until it is trivial or stops shrinking."""
    current = H
    while current.order > 1:
        nxt = derived_subgroup(current)
        logger.debug(f"derived series: {current.order} -> {nxt.order}")
        if nxt.order == current.order:
            return False
        current = nxt
    return True


def conjugating_element(G: ElementTable, H1: SubgroupHandle, H2: SubgroupHandle) -> Optional[int]:
    """Least index g with H1^g = H2, or None."""
    if H1.order != H2.order:
        return None
    gens = np.asarray(H1.generators(), dtype=np.int64)
    if not len(gens):
        return 0
    inv = G.inverse
    step = max(1, CHUNK // len(gens))
    for s in range(0, G.order, step):
        g = np.arange(s, min(s + step, G.order), dtype=np.int64)
        conj = G.mul_ids(G.mul_ids(inv[g][:, None], gens[None, :]), g[:, None])
        ok = np.all(contains(H2.members, conj), axis=1)
        if np.any(ok):
            return int(g[np.argmax(ok)])
    return None


# ---------------------------------------------------------------------------
# Hall subgroups

def pi_part(order: int, pi: Iterable[int]) -> int:
    """Largest divisor of ``order`` built from primes in pi."""
    primes = set(pi)
    part = 1
    for r, e in factorint(order).items():
        if r in primes:
            part *= r**e
    return part


def prime_divisors(order: int) -> List[int]:
    return [int(r) for r in primefactors(order)]


def is_pi_number(k: int, pi: Iterable[int]) -> bool:
    return pi_part(k, pi) == k


def is_hall_pi(H: SubgroupHandle, G: ElementTable, pi: Iterable[int]) -> bool:
    if H.parent is not G:
        raise ParentMismatch("H is not a subgroup of this table")
    return H.order == pi_part(G.order, pi)


def _pi_elements(G: ElementTable, ids: np.ndarray, pi: Iterable[int]) -> np.ndarray:
    """Non-identity pi-elements among ids, ordered by (order, index)."""
    ids = np.asarray(ids, dtype=np.int64)
    ids = ids[ids != 0]
    orders = element_orders(G, ids)
    keep = np.array([is_pi_number(int(o), pi) for o in orders], dtype=bool)
    ids, orders = ids[keep], orders[keep]
    return ids[np.lexsort((ids, orders))]


def search_hall_in(
    G: ElementTable,
    pi: Iterable[int],
    pool_ids: np.ndarray,
    target: int,
    budget: int,
) -> Optional[SubgroupHandle]:
    """Depth-first search for a subgroup of order ``target`` generated from the pool.

    Each step adds one pool element to the current subgroup and keeps the
    result only if its order divides ``target``. Visited subgroups are
    memoised, so the search is exhaustive over pi-subgroups reachable from
    the pool.
    """
    if target == 1:
        return G.trivial()
    pool = _pi_elements(G, pool_ids, pi)
    visited: Set[bytes] = set()
    steps = 0

    def extend(K: SubgroupHandle, gens: Tuple[int, ...]) -> Optional[SubgroupHandle]:
        nonlocal steps
        outside = pool[~contains(K.members, pool)]
        for x in outside:
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"Hall search exceeded {budget} steps", partial=len(visited))
            K2 = subgroup_closure(G, gens + (int(x),), limit=target)
            if K2 is None or target % K2.order:
                continue
            key = K2.members.tobytes()
            if key in visited:
                continue
            visited.add(key)
            if K2.order == target:
                return K2
            found = extend(K2, gens + (int(x),))
            if found is not None:
                return found
        return None

    result = extend(G.trivial(), ())
    logger.debug(f"Hall search: {len(visited)} subgroups visited, {steps} steps")
    return result


def structural_hall(
    G: ElementTable, pi: Sequence[int], budget: int = 50_000
) -> Tuple[Optional[SubgroupHandle], Optional[str]]:
    """Search the structural containers of G in turn; the Hall subgroup found and its container."""
    from .hall import candidate_subgroups

    target = pi_part(G.order, pi)
    for container, provenance in candidate_subgroups(G, pi):
        logger.info(f"Searching a Hall {list(pi)}-subgroup inside {provenance} (order {container.order})")
        found = search_hall_in(G, pi, container.members, target, budget)
        if found is not None:
            return found, provenance
    return None, None


def find_hall_pi(
    G: ElementTable,
    pi: Iterable[int],
    strategy: str = "structural",
    budget: int = 50_000,
) -> Optional[SubgroupHandle]:
    """A Hall pi-subgroup of G, or None once the strategy is exhausted.

    ``structural`` searches inside the containers proposed by
    :func:`hallcert.groups.hall.hall_candidates` and does not widen the
    search; ``exhaustive`` searches all of G, as does any group built from
    bare generators.
    """
    pi = sorted(set(pi))
    target = pi_part(G.order, pi)
    if target == 1:
        return G.trivial()
    if target == G.order:
        return G.whole()

    if strategy == "structural" and G.spec is not None:
        found, _ = structural_hall(G, pi, budget)
        if found is None:
            logger.warning(f"No structural container of {G!r} held a Hall {pi}-subgroup")
        return found

    return search_hall_in(G, pi, np.arange(G.order, dtype=np.int64), target, budget)
