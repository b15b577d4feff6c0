"""Pydantic models for group specifications, verdicts, certificates and runs."""

import json
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator
from sympy import isprime

from .field import FieldSpec, field_for, make_field
from .matrix import Epsilon, Matrix, from_codes


class Family(str, Enum):
    """Matrix group families that can be built from a GroupSpec."""

    GL = "GL"
    SL = "SL"
    GU = "GU"
    SU = "SU"
    GSp = "GSp"
    Sp = "Sp"
    GO = "GO"
    O = "O"
    SO = "SO"
    USER = "user"

    @property
    def is_unitary(self) -> bool:
        return self in (Family.GU, Family.SU)

    @property
    def is_orthogonal(self) -> bool:
        return self in (Family.GO, Family.O, Family.SO)

    @property
    def is_symplectic(self) -> bool:
        return self in (Family.GSp, Family.Sp)

    @property
    def hat(self) -> "Family":
        """The similitude or general family the existence criteria work in."""
        return {
            Family.SL: Family.GL,
            Family.SU: Family.GU,
            Family.Sp: Family.GSp,
            Family.O: Family.GO,
            Family.SO: Family.GO,
        }.get(self, self)


# Minimum dimensions for theorem checks, per general family.
MIN_DIMENSION = {Family.GL: 2, Family.GU: 3, Family.GSp: 4, Family.GO: 7}


class GroupSpec(BaseModel):
    """A classical matrix group G(n, q), optionally with an orthogonal type."""

    model_config = ConfigDict(frozen=True)

    family: Family = Field(..., description="Group family")
    n: int = Field(..., description="Matrix dimension", ge=1)
    q: int = Field(..., description="Order of the base field F_q", ge=2)
    epsilon: Optional[Epsilon] = Field(default=None, description="Orthogonal type (+, -, circ)")

    @model_validator(mode="before")
    @classmethod
    def default_epsilon(cls, data: Any) -> Any:
        if isinstance(data, dict):
            family = data.get("family")
            family = family.value if isinstance(family, Family) else family
            if family in ("GO", "O", "SO") and data.get("epsilon") is None and data.get("n", 0) % 2:
                data = {**data, "epsilon": Epsilon.CIRC}
        return data

    @computed_field
    @property
    def u(self) -> int:
        return 2 if self.family.is_unitary else 1

    @property
    def label(self) -> str:
        eps = ""
        if self.epsilon is not None:
            eps = "o" if self.epsilon == Epsilon.CIRC else self.epsilon.value
        return f"{self.family.value}{eps}_{self.n}({self.q})"

    @property
    def p(self) -> int:
        return self.field().p

    def field(self) -> FieldSpec:
        """Field the matrices live over: F_q, or F_{q^2} for unitary groups."""
        base = field_for(self.q)
        if self.u == 2:
            return make_field(base.p, 2 * base.f)
        return base

    @classmethod
    def from_flag(cls, family: str, n: int, q: int) -> "GroupSpec":
        """Parse CLI family names such as GL, GSp, GO+, GO-, GOo, SO+."""
        name = family.strip()
        epsilon: Optional[Epsilon] = None
        for suffix, eps in (("+", Epsilon.PLUS), ("-", Epsilon.MINUS), ("o", Epsilon.CIRC)):
            base = name[: -len(suffix)]
            if name.endswith(suffix) and base in ("GO", "O", "SO"):
                name, epsilon = base, eps
                break
        return cls(family=Family(name), n=n, q=q, epsilon=epsilon)


class Verdict(str, Enum):
    """Outcome of checking an intersection of conjugates."""

    CENTRAL_CONTAINMENT = "CentralContainment"
    KERNEL_EQUALS_CORE = "KernelEqualsCore"
    FAILED = "Failed"


class EpiVerdict(BaseModel):
    """Whether G has a Hall pi-subgroup, and which clause decided it."""

    group: GroupSpec = Field(..., description="Group the verdict is about")
    pi: List[int] = Field(..., description="The prime set, sorted")
    exists: Optional[bool] = Field(..., description="True/False, or None when no criterion applies")
    case_label: str = Field(..., description="Clause that decided the verdict")
    r: Optional[int] = Field(default=None, description="Least prime of pi meeting |G|")
    tau: List[int] = Field(default_factory=list, description="The remaining primes of pi meeting |G|")
    a: Optional[int] = Field(default=None, description="e(r, q)")
    b: Optional[int] = Field(default=None, description="Common e(s, q) over s in tau")
    pi_of_group: List[int] = Field(default_factory=list, description="Prime divisors of |G|")
    alternatives: Dict[str, bool] = Field(
        default_factory=dict, description="Clauses evaluated under an alternative reading"
    )
    notes: List[str] = Field(default_factory=list, description="Warnings raised while evaluating")

    @property
    def status(self) -> str:
        if self.exists is None:
            return "NoCriterion"
        return "Exists" if self.exists else "ExistsNo"


MatrixJSON = List[List[List[int]]]


def matrix_to_json(m: Matrix) -> MatrixJSON:
    """Row-major entries, each as a coefficient list (constant term first)."""
    from .field import decode

    return [[list(decode(m.field, c)) for c in row] for row in m.entries.tolist()]


def matrix_from_json(field: FieldSpec, data: MatrixJSON) -> Matrix:
    from .field import encode

    return from_codes(field, [[encode(field, coeffs) for coeffs in row] for row in data])


class SubgroupRecord(BaseModel):
    """A subgroup of an enumerated group: parent spec, member indices, generators."""

    group: GroupSpec = Field(..., description="Parent group")
    order: int = Field(..., description="Subgroup order", ge=1)
    members: List[int] = Field(..., description="Sorted member indices in the parent table")
    generators: List[MatrixJSON] = Field(default_factory=list, description="Generating matrices")


class Certificate(BaseModel):
    """A replayable record of an intersection-of-conjugates check."""

    group: GroupSpec = Field(..., description="Ambient group")
    field: FieldSpec = Field(..., description="Field of the matrices")
    cap: int = Field(..., description="Enumeration budget used to build the group")
    pi: List[int] = Field(default_factory=list, description="Prime set of the Hall subgroup")
    group_order: int = Field(..., description="|G|")
    hall: SubgroupRecord = Field(..., description="The subgroup H")
    witnesses: List[MatrixJSON] = Field(default_factory=list, description="Conjugating elements")
    witness_indices: List[int] = Field(default_factory=list, description="Indices of the witnesses")
    intersection_order: int = Field(..., description="|H cap H^x1 cap ...|")
    intersection_members: List[int] = Field(default_factory=list, description="Member indices")
    kernel_order: int = Field(..., description="|H_G|")
    center_order: int = Field(..., description="|Z(G)|")
    central: bool = Field(..., description="Intersection lies in Z(G)")
    equals_kernel: bool = Field(..., description="Intersection equals H_G")
    verdict: Verdict = Field(..., description="Overall verdict")
    method: str = Field(default="explicit", description="How the witnesses were obtained")
    seed: int = Field(default=0, description="Search seed")
    budget: int = Field(default=0, description="Search budget")
    change_of_basis: Optional[MatrixJSON] = Field(
        default=None, description="Adapted basis the witnesses were written in"
    )
    group_generators: List[MatrixJSON] = Field(
        default_factory=list, description="Generators of G when it is not a standard family"
    )

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2)


class Bound(BaseModel):
    """Exact value, or a one-sided bound when a search stopped early."""

    value: int = Field(..., description="The value or the bound")
    exact: bool = Field(default=True, description="False when value is only a bound")
    relation: str = Field(default="=", description="'=', '>' (greater than) or '>=' (at least)")
    tuples: List[List[int]] = Field(default_factory=list, description="Witness tuples, if any")

    def __str__(self) -> str:
        return str(self.value) if self.relation == "=" else f"{self.relation}{self.value}"


class TheoremReport(BaseModel):
    """Everything checked for one (G, pi) instance."""

    group: GroupSpec
    pi: List[int]
    status: str = Field(..., description="Verified, Failed, OutOfScope, ExistsNo, NoHall or Budget")
    epi: Optional[EpiVerdict] = None
    group_order: Optional[int] = None
    hall_order: Optional[int] = None
    hall_solvable: Optional[bool] = None
    hall_abelian: Optional[bool] = None
    hall_in_det_one: Optional[bool] = Field(default=None, description="H cap (G cap SL) is Hall in G cap SL")
    provenance: Optional[str] = Field(default=None, description="Container the Hall subgroup was found in")
    base_size: Optional[Bound] = None
    reg: Optional[Bound] = None
    reg_m: int = 5
    comparisons: Dict[str, Optional[bool]] = Field(default_factory=dict)
    certificate: Optional[Certificate] = None
    notes: List[str] = Field(default_factory=list)


def parse_pi(value: Union[str, List[int], Tuple[int, ...], None]) -> List[int]:
    """Parse '2,5' (or a list) into a sorted list of distinct primes."""
    if value is None:
        return []
    items = value.split(",") if isinstance(value, str) else list(value)
    primes = sorted({int(str(x).strip()) for x in items if str(x).strip()})
    bad = [x for x in primes if not isprime(x)]
    if bad:
        raise ValueError(f"pi must contain primes only, got {bad}")
    return primes


class Command(str, Enum):
    FIELD = "field"
    GROUP_ORDER = "group-order"
    EPI = "epi"
    HALL_FIND = "hall-find"
    WITNESS_VERIFY = "witness-verify"
    BASE = "base"
    REG = "reg"
    THEOREM_CHECK = "theorem-check"
    REPLAY = "replay"


class RunConfig(BaseModel):
    """One run of the tool, from CLI flags, a config file or a manifest row."""

    name: Optional[str] = Field(default=None, description="Label for batch rows")
    command: Command = Field(default=Command.THEOREM_CHECK, description="What to run")
    family: Optional[str] = Field(default=None, description="GL, SL, GU, SU, GSp, Sp, GO+, GO-, GOo, ...")
    n: Optional[int] = Field(default=None, description="Dimension", ge=1)
    q: Optional[int] = Field(default=None, description="Field order", ge=2)
    f: int = Field(default=1, description="Extension degree for the field command", ge=1)
    pi: List[int] = Field(default_factory=list, description="Prime set")
    cap: Optional[int] = Field(default=None, description="Enumeration budget", gt=0)
    seed: int = Field(default=0, description="Search seed")
    kmax: Optional[int] = Field(default=None, description="Maximum number of conjugates/points", ge=1)
    m: Optional[int] = Field(default=None, description="Tuple length for Reg", ge=1)
    method: str = Field(default="exact", description="exact or lower-bound")
    strategy: str = Field(default="structural", description="structural or exhaustive")
    witness: Optional[str] = Field(default=None, description="sp4, search, or a named witness kind")
    out: Optional[str] = Field(default=None, description="Output path")
    replay: Optional[str] = Field(default=None, description="Certificate to replay")

    @field_validator("pi", mode="before")
    @classmethod
    def validate_pi(cls, v):
        return parse_pi(v)

    @field_validator("method")
    @classmethod
    def validate_method(cls, v):
        v = v.replace("_", "-")
        if v not in ("exact", "lower-bound"):
            raise ValueError(f"method must be exact or lower-bound, got {v}")
        return v

    @field_validator("strategy")
    @classmethod
    def validate_strategy(cls, v):
        if v not in ("structural", "exhaustive"):
            raise ValueError(f"strategy must be structural or exhaustive, got {v}")
        return v

    @model_validator(mode="after")
    def check_characteristic(self):
        if self.q is not None and self.pi:
            p = field_for(self.q).p
            if p in self.pi:
                raise ValueError(f"pi must not contain the characteristic {p}")
        return self

    def group_spec(self) -> GroupSpec:
        if self.family is None or self.n is None or self.q is None:
            raise ValueError("--family, --n and --q are required for this command")
        return GroupSpec.from_flag(self.family, self.n, self.q)


class ManifestMeta(BaseModel):
    """Metadata of a batch manifest."""

    name: str = Field(..., description="Manifest name")
    description: Optional[str] = Field(default=None, description="What the manifest covers")


class Manifest(BaseModel):
    """A batch of runs loaded from YAML."""

    meta: ManifestMeta = Field(..., description="Manifest metadata")
    instances: List[RunConfig] = Field(default_factory=list, description="Runs, in output order")


class OrderRecord(BaseModel):
    """|G| from the order formula, with its factorisation."""

    group: GroupSpec
    order: int
    factors: Dict[int, int] = Field(default_factory=dict, description="prime -> exponent")


class BoundRecord(BaseModel):
    """Base size or Reg of the action on the cosets of a Hall subgroup."""

    group: GroupSpec
    pi: List[int]
    quantity: str = Field(..., description="base or reg")
    m: Optional[int] = Field(default=None, description="Tuple length for reg")
    hall_order: int
    omega_size: int = Field(..., description="Number of cosets")
    kernel_order: int = Field(..., description="|H_G|")
    bound: Bound


class BatchRow(BaseModel):
    """One row of the batch summary table."""

    name: str
    command: str
    group: str
    pi: str
    status: str
    exit_code: int
    verdict: str = ""
    base_size: str = ""
    reg: str = ""
    error: str = ""
