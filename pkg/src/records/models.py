"""
Pydantic models for every record exchanged between modules.
Exact rationals serialize as "num/den" strings, reals as decimal strings.
"""

from datetime import datetime
from enum import Enum
from fractions import Fraction
from math import floor
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple

from mpmath import mp, mpf
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    computed_field,
    field_validator,
    model_validator,
)

from ..numerics.bounded import BoundedValue, format_decimal, to_fraction


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _to_real(v: Any) -> Any:
    if isinstance(v, BoundedValue):
        return v.value
    if isinstance(v, mpf):
        return v
    return to_fraction(v)


def _format_real(v: Any) -> str:
    return format_fraction(v) if isinstance(v, Fraction) else format_decimal(v)


def _to_exact_or_bounded(v: Any) -> Any:
    if isinstance(v, BoundedValue):
        return v
    if isinstance(v, dict):
        return BoundedValue.model_validate(v)
    return to_fraction(v)


def _dump_exact_or_bounded(v: Any) -> Any:
    if isinstance(v, BoundedValue):
        return v.model_dump(mode="json")
    return format_fraction(v)


Rational = Annotated[Fraction, BeforeValidator(to_fraction), PlainSerializer(format_fraction, return_type=str)]
Real = Annotated[Any, BeforeValidator(_to_real), PlainSerializer(_format_real, return_type=str)]
BigInt = Annotated[int, BeforeValidator(int), PlainSerializer(str, return_type=str)]
RationalVector = Tuple[Rational, ...]
# exact rational p-th power, or a bounded real when p is not an integer
CountOrBound = Annotated[
    Any, BeforeValidator(_to_exact_or_bounded), PlainSerializer(_dump_exact_or_bounded)
]


def fold_shift(t: Any) -> Any:
    """Fold a shift into [0, 1/2] via t -> |t mod 1| -> min(t, 1 - t)."""
    if isinstance(t, mpf):
        t = mp.frac(t)
    else:
        t = to_fraction(t)
        t = t - floor(t)
    return min(t, 1 - t)


class Record(BaseModel):
    """Immutable record base"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class PromiseClass(str, Enum):
    """Promise-problem classification"""
    YES = "YES"
    NO = "NO"
    NEITHER = "NEITHER"


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"


class ProblemKind(str, Enum):
    """Instance file kinds"""
    MAXLIN = "maxlin"
    LATTICE = "lattice"
    CVP = "cvp"
    SVP = "svp"
    BDD = "bdd"


class GadgetVariant(str, Enum):
    SVP = "svp"
    BDD = "bdd"


# ============================================================================
# Theta series
# ============================================================================

class ThetaParams(Record):
    """(p, tau, t) with t folded into [0, 1/2]"""
    p: Real
    tau: Real
    t: Real = Fraction(0)

    @field_validator("p")
    @classmethod
    def check_p(cls, v: Any) -> Any:
        if v < 1:
            raise ValueError(f"p must be >= 1, got {v}")
        return v

    @field_validator("tau")
    @classmethod
    def check_tau(cls, v: Any) -> Any:
        if v <= 0:
            raise ValueError(f"tau must be > 0, got {v}")
        return v

    @field_validator("t")
    @classmethod
    def fold_t(cls, v: Any) -> Any:
        return fold_shift(v)


class BetaQuery(Record):
    p: Real
    t: Real
    a: Real

    @field_validator("p")
    @classmethod
    def check_p(cls, v: Any) -> Any:
        if v < 1:
            raise ValueError(f"p must be >= 1, got {v}")
        return v

    @field_validator("t")
    @classmethod
    def fold_t(cls, v: Any) -> Any:
        return fold_shift(v)

    @field_validator("a")
    @classmethod
    def check_a(cls, v: Any) -> Any:
        if v < 0:
            raise ValueError(f"a must be >= 0, got {v}")
        return v


# ============================================================================
# Lattices
# ============================================================================

class RationalMatrix(Record):
    """Exact matrix stored row-major; lattice generators are its columns"""
    rows: int = Field(ge=0)
    cols: int = Field(ge=0)
    entries: Tuple[Tuple[Rational, ...], ...]

    @model_validator(mode="after")
    def check_shape(self) -> "RationalMatrix":
        if len(self.entries) != self.rows:
            raise ValueError(f"expected {self.rows} rows, got {len(self.entries)}")
        for i, row in enumerate(self.entries):
            if len(row) != self.cols:
                raise ValueError(f"row {i} has {len(row)} entries, expected {self.cols}")
        return self

    @classmethod
    def from_rows(cls, rows: List[List[Any]]) -> "RationalMatrix":
        rows = [tuple(r) for r in rows]
        cols = len(rows[0]) if rows else 0
        return cls(rows=len(rows), cols=cols, entries=tuple(rows))

    @classmethod
    def from_columns(cls, columns: List[List[Any]], dim: Optional[int] = None) -> "RationalMatrix":
        columns = [tuple(c) for c in columns]
        d = len(columns[0]) if columns else (dim or 0)
        entries = tuple(tuple(col[i] for col in columns) for i in range(d))
        return cls(rows=d, cols=len(columns), entries=entries)

    @classmethod
    def identity(cls, n: int, scale: Any = 1) -> "RationalMatrix":
        s = to_fraction(scale)
        return cls.from_rows([[s if i == j else 0 for j in range(n)] for i in range(n)])

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i]

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(self.entries[i][j] for i in range(self.rows))

    def columns(self) -> List[Tuple[Fraction, ...]]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.entries for x in row)

    def apply(self, coefficients: Tuple[Any, ...]) -> Tuple[Fraction, ...]:
        """Matrix-vector product B c"""
        return tuple(sum((a * c for a, c in zip(row, coefficients)), Fraction(0)) for row in self.entries)


class LatticeDescription(Record):
    """Generators plus the cached echelon basis (columns, lower triangular by pivot rows)"""
    generators: RationalMatrix
    basis: RationalMatrix
    pivot_rows: Tuple[int, ...]
    rank: int
    dim: int

    @model_validator(mode="after")
    def check_consistency(self) -> "LatticeDescription":
        if self.basis.cols != self.rank or len(self.pivot_rows) != self.rank:
            raise ValueError("basis width, pivot rows and rank disagree")
        if self.basis.rows != self.dim or self.generators.rows != self.dim:
            raise ValueError("ambient dimensions disagree")
        return self


class NormSpec(Record):
    """l_p norm; exact mode when p is an integer"""
    p: Rational

    @field_validator("p")
    @classmethod
    def check_p(cls, v: Fraction) -> Fraction:
        if v < 1:
            raise ValueError(f"p must be >= 1, got {v}")
        return v

    @computed_field
    @property
    def exact_mode(self) -> bool:
        return self.p.denominator == 1


class PointCloud(Record):
    points: Tuple[RationalVector, ...]
    center: RationalVector
    radius_pth_power: CountOrBound
    boundary: Tuple[RationalVector, ...] = ()  # undecidable at current precision

    @property
    def count(self) -> int:
        return len(self.points)


class DistanceResult(Record):
    distance_pth_power: CountOrBound
    witness: RationalVector
    coefficients: Tuple[int, ...]


# ============================================================================
# Problem instances
# ============================================================================

class MaxLinInstance(Record):
    """Linear system M x = v over F_2 with gap parameters c = 5/8, s = c - epsilon"""
    matrix: Tuple[Tuple[int, ...], ...]
    rhs: Tuple[int, ...]
    epsilon: Rational = Fraction(1, 20)

    @field_validator("epsilon")
    @classmethod
    def check_epsilon(cls, v: Fraction) -> Fraction:
        if not (0 < v < Fraction(5, 8)):
            raise ValueError(f"epsilon must lie in (0, 5/8), got {v}")
        return v

    @model_validator(mode="after")
    def check_system(self) -> "MaxLinInstance":
        if not self.matrix or not self.matrix[0]:
            raise ValueError("MAXLIN instance needs m, n >= 1")
        n = len(self.matrix[0])
        if any(len(row) != n for row in self.matrix):
            raise ValueError("ragged constraint matrix")
        if len(self.rhs) != len(self.matrix):
            raise ValueError("right-hand side length differs from the number of equations")
        if any(x not in (0, 1) for row in self.matrix for x in row) or any(x not in (0, 1) for x in self.rhs):
            raise ValueError("entries must be 0 or 1")
        return self

    @property
    def m(self) -> int:
        return len(self.matrix)

    @property
    def n(self) -> int:
        return len(self.matrix[0])

    @property
    def c(self) -> Fraction:
        return Fraction(5, 8)

    @property
    def s(self) -> Fraction:
        return self.c - self.epsilon


class MaxLinSolution(Record):
    assignment: Tuple[int, ...]
    satisfied: int
    m: int


class CvpInstance(Record):
    lattice: LatticeDescription
    target: RationalVector
    radius_pth_power: Rational
    gamma_pth_power: Rational
    norm: NormSpec
    toy: bool = False

    @model_validator(mode="after")
    def check_instance(self) -> "CvpInstance":
        if len(self.target) != self.lattice.dim:
            raise ValueError("target dimension differs from the lattice dimension")
        if self.radius_pth_power <= 0:
            raise ValueError("radius must be positive")
        if self.gamma_pth_power < 1:
            raise ValueError("gamma must be >= 1")
        return self


class SvpInstance(Record):
    lattice: LatticeDescription
    radius_pth_power: Rational
    gamma_pth_power: Rational
    norm: NormSpec
    toy: bool = False

    @model_validator(mode="after")
    def check_instance(self) -> "SvpInstance":
        if self.radius_pth_power <= 0:
            raise ValueError("radius must be positive")
        if self.gamma_pth_power < 1:
            raise ValueError("gamma must be >= 1")
        return self


class BddQuery(Record):
    lattice: LatticeDescription
    target: RationalVector
    alpha: Rational
    norm: NormSpec
    toy: bool = False

    @model_validator(mode="after")
    def check_query(self) -> "BddQuery":
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if len(self.target) != self.lattice.dim:
            raise ValueError("target dimension differs from the lattice dimension")
        return self


# ============================================================================
# Gadgets
# ============================================================================

class ValuationWitness(Record):
    """Residue table summary behind a dyadic gadget shift"""
    z: int = Field(ge=1)
    maximizer_set: Tuple[int, ...]
    chosen_k: int
    nu2_of_k: int
    tau: Optional[Real] = None  # theta parameter the table was built at

    @model_validator(mode="after")
    def check_choice(self) -> "ValuationWitness":
        if self.chosen_k == 0:
            raise ValueError("chosen residue cannot be 0")
        if self.chosen_k not in self.maximizer_set:
            raise ValueError("chosen residue is not a maximizer")
        return self


class GadgetParams(Record):
    """Constants of a locally dense integer gadget"""
    variant: GadgetVariant
    p: Rational
    t: Rational
    tau: Real
    mu: Optional[BoundedValue] = None
    rho: Optional[BoundedValue] = None
    delta: Optional[Rational] = None
    phi0: BoundedValue
    phi1: BoundedValue
    C_r: BoundedValue
    C_r_pth_power: BoundedValue
    sigma: Optional[Rational] = None
    alpha_A: Optional[Rational] = None
    alpha_G: Optional[Rational] = None
    witness: Optional[ValuationWitness] = None

    @field_validator("t")
    @classmethod
    def check_t(cls, v: Fraction) -> Fraction:
        if not (0 <= v <= Fraction(1, 2)):
            raise ValueError(f"shift must lie in [0, 1/2], got {v}")
        return v


class CountRow(Record):
    label: str
    shift: Rational
    radius_pth_power: CountOrBound
    count: int
    upper_bound: BoundedValue
    holds: bool


class GadgetCountReport(Record):
    p: Rational
    d: int
    rows: List[CountRow]
    ratios: Dict[str, float]
    all_bounds_hold: bool
    residues_checked: int
    residues_total: int


class BoundCheck(Record):
    """Observed quantity against a bound"""
    name: str
    observed: float
    bound: float
    holds: bool
    applicable: bool = True
    detail: str = ""


class ClaimCheck(Record):
    name: str
    holds: bool
    exact: bool
    margin: Optional[str] = None


class ReductionArtifacts(Record):
    """Parameters and counts behind a randomized reduction"""
    kind: str
    log_A: BoundedValue
    log_G: BoundedValue
    gap_holds: bool
    d: int
    q: Optional[BigInt] = None
    prime_interval: Optional[Tuple[BigInt, BigInt]] = None
    scaling: Optional[Rational] = None
    alpha_pth_power: Optional[Rational] = None
    radius_pth_power: Optional[CountOrBound] = None
    gamma_pth_power: Optional[Rational] = None
    K: Optional[BoundedValue] = None
    delta: Optional[Rational] = None
    claims: List[ClaimCheck] = Field(default_factory=list)
    min_feasible_m: Optional[int] = None
    seed: Optional[int] = None
    toy: bool = False


# ============================================================================
# Inequality verifier
# ============================================================================

class TruncatedSumSpec(Record):
    n_terms: int = Field(ge=1)
    tau: Rational
    p_lo: Rational
    p_hi: Rational

    @model_validator(mode="after")
    def check_interval(self) -> "TruncatedSumSpec":
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.p_lo < 2 or self.p_hi < self.p_lo:
            raise ValueError("need 2 <= p_lo <= p_hi")
        return self


class TaylorCertificate(Record):
    p0: Rational
    tau: Rational
    n_terms: int
    h_at_p0: BoundedValue
    h_prime_at_p0: BoundedValue
    second_derivative_lower_bound: Rational
    computed_second_derivative_bound: Optional[BoundedValue] = None
    delta_max: Rational
    endpoint_values: Tuple[BoundedValue, BoundedValue]
    verdict: Verdict
    note: str = ""


class AnchorCheck(Record):
    name: str
    value: BoundedValue
    bound: Rational
    holds: bool
    relative_margin: float = 0.0  # guaranteed gap over the bound, divided by the bound


class RegimeReport(Record):
    name: str
    p_lo: Rational
    p_hi: Optional[Rational]  # None means unbounded
    tau: Rational
    verdict: Verdict
    certificates: List[TaylorCertificate] = Field(default_factory=list)
    anchors: List[AnchorCheck] = Field(default_factory=list)
    detail: str = ""


class LemmaReport(Record):
    verdict: Verdict
    regimes: List[RegimeReport]
    coverage_ok: bool
    first_failure: Optional[str] = None


# ============================================================================
# Files and runs
# ============================================================================

class RunManifest(Record):
    command: List[str]
    seed: Optional[int] = None
    precision: int
    toy: bool = False
    version: str
    started_at: datetime = Field(default_factory=datetime.now)
    completed_at: Optional[datetime] = None


class InstanceFile(Record):
    format_version: Literal["1"] = "1"
    kind: ProblemKind
    payload: Dict[str, Any]
    toy: bool = False
    artifacts: Optional[ReductionArtifacts] = None
    manifest: Optional[RunManifest] = None


class Certificate(Record):
    """A verifiable numeric claim bundle written by the verifier"""
    name: str
    verdict: Verdict
    created_at: datetime = Field(default_factory=datetime.now)
    body: Dict[str, Any]
    manifest: Optional[RunManifest] = None


class CheckResult(Record):
    name: str
    passed: bool
    detail: str = ""


class SuiteStats(BaseModel):
    """Statistics for a verification run"""
    suite: str
    started_at: datetime = Field(default_factory=datetime.now)
    completed_at: Optional[datetime] = None
    checks_run: int = 0
    checks_passed: int = 0
    failures: List[str] = Field(default_factory=list)
    artifact_paths: List[str] = Field(default_factory=list)

    def record(self, result: CheckResult) -> None:
        self.checks_run += 1
        if result.passed:
            self.checks_passed += 1
        else:
            self.failures.append(f"{result.name}: {result.detail}")

    @property
    def all_passed(self) -> bool:
        return self.checks_run > 0 and not self.failures

    @property
    def duration_seconds(self) -> float:
        if self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return 0.0
