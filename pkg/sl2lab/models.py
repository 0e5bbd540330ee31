import hashlib
import json
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator
from sympy import isprime, primerange

from .constants import MAX_PRIME

from .word import Word

Relation = Literal["<=", "<", ">=", ">"]


class ExactInequality(BaseModel):
    """``lhs <relation> rhs`` over integers, cross-multiplied by the caller."""

    model_config = ConfigDict(frozen=True)

    name: str
    lhs: int
    relation: Relation
    rhs: int
    vacuous: bool = False

    @computed_field  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        if self.relation == "<=":
            return self.lhs <= self.rhs
        if self.relation == "<":
            return self.lhs < self.rhs
        if self.relation == ">=":
            return self.lhs >= self.rhs
        return self.lhs > self.rhs


def at_least(name: str, lhs: int, rhs: int, vacuous: bool = False) -> ExactInequality:
    return ExactInequality(name=name, lhs=lhs, relation=">=", rhs=rhs, vacuous=vacuous)


def at_most(name: str, lhs: int, rhs: int) -> ExactInequality:
    return ExactInequality(name=name, lhs=lhs, relation="<=", rhs=rhs)


class GrowthCertificate(BaseModel):
    """One stage of a constructive argument: measured sizes, witnesses, checks."""

    model_config = ConfigDict(frozen=True)

    stage: str
    cardinalities: dict[str, int] = Field(default_factory=dict)
    inequalities: list[ExactInequality] = Field(default_factory=list)
    witnesses: dict[str, list[int]] = Field(default_factory=dict)
    measured: dict[str, float] = Field(default_factory=dict)
    flags: list[str] = Field(default_factory=list)

    @computed_field  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return all(inequality.passed for inequality in self.inequalities)


class RuzsaCover(BaseModel):
    model_config = ConfigDict(frozen=True)

    representatives: list[int]
    covers: bool
    bound: ExactInequality


class SumProductStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    size: int
    sumset: int
    productset: int
    exponent: float


class SorgeCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    xi: int
    dilate_sum: int
    bound: ExactInequality
    c: str
    scaled_hits: int
    scaled_hits_bound: ExactInequality


class ExpanderImage(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    q: int
    base_size: int
    ball_size: int
    image_size: int
    exponent: float


class BfsResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    diameter: int
    spheres: list[int]


class GirthResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    girth: Optional[int]
    max_len: int
    relation: Optional[Word] = None


class SpectralResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda2: float
    gap: float
    method: Literal["dense", "power"]
    iterations: int = 0
    residual: float = 0.0
    curves: dict[str, float] = Field(default_factory=dict)


class PairRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    trial: int
    g: list[int]
    h: list[int]
    generates: Optional[bool]
    girth: Optional[int]
    diameter: Optional[int]


class PairStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int
    girth_bound: int
    records: list[PairRecord]

    @computed_field  # type: ignore[misc]
    @property
    def generating_fraction(self) -> float:
        if not self.records:
            return 0.0
        return sum(bool(r.generates) for r in self.records) / len(self.records)

    @computed_field  # type: ignore[misc]
    @property
    def short_loop_fraction(self) -> float:
        generating = [r for r in self.records if r.generates]
        if not generating:
            return 0.0
        short = [r for r in generating if r.girth is not None and r.girth <= self.girth_bound]
        return len(short) / len(generating)


class FreeWordReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int
    max_len: int
    trials: int
    violations: int
    integer_identities: int
    widened: int


class Record(BaseModel):
    """One line of experiment output."""

    model_config = ConfigDict(frozen=True)


class CayleyRecord(Record):
    p: int
    trial: int
    generates: Optional[bool] = None
    girth: Optional[int] = None
    diameter: Optional[int] = None
    mixing_n: Optional[int] = None
    lambda2: Optional[float] = None
    seed: int
    config_hash: str = ""


class GrowthRecord(Record):
    p: int
    trial: int
    seed: int
    size: int
    passed: bool
    error: Optional[str] = None
    chain: list[GrowthCertificate] = Field(default_factory=list)
    config_hash: str = ""


class SumProductRecord(Record):
    p: int
    trial: int
    seed: int
    stats: SumProductStats
    ruzsa: ExactInequality
    config_hash: str = ""


class SorgeRecord(Record):
    p: int
    trial: int
    seed: int
    certificate: Optional[SorgeCertificate] = None
    error: Optional[str] = None
    config_hash: str = ""


class AttacRecord(Record):
    p: int
    trial: int
    seed: int
    size: int
    unipotents: int = 0
    max_word_len: int = 0
    error: Optional[str] = None
    config_hash: str = ""


class FactorizeRecord(Record):
    p: int
    trial: int
    seed: int
    target: str
    length: Optional[int] = None
    word: Optional[Word] = None
    error: Optional[str] = None
    config_hash: str = ""


class FreeWordRecord(Record):
    seed: int
    report: FreeWordReport
    config_hash: str = ""


class FixtureRecord(Record):
    p: int
    kind: str
    size: int
    generates: Optional[bool]
    product_size: int
    triple_size: int
    tripling_exponent: float
    furcht: GrowthCertificate
    seed: int = 0
    config_hash: str = ""


class SummaryRecord(Record):
    command: str
    seed: int
    records: int
    failures: int
    stats: dict[str, float] = Field(default_factory=dict)
    config_hash: str = ""


class ExperimentConfig(BaseModel):
    """Validated configuration of one run, hashed for provenance."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: str
    p: Optional[int] = None
    p_range: Optional[str] = Field(default=None, pattern=r"^\d+:\d+$")
    gens: Optional[str] = None
    trials: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = Field(default=None, ge=0)
    format: Literal["csv", "json"] = "json"
    depth_cap: Optional[int] = Field(default=None, gt=0)
    size_cap: Optional[int] = Field(default=None, gt=0)
    force: bool = False
    options: dict[str, Any] = Field(default_factory=dict)

    @computed_field  # type: ignore[misc]
    @property
    def config_hash(self) -> str:
        payload = json.dumps(
            self.model_dump(mode="json", exclude={"config_hash"}), sort_keys=True
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @field_validator("p")
    @classmethod
    def _odd_prime(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and not (value > 2 and value < MAX_PRIME and isprime(value)):
            raise ValueError(f"{value} is not an odd prime below 2^31.")
        return value

    @field_validator("p_range")
    @classmethod
    def _prime_range(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        low, high = (int(bound) for bound in value.split(":"))
        if low > high:
            raise ValueError(f"Range {value} is not ordered.")
        if high >= MAX_PRIME or next(iter(primerange(max(low, 3), high + 1)), None) is None:
            raise ValueError(f"Range {value} holds no odd prime below 2^31.")
        return value
