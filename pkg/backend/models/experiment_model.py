from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import constants

from backend.api.config import settings
from backend.core.linalg import frozen
from backend.models.channel_model import ChannelBlocks
from backend.models.network_model import ParameterKind, PortPartition
from backend.models.ris_model import ArchitectureFamily, ArchitectureSpec, RISConfiguration


class SISOInstance(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    h_ri: np.ndarray
    h_it: np.ndarray
    p_t: float = Field(default=1.0, gt=0)

    @field_validator("h_ri", "h_it", mode="before")
    @classmethod
    def _freeze(cls, v):
        return frozen(np.ravel(v))

    @model_validator(mode="after")
    def _check_lengths(self):
        if self.h_ri.shape != self.h_it.shape:
            raise ValueError("h_ri and h_it must have the same length")
        return self

    @property
    def n_i(self) -> int:
        return self.h_ri.shape[0]


class MonteCarloPowers(BaseModel):
    n_i: int
    trials: int
    mean_pr: float
    mean_prp: float
    se_pr: float
    se_prp: float

    @property
    def delta_emp(self) -> float:
        return (self.mean_pr - self.mean_prp) / self.mean_pr


class ArrayGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_i: int = Field(ge=1)
    spacing: float
    length: float
    frequency: float = 28e9

    @property
    def wavelength(self) -> float:
        return constants.c / self.frequency

    @classmethod
    def from_wavelengths(cls, n_i: int, spacing_wl: float = 0.25, length_wl: float = 0.25,
                         frequency: float = 28e9) -> "ArrayGeometry":
        lam = constants.c / frequency
        return cls(n_i=n_i, spacing=spacing_wl * lam, length=length_wl * lam, frequency=frequency)


class MIMOScenario(BaseModel):
    """One optimization instance in a single parameter formulation."""
    model_config = ConfigDict(frozen=True)

    blocks: ChannelBlocks
    p_t: float = Field(gt=0)

    @property
    def kind(self) -> ParameterKind:
        return self.blocks.kind

    @property
    def partition(self) -> PortPartition:
        return PortPartition(n_t=self.blocks.n_t, n_i=self.blocks.n_i, n_r=self.blocks.n_r)


class ScenarioSet(BaseModel):
    """The same channel realization in the Z, Y and S formulations."""
    model_config = ConfigDict(frozen=True)

    seed: int
    z: MIMOScenario
    y: MIMOScenario
    s: MIMOScenario


class SolveOptions(BaseModel):
    max_iterations: int = Field(default_factory=lambda: settings.max_outer_iterations, ge=1)
    tolerance: float = Field(default_factory=lambda: settings.tolerance, gt=0)
    seed: int = 0
    inner_iterations: int = Field(default_factory=lambda: settings.inner_iterations, ge=1)
    restarts: int = Field(default=1, ge=1)


class BeamformingSolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: np.ndarray
    g: np.ndarray
    ris: RISConfiguration
    trace: List[float] = Field(default_factory=list)
    converged: bool = False

    @field_validator("w", "g", mode="before")
    @classmethod
    def _freeze(cls, v):
        return frozen(np.ravel(v))

    @property
    def power(self) -> float:
        return self.trace[-1] if self.trace else 0.0

    @property
    def iterations(self) -> int:
        return len(self.trace)


class ArchitectureEntry(BaseModel):
    family: ArchitectureFamily
    group_size: Optional[int] = Field(default=None, ge=1)

    def to_spec(self, n_i: int) -> ArchitectureSpec:
        return ArchitectureSpec(family=self.family, n_i=n_i, group_size=self.group_size)

    @property
    def label(self) -> str:
        if self.family in (ArchitectureFamily.GROUP, ArchitectureFamily.FOREST):
            return f"{self.family.value}-{self.group_size}"
        return self.family.value


def _default_architectures() -> List[ArchitectureEntry]:
    return [
        ArchitectureEntry(family=ArchitectureFamily.SINGLE),
        ArchitectureEntry(family=ArchitectureFamily.GROUP, group_size=4),
        ArchitectureEntry(family=ArchitectureFamily.FULLY),
    ]


def _default_ni_list() -> List[int]:
    return [int(n) for n in settings.default_ni_list.split(",")]


class ScenarioConfig(BaseModel):
    """JSON experiment recipe. Every problem is reported in one error."""
    model_config = ConfigDict(extra="forbid")

    experiment: Literal["optimize", "scatter"] = "optimize"

    # Geometry and propagation
    tx: Tuple[float, float] = (0.0, 0.0)
    ris: Tuple[float, float] = (50.0, 2.0)
    rx: Tuple[float, float] = (52.0, 0.0)
    n_t: int = Field(default=2, ge=1)
    n_r: int = Field(default=2, ge=1)
    n_i_list: List[int] = Field(default_factory=_default_ni_list, min_length=1)
    l0_db: float = -30.0
    alpha_ri: float = Field(default=2.8, gt=0)
    alpha_it: float = Field(default=2.0, gt=0)
    p_t: float = Field(default=0.01, gt=0)
    frequency: float = Field(default=28e9, gt=0)

    # RIS hardware
    architectures: List[ArchitectureEntry] = Field(default_factory=_default_architectures, min_length=1)
    coupling: bool = False
    spacing_wl: float = Field(default=0.25, gt=0)
    length_wl: float = Field(default=0.25, gt=0)

    # Structural-scattering sweep
    channel_model: Literal["los_random_phase", "rayleigh"] = "los_random_phase"

    # Run control
    trials: int = Field(default_factory=lambda: settings.default_trials, ge=1)
    master_seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    output: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)
    max_nonconverged_fraction: float = Field(default=0.05, ge=0, le=1)
    solver: SolveOptions = Field(default_factory=SolveOptions)

    @model_validator(mode="after")
    def _check_recipe(self):
        problems = []
        for name, (a, b) in (("RIS-TX", (self.ris, self.tx)), ("RX-RIS", (self.rx, self.ris))):
            if np.hypot(a[0] - b[0], a[1] - b[1]) <= 0:
                problems.append(f"{name} distance must be positive")
        for n_i in self.n_i_list:
            if n_i < 1:
                problems.append(f"n_i={n_i} must be at least 1")
                continue
            for entry in self.architectures:
                if entry.family in (ArchitectureFamily.GROUP, ArchitectureFamily.FOREST):
                    if entry.group_size is None:
                        problems.append(f"{entry.family.value} architecture needs group_size")
                    elif n_i % entry.group_size:
                        problems.append(f"group_size {entry.group_size} does not divide n_i={n_i}")
        if self.coupling:
            for entry in self.architectures:
                if entry.family in (ArchitectureFamily.TREE, ArchitectureFamily.FOREST):
                    problems.append(f"{entry.family.value} architecture is not supported with coupling")
        if problems:
            raise ValueError("; ".join(dict.fromkeys(problems)))
        return self

    @property
    def d_ri(self) -> float:
        return float(np.hypot(self.rx[0] - self.ris[0], self.rx[1] - self.ris[1]))

    @property
    def d_it(self) -> float:
        return float(np.hypot(self.ris[0] - self.tx[0], self.ris[1] - self.tx[1]))


class ExperimentRecord(BaseModel):
    n_i: int
    architecture: str
    coupling: bool
    trial: int
    seed: int
    solver_seed: int
    power_w: float = Field(ge=0)
    power_db: float
    iterations: int
    converged: bool
    wall_time: float


class SummaryRow(BaseModel):
    n_i: int
    architecture: str
    coupling: bool
    trials: int
    mean_power_w: float
    mean_power_db: float
    se_power_w: float
    nonconverged: int


class ScatterRow(BaseModel):
    ni: int
    mean_pr_db: float
    mean_prp_db: float
    delta_emp: float
    delta_closed: Optional[float] = None  # LoS closed form only


class SweepResult(BaseModel):
    master_seed: int
    records: List[ExperimentRecord] = Field(default_factory=list)
    summary: List[SummaryRow] = Field(default_factory=list)
    scatter: List[ScatterRow] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)

    @property
    def nonconverged_fraction(self) -> float:
        if not self.records:
            return 0.0
        return sum(not r.converged for r in self.records) / len(self.records)


class EquivalenceReport(BaseModel):
    """Worst Z/Y/S disagreement of the general channel over random passive fixtures."""
    seed: int
    fixtures: int
    max_deviation: float
    tolerance: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance
