from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from backend.api.config import settings
from backend.core.linalg import frozen


class ArchitectureFamily(str, Enum):
    SINGLE = "single"
    FULLY = "fully"
    GROUP = "group"
    TREE = "tree"
    FOREST = "forest"


class Parameterization(str, Enum):
    REACTANCE = "reactance"      # X_I, Z_I = jX_I
    SUSCEPTANCE = "susceptance"  # B_I, Y_I = jB_I
    SCATTERING = "scattering"    # Theta


class ArchitectureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: ArchitectureFamily
    n_i: int = Field(ge=1)
    group_size: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_grouping(self):
        if self.family in (ArchitectureFamily.GROUP, ArchitectureFamily.FOREST):
            if self.group_size is None:
                raise ValueError(f"{self.family.value}-connected architecture needs group_size")
            if self.n_i % self.group_size:
                raise ValueError(f"group_size {self.group_size} does not divide n_i={self.n_i}")
        return self

    @property
    def block_size(self) -> int:
        if self.family == ArchitectureFamily.SINGLE:
            return 1
        if self.family in (ArchitectureFamily.FULLY, ArchitectureFamily.TREE):
            return self.n_i
        return self.group_size

    @property
    def n_groups(self) -> int:
        return self.n_i // self.block_size

    @property
    def tridiagonal(self) -> bool:
        return self.family in (ArchitectureFamily.TREE, ArchitectureFamily.FOREST)

    @property
    def label(self) -> str:
        if self.family in (ArchitectureFamily.GROUP, ArchitectureFamily.FOREST):
            return f"{self.family.value}-{self.group_size}"
        return self.family.value

    def group_slices(self) -> List[slice]:
        size = self.block_size
        return [slice(k * size, (k + 1) * size) for k in range(self.n_groups)]

    def block_mask(self) -> np.ndarray:
        """Block-diagonal pattern of the tunable network."""
        mask = np.zeros((self.n_i, self.n_i), dtype=bool)
        for sl in self.group_slices():
            mask[sl, sl] = True
        return mask

    def susceptance_mask(self) -> np.ndarray:
        """Pattern of B_I: tridiagonal within each group for tree/forest."""
        mask = self.block_mask()
        if self.tridiagonal:
            idx = np.arange(self.n_i)
            mask &= np.abs(idx[:, None] - idx[None, :]) <= 1
        return mask

    def mask_for(self, parameterization: "Parameterization") -> np.ndarray:
        if parameterization == Parameterization.SUSCEPTANCE:
            return self.susceptance_mask()
        return self.block_mask()


class RISConfiguration(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    parameterization: Parameterization
    values: np.ndarray
    architecture: ArchitectureSpec
    z0: float = Field(default_factory=lambda: settings.z0, gt=0)

    @field_validator("values", mode="before")
    @classmethod
    def _freeze(cls, v):
        return frozen(np.atleast_2d(v))

    @model_validator(mode="after")
    def _check_shape(self):
        n = self.architecture.n_i
        if self.values.shape != (n, n):
            raise ValueError(f"configuration shape {self.values.shape} does not match n_i={n}")
        return self

    def replace(self, values: np.ndarray,
                parameterization: Optional[Parameterization] = None) -> "RISConfiguration":
        return RISConfiguration(
            parameterization=parameterization or self.parameterization,
            values=values,
            architecture=self.architecture,
            z0=self.z0,
        )


class ConstraintViolation(BaseModel):
    constraint: str
    magnitude: float


class ValidationReport(BaseModel):
    tolerance: float
    violations: List[ConstraintViolation] = Field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def constraints(self) -> List[str]:
        return [v.constraint for v in self.violations]


class AdmittanceComponents(BaseModel):
    """Circuit view of a tunable admittance network.

    ``grounding[n]`` is the admittance from port n to ground and
    ``interconnection[n, m]`` the admittance linking ports n and m.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grounding: np.ndarray
    interconnection: np.ndarray

    @field_validator("grounding", "interconnection", mode="before")
    @classmethod
    def _freeze(cls, v):
        return frozen(v)
