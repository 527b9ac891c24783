from enum import Enum
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from backend.api.config import settings
from backend.core.linalg import frozen
from backend.models.network_model import OpenCircuit, ParameterKind


class Fidelity(str, Enum):
    GENERAL = "general"
    UNILATERAL = "unilateral"
    MATCHED_WITH_RIS_COUPLING = "matched_with_ris_coupling"
    MATCHED = "matched"
    WIDELY_USED = "widely_used"
    WIDELY_USED_NEUMANN = "widely_used_neumann"


class ChannelMatrix(BaseModel):
    """v_R = H v_T for one fidelity level."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    h: np.ndarray
    fidelity: Fidelity

    @field_validator("h", mode="before")
    @classmethod
    def _freeze(cls, v):
        arr = frozen(np.atleast_2d(v))
        if not np.all(np.isfinite(arr)):
            raise ValueError("channel has non-finite entries")
        return arr


class ChannelBlocks(BaseModel):
    """The RT, RI, IT blocks of one parameter kind, plus the optional RIS block II."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: ParameterKind
    rt: np.ndarray
    ri: np.ndarray
    it: np.ndarray
    ii: Optional[np.ndarray] = None
    z0: float = Field(default_factory=lambda: settings.z0, gt=0)

    @field_validator("rt", "ri", "it", "ii", mode="before")
    @classmethod
    def _freeze(cls, v):
        return None if v is None else frozen(np.atleast_2d(v))

    @model_validator(mode="after")
    def _check_shapes(self):
        n_r, n_t = self.rt.shape
        n_i = self.ri.shape[1]
        if self.ri.shape[0] != n_r or self.it.shape != (n_i, n_t):
            raise ValueError(
                f"inconsistent block shapes RT{self.rt.shape} RI{self.ri.shape} IT{self.it.shape}"
            )
        if self.ii is not None and self.ii.shape != (n_i, n_i):
            raise ValueError(f"II block shape {self.ii.shape} does not match n_i={n_i}")
        return self

    @property
    def n_t(self) -> int:
        return self.rt.shape[1]

    @property
    def n_r(self) -> int:
        return self.rt.shape[0]

    @property
    def n_i(self) -> int:
        return self.ri.shape[1]


class ParameterMapping(BaseModel):
    """Y- and S-blocks obtained from Z-blocks."""
    model_config = ConfigDict(frozen=True)

    y: ChannelBlocks
    s: ChannelBlocks


class TerminationProblem(BaseModel):
    """x = c + blkdiag(a1, a2, a3) y, y = a x, with c = (c1, 0, 0)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: np.ndarray
    c1: np.ndarray
    a1: np.ndarray
    a2: Union[np.ndarray, OpenCircuit]
    a3: np.ndarray

    @field_validator("a", "a1", "a3", mode="before")
    @classmethod
    def _freeze_matrix(cls, v):
        return frozen(np.atleast_2d(v))

    @field_validator("a2", mode="before")
    @classmethod
    def _freeze_a2(cls, v):
        return v if isinstance(v, OpenCircuit) else frozen(np.atleast_2d(v))

    @field_validator("c1", mode="before")
    @classmethod
    def _freeze_vector(cls, v):
        return frozen(np.ravel(v))

    @model_validator(mode="after")
    def _check_dimensions(self):
        n1, n2, n3 = self.sizes
        n = n1 + n2 + n3
        if self.a.shape != (n, n):
            raise ValueError(f"A has shape {self.a.shape}, expected {(n, n)}")
        if self.c1.shape != (n1,):
            raise ValueError(f"c1 has length {self.c1.shape[0]}, expected {n1}")
        for name, m in (("a1", self.a1), ("a3", self.a3)):
            if m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be square")
        if not self.a2_open and self.a2.shape[0] != self.a2.shape[1]:
            raise ValueError("a2 must be square")
        return self

    @property
    def a2_open(self) -> bool:
        return isinstance(self.a2, OpenCircuit)

    @property
    def sizes(self):
        n2 = self.a2.size if self.a2_open else self.a2.shape[0]
        return (self.a1.shape[0], n2, self.a3.shape[0])

    def slices(self):
        n1, n2, n3 = self.sizes
        return slice(0, n1), slice(n1, n1 + n2), slice(n1 + n2, n1 + n2 + n3)


class FrameworkSolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    y: np.ndarray

    @field_validator("x1", "x2", "x3", "y", mode="before")
    @classmethod
    def _freeze(cls, v):
        return frozen(np.ravel(v))

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.x1, self.x2, self.x3])
