from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from backend.api.config import settings
from backend.core.linalg import frozen, is_diagonal

BLOCK_NAMES = ("T", "I", "R")


class ParameterKind(str, Enum):
    Z = "Z"
    Y = "Y"
    S = "S"


class OpenCircuit(BaseModel):
    """Explicit infinite-impedance termination of ``size`` ports."""
    model_config = ConfigDict(frozen=True)

    size: int = Field(ge=1)


class PortPartition(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_t: int = Field(ge=1)
    n_i: int = Field(ge=1)
    n_r: int = Field(ge=1)

    @property
    def n(self) -> int:
        return self.n_t + self.n_i + self.n_r

    def sizes(self) -> Tuple[int, int, int]:
        return (self.n_t, self.n_i, self.n_r)

    def slices(self) -> Dict[str, slice]:
        return {
            "T": slice(0, self.n_t),
            "I": slice(self.n_t, self.n_t + self.n_i),
            "R": slice(self.n_t + self.n_i, self.n),
        }


class NetworkMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: ParameterKind
    values: np.ndarray
    partition: PortPartition
    z0: float = Field(default_factory=lambda: settings.z0, gt=0)

    @field_validator("values", mode="before")
    @classmethod
    def _as_frozen_array(cls, v):
        arr = frozen(v)
        if arr.ndim != 2:
            raise ValueError("network matrix must be two-dimensional")
        return arr

    @model_validator(mode="after")
    def _check_shape(self):
        n = self.partition.n
        if self.values.shape != (n, n):
            raise ValueError(f"values shape {self.values.shape} does not match partition size {n}")
        return self

    @property
    def y0(self) -> float:
        return 1.0 / self.z0

    def block(self, name: str) -> np.ndarray:
        """Sub-block by two-letter name, e.g. ``"RT"`` for rows R and columns T."""
        rows, cols = name[0], name[1]
        sl = self.partition.slices()
        return self.values[sl[rows], sl[cols]]

    def blocks(self) -> Dict[str, np.ndarray]:
        return {r + c: self.block(r + c) for r in BLOCK_NAMES for c in BLOCK_NAMES}

    @classmethod
    def from_blocks(cls, kind: ParameterKind, blocks: Dict[str, np.ndarray],
                    partition: PortPartition, z0: Optional[float] = None) -> "NetworkMatrix":
        """Assemble the nine named blocks; missing blocks are zero."""
        sizes = dict(zip(BLOCK_NAMES, partition.sizes()))
        rows = []
        for r in BLOCK_NAMES:
            row = []
            for c in BLOCK_NAMES:
                b = blocks.get(r + c)
                row.append(np.zeros((sizes[r], sizes[c]), dtype=complex) if b is None else b)
            rows.append(row)
        return cls(
            kind=kind,
            values=np.block(rows),
            partition=partition,
            z0=settings.z0 if z0 is None else z0,
        )

    def with_values(self, kind: ParameterKind, values: np.ndarray) -> "NetworkMatrix":
        return NetworkMatrix(kind=kind, values=values, partition=self.partition, z0=self.z0)


class TerminationSet(BaseModel):
    """Source, RIS and load terminations.

    Only the impedances are stored; the admittance and reflection views are
    recomputed on access so they can never disagree with ``z_*``.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    z_t: np.ndarray
    z_i: Union[np.ndarray, OpenCircuit]
    z_r: np.ndarray
    z0: float = Field(default_factory=lambda: settings.z0, gt=0)

    @field_validator("z_t", "z_r", mode="before")
    @classmethod
    def _diagonal_termination(cls, v):
        arr = frozen(np.atleast_2d(v))
        if arr.shape[0] != arr.shape[1] or not is_diagonal(arr):
            raise ValueError("source and load terminations must be diagonal")
        return arr

    @field_validator("z_i", mode="before")
    @classmethod
    def _ris_termination(cls, v):
        if isinstance(v, OpenCircuit):
            return v
        arr = frozen(np.atleast_2d(v))
        if arr.shape[0] != arr.shape[1]:
            raise ValueError("RIS termination must be square")
        return arr

    @property
    def ris_open(self) -> bool:
        return isinstance(self.z_i, OpenCircuit)

    @property
    def n_i(self) -> int:
        return self.z_i.size if self.ris_open else self.z_i.shape[0]

    @property
    def y_t(self) -> np.ndarray:
        from backend.ris_service.netparams import admittance_of
        return admittance_of(self.z_t)

    @property
    def y_i(self) -> np.ndarray:
        from backend.ris_service.netparams import admittance_of
        return admittance_of(self.z_i)

    @property
    def y_r(self) -> np.ndarray:
        from backend.ris_service.netparams import admittance_of
        return admittance_of(self.z_r)

    @property
    def gamma_t(self) -> np.ndarray:
        from backend.ris_service.netparams import reflection_of
        return reflection_of(self.z_t, self.z0)

    @property
    def theta(self) -> np.ndarray:
        from backend.ris_service.netparams import reflection_of
        return reflection_of(self.z_i, self.z0)

    @property
    def gamma_r(self) -> np.ndarray:
        from backend.ris_service.netparams import reflection_of
        return reflection_of(self.z_r, self.z0)


class SourceExcitation(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    v_s: np.ndarray
    z_t: np.ndarray
    z0: float = Field(default_factory=lambda: settings.z0, gt=0)

    @field_validator("v_s", "z_t", mode="before")
    @classmethod
    def _freeze(cls, v):
        return frozen(v)

    @property
    def i_s(self) -> np.ndarray:
        from backend.ris_service.netparams import source_equivalents
        return source_equivalents(self.v_s, self.z_t, self.z0)[0]

    @property
    def b_s(self) -> np.ndarray:
        from backend.ris_service.netparams import source_equivalents
        return source_equivalents(self.v_s, self.z_t, self.z0)[1]
