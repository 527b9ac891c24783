"""
Alternating maximization of P_R = P_T |g H w|².

Each outer iteration sets (w, g) to the dominant singular pair of the current
channel and then improves the RIS for that pair. Both updates are monotone, so
the objective trace never decreases.
"""
from typing import FrozenSet, Optional

import numpy as np

from backend.models import (
    ArchitectureFamily,
    ArchitectureSpec,
    BeamformingSolution,
    MIMOScenario,
    ParameterKind,
    Parameterization,
    RISConfiguration,
    SolveOptions,
)
from backend.optimizers.beamforming import update_beamformers
from backend.optimizers.ris_steps import s_inner_step, y_inner_step, z_inner_step
from backend.ris_service.architectures import random_feasible, to_parameterization, validate
from backend.ris_service.channel import matched_channel


def received_power(scn: MIMOScenario, ris: RISConfiguration, w, g) -> float:
    """P_T |g H w|² with H from the matched model in the scenario's own kind."""
    h = matched_channel(scn.kind, scn.blocks, ris, scn.blocks.ii).h
    return float(scn.p_t * abs(np.ravel(g) @ h @ np.ravel(w)) ** 2)


class RISOptimizer:
    """Shared outer loop; subclasses supply the RIS update for one formulation."""

    kind: ParameterKind
    parameterization: Parameterization
    families: FrozenSet[ArchitectureFamily]

    def __init__(self, scn: MIMOScenario, spec: ArchitectureSpec, opts: Optional[SolveOptions] = None):
        if scn.kind != self.kind:
            raise ValueError(f"{type(self).__name__} needs {self.kind.value}-blocks, got {scn.kind.value}")
        if spec.family not in self.families:
            raise ValueError(f"{type(self).__name__} does not handle {spec.family.value}-connected RIS")
        if spec.n_i != scn.blocks.n_i:
            raise ValueError(f"architecture has n_i={spec.n_i}, scenario has {scn.blocks.n_i}")
        self.scn = scn
        self.spec = spec
        self.opts = opts or SolveOptions()

    def inner_step(self, ris: RISConfiguration, w: np.ndarray, g: np.ndarray) -> RISConfiguration:
        raise NotImplementedError

    def channel(self, ris: RISConfiguration) -> np.ndarray:
        return matched_channel(self.kind, self.scn.blocks, ris, self.scn.blocks.ii).h

    def initial(self, seed: int) -> RISConfiguration:
        return random_feasible(self.spec, seed, self.parameterization, z0=self.scn.blocks.z0)

    def embed(self, start: RISConfiguration) -> RISConfiguration:
        """Re-express a solution of a less connected architecture on this one."""
        if start.parameterization != self.parameterization:
            start = to_parameterization(start, self.parameterization)
        ris = RISConfiguration(parameterization=self.parameterization, values=start.values,
                               architecture=self.spec, z0=start.z0)
        report = validate(ris)
        if not report.feasible:
            raise ValueError(f"start point is not a feasible {self.spec.label} configuration")
        return ris

    def run_once(self, seed: int, start: Optional[RISConfiguration] = None) -> BeamformingSolution:
        ris = self.embed(start) if start is not None else self.initial(seed)
        trace = []
        converged = False
        w = g = None
        for _ in range(self.opts.max_iterations):
            w, g = update_beamformers(self.channel(ris))
            ris = self.inner_step(ris, w, g)
            trace.append(received_power(self.scn, ris, w, g))
            if len(trace) > 1:
                previous = trace[-2]
                if abs(trace[-1] - previous) <= self.opts.tolerance * max(previous, np.finfo(float).tiny):
                    converged = True
                    break
        return BeamformingSolution(w=w, g=g, ris=ris, trace=trace, converged=converged)

    def solve(self, start: Optional[RISConfiguration] = None) -> BeamformingSolution:
        """Best of ``opts.restarts`` seeded runs; ``start`` replaces the first random start."""
        seeds = np.random.SeedSequence(self.opts.seed).spawn(self.opts.restarts)
        best = None
        for k, child in enumerate(seeds):
            result = self.run_once(int(child.generate_state(1)[0]), start if k == 0 else None)
            if best is None or result.power > best.power:
                best = result
        return best


class SParameterOptimizer(RISOptimizer):
    kind = ParameterKind.S
    parameterization = Parameterization.SCATTERING
    families = frozenset({ArchitectureFamily.SINGLE, ArchitectureFamily.GROUP, ArchitectureFamily.FULLY})

    def __init__(self, scn, spec, opts=None):
        super().__init__(scn, spec, opts)
        if scn.blocks.ii is not None:
            raise ValueError("the scattering formulation is solved without RIS coupling")

    def inner_step(self, ris, w, g):
        b = self.scn.blocks
        return s_inner_step(ris, g @ b.rt @ w, g @ b.ri, b.it @ w)


class YParameterOptimizer(RISOptimizer):
    kind = ParameterKind.Y
    parameterization = Parameterization.SUSCEPTANCE
    families = frozenset({ArchitectureFamily.SINGLE, ArchitectureFamily.TREE, ArchitectureFamily.FOREST})

    def __init__(self, scn, spec, opts=None):
        super().__init__(scn, spec, opts)
        if scn.blocks.ii is not None:
            raise ValueError("the admittance formulation is solved without RIS coupling")

    def inner_step(self, ris, w, g):
        b = self.scn.blocks
        return y_inner_step(ris, g @ b.rt @ w, g @ b.ri, b.it @ w, sweeps=self.opts.inner_iterations)


class ZParameterOptimizer(RISOptimizer):
    kind = ParameterKind.Z
    parameterization = Parameterization.REACTANCE
    families = frozenset({ArchitectureFamily.SINGLE, ArchitectureFamily.GROUP, ArchitectureFamily.FULLY})

    def __init__(self, scn, spec, opts=None):
        super().__init__(scn, spec, opts)
        blocks = scn.blocks
        self.z_ii = np.asarray(blocks.ii) if blocks.ii is not None else blocks.z0 * np.eye(blocks.n_i)

    def inner_step(self, ris, w, g):
        b = self.scn.blocks
        return z_inner_step(ris, g @ b.rt @ w, g @ b.ri, b.it @ w, self.z_ii,
                            iterations=self.opts.inner_iterations)


def optimize_s_group(scn: MIMOScenario, spec: ArchitectureSpec,
                     opts: Optional[SolveOptions] = None,
                     start: Optional[RISConfiguration] = None) -> BeamformingSolution:
    return SParameterOptimizer(scn, spec, opts).solve(start)


def optimize_y_forest(scn: MIMOScenario, spec: ArchitectureSpec,
                      opts: Optional[SolveOptions] = None,
                      start: Optional[RISConfiguration] = None) -> BeamformingSolution:
    return YParameterOptimizer(scn, spec, opts).solve(start)


def optimize_z_group_mc(scn: MIMOScenario, spec: ArchitectureSpec,
                        opts: Optional[SolveOptions] = None,
                        start: Optional[RISConfiguration] = None) -> BeamformingSolution:
    """Reactance optimization; ``scn.blocks.ii`` carries Z_II (Z0 I when absent)."""
    return ZParameterOptimizer(scn, spec, opts).solve(start)
