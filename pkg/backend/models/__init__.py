"""
RISNet Models Package
Contains the data models for multiport networks, RIS architectures, channels and experiments
"""
from .network_model import (
    ParameterKind,
    OpenCircuit,
    PortPartition,
    NetworkMatrix,
    TerminationSet,
    SourceExcitation
)
from .ris_model import (
    ArchitectureFamily,
    Parameterization,
    ArchitectureSpec,
    RISConfiguration,
    ConstraintViolation,
    ValidationReport,
    AdmittanceComponents
)
from .channel_model import (
    Fidelity,
    ChannelMatrix,
    ChannelBlocks,
    ParameterMapping,
    TerminationProblem,
    FrameworkSolution
)
from .experiment_model import (
    SISOInstance,
    MonteCarloPowers,
    ArrayGeometry,
    MIMOScenario,
    ScenarioSet,
    SolveOptions,
    BeamformingSolution,
    ArchitectureEntry,
    ScenarioConfig,
    ExperimentRecord,
    SummaryRow,
    ScatterRow,
    SweepResult,
    EquivalenceReport
)

__all__ = [
    "ParameterKind",
    "OpenCircuit",
    "PortPartition",
    "NetworkMatrix",
    "TerminationSet",
    "SourceExcitation",
    "ArchitectureFamily",
    "Parameterization",
    "ArchitectureSpec",
    "RISConfiguration",
    "ConstraintViolation",
    "ValidationReport",
    "AdmittanceComponents",
    "Fidelity",
    "ChannelMatrix",
    "ChannelBlocks",
    "ParameterMapping",
    "TerminationProblem",
    "FrameworkSolution",
    "SISOInstance",
    "MonteCarloPowers",
    "ArrayGeometry",
    "MIMOScenario",
    "ScenarioSet",
    "SolveOptions",
    "BeamformingSolution",
    "ArchitectureEntry",
    "ScenarioConfig",
    "ExperimentRecord",
    "SummaryRow",
    "ScatterRow",
    "SweepResult",
    "EquivalenceReport"
]
