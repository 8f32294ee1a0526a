"""Exact and sampled statistics of minor-embedded Ising machines with range rescaling."""

from .embedding import (
    Embedding,
    EmbeddedHamiltonian,
    HardwareGraph,
    build_star_instance,
    embed,
    is_chain_consistent,
    unembed_discard,
    unembed_majority,
    validate,
)
from .errors import (
    DegenerateVolumeError,
    EmbeddingError,
    HamiltonianError,
    InvalidConfigurationError,
    NumericalError,
    ParameterError,
    ParseError,
    SaturationError,
    SizeLimitError,
    SparseIsingError,
    StructuralError,
)
from .gibbs_engine import SamplerConfig, event_probability, exact_distribution, mcmc_sample
from .ising_core import (
    IsingHamiltonian,
    energy,
    enumerate_spectrum,
    gibbs_probability,
    solve_probability,
)
from .pipeline import PipelineReport, run_pipeline, sweep
from .rescaling import DEFAULT_RANGES, HardwareRanges, effective_beta, rescale, scale_factor

__version__ = "0.1.0"
