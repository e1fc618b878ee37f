"""Exact simulator for quench dynamics of the nonlinearly perturbed toric code."""

from ._kernels import backend as kernel_backend
from .entanglement import (
    TimeSeries,
    batched_ggm,
    block_log_negativity_series,
    block_schmidt,
    ggm,
    log_negativity_mixed,
    log_negativity_pure,
    single_site_probabilities,
    time_average,
)
from .errors import ConfigError, NumericalError, ResourceLimitError
from .groundstate import (
    BETA_CRITICAL,
    GroundStateSpec,
    ground_state,
    log_partition_function,
    partition_function,
    verify_ground_state,
)
from .lattice import Bipartition, TorusLattice, build_lattice, equal_block_bipartition
from .lindblad import (
    BathParams,
    IntegratorConfig,
    dissipator,
    dissipator_fixed_point_qubit,
    lindblad_evolve,
    noisy_ln_series,
)
from .loopgroup import (
    character_energy,
    character_energy_table,
    character_signs,
    flip_pattern,
    flip_pattern_table,
    magnetization,
    magnetization_table,
    walsh_transform,
)
from .quench import (
    EchoSeries,
    QuenchProtocol,
    QuenchSpectrum,
    echo_series,
    evolve,
    loschmidt_echo,
    rate_function,
)
from .sweep import (
    SweepConfig,
    SweepResult,
    derivative_scan,
    echo_zero_spacings,
    locate_peak,
    run_closed_sweep,
    run_open_sweep,
    run_sweep,
    second_difference,
    write_outputs,
)

__version__ = "0.1.0"
