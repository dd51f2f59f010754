"""Simulation and stability analysis for weakly coupled oscillator networks.

The package is organized around a simple pipeline: build a graph, attach a
coupling function (optionally derived from a delay law), simulate or solve
for phase-locked states, and certify their (in)stability — either from the
linearization's spectrum or from a negative graph cut, which is checkable
without any eigensolver. ``experiments`` wraps the four batch studies and
``cli`` exposes everything as config-driven commands.
"""

from ._kernels import BACKEND
from .coupling import (
    TWO_PI,
    BandedCoupling,
    CouplingFunction,
    DelayDistribution,
    EmpiricalDelay,
    GaussianDelay,
    PointDelay,
    PulseResponse,
    SineCoupling,
    TabulatedCoupling,
    UniformDelay,
    convolve_delay,
    coupling_from_response,
    make_banded,
    read_coupling_file,
    response_from_coupling,
    tabulate,
    wrap_angle,
    write_coupling_file,
)
from .dynamics import (
    PhaseModel,
    PulseModel,
    Trajectory,
    integrate,
    order_parameter,
    order_parameter_series,
    phase_rhs,
    potential,
    simulate_pulse,
    write_firings_csv,
    write_trajectory_csv,
)
from .equilibria import (
    EquilibriumReport,
    IsotropySpec,
    arc_diameter,
    canonicalize,
    find_equilibrium,
    symmetric_equilibrium,
)
from .errors import (
    EventOverflowError,
    NonFiniteError,
    NumericalError,
    PhaselockError,
    ValidationError,
)
from .experiments import (
    BasinReport,
    ClusterReport,
    ExperimentConfig,
    MeanfieldReport,
    SweepReport,
    basin_mc,
    cluster_destab,
    cluster_layout,
    critical_sigma,
    meanfield_compare,
    sync_probability_sweep,
    third_harmonic_coupling,
    trial_rng,
    uniform_delay_family,
)
from .graph import (
    Graph,
    Partition,
    build_graph,
    circulant_graph,
    complete_graph,
    cut_edges,
    enumerate_partitions,
    incidence,
    is_connected,
    path_graph,
    random_connected_graph,
    read_graph_file,
    ring_graph,
    write_graph_file,
)
from .stability import (
    Linearization,
    StabilityVerdict,
    adjacent_block_cut_bound,
    check_structure,
    classify,
    constellation_sum,
    cut_sum,
    even_order_cut_certificate,
    linearize,
    min_cut_scan,
    min_cut_surface,
    odd_order_cut_certificate,
    symmetric_eigenvalues,
    twist_surface_phases,
    twisted_state,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BandedCoupling",
    "BasinReport",
    "ClusterReport",
    "CouplingFunction",
    "DelayDistribution",
    "EmpiricalDelay",
    "EquilibriumReport",
    "EventOverflowError",
    "ExperimentConfig",
    "GaussianDelay",
    "Graph",
    "IsotropySpec",
    "Linearization",
    "MeanfieldReport",
    "NonFiniteError",
    "NumericalError",
    "Partition",
    "PhaseModel",
    "PhaselockError",
    "PointDelay",
    "PulseModel",
    "PulseResponse",
    "SineCoupling",
    "StabilityVerdict",
    "SweepReport",
    "TWO_PI",
    "TabulatedCoupling",
    "Trajectory",
    "UniformDelay",
    "ValidationError",
    "adjacent_block_cut_bound",
    "arc_diameter",
    "basin_mc",
    "build_graph",
    "canonicalize",
    "check_structure",
    "circulant_graph",
    "classify",
    "cluster_destab",
    "cluster_layout",
    "complete_graph",
    "constellation_sum",
    "convolve_delay",
    "coupling_from_response",
    "critical_sigma",
    "cut_edges",
    "cut_sum",
    "enumerate_partitions",
    "even_order_cut_certificate",
    "find_equilibrium",
    "incidence",
    "integrate",
    "is_connected",
    "linearize",
    "make_banded",
    "meanfield_compare",
    "min_cut_scan",
    "min_cut_surface",
    "odd_order_cut_certificate",
    "order_parameter",
    "order_parameter_series",
    "path_graph",
    "phase_rhs",
    "potential",
    "random_connected_graph",
    "read_coupling_file",
    "read_graph_file",
    "response_from_coupling",
    "ring_graph",
    "simulate_pulse",
    "symmetric_eigenvalues",
    "symmetric_equilibrium",
    "sync_probability_sweep",
    "tabulate",
    "third_harmonic_coupling",
    "trial_rng",
    "twist_surface_phases",
    "twisted_state",
    "uniform_delay_family",
    "wrap_angle",
    "write_coupling_file",
    "write_firings_csv",
    "write_graph_file",
    "write_trajectory_csv",
]
