"""Directed diffusion-limited aggregation on the square lattice.

A laboratory for the directed growth model in which falling particles
perform directed random walks: exact activity computations and their line
identities, equivalent discrete and continuous growth dynamics with shared
reproducible randomness, the red-area influence coupling, and desk-scale
growth analysis.
"""

from . import activity, analysis, checks, dynamics, influence, io, lattice, render
from .activity import (
    ActivityDistribution,
    activity_distribution,
    escape_probability,
    line_activity,
    line_hit_sum,
    next_site_law_from_line,
    site_activity,
)
from .cluster import Cluster
from .dynamics import (
    GrowthTrace,
    run_continuous,
    run_dfpp,
    run_discrete,
    run_local_baseline,
    step_edge_launch,
    step_exact,
    step_line_launch,
)
from .exceptions import (
    DDLAError,
    FrozenClusterError,
    RejectionOverflowError,
    SnapshotFormatError,
    WindowBreachError,
)
from .harris import HarrisSystem
from .influence import (
    ColoredState,
    ColoredTrace,
    flat_line,
    red_scaling_experiment,
    run_colored,
    verify_coupling,
)
from .lattice import (
    ConeWedgeParams,
    cluster_assumption_holds,
    deviation,
    height,
    in_cone,
    in_wedge,
    up_neighbors,
)

__version__ = "0.1.0"
