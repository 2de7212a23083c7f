"""Total-variation decompositions on finite metric random walk spaces."""

from .space import (
    EdgeWeightGraph,
    RandomWalkSpace,
    SpaceError,
    from_epsilon_step,
    from_kernel_grid,
    from_markov_kernel,
    from_weighted_graph,
    restrict,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeWeightGraph",
    "RandomWalkSpace",
    "SpaceError",
    "from_epsilon_step",
    "from_kernel_grid",
    "from_markov_kernel",
    "from_weighted_graph",
    "restrict",
    "validate",
]
