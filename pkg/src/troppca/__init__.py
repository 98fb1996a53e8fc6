"""Tropical principal component analysis over the space of equidistant trees.

The library works in the max-plus tropical projective torus: ultrametric
vectors of equidistant phylogenetic trees, tropical polytopes and projection,
Fermat-Weber points, and an MCMC search for the best-fit polytope with a
fixed number of vertices. See the README for the command-line entry points.
"""

from .core import (
    NEG_INF,
    TOL,
    normalize,
    trop_add,
    trop_dist,
    trop_eq,
    trop_mul,
    trop_scale,
    trop_vec_add,
)
from .fermat_weber import FermatWeberResult, fermat_weber, pull_into_hull
from .kernels import BACKEND
from .mcmc import McmcConfig, PcaFit, fit, fit_single_chain, metropolis_accept, objective, propose, statistics
from .newick import (
    NewickError,
    NotEquidistantError,
    RootedTree,
    cophenetic,
    parse_newick,
    parse_newick_many,
    repair_equidistant,
    serialize_newick,
    tree_from_ultrametric,
)
from .polytope import TropicalPolytope, origin_in_hull
from .render import RenderSpec, render_svg
from .rng import Rng
from .treesim import SimConfig, mixture_experiment, random_caterpillar, random_coalescent
from .ultrametrics import (
    LeafPairIndex,
    TreeTopology,
    Ultrametric,
    is_ultrametric,
    topologies_equal,
    topology_from_vector,
    topology_of,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FermatWeberResult",
    "LeafPairIndex",
    "McmcConfig",
    "NEG_INF",
    "NewickError",
    "NotEquidistantError",
    "PcaFit",
    "RenderSpec",
    "Rng",
    "RootedTree",
    "SimConfig",
    "TOL",
    "TreeTopology",
    "TropicalPolytope",
    "Ultrametric",
    "cophenetic",
    "fermat_weber",
    "fit",
    "fit_single_chain",
    "is_ultrametric",
    "metropolis_accept",
    "mixture_experiment",
    "normalize",
    "objective",
    "origin_in_hull",
    "parse_newick",
    "parse_newick_many",
    "propose",
    "pull_into_hull",
    "random_caterpillar",
    "random_coalescent",
    "render_svg",
    "repair_equidistant",
    "serialize_newick",
    "statistics",
    "topologies_equal",
    "topology_from_vector",
    "topology_of",
    "tree_from_ultrametric",
    "trop_add",
    "trop_dist",
    "trop_eq",
    "trop_mul",
    "trop_scale",
    "trop_vec_add",
]
