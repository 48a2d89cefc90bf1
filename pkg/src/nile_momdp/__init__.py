"""Multi-reservoir river operation as a four-objective MDP.

The package bundles a monthly water-balance simulator for a dammed river
cascade, a gym-style vector-reward environment over it, an evolutionary
direct policy search (NSGA-II over Gaussian RBF policies), exact solution-set
quality metrics (hypervolume, cardinality, sparsity), and reporting helpers.
"""

from .basin import (Basin, BasinConfig, DemandSite, HydroPlantSpec, InflowModel,
                    ReservoirSpec, ReservoirState, TopologyNode, feasible_release,
                    generate_inflows, hydropower_energy, level_area_from_storage,
                    month_of_step, reservoir_step, seconds_in_month)
from .config import (EnvConfig, FullConfig, MoeaConfig, load_config, parse_config)
from .emodps import (EmodpsResult, convergence_reference, evaluate_genomes,
                     run_emodps)
from .env import REWARD_NAMES, NileEnv, rollout
from .errors import ConfigurationError, UsageError
from .metrics import (cardinality, default_reference_point, dominates,
                      evaluate_solution_set, hypervolume, pareto_filter,
                      pareto_indices, percent_of_baseline, sparsity)
from .policy import RBFPolicy, decode_genome, genome_length, random_genome
from .report import build_report, metrics_table, parallel_coordinates_svg

__version__ = "0.1.0"

__all__ = [
    "Basin", "BasinConfig", "DemandSite", "HydroPlantSpec", "InflowModel",
    "ReservoirSpec", "ReservoirState", "TopologyNode", "feasible_release",
    "generate_inflows", "hydropower_energy", "level_area_from_storage",
    "month_of_step", "reservoir_step", "seconds_in_month",
    "EnvConfig", "FullConfig", "MoeaConfig", "load_config", "parse_config",
    "EmodpsResult", "convergence_reference", "evaluate_genomes", "run_emodps",
    "REWARD_NAMES", "NileEnv", "rollout",
    "ConfigurationError", "UsageError",
    "cardinality", "default_reference_point", "dominates",
    "evaluate_solution_set", "hypervolume", "pareto_filter", "pareto_indices",
    "percent_of_baseline", "sparsity",
    "RBFPolicy", "decode_genome", "genome_length", "random_genome",
    "build_report", "metrics_table", "parallel_coordinates_svg",
    "__version__",
]
