"""Observational transition systems and a bounded verifier for a social network model."""

from .kernel import Bounds, CompositeOts, Ots
from .lang import eval_predicate, parse_invariant_file, parse_predicate, parse_scenario, run_scenario
from .social import SocialNetwork, social_bounds
from .verifier import builtin_definitions, check_base, check_step, check_stutter, explore

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "CompositeOts",
    "Ots",
    "SocialNetwork",
    "builtin_definitions",
    "check_base",
    "check_step",
    "check_stutter",
    "eval_predicate",
    "explore",
    "parse_invariant_file",
    "parse_predicate",
    "parse_scenario",
    "run_scenario",
    "social_bounds",
]
