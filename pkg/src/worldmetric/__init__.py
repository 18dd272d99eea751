"""Counterfactual world-state ranking by algorithmic similarity and simplicity."""

from .ctm import CtmDistribution, delta_si, enumerate_class, simplest_environment
from .estimators import estimate_conditional_k, estimate_k, header_constant
from .ranker import CounterfactualRanking, RankingRequest, lottery_demo, plurality_classes, rank
from .similarity import similarity, to_probabilities
from .worldstate import BitString, Field, Scenario, WorldState, digitalize, join, undigitalize

__version__ = "0.1.0"

__all__ = [
    "BitString", "CounterfactualRanking", "CtmDistribution", "Field", "RankingRequest",
    "Scenario", "WorldState", "delta_si", "digitalize", "enumerate_class",
    "estimate_conditional_k", "estimate_k", "header_constant", "join", "lottery_demo",
    "plurality_classes", "rank", "similarity", "simplest_environment", "to_probabilities",
    "undigitalize",
]
