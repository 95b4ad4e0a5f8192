"""Mutation testing for Rasa-style task-based chatbots."""

from .analysis import MutationCounts, analyze, build_report, classify_mutant, score
from .equivalence import bounded_equivalence
from .model import ChatbotProject, usage_sites, validate
from .mutgen import generate_mutants
from .operators import OperatorCategory, OperatorId, apply, category, enumerate_sites
from .rasa import diff_projects, parse_project, write_project
from .scripts import parse_script, run_script, run_suite
from .simulator import match_intent, step

__version__ = "0.1.0"

__all__ = [
    "ChatbotProject",
    "MutationCounts",
    "OperatorCategory",
    "OperatorId",
    "analyze",
    "apply",
    "bounded_equivalence",
    "build_report",
    "category",
    "classify_mutant",
    "diff_projects",
    "enumerate_sites",
    "generate_mutants",
    "match_intent",
    "parse_project",
    "parse_script",
    "run_script",
    "run_suite",
    "score",
    "step",
    "usage_sites",
    "validate",
    "write_project",
]
