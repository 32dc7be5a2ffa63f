"""Category-based access control: entities and categories in, grant/deny
authorizations out, computed by a forward-chaining rule session and checked
against a direct set-theoretic oracle."""

from .authz import BaseRelations, axiom_par, check_equivalence, decide
from .config import CustomFactDecl, PolicyConfig, load_policy, validate_custom_fact_values
from .engine import ParSink, Session, corpus_rules, evaluate, evaluate_scenario
from .errors import CbacError
from .graph import PolicyGraph, build_graph, check_well_typed, export_graph
from .hierarchy import CategoryHierarchy, check_acyclic
from .model import (
    Action,
    Answer,
    Arca,
    Barca,
    Category,
    CustomFactInstance,
    EntityRegistry,
    Par,
    Pca,
    Permission,
    Principal,
    Resource,
    Site,
    fact_equals,
    make_permission,
)
from .rulelang import RuleAst, parse_rules, print_rules

__version__ = "0.1.0"

__all__ = [
    "Action", "Answer", "Arca", "Barca", "BaseRelations", "Category", "CategoryHierarchy",
    "CbacError", "CustomFactDecl", "CustomFactInstance", "EntityRegistry", "Par", "ParSink",
    "Pca", "Permission", "PolicyConfig", "PolicyGraph", "Principal", "Resource", "RuleAst",
    "Session", "Site", "axiom_par", "build_graph", "check_acyclic", "check_equivalence",
    "check_well_typed", "corpus_rules", "decide", "evaluate", "evaluate_scenario",
    "export_graph", "fact_equals", "load_policy", "make_permission", "parse_rules",
    "print_rules", "validate_custom_fact_values",
]
