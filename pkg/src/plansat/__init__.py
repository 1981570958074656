"""SAT-based planner for typed STRIPS PDDL with lifted actions.

Three selectable CNF encodings (fully grounded facts, partially grounded
facts over mutex groups, and a binary-object variant) whose formula size
grows linearly in the plan length.
"""

from plansat.pddl import Problem, parse, parse_files

__version__ = "0.1.0"

__all__ = ["Problem", "parse", "parse_files", "__version__"]
