"""Topometric spaces over exact rationals, with Lipschitz function constructions and sampled audits."""
from .approximation import ApproximationError, LipApprox, RealizedFunction, realize, urysohn
from .functions import parse_function
from .rational import INF, Bracket
from .separation import SeparationError, check_star, check_star_star, closed_metric_ball, separate
from .space import BoxUnion, Space
from .textio import load_space, parse_point, parse_set
from .tietze import flim, tietze_extend

__all__ = [
    "ApproximationError", "Bracket", "BoxUnion", "INF", "LipApprox", "RealizedFunction", "SeparationError",
    "Space", "check_star", "check_star_star", "closed_metric_ball", "flim", "load_space", "parse_function",
    "parse_point", "parse_set", "realize", "separate", "tietze_extend", "urysohn",
]
