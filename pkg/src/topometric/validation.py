"""Input checks shared by the estimators and the command line."""
from __future__ import annotations


from .rational import as_rational, Q
from .space import BoxUnion, Space
from .textio import parse_point, parse_set


def check_rational(value, name="value", positive=False, nonnegative=False) -> Q:
    """Coerce ``value`` to an exact rational; floats go through their shortest repr."""
    try:
        q = as_rational(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} must be rational, got {value!r}") from exc
    if positive and q <= 0:
        raise ValueError(f"{name} must be positive, got {q}")
    if nonnegative and q < 0:
        raise ValueError(f"{name} must be nonnegative, got {q}")
    return q


def check_box_union(space: Space, value, name="set") -> BoxUnion:
    if isinstance(value, BoxUnion):
        if any(len(b.pieces) != len(space.factors) for b in value.boxes):
            raise ValueError(f"{name} does not live in a {len(space.factors)}-factor space")
        return value
    if isinstance(value, str):
        return parse_set(space, value)
    raise TypeError(f"{name} must be a BoxUnion or a set literal, got {type(value).__name__}")


def check_point(space: Space, x):
    if isinstance(x, str):
        return parse_point(space, x)
    return space.point(*x)


def check_points(space: Space, X):
    """A list of valid points from literals, tuples or a 2-D array of coordinates."""
    if X is None:
        raise ValueError("no points given")
    if isinstance(X, str):
        X = [s for s in X.split(";") if s.strip()]
    pts = [check_point(space, x) for x in X]
    if not pts:
        raise ValueError("no points given")
    return pts
