"""Text forms for spaces, points and set literals.

Set literals are unions of boxes separated by ``|``; a box lists one piece
per factor separated by ``*``.  Pieces are ``+``-joined terms::

    [0,1/4]+[3/4,1] * {0,2}          # min x disc
    L[0,1/2]+R{3}+Rtail(9)           # exampleglue (a tail needs L 0)
    {1,omega} | tail(4)              # convseq

``all`` and ``empty`` work for every factor; ``empty`` on its own is the
empty set.
"""
from __future__ import annotations

from pathlib import Path

from .space import Box, BoxUnion, Space


def _split_top(text, sep):
    depth, cur, out = 0, [], []
    for ch in text:
        if ch in "[{(":
            depth += 1
        elif ch in "]})":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [s.strip() for s in out]


def load_space(path) -> Space:
    return Space.parse(Path(path).read_text())


def parse_set(space: Space, text: str) -> BoxUnion:
    text = text.strip()
    if text in ("", "empty"):
        return BoxUnion()
    boxes = []
    for term in _split_top(text, "|"):
        pieces = _split_top(term, "*")
        if len(pieces) != len(space.factors):
            raise ValueError(f"box {term!r} has {len(pieces)} pieces, space has {len(space.factors)} factors")
        boxes.append(Box(tuple(f.parse_piece(p) for f, p in zip(space.factors, pieces))))
    return BoxUnion(tuple(boxes))


def parse_point(space: Space, text: str):
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    coords = [c.strip() for c in text.split(",")]
    if len(coords) != len(space.factors):
        raise ValueError(f"point {text!r} has {len(coords)} coordinates, space has {len(space.factors)} factors")
    return tuple(f.parse_coord(c) for f, c in zip(space.factors, coords))


def parse_points(space: Space, text: str):
    return [parse_point(space, p) for p in text.split(";") if p.strip()]


def fmt_set(space: Space, A: BoxUnion) -> str:
    return space.fmt_set(A)


def fmt_point(space: Space, x) -> str:
    return space.fmt_point(x)
