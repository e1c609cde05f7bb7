"""Exhaustive census of self-avoiding polygons with exact classification.

This module is the package's independent ground truth.  It enumerates every
translation-inequivalent self-avoiding polygon on the square lattice up to a
half-perimeter cap, computes the concavity index of each one (half the
difference between the perimeter and the perimeter of the minimal bounding
rectangle), and classifies the polygons of concavity index at most two by the
location, direction and depth of their indents.

Geometry conventions
--------------------

Every polygon is stored as a canonically rooted boundary word over E/N/W/S:
the traversal starts at the lowest-then-leftmost vertex, runs
counterclockwise (first step E, closing step S), and the root sits at the
origin.  The boundary of a polygon meets its bounding rectangle in eight
extremal contact vertices (two per rectangle edge); these cut the boundary
into eight pieces, labelled here by compass names::

    bottom, bottom_right, right, top_right, top, top_left, left, bottom_left

The four corner pieces (``bottom_right`` .. ``bottom_left``) are the
staircase stretches between rectangle edges; the other four are the stretches
along an edge between its two extremal contacts.  An indent is a maximal run
of wrong-direction steps together with the matching return run; it is
reported with the piece that contains it, its direction (vertical indents
interrupt the up/down profile, horizontal ones the left/right profile) and
its depth.  Vertical indents hang either from the upper boundary ("top" arc
family) or rise from the lower one ("bottom"); horizontal indents likewise
split into "left" and "right" families.
"""

import json
import os
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

from . import __version__

STEP_CHARS = "ENWS"
STEP_OF_CHAR = {c: i for i, c in enumerate(STEP_CHARS)}
DX = (1, 0, -1, 0)
DY = (0, 1, 0, -1)

PIECES = (
    "bottom",
    "bottom_right",
    "right",
    "top_right",
    "top",
    "top_left",
    "left",
    "bottom_left",
)

FLAG_NAMES = ("staircase", "unimodal", "pyramid", "stack")

# Sides are the four overlapping directed stretches of a convex boundary,
# each one wrapping a corner of the bounding rectangle.  A piece along a
# rectangle edge belongs to the two sides that share that edge; a corner
# piece determines its side uniquely.
SIDES = ("upper_left", "upper_right", "lower_right", "lower_left")
_SIDE_INDEX = {s: i for i, s in enumerate(SIDES)}
SIDES_OF_PIECE = {
    "top_left": ("upper_left",),
    "top": ("upper_left", "upper_right"),
    "top_right": ("upper_right",),
    "right": ("upper_right", "lower_right"),
    "bottom_right": ("lower_right",),
    "bottom": ("lower_right", "lower_left"),
    "bottom_left": ("lower_left",),
    "left": ("lower_left", "upper_left"),
}


class PolygonError(ValueError):
    """Raised for step words that do not trace a self-avoiding polygon."""


class ClassificationError(RuntimeError):
    """Raised when indent detection cannot account for the concavity index."""


class CensusResourceError(RuntimeError):
    """Raised when an enumeration request exceeds the configured budget."""


class SnapshotError(RuntimeError):
    """Raised when a snapshot file does not match the requested run."""


# ---------------------------------------------------------------------------
# Polygons


class Polygon:
    """A self-avoiding lattice polygon in canonical rooted form.

    ``word`` is the counterclockwise boundary word starting at the
    lowest-then-leftmost vertex.  Construction accepts any rotation,
    starting point and orientation of the boundary and canonicalizes it.
    """

    __slots__ = ("word", "steps", "verts")

    def __init__(self, word):
        if isinstance(word, Polygon):
            word = word.word
        try:
            steps = [STEP_OF_CHAR[c] for c in word.upper()]
        except KeyError as exc:
            raise PolygonError("step word may only contain E, N, W, S") from exc
        if len(steps) < 4:
            raise PolygonError("a polygon needs at least 4 steps")
        verts = [(0, 0)]
        x = y = 0
        for s in steps:
            x += DX[s]
            y += DY[s]
            verts.append((x, y))
        if (x, y) != (0, 0):
            raise PolygonError("step word is not closed")
        verts.pop()
        if len(set(verts)) != len(verts):
            raise PolygonError("step word revisits a vertex")
        # Orientation: make the traversal counterclockwise (positive area).
        area2 = 0
        n = len(verts)
        for i in range(n):
            x0, y0 = verts[i]
            x1, y1 = verts[(i + 1) % n]
            area2 += x0 * y1 - x1 * y0
        if area2 < 0:
            steps = [(s + 2) % 4 for s in reversed(steps)]
            verts = [(0, 0)]
            x = y = 0
            for s in steps[:-1]:
                x += DX[s]
                y += DY[s]
                verts.append((x, y))
        # Root at the lowest-then-leftmost vertex.
        root = min(range(n), key=lambda i: (verts[i][1], verts[i][0]))
        steps = steps[root:] + steps[:root]
        rx, ry = verts[root]
        verts = [(vx - rx, vy - ry) for vx, vy in verts[root:] + verts[:root]]
        self.steps = steps
        self.verts = verts
        self.word = "".join(STEP_CHARS[s] for s in steps)

    # -- basic geometry ----------------------------------------------------

    @property
    def horizontal_half_perimeter(self):
        return sum(1 for s in self.steps if s == 0)

    @property
    def vertical_half_perimeter(self):
        return sum(1 for s in self.steps if s == 1)

    @property
    def half_perimeter(self):
        return len(self.steps) // 2

    @property
    def width(self):
        xs = [v[0] for v in self.verts]
        return max(xs) - min(xs)

    @property
    def height(self):
        ys = [v[1] for v in self.verts]
        return max(ys) - min(ys)

    def concavity_index(self):
        return self.half_perimeter - self.width - self.height

    def transpose(self):
        """The polygon reflected across the main diagonal."""
        flipped = {0: 3, 1: 2, 2: 1, 3: 0}
        word = "".join(STEP_CHARS[flipped[s]] for s in reversed(self.steps))
        return Polygon(word)

    def __eq__(self, other):
        return isinstance(other, Polygon) and self.word == other.word

    def __hash__(self):
        return hash(self.word)

    def __repr__(self):
        return "Polygon(%r)" % self.word


def concavity_index(p):
    """Half of (perimeter minus bounding-rectangle perimeter)."""
    if not isinstance(p, Polygon):
        p = Polygon(p)
    return p.concavity_index()


# ---------------------------------------------------------------------------
# Classification


class Indent(NamedTuple):
    side: str  # one of the eight piece labels
    direction: str  # "vertical" or "horizontal"
    depth: int


class Classification(NamedTuple):
    m: int
    flags: frozenset
    profile: Optional[Tuple[Indent, ...]]
    subclass: str


def _class_flags(steps, minx, width, height):
    """Convexity subfamily membership for a concavity-0 word."""
    flags = {"convex"}
    turned = False
    stair = True
    for s in steps:
        if s >= 2:
            turned = True
        elif turned:
            stair = False
            break
    if stair:
        flags.add("staircase")
    last_e = last_n = -1
    first_w = first_s = len(steps)
    for i, s in enumerate(steps):
        if s == 0:
            last_e = i
        elif s == 1:
            last_n = i
        elif s == 2 and first_w == len(steps):
            first_w = i
        elif s == 3 and first_s == len(steps):
            first_s = i
    if last_e < first_w and last_n < first_s:
        flags.add("unimodal")
    if minx == 0 and all(s == 0 for s in steps[:width]):
        flags.add("pyramid")
    if minx == 0 and all(s == 3 for s in steps[len(steps) - height:]):
        flags.add("stack")
    return flags


def _family_intervals(steps, coords, nlevels, up_step, down_step, forbid_low, forbid_high):
    """Excursion intervals of one indent family.

    ``coords`` holds the relevant coordinate of each vertex (shifted so the
    minimum is 0).  Crossings of the line ``level + 1/2`` are alternately
    up/down; every stretch between consecutive crossings that stays clear of
    the main body is an indent wall.  A stretch on the low side of the line
    qualifies if it avoids ``forbid_low`` steps ("high-arc" indents hanging
    from the far boundary); a stretch on the high side qualifies if it avoids
    ``forbid_high`` ("low-arc" indents rising from the near boundary).

    Returns ``(low_side_intervals, high_side_intervals, extra_pairs)`` where
    intervals are ``(i1, i2)`` interior vertex ranges.
    """
    crossings = defaultdict(list)
    for i, s in enumerate(steps):
        if s == up_step:
            crossings[coords[i]].append((i, 1))
        elif s == down_step:
            crossings[coords[i] - 1].append((i, 0))
    high_arc = []
    low_arc = []
    extra = 0
    for level in range(nlevels):
        cr = crossings.get(level)
        if cr is None or len(cr) == 2:
            continue
        cr.sort()
        k = len(cr) // 2
        extra += k - 1
        for j in range(len(cr) - 1):
            (i1, t1), (i2, t2) = cr[j], cr[j + 1]
            if t1 == t2:
                raise ClassificationError("crossings do not alternate")
            segment = range(i1 + 1, i2)
            if t1 == 0:
                # Down then up: the stretch lies on the low side of the line.
                if not any(steps[i] in forbid_low for i in segment):
                    high_arc.append((i1 + 1, i2))
            else:
                if not any(steps[i] in forbid_high for i in segment):
                    low_arc.append((i1 + 1, i2))
    return high_arc, low_arc, extra


def _chain_indents(intervals):
    """Group nested excursion intervals into indents with depths.

    A notch that is k deep produces k nested intervals, one per crossing
    level (terraced walls included); disjoint intervals are separate notches.
    Returns a list of ``(outer_interval, depth)``.
    """
    if not intervals:
        return []
    intervals = sorted(intervals, key=lambda ab: (ab[0], -ab[1]))
    chains = []
    for a, b in intervals:
        if chains:
            (oa, ob), depth = chains[-1]
            if a >= oa and b <= ob:
                chains[-1] = ((oa, ob), depth + 1)
                continue
            if a <= ob and b > ob:
                raise ClassificationError("overlapping indent walls")
        chains.append(((a, b), 1))
    return chains


def _piece_of(i1, i2, bounds):
    """Locate an interior vertex range among three consecutive pieces.

    ``bounds`` is ``(first, last, pieces)`` where ``pieces`` are the labels
    before ``first``, between ``first`` and ``last``, and after ``last``.
    """
    first, last, (before, middle, after) = bounds
    if i2 < first:
        return before
    if i1 > last:
        return after
    if i1 > first and i2 < last:
        return middle
    raise ClassificationError("indent straddles a contact vertex")


def classify(p):
    """Full classification: concavity index, class flags, indent profile.

    The indent profile is reported for concavity index 1 and 2 (the range
    the fine classifier is exact for); larger indices get ``profile=None``
    and an empty subclass tag.
    """
    if not isinstance(p, Polygon):
        p = Polygon(p)
    steps = p.steps
    verts = p.verts
    length = len(steps)
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    minx = min(xs)
    width = max(xs) - minx
    height = max(ys)
    hp = length // 2
    m = hp - width - height

    if m == 0:
        flags = _class_flags(steps, minx, width, height)
        subclass = "+".join(sorted(flags))
        return Classification(0, frozenset(flags), (), subclass)
    if m > 2:
        return Classification(m, frozenset(), None, "")

    # Contact vertex indices.  The root is always a bottom contact; when the
    # root also lies on the left rectangle edge the left span wraps around,
    # so the last left contact is taken at the wrap position ``length``.
    b_last = max(i for i in range(length) if ys[i] == 0)
    r_first = min(i for i in range(length) if xs[i] == minx + width)
    r_last = max(i for i in range(length) if xs[i] == minx + width)
    t_first = min(i for i in range(length) if ys[i] == height)
    t_last = max(i for i in range(length) if ys[i] == height)
    left_idx = [i for i in range(1, length) if xs[i] == minx]
    if minx == 0:
        l_first = min(left_idx) if left_idx else length
        l_last = length
    else:
        l_first = min(left_idx)
        l_last = max(left_idx)

    ys_shift = ys
    xs_shift = [x - minx for x in xs]
    v_top, v_bottom, v_extra = _family_intervals(
        steps, ys_shift, height, 1, 3, forbid_low=(0,), forbid_high=(2,)
    )
    h_right, h_left, h_extra = _family_intervals(
        steps, xs_shift, width, 0, 2, forbid_low=(3,), forbid_high=(1,)
    )

    indents = []
    for (a, b), depth in _chain_indents(v_top):
        piece = _piece_of(a, b, (t_first, t_last, ("top_right", "top", "top_left")))
        indents.append((a, Indent(piece, "vertical", depth), "v_top"))
    for (a, b), depth in _chain_indents(v_bottom):
        if b < b_last:
            piece = "bottom"
        elif a > l_last:
            piece = "bottom_left"
        elif a > b_last and b < r_first:
            piece = "bottom_right"
        else:
            raise ClassificationError("indent straddles a contact vertex")
        indents.append((a, Indent(piece, "vertical", depth), "v_bottom"))
    for (a, b), depth in _chain_indents(h_right):
        piece = _piece_of(a, b, (r_first, r_last, ("bottom_right", "right", "top_right")))
        indents.append((a, Indent(piece, "horizontal", depth), "h_right"))
    for (a, b), depth in _chain_indents(h_left):
        piece = _piece_of(a, b, (l_first, l_last, ("top_left", "left", "bottom_left")))
        indents.append((a, Indent(piece, "horizontal", depth), "h_left"))

    total = sum(ind.depth for _, ind, _ in indents)
    if total != m or v_extra + h_extra != m:
        raise ClassificationError(
            "indent depths %d do not add up to concavity index %d" % (total, m)
        )

    indents.sort()
    profile = tuple(ind for _, ind, _ in indents)
    parts = []
    for _, ind, family in indents:
        base = "%s@%s" % (family, ind.side)
        if ind.depth == 2:
            base = "2x" + base
        parts.append(base)
    subclass = "+".join(sorted(parts))
    return Classification(m, frozenset(), profile, subclass)


def _arc_of_tag_part(part):
    part = part[2:] if part.startswith("2x") else part
    return part.split("@")[0]


def closest_side_assignment(profile):
    """Assign each indent of a two-indent profile to a boundary side.

    Indents sitting on a piece along a rectangle edge may be attributed to
    either side sharing that edge; the tie is broken by choosing the
    attribution whose two sides are closest together around the boundary.
    Returns ``(relation, sides)`` with relation one of ``"same"``,
    ``"adjacent"``, ``"opposite"``.
    """
    if len(profile) != 2:
        raise ValueError("side assignment needs exactly two indents")
    best = None
    for s1 in SIDES_OF_PIECE[profile[0].side]:
        for s2 in SIDES_OF_PIECE[profile[1].side]:
            d = abs(_SIDE_INDEX[s1] - _SIDE_INDEX[s2])
            d = min(d, 4 - d)
            if best is None or d < best[0]:
                best = (d, (s1, s2))
    relation = ("same", "adjacent", "opposite")[best[0]]
    return relation, best[1]


def coarse_partition(c):
    """Coarse class tag ``(kind, orientation)`` for low concavity indices.

    For one indent: ``("indent", family)``.  For concavity index 2 the four
    standard coarse classes: a single 2-deep indent ``("deep2", family)``,
    two 1-deep indents of the same family ``("pair_same_arc", family)``,
    a vertical or horizontal top/bottom (left/right) pair
    ``("pair_opposite", "vertical"|"horizontal")``, and one vertical plus
    one horizontal indent ``("pair_mixed", "")``.  Convex polygons return
    ``(subclass, "")`` and deeper concavities ``("", "")``.
    """
    if isinstance(c, (Polygon, str)):
        c = classify(c)
    if c.m == 0:
        return (c.subclass, "")
    if c.profile is None:
        return ("", "")
    parts = c.subclass.split("+")
    if c.m == 1:
        return ("indent", _arc_of_tag_part(parts[0]))
    if len(parts) == 1:
        return ("deep2", _arc_of_tag_part(parts[0]))
    fams = sorted(_arc_of_tag_part(p) for p in parts)
    if fams[0] == fams[1]:
        return ("pair_same_arc", fams[0])
    if fams == ["v_bottom", "v_top"]:
        return ("pair_opposite", "vertical")
    if fams == ["h_left", "h_right"]:
        return ("pair_opposite", "horizontal")
    return ("pair_mixed", "")


# ---------------------------------------------------------------------------
# Census tables


class CensusTable:
    """Exact polygon counts keyed by (h, v, m, subclass).

    ``h`` and ``v`` are the horizontal and vertical half-perimeters, ``m``
    the concavity index and ``subclass`` the classifier tag (empty for
    polygons the fine classifier does not cover).  Tables support exact
    merging, filtering sums and CSV/JSON round trips.  Metadata (cap,
    runtime, version) rides along but is ignored by equality.
    """

    def __init__(self, cap, entries=None, runtime=0.0, version=__version__):
        self.cap = cap
        self.runtime = runtime
        self.version = version
        self.entries: Dict[Tuple[int, int, int, str], int] = dict(entries or {})

    def add(self, h, v, m, subclass, count=1):
        key = (h, v, m, subclass)
        self.entries[key] = self.entries.get(key, 0) + count

    def merge(self, other):
        for key, count in other.entries.items():
            self.entries[key] = self.entries.get(key, 0) + count
        return self

    def count(self, h=None, v=None, n=None, m=None, subclass=None, tag_pred=None):
        """Sum of counts over all entries matching the given filters."""
        total = 0
        for (eh, ev, em, tag), c in self.entries.items():
            if h is not None and eh != h:
                continue
            if v is not None and ev != v:
                continue
            if n is not None and eh + ev != n:
                continue
            if m is not None and em != m:
                continue
            if subclass is not None and tag != subclass:
                continue
            if tag_pred is not None and not tag_pred(tag):
                continue
            total += c
        return total

    def isotropic(self, m=None, tag_pred=None):
        """Counts by total half-perimeter, as a dict."""
        out = defaultdict(int)
        for (eh, ev, em, tag), c in self.entries.items():
            if m is not None and em != m:
                continue
            if tag_pred is not None and not tag_pred(tag):
                continue
            out[eh + ev] += c
        return dict(out)

    def series(self, upto=None, **filters):
        """Isotropic counts as a list indexed by half-perimeter."""
        iso = self.isotropic(**filters)
        upto = self.cap if upto is None else upto
        return [iso.get(i, 0) for i in range(upto + 1)]

    def class_count(self, flag, **filters):
        """Count of concavity-0 polygons carrying a given class flag."""
        return self.count(m=0, tag_pred=lambda t: flag in t.split("+"), **filters)

    def sorted_entries(self):
        return sorted((k, v) for k, v in self.entries.items())

    def to_csv(self):
        lines = ["h,v,m,subclass,count"]
        for (h, v, m, tag), c in self.sorted_entries():
            lines.append("%d,%d,%d,%s,%d" % (h, v, m, tag, c))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text, cap=0):
        table = cls(cap)
        lines = [ln for ln in text.strip().splitlines() if ln]
        if lines and lines[0].lower().startswith("h,"):
            lines = lines[1:]
        for ln in lines:
            h, v, m, tag, c = ln.split(",")
            table.add(int(h), int(v), int(m), tag, int(c))
        return table

    def to_json(self):
        payload = {
            "cap": self.cap,
            "runtime": self.runtime,
            "version": self.version,
            "entries": [[h, v, m, tag, c] for (h, v, m, tag), c in self.sorted_entries()],
        }
        return json.dumps(payload, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        table = cls(payload["cap"], runtime=payload.get("runtime", 0.0),
                    version=payload.get("version", ""))
        for h, v, m, tag, c in payload["entries"]:
            table.add(h, v, m, tag, c)
        return table

    def save(self, path):
        path = os.fspath(path)
        text = self.to_csv() if path.endswith(".csv") else self.to_json()
        with open(path, "w") as fh:
            fh.write(text)

    @classmethod
    def load(cls, path):
        path = os.fspath(path)
        with open(path) as fh:
            text = fh.read()
        if path.endswith(".csv"):
            return cls.from_csv(text)
        return cls.from_json(text)

    def __eq__(self, other):
        return isinstance(other, CensusTable) and self.entries == other.entries

    def __repr__(self):
        return "CensusTable(cap=%d, %d entries, %d polygons)" % (
            self.cap, len(self.entries), sum(self.entries.values()))


# ---------------------------------------------------------------------------
# Enumeration

DEFAULT_RESOURCE_CAP = 13
_PREFIX_DEPTH = 8


def _python_walks(cap, limit):
    """Yield ("closed", word) and ("open", word) for canonical walks.

    Pure-Python depth-first search over the same tree as the kernel; open
    walks are reported when they reach ``limit`` steps and searching stops
    there.  With ``limit >= 2*cap`` only closed words come out.
    """
    maxsteps = 2 * cap
    limit = min(limit, maxsteps)
    visited = {(0, 0)}
    word: List[int] = []

    def rec(x, y):
        depth = len(word)
        for d in (0, 1, 2, 3) if depth else (0,):
            nx, ny = x + DX[d], y + DY[d]
            if nx == 0 and ny == 0:
                if d == 3 and depth >= 3:
                    yield "closed", "".join(STEP_CHARS[s] for s in word) + "S"
                continue
            if ny < 0 or (ny == 0 and nx < 0):
                continue
            if depth + 1 + abs(nx) + abs(ny) > maxsteps:
                continue
            if (nx, ny) in visited:
                continue
            word.append(d)
            if depth + 1 == limit:
                yield "open", "".join(STEP_CHARS[s] for s in word)
            else:
                visited.add((nx, ny))
                yield from rec(nx, ny)
                visited.remove((nx, ny))
            word.pop()

    yield from rec(0, 0)


def reference_polygons(max_half_perimeter) -> Iterator[str]:
    """All canonical polygon words up to the cap, pure Python (slow)."""
    for kind, word in _python_walks(max_half_perimeter, 2 * max_half_perimeter):
        if kind == "closed":
            yield word


def _pack_word(word):
    packed = 0
    for i, c in enumerate(word):
        packed |= STEP_OF_CHAR[c] << (2 * i)
    return packed


def _unpack_word(packed, length):
    return [(int(packed) >> (2 * i)) & 3 for i in range(length)]


def _add_classified(table, word):
    p = Polygon(word)
    c = classify(p)
    table.add(p.horizontal_half_perimeter, p.vertical_half_perimeter, c.m, c.subclass)


_FLAGBITS_TAG = {}
for bits in range(16):
    names = {"convex"}
    for bit, name in enumerate(FLAG_NAMES):
        if bits & (1 << bit):
            names.add(name)
    _FLAGBITS_TAG[bits] = "+".join(sorted(names))


def _chunk_to_table(cap, counts3d, flags0, words, metas, classify_words):
    table = CensusTable(cap)
    nz = counts3d.nonzero()
    for h, v, m in zip(*nz):
        h, v, m = int(h), int(v), int(m)
        if m == 0:
            continue
        if m <= 2 and classify_words:
            continue  # covered by captured words below
        table.add(h, v, m, "", int(counts3d[h, v, m]))
    nzf = flags0.nonzero()
    for h, v, bits in zip(*nzf):
        table.add(int(h), int(v), 0, _FLAGBITS_TAG[int(bits)], int(flags0[h, v, bits]))
    if classify_words:
        for packed, meta in zip(words.tolist(), metas.tolist()):
            m = meta >> 10
            h = (meta >> 5) & 31
            v = meta & 31
            steps = _unpack_word(packed, 2 * (h + v))
            word = "".join(STEP_CHARS[s] for s in steps)
            c = classify(Polygon(word))
            if c.m != m:
                raise ClassificationError("kernel and classifier disagree on m")
            table.add(h, v, m, c.subclass)
    return table


def _write_snapshot(path, cap, total_chunks, done, table):
    payload = {
        "cap": cap,
        "prefix_depth": _PREFIX_DEPTH,
        "total_chunks": total_chunks,
        "done": sorted(done),
        "entries": [[h, v, m, tag, c] for (h, v, m, tag), c in table.sorted_entries()],
    }
    tmp = "%s.tmp" % path
    with open(tmp, "w") as fh:
        json.dump(payload, fh, separators=(",", ":"))
    os.replace(tmp, path)


def _read_snapshot(path, cap, total_chunks):
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("cap") != cap or payload.get("prefix_depth") != _PREFIX_DEPTH \
            or payload.get("total_chunks") != total_chunks:
        raise SnapshotError("snapshot %s does not match this run" % path)
    table = CensusTable(cap)
    for h, v, m, tag, c in payload["entries"]:
        table.add(h, v, m, tag, c)
    return set(payload["done"]), table


def enumerate_census(max_half_perimeter, *, threads=None, capture=None,
                     snapshot_path=None, resource_cap=DEFAULT_RESOURCE_CAP,
                     snapshot_every=64):
    """Census of all polygons with half-perimeter up to the cap.

    Every polygon is counted once under the canonical rooting; rows carry the
    fine subclass tags for concavity index at most 2 when ``capture`` is on
    (the default for caps where word capture is possible).  Work is split
    over disjoint search-tree prefixes; with ``threads`` greater than one the
    chunks run on a thread pool (the kernel releases the GIL) and are merged
    by exact addition, so the result does not depend on scheduling.
    ``snapshot_path`` enables periodic checkpoints that a rerun picks up.
    """
    n = int(max_half_perimeter)
    if n < 2:
        raise ValueError("the half-perimeter cap must be at least 2")
    if n > resource_cap:
        raise CensusResourceError(
            "cap %d exceeds the resource budget %d; pass resource_cap= to raise it"
            % (n, resource_cap))
    if capture is None:
        capture = n <= 16
    if capture and n > 16:
        raise CensusResourceError("word capture packs at most 32 steps (cap 16)")
    t0 = time.monotonic()

    table = CensusTable(n)
    small_words = []
    prefixes = []
    if 2 * n <= _PREFIX_DEPTH:
        small_words = [w for _, w in _python_walks(n, 2 * n)]
    else:
        for kind, word in _python_walks(n, _PREFIX_DEPTH):
            if kind == "closed":
                small_words.append(word)
            else:
                prefixes.append(word)

    done = set()
    if snapshot_path and os.path.exists(snapshot_path):
        done, table = _read_snapshot(snapshot_path, n, len(prefixes))
    else:
        for word in small_words:
            _add_classified(table, word)

    todo = [i for i in range(len(prefixes)) if i not in done]
    if todo:
        from . import _fastcount

        def work(i):
            word = prefixes[i]
            counts3d, flags0, words, metas = _fastcount.run_chunk(
                n, _pack_word(word), len(word), capture)
            return i, _chunk_to_table(n, counts3d, flags0, words, metas, capture)

        nthreads = threads or min(4, os.cpu_count() or 1)
        completed = 0
        if nthreads <= 1:
            results = map(work, todo)
            for i, chunk in results:
                table.merge(chunk)
                done.add(i)
                completed += 1
                if snapshot_path and completed % snapshot_every == 0:
                    _write_snapshot(snapshot_path, n, len(prefixes), done, table)
        else:
            with ThreadPoolExecutor(max_workers=nthreads) as pool:
                for i, chunk in pool.map(work, todo):
                    table.merge(chunk)
                    done.add(i)
                    completed += 1
                    if snapshot_path and completed % snapshot_every == 0:
                        _write_snapshot(snapshot_path, n, len(prefixes), done, table)
        if snapshot_path:
            _write_snapshot(snapshot_path, n, len(prefixes), done, table)

    table.runtime = time.monotonic() - t0
    return table


def census_words(max_half_perimeter, *, concavity=(1, 2), threads=None,
                 resource_cap=DEFAULT_RESOURCE_CAP):
    """Yield the canonical words of all polygons with the given concavity.

    Only concavity indices 1 and 2 can be requested (the enumeration kernel
    captures exactly those).  Useful for counting sub-families that the
    census tags do not resolve, e.g. classes conditioned on which corners of
    the bounding rectangle the polygon touches.
    """
    n = int(max_half_perimeter)
    if n < 2:
        raise ValueError("the half-perimeter cap must be at least 2")
    if n > resource_cap:
        raise CensusResourceError(
            "cap %d exceeds the resource budget %d; pass resource_cap= to raise it"
            % (n, resource_cap))
    if n > 16:
        raise CensusResourceError("word capture packs at most 32 steps (cap 16)")
    wanted = set(concavity)
    if not wanted <= {1, 2}:
        raise ValueError("only concavity indices 1 and 2 are captured")
    small_words = []
    prefixes = []
    if 2 * n <= _PREFIX_DEPTH:
        small_words = [w for _, w in _python_walks(n, 2 * n)]
    else:
        for kind, word in _python_walks(n, _PREFIX_DEPTH):
            (small_words if kind == "closed" else prefixes).append(word)
    for word in small_words:
        if Polygon(word).concavity_index() in wanted:
            yield word
    if prefixes:
        from . import _fastcount

        def work(word):
            _c, _f, words, metas = _fastcount.run_chunk(
                n, _pack_word(word), len(word), True)
            return words, metas

        nthreads = threads or min(4, os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            for words, metas in pool.map(work, prefixes):
                for packed, meta in zip(words.tolist(), metas.tolist()):
                    m = meta >> 10
                    if m not in wanted:
                        continue
                    h = (meta >> 5) & 31
                    v = meta & 31
                    steps = _unpack_word(packed, 2 * (h + v))
                    yield "".join(STEP_CHARS[s] for s in steps)


def anisotropic_table(max_half_perimeter, *, threads=None,
                      resource_cap=DEFAULT_RESOURCE_CAP):
    """Counts keyed by (h, v, m) only — no subclass tags, no word capture."""
    n = int(max_half_perimeter)
    if n < 2:
        raise ValueError("the half-perimeter cap must be at least 2")
    if n > resource_cap:
        raise CensusResourceError(
            "cap %d exceeds the resource budget %d; pass resource_cap= to raise it"
            % (n, resource_cap))
    t0 = time.monotonic()
    table = CensusTable(n)
    small_words = []
    prefixes = []
    if 2 * n <= _PREFIX_DEPTH:
        small_words = [w for _, w in _python_walks(n, 2 * n)]
    else:
        for kind, word in _python_walks(n, _PREFIX_DEPTH):
            (small_words if kind == "closed" else prefixes).append(word)
    for word in small_words:
        p = Polygon(word)
        table.add(p.horizontal_half_perimeter, p.vertical_half_perimeter,
                  p.concavity_index(), "")
    if prefixes:
        from . import _fastcount

        def work(word):
            counts3d, _flags0, _words, _metas = _fastcount.run_chunk(
                n, _pack_word(word), len(word), False)
            return counts3d

        nthreads = threads or min(4, os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            for counts3d in pool.map(work, prefixes):
                for h, v, m in zip(*counts3d.nonzero()):
                    table.add(int(h), int(v), int(m), "", int(counts3d[h, v, m]))
    table.runtime = time.monotonic() - t0
    return table
