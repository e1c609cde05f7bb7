"""Named exact generating functions for convex and almost-convex polygons.

Every entry expands, at caller-chosen truncation caps, to a TruncatedSeries
whose coefficients count self-avoiding polygons on the square lattice by
half-perimeter (isotropic entries) or by a pair of size parameters
(anisotropic entries).  The builders are pure: expanding twice at the same
caps gives identical series, and raising caps only extends a series, never
rewrites low-order terms.

The large pair of numerator polynomials behind the two-indent anisotropic
form is shipped as plain-text data files next to this module and verified
against recorded SHA-256 checksums before use.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

from gmpy2 import mpq

from .series import (
    TruncatedSeries,
    diff,
    divide,
    half_perimeter,
    sqrt,
)

Rat = mpq

HALF = Rat(1, 2)


class CatalogueError(Exception):
    """A catalogue expansion produced something impossible for a counting
    series (non-integer or negative coefficient, or a leftover monomial
    denominator) — this signals a transcription or algebra bug."""


class PolyDataError(CatalogueError):
    """A shipped polynomial data file is missing, malformed, or fails its
    checksum."""


# ----------------------------------------------------------------- helpers

def _caps_pair(caps):
    """Normalize caps for a series in x, y: an int applies to both."""
    if isinstance(caps, int):
        return (caps, caps)
    cx, cy = caps
    return (int(cx), int(cy))


def _caps_single(caps):
    if isinstance(caps, int):
        return (caps,)
    caps = tuple(caps)
    if len(caps) != 1:
        raise ValueError(
            f"expected a single truncation cap, got {caps!r}")
    return (int(caps[0]),)


def _xy(caps):
    """The pair (x, y) as series at the given caps."""
    caps = _caps_pair(caps)
    x = TruncatedSeries.variable("x", ("x", "y"), caps)
    y = TruncatedSeries.variable("y", ("x", "y"), caps)
    return x, y


def _one_xy(caps):
    return TruncatedSeries.one(("x", "y"), _caps_pair(caps))


def _poly_x(coeff_by_degree, cap):
    """One-variable polynomial from a degree -> coefficient mapping."""
    coeffs = {(d,): Rat(c) for d, c in coeff_by_degree.items()
              if d <= cap and c}
    return TruncatedSeries(("x",), (cap,), coeffs)


def _require_counting(series, name, nonnegative):
    """Abort with a diagnostic unless every coefficient is a (nonnegative)
    integer and no negative exponent survived."""
    for exps, c in series.coeffs.items():
        if any(e < 0 for e in exps):
            raise CatalogueError(
                f"{name}: residual negative exponent at {exps}")
        if c.denominator != 1:
            raise CatalogueError(
                f"{name}: non-integer coefficient {c} at {exps}")
        if nonnegative and c < 0:
            raise CatalogueError(
                f"{name}: negative coefficient {c} at {exps}")
    return series


# ------------------------------------------------------- core two-variable

def delta(caps):
    """The discriminant polynomial 1 - 2x - 2y - 2xy + x^2 + y^2."""
    caps = _caps_pair(caps)
    if caps[0] < 2 or caps[1] < 2:
        raise ValueError("delta needs caps of at least 2 in each variable")
    coeffs = {(0, 0): Rat(1), (1, 0): Rat(-2), (0, 1): Rat(-2),
              (1, 1): Rat(-2), (2, 0): Rat(1), (0, 2): Rat(1)}
    return TruncatedSeries(("x", "y"), caps, coeffs)


def festoon_z(caps):
    """Festoon series 1/sqrt(delta); coefficient of x^n y^m is
    binomial(n+m, n) squared."""
    caps = _caps_pair(caps)
    work = (max(caps[0], 2), max(caps[1], 2))
    z = divide(_one_xy(work), sqrt(delta(work)))
    return z.truncated({"x": caps[0], "y": caps[1]})


def staircase_s(caps):
    """Staircase-polygon series (1 - x - y - sqrt(delta)) / 2, counting
    staircase polygons by horizontal and vertical half-perimeter."""
    caps = _caps_pair(caps)
    work = (max(caps[0], 2), max(caps[1], 2))
    x, y = _xy(work)
    s = (1 - x - y - sqrt(delta(work))) * HALF
    return s.truncated({"x": caps[0], "y": caps[1]})


def uv_series(caps):
    """The substitution pair u = x + S, v = y + S with S the staircase
    series; satisfies x = u(1-v), y = v(1-u), S = uv exactly."""
    caps = _caps_pair(caps)
    x, y = _xy(caps)
    s = staircase_s(caps)
    return x + s, y + s


def indent_gf(m, caps, mirrored=False):
    """Series for a single vertical niche of depth m cut into a directed
    boundary: u^2 / (1-u)^(2m).  With mirrored=True the roles of x and y
    are swapped (a horizontal niche)."""
    if m < 1:
        raise ValueError("indent depth m must be at least 1")
    caps = _caps_pair(caps)
    u, v = uv_series(caps)
    w = v if mirrored else u
    one = _one_xy(caps)
    return divide(w * w, (one - w) ** (2 * m))


# ------------------------------------------------- one- and two-indent GFs

def _pivot_factor(kind, work):
    """The pivoted convex factor entering the indent constructions:
    staircase kind uses S/y, unimodal kind uses x/sqrt(delta)."""
    if kind == "staircase":
        return staircase_s(work).shift("y", -1)
    if kind == "unimodal":
        return festoon_z(work).shift("x", 1)
    raise ValueError(f"unknown kind {kind!r}; expected staircase or unimodal")


def prop1_gf(m, kind, caps):
    """Polygons built from a staircase or unimodal body carrying one
    vertical indent of depth m on the upper boundary, counted with the
    indent's column marked: I_m * y^(2m+1) * d/dy(Q) where Q is the
    pivoted body series.

    Both kinds have nonnegative integer coefficients; the staircase kind
    at depth 1 starts 1, 9, 55, 286 at total degree 6, 7, 8, 9.
    """
    if m < 1:
        raise ValueError("indent depth m must be at least 1")
    caps = _caps_pair(caps)
    pad = 2 * m + 2
    work = (caps[0] + 2, caps[1] + pad)
    q = _pivot_factor(kind, work)
    term = diff(q, "y").shift("y", 2 * m + 1)
    result = indent_gf(m, work) * term
    result = result.truncated({"x": caps[0], "y": caps[1]})
    return _require_counting(result, f"prop1_gf({m}, {kind!r})",
                             nonnegative=False)


def prop2_gf(kind, caps, distinct_heights=False):
    """Polygons with two vertical depth-1 indents on the upper boundary of
    a staircase or unimodal body: y^3 * d/dy(I^2 * y^2 * d/dy(Q)) / 2.

    The derivative enumerates ordered pairs of indent columns, so the
    division by 2 is exact.  With distinct_heights=True the variant
    y^5 * d/dy(I^2 * d/dy(Q)) / 2 is returned, which keeps only pairs of
    indents at different heights.
    """
    caps = _caps_pair(caps)
    work = (caps[0] + 2, caps[1] + 8)
    q = _pivot_factor(kind, work)
    i1 = indent_gf(1, work)
    dq = diff(q, "y")
    if distinct_heights:
        inner = i1 * i1 * dq
        result = diff(inner, "y").shift("y", 5) * HALF
    else:
        inner = i1 * i1 * dq.shift("y", 2)
        result = diff(inner, "y").shift("y", 3) * HALF
    result = result.truncated({"x": caps[0], "y": caps[1]})
    return _require_counting(result, f"prop2_gf({kind!r})",
                             nonnegative=False)


# ------------------------------------------------------------ folded walks

FOLDED_WALK_NAMES = ("dw", "folded_dw", "saw_fold", "unimodal_fold",
                     "convex_fold")


def folded_walk_gfs(name, caps):
    """Directed-walk series and their even-part foldings.

    dw            1/(1-x-y), walks counted by steps in each direction
    folded_dw     even x-part of dw, x-exponents halved
    saw_fold      even x-part of (1-x) * dw
    unimodal_fold even part (both variables) of xy(1-x)(1-y) * dw;
                  counts unimodal polygons plus self-intersecting variants
    convex_fold   even part of xy(1-x)^2(1-y)^2 * dw^2; likewise an
                  overcount of convex polygons
    """
    caps = _caps_pair(caps)
    cx, cy = caps
    if name == "dw":
        one = _one_xy(caps)
        x, y = _xy(caps)
        return divide(one, one - x - y)
    if name in ("folded_dw", "saw_fold"):
        work = (2 * cx + 1, cy)
        one = _one_xy(work)
        x, y = _xy(work)
        walks = divide(one, one - x - y)
        if name == "saw_fold":
            walks = (one - x) * walks
        return half_perimeter(walks, "x")
    if name in ("unimodal_fold", "convex_fold"):
        work = (2 * cx + 1, 2 * cy + 1)
        one = _one_xy(work)
        x, y = _xy(work)
        body = divide(one, one - x - y)
        if name == "unimodal_fold":
            core = x * y * (one - x) * (one - y) * body
        else:
            core = x * y * ((one - x) * (one - y)) ** 2 * body * body
        return half_perimeter(half_perimeter(core, "x"), "y")
    raise ValueError(
        f"unknown folded-walk name {name!r}; expected one of "
        f"{', '.join(FOLDED_WALK_NAMES)}")


def unimodal_fold_correction(caps):
    """The self-intersection overcount in unimodal_fold.

    unimodal_fold has the closed form xy((1-x)(1-y) - xy) / delta, while
    the corner-rooted unimodal polygons themselves are counted by
    xy / sqrt(delta); this returns the difference, so that
    unimodal_fold - unimodal_fold_correction is exactly the unimodal
    polygon series.
    """
    caps = _caps_pair(caps)
    work = (max(caps[0], 2), max(caps[1], 2))
    x, y = _xy(work)
    one = _one_xy(work)
    rational = divide(x * y * ((one - x) * (one - y) - x * y), delta(work))
    out = rational - x * y * festoon_z(work)
    return out.truncated({"x": caps[0], "y": caps[1]})


def pyramid_gf(caps):
    """Polygons whose lower boundary is a single straight run (flat base),
    built by folding a width-marked sawtooth walk and re-attaching the
    base row: y * (even y-part of (1-y)*dw, minus 1)."""
    caps = _caps_pair(caps)
    cx, cy = caps
    work = (cx, 2 * cy + 1)
    one = _one_xy(work)
    x, y = _xy(work)
    walks = divide(one, one - x - y)
    folded = half_perimeter((one - y) * walks, "y")
    out = (folded - 1).shift("y", 1)
    return out.truncated({"x": cx, "y": cy})


def stack_gf(caps):
    """Polygons with a flat left side: the transpose of pyramid_gf,
    x * (even x-part of (1-x)*dw, minus 1)."""
    caps = _caps_pair(caps)
    cx, cy = caps
    work = (cx + 1, cy)
    folded = folded_walk_gfs("saw_fold", (work[0], cy))
    out = (folded - 1).shift("x", 1)
    return out.truncated({"x": cx, "y": cy})


# ------------------------------------------------ staircase by run lengths

def staircase_by_runs(caps):
    """Staircase polygons with the top row width marked by s and the base
    row width marked by t, alongside the usual x, y half-perimeter pair.

    Setting s = t = 1 (summing their exponents away) recovers the plain
    staircase series.
    """
    if isinstance(caps, int):
        caps = (caps, caps, caps, caps)
    cx, cy, cs, ct = (int(c) for c in caps)
    vars4 = ("x", "y", "s", "t")
    caps4 = (cx, cy, cs, ct)
    one = TruncatedSeries.one(vars4, caps4)
    x = TruncatedSeries.variable("x", vars4, caps4)
    y = TruncatedSeries.variable("y", vars4, caps4)
    s = TruncatedSeries.variable("s", vars4, caps4)
    t = TruncatedSeries.variable("t", vars4, caps4)
    u2, v2 = uv_series((cx, cy))
    u = u2.with_vars(vars4, {"s": cs, "t": ct})
    v = v2.with_vars(vars4, {"s": cs, "t": ct})

    first_column = divide(t * u * v * (one - u), one - t * u)
    single_row = divide(s * x * t * y, one - s * x * t)
    kernel = x * s * s - (one + x - y) * s + one
    numerator = s * y * first_column - single_row * (one - s * x) * (s - one)
    return divide(numerator, kernel)


# ------------------------------------------------------- shipped poly data

DATA_FILES = {"c2_aniso": ("c2_aniso_a.txt", "c2_aniso_b.txt")}
CHECKSUM_FILE = "checksums.sha256"


def data_dir():
    """Directory holding the shipped polynomial data files; the
    POLYGF_DATA_DIR environment variable overrides the packaged copy."""
    override = os.environ.get("POLYGF_DATA_DIR")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "data"


class PolyData:
    """A two-variable integer polynomial loaded from an "i j coefficient"
    text file with a verified checksum."""

    def __init__(self, name, terms):
        self.name = name
        self.terms = dict(terms)

    def degree(self, position):
        return max(e[position] for e in self.terms)

    def as_series(self, caps, shift=(0, 0)):
        """The polynomial as a series in x, y with exponents offset by
        `shift` (negative offsets produce monomial-denominator terms)."""
        caps = _caps_pair(caps)
        dx, dy = shift
        coeffs = {}
        for (i, j), c in self.terms.items():
            e = (i + dx, j + dy)
            if e[0] <= caps[0] and e[1] <= caps[1]:
                coeffs[e] = Rat(c)
        return TruncatedSeries(("x", "y"), caps, coeffs)


def _read_checksums(directory):
    path = directory / CHECKSUM_FILE
    try:
        text = path.read_text()
    except OSError as exc:
        raise PolyDataError(f"checksum file unreadable: {path}") from exc
    table = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        digest, _, filename = line.partition(" ")
        table[filename.strip()] = digest.strip()
    return table


def load_poly_data(filename, directory=None):
    """Load one shipped polynomial file, verifying its SHA-256 checksum.

    Format: UTF-8 lines "i j coefficient" (decimal integers, coefficient
    possibly negative), '#' comments and blank lines ignored,
    order-independent.  Duplicate exponent pairs and zero coefficients are
    rejected.
    """
    directory = Path(directory) if directory else data_dir()
    path = directory / filename
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise PolyDataError(f"data file unreadable: {path}") from exc

    recorded = _read_checksums(directory).get(filename)
    if recorded is None:
        raise PolyDataError(
            f"no checksum recorded for {filename} in {CHECKSUM_FILE}")
    actual = hashlib.sha256(raw).hexdigest()
    if actual != recorded:
        raise PolyDataError(
            f"checksum mismatch for {filename}: recorded {recorded}, "
            f"file has {actual}")

    terms = {}
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 3:
            raise PolyDataError(
                f"{filename}:{lineno}: expected 'i j coefficient', "
                f"got {line!r}")
        try:
            i, j, c = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise PolyDataError(
                f"{filename}:{lineno}: non-integer field in {line!r}"
            ) from exc
        if i < 0 or j < 0:
            raise PolyDataError(
                f"{filename}:{lineno}: negative exponent ({i}, {j})")
        if (i, j) in terms:
            raise PolyDataError(
                f"{filename}:{lineno}: duplicate exponent pair ({i}, {j})")
        if c == 0:
            raise PolyDataError(
                f"{filename}:{lineno}: zero coefficient at ({i}, {j})")
        terms[(i, j)] = c
    return PolyData(filename, terms)


# ------------------------------------------------------------ closed forms

CLOSED_FORM_NAMES = ("c1_iso", "f2_iso", "c2_iso", "c2_aniso")

_C1_T1_NUM = {0: -4, 1: 56, 2: -300, 3: 773, 4: -973, 5: 535, 6: -90, 7: 24}
_C1_T2_NUM = {0: 1, 1: -9, 2: 25, 3: -23, 4: 3}

_F2_A = {2: -8, 3: 208, 4: -2428, 5: 16856, 6: -77742, 7: 252114,
         8: -593563, 9: 1032521, 10: -1336471, 11: 1284072, 12: -904540,
         13: 456064, 14: -158327, 15: 36093, 16: -4955, 17: 126, 18: 88}
_F2_B_CORE = {2: 8, 3: -128, 4: 844, 5: -2992, 6: 6262, 7: -8014,
              8: 6188, 9: -2602, 10: 470, 11: -12}

_C2_A = {2: -24, 3: 864, 4: -14368, 5: 146672, 6: -1030216, 7: 5289512,
         8: -20587766, 9: 62176564, 10: -147946110, 11: 280112802,
         12: -424512212, 13: 516373058, 14: -504068274, 15: 393649476,
         16: -244279626, 17: 119050550, 18: -44773540, 19: 12722814,
         20: -2660520, 21: 378184, 22: -22560, 23: -3200, 24: 512}
_C2_B = {2: -24, 3: 456, 4: -3592, 5: 15264, 6: -38200, 7: 57792,
         8: -52832, 9: 28872, 10: -8968, 11: 1248, 12: 128}


def _x_factors(cap):
    one = TruncatedSeries.one(("x",), (cap,))
    x = TruncatedSeries.variable("x", ("x",), (cap,))
    return one, x


def f2_denominator(cap):
    """(1-x)^5 (1-3x+x^2)^3 (1-4x)^3, the denominator shared by the fit
    replay in the conjecture module."""
    one, x = _x_factors(cap)
    return ((one - x) ** 5 * (one - 3 * x + x * x) ** 3
            * (one - 4 * x) ** 3)


def f2_numerator_parts(cap):
    """The numerator pair (A, B) of f2_iso with B carrying its forced
    factor (1-x)^2 (1-3x+x^2)^2."""
    one, x = _x_factors(cap)
    a = _poly_x(_F2_A, cap)
    b = ((one - x) ** 2 * (one - 3 * x + x * x) ** 2
         * _poly_x(_F2_B_CORE, cap))
    return a, b


def _closed_c1(cap):
    one, x = _x_factors(cap)
    sqrt_disc = sqrt(one - 4 * x)
    t1 = divide(_poly_x(_C1_T1_NUM, cap).shift("x", 3).truncated({"x": cap}),
                (one - x) * (one - 3 * x + x * x) * (one - 4 * x) ** 3)
    den2 = (one - x) * (one - 4 * x) ** 2 * sqrt_disc
    num2 = _poly_x(_C1_T2_NUM, cap).shift("x", 3).truncated({"x": cap}) * 4
    t2 = divide(num2, den2)
    return (t1 + t2) * 4


def _closed_f2(cap):
    one, x = _x_factors(cap)
    a, b = f2_numerator_parts(cap)
    return divide(a + b * sqrt(one - 4 * x), f2_denominator(cap))


def _closed_c2(cap):
    one, x = _x_factors(cap)
    d1 = ((one - x) ** 7 * (one - 2 * x) * (one - 3 * x + x * x) ** 3
          * (one - 4 * x) ** 4)
    t1 = divide(_poly_x(_C2_A, cap), d1)
    d2 = (one - x) ** 3 * (one - 4 * x) ** 3 * sqrt(one - 4 * x)
    t2 = divide(_poly_x(_C2_B, cap), d2)
    return t2 - t1


def _closed_c2_aniso(caps, directory=None):
    caps = _caps_pair(caps)
    a_file, b_file = DATA_FILES["c2_aniso"]
    a_poly = load_poly_data(a_file, directory)
    b_poly = load_poly_data(b_file, directory)

    # The 1/(xy) normalization below makes the quotients reach one row and
    # column past the requested caps during division, so build everything
    # with padded caps and trim at the end.
    work = (caps[0] + 2, caps[1] + 2)
    x, y = _xy(work)
    one = _one_xy(work)
    disc = delta(work)
    # Numerators carry a 1/(xy) normalization; the two monomial-denominator
    # bands cancel exactly in the difference below.
    a_num = a_poly.as_series(work, shift=(-1, -1))
    b_num = b_poly.as_series(work, shift=(-1, -1))

    d1 = (one - x) ** 3 * (one - y) ** 3 * disc ** 3 * sqrt(disc)
    d2 = ((one - x) ** 7 * (one - y) ** 7
          * ((one - x) ** 2 - y) ** 3 * ((one - y) ** 2 - x) ** 3
          * (one - x - y) * disc ** 4)
    full = divide(b_num, d2) - divide(a_num, d1) * 4
    return full.truncated({"x": caps[0], "y": caps[1]})


def closed_form(name, caps, data_directory=None):
    """Expand one of the exact closed forms:

    c1_iso    polygons of concavity one, by half-perimeter
    f2_iso    polygons with a single depth-2 niche in one fixed
              orientation, by half-perimeter
    c2_iso    polygons of concavity two, by half-perimeter
    c2_aniso  polygons of concavity two, coefficient of x^i y^j counting
              those with an (i-1) x (j-1) bounding box

    All four have nonnegative integer coefficients; c2_aniso is built from
    the shipped, checksum-verified data files.
    """
    if name == "c1_iso":
        (cap,) = _caps_single(caps)
        result = _closed_c1(cap)
    elif name == "f2_iso":
        (cap,) = _caps_single(caps)
        result = _closed_f2(cap)
    elif name == "c2_iso":
        (cap,) = _caps_single(caps)
        result = _closed_c2(cap)
    elif name == "c2_aniso":
        result = _closed_c2_aniso(caps, data_directory)
    else:
        raise ValueError(
            f"unknown closed form {name!r}; expected one of "
            f"{', '.join(CLOSED_FORM_NAMES)}")
    return _require_counting(result, name, nonnegative=True)


# ---------------------------------------------------------------- registry

class NamedGf:
    """A catalogue entry: a name, its variable list, and a builder taking
    truncation caps to a TruncatedSeries."""

    def __init__(self, name, variables, builder):
        self.name = name
        self.variables = tuple(variables)
        self.builder = builder

    @property
    def arity(self):
        return len(self.variables)

    def expand(self, caps):
        return self.builder(caps)

    def __repr__(self):
        return f"NamedGf({self.name!r}, vars={self.variables})"


def _registry():
    entries = [
        NamedGf("delta", ("x", "y"), delta),
        NamedGf("festoon_z", ("x", "y"), festoon_z),
        NamedGf("staircase_s", ("x", "y"), staircase_s),
        NamedGf("u", ("x", "y"), lambda caps: uv_series(caps)[0]),
        NamedGf("v", ("x", "y"), lambda caps: uv_series(caps)[1]),
        NamedGf("indent_1", ("x", "y"), lambda caps: indent_gf(1, caps)),
        NamedGf("indent_2", ("x", "y"), lambda caps: indent_gf(2, caps)),
        NamedGf("indent_3", ("x", "y"), lambda caps: indent_gf(3, caps)),
        NamedGf("one_indent_staircase", ("x", "y"),
                lambda caps: prop1_gf(1, "staircase", caps)),
        NamedGf("one_indent_unimodal", ("x", "y"),
                lambda caps: prop1_gf(1, "unimodal", caps)),
        NamedGf("two_indent_staircase", ("x", "y"),
                lambda caps: prop2_gf("staircase", caps)),
        NamedGf("two_indent_unimodal", ("x", "y"),
                lambda caps: prop2_gf("unimodal", caps)),
        NamedGf("pyramid", ("x", "y"), pyramid_gf),
        NamedGf("stack", ("x", "y"), stack_gf),
        NamedGf("staircase_by_runs", ("x", "y", "s", "t"),
                staircase_by_runs),
        NamedGf("c1_iso", ("x",), lambda caps: closed_form("c1_iso", caps)),
        NamedGf("f2_iso", ("x",), lambda caps: closed_form("f2_iso", caps)),
        NamedGf("c2_iso", ("x",), lambda caps: closed_form("c2_iso", caps)),
        NamedGf("c2_aniso", ("x", "y"),
                lambda caps: closed_form("c2_aniso", caps)),
    ]
    for walk_name in FOLDED_WALK_NAMES:
        entries.append(NamedGf(walk_name, ("x", "y"),
                               lambda caps, n=walk_name:
                               folded_walk_gfs(n, caps)))
    return {e.name: e for e in entries}


REGISTRY = _registry()
