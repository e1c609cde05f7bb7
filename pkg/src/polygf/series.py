"""Exact truncated multivariate power series over arbitrary-precision rationals.

A series is a sparse map from exponent tuples to nonzero rational
coefficients, together with an ordered variable list and an inclusive
per-variable truncation cap.  Coefficients with any exponent above its cap
are simply unrepresented: arithmetic never reports a coefficient it cannot
guarantee, so binary operations truncate to the componentwise minimum of the
operand caps.

Negative exponents are permitted in storage (they arise from dividing by
monomials); the caps remain upper bounds only.  Ordinary construction and
arithmetic never introduce them on their own.

Coefficients are gmpy2.mpq rationals throughout.  All operations are pure:
a series is never mutated after construction, so values are safe to share
across threads.
"""

from __future__ import annotations

import itertools
import json
import warnings

import gmpy2
from gmpy2 import mpq, mpz

Rat = mpq

QZERO = mpq(0)
QONE = mpq(1)


class SeriesError(Exception):
    """Base class for series-engine failures."""


class VariableMismatchError(SeriesError):
    """Operands were built over different variable sets."""


class NonInvertibleError(SeriesError):
    """Division by a series with no usable leading unit."""


class OutOfTruncationError(SeriesError):
    """A coefficient beyond the truncation caps was requested.

    Distinct from the coefficient being zero: inside the caps an absent
    exponent means an exact zero, beyond them it means "unknown".
    """


class InsufficientCapError(SeriesError):
    """An operation needed more terms of an input than its caps provide."""


class TruncationLossWarning(UserWarning):
    """A restricted Hadamard join may have lost nonzero tail terms."""


def _as_rat(value) -> Rat:
    if isinstance(value, (mpq, int)) or type(value) is type(mpz(0)):
        return mpq(value)
    if isinstance(value, str):
        return mpq(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def _rat_sqrt(q: Rat) -> Rat:
    """Exact square root of a rational, or raise NonInvertibleError."""
    if q < 0:
        raise NonInvertibleError("square root of a negative constant term")
    num, den = q.numerator, q.denominator
    if not (gmpy2.is_square(num) and gmpy2.is_square(den)):
        raise NonInvertibleError(
            f"constant term {q} is not the square of a rational")
    return mpq(gmpy2.isqrt(num), gmpy2.isqrt(den))


class TruncatedSeries:
    """A truncated multivariate power (or Laurent) series.

    Attributes:
        vars: ordered tuple of distinct variable names.
        caps: tuple of inclusive per-variable truncation orders, aligned
            with ``vars``.
        coeffs: dict mapping exponent tuples to nonzero mpq coefficients.
        truncation_warning: True when some ancestor operation (a restricted
            Hadamard join) may have dropped nonzero terms.
    """

    __slots__ = ("vars", "caps", "coeffs", "truncation_warning")

    def __init__(self, vars, caps, coeffs=None, *, truncation_warning=False,
                 _trusted=False):
        vars = tuple(vars)
        if len(set(vars)) != len(vars):
            raise SeriesError(f"duplicate variable names in {vars}")
        if isinstance(caps, dict):
            caps = tuple(int(caps[v]) for v in vars)
        else:
            caps = tuple(int(c) for c in caps)
        if len(caps) != len(vars):
            raise SeriesError("caps do not align with variables")
        self.vars = vars
        self.caps = caps
        self.truncation_warning = bool(truncation_warning)
        if coeffs is None:
            coeffs = {}
        if _trusted:
            self.coeffs = coeffs
            return
        clean = {}
        for exps, c in coeffs.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(vars):
                raise SeriesError(f"exponent tuple {exps} has wrong length")
            if any(e > cap for e, cap in zip(exps, caps)):
                raise SeriesError(
                    f"exponent {exps} exceeds caps {caps}")
            q = _as_rat(c)
            if q:
                clean[exps] = q
        self.coeffs = clean

    # ----- constructors -------------------------------------------------

    @classmethod
    def zero(cls, vars, caps):
        return cls(vars, caps, {}, _trusted=True)

    @classmethod
    def constant(cls, value, vars, caps):
        q = _as_rat(value)
        zero_key = (0,) * len(tuple(vars))
        coeffs = {zero_key: q} if q else {}
        return cls(vars, caps, coeffs)

    @classmethod
    def one(cls, vars, caps):
        return cls.constant(1, vars, caps)

    @classmethod
    def monomial(cls, vars, caps, exponents, coefficient=1):
        """A single term, e.g. monomial(('x','y'), (8,8), (2,1), 3) = 3x^2y."""
        return cls(vars, caps, {tuple(exponents): _as_rat(coefficient)})

    @classmethod
    def variable(cls, name, vars, caps):
        vars = tuple(vars)
        if name not in vars:
            raise VariableMismatchError(f"{name!r} is not among {vars}")
        exps = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, caps, {exps: QONE})

    # ----- basic queries ------------------------------------------------

    def _var_index(self, name) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise VariableMismatchError(
                f"unknown variable {name!r}; have {self.vars}") from None

    def is_zero(self) -> bool:
        return not self.coeffs

    def min_exponent(self, name) -> int:
        """Smallest exponent of `name` over the support (0 for empty series)."""
        i = self._var_index(name)
        if not self.coeffs:
            return 0
        return min(e[i] for e in self.coeffs)

    def max_exponent(self, name) -> int:
        i = self._var_index(name)
        if not self.coeffs:
            return 0
        return max(e[i] for e in self.coeffs)

    def coefficient(self, exponents) -> Rat:
        """Exact coefficient at the given exponents (0 if absent).

        Raises OutOfTruncationError when any exponent exceeds its cap —
        such a coefficient is unknown, not zero.
        """
        if isinstance(exponents, dict):
            exps = tuple(int(exponents.get(v, 0)) for v in self.vars)
        elif isinstance(exponents, int):
            if len(self.vars) != 1:
                raise SeriesError(
                    "a bare integer exponent needs a univariate series")
            exps = (exponents,)
        else:
            exps = tuple(int(e) for e in exponents)
            if len(exps) != len(self.vars):
                raise SeriesError(
                    f"expected {len(self.vars)} exponents, got {len(exps)}")
        for e, cap in zip(exps, self.caps):
            if e > cap:
                raise OutOfTruncationError(
                    f"exponent {exps} lies beyond caps {self.caps}")
        return self.coeffs.get(exps, QZERO)

    def constant_term(self) -> Rat:
        return self.coeffs.get((0,) * len(self.vars), QZERO)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.vars == other.vars and self.caps == other.caps
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.vars, self.caps,
                     frozenset(self.coeffs.items())))

    def agrees_with(self, other) -> bool:
        """Equality of coefficients over the common truncation box."""
        if self.vars != other.vars:
            raise VariableMismatchError(
                f"{self.vars} vs {other.vars}")
        caps = tuple(map(min, self.caps, other.caps))
        return (self._filtered(caps) == other._filtered(caps))

    def _filtered(self, caps):
        return {e: c for e, c in self.coeffs.items()
                if all(ei <= ci for ei, ci in zip(e, caps))}

    def truncated(self, caps) -> "TruncatedSeries":
        """Tighten caps (a mapping of name -> new cap, each <= current)."""
        new = list(self.caps)
        for name, cap in caps.items():
            i = self._var_index(name)
            if cap > self.caps[i]:
                raise InsufficientCapError(
                    f"cannot raise cap of {name!r} from {self.caps[i]} "
                    f"to {cap} after the fact")
            new[i] = int(cap)
        new = tuple(new)
        return TruncatedSeries(self.vars, new, self._filtered(new),
                               truncation_warning=self.truncation_warning,
                               _trusted=True)

    def with_vars(self, vars, caps=None) -> "TruncatedSeries":
        """Re-express over a variable tuple that contains all current names.

        `caps` maps names to caps for the *new* variables; existing
        variables keep their own caps unless tightened explicitly.
        """
        vars = tuple(vars)
        caps = dict(caps or {})
        new_caps = []
        for v in vars:
            if v in self.vars:
                own = self.caps[self._var_index(v)]
                new_caps.append(min(own, caps[v]) if v in caps else own)
            else:
                if v not in caps:
                    raise SeriesError(f"no cap given for new variable {v!r}")
                new_caps.append(int(caps[v]))
        missing = [v for v in self.vars if v not in vars]
        if missing:
            raise VariableMismatchError(
                f"cannot drop variables {missing} in with_vars")
        pos = [vars.index(v) for v in self.vars]
        out = {}
        for exps, c in self.coeffs.items():
            newe = [0] * len(vars)
            for p, e in zip(pos, exps):
                newe[p] = e
            newe = tuple(newe)
            if all(e <= cap for e, cap in zip(newe, new_caps)):
                out[newe] = c
        return TruncatedSeries(vars, tuple(new_caps), out,
                               truncation_warning=self.truncation_warning,
                               _trusted=True)

    # ----- ring arithmetic ----------------------------------------------

    def _common(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(other, self.vars, self.caps)
        if self.vars != other.vars:
            raise VariableMismatchError(
                f"operands over {self.vars} vs {other.vars}")
        caps = tuple(map(min, self.caps, other.caps))
        return other, caps

    def __add__(self, other):
        other, caps = self._common(other)
        out = dict(self._filtered(caps))
        for e, c in other._filtered(caps).items():
            s = out.get(e, QZERO) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        warn = self.truncation_warning or other.truncation_warning
        return TruncatedSeries(self.vars, caps, out,
                               truncation_warning=warn, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        out = {e: -c for e, c in self.coeffs.items()}
        return TruncatedSeries(self.vars, self.caps, out,
                               truncation_warning=self.truncation_warning,
                               _trusted=True)

    def __sub__(self, other):
        other, _ = self._common(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            q = _as_rat(other)
            if not q:
                return TruncatedSeries.zero(self.vars, self.caps)
            out = {e: c * q for e, c in self.coeffs.items()}
            return TruncatedSeries(self.vars, self.caps, out,
                                   truncation_warning=self.truncation_warning,
                                   _trusted=True)
        other, caps = self._common(other)
        a, b = self.coeffs, other.coeffs
        if len(a) > len(b):
            a, b = b, a
        out = {}
        nvars = len(self.vars)
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(ea[i] + eb[i] for i in range(nvars))
                if any(ei > cap for ei, cap in zip(e, caps)):
                    continue
                s = out.get(e, QZERO) + ca * cb
                if s:
                    out[e] = s
                else:
                    del out[e]
        warn = self.truncation_warning or other.truncation_warning
        return TruncatedSeries(self.vars, caps, out,
                               truncation_warning=warn, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("series exponents must be integers")
        if n < 0:
            return divide(TruncatedSeries.one(self.vars, self.caps),
                          self) ** (-n)
        result = TruncatedSeries.one(self.vars, self.caps)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            q = _as_rat(other)
            if not q:
                raise ZeroDivisionError("series divided by zero constant")
            return self * (QONE / q)
        return divide(self, other)

    def __rtruediv__(self, other):
        num = TruncatedSeries.constant(other, self.vars, self.caps)
        return divide(num, self)

    # ----- monomial shifts ----------------------------------------------

    def shift(self, name, k: int) -> "TruncatedSeries":
        """Multiply by name**k (k may be negative); the cap shifts with it."""
        i = self._var_index(name)
        caps = list(self.caps)
        caps[i] += k
        out = {}
        for exps, c in self.coeffs.items():
            e = list(exps)
            e[i] += k
            out[tuple(e)] = c
        return TruncatedSeries(self.vars, tuple(caps), out,
                               truncation_warning=self.truncation_warning,
                               _trusted=True)

    # ----- serialization ------------------------------------------------

    def to_json_dict(self) -> dict:
        coeffs = sorted(self.coeffs.items())
        return {
            "vars": list(self.vars),
            "caps": {v: c for v, c in zip(self.vars, self.caps)},
            "coeffs": [[list(e), str(c)] for e, c in coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data) -> "TruncatedSeries":
        vars = tuple(data["vars"])
        caps = tuple(int(data["caps"][v]) for v in vars)
        coeffs = {tuple(int(e) for e in exps): mpq(val)
                  for exps, val in data["coeffs"]}
        return cls(vars, caps, coeffs)

    @classmethod
    def from_json(cls, text: str) -> "TruncatedSeries":
        return cls.from_json_dict(json.loads(text))

    # ----- display ------------------------------------------------------

    def __repr__(self):
        n = len(self.coeffs)
        head = ", ".join(
            f"{e}:{c}" for e, c in itertools.islice(
                iter(sorted(self.coeffs.items())), 6))
        more = ", ..." if n > 6 else ""
        capstr = ",".join(f"{v}<={c}" for v, c in zip(self.vars, self.caps))
        return f"<TruncatedSeries [{capstr}] {n} terms {{{head}{more}}}>"


# ---------------------------------------------------------------------------
# Division, square roots
# ---------------------------------------------------------------------------


def _active_indices(*series_list):
    """Indices of variables with a nonzero exponent in any input."""
    nvars = len(series_list[0].vars)
    active = [False] * nvars
    for s in series_list:
        for exps in s.coeffs:
            for i, e in enumerate(exps):
                if e:
                    active[i] = True
    return [i for i in range(nvars) if active[i]]


def _graded_box(caps):
    """All exponent tuples 0 <= e <= caps, sorted by total degree then lex."""
    ranges = [range(c + 1) for c in caps]
    box = list(itertools.product(*ranges))
    box.sort(key=lambda e: (sum(e), e))
    return box


def divide(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """a / b where b has an invertible (nonzero rational) constant term.

    The quotient is computed by triangular recursion in graded order, so a
    single convolution pass suffices; mul(divide(a, b), b) reproduces a up
    to the common caps.  The numerator may carry negative exponents (it is
    shifted to a plain series and back); the denominator may not.
    """
    other, caps = a._common(b)
    b = other
    b0 = b.constant_term()
    if not b0:
        raise NonInvertibleError(
            "denominator has zero constant term; no power-series inverse")
    if any(e < 0 for exps in b.coeffs for e in exps):
        raise NonInvertibleError(
            "denominator has negative exponents; divide expects a plain "
            "power series")
    shifts = {name: a.min_exponent(name) for name in a.vars
              if a.min_exponent(name) < 0}
    work = a
    for name, m in shifts.items():
        work = work.shift(name, -m)
    ps_caps = tuple(cap - shifts.get(name, 0)
                    for name, cap in zip(a.vars, caps))
    q = _ps_divide(work, b, ps_caps)
    for name, m in shifts.items():
        q = q.shift(name, m)
    out = {e: c for e, c in q.coeffs.items()
           if all(ei <= ci for ei, ci in zip(e, caps))}
    warn = a.truncation_warning or b.truncation_warning
    return TruncatedSeries(a.vars, caps, out,
                           truncation_warning=warn, _trusted=True)


def _ps_divide(a, b, caps):
    """Plain power-series division (all exponents >= 0), projected onto the
    variables that actually occur."""
    idx = _active_indices(a, b)
    nvars = len(a.vars)
    sub_caps = tuple(caps[i] for i in idx)
    b0 = b.constant_term()

    def proj(exps):
        return tuple(exps[i] for i in idx)

    a_sub = {}
    for exps, c in a.coeffs.items():
        p = proj(exps)
        if all(e <= cap for e, cap in zip(p, sub_caps)):
            a_sub[p] = a_sub.get(p, QZERO) + c
    b_sub = {}
    for exps, c in b.coeffs.items():
        p = proj(exps)
        if all(e <= cap for e, cap in zip(p, sub_caps)):
            b_sub[p] = b_sub.get(p, QZERO) + c
    b_items = [(e, c) for e, c in b_sub.items() if any(e)]

    q = {}
    for e in _graded_box(sub_caps):
        acc = a_sub.get(e, QZERO)
        for f, c in b_items:
            g = tuple(ei - fi for ei, fi in zip(e, f))
            if any(gi < 0 for gi in g):
                continue
            qg = q.get(g)
            if qg is not None:
                acc -= c * qg
        if acc:
            q[e] = acc / b0

    out = {}
    for e_sub, c in q.items():
        full = [0] * nvars
        for pos, i in enumerate(idx):
            full[i] = e_sub[pos]
        out[tuple(full)] = c
    return TruncatedSeries(a.vars, caps, out, _trusted=True)


def sqrt(a: TruncatedSeries) -> TruncatedSeries:
    """Square root with rational-square constant term (typically 1).

    Uses the coefficient recursion of r*r = a in graded order; the branch
    with positive constant term is returned, and sqrt(a)**2 == a holds to
    the caps.
    """
    if any(e < 0 for exps in a.coeffs for e in exps):
        raise NonInvertibleError("sqrt expects a plain power series")
    c0 = a.constant_term()
    if not c0:
        raise NonInvertibleError(
            "sqrt needs a nonzero constant term (no Puiseux branches here)")
    r0 = _rat_sqrt(c0)

    idx = _active_indices(a)
    nvars = len(a.vars)
    sub_caps = tuple(a.caps[i] for i in idx)
    a_sub = {}
    for exps, c in a.coeffs.items():
        a_sub[tuple(exps[i] for i in idx)] = c

    r = {}
    zero_key = (0,) * len(idx)
    r[zero_key] = r0
    for e in _graded_box(sub_caps):
        if e == zero_key:
            continue
        acc = a_sub.get(e, QZERO)
        # a_e = sum_{f+g=e} r_f r_g; pull out the two boundary terms 2*r0*r_e
        for f, cf in list(r.items()):
            if f == zero_key or f == e:
                continue
            g = tuple(ei - fi for ei, fi in zip(e, f))
            if any(gi < 0 for gi in g):
                continue
            cg = r.get(g)
            if cg is not None:
                acc -= cf * cg
        # Each (f, g) unordered pair got counted twice in the loop above --
        # once as (f, g) and once as (g, f) -- matching the expansion.
        val = acc / (2 * r0)
        if val:
            r[e] = val

    out = {}
    for e_sub, c in r.items():
        full = [0] * nvars
        for pos, i in enumerate(idx):
            full[i] = e_sub[pos]
        out[tuple(full)] = c
    return TruncatedSeries(a.vars, a.caps, out,
                           truncation_warning=a.truncation_warning,
                           _trusted=True)


def pivot_inverse(b: TruncatedSeries, pivot) -> TruncatedSeries:
    """Inverse of b about an explicit pivot monomial (Laurent expansion).

    `pivot` is the exponent tuple of a term of b; writing b = c*m*(1 + M)
    with m the pivot monomial, the Neumann sum over powers of M is taken.
    It must terminate under the caps (each power of M pushes some capped
    exponent up), otherwise the expansion direction is wrong for this
    truncation and NonInvertibleError is raised.
    """
    pivot = tuple(int(e) for e in pivot)
    c = b.coeffs.get(pivot)
    if not c:
        raise NonInvertibleError(f"pivot {pivot} is not a term of b")
    shifted = b
    for name, k in zip(b.vars, pivot):
        if k:
            shifted = shifted.shift(name, -k)
    m = (shifted * (QONE / c)) - TruncatedSeries.one(b.vars, shifted.caps)
    acc = TruncatedSeries.one(b.vars, m.caps)
    power = TruncatedSeries.one(b.vars, m.caps)
    neg = -m
    limit = max(64, sum(cap - min(0, m.min_exponent(v))
                        for v, cap in zip(b.vars, m.caps)) + 8)
    steps = 0
    while True:
        power = power * neg
        if power.is_zero():
            break
        acc = acc + power
        steps += 1
        if steps > limit:
            raise NonInvertibleError(
                "Neumann expansion about this pivot does not terminate "
                "under the caps")
    inv = acc * (QONE / c)
    for name, k in zip(b.vars, pivot):
        if k:
            inv = inv.shift(name, -k)
    return inv


# ---------------------------------------------------------------------------
# Calculus and the specialized operators
# ---------------------------------------------------------------------------


def diff(a: TruncatedSeries, name: str) -> TruncatedSeries:
    """Formal partial derivative; the cap in `name` drops by one."""
    i = a._var_index(name)
    caps = list(a.caps)
    caps[i] -= 1
    out = {}
    for exps, c in a.coeffs.items():
        n = exps[i]
        if n == 0:
            continue
        e = list(exps)
        e[i] = n - 1
        out[tuple(e)] = c * n
    return TruncatedSeries(a.vars, tuple(caps), out,
                           truncation_warning=a.truncation_warning,
                           _trusted=True)


def half_perimeter(a: TruncatedSeries, name: str) -> TruncatedSeries:
    """Even-part relabeling: coefficient of name^(2n) becomes that of name^n.

    Terms odd in `name` are annihilated; the cap halves (floor).  Starred
    companions of `name` are separate variables and pass through untouched.
    """
    i = a._var_index(name)
    caps = list(a.caps)
    caps[i] = caps[i] // 2
    out = {}
    for exps, c in a.coeffs.items():
        n = exps[i]
        if n % 2:
            continue
        e = list(exps)
        e[i] = n // 2
        out[tuple(e)] = c
    return TruncatedSeries(a.vars, tuple(caps), out,
                           truncation_warning=a.truncation_warning,
                           _trusted=True)


def substitute(a: TruncatedSeries, name: str, g) -> TruncatedSeries:
    """Replace `name` by the series g (composition) or by another variable.

    Two shapes are supported, mirroring how such rewrites are used:

    * rename: g is a bare variable (a single exponent-1 term with unit
      coefficient).  Renaming onto an existing variable merges exponents
      and takes the smaller cap.
    * composition: g has zero constant term.  The result lives over the
      union of a's remaining variables and g's variables; caps for shared
      names are the componentwise minimum.

    Composition requires a.cap(name) to cover every power of g that could
    contribute inside the result caps, else InsufficientCapError.
    """
    i = a._var_index(name)
    if not isinstance(g, TruncatedSeries):
        raise TypeError("substitute needs a TruncatedSeries replacement")

    if len(g.coeffs) == 1:
        ((exps, c),) = g.coeffs.items()
        if c == 1 and sum(exps) == 1 and all(e in (0, 1) for e in exps):
            target = g.vars[exps.index(1)]
            return _rename(a, name, target, g.caps[exps.index(1)])

    if g.constant_term():
        raise NonInvertibleError(
            "composition requires a replacement with zero constant term")
    if a.min_exponent(name) < 0:
        raise NonInvertibleError(
            "cannot compose into negative powers of the substituted variable")

    out_vars = tuple(v for v in a.vars if v != name)
    keep = set(out_vars) | set(g.vars)
    # Preserve a's ordering for surviving names; append genuinely new ones.
    vars = tuple(v for v in a.vars if v in keep) + tuple(
        v for v in g.vars if v not in a.vars)
    caps_map = {}
    for v in out_vars:
        caps_map[v] = a.caps[a._var_index(v)]
    for v in g.vars:
        gcap = g.caps[g._var_index(v)]
        caps_map[v] = min(caps_map.get(v, gcap), gcap)
    caps = tuple(caps_map[v] for v in vars)

    kmax = _max_contributing_power(g, caps_map)
    if kmax is not None and a.caps[i] < kmax:
        raise InsufficientCapError(
            f"substituting into {name!r} needs its cap >= {kmax}, "
            f"have {a.caps[i]}")

    g_ext = g.with_vars(vars, caps_map)
    slices = {}
    for exps, c in a.coeffs.items():
        k = exps[i]
        if kmax is not None and k > kmax:
            continue  # every in-cap contribution of g**k vanishes
        rest = tuple(e for j, e in enumerate(exps) if j != i)
        slices.setdefault(k, {})[rest] = c

    positions = [vars.index(v) for v in out_vars]

    def lift(d):
        out = {}
        for rest, c in d.items():
            full = [0] * len(vars)
            for p, e in zip(positions, rest):
                full[p] = e
            key = tuple(full)
            if all(e <= cap for e, cap in zip(key, caps)):
                out[key] = c
        return TruncatedSeries(vars, caps, out, _trusted=True)

    if not slices:
        return TruncatedSeries.zero(vars, caps)
    # Horner evaluation in the substituted variable.
    result = TruncatedSeries.zero(vars, caps)
    for k in range(max(slices), -1, -1):
        result = result * g_ext
        if k in slices:
            result = result + lift(slices[k])
    result.truncation_warning = (result.truncation_warning
                                 or a.truncation_warning
                                 or g.truncation_warning)
    return result


def _max_contributing_power(g, caps_map):
    """Highest power of g that can still land inside caps, or None if the
    replacement is zero (then any power works)."""
    if g.is_zero():
        return None
    best = None
    for j, v in enumerate(g.vars):
        nu = min(exps[j] for exps in g.coeffs)
        if nu >= 1:
            bound = caps_map[v] // nu
            best = bound if best is None else min(best, bound)
    if best is None:
        # No single variable appears in every term; fall back to the total
        # degree bound (minimum total degree is >= 1 since g(0) = 0).
        mu = min(sum(exps) for exps in g.coeffs)
        best = sum(caps_map[v] for v in g.vars) // mu
    return best


def _rename(a, name, target, target_cap):
    i = a._var_index(name)
    if target == name:
        return a
    if target in a.vars:
        # Merging two variables: exponents add, so a sum e_i + e_j is fully
        # known only up to the smaller of the two caps.
        j = a._var_index(target)
        merged_cap = min(a.caps[i], a.caps[j], target_cap)
        vars = tuple(v for v in a.vars if v != name)
        jj = vars.index(target)
        out = {}
        for exps, c in a.coeffs.items():
            e = list(exps)
            e[j] += e[i]
            del e[i]
            key = tuple(e)
            if key[jj] > merged_cap:
                continue
            s = out.get(key, QZERO) + c
            if s:
                out[key] = s
            else:
                del out[key]
        new_caps = tuple(merged_cap if v == target
                         else a.caps[a._var_index(v)] for v in vars)
        return TruncatedSeries(vars, new_caps, out,
                               truncation_warning=a.truncation_warning,
                               _trusted=True)
    vars = tuple(target if v == name else v for v in a.vars)
    caps = list(a.caps)
    caps[i] = min(caps[i], target_cap)
    out = {e: c for e, c in a.coeffs.items() if e[i] <= caps[i]}
    return TruncatedSeries(vars, tuple(caps), out,
                           truncation_warning=a.truncation_warning,
                           _trusted=True)


def hadamard(a: TruncatedSeries, b: TruncatedSeries,
             name: str) -> TruncatedSeries:
    """Hadamard product in one variable: slices in `name` multiply
    coefficientwise while the other variables multiply as series."""
    other, caps = a._common(b)
    b = other
    i = a._var_index(name)

    def split(s):
        buckets = {}
        for exps, c in s.coeffs.items():
            rest = exps[:i] + exps[i + 1:]
            buckets.setdefault(exps[i], {})[rest] = c
        return buckets

    abuck, bbuck = split(a), split(b)
    rest_caps = caps[:i] + caps[i + 1:]
    out = {}
    for n in abuck.keys() & bbuck.keys():
        if n > caps[i]:
            continue
        for ea, ca in abuck[n].items():
            for eb, cb in bbuck[n].items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if any(ei > cap for ei, cap in zip(e, rest_caps)):
                    continue
                key = e[:i] + (n,) + e[i:]
                s = out.get(key, QZERO) + ca * cb
                if s:
                    out[key] = s
                else:
                    del out[key]
    warn = a.truncation_warning or b.truncation_warning
    return TruncatedSeries(a.vars, caps, out,
                           truncation_warning=warn, _trusted=True)


def hadamard_join(a: TruncatedSeries, b: TruncatedSeries,
                  name: str) -> TruncatedSeries:
    """Restricted Hadamard join: sum over n of (coeff of name^n in a) times
    (coeff of name^n in b); `name` is eliminated from the result.

    The sum runs over the truncated range only.  When the last included
    slice product is nonzero the tail may have been lost, so the result
    carries truncation_warning and a TruncationLossWarning is emitted.
    """
    other, caps = a._common(b)
    b = other
    i = a._var_index(name)
    ncap = caps[i]
    vars = a.vars[:i] + a.vars[i + 1:]
    rest_caps = caps[:i] + caps[i + 1:]

    def split(s):
        buckets = {}
        for exps, c in s.coeffs.items():
            if exps[i] > ncap:
                continue
            rest = exps[:i] + exps[i + 1:]
            buckets.setdefault(exps[i], {})[rest] = c
        return buckets

    abuck, bbuck = split(a), split(b)
    out = {}
    last_nonzero = False
    shared = sorted(abuck.keys() & bbuck.keys())
    for n in shared:
        contributed = False
        for ea, ca in abuck[n].items():
            for eb, cb in bbuck[n].items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if any(ei > cap for ei, cap in zip(e, rest_caps)):
                    continue
                s = out.get(e, QZERO) + ca * cb
                contributed = True
                if s:
                    out[e] = s
                else:
                    del out[e]
        if n == ncap and contributed:
            last_nonzero = True
    warn = a.truncation_warning or b.truncation_warning or last_nonzero
    if last_nonzero:
        warnings.warn(
            f"restricted join over {name!r} used its final slice n={ncap}; "
            "the discarded tail may be nonzero", TruncationLossWarning,
            stacklevel=2)
    return TruncatedSeries(vars, rest_caps, out,
                           truncation_warning=warn, _trusted=True)


# Convenient functional aliases mirroring the method-free operations.

def add(a, b):
    return a + b


def mul(a, b):
    return a * b


def coefficient(a, exponents):
    return a.coefficient(exponents)
