"""Arithmetical reading of sequents: realizations and the star translation.

This is a translator and pretty-printer only; no arithmetic is proved here.
Quoted formulas stay opaque (no numbering is computed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .syntax import (
    And,
    Const,
    Diamond,
    Forall,
    Formula,
    ParseError,
    Pred,
    QRCError,
    Sequent,
    Signature,
    Top,
    Var,
)


class RealizationError(QRCError):
    pass


# ---------------------------------------------------------------------------
# arithmetic terms


@dataclass(frozen=True, slots=True)
class ANum:
    value: int


@dataclass(frozen=True, slots=True)
class AVar:
    name: str


@dataclass(frozen=True, slots=True)
class AOp:
    op: str  # "+" or "*"
    left: "ATerm"
    right: "ATerm"


ATerm = Union[ANum, AVar, AOp]


# ---------------------------------------------------------------------------
# arithmetic formulas


@dataclass(frozen=True, slots=True)
class Tau:
    """The axiom-membership predicate applied to the code variable u."""


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str  # "=" or "<="
    left: ATerm
    right: ATerm


@dataclass(frozen=True, slots=True)
class TemplateAtom:
    """An opaque named template atom, e.g. the default reading of a relation."""

    name: str
    args: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class OrA:
    left: "ArithFormula"
    right: "ArithFormula"


@dataclass(frozen=True, slots=True)
class AndA:
    left: "ArithFormula"
    right: "ArithFormula"


@dataclass(frozen=True, slots=True)
class Implies:
    left: "ArithFormula"
    right: "ArithFormula"


@dataclass(frozen=True, slots=True)
class Exists:
    var: str
    body: "ArithFormula"


@dataclass(frozen=True, slots=True)
class BoundedForall:
    var: str
    bound: ATerm
    body: "ArithFormula"


@dataclass(frozen=True, slots=True)
class ForallA:
    """Unbounded universal quantifier (used only for the outer statement)."""

    var: str
    body: "ArithFormula"


@dataclass(frozen=True, slots=True)
class TheoremVar:
    """The schematic sentence variable of the provability statement."""


@dataclass(frozen=True, slots=True)
class Quote:
    body: "ArithFormula"


@dataclass(frozen=True, slots=True)
class ConOf:
    """Formalized consistency of the axiom set defined by the body."""

    axioms: "ArithFormula"


@dataclass(frozen=True, slots=True)
class EqQuote:
    """u = <quoted formula>; the second disjunct of the diamond clause."""

    quote: Quote


@dataclass(frozen=True, slots=True)
class BoxOf:
    """Formalized provability from the axiom set defined by `axioms`."""

    axioms: "ArithFormula"
    target: "ArithFormula"


ArithFormula = Union[
    Tau,
    Cmp,
    TemplateAtom,
    OrA,
    AndA,
    Implies,
    Exists,
    BoundedForall,
    ForallA,
    TheoremVar,
    Quote,
    ConOf,
    EqQuote,
    BoxOf,
]


# ---------------------------------------------------------------------------
# realizations


@dataclass(frozen=True)
class Realization:
    """Per-relation templates; each n-ary relation maps to a template whose
    parameters are its n argument slots, with the code variable u implicit."""

    templates: dict[str, tuple[tuple[str, ...], ArithFormula]]

    def template_for(self, name: str, arity: int) -> tuple[tuple[str, ...], ArithFormula]:
        if name not in self.templates:
            raise RealizationError(f"no template for relation {name}")
        params, body = self.templates[name]
        if len(params) != arity:
            raise RealizationError(
                f"template for {name} has {len(params)} parameters, relation has arity {arity}"
            )
        return params, body


def default_realization(sig: Signature) -> Realization:
    """Each relation becomes an opaque template atom carrying its own name."""
    templates = {}
    for name, arity in sig.relations:
        params = tuple(f"a{i}" for i in range(arity))
        templates[name] = (params, TemplateAtom(name, params + ("u",)))
    return Realization(templates)


# ---------------------------------------------------------------------------
# parameter indexing: constants -> y_i, object variables -> z_i


@dataclass(frozen=True)
class ParamIndex:
    y_of: dict[str, str]  # constant name -> y variable
    z_of: dict[str, str]  # object variable name -> z variable

    def ordered_params(self) -> list[str]:
        return sorted(self.y_of.values(), key=_param_key) + sorted(
            self.z_of.values(), key=_param_key
        )


def _param_key(p: str) -> tuple[str, int]:
    return p[0], int(p[1:])


def _occurring_vars(f: Formula, acc: list[str]) -> None:
    match f:
        case Top():
            pass
        case Pred(_, args):
            for t in args:
                if isinstance(t, Var) and t.name not in acc:
                    acc.append(t.name)
        case And(l, r):
            _occurring_vars(l, acc)
            _occurring_vars(r, acc)
        case Diamond(b):
            _occurring_vars(b, acc)
        case Forall(x, b):
            if x not in acc:
                acc.append(x)
            _occurring_vars(b, acc)


def _occurring_consts(f: Formula, acc: list[str]) -> None:
    match f:
        case Pred(_, args):
            for t in args:
                if isinstance(t, Const) and t.name not in acc:
                    acc.append(t.name)
        case And(l, r):
            _occurring_consts(l, acc)
            _occurring_consts(r, acc)
        case Diamond(b):
            _occurring_consts(b, acc)
        case Forall(_, b):
            _occurring_consts(b, acc)
        case _:
            pass


def param_index(formulas: Iterable[Formula], sig: Signature | None = None) -> ParamIndex:
    """Constants take y-indices by signature position when a signature is
    given (otherwise first occurrence); variables take z-indices by first
    occurrence."""
    consts: list[str] = []
    vars_: list[str] = []
    for f in formulas:
        _occurring_consts(f, consts)
        _occurring_vars(f, vars_)
    if sig is not None:
        order = {c: i for i, c in enumerate(sig.constants)}
        known = sorted((c for c in consts if c in order), key=order.get)
        unknown = sorted(c for c in consts if c not in order)
        y_of = {c: f"y{order[c]}" for c in known}
        next_i = len(sig.constants)
        for c in unknown:
            y_of[c] = f"y{next_i}"
            next_i += 1
    else:
        y_of = {c: f"y{i}" for i, c in enumerate(consts)}
    z_of = {x: f"z{i}" for i, x in enumerate(vars_)}
    return ParamIndex(y_of, z_of)


# ---------------------------------------------------------------------------
# the star translation


def _subst_term(t: ATerm, env: dict[str, str]) -> ATerm:
    match t:
        case AVar(name):
            return AVar(env.get(name, name))
        case AOp(op, l, r):
            return AOp(op, _subst_term(l, env), _subst_term(r, env))
        case _:
            return t


def _subst(f: ArithFormula, env: dict[str, str]) -> ArithFormula:
    match f:
        case Cmp(op, l, r):
            return Cmp(op, _subst_term(l, env), _subst_term(r, env))
        case TemplateAtom(name, args):
            return TemplateAtom(name, tuple(env.get(a, a) for a in args))
        case OrA(l, r):
            return OrA(_subst(l, env), _subst(r, env))
        case AndA(l, r):
            return AndA(_subst(l, env), _subst(r, env))
        case Exists(v, b):
            inner = {k: w for k, w in env.items() if k != v}
            return Exists(v, _subst(b, inner))
        case BoundedForall(v, bound, b):
            inner = {k: w for k, w in env.items() if k != v}
            return BoundedForall(v, _subst_term(bound, env), _subst(b, inner))
        case _:
            return f


def _term_param(t: Var | Const, idx: ParamIndex) -> str:
    if isinstance(t, Const):
        return idx.y_of[t.name]
    return idx.z_of[t.name]


def realize(f: Formula, r: Realization, idx: ParamIndex | None = None, sig: Signature | None = None) -> ArithFormula:
    """Structural translation: T to Tau; atoms to template-or-Tau; conjunction
    to disjunction of translations; diamond to Tau-or-consistency-code;
    universal object quantifiers to existential z quantifiers."""
    if idx is None:
        idx = param_index([f], sig)
    return _realize(f, r, idx)


def _realize(f: Formula, r: Realization, idx: ParamIndex) -> ArithFormula:
    match f:
        case Top():
            return Tau()
        case Pred(name, args):
            params, body = r.template_for(name, len(args))
            env = {p: _term_param(t, idx) for p, t in zip(params, args)}
            return OrA(_subst(body, env), Tau())
        case And(l, rr):
            return OrA(_realize(l, r, idx), _realize(rr, r, idx))
        case Diamond(b):
            return OrA(Tau(), EqQuote(Quote(ConOf(_realize(b, r, idx)))))
        case Forall(x, b):
            return Exists(idx.z_of[x], _realize(b, r, idx))
    raise RealizationError(f"cannot translate {f!r}")


def arith_sequent(s: Sequent, r: Realization, sig: Signature | None = None) -> ArithFormula:
    """The provability statement for a sequent: for every sentence and every
    choice of parameters, provability from the right translation's axiom set
    implies provability from the left's."""
    idx = param_index([s.lhs, s.rhs], sig)
    lhs_t = _realize(s.lhs, r, idx)
    rhs_t = _realize(s.rhs, r, idx)
    body: ArithFormula = Implies(BoxOf(rhs_t, TheoremVar()), BoxOf(lhs_t, TheoremVar()))
    for p in reversed(idx.ordered_params()):
        body = ForallA(p, body)
    return ForallA("θ", body)


# ---------------------------------------------------------------------------
# rendering


def render_term(t: ATerm) -> str:
    match t:
        case ANum(v):
            return str(v)
        case AVar(name):
            return name
        case AOp(op, l, r):
            ls = render_term(l)
            rs = render_term(r)
            if op == "*":
                if isinstance(l, AOp) and l.op == "+":
                    ls = f"({ls})"
                if isinstance(r, AOp) and r.op == "+":
                    rs = f"({rs})"
            op_str = "×" if op == "*" else " + "
            return f"{ls}{op_str}{rs}" if op == "+" else f"{ls}{op_str}{rs}"
    raise RealizationError(f"bad term {t!r}")


def render(f: ArithFormula) -> str:
    match f:
        case Tau():
            return "τ(u)"
        case TheoremVar():
            return "θ"
        case Cmp(op, l, r):
            op_str = "=" if op == "=" else "≤"
            return f"{render_term(l)} {op_str} {render_term(r)}"
        case TemplateAtom(name, args):
            return f"{name}({', '.join(args)})"
        case Quote(b):
            return f"⌜{render(b)}⌝"
        case ConOf(a):
            return f"Con_{{{render(a)}}}"
        case EqQuote(q):
            return f"u = {render(q)}"
        case BoxOf(a, target):
            return f"□_{{{render(a)}}}{render(target)}"
        case OrA(l, r):
            return f"{_paren_or(l)} ∨ {_paren_or(r)}"
        case AndA(l, r):
            return f"{_paren_and(l)} ∧ {_paren_and(r)}"
        case Implies(l, r):
            return f"{render(l)} → {render(r)}"
        case Exists(v, b):
            return f"∃{v} {_paren_q(b)}"
        case BoundedForall(v, bound, b):
            return f"∀{v} ≤ {render_term(bound)} {_paren_q(b)}"
        case ForallA(v, b):
            if isinstance(b, ForallA):
                return f"∀{v} {render(b)}"
            return f"∀{v} ({render(b)})"
    raise RealizationError(f"cannot render {f!r}")


def _paren_or(f: ArithFormula) -> str:
    if isinstance(f, (AndA, Implies, Exists, BoundedForall, ForallA, EqQuote)):
        return f"({render(f)})"
    return render(f)


def _paren_and(f: ArithFormula) -> str:
    if isinstance(f, (OrA, Implies, Exists, BoundedForall, ForallA, EqQuote)):
        return f"({render(f)})"
    return render(f)


def _paren_q(f: ArithFormula) -> str:
    if isinstance(f, (Tau, Cmp, TemplateAtom, TheoremVar)):
        return render(f)
    return f"({render(f)})"


def arith_to_dict(f: ArithFormula) -> dict:
    match f:
        case Tau():
            return {"node": "tau"}
        case TheoremVar():
            return {"node": "theorem-var"}
        case Cmp(op, l, r):
            return {"node": "cmp", "op": op, "left": render_term(l), "right": render_term(r)}
        case TemplateAtom(name, args):
            return {"node": "template-atom", "name": name, "args": list(args)}
        case Quote(b):
            return {"node": "quote", "body": arith_to_dict(b)}
        case ConOf(a):
            return {"node": "con", "axioms": arith_to_dict(a)}
        case EqQuote(q):
            return {"node": "eq-quote", "quote": arith_to_dict(q)}
        case BoxOf(a, t):
            return {"node": "box", "axioms": arith_to_dict(a), "target": arith_to_dict(t)}
        case OrA(l, r):
            return {"node": "or", "left": arith_to_dict(l), "right": arith_to_dict(r)}
        case AndA(l, r):
            return {"node": "and", "left": arith_to_dict(l), "right": arith_to_dict(r)}
        case Implies(l, r):
            return {"node": "implies", "left": arith_to_dict(l), "right": arith_to_dict(r)}
        case Exists(v, b):
            return {"node": "exists", "var": v, "body": arith_to_dict(b)}
        case BoundedForall(v, bound, b):
            return {"node": "bounded-forall", "var": v, "bound": render_term(bound), "body": arith_to_dict(b)}
        case ForallA(v, b):
            return {"node": "forall", "var": v, "body": arith_to_dict(b)}
    raise RealizationError(f"cannot serialize {f!r}")


# ---------------------------------------------------------------------------
# sigma-1 shape lint (warnings, never errors)


def sigma1_warnings(f: ArithFormula, prefix_ok: bool = True) -> list[str]:
    """Warn when a template strays from the shape `existential block over a
    matrix with only bounded quantifiers`."""
    out: list[str] = []

    def walk(g: ArithFormula, in_prefix: bool) -> None:
        match g:
            case Exists(v, b):
                if not in_prefix:
                    out.append(f"unbounded existential ∃{v} outside the leading block")
                walk(b, in_prefix)
            case ForallA(v, _b):
                out.append(f"unbounded universal ∀{v}")
                walk(_b, False)
            case BoundedForall(_, _, b):
                walk(b, False)
            case OrA(l, r) | AndA(l, r) | Implies(l, r):
                walk(l, False)
                walk(r, False)
            case _:
                pass

    walk(f, prefix_ok)
    return out


# ---------------------------------------------------------------------------
# realization files
#
# One template per line:   S(a)     := E v . a + v = u
#                          R(a, b)  := a + b <= u
# Arithmetic grammar: comparisons t = t and t <= t over terms built from
# numerals, names, + and *; connectives & and | (| binds looser); E x . for
# an existential and A x <= t . for a bounded universal; parentheses group.


class _ArithParser:
    def __init__(self, tokens: list[str], line: int):
        self.toks = tokens
        self.i = 0
        self.line = line

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        if self.i >= len(self.toks):
            raise ParseError(f"line {self.line}: unexpected end of template")
        tok = self.toks[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"line {self.line}: expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def formula(self) -> ArithFormula:
        out = self.conjunct()
        while self.peek() == "|":
            self.take()
            out = OrA(out, self.conjunct())
        return out

    def conjunct(self) -> ArithFormula:
        out = self.unit()
        while self.peek() == "&":
            self.take()
            out = AndA(out, self.unit())
        return out

    def unit(self) -> ArithFormula:
        tok = self.peek()
        if tok == "E":
            self.take()
            v = self.take()
            self.take(".")
            return Exists(v, self.unit())
        if tok == "A":
            self.take()
            v = self.take()
            self.take("<=")
            bound = self.term()
            self.take(".")
            return BoundedForall(v, bound, self.unit())
        if tok == "(":
            save = self.i
            self.take()
            try:
                inner = self.formula()
                self.take(")")
                return inner
            except ParseError:
                self.i = save  # parenthesized term inside a comparison
        return self.comparison()

    def comparison(self) -> ArithFormula:
        left = self.term()
        op = self.take()
        if op not in ("=", "<="):
            raise ParseError(f"line {self.line}: expected = or <=, found {op!r}")
        return Cmp(op, left, self.term())

    def term(self) -> ATerm:
        out = self.factor()
        while self.peek() == "+":
            self.take()
            out = AOp("+", out, self.factor())
        return out

    def factor(self) -> ATerm:
        out = self.prim()
        while self.peek() == "*":
            self.take()
            out = AOp("*", out, self.prim())
        return out

    def prim(self) -> ATerm:
        tok = self.take()
        if tok == "(":
            inner = self.term()
            self.take(")")
            return inner
        if tok.isdigit():
            return ANum(int(tok))
        if tok.replace("_", "").isalnum():
            return AVar(tok)
        raise ParseError(f"line {self.line}: bad term token {tok!r}")


_ARITH_PUNCT = ("<=", ":=", "(", ")", ",", ".", "&", "|", "=", "+", "*")


def _tokenize_arith(text: str, line: int) -> list[str]:
    toks: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for p in _ARITH_PUNCT:
            if text.startswith(p, i):
                toks.append(p)
                i += len(p)
                break
        else:
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i:
                raise ParseError(f"line {line}: bad character {ch!r} in template")
            toks.append(text[i:j])
            i = j
    return toks


def parse_realization(text: str) -> tuple[Realization, list[str]]:
    """Parse a realization file; returns the realization and any shape
    warnings, keyed by relation."""
    templates: dict[str, tuple[tuple[str, ...], ArithFormula]] = {}
    warnings: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if ":=" not in stripped:
            raise ParseError(f"line {lineno}: expected `relation(params) := template`")
        head, body_src = stripped.split(":=", 1)
        head_toks = _tokenize_arith(head, lineno)
        if len(head_toks) < 3 or head_toks[1] != "(" or head_toks[-1] != ")":
            raise ParseError(f"line {lineno}: bad template head {head.strip()!r}")
        name = head_toks[0]
        params = tuple(t for t in head_toks[2:-1] if t != ",")
        if len(set(params)) != len(params):
            raise ParseError(f"line {lineno}: repeated parameter in template for {name}")
        if "u" in params:
            raise ParseError(f"line {lineno}: u is reserved for the axiom code")
        parser = _ArithParser(_tokenize_arith(body_src, lineno), lineno)
        body = parser.formula()
        if parser.peek() is not None:
            raise ParseError(f"line {lineno}: trailing input {parser.peek()!r}")
        if name in templates:
            raise ParseError(f"line {lineno}: duplicate template for {name}")
        templates[name] = (params, body)
        for w in sigma1_warnings(body):
            warnings.append(f"{name}: {w}")
    return Realization(templates), warnings
