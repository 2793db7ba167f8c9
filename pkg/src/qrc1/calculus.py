"""Derivations for the sequent calculus, a checker, derived rules, and proof search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .syntax import (
    And,
    Const,
    Diamond,
    Forall,
    Formula,
    Pred,
    QRCError,
    Sequent,
    Signature,
    Term,
    TOP,
    Top,
    Var,
    free_for,
    free_vars,
    constants_of,
    mdepth,
    pretty,
    pretty_sequent,
    sort_key,
    subformulas,
    substitute,
    substitute_sequent,
)

TOP_I = "TopI"
ID = "Id"
AND_E_L = "AndE-L"
AND_E_R = "AndE-R"
AND_I = "AndI"
CUT = "Cut"
NEC = "Nec"
TRANS_AX = "TransAx"
BARCAN_AX = "BarcanAx"
FORALL_R = "ForallR"
FORALL_L = "ForallL"
TERM_INST = "TermInst"
CONST_GEN = "ConstGen"

LEAF_RULES = frozenset({TOP_I, ID, AND_E_L, AND_E_R, TRANS_AX, BARCAN_AX})
ALL_RULES = LEAF_RULES | {AND_I, CUT, NEC, FORALL_R, FORALL_L, TERM_INST, CONST_GEN}


class DerivationError(QRCError):
    pass


@dataclass(frozen=True, slots=True)
class Instantiation:
    """Binding data a rule mentions: the variable and the term (or constant)."""

    var: str
    term: Term


@dataclass(frozen=True, slots=True)
class Derivation:
    rule: str
    conclusion: Sequent
    premises: tuple["Derivation", ...] = ()
    instantiation: Optional[Instantiation] = None

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def leaves(self) -> Iterator["Derivation"]:
        if not self.premises:
            yield self
        for p in self.premises:
            yield from p.leaves()


# ---------------------------------------------------------------------------
# checking


def _fail(d: Derivation, msg: str) -> None:
    raise DerivationError(f"{d.rule} concluding '{pretty_sequent(d.conclusion)}': {msg}")


def _well_formed(f: Formula, sig: Signature, d: Derivation) -> None:
    match f:
        case Top():
            pass
        case Pred(name, args):
            arity = sig.arities.get(name)
            if arity is None:
                _fail(d, f"undeclared relation {name!r}")
            if arity != len(args):
                _fail(d, f"arity mismatch for {name!r}")
        case And(l, r):
            _well_formed(l, sig, d)
            _well_formed(r, sig, d)
        case Diamond(b) | Forall(_, b):
            _well_formed(b, sig, d)


def check_derivation(d: Derivation, sig: Signature) -> Sequent:
    """Verify every node of d, returning its conclusion. Raises DerivationError."""
    phi, psi = d.conclusion.lhs, d.conclusion.rhs
    _well_formed(phi, sig, d)
    _well_formed(psi, sig, d)

    expected_premises = 0 if d.rule in LEAF_RULES else 2 if d.rule in (AND_I, CUT) else 1
    if d.rule not in ALL_RULES:
        _fail(d, f"unknown rule {d.rule!r}")
    if len(d.premises) != expected_premises:
        _fail(d, f"expected {expected_premises} premises, found {len(d.premises)}")
    for p in d.premises:
        check_derivation(p, sig)

    inst = d.instantiation
    match d.rule:
        case "TopI":
            if psi != TOP:
                _fail(d, "right-hand side must be T")
        case "Id":
            if phi != psi:
                _fail(d, "sides must be identical")
        case "AndE-L":
            if not (isinstance(phi, And) and phi.left == psi):
                _fail(d, "conclusion must be (psi & chi) |- psi")
        case "AndE-R":
            if not (isinstance(phi, And) and phi.right == psi):
                _fail(d, "conclusion must be (chi & psi) |- psi")
        case "AndI":
            (p1, p2) = d.premises
            if not isinstance(psi, And):
                _fail(d, "right-hand side must be a conjunction")
            if p1.conclusion != Sequent(phi, psi.left):
                _fail(d, "first premise must conclude lhs |- left conjunct")
            if p2.conclusion != Sequent(phi, psi.right):
                _fail(d, "second premise must conclude lhs |- right conjunct")
        case "Cut":
            (p1, p2) = d.premises
            if p1.conclusion.lhs != phi:
                _fail(d, "first premise lhs mismatch")
            if p2.conclusion.rhs != psi:
                _fail(d, "second premise rhs mismatch")
            if p1.conclusion.rhs != p2.conclusion.lhs:
                _fail(d, "cut formula mismatch between premises")
        case "Nec":
            (p1,) = d.premises
            if not (isinstance(phi, Diamond) and isinstance(psi, Diamond)):
                _fail(d, "both sides must start with <>")
            if p1.conclusion != Sequent(phi.body, psi.body):
                _fail(d, "premise must conclude the unboxed sequent")
        case "TransAx":
            if not (
                isinstance(phi, Diamond)
                and isinstance(phi.body, Diamond)
                and isinstance(psi, Diamond)
                and phi.body.body == psi.body
            ):
                _fail(d, "conclusion must be <><>phi |- <>phi")
        case "BarcanAx":
            if not (
                isinstance(phi, Diamond)
                and isinstance(phi.body, Forall)
                and isinstance(psi, Forall)
                and phi.body.var == psi.var
                and isinstance(psi.body, Diamond)
                and phi.body.body == psi.body.body
            ):
                _fail(d, "conclusion must be <>A x . phi |- A x . <>phi")
        case "ForallR":
            (p1,) = d.premises
            if not isinstance(psi, Forall):
                _fail(d, "right-hand side must be universally quantified")
            if psi.var in free_vars(phi):
                _fail(d, f"side condition violated: {psi.var} is free in the lhs")
            if p1.conclusion != Sequent(phi, psi.body):
                _fail(d, "premise must conclude lhs |- body")
        case "ForallL":
            (p1,) = d.premises
            if inst is None:
                _fail(d, "missing instantiation")
            if not isinstance(phi, Forall) or phi.var != inst.var:
                _fail(d, "left-hand side must quantify the instantiation variable")
            if not free_for(inst.term, inst.var, phi.body):
                _fail(d, "side condition violated: term not free for the variable")
            if p1.conclusion != Sequent(substitute(phi.body, inst.var, inst.term), psi):
                _fail(d, "premise must conclude the instantiated body |- rhs")
        case "TermInst":
            (p1,) = d.premises
            if inst is None:
                _fail(d, "missing instantiation")
            pphi, ppsi = p1.conclusion.lhs, p1.conclusion.rhs
            if not (free_for(inst.term, inst.var, pphi) and free_for(inst.term, inst.var, ppsi)):
                _fail(d, "side condition violated: term not free for the variable")
            if d.conclusion != substitute_sequent(p1.conclusion, inst.var, inst.term):
                _fail(d, "conclusion must be the substituted premise")
        case "ConstGen":
            (p1,) = d.premises
            if inst is None or not isinstance(inst.term, Const):
                _fail(d, "instantiation must name a constant")
            c = inst.term.name
            if c in constants_of(phi) | constants_of(psi):
                _fail(d, f"side condition violated: {c} occurs in the conclusion")
            if p1.conclusion != substitute_sequent(d.conclusion, inst.var, inst.term):
                _fail(d, "premise must be the conclusion with the constant substituted")
    return d.conclusion


# ---------------------------------------------------------------------------
# derived rules (Lemma-style elaborations into primitive rules)


def _id(f: Formula) -> Derivation:
    return Derivation(ID, Sequent(f, f))


def _forall_l(d: Derivation, x: str, t: Term, quantified: Formula) -> Derivation:
    return Derivation(
        FORALL_L,
        Sequent(Forall(x, quantified), d.conclusion.rhs),
        (d,),
        Instantiation(x, t),
    )


def _forall_r(d: Derivation, x: str) -> Derivation:
    return Derivation(FORALL_R, Sequent(d.conclusion.lhs, Forall(x, d.conclusion.rhs)), (d,))


def _cut(d1: Derivation, d2: Derivation) -> Derivation:
    return Derivation(CUT, Sequent(d1.conclusion.lhs, d2.conclusion.rhs), (d1, d2))


def derived_swap_foralls(f: Formula, x: str, y: str) -> Derivation:
    """A x . A y . f |- A y . A x . f"""
    if x == y:
        return _id(Forall(x, Forall(y, f)))
    d = _forall_l(_id(f), y, Var(y), f)  # A y . f |- f
    d = _forall_l(d, x, Var(x), Forall(y, f))  # A x . A y . f |- f
    d = _forall_r(d, x)  # A x . A y . f |- A x . f
    d = _forall_r(d, y)  # A x . A y . f |- A y . A x . f
    return d


def derived_inst(f: Formula, x: str, t: Term) -> Derivation:
    """A x . f |- f[x/t]  (t free for x in f)"""
    body = substitute(f, x, t)
    return _forall_l(_id(body), x, t, f)


def derived_rename(f: Formula, x: str, y: str) -> Derivation:
    """A x . f |- A y . f[x/y]  (y free for x in f, y not free in f)"""
    if y != x and y in free_vars(f):
        raise DerivationError(f"{y} is free in {pretty(f)}")
    return _forall_r(derived_inst(f, x, Var(y)), y)


def derived_inst_rhs(premise: Derivation, x: str, t: Term) -> Derivation:
    """From phi |- psi conclude phi |- psi[x/t]  (x not free in phi, t free for x in psi)"""
    phi, psi = premise.conclusion.lhs, premise.conclusion.rhs
    if x in free_vars(phi):
        raise DerivationError(f"{x} is free in the left-hand side")
    d1 = _forall_r(premise, x)  # phi |- A x . psi
    d2 = derived_inst(psi, x, t)  # A x . psi |- psi[x/t]
    return _cut(d1, d2)


def derived_gen_rhs(premise: Derivation, x: str, c: str) -> Derivation:
    """From phi |- psi[x/c] conclude phi |- A x . psi  (x not free in phi, c fresh)"""
    phi = premise.conclusion.lhs
    if x in free_vars(phi):
        raise DerivationError(f"{x} is free in the left-hand side")
    # phi[x/c] = phi, so ConstGen turns phi |- psi[x/c] into phi |- psi
    d = Derivation(
        CONST_GEN,
        Sequent(phi, _psi_of_gen(premise, x, c)),
        (premise,),
        Instantiation(x, Const(c)),
    )
    return _forall_r(d, x)


def _psi_of_gen(premise: Derivation, x: str, c: str) -> Formula:
    # recover psi from psi[x/c]: replace every occurrence of c by x
    return _const_to_var(premise.conclusion.rhs, c, x)


def _const_to_var(f: Formula, c: str, x: str) -> Formula:
    match f:
        case Top():
            return f
        case Pred(name, args):
            return Pred(name, tuple(Var(x) if isinstance(a, Const) and a.name == c else a for a in args))
        case And(l, r):
            return And(_const_to_var(l, c, x), _const_to_var(r, c, x))
        case Diamond(b):
            return Diamond(_const_to_var(b, c, x))
        case Forall(z, b):
            return Forall(z, _const_to_var(b, c, x))
    raise TypeError(f"not a formula: {f!r}")


DERIVED_RULES = {
    "swap-foralls": derived_swap_foralls,
    "inst": derived_inst,
    "rename": derived_rename,
    "inst-rhs": derived_inst_rhs,
    "gen-rhs": derived_gen_rhs,
}


def derived_rule(name: str, *args, **kwargs) -> Derivation:
    try:
        builder = DERIVED_RULES[name]
    except KeyError:
        raise DerivationError(f"unknown derived rule {name!r}") from None
    return builder(*args, **kwargs)


# ---------------------------------------------------------------------------
# proof search


FRESH_CONST_PREFIX = "#"
FRESH_VAR_PREFIX = "v#"


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    cache_hits: int = 0


class ProofSearch:
    """Iterative-deepening backward proof search.

    The search is goal-directed: at each goal it applies rule inversions, with
    Cut restricted to a finite candidate pool that widens with the budget so
    that every derivable sequent is reachable at some budget.
    """

    def __init__(self, sig: Signature, max_cache: int = 200_000):
        self.sig = sig
        self.stats = SearchStats()
        self._proved: dict[Sequent, Derivation] = {}
        self._failed_at: dict[Sequent, int] = {}
        self._max_cache = max_cache
        self._fresh_counter = itertools.count()

    def prove(self, goal: Sequent, budget: int) -> Optional[Derivation]:
        """Search for a derivation of `goal` with at most `budget` nodes."""
        for limit in range(1, budget + 1):
            d = self._search(goal, limit)
            if d is not None:
                check_derivation(d, self._search_signature(d))
                return d
        return None

    def _search_signature(self, d: Derivation) -> Signature:
        # fresh constants introduced during the search must type-check
        extra: set[str] = set()

        def walk(node: Derivation) -> None:
            extra.update(constants_of(node.conclusion.lhs))
            extra.update(constants_of(node.conclusion.rhs))
            for p in node.premises:
                walk(p)

        walk(d)
        return self.sig.with_constants(sorted(extra))

    def _search(self, goal: Sequent, limit: int) -> Optional[Derivation]:
        if limit <= 0:
            return None
        cached = self._proved.get(goal)
        if cached is not None and cached.size() <= limit:
            self.stats.cache_hits += 1
            return cached
        if self._failed_at.get(goal, 0) >= limit:
            self.stats.cache_hits += 1
            return None
        if mdepth(goal.lhs) < mdepth(goal.rhs):
            self._failed_at[goal] = 10**9  # necessary condition, never derivable
            return None
        self.stats.nodes_expanded += 1
        found = self._try_moves(goal, limit)
        if found is not None:
            if len(self._proved) < self._max_cache:
                self._proved[goal] = found
        else:
            if len(self._failed_at) < self._max_cache:
                self._failed_at[goal] = max(self._failed_at.get(goal, 0), limit)
        return found

    def _try_moves(self, goal: Sequent, limit: int) -> Optional[Derivation]:
        phi, psi = goal.lhs, goal.rhs

        # leaves
        if psi == TOP:
            return Derivation(TOP_I, goal)
        if phi == psi:
            return Derivation(ID, goal)
        if isinstance(phi, And):
            if phi.left == psi:
                return Derivation(AND_E_L, goal)
            if phi.right == psi:
                return Derivation(AND_E_R, goal)
        if (
            isinstance(phi, Diamond)
            and isinstance(phi.body, Diamond)
            and isinstance(psi, Diamond)
            and phi.body.body == psi.body
        ):
            return Derivation(TRANS_AX, goal)
        if (
            isinstance(phi, Diamond)
            and isinstance(phi.body, Forall)
            and isinstance(psi, Forall)
            and isinstance(psi.body, Diamond)
            and phi.body.var == psi.var
            and phi.body.body == psi.body.body
        ):
            return Derivation(BARCAN_AX, goal)

        if limit < 2:
            return None

        # invertible right rules first
        if isinstance(psi, And):
            d = self._search_pair(Sequent(phi, psi.left), Sequent(phi, psi.right), limit - 1)
            if d is not None:
                return Derivation(AND_I, goal, d)
        if isinstance(psi, Forall) and psi.var not in free_vars(phi):
            d = self._search(Sequent(phi, psi.body), limit - 1)
            if d is not None:
                return Derivation(FORALL_R, goal, (d,))
        if isinstance(phi, Diamond) and isinstance(psi, Diamond):
            d = self._search(Sequent(phi.body, psi.body), limit - 1)
            if d is not None:
                return Derivation(NEC, goal, (d,))

        # left decomposition through cuts with projection leaves
        if isinstance(phi, And) and limit >= 3:
            for proj_rule, kept in ((AND_E_L, phi.left), (AND_E_R, phi.right)):
                d = self._search(Sequent(kept, psi), limit - 2)
                if d is not None:
                    leaf = Derivation(proj_rule, Sequent(phi, kept))
                    return Derivation(CUT, goal, (leaf, d))

        if isinstance(phi, Forall):
            for t in self._term_candidates(goal, limit):
                if not free_for(t, phi.var, phi.body):
                    continue
                inst = substitute(phi.body, phi.var, t)
                d = self._search(Sequent(inst, psi), limit - 1)
                if d is not None:
                    return Derivation(FORALL_L, goal, (d,), Instantiation(phi.var, t))

        # general cut over a widening candidate pool
        if limit >= 3:
            for chi in self._cut_pool(goal, limit):
                if chi == phi or chi == psi:
                    continue
                d = self._search_pair(Sequent(phi, chi), Sequent(chi, psi), limit - 1)
                if d is not None:
                    return Derivation(CUT, goal, d)

        # ground a free variable with a reserved fresh constant
        fv = sorted(free_vars(phi) | free_vars(psi))
        if fv and limit >= 2:
            x = fv[0]
            c = self._fresh_const(goal)
            sub = substitute_sequent(goal, x, Const(c))
            d = self._search(sub, limit - 1)
            if d is not None:
                return Derivation(CONST_GEN, goal, (d,), Instantiation(x, Const(c)))

        # generalize a term away (inverse term instantiation), only at
        # larger budgets; abstracts every occurrence of the chosen term
        if limit >= 6:
            for t in self._generalizable_terms(goal):
                x = self._fresh_var(goal)
                gen = Sequent(
                    _term_to_var(phi, t, x), _term_to_var(psi, t, x)
                )
                if gen == goal:
                    continue
                if not (free_for(t, x, gen.lhs) and free_for(t, x, gen.rhs)):
                    continue
                if substitute_sequent(gen, x, t) != goal:
                    continue
                d = self._search(gen, limit - 1)
                if d is not None:
                    return Derivation(TERM_INST, goal, (d,), Instantiation(x, t))
        return None

    def _search_pair(
        self, g1: Sequent, g2: Sequent, limit: int
    ) -> Optional[tuple[Derivation, Derivation]]:
        # limit counts nodes available for both premises together
        d1 = self._search(g1, limit - 1)
        if d1 is None:
            return None
        d2 = self._search(g2, limit - d1.size())
        if d2 is None:
            # retry with the order swapped in case the first proof was large
            d2 = self._search(g2, limit - 1)
            if d2 is None:
                return None
            d1b = self._search(g1, limit - d2.size())
            if d1b is None:
                return None
            return (d1b, d2)
        return (d1, d2)

    def _term_candidates(self, goal: Sequent, limit: int) -> list[Term]:
        phi = goal.lhs
        assert isinstance(phi, Forall)
        out: list[Term] = [Var(phi.var)]
        for y in sorted(free_vars(goal.rhs) | free_vars(phi)):
            out.append(Var(y))
        for c in sorted(constants_of(goal.lhs) | constants_of(goal.rhs)):
            out.append(Const(c))
        seen: set[Term] = set()
        uniq = [t for t in out if not (t in seen or seen.add(t))]
        return uniq[: 2 + limit]

    def _cut_pool(self, goal: Sequent, limit: int) -> list[Formula]:
        subs = subformulas(goal.lhs) | subformulas(goal.rhs)
        pool: set[Formula] = set(subs)
        terms: list[Term] = [Const(c) for c in sorted(constants_of(goal.lhs) | constants_of(goal.rhs))]
        terms += [Var(y) for y in sorted(free_vars(goal.lhs) | free_vars(goal.rhs))]
        for s in subs:
            pool.add(Diamond(s))
            if isinstance(s, Forall):
                # one substitution step into the body
                for t in terms:
                    if free_for(t, s.var, s.body):
                        pool.add(substitute(s.body, s.var, t))
                # bound-variable renaming targets
                for k in range(2):
                    y = f"{FRESH_VAR_PREFIX}{k}"
                    if y != s.var and y not in free_vars(s.body) and free_for(Var(y), s.var, s.body):
                        pool.add(Forall(y, substitute(s.body, s.var, Var(y))))
        ordered = sorted(pool, key=sort_key)
        # widen the pool as the budget grows to keep the search fair
        return ordered[: 2 * limit]

    def _generalizable_terms(self, goal: Sequent) -> list[Term]:
        out: list[Term] = [Const(c) for c in sorted(constants_of(goal.lhs) | constants_of(goal.rhs))]
        return out

    def _fresh_const(self, goal: Sequent) -> str:
        used = constants_of(goal.lhs) | constants_of(goal.rhs)
        for k in itertools.count():
            name = f"{FRESH_CONST_PREFIX}{k}"
            if name not in used:
                return name
        raise AssertionError

    def _fresh_var(self, goal: Sequent) -> str:
        used = free_vars(goal.lhs) | free_vars(goal.rhs)
        for k in itertools.count():
            name = f"{FRESH_VAR_PREFIX}{k}"
            if name not in used:
                return name
        raise AssertionError


def _term_to_var(f: Formula, t: Term, x: str) -> Formula:
    match f:
        case Top():
            return f
        case Pred(name, args):
            return Pred(name, tuple(Var(x) if a == t else a for a in args))
        case And(l, r):
            return And(_term_to_var(l, t, x), _term_to_var(r, t, x))
        case Diamond(b):
            return Diamond(_term_to_var(b, t, x))
        case Forall(z, b):
            if isinstance(t, Var) and t.name == z:
                return f
            return Forall(z, _term_to_var(b, t, x))
    raise TypeError(f"not a formula: {f!r}")


def prove(s: Sequent, sig: Signature, budget: int = 12) -> Optional[Derivation]:
    """Convenience wrapper: one-shot search with a fresh cache."""
    return ProofSearch(sig).prove(s, budget)


# ---------------------------------------------------------------------------
# certificate serialization


def derivation_constants(d: Derivation) -> frozenset[str]:
    out: set[str] = set()

    def walk(node: Derivation) -> None:
        out.update(constants_of(node.conclusion.lhs))
        out.update(constants_of(node.conclusion.rhs))
        if node.instantiation and isinstance(node.instantiation.term, Const):
            out.add(node.instantiation.term.name)
        for p in node.premises:
            walk(p)

    walk(d)
    return frozenset(out)


def _node_to_dict(d: Derivation) -> dict:
    doc: dict = {"rule": d.rule, "conclusion": pretty_sequent(d.conclusion)}
    if d.instantiation is not None:
        t = d.instantiation.term
        doc["instantiation"] = {
            "var": d.instantiation.var,
            "term": t.name,
            "kind": "const" if isinstance(t, Const) else "var",
        }
    if d.premises:
        doc["premises"] = [_node_to_dict(p) for p in d.premises]
    return doc


def derivation_to_dict(d: Derivation, sig: Signature) -> dict:
    extra = sorted(derivation_constants(d) - set(sig.constants))
    doc = _node_to_dict(d)
    if extra:
        doc["extra_constants"] = extra
    return doc


def derivation_from_dict(doc: dict, sig: Signature) -> Derivation:
    from .syntax import parse_sequent

    sig = sig.with_constants(doc.get("extra_constants", ()))

    def build(node: dict) -> Derivation:
        inst = None
        if "instantiation" in node:
            raw = node["instantiation"]
            term: Term = Const(raw["term"]) if raw["kind"] == "const" else Var(raw["term"])
            inst = Instantiation(raw["var"], term)
        return Derivation(
            rule=node["rule"],
            conclusion=parse_sequent(node["conclusion"], sig),
            premises=tuple(build(p) for p in node.get("premises", ())),
            instantiation=inst,
        )

    return build(doc)
