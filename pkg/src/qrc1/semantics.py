"""Adequate relational models, forcing, model surgery, and countermodel search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, Optional, Sequence

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
    Top,
    free_vars,
    pretty_sequent,
)

World = int | str
Element = int | str


class ModelError(QRCError):
    pass


@dataclass(frozen=True)
class Model:
    """A relational structure with per-world domains and interpretations.

    Element ids are global, so inclusivity along R is literal set inclusion.
    Constant interpretations may be partial per world: a world only needs to
    interpret the constants whose value lies in its domain.
    """

    worlds: tuple[World, ...]
    R: frozenset[tuple[World, World]]
    domain: Mapping[World, frozenset[Element]]
    constI: Mapping[World, Mapping[str, Element]]
    relJ: Mapping[World, Mapping[str, frozenset[tuple[Element, ...]]]]

    def successors(self, w: World) -> list[World]:
        return [v for v in self.worlds if (w, v) in self.R]

    def const_value(self, w: World, c: str) -> Element:
        try:
            return self.constI[w][c]
        except KeyError:
            raise ModelError(f"constant {c!r} is not interpreted at world {w!r}") from None


def validate_model(m: Model) -> None:
    """Structural well-formedness; adequacy is checked separately."""
    wset = set(m.worlds)
    if len(wset) != len(m.worlds):
        raise ModelError("duplicate world ids")
    if not wset:
        raise ModelError("a model needs at least one world")
    for (w, u) in m.R:
        if w not in wset or u not in wset:
            raise ModelError(f"edge ({w!r}, {u!r}) mentions an unknown world")
    for w in m.worlds:
        dom = m.domain.get(w)
        if not dom:
            raise ModelError(f"world {w!r} has an empty domain")
        for c, d in m.constI.get(w, {}).items():
            if d not in dom:
                raise ModelError(f"constant {c!r} at {w!r} maps outside the domain")
        for s, tuples in m.relJ.get(w, {}).items():
            for tup in tuples:
                if any(d not in dom for d in tup):
                    raise ModelError(f"tuple {tup!r} of {s!r} at {w!r} leaves the domain")


@dataclass(frozen=True)
class AdequacyReport:
    inclusive: bool
    transitive: bool
    concordant: bool
    witness: Optional[tuple] = None

    @property
    def adequate(self) -> bool:
        return self.inclusive and self.transitive and self.concordant


def check_adequate(m: Model) -> AdequacyReport:
    validate_model(m)
    for (w, u) in m.R:
        missing = m.domain[w] - m.domain[u]
        if missing:
            return AdequacyReport(False, True, True, ("inclusive", w, u, min(missing, key=str)))
    for (w, u) in m.R:
        for v in m.worlds:
            if (u, v) in m.R and (w, v) not in m.R:
                return AdequacyReport(True, False, True, ("transitive", w, u, v))
    for (w, u) in m.R:
        iw, iu = m.constI.get(w, {}), m.constI.get(u, {})
        for c, d in iw.items():
            if c in iu and iu[c] != d:
                return AdequacyReport(True, True, False, ("concordant", w, u, c))
            if c not in iu:
                return AdequacyReport(True, True, False, ("concordant", w, u, c))
    return AdequacyReport(True, True, True)


# ---------------------------------------------------------------------------
# assignments and forcing


@dataclass(frozen=True)
class Assignment:
    """A total map variable -> domain(world), explicit on a finite support."""

    world: World
    mapping: Mapping[str, Element]
    default: Element

    def __call__(self, x: str) -> Element:
        return self.mapping.get(x, self.default)

    def value(self, m: Model, w: World, t: Term) -> Element:
        if isinstance(t, Const):
            return m.const_value(w, t.name)
        return self(t.name)

    def set(self, x: str, d: Element) -> "Assignment":
        new = dict(self.mapping)
        new[x] = d
        return Assignment(self.world, new, self.default)

    def at(self, w: World) -> "Assignment":
        # the inclusion coercion: same values, read at a successor world
        return Assignment(w, self.mapping, self.default)


def default_assignment(m: Model, w: World) -> Assignment:
    return Assignment(w, {}, min(m.domain[w], key=str))


def forces(m: Model, w: World, g: Assignment, f: Formula) -> bool:
    """Truth at a world under an assignment (actualist quantification)."""
    if w not in m.domain:
        raise ModelError(f"unknown world {w!r}")
    match f:
        case Top():
            return True
        case Pred(name, args):
            tup = tuple(g.value(m, w, t) for t in args)
            return tup in m.relJ.get(w, {}).get(name, frozenset())
        case And(l, r):
            return forces(m, w, g, l) and forces(m, w, g, r)
        case Diamond(b):
            return any(forces(m, v, g.at(v), b) for v in m.successors(w))
        case Forall(x, b):
            return all(forces(m, w, g.set(x, d), b) for d in m.domain[w])
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# model surgery


def restrict(m: Model, r: World) -> Model:
    if r not in m.domain:
        raise ModelError(f"unknown world {r!r}")
    keep = {r} | {w for w in m.worlds if (r, w) in m.R}
    worlds = tuple(w for w in m.worlds if w in keep)
    return Model(
        worlds=worlds,
        R=frozenset((w, u) for (w, u) in m.R if w in keep and u in keep),
        domain={w: m.domain[w] for w in worlds},
        constI={w: dict(m.constI.get(w, {})) for w in worlds},
        relJ={w: {s: ts for s, ts in m.relJ.get(w, {}).items()} for w in worlds},
    )


def reinterpret_constant(m: Model, r: World, c: str, d: Element) -> Model:
    if r not in m.domain:
        raise ModelError(f"unknown world {r!r}")
    if d not in m.domain[r]:
        raise ModelError(f"{d!r} is not in the domain of {r!r}")
    sub = restrict(m, r)
    constI = {w: {**sub.constI.get(w, {}), c: d} for w in sub.worlds}
    return replace(sub, constI=constI)


# ---------------------------------------------------------------------------
# countermodels


@dataclass(frozen=True)
class Countermodel:
    model: Model
    root: World
    assignment: Assignment
    sequent: Sequent

    def validate(self) -> None:
        report = check_adequate(self.model)
        if not report.adequate:
            raise ModelError(f"countermodel is not adequate: {report.witness}")
        if not forces(self.model, self.root, self.assignment, self.sequent.lhs):
            raise ModelError("countermodel does not force the left-hand side")
        if forces(self.model, self.root, self.assignment, self.sequent.rhs):
            raise ModelError("countermodel forces the right-hand side")


# ---------------------------------------------------------------------------
# enumeration of adequate models


def _transitive(relation: frozenset[tuple[int, int]], n: int) -> bool:
    return all(
        (w, v) in relation
        for (w, u) in relation
        for (u2, v) in relation
        if u2 == u
    )


def _transitive_relations(n: int) -> list[frozenset[tuple[int, int]]]:
    pairs = [(i, j) for i in range(n) for j in range(n)]
    out = []
    for bits in itertools.product((False, True), repeat=len(pairs)):
        rel = frozenset(p for p, b in zip(pairs, bits) if b)
        if _transitive(rel, n):
            out.append(rel)
    return sorted(out, key=lambda r: sorted(r))


def _nested_domains(
    n: int, rel: frozenset[tuple[int, int]], max_domain: int
) -> Iterator[tuple[frozenset[int], ...]]:
    subsets = [frozenset(s) for k in range(1, max_domain + 1)
               for s in itertools.combinations(range(max_domain), k)]
    subsets.sort(key=lambda s: (len(s), sorted(s)))
    for choice in itertools.product(subsets, repeat=n):
        if all(choice[w] <= choice[u] for (w, u) in rel):
            yield choice


def _concordant_interpretations(
    n: int,
    rel: frozenset[tuple[int, int]],
    domains: Sequence[frozenset[int]],
    constants: Sequence[str],
) -> Iterator[tuple[dict[str, int], ...]]:
    if not constants:
        yield tuple({} for _ in range(n))
        return
    # equality propagates along edges; group worlds into concordance classes
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (w, u) in rel:
        ra, rb = find(w), find(u)
        if ra != rb:
            parent[ra] = rb
    classes: dict[int, list[int]] = {}
    for w in range(n):
        classes.setdefault(find(w), []).append(w)
    class_list = sorted(classes.values())
    class_domains = [frozenset.intersection(*(domains[w] for w in ws)) for ws in class_list]
    if any(not cd for cd in class_domains):
        return
    value_products = [
        list(itertools.product(*[sorted(cd) for cd in class_domains]))
        for _c in constants
    ]
    for combo in itertools.product(*value_products):
        interp: list[dict[str, int]] = [dict() for _ in range(n)]
        for ci, c in enumerate(constants):
            for cls_idx, ws in enumerate(class_list):
                for w in ws:
                    interp[w][c] = combo[ci][cls_idx]
        yield tuple(interp)


def enumerate_models(
    sig: Signature,
    max_worlds: int,
    max_domain: int,
    extra_constants: int = 0,
) -> Iterator[Model]:
    """Deterministic, duplicate-free, exhaustive stream of adequate models.

    Worlds are labeled 0..n-1 and elements 0..max_domain-1; every adequate
    model within the bounds appears up to renaming of worlds and elements.
    """
    if max_worlds < 1 or max_domain < 1:
        raise ModelError("bounds must be at least 1")
    sig = sig.with_constants(f"e{k}" for k in range(extra_constants))
    constants = list(sig.constants)
    relations = list(sig.relations)
    for n in range(1, max_worlds + 1):
        for rel in _transitive_relations(n):
            for domains in _nested_domains(n, rel, max_domain):
                for interp in _concordant_interpretations(n, rel, domains, constants):
                    for relJ in _relation_tables(n, domains, relations):
                        yield Model(
                            worlds=tuple(range(n)),
                            R=rel,
                            domain={w: domains[w] for w in range(n)},
                            constI={w: interp[w] for w in range(n)},
                            relJ={w: relJ[w] for w in range(n)},
                        )


def _relation_tables(
    n: int,
    domains: Sequence[frozenset[int]],
    relations: Sequence[tuple[str, int]],
) -> Iterator[tuple[dict[str, frozenset[tuple[int, ...]]], ...]]:
    per_world_options: list[list[dict[str, frozenset[tuple[int, ...]]]]] = []
    for w in range(n):
        rel_options: list[list[tuple[str, frozenset[tuple[int, ...]]]]] = []
        for (s, arity) in relations:
            tuples = sorted(itertools.product(sorted(domains[w]), repeat=arity))
            choices = []
            for k in range(len(tuples) + 1):
                for sub in itertools.combinations(tuples, k):
                    choices.append((s, frozenset(sub)))
            rel_options.append(choices)
        per_world_options.append([dict(combo) for combo in itertools.product(*rel_options)])
    yield from itertools.product(*per_world_options)


# ---------------------------------------------------------------------------
# refutation search


@dataclass
class RefuteBounds:
    max_worlds: int
    max_domain: int

    def __post_init__(self):
        if self.max_worlds < 1 or self.max_domain < 1:
            raise ModelError("bounds must be at least 1")


@dataclass
class RefuteStats:
    frames: int = 0
    candidates: int = 0


def _forcing_implicants(
    m_frame: "_Frame", w: int, g: dict[str, int], f: Formula, const_at
) -> list[frozenset[tuple]] | None:
    """Minimal sets of relation atoms that force f at w, or None if unforceable.

    The forcing condition of a strictly positive formula is a monotone AND/OR
    combination of atoms (world, relation, tuple), so its minimal models are a
    finite antichain computed structurally.
    """
    match f:
        case Top():
            return [frozenset()]
        case Pred(name, args):
            vals = []
            for t in args:
                if isinstance(t, Const):
                    v = const_at(w, t.name)
                    if v is None:
                        return None
                    vals.append(v)
                else:
                    vals.append(g[t.name])
            return [frozenset({(w, name, tuple(vals))})]
        case And(l, r):
            li = _forcing_implicants(m_frame, w, g, l, const_at)
            if li is None:
                return None
            ri = _forcing_implicants(m_frame, w, g, r, const_at)
            if ri is None:
                return None
            return _minimize([a | b for a in li for b in ri])
        case Diamond(b):
            out: list[frozenset[tuple]] = []
            for v in m_frame.successors[w]:
                vi = _forcing_implicants(m_frame, v, g, b, const_at)
                if vi:
                    out.extend(vi)
            return _minimize(out) if out else None
        case Forall(x, b):
            acc: list[frozenset[tuple]] = [frozenset()]
            for d in sorted(m_frame.domains[w]):
                g2 = dict(g)
                g2[x] = d
                bi = _forcing_implicants(m_frame, w, g2, b, const_at)
                if bi is None:
                    return None
                acc = _minimize([a | c for a in acc for c in bi])
                if len(acc) > 4096:
                    acc = acc[:4096]  # cap: countermodels this large are out of scope
            return acc
    raise TypeError(f"not a formula: {f!r}")


def _minimize(sets: list[frozenset]) -> list[frozenset]:
    sets = sorted(set(sets), key=lambda s: (len(s), sorted(s)))
    out: list[frozenset] = []
    for s in sets:
        if not any(o <= s for o in out):
            out.append(s)
    return out


@dataclass
class _Frame:
    n: int
    rel: frozenset[tuple[int, int]]
    domains: tuple[frozenset[int], ...]
    successors: list[list[int]]


def _rooted_frames(max_worlds: int, max_domain: int) -> Iterator[_Frame]:
    # world 0 is the root; every other world must be reachable from it
    for n in range(1, max_worlds + 1):
        for rel in _transitive_relations(n):
            if any(w != 0 and (0, w) not in rel for w in range(n)):
                continue
            for domains in _nested_domains(n, rel, max_domain):
                succ = [[v for v in range(n) if (w, v) in rel] for w in range(n)]
                yield _Frame(n, rel, domains, succ)


def refute(
    s: Sequent,
    sig: Signature,
    bounds: RefuteBounds,
    stats: RefuteStats | None = None,
) -> Optional[Countermodel]:
    """Search for an adequate countermodel to s within the bounds.

    Complete within the bounds: frames are enumerated exhaustively and, per
    frame, only minimal relation interpretations forcing the lhs need testing
    against the rhs (forcing is monotone in the relation tables).
    """
    stats = stats if stats is not None else RefuteStats()
    # only constants occurring in the sequent constrain the search; the rest
    # are interpreted uniformly at the root element afterwards
    occurring = _sequent_constants(s)
    constants = sorted(c for c in sig.constants if c in occurring)
    padding = sorted(c for c in sig.constants if c not in occurring)
    fvars = sorted(free_vars(s.lhs) | free_vars(s.rhs))
    for frame in _rooted_frames(bounds.max_worlds, bounds.max_domain):
        stats.frames += 1
        root_domain = sorted(frame.domains[0])
        for const_vals in itertools.product(root_domain, repeat=len(constants)):
            cmap = dict(zip(constants, const_vals))

            def const_at(w: int, c: str):
                return cmap.get(c)

            for g_vals in itertools.product(root_domain, repeat=len(fvars)):
                g = dict(zip(fvars, g_vals))
                implicants = _forcing_implicants(frame, 0, g, s.lhs, const_at)
                if implicants is None:
                    continue
                for atoms in implicants:
                    stats.candidates += 1
                    full_cmap = dict(cmap)
                    for c in padding:
                        full_cmap[c] = root_domain[0]
                    model = _model_from_atoms(frame, full_cmap, atoms, sig)
                    assignment = Assignment(0, g, root_domain[0])
                    if not forces(model, 0, assignment, s.rhs):
                        cm = Countermodel(model, 0, assignment, s)
                        cm.validate()
                        return cm
    return None


def _sequent_constants(s: Sequent) -> set[str]:
    from .syntax import constants_of

    return set(constants_of(s.lhs) | constants_of(s.rhs))


def _model_from_atoms(
    frame: _Frame, cmap: dict[str, int], atoms: frozenset[tuple], sig: Signature
) -> Model:
    relJ: dict[int, dict[str, set[tuple]]] = {w: {} for w in range(frame.n)}
    for (w, name, tup) in atoms:
        relJ[w].setdefault(name, set()).add(tup)
    return Model(
        worlds=tuple(range(frame.n)),
        R=frame.rel,
        domain={w: frame.domains[w] for w in range(frame.n)},
        constI={w: dict(cmap) for w in range(frame.n)},
        relJ={w: {name: frozenset(ts) for name, ts in relJ[w].items()} for w in range(frame.n)},
    )


# ---------------------------------------------------------------------------
# serialization


def model_to_dict(m: Model) -> dict:
    return {
        "worlds": [
            {
                "id": w,
                "domain": sorted(m.domain[w], key=str),
                "constants": {c: d for c, d in sorted(m.constI.get(w, {}).items())},
                "relations": {
                    s: sorted([list(t) for t in ts])
                    for s, ts in sorted(m.relJ.get(w, {}).items())
                },
            }
            for w in m.worlds
        ],
        "edges": sorted([list(e) for e in m.R]),
    }


def model_from_dict(doc: dict) -> Model:
    try:
        worlds = tuple(entry["id"] for entry in doc["worlds"])
        domain = {e["id"]: frozenset(e["domain"]) for e in doc["worlds"]}
        constI = {e["id"]: dict(e.get("constants", {})) for e in doc["worlds"]}
        relJ = {
            e["id"]: {s: frozenset(tuple(t) for t in ts) for s, ts in e.get("relations", {}).items()}
            for e in doc["worlds"]
        }
        R = frozenset((w, u) for w, u in doc.get("edges", []))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model document: {exc}") from None
    m = Model(worlds=worlds, R=R, domain=domain, constI=constI, relJ=relJ)
    validate_model(m)
    return m


def countermodel_to_dict(cm: Countermodel) -> dict:
    return {
        "model": model_to_dict(cm.model),
        "root": cm.root,
        "assignment": {
            "map": dict(cm.assignment.mapping),
            "default": cm.assignment.default,
        },
        "sequent": pretty_sequent(cm.sequent),
    }


def countermodel_from_dict(doc: dict, sig: Signature) -> Countermodel:
    from .syntax import parse_sequent

    model = model_from_dict(doc["model"])
    root = doc["root"]
    g = Assignment(root, dict(doc["assignment"]["map"]), doc["assignment"]["default"])
    seq = parse_sequent(doc["sequent"], sig)
    return Countermodel(model, root, g, seq)


def model_text(m: Model) -> str:
    lines = []
    for w in m.worlds:
        lines.append(f"world {w}: domain {{{', '.join(str(d) for d in sorted(m.domain[w], key=str))}}}")
        for c, d in sorted(m.constI.get(w, {}).items()):
            lines.append(f"  {c} -> {d}")
        for s, ts in sorted(m.relJ.get(w, {}).items()):
            shown = ", ".join("(" + ",".join(str(x) for x in t) + ")" for t in sorted(ts))
            lines.append(f"  {s}: {{{shown}}}")
    edges = ", ".join(f"{w}->{u}" for (w, u) in sorted(m.R))
    lines.append(f"edges: {edges if edges else '(none)'}")
    return "\n".join(lines)
