"""Command-line front end: batch deciding, certificate checking, model
building, closures, and the arithmetical translation.

Exit codes: 0 completed, 1 usage/input error, 2 certificate validation
failure, 3 undecided within budget.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .arith import arith_sequent, arith_to_dict, default_realization, parse_realization, render
from .calculus import DerivationError, ProofSearch, check_derivation, derivation_from_dict, derivation_to_dict
from .decider import (
    DERIVABLE,
    DeciderConfig,
    PRACTICAL_DOMAIN_CAP,
    PRACTICAL_WORLD_CAP,
    UNDECIDED,
    UNDERIVABLE,
    decide,
    derived_ceiling,
    ground_free_variables,
    verdict_to_dict,
)
from .semantics import (
    ModelError,
    RefuteBounds,
    check_adequate,
    countermodel_from_dict,
    countermodel_to_dict,
    model_text,
    refute,
)
from .syntax import (
    ParseError,
    QRCError,
    Sequent,
    Signature,
    closure,
    mdepth,
    parse_formula,
    parse_sequent,
    parse_sequent_file,
    parse_signature,
    pretty,
    pretty_sequent,
    set_mdepth,
    set_udepth,
    sorted_formulas,
    udepth,
)
from .termmodel import PairPM, build_term_model, truth_lemma_check

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_CERTIFICATE = 2
EXIT_UNDECIDED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise QRCError(f"cannot read {path}: {e.strerror}") from e


def _load_signature(args) -> Optional[Signature]:
    if getattr(args, "sig", None):
        return parse_signature(_read_text(args.sig))
    return None


def _load_sequents(source: str, sig: Optional[Signature]) -> tuple[Signature, list[Sequent]]:
    """`source` is an inline sequent when it contains |-, else a file path."""
    if "|-" in source:
        base = sig or Signature()
        return base, [parse_sequent(source, base)]
    return parse_sequent_file(_read_text(source), sig)


def _decider_config(args) -> DeciderConfig:
    return DeciderConfig(
        max_rounds=getattr(args, "budget", None),
        max_worlds=getattr(args, "max_worlds", None),
        max_domain=getattr(args, "max_domain", None),
    )


def _emit(doc: dict, text: str, fmt: str, out) -> None:
    if fmt == "json-lines":
        print(json.dumps(doc, sort_keys=True), file=out)
    else:
        print(text, file=out)


# ---------------------------------------------------------------------------
# decide / prove / refute


def _decide_one(payload: tuple[Sequent, Signature, DeciderConfig]):
    s, sig, config = payload
    return decide(s, sig, config)


def cmd_decide(args, out) -> int:
    sig = _load_signature(args)
    sig, sequents = _load_sequents(args.input, sig)
    config = _decider_config(args)
    payloads = [(s, sig, config) for s in sequents]
    if args.jobs > 1 and len(sequents) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            verdicts = list(pool.map(_decide_one, payloads))
    else:
        verdicts = [_decide_one(p) for p in payloads]
    status = EXIT_OK
    for s, v in zip(sequents, verdicts):
        doc = verdict_to_dict(v, sig)
        doc["sequent"] = pretty_sequent(s)
        _emit(doc, f"{v.status}: {pretty_sequent(s)}", args.format, out)
        if v.status == UNDECIDED:
            status = EXIT_UNDECIDED
    return status


def cmd_prove(args, out) -> int:
    sig = _load_signature(args)
    sig, sequents = _load_sequents(args.input, sig)
    budget = args.budget if args.budget is not None else 42
    status = EXIT_OK
    for s in sequents:
        grounded, gsig, pairs = ground_free_variables(s, sig)
        search = ProofSearch(gsig)
        d = search.prove(grounded, budget)
        if d is None:
            _emit(
                {"sequent": pretty_sequent(s), "status": "not-proved", "budget": budget},
                f"not proved within budget {budget}: {pretty_sequent(s)}",
                args.format,
                out,
            )
            status = EXIT_UNDECIDED
            continue
        check_derivation(d, gsig)
        doc = {
            "sequent": pretty_sequent(grounded),
            "status": DERIVABLE,
            "derivation": derivation_to_dict(d, gsig),
        }
        if pairs:
            doc["grounding"] = {x: c for x, c in pairs}
        _emit(doc, f"proved: {pretty_sequent(grounded)} ({d.size()} rule applications)", args.format, out)
    return status


def cmd_refute(args, out) -> int:
    sig = _load_signature(args)
    sig, sequents = _load_sequents(args.input, sig)
    status = EXIT_OK
    for s in sequents:
        grounded, gsig, _pairs = ground_free_variables(s, sig)
        mw, md = derived_ceiling(grounded, gsig)
        bounds = RefuteBounds(
            args.max_worlds if args.max_worlds is not None else min(mw, PRACTICAL_WORLD_CAP),
            args.max_domain if args.max_domain is not None else min(md, PRACTICAL_DOMAIN_CAP),
        )
        cm = refute(grounded, gsig, bounds)
        if cm is None:
            _emit(
                {"sequent": pretty_sequent(s), "status": "no-countermodel",
                 "max_worlds": bounds.max_worlds, "max_domain": bounds.max_domain},
                f"no countermodel within {bounds.max_worlds} worlds, domain {bounds.max_domain}: "
                f"{pretty_sequent(s)}",
                args.format,
                out,
            )
            status = EXIT_UNDECIDED
            continue
        cm.validate()
        doc = {
            "sequent": pretty_sequent(grounded),
            "status": UNDERIVABLE,
            "countermodel": countermodel_to_dict(cm),
        }
        _emit(doc, f"refuted: {pretty_sequent(grounded)}\n{model_text(cm.model)}", args.format, out)
    return status


# ---------------------------------------------------------------------------
# certificate checking


def _certificate_docs(text: str) -> list[dict]:
    docs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            docs.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise QRCError(f"line {lineno}: not a JSON document ({e.msg})") from e
    if not docs:
        raise QRCError("no certificate documents in input")
    return docs


def _extract(doc: dict, kind: str, key: str) -> Optional[dict]:
    if key in doc:
        return doc[key]
    cert = doc.get("certificate")
    if isinstance(cert, dict) and cert.get("kind") == kind:
        return cert[key]
    return None


def cmd_check_derivation(args, out) -> int:
    sig = _load_signature(args) or Signature()
    status = EXIT_OK
    for doc in _certificate_docs(_read_text(args.input)):
        inner = _extract(doc, "derivation", "derivation")
        if inner is None:
            raise QRCError("document carries no derivation")
        label = doc.get("sequent", inner.get("conclusion", "?"))
        try:
            d = derivation_from_dict(inner, sig)
            concluded = check_derivation(d, sig.with_constants(inner.get("extra_constants", ())))
            _emit({"sequent": label, "valid": True},
                  f"valid derivation of {pretty_sequent(concluded)}", args.format, out)
        except (DerivationError, ParseError, KeyError) as e:
            _emit({"sequent": label, "valid": False, "error": str(e)},
                  f"INVALID derivation ({label}): {e}", args.format, out)
            status = EXIT_INVALID_CERTIFICATE
    return status


def cmd_check_model(args, out) -> int:
    sig = _load_signature(args) or Signature()
    status = EXIT_OK
    for doc in _certificate_docs(_read_text(args.input)):
        inner = _extract(doc, "countermodel", "countermodel")
        if inner is None:
            raise QRCError("document carries no countermodel")
        label = doc.get("sequent", inner.get("sequent", "?"))
        try:
            cm = countermodel_from_dict(inner, sig)
            cm.validate()
            _emit({"sequent": label, "valid": True},
                  f"valid countermodel for {pretty_sequent(cm.sequent)}", args.format, out)
        except (ModelError, ParseError, KeyError) as e:
            _emit({"sequent": label, "valid": False, "error": str(e)},
                  f"INVALID countermodel ({label}): {e}", args.format, out)
            status = EXIT_INVALID_CERTIFICATE
    return status


# ---------------------------------------------------------------------------
# termmodel


def _parse_pair_file(text: str, sig: Optional[Signature]) -> tuple[Signature, PairPM]:
    pos = []
    neg = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("sig:"):
            if sig is None:
                sig = parse_signature(line)
            continue
        if line.startswith("pos:"):
            bucket, body = pos, line[len("pos:"):]
        elif line.startswith("neg:"):
            bucket, body = neg, line[len("neg:"):]
        else:
            raise ParseError(f"line {lineno}: expected a sig:, pos:, or neg: line")
        try:
            bucket.append(parse_formula(body, sig or Signature()))
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}") from e
    sig = sig or Signature()
    return sig, PairPM(frozenset(pos), frozenset(neg), sig.constants)


def cmd_termmodel(args, out) -> int:
    sig = _load_signature(args)
    sig, pair = _parse_pair_file(_read_text(args.input), sig)
    config = _decider_config(args)
    result = build_term_model(pair, sig, config)
    report = truth_lemma_check(result, pair, sig)
    adequacy = check_adequate(result.model)
    doc = {
        "worlds": result.annotations(),
        "edges": sorted(result.model.R),
        "domains": {str(w): sorted(result.model.domain[w]) for w in result.model.worlds},
        "adequate": adequacy.adequate,
        "truth_lemma": {
            "checked": report.checked,
            "violations": [
                {"world": w, "formula": f, "direction": d} for w, f, d in report.violations
            ],
        },
    }
    lines = [model_text(result.model)]
    for ann in result.annotations():
        lines.append(f"world {ann['world']}:")
        lines.append("  positive: " + "; ".join(ann["positive"]))
        lines.append("  negative: " + "; ".join(ann["negative"]))
    lines.append(f"adequate: {adequacy.adequate}")
    lines.append(f"truth lemma: {report.checked} formulas checked, "
                 f"{len(report.violations)} violations")
    _emit(doc, "\n".join(lines), args.format, out)
    return EXIT_OK if report.ok and adequacy.adequate else EXIT_INVALID_CERTIFICATE


# ---------------------------------------------------------------------------
# translate / closure


def cmd_translate(args, out) -> int:
    sig = _load_signature(args)
    sig, sequents = _load_sequents(args.input, sig)
    if args.realization:
        realization, warnings = parse_realization(_read_text(args.realization))
    else:
        realization, warnings = default_realization(sig), []
    for w in warnings:
        print(f"warning: template is not in existential-over-bounded shape: {w}", file=sys.stderr)
    for s in sequents:
        statement = arith_sequent(s, realization, sig)
        doc = {"sequent": pretty_sequent(s), "statement": render(statement),
               "tree": arith_to_dict(statement)}
        _emit(doc, f"{pretty_sequent(s)}\n  {render(statement)}", args.format, out)
    return EXIT_OK


def cmd_closure(args, out) -> int:
    sig = _load_signature(args) or Signature()
    if args.constants:
        sig = sig.with_constants(c.strip() for c in args.constants.split(",") if c.strip())
    f = parse_formula(args.formula, sig)
    cl = sorted_formulas(closure([f], sig.constants))
    doc = {
        "formula": pretty(f),
        "constants": list(sig.constants),
        "closure": [pretty(g) for g in cl],
        "count": len(cl),
        "mdepth": mdepth(f),
        "udepth": udepth(f),
        "closure_mdepth": set_mdepth(cl),
        "closure_udepth": set_udepth(cl),
    }
    lines = [pretty(g) for g in cl]
    lines.append(f"count: {len(cl)}  mdepth: {mdepth(f)}  udepth: {udepth(f)}")
    _emit(doc, "\n".join(lines), args.format, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(p: _Parser, budgets: bool = True) -> None:
    p.add_argument("--sig", metavar="FILE", help="signature file (a `sig:` header line)")
    p.add_argument("--format", choices=("text", "json-lines"), default="text",
                   help="output format (default: text)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized workloads (reserved; deterministic commands ignore it)")
    if budgets:
        p.add_argument("--budget", type=_positive, metavar="N",
                       help="round/node budget before giving up")
        p.add_argument("--max-worlds", type=_positive, metavar="N",
                       help="cap on countermodel worlds (default: derived ceiling)")
        p.add_argument("--max-domain", type=_positive, metavar="N",
                       help="cap on countermodel domain size (default: derived ceiling)")


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> _Parser:
    parser = _Parser(prog="qrc1", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qrc1 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decide", help="decide sequents, emitting a certificate either way")
    p.add_argument("input", help="sequent file, - for stdin, or an inline `lhs |- rhs`")
    p.add_argument("--jobs", type=_positive, default=1, help="parallel workers for batch input")
    _add_common(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("prove", help="search for a derivation only")
    p.add_argument("input", help="sequent file, - for stdin, or an inline sequent")
    _add_common(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("refute", help="search for a countermodel only")
    p.add_argument("input", help="sequent file, - for stdin, or an inline sequent")
    _add_common(p)
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("check-derivation", help="re-validate derivation documents")
    p.add_argument("input", help="json-lines file of derivation documents, - for stdin")
    _add_common(p, budgets=False)
    p.set_defaults(func=cmd_check_derivation)

    p = sub.add_parser("check-model", help="re-validate countermodel documents")
    p.add_argument("input", help="json-lines file of countermodel documents, - for stdin")
    _add_common(p, budgets=False)
    p.set_defaults(func=cmd_check_model)

    p = sub.add_parser("termmodel", help="build the saturation model of a pair file")
    p.add_argument("input", help="pair file (sig:/pos:/neg: lines), - for stdin")
    _add_common(p)
    p.set_defaults(func=cmd_termmodel)

    p = sub.add_parser("translate", help="arithmetical reading of sequents")
    p.add_argument("input", help="sequent file, - for stdin, or an inline sequent")
    p.add_argument("--realization", metavar="FILE",
                   help="template file; default gives each relation an opaque template atom")
    _add_common(p, budgets=False)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("closure", help="list the instantiation closure of a formula")
    p.add_argument("formula", help="formula text")
    p.add_argument("--constants", metavar="LIST", default="",
                   help="comma-separated constants to instantiate with (added to --sig)")
    _add_common(p, budgets=False)
    p.set_defaults(func=cmd_closure)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.func(args, sys.stdout)
    except (QRCError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
