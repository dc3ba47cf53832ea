"""Command-line front end: ``hypgrp <verb> ...``.

Exit status 0 on success, 1 on domain errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import cayley, distortion, examples, gog, stallings
from .smallcancellation import NotSmallCancellation, Presentation, check_metric, dehn_reduce
from .substitution import Endomorphism, conjugate_growth_report
from .svg import emit_svg
from .words import Alphabet, format_word, parse


class DomainError(Exception):
    pass


# --- input helpers -------------------------------------------------------------

def load_presentation(source: str, r: int = examples.DEFAULT_R, l: int = examples.DEFAULT_L) -> Presentation:
    """A presentation file, or a registry label such as ``genus2``."""
    if source in examples.REGISTRY:
        return examples.get(source, r=r, l=l)
    path = Path(source)
    if not path.exists():
        raise DomainError(f"no such file or example: {source}")
    return Presentation.load(path)


def parse_alphabet(text: str) -> Alphabet:
    parts = text.replace(",", " ").split()
    if len(parts) == 1 and len(parts[0]) > 1 and parts[0].isalpha():
        parts = list(parts[0])
    return Alphabet(parts)


def parse_endo(base: Alphabet, text: str) -> Endomorphism:
    """``a=ab,b=ba`` (or ``a->ab``)."""
    images = {}
    for item in text.split(","):
        key, sep, val = item.replace("->", "=").partition("=")
        if not sep:
            raise DomainError(f"bad image spec {item!r}; expected name=word")
        images[key.strip()] = val.strip()
    missing = [n for n in base.names if n not in images]
    if missing:
        raise DomainError(f"no image given for {', '.join(missing)}")
    return Endomorphism.from_strings(base, images)


def parse_words(alphabet: Alphabet, text: str) -> list:
    return [parse(alphabet, s) for s in text.split(",") if s.strip()]


def write_csv(rows, header, path: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    if path:
        Path(path).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())


def read_ray(path: str) -> gog.RayDescriptor:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    try:
        return gog.RayDescriptor.from_json(text)
    except (KeyError, json.JSONDecodeError) as exc:
        raise DomainError(f"bad ray descriptor: {exc}") from None


# --- verbs ----------------------------------------------------------------------

def cmd_check_sc(args) -> int:
    p = load_presentation(args.source, args.r, args.l)
    lam = Fraction(args.lam)
    ok, table = check_metric(p, lam)
    if ok:
        print(f"OK: C'({lam}); max piece ratio {table.ratio}")
        return 0
    piece, o1, o2 = table.witness
    print(f"FAIL: not C'({lam}); max piece ratio {table.ratio}; piece {format_word(piece)} "
          f"(length {len(piece)}) in relator {o1.relator + 1} "
          f"(length {table.relator_lengths[o1.relator]}), also at relator {o2.relator + 1}")
    return 1


def cmd_word(args) -> int:
    p = load_presentation(args.source, args.r, args.l)
    w = parse(p.alphabet, args.word)
    red, trace = dehn_reduce(p, w)
    if args.verb == "solve":
        print("trivial" if not red else "nontrivial")
    else:
        print(format_word(red) or "1")
    if args.trace:
        for s in trace:
            print(f"  pos {s.position}: relator {s.occurrence.relator + 1}"
                  f"{'^-1' if s.occurrence.inverse else ''} offset {s.occurrence.offset}: "
                  f"{s.removed} -> {s.inserted} letters, length {s.length_after}")
    return 0


def cmd_subgroup(args) -> int:
    a = parse_alphabet(args.alphabet)
    g = stallings.build(parse_words(a, args.gens), a)
    if args.verb == "member":
        m = g.contains(parse(a, args.word))
        if m:
            expr = " ".join(f"h{abs(x)}" + ("^-1" if x < 0 else "") for x in m.expression) or "1"
            print(f"member: {expr}   (h_i = basis element i, {g.basis_kind} basis: "
                  f"{', '.join(format_word(b) for b in g.basis)})")
        else:
            print("not a member")
        return 0
    if args.verb == "intersect":
        g2 = stallings.build(parse_words(a, args.with_gens), a)
        h = stallings.intersect(g, g2)
        print(f"rank {h.rank}; basis: {', '.join(format_word(b) for b in h.basis) or '(trivial)'}")
        return 0
    res = stallings.is_malnormal(g)
    if res:
        print("malnormal")
    else:
        print(f"not malnormal: conjugator {format_word(res.conjugator)}, "
              f"common element {format_word(res.witness)}")
    return 0


def cmd_nf(args) -> int:
    base = parse_alphabet(args.base)
    if args.verb == "britton":
        if not args.phi:
            raise DomainError("nf britton needs --phi")
        spec = gog.AscendingHnnSpec(parse_endo(base, args.phi), args.stable)
        nf = gog.britton_normal_form(spec, args.word)
    else:
        nf = gog.freeprod_normal_form(gog.FreeProductSpec(base, args.stable), args.word)
    print(nf)
    if args.tree:
        proj = gog.bass_serre_projection(nf)
        print(f"tree path ({proj.length} edges): " + " - ".join(proj.describe()))
    return 0


def cmd_ray(args) -> int:
    rd = read_ray(args.descriptor)
    if args.verb == "classify":
        print(gog.classify_ray(rd))
    else:
        print(gog.landing_verdict(rd, args.base_rayct, args.stable_rayct))
    return 0


def cmd_omega(args) -> int:
    rd = read_ray(args.descriptor)
    print("in Omega" if gog.omega_membership(rd) else "not in Omega")
    return 0


def cmd_compose(args) -> int:
    h = load_presentation(args.source, args.r, args.l)
    q = parse_words(h.alphabet, args.q)
    if args.phi:
        qa = Alphabet([f"q{i + 1}" for i in range(len(q))])
        phi = parse_endo(qa, args.phi)
    else:
        phi = parse_words(h.alphabet, args.images)
    g = gog.compose_amalgam(h, q, phi, args.stable, args.name or "")
    text = g.to_text()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _oracle_source(args):
    if args.source == "ascending-demo":
        return examples.ascending_demo()
    return load_presentation(args.source, args.r, args.l)


def cmd_ball(args) -> int:
    src = _oracle_source(args)
    ball = cayley.build_ball(src, None, args.radius, args.cap)
    sizes = ball.sphere_sizes()
    cum = 0
    rows = []
    for d, s in enumerate(sizes):
        cum += s
        rows.append((d, s, cum))
    write_csv(rows, ["radius", "sphere", "ball"], args.csv)
    if not ball.complete:
        print(f"cap reached: complete up to radius {ball.radius}", file=sys.stderr)
    return 0


def cmd_dist(args) -> int:
    src = _oracle_source(args)
    ball = cayley.build_ball(src, None, args.radius, args.cap)
    print(cayley.distance(ball, parse(ball.alphabet, args.word)))
    return 0


def cmd_gromov(args) -> int:
    src = _oracle_source(args)
    ball = cayley.build_ball(src, None, args.radius, args.cap)
    a = ball.alphabet
    g = cayley.gromov_product(ball, parse(a, args.x), parse(a, args.y))
    if g is None:
        raise DomainError(f"a distance is beyond radius {ball.radius}")
    print(g)
    return 0


def cmd_mitra(args) -> int:
    if args.example == "ascending-demo":
        spec = examples.ascending_demo()
        inner, outer = spec.base, spec
    else:
        inner = outer = Alphabet("ab")
    letter = inner.letter(args.letter)
    table = cayley.mitra_table(inner, outer, lambda k: (letter,) * k, args.depth, args.radius, cap=args.cap)
    write_csv([(r.N, "" if r.M_hat is None else r.M_hat, r.pairs, r.capped) for r in table.rows],
              ["N", "M_hat", "pairs", "capped"], args.csv)
    return 0


def cmd_probe_jklo(args) -> int:
    if args.example != "baker-riley":
        raise DomainError(f"no probe families for {args.example!r}")
    fam = examples.baker_riley(args.r, args.l)
    seq_a, seq_b = examples.baker_riley_jklo_families(fam)
    rep = cayley.jklo_probe(seq_a, seq_b, args.n, fam.G.assumptions)
    print(f"# families: {rep.families[0]} vs {rep.families[1]}; n_max={rep.n_max}")
    print(f"# inner divergence: {'pass' if rep.divergent else 'fail'}")
    print(f"# single-letter power family: {'pass' if rep.seqB_power else 'fail'}")
    print(f"# distinct limit types: {'pass' if rep.distinct_limits else 'fail'}")
    print(f"# certificates: {', '.join(rep.certificates)}")
    print(f"# strong-JKLO evidence: {'yes' if rep.evidence else 'no'} (finite evidence only)")
    write_csv(list(rep.rows()), ["n", "m", "min_nm", "prefix_bound"], args.csv)
    return 0


def cmd_growth(args) -> int:
    base = parse_alphabet(args.base)
    phi = parse_endo(base, args.phi)
    rep = conjugate_growth_report(phi, parse(base, args.word), args.n, args.cap or 10**6)
    rows = [(r.k, "" if r.length is None else str(r.length), "" if r.log10 is None else f"{r.log10:.6f}")
            for r in rep.rows]
    write_csv(rows, ["k", "length", "log10_length"], args.csv)
    print(f"# monotone: {rep.monotone}; ratio: {rep.ratio}; growth is a proxy only", file=sys.stderr)
    if args.svg:
        pts = [(r.k, r.log10) for r in rep.rows if r.log10 is not None and r.length]
        Path(args.svg).write_text(emit_svg(pts, "growth", "k", "log10 length"), encoding="utf-8")
    return 0


def cmd_distortion(args) -> int:
    if args.exhaustive:
        a = parse_alphabet(args.base)
        g = stallings.build(parse_words(a, args.gens), a)
        ball = cayley.build_ball(a, None, args.n, args.cap)
        table = distortion.distortion_table_exhaustive(ball, g, args.n)
        rows = [(r.n, r.n, distortion.decimal(r.inner), f"{r.log10_lo:.12g}") for r in table.rows]
    else:
        if args.example == "baker-riley":
            certs = distortion.baker_riley_witnesses(args.r, args.l, args.n)
        elif args.example == "ascending-demo":
            spec = examples.ascending_demo()
            certs = distortion.endo_witnesses(spec.endo, spec.base.gen("a"), args.n)
        else:
            raise DomainError(f"no witness family for {args.example!r}")
        table = distortion.witness_lower_bound_table(certs)
        rows = [(c.n, r.n, "" if r.inner is None else distortion.decimal(r.inner), f"{r.log10_lo:.12g}")
                for c, r in zip(certs, table.rows)]
    write_csv(rows, ["n", "outer_len", "inner_len_decimal", "log10_inner"], args.csv)
    if args.svg:
        pts = [(r[0], float(r[3])) for r in rows]
        Path(args.svg).write_text(emit_svg(pts, f"distortion ({table.method})", "n", "log10 inner length"),
                                  encoding="utf-8")
    return 0


def cmd_witness(args) -> int:
    certs = distortion.baker_riley_witnesses(args.r, args.l, args.n)
    data = [c.to_json() for c in certs]
    if args.json:
        text = json.dumps(data, indent=2) + "\n"
        if args.json == "-":
            sys.stdout.write(text)
        else:
            Path(args.json).write_text(text, encoding="utf-8")
    else:
        for c in certs:
            print(f"n={c.n} outer={c.outer} outer_len={c.outer_length} "
                  f"log10_inner=[{c.log10_lo:.6f}, {c.log10_hi:.6f}] via {c.derivation}")
    return 0


def cmd_example(args) -> int:
    if args.verb == "list":
        for label, ex in sorted(examples.REGISTRY.items()):
            print(f"{label}\t{ex.description}")
        return 0
    if args.label not in examples.REGISTRY:
        raise DomainError(f"unknown example {args.label!r}")
    text = examples.get(args.label, r=args.r, l=args.l).to_text()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# --- parser -----------------------------------------------------------------------------

def _family_opts(p):
    p.add_argument("--r", type=int, default=examples.DEFAULT_R)
    p.add_argument("--l", type=int, default=examples.DEFAULT_L)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypgrp", description="Computational tools for hyperbolic group pairs.")
    ap.add_argument("--cap", type=int, default=None, help="resource cap (ball elements); env HYPGRP_CAP")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-sc", help="small-cancellation C'(lambda) check")
    p.add_argument("--lambda", dest="lam", default="1/6")
    p.add_argument("source", help="presentation file or example label")
    _family_opts(p)
    p.set_defaults(func=cmd_check_sc)

    p = sub.add_parser("word", help="Dehn's algorithm")
    p.add_argument("verb", choices=["solve", "reduce"])
    p.add_argument("source")
    p.add_argument("word")
    p.add_argument("--trace", action="store_true")
    _family_opts(p)
    p.set_defaults(func=cmd_word)

    p = sub.add_parser("subgroup", help="Stallings graph queries in a free group")
    sg = p.add_subparsers(dest="verb", required=True)
    for verb in ("member", "intersect", "malnormal"):
        q = sg.add_parser(verb)
        q.add_argument("--alphabet", default="ab")
        q.add_argument("--gens", required=True, help="comma-separated generator words")
        if verb == "member":
            q.add_argument("word")
        if verb == "intersect":
            q.add_argument("--with", dest="with_gens", required=True, help="second subgroup")
        q.set_defaults(func=cmd_subgroup)

    p = sub.add_parser("nf", help="normal forms")
    p.add_argument("verb", choices=["britton", "freeprod"])
    p.add_argument("--base", default="ab")
    p.add_argument("--stable", default="t")
    p.add_argument("--phi", default="", help="endomorphism, e.g. a=ab,b=ba")
    p.add_argument("--tree", action="store_true", help="also print the Bass-Serre path")
    p.add_argument("word")
    p.set_defaults(func=cmd_nf)

    p = sub.add_parser("ray", help="boundary ray descriptors (JSON)")
    p.add_argument("verb", choices=["classify", "landing"])
    p.add_argument("descriptor", help="JSON file or - for stdin")
    p.add_argument("--base-rayct", action="store_true")
    p.add_argument("--stable-rayct", action="store_true")
    p.set_defaults(func=cmd_ray)

    p = sub.add_parser("omega", help="is the ray endpoint a translate of t^(+-inf)?")
    p.add_argument("descriptor")
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("compose", help="add a stable letter conjugating Q by phi")
    p.add_argument("source")
    p.add_argument("--q", required=True, help="comma-separated words generating Q")
    p.add_argument("--phi", default="", help="images over q1, q2, ...: q1=q1q2,...")
    p.add_argument("--images", default="", help="explicit image words over the presentation")
    p.add_argument("--stable", default="t")
    p.add_argument("--name", default="")
    p.add_argument("-o", "--output")
    _family_opts(p)
    p.set_defaults(func=cmd_compose)

    for verb, func in (("ball", cmd_ball), ("dist", cmd_dist), ("gromov", cmd_gromov)):
        p = sub.add_parser(verb)
        p.add_argument("source", help="presentation file, example label, or ascending-demo")
        if verb == "dist":
            p.add_argument("word")
        if verb == "gromov":
            p.add_argument("x")
            p.add_argument("y")
        p.add_argument("--radius", type=int, default=3)
        p.add_argument("--csv")
        _family_opts(p)
        p.set_defaults(func=func)

    p = sub.add_parser("mitra", help="empirical Mitra table along a power ray")
    p.add_argument("--example", choices=["ascending-demo", "free2"], default="ascending-demo")
    p.add_argument("--letter", default="a")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_mitra)

    p = sub.add_parser("probe-jklo", help="strong-JKLO evidence report")
    p.add_argument("--example", default="baker-riley")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--csv")
    _family_opts(p)
    p.set_defaults(func=cmd_probe_jklo)

    p = sub.add_parser("growth", help="lengths of phi^k(w)")
    p.add_argument("--base", default="ab")
    p.add_argument("--phi", required=True)
    p.add_argument("--word", default="a")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("distortion", help="distortion tables")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--witness", action="store_true")
    p.add_argument("--example", default="baker-riley")
    p.add_argument("--base", default="ab")
    p.add_argument("--gens", default="aa,bb")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--csv")
    p.add_argument("--svg")
    _family_opts(p)
    p.set_defaults(func=cmd_distortion)

    p = sub.add_parser("witness", help="Baker-Riley witness certificates")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--json", nargs="?", const="-", default=None)
    _family_opts(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("example", help="named example presentations")
    p.add_argument("verb", choices=["list", "emit"])
    p.add_argument("label", nargs="?", default="")
    p.add_argument("-o", "--output")
    _family_opts(p)
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    usage = None
    if args.command == "example" and args.verb == "emit" and not args.label:
        usage = "example emit needs a label"
    if usage:
        print(f"hypgrp: error: {usage}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (DomainError, NotSmallCancellation, cayley.ProbeRejected, cayley.Uncertified,
            gog.GogError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"hypgrp: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
