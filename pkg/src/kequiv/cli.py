"""Command-line driver: ``kequiv <command> [options]``.

Exit codes: 0 every claim verified, 1 a claim was refuted, 2 malformed
input, 3 a computation was refused (budget or precondition).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import arcs, chow, genera, motive, toric, zeta
from .exactalg import SeriesRing, series_invert
from .report import (
    EXIT_MALFORMED,
    REFUSED,
    REFUTED,
    VERIFIED,
    Claim,
    ConfigError,
    Report,
    RunConfig,
    digest,
)

COV_SPACES = ("Bl_pt P2", "Bl_pt P3", "Bl_line P3")
COV_KINDS = ("todd", "chi_y", "elliptic")


class InputError(Exception):
    """Malformed input, carrying where it came from."""

    def __init__(self, location: str, exc: BaseException):
        super().__init__(f"{location}: {type(exc).__name__}: {exc}")
        self.location = location
        self.original = exc


def _status(ok: bool) -> str:
    return VERIFIED if ok else REFUTED


def _slug(text: str) -> str:
    return text.replace(" ", "_")


def _load_json(path: str, report: Report):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(path, exc) from None
    report.inputs[path] = digest(path)
    return doc


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


# -- commands ------------------------------------------------------------------------


def cmd_genus(args, cfg: RunConfig, report: Report):
    if args.fan:
        doc = _load_json(args.fan, report)
        try:
            space = toric.build_toric(doc)
        except (toric.FanError, KeyError, TypeError, ValueError) as exc:
            raise InputError(args.fan, exc) from None
        pres, name = space.chow, space.name
    else:
        if not args.space:
            raise InputError("genus", ValueError("a space name or --fan is required"))
        try:
            pres, name = chow.space(args.space), chow.canonical_name(args.space)
        except chow.RegistryError as exc:
            raise InputError(args.space, exc) from None
    spec = genera.GenusSpec(args.kind, k=args.k, y=args.y, q_order=cfg.q_order)
    value = genera.genus(pres, spec)
    cid = f"genus/{_slug(name)}/{spec.kind}"
    if spec.kind == "elliptic":
        other = genera.genus_via_bundle(pres, spec)
        report.add(Claim(cid, "elliptic-genus-two-routes", _status(value == other), value, other, {"q_order": cfg.q_order}))
    else:
        report.add(Claim(cid, "genus-value", VERIFIED, value, None, {"route": "characteristic class only"}))
    report.data["chern_numbers"] = [("partition", "value")] + [
        ("*".join(f"c{i}" for i in p), str(v)) for p, v in sorted(genera.chern_numbers(pres).items())
    ]


def _control_series(x_order: int):
    ring = SeriesRing(("x",), (2 * x_order + 1,))
    x = ring.gen("x")
    return series_invert(ring.one() + x * x)


def cmd_verify_fe(args, cfg: RunConfig, report: Report):
    spec = genera.GenusSpec("elliptic", q_order=cfg.q_order)
    fe = genera.verify_functional_equation(spec, x_order=cfg.x_order)
    report.add(Claim("fe/elliptic", "flop-functional-equation", fe.status, None, None, fe.first_discrepancy or fe.details))
    ctl = genera.verify_functional_equation(x_order=cfg.x_order, control=_control_series(cfg.x_order))
    report.add(
        Claim(
            "fe/negative-control",
            "flop-functional-equation",
            _status(ctl.status == REFUTED),
            None,
            None,
            {"control": "f = x + x^3", "first_discrepancy": ctl.first_discrepancy}
            if ctl.first_discrepancy is not None
            else {"control": "f = x + x^3", "note": "control satisfies the equation at this x-order; raise --xorder"},
        )
    )
    jac = genera.verify_jacobian_equation(spec, x_order=cfg.x_order)
    report.add(Claim("fe/jacobian-r2", "jacobian-functional-equation", jac.status, None, None, jac.first_discrepancy or jac.details))
    norm = genera.jacobian_normalizations(spec)
    report.add(Claim("fe/jacobian-normalizations", "jacobian-functional-equation", norm.status, None, None, norm.details))


def cmd_verify_cov(args, cfg: RunConfig, report: Report):
    spaces = args.space or list(COV_SPACES)
    kinds = args.kind or list(COV_KINDS)
    for name in spaces:
        try:
            datum = chow.gallery(name)
        except chow.RegistryError as exc:
            raise InputError(name, exc) from None
        if not isinstance(datum, chow.BlowupDatum):
            raise InputError(name, ValueError("not a blow-up in the gallery"))
        for kind in kinds:
            spec = genera.GenusSpec(kind, q_order=cfg.q_order) if kind == "elliptic" else genera.GenusSpec(kind)
            residue, kills, cov = genera.verify_change_of_variable(datum, spec)
            base = f"cov/{_slug(datum.name)}/{spec.kind}"
            report.add(Claim(f"{base}/residue-identity", "blowup-residue", residue.status, None, None, residue.first_discrepancy))
            report.add(Claim(f"{base}/jacobian-kills-residue", "blowup-residue", kills.status, None, None, kills.first_discrepancy))
            report.add(
                Claim(
                    f"{base}/change-of-variable",
                    "change-of-variable",
                    cov.status,
                    cov.lhs,
                    cov.rhs,
                    {"jacobian_is_one": cov.details["jacobian_is_one"], "first_discrepancy": cov.first_discrepancy},
                )
            )


def cmd_verify_motive(args, cfg: RunConfig, report: Report):
    for data in motive.gallery_blowup_classes():
        for rep, which in zip(motive.blowup_identity(data), ("relation", "localized")):
            report.add(Claim(f"motive/{_slug(data.name)}/{which}", "blowup-motive", rep.status, rep.lhs, rep.rhs, rep.difference))
    bl = next(d for d in motive.gallery_blowup_classes() if d.name == "Bl_pt P2")
    snc = motive.blowup_snc_data(bl, 1)
    got = motive.snc_class(snc)
    report.add(Claim("motive/snc/Bl_pt_P2", "stringy-class", _status(got == bl.X), got, bl.X, None))
    report.add(Claim("motive/snc/Bl_pt_P2/forms-agree", "stringy-class", _status(motive.snc_forms_agree(snc)), None, None, None))


def cmd_stringy(args, cfg: RunConfig, report: Report):
    rows = [("model", "resolution", "E_st(uv)")]
    if args.resolution:
        doc = _load_json(args.resolution, report)
        try:
            data = motive.SncResolutionData.from_document(doc)
        except motive.MotiveError as exc:
            raise InputError(args.resolution, exc) from None
        e = motive.stringy_e(data)
        rows.append(("document", data.name, _fmt_e(e)))
        report.add(Claim(f"stringy/{_slug(data.name)}/forms-agree", "stringy-class", _status(motive.snc_forms_agree(data)), e, None, None))
    else:
        names = [args.model] if args.model else motive.singular_model_names()
        for name in names:
            try:
                _, resolutions = motive.singular_model(name)
            except chow.RegistryError as exc:
                raise InputError(name, exc) from None
            values = []
            for res in resolutions:
                data = motive.toric_resolution_data(res)
                e = motive.stringy_e(data)
                values.append(e)
                rows.append((name, res.name, _fmt_e(e)))
                report.add(
                    Claim(f"stringy/{name}/{res.name}/forms-agree", "stringy-class", _status(motive.snc_forms_agree(data)), e, None, None)
                )
            agree = all(v == values[0] for v in values)
            report.add(Claim(f"stringy/{name}/resolutions-agree", "stringy-class", _status(agree), values[0], values[1:], None))
    report.data["stringy_e"] = rows


def _fmt_e(e) -> str:
    if e.polynomial is not None:
        return " + ".join(f"{c}*(uv)^{i}" for i, c in enumerate(e.polynomial) if c) or "0"
    return f"({e.numerator}) / ({e.denominator})"


def cmd_zeta(args, cfg: RunConfig, report: Report):
    if args.pair_file:
        doc = _load_json(args.pair_file, report)
        try:
            X, Xp, _ = toric.flop_pair_from_document(doc)
        except (toric.FanError, toric.FlopError, KeyError, TypeError, ValueError) as exc:
            raise InputError(args.pair_file, exc) from None
    elif args.spaces:
        X, Xp = args.spaces
    else:
        X, Xp = f"{args.pair}/A", f"{args.pair}/B"
    try:
        X, Xp = zeta.resolve_space(X), zeta.resolve_space(Xp)
    except zeta.ZetaError as exc:
        raise InputError("zeta compare", exc) from None
    base = f"zeta/{_slug(zeta.space_name(X))}~{_slug(zeta.space_name(Xp))}"
    rows = [("q", "r", "N_r(X)", "N_r(X')")]
    for q in cfg.primes:
        try:
            cmp = zeta.compare_pair(X, Xp, [q], cfg.R, cfg.budget).comparisons[0]
        except zeta.CountBudgetError as exc:
            report.add(Claim(f"{base}/q{q}", "zeta-comparison", REFUSED, None, None, {"required": exc.required, "budget": exc.budget}))
            continue
        except zeta.ZetaError as exc:
            raise InputError(f"zeta compare q={q}", exc) from None
        ta, tb = cmp.tables
        for r, (a, b) in enumerate(zip(ta.counts, tb.counts), 1):
            rows.append((str(q), str(r), str(a), str(b)))
        witness = None if cmp.equal else {"first_discrepancy": cmp.first_discrepancy, "series_equal": cmp.series_equal}
        report.add(Claim(f"{base}/q{q}", "zeta-comparison", _status(cmp.equal), list(ta.counts), list(tb.counts), witness))
    report.data["counts"] = rows


def cmd_arcs(args, cfg: RunConfig, report: Report):
    if args.model_file:
        doc = _load_json(args.model_file, report)
        try:
            model = arcs.JetModel.from_document(doc)
        except arcs.ArcsError as exc:
            raise InputError(args.model_file, exc) from None
    else:
        try:
            model = arcs.jet_model(args.model)
        except chow.RegistryError as exc:
            raise InputError(args.model, exc) from None
    m, q, kmax = args.m, args.q, args.kmax
    base = f"arcs/{model.name}/m{m}q{q}"
    try:
        zeta._check_q(q)
    except zeta.ZetaError as exc:
        raise InputError("--q", exc) from None
    rows = [("k", "source", "image", "base", "fibre sizes")]
    try:
        for k in range(kmax + 1):
            rep = arcs.verify_fibration(model, m, q, k, cfg.budget)
            report.add(Claim(f"{base}/fibration-k{k}", "jet-fibration", rep.status, rep.source_count, rep.image_count, rep.to_document()["fiber_sizes"]))
        cnt = arcs.counting_change_of_variable(model, m, q, kmax, cfg.budget)
        for s in cnt.strata:
            rows.append((str(s.k), str(s.source_count), str(s.image_count), str(s.base_count), json.dumps(s.to_document()["fiber_sizes"], sort_keys=True)))
        report.add(
            Claim(f"{base}/counting", "jet-counting", cnt.status, str(cnt.weighted_source), cnt.base_total, {"excluded": cnt.excluded, "unexamined": cnt.unexamined})
        )
        ov = arcs.overlap_orders_agree(model, m, q, cfg.budget)
        report.add(Claim(f"{base}/overlap-orders", "jet-fibration", _status(ov["disagreements"] == 0), None, None, ov))
    except arcs.BudgetError as exc:
        report.add(Claim(f"{base}/budget", "jet-fibration", REFUSED, None, None, {"required": exc.required, "budget": exc.budget}))
    except arcs.RegimeError as exc:
        report.add(Claim(f"{base}/regime", "jet-fibration", REFUSED, None, None, str(exc)))
    if len(rows) > 1:
        report.data["strata"] = rows


def cmd_gallery(args, cfg: RunConfig, report: Report):
    rows = [("kind", "name", "detail")]
    for name in chow.gallery_names():
        entry = chow.gallery(name)
        if isinstance(entry, chow.BlowupDatum):
            rows.append(("blow-up", entry.name, f"{entry.target.name} along {entry.center.name}, codim {entry.codim}"))
        else:
            rows.append(("space", name, f"dim {entry.dim}"))
    for name in toric.fan_names():
        sp = toric.gallery_fan(name)
        rows.append(("fan", name, f"{len(sp.fan.rays)} rays, {len(sp.fan.cones)} cones"))
    for name in toric.flop_pair_names():
        rows.append(("flop pair", name, f"{name}/A, {name}/B"))
    for name in arcs.model_names():
        rows.append(("jet model", name, f"{len(arcs.jet_model(name).charts)} charts"))
    for name in motive.singular_model_names():
        rows.append(("singular model", name, f"{len(motive.singular_model(name)[1])} resolutions"))
    for name, h in sorted(zeta.HYPERSURFACES.items()):
        rows.append(("hypersurface", name, f"{h.equation} ({'projective' if h.projective else 'affine'})"))
    if args.fan:
        doc = _load_json(args.fan, report)
        try:
            sp = toric.build_toric(doc)
        except (toric.FanError, KeyError, TypeError, ValueError) as exc:
            raise InputError(args.fan, exc) from None
        rows.append(("fan file", sp.name, f"valid, dim {sp.dim}"))
    report.data["gallery"] = rows


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "machine"), default=None)
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--config", default=None, help="JSON run configuration")
    common.add_argument("--budget", type=int, default=None)

    p = argparse.ArgumentParser(prog="kequiv", description="Exact checks of K-equivalence invariants.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("genus", parents=[common], help="evaluate a genus on a gallery space or fan file")
    g.add_argument("space", nargs="?")
    g.add_argument("--kind", default="elliptic")
    g.add_argument("--k", type=_fraction, default=None)
    g.add_argument("--y", type=_fraction, default=None)
    g.add_argument("--qorder", type=int, default=None)
    g.add_argument("--fan", default=None)
    g.set_defaults(func=cmd_genus)

    v = sub.add_parser("verify", help="verify identities")
    vsub = v.add_subparsers(dest="claim", required=True)
    fe = vsub.add_parser("elliptic-fe", parents=[common])
    fe.add_argument("--xorder", type=int, default=None)
    fe.add_argument("--qorder", type=int, default=None)
    fe.set_defaults(func=cmd_verify_fe)
    cov = vsub.add_parser("cov", parents=[common], help="blow-up change of variable")
    cov.add_argument("--space", action="append", default=None)
    cov.add_argument("--kind", action="append", default=None, choices=COV_KINDS)
    cov.add_argument("--qorder", type=int, default=None)
    cov.set_defaults(func=cmd_verify_cov, default_qorder=2)
    bm = vsub.add_parser("blowup-motive", parents=[common])
    bm.set_defaults(func=cmd_verify_motive)

    s = sub.add_parser("stringy-e", parents=[common], help="stringy E-functions of shipped singular models")
    s.add_argument("model", nargs="?")
    s.add_argument("--resolution", default=None, help="SNC resolution document")
    s.set_defaults(func=cmd_stringy)

    z = sub.add_parser("zeta", help="point counts and zeta functions")
    zsub = z.add_subparsers(dest="action", required=True)
    zc = zsub.add_parser("compare", parents=[common])
    zc.add_argument("--pair", default="conifold-3fold")
    zc.add_argument("--pair-file", default=None)
    zc.add_argument("--spaces", nargs=2, default=None, metavar=("X", "XP"))
    zc.add_argument("--q", type=_int_list, default=None)
    zc.add_argument("--R", type=int, default=None)
    zc.set_defaults(func=cmd_zeta)

    a = sub.add_parser("arcs", help="jet-space enumeration")
    asub = a.add_subparsers(dest="action", required=True)
    av = asub.add_parser("verify", parents=[common])
    av.add_argument("--model", default="Bl0A2")
    av.add_argument("--model-file", default=None)
    av.add_argument("--m", type=int, default=4)
    av.add_argument("--q", type=int, default=2)
    av.add_argument("--kmax", type=int, default=2)
    av.set_defaults(func=cmd_arcs)

    gl = sub.add_parser("gallery", help="shipped spaces and models")
    gsub = gl.add_subparsers(dest="action", required=True)
    gll = gsub.add_parser("list", parents=[common])
    gll.add_argument("--fan", default=None, help="also validate a fan document")
    gll.set_defaults(func=cmd_gallery)
    return p


def _config(args, report: Report) -> RunConfig:
    doc = {}
    if args.config:
        doc = _load_json(args.config, report)
        if not isinstance(doc, dict):
            raise InputError(args.config, ConfigError("configuration must be an object"))
    overrides = {
        "format": args.format,
        "output": args.output,
        "budget": args.budget,
        "x_order": getattr(args, "xorder", None),
        "q_order": getattr(args, "qorder", None),
        "R": getattr(args, "R", None),
        "primes": getattr(args, "q", None) if isinstance(getattr(args, "q", None), tuple) else None,
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if "q_order" not in doc and hasattr(args, "default_qorder"):
        doc["q_order"] = args.default_qorder
    doc["command"] = " ".join(report.command)
    doc["inputs"] = tuple(sorted(report.inputs))
    try:
        return RunConfig.from_mapping(doc)
    except (ConfigError, TypeError) as exc:
        raise InputError(args.config or "arguments", exc) from None


def run(argv: Sequence[str] | None = None) -> tuple[int, Report | None]:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_MALFORMED if exc.code else 0), None
    report = Report(argv)
    try:
        cfg = _config(args, report)
        args.func(args, cfg, report)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED, None
    except (genera.GenusError, motive.MotiveError, zeta.ZetaError, arcs.ArcsError, toric.FanError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MALFORMED, None
    text = report.to_json() if cfg.format == "machine" else report.render_human()
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report.exit_status, report


def main(argv: Sequence[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
