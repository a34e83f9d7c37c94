"""Command line front end.

Subcommands::

    semipert verify   --scenario S [--out DIR] [--csv] [--strict] [--seed N]
    semipert sweep    --scenario S --check ID --param {C,jump_scale} --values 0.1,0.2 [--out DIR]
    semipert converge --scenario S [--out DIR]
    semipert kernel   --scenario S [--out DIR]
    semipert generate --seed N --size K --profile {laplacian,metzler,jump}

Exit status: 0 when every check holds (inconclusive counts as holding
unless ``--strict``), 1 on a failing check or structured error, 2 when the
scenario cannot be parsed or validated.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ScenarioError, SemipertError
from .kernels import extract_kernel, jump_bound_terms, jump_setup
from .scenario import (
    Scenario,
    _clean,
    dumps_report,
    generate_random_instance,
    load_scenario,
    run_check,
    run_scenario,
    run_study,
)

log = logging.getLogger("semipert")

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])


def _seed(args, sc: Scenario):
    return sc.seed if args.seed is None else args.seed


def cmd_verify(args, sc: Scenario) -> int:
    report, timing = run_scenario(sc, seed=args.seed, strict=args.strict)
    out = _out_dir(args)
    (out / "report.json").write_text(dumps_report(report), encoding="utf-8")
    (out / "timing.json").write_text(json.dumps(timing, indent=2) + "\n", encoding="utf-8")
    if args.csv:
        for chk in report["checks"]:
            rows = (chk.get("verdict") or {}).get("details") or []
            if not rows:
                continue
            keys = list(rows[0].keys())
            _write_csv(out / f"{chk['id']}.csv", keys, ([r.get(k) for k in keys] for r in rows))
        for st in report["studies"]:
            if "rows" in st:
                cols = st["columns"]
                _write_csv(out / f"{st['id']}.csv", cols, ([r[c] for c in cols] for r in st["rows"]))
    for chk in report["checks"]:
        extra = f" (expected {chk['expected']})" if "expected" in chk else ""
        print(f"{chk['id']:<28} {chk['type']:<22} {chk['status']}{extra}")
    print(f"report: {out / 'report.json'}")
    return report["summary"]["exit_status"]


def cmd_sweep(args, sc: Scenario) -> int:
    idx = next((i for i, c in enumerate(sc.checks) if c.get("id") == args.check), None)
    if idx is None:
        raise ScenarioError(f"no check with id {args.check!r}", "--check")
    base = sc.checks[idx]
    values = [float(v) for v in args.values.split(",") if v.strip()]
    rows = []
    for v in values:
        chk = dict(base, **{args.param: v})
        chk.pop("expect", None)
        r = run_check(sc, chk, idx, _seed(args, sc))
        vd = r.get("verdict", {})
        rows.append([v, r["status"], vd.get("worst_margin"), vd.get("error_band")])
    out = _out_dir(args)
    path = out / f"sweep_{args.check}_{args.param}.csv"
    _write_csv(path, [args.param, "status", "worst_margin", "error_band"], rows)
    for r in rows:
        print(f"{args.param}={r[0]:<12g} {r[1]:<13} margin={r[2]}")
    print(f"csv: {path}")
    return EXIT_OK


def cmd_converge(args, sc: Scenario) -> int:
    if not sc.studies:
        raise ScenarioError("scenario declares no studies", "studies")
    out = _out_dir(args)
    status = EXIT_OK
    for i, s in enumerate(sc.studies):
        st = _clean(run_study(sc, s, i))
        if st.get("status") == "error":
            print(f"{st['id']}: error: {st['error']['message']}")
            status = EXIT_FAIL
            continue
        cols = st["columns"]
        _write_csv(out / f"{st['id']}.csv", cols, ([r[c] for c in cols] for r in st["rows"]))
        last = st["rows"][-1]
        print(f"{st['id']:<20} {st['type']:<13} rows={len(st['rows'])} last={last}")
    return status


def _write_matrix(path: Path, a) -> None:
    _write_csv(path, ["x"] + [f"y{y}" for y in range(a.shape[1])],
               ([x] + [float(v) for v in a[x]] for x in range(a.shape[0])))


def cmd_kernel(args, sc: Scenario) -> int:
    """One CSV matrix per kernel and time, plus a JSON summary of the bound margins."""
    out = _out_dir(args)
    seen = 0
    summary = []
    for i, c in enumerate(sc.checks):
        if c["type"] != "jump_kernel_theorem":
            continue
        seen += 1
        where = f"checks[{i}]"
        cid = c.get("id", f"check{i}")
        j = sc.jump(c["jump"], where).scaled(float(c.get("jump_scale", 1.0)))
        setup = jump_setup(sc.form(c["form"], where), j, int(c.get("samples", 200)), seed=0)
        C = float(c.get("C", 1.0))
        per_t = []
        for t in c.get("times", [0.1, 1.0]):
            t = float(t)
            kT, kS, integ, err = jump_bound_terms(setup, t, int(c.get("quad_steps", 256)))
            margin = kS + C * integ[:, None] - kT
            tag = f"{cid}_t{t:g}"
            _write_matrix(out / f"{tag}_kT.csv", kT)
            _write_matrix(out / f"{tag}_kS.csv", kS)
            _write_matrix(out / f"{tag}_margin.csv", margin)
            x, y = np.unravel_index(int(np.argmin(margin)), margin.shape)
            per_t.append({"t": t, "min_margin": float(margin.min()), "site": {"x": int(x), "y": int(y)},
                          "band": float(C * err.max())})
            print(f"{cid:<28} t={t:<8g} min_margin={margin.min():.6g}")
        summary.append({"id": cid, "C": C, "omega": setup.omega, "per_t": per_t})
    for name in sorted(sc.operators):
        if args.operator and name != args.operator:
            continue
        try:
            G = sc.generator(name, "--operator")
        except ScenarioError:
            continue
        _write_matrix(out / f"heat_{name}_t{args.t:g}.csv", extract_kernel(G, args.t).values)
        seen += 1
    if not seen:
        raise ScenarioError("nothing to dump", "--operator")
    (out / "kernel_summary.json").write_text(json.dumps(_clean(summary), indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_generate(args) -> int:
    frag = generate_random_instance(args.seed, args.size, args.profile)
    doc = {"schema_version": 1, "name": f"random_{args.profile}_{args.size}_{args.seed}",
           "seed": args.seed, **frag, "checks": []}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        _out_dir(args)
        path = Path(args.out) / f"{doc['name']}.json"
        path.write_text(text, encoding="utf-8")
        print(path)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="semipert", description="Verify perturbation estimates for positive matrix semigroups.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_default="semipert_out"):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    p = sub.add_parser("verify", help="run every check in a scenario")
    common(p)
    p.add_argument("--csv", action="store_true", help="also write per-site margin tables")
    p.add_argument("--strict", action="store_true", help="treat inconclusive verdicts as failures")

    p = sub.add_parser("sweep", help="vary one check parameter and tabulate margins")
    common(p)
    p.add_argument("--check", required=True, help="id of the check to vary")
    p.add_argument("--param", default="C", help="parameter name, e.g. C or jump_scale")
    p.add_argument("--values", required=True, help="comma-separated values")

    p = sub.add_parser("converge", help="run Euler and convolution-sum studies")
    common(p)

    p = sub.add_parser("kernel", help="dump heat kernels and kernel-bound margins")
    common(p)
    p.add_argument("--operator", default=None, help="only dump this operator's heat kernel")
    p.add_argument("--t", type=float, default=1.0, help="time for heat-kernel dumps")

    p = sub.add_parser("generate", help="emit a random scenario skeleton")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--profile", choices=["laplacian", "metzler", "jump"], required=True)
    p.add_argument("--out", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            return cmd_generate(args)
        sc = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    handler = {"verify": cmd_verify, "sweep": cmd_sweep, "converge": cmd_converge, "kernel": cmd_kernel}
    try:
        return handler[args.command](args, sc)
    except SemipertError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
