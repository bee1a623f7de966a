"""Command-line front end.

    finhall catalog   --config model.json [--box 5] [--cache-dir DIR] [--out DIR]
    finhall check     --config model.json --suite all
    finhall hn        --config model.json
    finhall partition --config model.json [--sign-twist]
    finhall series    --config model.json --element hilb

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 resource guard tripped.  Every output file is a deterministic function of
the configuration and box; wall-clock timings go to a separate
``timings-<command>.json`` sidecar so that reports and manifests compare byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cache import load_or_build
from .errors import ConfigError, FinhallError, MissingGradeError, ResourceGuardError
from .hall import HallAlgebra
from .oracles import hn_filtrations_exhaustive
from .partition import NU_NOTE, integrate, partition_report, riedtmann_audit, series_box
from .quiver import load_model, parse_box_spec
from .reports import Report, jsonable
from .series import sign_twist
from .stability import SlopeInterval

log = logging.getLogger("finhall")

SUITES = ("torsion", "seesaw", "pqss", "hn", "hall", "limits", "riedtmann")
ELEMENTS = ("hilb", "hilb_exc", "pi_hilb", "framed", "indicator")
HN_ORACLE_MAX_DIM = 4

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


def _dump(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(obj), indent=1, sort_keys=True) + "\n")


class Session:
    """Config, catalog and algebra for one command invocation."""

    def __init__(self, args):
        self.args = args
        cfg = load_model(args.config, validate=not args.skip_weight_validation)
        if args.box:
            cfg = cfg.replace(box=parse_box_spec(args.box, cfg.nverts))
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        self.config = cfg
        self.out = Path(args.out)
        self.timings = {}
        t = time.perf_counter()
        self.catalog, self.cache_status = load_or_build(cfg, args.cache_dir)
        self.timings["catalog"] = time.perf_counter() - t
        self.algebra = HallAlgebra(self.catalog)
        log.info("catalog %s: %d classes (%s)", cfg.content_hash()[:12], len(self.catalog), self.cache_status)

    @property
    def stability(self):
        return self.algebra.stability

    def manifest(self, command, summary):
        return {
            "schema": "finhall-manifest/1",
            "version": __version__,
            "command": command,
            "config_hash": self.config.content_hash(),
            "box": self.config.box.to_json(),
            "class_counts": {",".join(map(str, d)): len(g.classes) for d, g in self.catalog.grades.items()},
            "summary": summary,
        }

    def finish(self, command, summary):
        _dump(self.out / f"manifest-{command}.json", self.manifest(command, summary))
        _dump(self.out / f"timings-{command}.json", {k: round(v, 3) if isinstance(v, float) else v for k, v in self.timings.items()})


# -- suites ------------------------------------------------------------------------------


def suite_torsion(s: Session):
    st = s.stability
    reports = [st.validate_torsion_pair(*st.serre_pair()), st.validate_torsion_pair(*st.slope_pair())]
    reports.append(st.threshold_pairs_report())
    for mu in st.realized_slopes():
        reports.append(st.interval_closure_report(SlopeInterval.exactly(mu)))
        reports.append(st.interval_closure_report(SlopeInterval.at_least(mu)))
    return reports


def suite_seesaw(s: Session):
    st = s.stability
    return [st.seesaw_audit(), st.hom_slope_check(), st.semistability_criteria_report(), st.endpoint_slopes_report()]


def suite_pqss(s: Session):
    return [s.stability.compare_pqss()]


def hn_table(s: Session) -> Report:
    st = s.stability
    rep = Report("hn")
    for G in s.catalog:
        if G.is_zero:
            continue
        filt = st.hn(G)
        witness = filt.to_json()
        ok = True
        if G.total_dim <= HN_ORACLE_MAX_DIM:
            chains = hn_filtrations_exhaustive(st, G)
            expected = [(tuple(x.dims for x in filt.steps), filt.quotients, filt.slopes)]
            ok = chains == expected
            witness["oracle_chains"] = len(chains)
        rep.add("hn", G.id, ok, witness)
    return rep


def suite_hn(s: Session):
    return [hn_table(s)]


def suite_hall(s: Session):
    alg = s.algebra
    reports = alg.identity_chain()
    rng = random.Random(s.config.seed)
    ids = list(s.catalog.classes)
    samples = [
        alg.element({c: Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for c in rng.sample(ids, min(6, len(ids)))})
        for _ in range(3)
    ]
    reports.append(alg.dual_path_report(samples))
    reports += [
        alg.free_action_report(),
        alg.slope_factorization_report(),
        alg.interval_refinement_report(),
        alg.epsilon_report(),
    ]
    return reports


def suite_limits(s: Session):
    return [s.algebra.limit_lemma_check()]


def suite_riedtmann(s: Session):
    return [riedtmann_audit(s.algebra)]


SUITE_FUNCS = {
    "torsion": suite_torsion,
    "seesaw": suite_seesaw,
    "pqss": suite_pqss,
    "hn": suite_hn,
    "hall": suite_hall,
    "limits": suite_limits,
    "riedtmann": suite_riedtmann,
}


def run_suites(s: Session, suites):
    out = {}
    for name in suites:
        t = time.perf_counter()
        out[name] = SUITE_FUNCS[name](s)
        s.timings[f"suite:{name}"] = time.perf_counter() - t
    return out


# -- commands -------------------------------------------------------------------------------


def cmd_catalog(s: Session) -> int:
    checks = s.catalog.verify_checksums()
    ok = all(checks.values())
    ext = s.catalog.framing_ext_vanishing()
    summary = {"orbit_checksums": ok, "framing_ext_against_S": ext}
    _dump(s.out / "catalog.json", {"schema": "finhall-catalog-listing/1", "config_hash": s.config.content_hash(),
                                   "classes": s.catalog.to_records()})
    s.timings["cache_status"] = s.cache_status
    s.finish("catalog", summary)
    print(f"catalog: {len(s.catalog)} classes over {len(s.catalog.grades)} dimension vectors; "
          f"checksums {'ok' if ok else 'FAILED'} (cache {s.cache_status})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(s: Session) -> int:
    suites = SUITES if s.args.suite == "all" else (s.args.suite,)
    results = run_suites(s, suites)
    doc = {
        "schema": "finhall-check/1",
        "config_hash": s.config.content_hash(),
        "suite": s.args.suite,
        "suites": {name: [r.to_json() for r in reps] for name, reps in results.items()},
    }
    _dump(s.out / f"check-{s.args.suite}.json", doc)
    summary = {}
    for name, reps in results.items():
        for r in reps:
            summary[f"{name}/{r.name}"] = r.passed
            print(f"{'PASS' if r.passed else 'FAIL'}  {name:<10} {r.name}  ({len(r.entries)} checks, {len(r.failures)} failures)")
    s.finish(f"check-{s.args.suite}", summary)
    return EXIT_OK if all(summary.values()) else EXIT_FAIL


def cmd_hn(s: Session) -> int:
    rep = hn_table(s)
    _dump(s.out / "hn.json", rep.to_json())
    for e in rep.entries:
        w = e["witness"]
        slopes = " > ".join(map(str, (tuple(x) for x in w["slopes"])))
        print(f"{e['object']:<12} quotients {' | '.join(w['quotients']):<40} slopes {slopes}")
    s.finish("hn", {"hn": rep.passed})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_partition(s: Session) -> int:
    rep = partition_report(s.algebra, s.args.sign_twist)
    header = {"nu": NU_NOTE, "config_hash": s.config.content_hash(), "sign_twisted": rep.sign_twisted}
    for name, series in rep.series().items():
        series.dump(s.out / f"{name}.json", name=name, **header)
    (s.out / "partition.txt").write_text(rep.table())
    vr = rep.vanishing_report()
    _dump(s.out / "partition-defect.json", vr.to_json())
    sys.stdout.write(rep.table())
    print(f"{'PASS' if vr.passed else 'FAIL'}  defect vanishes at grade 0 and single-sided grades; "
          f"nonzero elsewhere at {vr.info['nonzero_defect_grades']}")
    s.finish("partition", {"defect_vanishing": vr.passed})
    return EXIT_OK if vr.passed else EXIT_FAIL


def cmd_series(s: Session) -> int:
    alg = s.algebra
    make = {
        "hilb": alg.hilb,
        "hilb_exc": alg.hilb_exc,
        "pi_hilb": alg.pi_hilb,
        "framed": alg.framed,
        "indicator": alg.indicator,
    }[s.args.element]
    series = integrate(make(), series_box(alg))
    if s.args.sign_twist:
        series = sign_twist(series)
    doc = series.to_json(name=s.args.element, nu=NU_NOTE, sign_twisted=s.args.sign_twist,
                         config_hash=s.config.content_hash())
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    _dump(s.out / f"series-{s.args.element}.json", doc)
    sys.stdout.write(text)
    s.finish(f"series-{s.args.element}", {})
    return EXIT_OK


COMMANDS = {"catalog": cmd_catalog, "check": cmd_check, "hn": cmd_hn, "partition": cmd_partition, "series": cmd_series}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="model configuration (JSON)")
    common.add_argument("--box", help="dimension box: T (total), a,b,c (componentwise) or a,b,c:T")
    common.add_argument("--cache-dir", default=".finhall-cache", help="catalog cache directory")
    common.add_argument("--no-cache", dest="cache_dir", action="store_const", const=None, help="do not use a cache")
    common.add_argument("--seed", type=int, help="seed for randomized checks (default: from config)")
    common.add_argument("--out", default="finhall-out", help="directory for reports and manifests")
    common.add_argument("--skip-weight-validation", action="store_true",
                        help="accept weights violating the stability invariants (negative controls)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="finhall", description="Finite-field Hall algebra checks for quiver models.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", parents=[common], help="enumerate and cache iso classes")
    c = sub.add_parser("check", parents=[common], help="run a check suite")
    c.add_argument("--suite", choices=SUITES + ("all",), default="all")
    sub.add_parser("hn", parents=[common], help="Harder-Narasimhan filtration per object")
    pa = sub.add_parser("partition", parents=[common], help="DT / DT_exc / TP series and defect")
    pa.add_argument("--sign-twist", action="store_true", help="weight the coefficient at (beta, n) by (-1)^n")
    se = sub.add_parser("series", parents=[common], help="integrate one Hall element")
    se.add_argument("--element", choices=ELEMENTS, default="hilb")
    se.add_argument("--sign-twist", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        session = Session(args)
        return COMMANDS[args.command](session)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingGradeError as exc:
        print(f"catalog gap: {exc}; rerun with a larger --box", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except FinhallError as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
