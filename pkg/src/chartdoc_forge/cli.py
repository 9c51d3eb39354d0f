"""Command-line entry point: ``chartdoc-forge <command> ...``.

Exit status 0 on success, 1 on validation or usage errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import DocumentError, ForgeError, ValidationError

log = logging.getLogger("chartdoc_forge")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI got {text!r}") from None
    return lo, hi


def _ratios(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected TRAIN,VAL,TEST got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three ratios")
    return parts


def _weights(text: str) -> dict:
    out = {}
    for part in text.split(","):
        name, _, w = part.partition("=")
        try:
            out[name.strip()] = float(w)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected family=weight, got {part!r}") from None
    return out


# flag name -> (config field, argparse type, help)
_GEN_FLAGS = {
    "doc-count": ("doc_count", int, "number of documents"),
    "split-ratios": ("split_ratios", _ratios, "TRAIN,VAL,TEST fractions"),
    "questions-per-chart": ("questions_per_chart", _range, "LO,HI questions per chart"),
    "family-weights": ("family_weights", _weights, "bar=W,line=W,... family proportions"),
    "entities": ("entities", _range, "LO,HI entities per chart"),
    "legends": ("legends", _range, "LO,HI series per chart"),
    "parents": ("parents", _range, "LO,HI parent classes per random table"),
    "children": ("children", _range, "LO,HI children per parent class"),
    "box-points": ("box_points", int, "observations per box-plot entity"),
    "random-prob": ("random_prob", float, "probability of a random table"),
    "max-attempts": ("max_attempts", int, "debias re-sampling attempts per question"),
    "epoch": ("epoch", str, "chart-id clock start (ISO time)"),
    "machine": ("machine", str, "one-letter machine id in chart ids"),
    "edges": ("edges", str, "hypernym edge file"),
    "registry": ("registry", str, "question template registry"),
    "pool": ("pool", str, "directory of real-world CSV tables"),
    "images": ("images", str, "directory of page pictures"),
    "colors": ("colors", str, "color catalog CSV"),
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chartdoc-forge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("build-hierarchy", help="prune a hypernym DAG into an entity tree")
    s.add_argument("--edges", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("generate", help="generate a dataset directory")
    s.add_argument("--config", help="JSON config file; flags override its fields")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--force", action="store_true", help="allow a non-empty --out")
    for flag, (_, typ, help_) in _GEN_FLAGS.items():
        s.add_argument(f"--{flag}", type=typ, help=help_)

    s = sub.add_parser("debias", help="rebalance yes/no answers of a dataset in place")
    s.add_argument("--dataset", required=True)

    s = sub.add_parser("stats", help="print corpus statistics as JSON")
    s.add_argument("--dataset", required=True)

    s = sub.add_parser("render-chart", help="render a chart spec JSON to SVG")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("evaluate", help="score a predictions file")
    s.add_argument("--dataset", required=True)
    s.add_argument("--preds", required=True)
    s.add_argument("--report", required=True)
    return p


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"no such file: {path}")
    return p


def _cmd_build_hierarchy(args) -> None:
    from .hierarchy import build_hierarchy, dumps, load_edges

    h = build_hierarchy(load_edges(_require_file(args.edges)))
    Path(args.out).write_text(dumps(h), encoding="utf-8")
    log.info("wrote %d nodes to %s", len(h.nodes), args.out)


def _cmd_generate(args) -> None:
    from .pipeline import GenConfig, generate

    data = _read_json(args.config) if args.config else {}
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    for flag, (name, _, _) in _GEN_FLAGS.items():
        value = getattr(args, flag.replace("-", "_"))
        if value is not None:
            data[name] = value
    data["master_seed"] = args.seed
    cfg = GenConfig.from_dict(data)
    for name in ("edges", "registry", "colors"):
        if getattr(cfg, name):
            _require_file(getattr(cfg, name))
    for name in ("pool", "images"):
        if getattr(cfg, name) and not Path(getattr(cfg, name)).is_dir():
            raise ValidationError(f"no such directory: {getattr(cfg, name)}")
    if args.jobs < 1:
        raise ValidationError("--jobs must be >= 1")
    out = Path(args.out)
    if out.exists() and (not out.is_dir() or any(out.iterdir())) and not args.force:
        raise ValidationError(f"{out} is not empty; pass --force to overwrite")
    if out.is_dir() and args.force:
        import shutil
        shutil.rmtree(out)
    manifest = generate(cfg, out, jobs=args.jobs)
    log.info("generated %s", manifest["counts"])


def _cmd_debias(args) -> None:
    from .pipeline import debias_dataset

    report = debias_dataset(args.dataset)
    log.info("applied %d mutations; yes share %.4f -> %.4f", report["mutations_applied"],
             report["yes_share_before"], report["yes_share_after"])


def _cmd_stats(args) -> None:
    from .pipeline import stats

    sys.stdout.write(json.dumps(stats(args.dataset), indent=1, sort_keys=True) + "\n")


def _cmd_render_chart(args) -> None:
    from .charts import ChartSpec, box_stats, check_compatible
    from .render import render

    data = _read_json(args.spec)
    try:
        spec = ChartSpec.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad chart spec: {exc!r}") from None
    check_compatible(spec.table, spec.subtype)
    if spec.subtype.family == "box" and "box_stats" not in spec.extras:
        spec.extras["box_stats"] = {e: box_stats(spec.table.column(j))
                                    for j, e in enumerate(spec.table.entity_names)}
    Path(args.out).write_text(render(spec).to_string(), encoding="utf-8")


def _cmd_evaluate(args) -> None:
    from .evaluate import evaluate, parse_predictions
    from .pipeline import read_questions, verify_manifest

    preds_path = _require_file(args.preds)
    verify_manifest(args.dataset)
    with open(preds_path, encoding="utf-8") as fh:
        preds = parse_predictions(fh)
    report = evaluate(preds, read_questions(Path(args.dataset)))
    Path(args.report).write_text(report.to_json(), encoding="utf-8")
    sys.stderr.write(report.to_text())


COMMANDS = {
    "build-hierarchy": _cmd_build_hierarchy,
    "generate": _cmd_generate,
    "debias": _cmd_debias,
    "stats": _cmd_stats,
    "render-chart": _cmd_render_chart,
    "evaluate": _cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("CHARTDOC_FORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc.cause, ValidationError) else 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
