"""Command-line front end: ``mrsim build|compare|timeseries|gen-synthetic``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .field import DatasetError, load_dataset, save_dataset
from .matching import compare, mpair_json
from .mdrg import build_mdrg
from .mrs import InvariantError, MrsStructure, build_mrs, verify_nesting
from .similarity import PRESETS, Weights, parse_weights
from . import synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    levels: tuple[int, ...] = (3,)
    weights: str | None = None
    mode: str = "fragment"
    symmetrize: bool = False
    inputs: list[Path] = field(default_factory=list)
    out: Path | None = None
    format: str = "json"

    def __post_init__(self):
        if not self.levels or min(self.levels) < 1:
            raise UsageError(f"--levels must be >= 1, got {self.levels}")
        if self.weights is not None:
            try:
                parse_weights(self.weights)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc

    @property
    def weight_sets(self) -> list[tuple[str, Weights]]:
        if self.weights is None:
            return list(PRESETS.items())
        return [(self.weights, parse_weights(self.weights))]


def _threads() -> int:
    raw = os.environ.get("MRS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    """Ordered map, parallel up to ``MRS_THREADS`` workers."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _build(path: Path, n_levels: int, mode: str) -> MrsStructure:
    mrs = build_mrs(load_dataset(path), n_levels, mode)
    report = verify_nesting(mrs)
    if not report.ok:
        raise InvariantError("; ".join(report.failures[:5]))
    return mrs


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _out_dir(cfg: RunConfig) -> Path:
    out = cfg.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_build(cfg: RunConfig) -> int:
    if len(cfg.inputs) != 1:
        raise UsageError("build takes exactly one input")
    mrs = _build(cfg.inputs[0], max(cfg.levels), cfg.mode)
    out = _out_dir(cfg)
    (out / "mrs.json").write_text(mrs.to_json() + "\n")
    for k, jcn in enumerate(mrs.jcns):
        (out / f"jcn_{k}.json").write_text(jcn.to_json() + "\n")
        (out / f"jcn_{k}.dot").write_text(jcn.to_dot())
        (out / f"mdrg_{k}.json").write_text(build_mdrg(jcn).to_json() + "\n")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    if len(cfg.inputs) != 2:
        raise UsageError("compare takes exactly two inputs")
    f, g = (load_dataset(p) for p in cfg.inputs)
    if f.n_fields != g.n_fields:
        raise DatasetError(f"field counts differ: {f.n_fields} vs {g.n_fields}")
    n = max(cfg.levels)
    mrs_f, mrs_g = _parallel_map(lambda d: build_mrs(d, n, cfg.mode), [f, g])
    weights = parse_weights(cfg.weights or "equal")
    report = compare(mrs_f, mrs_g, weights, cfg.symmetrize)
    out = _out_dir(cfg)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "mpair.json").write_text(mpair_json(report) + "\n")
    if cfg.format == "csv":
        (out / "report.csv").write_text("\n".join(report.csv_rows()) + "\n")
    print(f"{report.phi_bar:.9f}")
    return EXIT_OK


def timeseries_rows(mrss: list[MrsStructure], cfg: RunConfig) -> list[tuple[int, int, str, float]]:
    rows = []
    for t in range(len(mrss) - 1):
        for n in cfg.levels:
            a, b = mrss[t].truncated(n), mrss[t + 1].truncated(n)
            for name, w in cfg.weight_sets:
                rows.append((t, n, name, compare(a, b, w, cfg.symmetrize).phi_bar))
    return rows


def argmins(rows) -> dict[tuple[int, str], int]:
    """Step of the lowest score per (level count, preset); first step wins ties."""
    best: dict[tuple[int, str], tuple[float, int]] = {}
    for t, n, name, phi in rows:
        key = (n, name)
        if key not in best or phi < best[key][0]:
            best[key] = (phi, t)
    return {k: v[1] for k, v in best.items()}


def cmd_timeseries(cfg: RunConfig) -> int:
    if len(cfg.inputs) < 2:
        raise UsageError("timeseries needs at least two time steps")
    datasets = []
    for t, p in enumerate(cfg.inputs):
        try:
            datasets.append(load_dataset(p))
        except DatasetError as exc:
            raise DatasetError(f"step {t}: {exc}") from exc
    if len({d.n_fields for d in datasets}) > 1:
        raise DatasetError("time steps have differing field counts")
    n = max(cfg.levels)
    mrss = _parallel_map(lambda d: build_mrs(d, n, cfg.mode), datasets)
    rows = timeseries_rows(mrss, cfg)
    mins = argmins(rows)
    out = _out_dir(cfg)
    _write_csv(
        out / "timeseries.csv",
        ["step", "level_count", "weight_preset", "phi_bar"],
        [(t, n, name, f"{phi:.9f}") for t, n, name, phi in rows],
    )
    _write_csv(
        out / "argmin.csv",
        ["level_count", "weight_preset", "argmin_step"],
        [(n, name, t) for (n, name), t in mins.items()],
    )
    if cfg.format == "json":
        payload = {
            "rows": [{"step": t, "level_count": n, "weight_preset": w, "phi_bar": p} for t, n, w, p in rows],
            "argmin": [{"level_count": n, "weight_preset": w, "step": t} for (n, w), t in mins.items()],
        }
        (out / "timeseries.json").write_text(json.dumps(payload, indent=1) + "\n")
    for (n, name), t in mins.items():
        print(f"argmin level_count={n} weight_preset={name} step={t}")
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    dims = tuple(args.dims) if args.dims else None
    fam = args.family
    try:
        if fam == "splitting-blobs":
            series = synthetic.splitting_blobs(args.steps, args.split_step, dims or (16, 16), args.seed)
            for t, ds in enumerate(series):
                save_dataset(ds, out / f"step_{t:03d}.mrsf")
            return EXIT_OK
        if fam == "random-smooth":
            ds = synthetic.random_smooth(dims or (8, 8), args.fields, args.seed)
        elif fam == "ring-height":
            ds = synthetic.ring_height(dims or (16, 16))
        else:
            ds = synthetic.double_torus_height(dims or (24, 24))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    save_dataset(ds, out / f"{fam}.mrsf")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mrsim", description="Multi-resolution Reeb space similarity.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, levels_help):
        sp.add_argument("--levels", default="3", help=levels_help)
        sp.add_argument("--weights", default=None, help="preset name or w1,w2,w3,w4")
        sp.add_argument("--mode", choices=("fragment", "vertex"), default="fragment")
        sp.add_argument("--symmetrize", action="store_true")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
        sp.add_argument("--format", choices=("json", "csv", "dot"), default="json")

    b = sub.add_parser("build", help="export MRS, JCN and MDRG files")
    b.add_argument("input", type=Path)
    common(b, "number of levels N")
    c = sub.add_parser("compare", help="similarity of two datasets")
    c.add_argument("inputs", type=Path, nargs=2)
    common(c, "number of levels N")
    t = sub.add_parser("timeseries", help="scores of consecutive time steps")
    t.add_argument("inputs", type=Path, nargs="+")
    common(t, "level counts, e.g. 3 or 1,2,3,4")
    g = sub.add_parser("gen-synthetic", help="write a synthetic dataset")
    g.add_argument("family", choices=synthetic.FAMILIES)
    g.add_argument("--dims", type=int, nargs="+", default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--fields", type=int, default=2)
    g.add_argument("--steps", type=int, default=10)
    g.add_argument("--split-step", type=int, default=6)
    g.add_argument("--out", type=Path, default=None)
    return p


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        levels = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad --levels {text!r}") from exc
    return tuple(dict.fromkeys(levels))


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "gen-synthetic":
            return cmd_gen_synthetic(args)
        inputs = [args.input] if args.command == "build" else list(args.inputs)
        cfg = RunConfig(
            args.command,
            _parse_levels(args.levels),
            args.weights,
            args.mode,
            args.symmetrize,
            inputs,
            args.out,
            args.format,
        )
        if args.command != "timeseries" and len(cfg.levels) != 1:
            raise UsageError("--levels takes a single N here")
        return {"build": cmd_build, "compare": cmd_compare, "timeseries": cmd_timeseries}[args.command](cfg)
    except UsageError as exc:
        print(f"mrsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DatasetError as exc:
        print(f"mrsim: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantError as exc:
        print(f"mrsim: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"mrsim: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
