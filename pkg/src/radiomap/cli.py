"""Command-line interface.

One executable, verb subcommands: featurize, baseline, augment, eval,
shift, stub.  Rasters travel as RMG1 grid files, reports as JSON, scatter
stats as CSV.  Exit codes: 0 success, 1 usage error, 2 data error.
Diagnostics go to stderr; data goes to files or stdout.  The only
environment variable read is RADIOMAP_VERBOSE (output verbosity).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import augment as aug
from . import baseline as base
from . import evaluation as ev
from . import features as feat
from . import modelstub as stub
from . import shift as sh
from .core import (
    FORMAT_VERSION,
    GridFileError,
    RadioMap,
    SampleMeta,
    TxConfig,
    building_from_raster,
    building_to_raster,
    read_grid_file,
    read_pattern_file,
    write_grid_file,
)

log = logging.getLogger("radiomap")

_VERSION_LINE = f"radiomap 0.1.0 (grid format {FORMAT_VERSION})"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_tx(args, grid) -> TxConfig:
    pattern = read_pattern_file(args.pattern) if args.pattern else None
    kwargs = dict(
        row=args.tx_row,
        col=args.tx_col,
        freq_mhz=args.freq_mhz,
        orientation_deg=args.orientation_deg,
    )
    if pattern is not None:
        kwargs["pattern"] = pattern
    return TxConfig(**kwargs)


def _stack_from_raster(raster: np.ndarray, normalized: bool) -> feat.FeatureStack:
    names = feat.CHANNEL_ORDER[: raster.shape[0]]
    return feat.FeatureStack(names=names, data=raster.astype(np.float64), normalized=normalized)


def _add_tx_flags(p):
    p.add_argument("--tx-row", type=float, required=True, help="tx row (fractional pixels)")
    p.add_argument("--tx-col", type=float, required=True, help="tx column (fractional pixels)")
    p.add_argument("--freq-mhz", type=float, required=True, help="carrier frequency in MHz")
    p.add_argument("--pattern", help="antenna pattern file (360 lines angle_deg,gain_dbi)")
    p.add_argument(
        "--orientation-deg", type=float, default=0.0, help="antenna orientation (default 0)"
    )


def _cmd_featurize(args) -> None:
    grid = building_from_raster(read_grid_file(args.building))
    tx = _load_tx(args, grid)
    channels = tuple(c.strip() for c in args.channels.split(",") if c.strip())
    stack = feat.build_stack(grid, tx, channels=channels, distance_mode=args.distance_mode)
    if args.normalize:
        stack = feat.normalize(stack)
    if args.pad_resize:
        stack = feat.pad_and_resize(stack, size=args.size, interp=args.interp)
    write_grid_file(stack.data.astype(np.float32), args.output)
    log.info("wrote %s (%d channels)", args.output, stack.data.shape[0])


def _cmd_baseline(args) -> None:
    grid = building_from_raster(read_grid_file(args.building))
    tx = _load_tx(args, grid)
    cfg = base.BaselineConfig(
        clamp_min=args.clamp_min, clamp_max=args.clamp_max, distance_mode=args.distance_mode
    )
    pred = base.predict(grid, tx, cfg)
    write_grid_file(pred.values[None].astype(np.float32), args.output)
    log.info("wrote %s", args.output)


def _cmd_augment(args) -> None:
    stack = _stack_from_raster(read_grid_file(args.stack), normalized=args.normalized)
    target = RadioMap(read_grid_file(args.target)[0])
    partner = None
    if args.partner_stack:
        if not args.partner_target:
            raise _UsageError("--partner-stack requires --partner-target")
        partner = (
            _stack_from_raster(read_grid_file(args.partner_stack), normalized=args.normalized),
            RadioMap(read_grid_file(args.partner_target)[0]),
        )
    cfg = aug.AugmentConfig(
        seed=args.seed,
        mixup_prob=args.mixup_prob,
        crop_prob=args.crop_prob,
        arbitrary_rotation=args.arbitrary_rotation,
        db_domain_resize=args.db_resize,
    )
    out_stack, out_target, trace = aug.apply_pipeline(
        stack, target, cfg, sample_index=args.sample_index, partner=partner
    )
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_grid_file(out_stack.data.astype(np.float32), outdir / "stack.rmg")
    write_grid_file(out_target.values[None].astype(np.float32), outdir / "target.rmg")
    print(json.dumps(asdict(trace)))


def _read_manifest(path) -> list[dict]:
    records = []
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{ln}: bad manifest line: {exc}") from exc
    if not records:
        raise ValueError(f"{path}: empty manifest")
    return records


def _cmd_eval(args) -> None:
    records = _read_manifest(args.manifest)
    metas = [
        SampleMeta(
            building_id=r["building_id"],
            antenna_id=r["antenna_id"],
            freq_mhz=r["freq_mhz"],
            tx_index=r["tx_index"],
            split=r.get("split", "test"),
        )
        for r in records
    ]
    names = [r["target"] for r in records]

    def load_pair(name):
        pred = read_grid_file(Path(args.pred) / name)[0]
        target = read_grid_file(Path(args.target) / name)[0]
        return pred, target

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            pairs = list(pool.map(load_pair, names))
    else:
        pairs = [load_pair(n) for n in names]
    preds = [p for p, _ in pairs]
    targets = [t for _, t in pairs]

    if args.group_by:
        if args.task is None:
            raise _UsageError("--group-by requires --task to derive seen/unseen axes")
        split = ev.make_split(args.task)
        group_by = tuple(g.strip() for g in args.group_by.split(","))
        report = ev.grouped_report(preds, targets, metas, split, group_by=group_by)
    else:
        per_map = [ev.per_map_rmse(p, t) for p, t in zip(preds, targets)]
        report = ev.EvalReport(
            per_map=tuple(zip(metas, per_map)),
            micro_rmse=ev.rmse_micro(preds, targets),
            macro_rmse=ev.rmse_macro(preds, targets),
            groups=(),
        )
    print(report.to_table())
    if args.mode == "micro":
        print(f"RMSE ({args.mode}): {report.micro_rmse:.6f}")
    else:
        print(f"RMSE ({args.mode}): {report.macro_rmse:.6f}")
    if args.json:
        Path(args.json).write_text(report.to_json(), encoding="utf-8")
        log.info("wrote %s", args.json)


def _cmd_shift_stats(args) -> None:
    paths = sorted(Path(args.dataset).glob("*.rmg"))
    if not paths:
        raise ValueError(f"no .rmg files in {args.dataset}")
    grids = [building_from_raster(read_grid_file(p)) for p in paths]
    rows = sh.dataset_scatter(grids, labels=[p.stem for p in paths])
    sh.scatter_to_csv(rows, args.csv)
    for label, s in rows:
        mt = "-" if s.mean_wall_transmittance is None else f"{s.mean_wall_transmittance:.3f}"
        mr = "-" if s.mean_wall_reflectance is None else f"{s.mean_wall_reflectance:.3f}"
        print(f"{label:<24}density={s.wall_density:.4f}  trans={mt}  refl={mr}")
    log.info("wrote %s", args.csv)


def _cmd_shift_crops(args) -> None:
    grid = building_from_raster(read_grid_file(args.building))
    crops = sh.generate_crops(
        grid,
        window=args.window,
        stride=args.stride,
        min_density=args.min_density,
        max_crops=args.max_crops,
    )
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    for i, crop in enumerate(crops):
        write_grid_file(building_to_raster(crop), outdir / f"crop_{i:02d}.rmg")
    print(f"wrote {len(crops)} crops to {outdir}")
    print(
        "note: pathloss inside a crop depends on building structure outside it; "
        "crops carry inputs only and are not re-simulated",
        file=sys.stderr,
    )


def _cmd_stub_forward(args) -> None:
    raster = read_grid_file(args.input)
    stack = _stack_from_raster(raster, normalized=True)
    if args.weights:
        weights = stub.load_weights(args.weights)
    else:
        weights = stub.StubWeights.init(args.task, args.seed)
    pred = stub.forward(stack, weights, args.task)
    write_grid_file(pred.values[None].astype(np.float32), args.output)
    log.info("wrote %s", args.output)


def _build_parser() -> _Parser:
    parser = _Parser(prog="radiomap", description=__doc__)
    parser.add_argument("--version", action="version", version=_VERSION_LINE)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="build feature channels for one building/tx")
    p.add_argument("--building", required=True, help="2-channel building grid file")
    _add_tx_flags(p)
    p.add_argument(
        "--channels",
        default="reflectance,transmittance,distance",
        help="comma list from: %s" % ",".join(feat.CHANNEL_ORDER),
    )
    p.add_argument("--distance-mode", choices=("planar", "slant"), default="planar")
    p.add_argument("--normalize", action="store_true", help="apply the divisor table")
    p.add_argument("--pad-resize", action="store_true", help="pad square and resize")
    p.add_argument("--size", type=int, default=feat.MODEL_SIZE)
    p.add_argument("--interp", choices=("bilinear", "nearest"), default="bilinear")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("baseline", help="physics predictor: FSPL + gain + wall losses")
    p.add_argument("--building", required=True)
    _add_tx_flags(p)
    p.add_argument("--clamp-min", type=float, default=0.0)
    p.add_argument("--clamp-max", type=float, default=160.0)
    p.add_argument("--distance-mode", choices=("planar", "slant"), default="slant")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("augment", help="seeded augmentation pipeline on a stack/target pair")
    p.add_argument("--stack", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--partner-stack", help="mixup partner stack")
    p.add_argument("--partner-target", help="mixup partner target")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sample-index", type=int, default=0)
    p.add_argument("--mixup-prob", type=float, default=0.75)
    p.add_argument("--crop-prob", type=float, default=0.75)
    p.add_argument("--arbitrary-rotation", action="store_true")
    p.add_argument("--db-resize", action="store_true", help="resize targets in linear scale")
    p.add_argument("--normalized", action="store_true", help="mark inputs as normalized")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("eval", help="RMSE report from prediction/target directories")
    p.add_argument("--pred", required=True, help="directory of prediction .rmg files")
    p.add_argument("--target", required=True, help="directory of target .rmg files")
    p.add_argument("--manifest", required=True, help="JSONL manifest of samples")
    p.add_argument("--mode", choices=("macro", "micro"), default="macro")
    p.add_argument("--task", type=int, choices=(1, 2, 3), help="task for seen/unseen grouping")
    p.add_argument("--group-by", help="comma list of axes: building,freq,antenna")
    p.add_argument("--jobs", type=int, default=1, help="parallel map loading")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("shift", help="distribution-shift statistics and crops")
    shift_sub = p.add_subparsers(dest="shift_command", required=True)
    ps = shift_sub.add_parser("stats", help="wall density and material means per building")
    ps.add_argument("--dataset", required=True, help="directory of building .rmg files")
    ps.add_argument("--csv", required=True)
    ps.set_defaults(func=_cmd_shift_stats)
    pc = shift_sub.add_parser("crops", help="extract dense-wall crops")
    pc.add_argument("--building", required=True)
    pc.add_argument("--window", type=int, required=True)
    pc.add_argument("--stride", type=int, default=1)
    pc.add_argument("--min-density", type=float, default=0.0)
    pc.add_argument("--max-crops", type=int, default=8)
    pc.add_argument("-o", "--output", required=True, help="output directory")
    pc.set_defaults(func=_cmd_shift_crops)

    p = sub.add_parser("stub", help="forward-only model stub")
    stub_sub = p.add_subparsers(dest="stub_command", required=True)
    pf = stub_sub.add_parser("forward", help="run the stub on a normalized 518x518 stack")
    pf.add_argument("--in", dest="input", required=True, help="input stack .rmg")
    pf.add_argument("--task", type=int, choices=(1, 2, 3), required=True)
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--weights", help="weights directory with manifest.json")
    pf.add_argument("-o", "--output", required=True)
    pf.set_defaults(func=_cmd_stub_forward)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if os.environ.get("RADIOMAP_VERBOSE") else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (GridFileError, OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
