"""Batch-oriented command line front end.

Subcommands: ``segment`` one image, ``batch`` a directory, ``evaluate``
proposed against reference edges, ``phantom`` generation, and ``bench``
for the runtime-scaling measurement. Exit code 0 means the run completed
(recorded per-image failures included); 2 is reserved for usage and I/O
errors. All report content except the ``timing_ms`` fields is a pure
function of inputs, config, and seed.
"""

import argparse
import concurrent.futures
import json
import math
import os
import statistics
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .edge_detect import SegmentationConfig, SegmentationResult, segment
from .image_io import (
    EdgeCsvParseError,
    GrayImage,
    PgmParseError,
    mirror_image,
    read_edge_csv,
    read_pgm,
    write_edge_csv,
    write_pgm,
)
from .metrics import BIN_LABELS, aggregate, classify_bin, fp_fn
from .phantom import PhantomSpec, generate_phantom


class CliError(Exception):
    """Usage or I/O problem; maps to exit code 2."""


@dataclass(frozen=True)
class RunOptions:
    """Resolved run-level settings (defaults < config file < flags)."""

    jobs: int = 1
    out: str = "."
    report: str = "json"
    overlay: bool = False


_PIPELINE_TYPES = {
    "alpha": float,
    "beta_min": float,
    "beta_max": float,
    "beta_step": float,
    "edge_offset": int,
    "min_edge_rows": int,
    "bspline_ctrl_divisor": int,
    "mu_mode": str,
    "connectivity": int,
    "orientation": str,
}
_RUN_KEYS = ("jobs", "out", "report", "overlay")


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config_file(path: str) -> dict[str, str]:
    """Flat INI-style key = value file; # and ; start comments."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read config file: {e}") from e
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _PIPELINE_TYPES and key not in _RUN_KEYS:
            raise CliError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = val.strip()
    return values


def _resolve(ns: argparse.Namespace) -> tuple[SegmentationConfig, RunOptions]:
    """Merge defaults < config file < explicit flags."""
    file_vals = load_config_file(ns.config) if getattr(ns, "config", None) else {}

    kwargs = {}
    for key, typ in _PIPELINE_TYPES.items():
        flag = getattr(ns, key, None)
        if flag is not None:
            kwargs[key] = flag
        elif key in file_vals:
            try:
                kwargs[key] = typ(file_vals[key])
            except ValueError as e:
                raise CliError(f"config key {key}: {e}") from e
    cfg = SegmentationConfig(**kwargs)
    try:
        cfg.validate()
    except ValueError as e:
        raise CliError(str(e)) from e

    jobs = getattr(ns, "jobs", None)
    try:
        if jobs is None and "jobs" in file_vals:
            jobs = int(file_vals["jobs"])
        if jobs is None and os.environ.get("AEPM_JOBS"):
            jobs = int(os.environ["AEPM_JOBS"])
    except ValueError as e:
        raise CliError(f"jobs: {e}") from e
    jobs = 1 if jobs is None else jobs
    if jobs < 1:
        raise CliError("jobs must be >= 1")

    overlay = getattr(ns, "overlay", None)
    if overlay is None and "overlay" in file_vals:
        try:
            overlay = _parse_bool(file_vals["overlay"])
        except ValueError as e:
            raise CliError(f"overlay: {e}") from e
    overlay = bool(overlay)

    run = RunOptions(
        jobs=jobs,
        out=getattr(ns, "out", None) or file_vals.get("out") or ".",
        report=getattr(ns, "report", None) or file_vals.get("report") or "json",
        overlay=overlay,
    )
    if run.report not in ("json", "csv"):
        raise CliError(f"unknown report format {run.report!r}")
    return cfg, run


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _score_entry(beta: float, score: float):
    return [beta, None if math.isinf(score) else score]


def _result_meta(stem: str, res: SegmentationResult, timing_ms: float) -> dict:
    d = res.diagnostics
    return {
        "image": stem,
        "beta_hat": res.beta_hat,
        "threshold": d.threshold,
        "threshold_fallback": d.threshold_fallback,
        "was_flipped": d.was_flipped,
        "objects_removed": d.objects_removed,
        "mu": d.mu,
        "failure": d.failure,
        "degenerate_betas": d.degenerate_betas,
        "edge_rows": len(res.edge),
        "per_beta_scores": [_score_entry(b, s) for b, s in res.per_beta_scores],
        "timing_ms": timing_ms,
    }


def _write_artifacts(out_dir: Path, stem: str, img: GrayImage,
                     res: SegmentationResult, overlay: bool) -> None:
    (out_dir / f"{stem}.seg.pgm").write_bytes(write_pgm(res.segmented))
    mask_img = GrayImage._wrap(res.muscle_mask.bits.astype(np.float64), 255)
    (out_dir / f"{stem}.mask.pgm").write_bytes(write_pgm(mask_img))
    (out_dir / f"{stem}.edge.csv").write_bytes(write_edge_csv(res.edge))
    if overlay:
        base = mirror_image(img) if res.diagnostics.was_flipped else img
        px = base.pixels.copy()
        for i, x in enumerate(res.edge.xs):
            col = int(np.floor(x + 0.5)) - 1
            px[i, min(max(col, 0), base.width - 1)] = 1.0
        (out_dir / f"{stem}.overlay.pgm").write_bytes(write_pgm(GrayImage._wrap(px, 255)))


def _segment_file(path: Path, cfg: SegmentationConfig, out_dir: Path,
                  overlay: bool) -> dict:
    """Segment one image and write its artifacts; errors become a record."""
    stem = path.name.removesuffix(".pgm")
    try:
        img = read_pgm(path.read_bytes())
        t0 = time.perf_counter()
        res = segment(img, cfg)
        timing_ms = (time.perf_counter() - t0) * 1e3
        _write_artifacts(out_dir, stem, img, res, overlay)
        meta = _result_meta(stem, res, timing_ms)
    except (OSError, ValueError) as e:
        return {"image": stem, "error": str(e)}
    (out_dir / f"{stem}.meta.json").write_text(_json_dumps(meta), encoding="utf-8")
    return meta


def _ensure_out_dir(run: RunOptions) -> Path:
    out_dir = Path(run.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".aepm-write-probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as e:
        raise CliError(f"output directory not writable: {e}") from e
    return out_dir


def cmd_segment(ns: argparse.Namespace) -> int:
    cfg, run = _resolve(ns)
    out_dir = _ensure_out_dir(run)
    path = Path(ns.image)
    stem = path.name.removesuffix(".pgm")
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CliError(f"cannot read input: {e}") from e
    try:
        img = read_pgm(data)
    except PgmParseError as e:
        raise CliError(f"{path}: {e}") from e

    t0 = time.perf_counter()
    try:
        res = segment(img, cfg)
    except ValueError as e:
        raise CliError(f"{path}: {e}") from e
    timing_ms = (time.perf_counter() - t0) * 1e3

    try:
        _write_artifacts(out_dir, stem, img, res, run.overlay)
        meta = _result_meta(stem, res, timing_ms)
        (out_dir / f"{stem}.meta.json").write_text(_json_dumps(meta), encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot write outputs: {e}") from e

    if res.diagnostics.failure:
        print(f"{stem}: no usable edge found (failure recorded)", file=sys.stderr)
    else:
        print(f"{stem}: beta_hat={res.beta_hat:g} edge_rows={len(res.edge)}")
    return 0


def _batch_worker(args: tuple) -> dict:
    path_str, cfg_kwargs, out_str, overlay = args
    cfg = SegmentationConfig(**cfg_kwargs)
    return _segment_file(Path(path_str), cfg, Path(out_str), overlay)


def cmd_batch(ns: argparse.Namespace) -> int:
    cfg, run = _resolve(ns)
    out_dir = _ensure_out_dir(run)
    in_dir = Path(ns.directory)
    if not in_dir.is_dir():
        raise CliError(f"not a directory: {in_dir}")
    paths = sorted(in_dir.glob("*.pgm"))
    if not paths:
        raise CliError(f"no .pgm files in {in_dir}")

    t0 = time.perf_counter()
    tasks = [(str(p), asdict(cfg), str(out_dir), run.overlay) for p in paths]
    if run.jobs == 1:
        entries = [_batch_worker(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=run.jobs) as pool:
            entries = list(pool.map(_batch_worker, tasks))
    entries.sort(key=lambda e: e["image"])
    wall_ms = (time.perf_counter() - t0) * 1e3

    n_failed = sum(1 for e in entries if e.get("error") or e.get("failure"))
    report = {
        "backend": kernels.backend_name(),
        "config": asdict(cfg),
        "n_images": len(entries),
        "n_failed": n_failed,
        "images": entries,
        "timing_ms": wall_ms,
    }
    report_path = out_dir / "batch_report.json"
    report_path.write_text(_json_dumps(report), encoding="utf-8")
    if run.report == "csv":
        rows = ["image,beta_hat,threshold,failure,error"]
        for e in entries:
            rows.append("{},{},{},{},{}".format(
                e["image"],
                "" if e.get("beta_hat") is None else f"{e['beta_hat']:g}",
                "" if e.get("threshold") is None else f"{e['threshold']:.9f}",
                str(bool(e.get("failure"))).lower(),
                e.get("error", ""),
            ))
        (out_dir / "batch_report.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"batch: {len(entries)} images, {n_failed} failed/flagged -> {report_path}")
    return 0


def _edge_stem(path: Path) -> str:
    name = path.name
    name = name.removesuffix(".edge.csv") if name.endswith(".edge.csv") else name.removesuffix(".csv")
    return name


def _edge_files(directory: Path) -> dict[str, Path]:
    """Edge CSVs by stem; prefers *.edge.csv so report CSVs are not picked up."""
    edged = list(directory.glob("*.edge.csv"))
    paths = edged if edged else list(directory.glob("*.csv"))
    return {_edge_stem(p): p for p in paths}


def _load_flags(meta_path: Path) -> tuple[float | None, str]:
    if not meta_path.is_file():
        return None, ""
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None, ""
    flags = [k for k in ("failure", "threshold_fallback", "was_flipped") if meta.get(k)]
    return meta.get("beta_hat"), ";".join(flags)


def cmd_evaluate(ns: argparse.Namespace) -> int:
    _, run = _resolve(ns)
    out_dir = _ensure_out_dir(run)
    pro_dir, ref_dir = Path(ns.proposed), Path(ns.reference)
    for d in (pro_dir, ref_dir):
        if not d.is_dir():
            raise CliError(f"not a directory: {d}")
    pro = _edge_files(pro_dir)
    ref = _edge_files(ref_dir)
    common = sorted(set(pro) & set(ref))
    for stem in sorted(set(pro) ^ set(ref)):
        side = "reference" if stem in pro else "proposed"
        print(f"warning: {stem}: no matching {side} edge, skipped", file=sys.stderr)
    if not common:
        raise CliError("no comparable pairs")

    per_image = []
    errors = []
    for stem in common:
        try:
            e_pro = read_edge_csv(pro[stem].read_bytes())
            e_ref = read_edge_csv(ref[stem].read_bytes())
        except (OSError, EdgeCsvParseError) as e:
            raise CliError(f"{stem}: {e}") from e
        try:
            err = fp_fn(e_pro, e_ref)
        except ValueError as e:
            raise CliError(f"{stem}: {e}") from e
        errors.append(err)
        beta_hat, flags = _load_flags(pro_dir / f"{stem}.meta.json")
        per_image.append({
            "id": stem,
            "fp": err.fp,
            "fn": err.fn_,
            "bin": classify_bin(err.fp, err.fn_),
            "area": err.area,
            "rows_compared": err.rows_compared,
            "beta_hat": beta_hat,
            "flags": flags,
        })

    report = aggregate(errors)
    payload = {
        "n_images": report.n_images,
        "fp_mean": report.fp_mean,
        "fn_mean": report.fn_mean,
        "bins": {BIN_LABELS[i]: report.bins[i] for i in range(6)},
        "per_image": per_image,
    }
    (out_dir / "evaluation_report.json").write_text(_json_dumps(payload), encoding="utf-8")
    if run.report == "csv":
        rows = ["id,fp,fn,bin,beta_hat,flags"]
        for e in per_image:
            beta = "" if e["beta_hat"] is None else f"{e['beta_hat']:g}"
            rows.append(f"{e['id']},{e['fp']:.9f},{e['fn']:.9f},{e['bin']},{beta},{e['flags']}")
        (out_dir / "evaluation_report.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    print(f"images evaluated: {report.n_images}")
    print(f"FP mean: {report.fp_mean:.4f}")
    print(f"FN mean: {report.fn_mean:.4f}")
    for label, count in zip(BIN_LABELS, report.bins):
        print(f"  {label:<45} {count}")
    return 0


def cmd_phantom(ns: argparse.Namespace) -> int:
    try:
        spec = PhantomSpec(
            size=ns.size,
            muscle_intensity=ns.muscle_intensity,
            tissue_intensity=ns.tissue_intensity,
            muscle_base_width=ns.muscle_base_width,
            muscle_height=ns.muscle_height,
            edge_curvature=ns.edge_curvature,
            noise_sigma=ns.noise,
            n_labels=ns.labels,
            seed=ns.seed,
        )
        img, truth = generate_phantom(spec)
    except ValueError as e:
        raise CliError(str(e)) from e
    try:
        Path(ns.output).write_bytes(write_pgm(img))
        if ns.truth_out:
            Path(ns.truth_out).write_bytes(write_edge_csv(truth))
    except OSError as e:
        raise CliError(f"cannot write phantom: {e}") from e
    print(f"phantom: {ns.size}x{ns.size} seed={ns.seed} -> {ns.output}")
    return 0


def cmd_bench(ns: argparse.Namespace) -> int:
    cfg, run = _resolve(ns)
    if ns.reps < 3:
        raise CliError("bench needs at least 3 repetitions")
    try:
        sizes = [int(s) for s in ns.sizes.split(",") if s]
    except ValueError as e:
        raise CliError(f"bad sizes list: {e}") from e
    if not sizes:
        raise CliError("empty sizes list")

    previous = kernels.backend_name()
    if ns.backend != "auto":
        try:
            kernels.set_backend(ns.backend)
        except RuntimeError as e:
            raise CliError(str(e)) from e
    try:
        results = _run_bench(sizes, ns.reps, cfg)
    finally:
        kernels.set_backend(previous)

    print(f"backend: {ns.backend if ns.backend != 'auto' else previous}")
    print(f"{'size':>6} {'median_ms':>12} {'q1_ms':>10} {'q3_ms':>10}")
    for r in results["sizes"]:
        print(f"{r['size']:>6} {r['median_ms']:>12.2f} {r['q1_ms']:>10.2f} {r['q3_ms']:>10.2f}")
    if results["slope"] is not None:
        print(f"log-log slope: {results['slope']:.3f}")
    else:
        print("log-log slope: n/a (single size)")

    if ns.out:
        out_dir = _ensure_out_dir(run)
        (out_dir / "bench_report.json").write_text(_json_dumps(results), encoding="utf-8")
    return 0


def _run_bench(sizes: list[int], reps: int, cfg: SegmentationConfig) -> dict:
    rows = []
    for size in sizes:
        img, _ = generate_phantom(PhantomSpec(size=size, seed=1000 + size))
        segment(img, cfg)  # warm LUT and spline caches
        times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            segment(img, cfg)
            times.append((time.perf_counter() - t0) * 1e3)
        times.sort()
        q1, med, q3 = statistics.quantiles(times, n=4, method="inclusive")
        rows.append({"size": size, "median_ms": med, "q1_ms": q1, "q3_ms": q3,
                     "times_ms": times})
    slope = None
    if len(sizes) >= 2:
        logs = np.log([r["size"] for r in rows])
        logt = np.log([r["median_ms"] for r in rows])
        slope = float(np.polyfit(logs, logt, 1)[0])
    return {"backend": kernels.backend_name(), "reps": reps,
            "sizes": rows, "slope": slope}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file; flags win")
    common.add_argument("--jobs", type=int, help="parallel workers (env AEPM_JOBS)")
    common.add_argument("--out", help="output directory (default .)")
    common.add_argument("--report", choices=["json", "csv"], help="report format")

    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--alpha", type=float, help="first Beta parameter (default 5)")
    pipe.add_argument("--beta-min", type=float, help="grid start (default 2)")
    pipe.add_argument("--beta-max", type=float, help="grid end (default 6)")
    pipe.add_argument("--beta-step", type=float, help="grid step (default 0.1)")
    pipe.add_argument("--edge-offset", type=int, help="contrast sample offset (default 2)")
    pipe.add_argument("--min-edge-rows", type=int, help="shortest usable edge (default 10)")
    pipe.add_argument("--bspline-ctrl-divisor", type=int,
                      help="rows per spline control point (default 64)")
    pipe.add_argument("--mu-mode", choices=["clean", "per_beta"],
                      help="where the nonzero mean is computed")
    pipe.add_argument("--connectivity", type=int, choices=[4, 8],
                      help="component connectivity (default 8)")
    pipe.add_argument("--orientation", choices=["auto", "keep", "flip"],
                      help="orientation handling (default auto)")
    pipe.add_argument("--overlay", action=argparse.BooleanOptionalAction,
                      help="also write an edge overlay image")

    parser = argparse.ArgumentParser(prog="aepm",
                                     description="Pectoral muscle elimination pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[common, pipe], help="segment a single PGM")
    p.add_argument("image")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("batch", parents=[common, pipe], help="segment a directory of PGMs")
    p.add_argument("directory")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("evaluate", parents=[common],
                       help="compare proposed edges against reference edges")
    p.add_argument("--proposed", required=True, help="directory of proposed edge CSVs")
    p.add_argument("--reference", required=True, help="directory of reference edge CSVs")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("phantom", parents=[common], help="generate a synthetic phantom")
    p.add_argument("--size", type=int, default=1024)
    p.add_argument("--muscle-intensity", type=float, default=0.85)
    p.add_argument("--tissue-intensity", type=float, default=0.45)
    p.add_argument("--muscle-base-width", type=float, default=0.45)
    p.add_argument("--muscle-height", type=float, default=0.55)
    p.add_argument("--edge-curvature", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--labels", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output PGM path")
    p.add_argument("--truth-out", help="ground-truth edge CSV path")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("bench", parents=[common, pipe],
                       help="measure runtime scaling over phantom sizes")
    p.add_argument("--sizes", default="128,256,512,1024",
                   help="comma-separated square sizes")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--backend", choices=["auto", "compiled", "fallback"], default="auto",
                   help="kernel backend to time")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except CliError as e:
        print(f"aepm: {e}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
