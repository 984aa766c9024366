"""Command-line driver: ``qfeature <command> [--config FILE] [options]``."""
import argparse
import json
import os
import sys
from dataclasses import replace
from functools import partial

import numpy as np

from . import bench as benchmod
from . import classify as cl
from . import noisegen as ng
from . import pulsegen as pg
from . import qfs, qsim
from ._parallel import default_workers, parallel_map
from .classify import dataset as ds
from .config import ConfigError, NoiseCfg, dump_config, load_config

SWEEP_DEFAULTS = {
    "pulse-width": [1 / 96, 1 / 48, 1 / 24, 1 / 12, 1 / 6, 1 / 3],
    "interpolation": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
    "energy": [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75],
}


def _simulate_one(item, sim_cfg):
    run_id, spec, model, seed, labels = item
    fld = pg.gaussian_train(spec, sim_cfg.grid)
    res = qsim.ensemble_otilde(sim_cfg, fld, model, seed)
    point = qfs.extract_qfs(qsim.expectation_set(res), res.u_ctrl_final, dict(labels, run_id=run_id, seed=seed))
    return point, res.to_dict()


def _run_points(items, sim_cfg, workers):
    """Simulate every item; output order follows ``run_id``, not scheduling."""
    items = sorted(items, key=lambda it: it[0])
    return parallel_map(partial(_simulate_one, sim_cfg=sim_cfg), items, workers)


def _sim_cfg(cfg, workers):
    threads = max(1, (os.cpu_count() or 1) // max(1, workers))
    return cfg.sim_config(nthreads=threads)


def _out_dir(cfg):
    os.makedirs(cfg.output, exist_ok=True)
    return cfg.output


def _write_meta(cfg, name, extra=None):
    meta = {"command": name, "config_hash": cfg.hash(), "config": cfg.canonical()}
    meta.update(extra or {})
    with open(os.path.join(cfg.output, f"{name}_meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sequence_seed(master, s):
    """Noise master seed for pulse sequence ``s``; shared by every noise model."""
    return ng.derive_seed(master, 2, s)


def cmd_simulate(cfg, args):
    if not cfg.noise:
        raise ConfigError("simulate needs at least one entry under 'noise'")
    grid = cfg.grid.build()
    specs = cfg.pulse.build(grid, cfg.seed)
    items = []
    for i, ncfg in enumerate(cfg.noise):
        for s, spec in enumerate(specs):
            run_id = f"n{i:03d}-p{s:03d}"
            labels = {"noise": ncfg.name, "pulse": f"{cfg.pulse.factory}{s}"}
            items.append((run_id, spec, ncfg.build(), sequence_seed(cfg.seed, s), labels))
    out = _run_points(items, _sim_cfg(cfg, args.workers), args.workers)
    d = _out_dir(cfg)
    points = [p for p, _ in out]
    qfs.write_csv(os.path.join(d, "points.csv"), points, ["run_id", "noise", "pulse", "seed"])
    runs = {p.labels["run_id"]: r for p, r in out}
    with open(os.path.join(d, "runs.json"), "w") as fh:
        json.dump(runs, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _write_meta(cfg, "simulate", {"rows": len(points)})
    print(f"wrote {len(points)} points to {os.path.join(d, 'points.csv')}")
    return 0


def reference_points(cfg, noise_cfgs, workers, spec=None):
    """One point per noise model under the ideal CPMG sequence (shared noise seed)."""
    grid = cfg.grid.build()
    spec = spec or pg.cpmg_ideal(grid)
    items = [
        (f"r{i:03d}", spec, n.build(), sequence_seed(cfg.seed, 0), {"noise": n.name})
        for i, n in enumerate(noise_cfgs)
    ]
    return [p for p, _ in _run_points(items, _sim_cfg(cfg, workers), workers)]


def _write_distances(path, reports):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "d_x", "d_y", "d_z", "total"])
        for r in reports:
            w.writerow([r.label] + [repr(float(v)) for v in (r.d_x, r.d_y, r.d_z, r.total)])


def cmd_classify(cfg, args):
    unknown = qfs.read_csv(args.unknown)
    if not unknown:
        raise ValueError(f"{args.unknown}: no data rows")
    if args.references:
        ref_pts = qfs.read_csv(args.references)
    else:
        if not cfg.references:
            raise ConfigError("classify needs --references or 'references' in the config")
        ref_pts = reference_points(cfg, cfg.references, args.workers)
    refs = [cl.ReferencePoint(p.labels.get("noise", f"ref{i}"), p) for i, p in enumerate(ref_pts)]
    label, reports, tied = cl.nearest_reference(unknown, refs)
    d = _out_dir(cfg)
    _write_distances(os.path.join(d, "distances.csv"), reports)
    for r in reports:
        print(f"{r.label:24} {r.d_x:8.4f} {r.d_y:8.4f} {r.d_z:8.4f} {r.total:8.4f}")
    print(f"closest: {label}" + (" (tie)" if tied else ""))
    _write_meta(cfg, "classify", {"verdict": label, "tie": tied})
    return 0


def _refine_reference(peak, cfg, template, workers):
    n = template.model_copy(update={"peak_bin": float(peak), "family": "1/f+bump", "label": f"{peak:g}"})
    return reference_points(cfg, [n], workers)[0]


def cmd_refine(cfg, args):
    unknown = qfs.read_csv(args.unknown)
    template = cfg.refine.template or NoiseCfg(family="1/f+bump")
    res = cl.refine_peak_search(
        unknown,
        partial(_refine_reference, cfg=cfg, template=template, workers=args.workers),
        cfg.refine.grid,
        cfg.refine.budget,
        cfg.refine.cells,
    )
    report = {
        "estimate": res.estimate,
        "stages": [
            {"grid": st.grid, "best": st.best, "table": [r.as_row() for r in st.reports]}
            for st in res.stages
        ],
    }
    d = _out_dir(cfg)
    with open(os.path.join(d, "refine.json"), "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    for i, st in enumerate(res.stages):
        print(f"stage {i + 1}: " + ", ".join(f"{r.label}={r.total:.4f}" for r in st.reports) + f" -> {st.best:g}")
    print(f"estimate: {res.estimate:g}")
    return 0


def cmd_dataset(cfg, args):
    records = cl.generate_dataset(
        cfg.dataset.ranges(), cfg.dataset.count, cfg.seed, _sim_cfg(cfg, args.workers), args.workers
    )
    d = _out_dir(cfg)
    path = os.path.join(d, "dataset.csv")
    ds.write_csv(path, records)
    _write_meta(cfg, "dataset", {"rows": len(records)})
    print(f"wrote {len(records)} records to {path}")
    return 0


def train_report(records, tcfg, seed):
    report = {}
    for target in tcfg.targets:
        x, y = ds.to_arrays(records, target)
        report[target] = {
            "decision_tree": cl.train_decision_tree((x, y), None, tcfg.folds, seed, tcfg.n_estimators).to_dict(),
            "knn": cl.train_knn((x, y), None, tcfg.k, tcfg.folds, seed).to_dict(),
            "logistic": cl.train_logistic((x, y), None, tcfg.folds, seed, tcfg.l2).to_dict(),
        }
    return report


def cmd_train(cfg, args):
    path = args.data or os.path.join(cfg.output, "dataset.csv")
    records = ds.read_csv(path)
    report = train_report(records, cfg.train, cfg.seed)
    d = _out_dir(cfg)
    with open(os.path.join(d, "train_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{'target':14} {'decision_tree':>14} {'knn':>8} {'logistic':>9}")
    for target, r in report.items():
        print(
            f"{target:14} {r['decision_tree']['accuracy']:14.3f} {r['knn']['accuracy']:8.3f} "
            f"{r['logistic']['accuracy']:9.3f}"
        )
    return 0


def sweep_items(cfg, study, values):
    """(run_id, spec, model, seed, labels) for every sweep value and noise model."""
    if not values:
        raise ValueError("empty sweep list")
    if not cfg.noise:
        raise ConfigError("sweep needs at least one entry under 'noise'")
    grid = cfg.grid.build()
    seed = sequence_seed(cfg.seed, 0)
    ideal = pg.cpmg_ideal(grid)
    items = []
    if study == "interpolation":
        a = cfg.noise[cfg.sweep.mix_from or 0]
        b = cfg.noise[cfg.sweep.mix_to if cfg.sweep.mix_to is not None else min(1, len(cfg.noise) - 1)]
        for j, v in enumerate(values):
            model = ng.MixedModel(a.build(), b.build(), float(v))
            items.append((f"v{j:03d}-n000", ideal, model, seed, {"noise": f"{a.name}->{b.name}", "value": v}))
        return items
    for j, v in enumerate(values):
        for i, n in enumerate(cfg.noise):
            model, spec = n.build(), ideal
            if study == "energy":
                model = replace(model, scale_factor=float(v))
            elif study == "pulse-width":
                spec = pg.ControlPulseSpec(ideal.amplitudes, ideal.centers, float(v), ideal.axis)
            else:
                raise ValueError(f"unknown study {study!r}")
            items.append((f"v{j:03d}-n{i:03d}", spec, model, seed, {"noise": n.name, "value": v}))
    return items


def cmd_sweep(cfg, args):
    study = args.study or cfg.sweep.study
    values = cfg.sweep.values if cfg.sweep.values is not None else SWEEP_DEFAULTS[study]
    items = sweep_items(cfg, study, values)
    out = _run_points(items, _sim_cfg(cfg, args.workers), args.workers)
    points = [p for p, _ in out]
    for p in points:
        p.labels["study"] = study
    d = _out_dir(cfg)
    qfs.write_csv(os.path.join(d, "sweep.csv"), points, ["run_id", "study", "noise", "value", "seed"])
    _write_meta(cfg, "sweep", {"study": study, "rows": len(points)})
    for p in points:
        print(f"{p.labels['noise']:20} {p.labels['value']!s:>10} |q| = {np.linalg.norm(p.features):.6f}")
    return 0


def cmd_bench(cfg, args):
    rows, meta = benchmod.run_bench(
        cfg.grid.num_steps, cfg.realisations, args.workers or 0, args.repeats
    )
    print(benchmod.format_table(rows, meta))
    d = _out_dir(cfg)
    with open(os.path.join(d, "bench.json"), "w") as fh:
        json.dump({"rows": rows, "meta": meta}, fh, indent=2)
        fh.write("\n")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "refine": cmd_refine,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--workers", type=int, default=None, help="worker processes (default: all CPUs)")
    common.add_argument("--precision", choices=["double", "single"], help="arithmetic precision")
    parser = argparse.ArgumentParser(prog="qfeature", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate QFS points for the configured noise models")
    p = sub.add_parser("classify", parents=[common], help="rank references by distance to an unknown cluster")
    p.add_argument("--unknown", required=True, help="CSV of unknown QFS points")
    p.add_argument("--references", help="CSV of reference points (else simulated from the config)")
    p = sub.add_parser("refine", parents=[common], help="grid-shrinking search for the bump peak")
    p.add_argument("--unknown", required=True, help="CSV of unknown QFS points")
    sub.add_parser("dataset", parents=[common], help="generate the labelled dataset")
    p = sub.add_parser("train", parents=[common], help="cross-validate the classifiers")
    p.add_argument("--data", help="dataset CSV (default: <out>/dataset.csv)")
    p = sub.add_parser("sweep", parents=[common], help="pulse-width, interpolation or energy study")
    p.add_argument("--study", choices=sorted(SWEEP_DEFAULTS))
    p = sub.add_parser("bench", parents=[common], help="time scan/reduce kernels against sequential folds")
    p.add_argument("--repeats", type=int, default=3)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {"seed": args.seed, "output": args.out, "precision": args.precision})
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.workers is None:
        args.workers = 0 if args.command == "bench" else default_workers()
    try:
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
