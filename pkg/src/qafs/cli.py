"""Command-line entry point: ``qafs {synth,extract,select,evaluate}``.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import config as cfgmod
from .baselines import baseline_select
from .evaluation import (
    ALL_METHODS,
    class_name,
    contribution_table,
    run_experiment,
    significance,
)
from .io import (
    ValidationError,
    format_rows,
    read_feature_csv,
    read_signal_csv,
    write_all_or_nothing,
    write_feature_csv,
    write_signal_csv,
)
from .qubo import build_bqm
from .sampler import exhaustive_solve, simulated_anneal
from .signals import build_feature_matrix
from .synth import synth_record

log = logging.getLogger("qafs")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _overrides(args, mapping: dict[str, str]) -> dict[str, str]:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = str(value)
    if args.seed is not None:
        out["seed"] = str(args.seed)
    return out


def _settings(args, mapping):
    return cfgmod.load(args.config, _overrides(args, mapping))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args) -> int:
    s = _settings(args, {"duration": "synth.duration_seconds", "fs": "synth.sampling_rate_hz"})
    spec = cfgmod.synthetic_spec(s)
    window = cfgmod.extraction_config(s).window
    if spec.duration_seconds < window.window_seconds + 2 * window.step_seconds:
        raise ValidationError("synth.duration_seconds must cover at least 3 windows")
    path = _out_dir(args) / "signals.csv"
    write_signal_csv(path, synth_record(spec))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_extract(args) -> int:
    s = _settings(args, {})
    extraction = cfgmod.extraction_config(s)
    record = read_signal_csv(args.input)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fm, dropped = build_feature_matrix(record, extraction)
    for w in caught:
        log.warning("%s", w.message)
    path = _out_dir(args) / "features.csv"
    write_feature_csv(path, fm)
    print(f"windows: {fm.n_rows}  dropped: {dropped}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_select(args) -> int:
    s = _settings(
        args, {"method": "select.method", "k": "select.k", "alpha": "qubo.alpha", "sampler": "select.sampler"}
    )
    method = s["select.method"]
    if method not in ALL_METHODS:
        raise ValidationError(f"unknown method {method!r}; valid methods: {', '.join(ALL_METHODS)}")
    fm = read_feature_csv(args.matrix)
    out = _out_dir(args)
    files = {}
    if method == "qa":
        bqm = build_bqm(fm.values, fm.labels, alpha=s["qubo.alpha"])
        if s["select.sampler"] == "exhaustive":
            best = exhaustive_solve(bqm)
        elif s["select.sampler"] == "annealing":
            sampleset = simulated_anneal(bqm, cfgmod.anneal_schedule(s), s["seed"])
            best = sampleset.first
            files[out / "sampleset.json"] = sampleset.to_json()
        else:
            raise ValidationError("select.sampler must be 'annealing' or 'exhaustive'")
        indices = best.selected or [min(range(bqm.n), key=lambda i: (bqm.h[i], i))]
        selection = {
            "method": "qa",
            "indices": indices,
            "scores": [float(v) for v in bqm.h],
            "k": len(indices),
        }
        files[out / "bqm.json"] = bqm.to_json()
    else:
        k = s["select.k"]
        if k is None:
            raise ValidationError(f"method {method!r} needs --k")
        selection = baseline_select(fm.values, fm.labels, method, k, s["select.bins"]).to_dict()
    selection["names"] = [fm.names[i] for i in selection["indices"]]
    files[out / "selection.json"] = json.dumps(selection, indent=2) + "\n"
    write_all_or_nothing(files)
    print(json.dumps({"method": method, "indices": selection["indices"], "names": selection["names"]}))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    s = _settings(
        args,
        {"repeats": "experiment.n_repeats", "fractions": "experiment.fractions", "methods": "experiment.methods"},
    )
    cfg = cfgmod.experiment_config(s)
    fm = read_feature_csv(args.matrix)
    result = run_experiment(fm, cfg)
    sig = significance(result, cfg)
    out = _out_dir(args)
    write_all_or_nothing(
        {
            out / "results.csv": format_rows(
                ("method", "fraction", "repetition", "class", "f1"),
                [(m, f, r, class_name(c), v) for m, f, r, c, v in result.f1_rows],
            ),
            out / "selections.csv": format_rows(
                ("method", "fraction", "repetition", "feature_index", "feature_name", "source"),
                result.selections,
            ),
            out / "significance.csv": format_rows(
                ("method", "class", "fraction", "p_value", "significant"),
                [(m, class_name(c), f, p, sig_) for m, c, f, p, sig_ in sig],
            ),
            out / "contribution.csv": format_rows(
                ("method", "fraction", "source", "percent"), contribution_table(result, cfg)
            ),
        }
    )
    print(f"f1 rows: {len(result.f1_rows)}  significance rows: {len(sig)}")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qafs", description="Correlation-QUBO feature selection for stress detection.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")

    p = sub.add_parser("synth", help="generate a synthetic signal CSV")
    common(p)
    p.add_argument("--duration", type=float, help="seconds of signal")
    p.add_argument("--fs", type=float, help="sampling rate in Hz")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="signal CSV -> 39-feature matrix CSV")
    common(p)
    p.add_argument("input")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("select", help="select features from a matrix CSV")
    common(p)
    p.add_argument("matrix")
    p.add_argument("--method", help=f"one of {', '.join(ALL_METHODS)}")
    p.add_argument("--k", type=int, help="subset size for the baseline methods")
    p.add_argument("--alpha", type=float)
    p.add_argument("--sampler", choices=("annealing", "exhaustive"))
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="run the training-fraction experiment grid")
    common(p)
    p.add_argument("matrix")
    p.add_argument("--repeats", type=int)
    p.add_argument("--fractions", help="comma-separated, e.g. 1,0.3,0.2,0.1")
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(ALL_METHODS)}")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
