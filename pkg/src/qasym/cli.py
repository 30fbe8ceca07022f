"""Command-line front end.

Sweeps are written as CSV with a leading ``# manifest: {...}`` comment line;
reports are JSON with a ``manifest`` key.  Exit codes: 0 success, 1 usage or
invalid value, 2 channel outside the CP region, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    DephasingParams,
    Gaussian,
    Kicks,
    dephase,
    noise_to_dephasing,
)
from .classical import (
    CoherentConfig,
    error_prop_variance,
    four_arm_variance,
    idiff_moments,
    mc_classical_oracle,
)
from .entanglement import rel_entropy_coherence
from .errors import (
    DegenerateEstimateError,
    DivergentInformation,
    DomainError,
    NumericalError,
    PhysicalityError,
    ValidationError,
)
from .interferometer import (
    CountRecord,
    InterferometerConfig,
    bootstrap_precision,
    fisher_information,
    outcome_probs,
    sample_counts,
    visibility,
)
from .metrology import (
    modes_asymmetry_norm,
    q_opt,
    qfi_closed,
    qfi_max,
    qfi_numeric,
    rel_entropy_asymmetry,
)
from .qmath import purity

OUTPUT_DIR_ENV = "QASYM_OUTPUT_DIR"

EXIT_USAGE, EXIT_CP, EXIT_NUMERIC = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def manifest(command: str, args: argparse.Namespace, seed: int | None = None) -> dict:
    skip = {"func", "output", "threads", "command"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {
        "command": command,
        "parameters": params,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": _timestamp(),
    }


def _resolve_output(path: str | None, default_name: str) -> Path | None:
    if path == "-":
        return None
    if path is None:
        base = os.environ.get(OUTPUT_DIR_ENV)
        if base is None:
            return None
        return Path(base) / default_name
    return Path(path)


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}", file=sys.stderr)


def _emit_json(obj: dict, path: Path | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", path)


def _emit_csv(man: dict, header: list[str], rows: list[list], path: Path | None) -> None:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(man, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    _emit(buf.getvalue(), path)


# -- channel arguments ---------------------------------------------------------

def _add_channel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=float, default=0.5, help="signal-arm weight of the probe")
    p.add_argument("--eta", type=float, help="inter-eigenspace coherence retention")
    p.add_argument("--kappa", type=float, help="coherence retention inside the reference pair")
    p.add_argument("--model", choices=["kicks", "gaussian"], help="derive (eta, kappa) from a noise model")
    p.add_argument("--phi0", type=float, help="kick magnitude in radians (kicks model)")
    p.add_argument("--sigma2", type=float, help="phase variance in rad^2 (gaussian model)")
    p.add_argument("--c", type=float, help="correlation coefficient of the reference phases")


def _noise_from_args(args):
    if args.model == "kicks":
        if args.phi0 is None or args.c is None:
            raise ValidationError("--model kicks needs --phi0 and --c")
        return Kicks(args.phi0, args.c)
    if args.model == "gaussian":
        if args.sigma2 is None or args.c is None:
            raise ValidationError("--model gaussian needs --sigma2 and --c")
        return Gaussian.from_variance(args.sigma2, args.c)
    return None


def _params_from_args(args) -> tuple[DephasingParams, object]:
    noise = _noise_from_args(args)
    if noise is not None:
        return noise_to_dephasing(noise), noise
    if args.eta is None or args.kappa is None:
        raise ValidationError("give --eta and --kappa, or --model with its parameters")
    return DephasingParams(args.eta, args.kappa), None


def _interferometer_from_args(args) -> InterferometerConfig:
    params, noise = _params_from_args(args)
    return InterferometerConfig(args.q, params, args.v, args.theta0, noise)


# -- commands --------------------------------------------------------------------

def cmd_qfi(args) -> int:
    params, _ = _params_from_args(args)
    header = ["q", "eta", "kappa", "qfi_closed"]
    row = [args.q, params.eta, params.kappa, qfi_closed(args.q, params).value]
    if args.numeric:
        header.append("qfi_numeric")
        row.append(qfi_numeric(dephase(args.q, params)).value)
    header += ["q_opt", "qfi_max"]
    row += [q_opt(params.kappa), qfi_max(params)]
    sys.stdout.write("\t".join(header) + "\n" + "\t".join(_fmt(x) for x in row) + "\n")
    return 0


def _grid(args) -> np.ndarray:
    if args.num < 1:
        raise ValidationError("--num must be at least 1")
    return np.linspace(args.start, args.stop, args.num)


def _sweep_theta(args):
    cfg = _interferometer_from_args(args)
    header = ["theta", "p1", "p2", "p3", "visibility", "fisher"]
    rows = []
    for th in _grid(args):
        p = outcome_probs(cfg, th)
        rows.append([th, p.p1, p.p2, p.p3, visibility(cfg), fisher_information(cfg, th).value])
    return header, rows


def _sweep_kappa(args):
    if args.eta is None:
        raise ValidationError("kappa sweep needs --eta")
    header = ["kappa", "qfi", "fisher", "visibility", "purity", "distillable_entanglement",
              "rel_entropy_asymmetry", "modes_asymmetry_norm", "q_opt", "qfi_max"]
    rows = []
    for k in _grid(args):
        params = DephasingParams(args.eta, k)
        cfg = InterferometerConfig(args.q, params, args.v, args.theta0)
        rho = dephase(args.q, params)
        rows.append([
            k, qfi_closed(args.q, params).value, fisher_information(cfg).value, visibility(cfg),
            purity(rho), rel_entropy_coherence(rho), rel_entropy_asymmetry(rho),
            modes_asymmetry_norm(rho), q_opt(k), qfi_max(params),
        ])
    return header, rows


def _sweep_c(args):
    if args.model not in ("kicks", "gaussian"):
        raise ValidationError("c sweep needs --model kicks (with --phi0) or gaussian (with --sigma2)")
    header = ["c", "eta", "kappa", "qfi", "fisher", "visibility"]
    rows = []
    for c in _grid(args):
        noise = Kicks(args.phi0, c) if args.model == "kicks" else Gaussian.from_variance(args.sigma2, c)
        cfg = InterferometerConfig.from_noise(args.q, noise, args.v, args.theta0)
        rows.append([c, cfg.eta, cfg.kappa, qfi_closed(args.q, cfg.params).value,
                     fisher_information(cfg).value, visibility(cfg)])
    return header, rows


def _sweep_n0(args):
    if args.sigma2 is None or args.c is None:
        raise ValidationError("n0 sweep needs --sigma2 and --c")
    noise = Gaussian.from_variance(args.sigma2, args.c)
    header = ["n0", "var_theta", "quantum_term", "classical_term", "asymptotic_floor",
              "four_arm_var_theta"]
    rows = []
    grid = np.logspace(args.start, args.stop, args.num) if args.log else _grid(args)
    for n0 in grid:
        cfg = CoherentConfig(float(n0), args.q, noise, args.theta)
        s = error_prop_variance(cfg)
        rows.append([n0, s.var_theta, s.quantum_term, s.classical_term, s.asymptotic_floor,
                     four_arm_variance(cfg).var_theta])
    return header, rows


SWEEPS = {"theta": _sweep_theta, "kappa": _sweep_kappa, "c": _sweep_c, "n0": _sweep_n0}


def cmd_sweep(args) -> int:
    header, rows = SWEEPS[args.kind](args)
    _emit_csv(manifest(f"sweep {args.kind}", args), header, rows,
              _resolve_output(args.output, f"sweep_{args.kind}.csv"))
    return 0


def cmd_simulate(args) -> int:
    cfg = _interferometer_from_args(args)
    rec = sample_counts(cfg, args.theta, args.n, args.seed, mode=args.mode)
    out = rec.to_dict()
    out["manifest"] = manifest("simulate", args, args.seed)
    _emit_json(out, _resolve_output(args.output, "counts.json"))
    return 0


def cmd_estimate(args) -> int:
    if args.counts:
        rec = CountRecord.from_json(Path(args.counts).read_text(encoding="utf-8"))
        if rec.config is None:
            raise ValidationError("count record carries no interferometer config")
        cfg = InterferometerConfig.from_dict(rec.config)
    else:
        cfg = _interferometer_from_args(args)
        rec = sample_counts(cfg, cfg.theta0, args.n, args.seed, mode=args.mode)
    report = bootstrap_precision(
        rec, args.n_sets, args.set_size, cfg, args.seed,
        normalization=args.normalization, workers=args.threads,
    )
    out = report.to_dict()
    out["config"] = cfg.to_dict()
    if rec.n3 == 0:
        out["note"] = "no outcome-3 clicks recorded"
    out["manifest"] = manifest("estimate", args, args.seed)
    _emit_json(out, _resolve_output(args.output, "estimate.json"))
    return 0


def cmd_classical(args) -> int:
    if args.sigma2 is None:
        raise ValidationError("--sigma2 is required")
    cfg = CoherentConfig(args.n0, args.q, Gaussian.from_variance(args.sigma2, args.c), args.theta)
    stats = four_arm_variance(cfg) if args.four_arm else error_prop_variance(cfg)
    out = {"scheme": "four_arm" if args.four_arm else "three_arm", "config": cfg.to_dict(),
           "closed_form": stats.to_dict()}
    if args.mc:
        mc = mc_classical_oracle(cfg, args.mc, args.seed, four_arm=args.four_arm, workers=args.threads)
        m = idiff_moments(cfg)
        if args.four_arm:
            m = type(m)(m.mean, m.slope, cfg.n0, m.var_classical)
        out["monte_carlo"] = mc.to_dict()
        out["z_scores"] = mc.z_scores(m)
    out["manifest"] = manifest("classical", args, args.seed if args.mc else None)
    _emit_json(out, _resolve_output(args.output, "classical.json"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qasym", description="Noisy three-arm interferometry toolkit")
    ap.add_argument("--version", action="version", version=f"qasym {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("qfi", help="closed-form (and numeric) QFI, optimal probe")
    _add_channel_args(p)
    p.add_argument("--numeric", action="store_true", help="also evaluate the SLD-based QFI")
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("sweep", help="write a CSV sweep over theta, kappa, c or n0")
    p.add_argument("kind", choices=sorted(SWEEPS))
    _add_channel_args(p)
    p.add_argument("--v", type=float, default=1.0, help="intrinsic visibility")
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0, help="phase for the n0 sweep")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--num", type=int, default=51)
    p.add_argument("--log", action="store_true", help="n0 sweep: start/stop are log10 exponents")
    p.add_argument("--output", "-o")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    for name, func, help_ in [
        ("simulate", cmd_simulate, "simulate detector counts"),
        ("estimate", cmd_estimate, "bootstrap precision of the locally unbiased estimator"),
    ]:
        p = sub.add_parser(name, help=help_)
        _add_channel_args(p)
        p.add_argument("--v", type=float, default=1.0)
        p.add_argument("--theta0", type=float, default=0.0)
        p.add_argument("--n", type=int, default=100_000, help="number of detected photons")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mode", choices=["direct", "kicks"], default="direct")
        p.add_argument("--output", "-o")
        p.add_argument("--threads", type=int, default=1)
        if name == "simulate":
            p.add_argument("--theta", type=float, default=0.0)
        else:
            p.add_argument("--counts", help="count-record JSON from 'simulate'")
            p.add_argument("--n-sets", type=int, default=1000)
            p.add_argument("--set-size", type=int, default=10_000)
            p.add_argument("--normalization", choices=["fringe", "visibility"], default="fringe")
        p.set_defaults(func=func)

    p = sub.add_parser("classical", help="coherent-light error propagation")
    p.add_argument("--n0", type=float, default=1.0)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--sigma2", type=float, default=math.log(2))
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--four-arm", action="store_true")
    p.add_argument("--mc", type=int, default=0, metavar="SAMPLES", help="run the Monte-Carlo oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_classical)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PhysicalityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CP
    except (NumericalError, DivergentInformation, DegenerateEstimateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, DomainError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
