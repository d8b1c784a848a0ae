"""Command-line interface.

Subcommands: ``run`` (full pipeline), ``decompose-check`` (four-term identity
of the delayed state), ``tomography`` (reconstruct from an existing count
file), and ``sample`` (generate count tables only).  Every error path exits
nonzero before any result file is written.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as _io
from .runner import (
    OUTCOME_KINDS,
    RunConfig,
    decompose_check,
    run_experiment,
    write_artifacts,
)
from .states import bell_state, concurrence, fidelity
from .swap import DistinguishabilityModel, apply_delay, build_two_pair_state, project_middle
from .tomography import bootstrap_error, reconstruct, sample_counts


def _add_config_flags(parser):
    parser.add_argument("--config", type=Path, help="JSON file with run configuration")
    parser.add_argument("--seed", type=int, help="master seed (unsigned integer)")
    parser.add_argument("--overlap", type=float, help="middle-photon mode overlap in [0, 1]")
    parser.add_argument("--noise", type=float, help="white-noise admixture in [0, 1]")
    parser.add_argument("--flux", type=float, help="fourfold coincidences per second")
    parser.add_argument("--integration", type=float, help="seconds per setting")
    parser.add_argument(
        "--outcome", choices=("phiplus", "phiminus", "both"), help="conditioning outcome"
    )
    parser.add_argument("--method", choices=("li", "ml"), help="reconstruction method")
    parser.add_argument("--bootstrap", type=int, help="bootstrap resample count")


_FLAG_TO_FIELD = {
    "seed": "seed",
    "overlap": "overlap",
    "noise": "white_noise",
    "flux": "flux",
    "integration": "integration_time",
    "outcome": "outcome",
    "method": "method",
    "bootstrap": "n_bootstrap",
}


def _load_config(args) -> RunConfig:
    data = {}
    if args.config is not None:
        try:
            payload = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ValueError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(
                f"{args.config}: invalid JSON at line {exc.lineno}, column {exc.colno}"
            ) from exc
        if not isinstance(payload, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
        payload.pop("format", None)
        payload.pop("version", None)
        data.update(payload)
    for flag, field_name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[field_name] = value
    return RunConfig.from_dict(data)


def _cmd_run(args) -> int:
    config = _load_config(args)
    result = run_experiment(config)
    written = write_artifacts(result, args.out)
    for label, art in sorted(result.outcomes.items()):
        recon = art.reconstruction
        sigma = f" +/- {recon.bootstrap_sigma:.4f}" if recon.bootstrap_sigma is not None else ""
        print(
            f"{label}: fidelity {recon.fidelity_to_target:.4f}{sigma}, "
            f"concurrence {art.concurrence:.4f}, method {recon.method}"
        )
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def _cmd_decompose_check(args) -> int:
    config = _load_config(args)
    report = decompose_check(config.pair_phase_1, config.pair_phase_2)
    for key, value in report.coefficients.items():
        print(f"  ({key}, {key}): {value.real:+.6f}{value.imag:+.6f}j")
    print(f"max cross term: {report.max_cross_term:.3e}")
    print(f"total weight:   {report.total_weight:.12f}")
    print("identity holds" if report.passed else "identity FAILED")
    return 0 if report.passed else 1


def _cmd_tomography(args) -> int:
    table = _io.import_count_table(args.counts)
    target_label = args.target or table.conditioning
    if target_label not in OUTCOME_KINDS:
        raise ValueError(
            "no conditioning outcome in the counts file; pass --target phiplus|phiminus"
        )
    target = bell_state(OUTCOME_KINDS[target_label])
    result = reconstruct(table, method=args.method)
    fid = fidelity(result.rho, target)
    sigma = None
    if args.bootstrap >= 2:
        sigma = bootstrap_error(
            table, target, n_resamples=args.bootstrap, seed=args.seed, method=args.method
        )
    conc = concurrence(result.rho.clipped_to_physical())
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _io.export_density_matrix(result.rho, out / f"rho_{target_label}.json")
        _io.export_real_part_grid(result.rho, out / f"rho_{target_label}_real.csv")
        _io.write_json(
            out / "metrics.json",
            {
                "format": "entswap.metrics",
                "version": _io.FORMAT_VERSION,
                "outcomes": {
                    target_label: {
                        "method": result.method,
                        "converged": result.converged,
                        "n_iterations": result.n_iterations,
                        "log_likelihood": result.log_likelihood,
                        "fidelity_to_target": fid,
                        "bootstrap_sigma": sigma,
                        "n_resamples": args.bootstrap if sigma is not None else 0,
                        "concurrence": conc,
                    }
                },
            },
        )
    sigma_txt = f" +/- {sigma:.4f}" if sigma is not None else ""
    print(f"{target_label}: fidelity {fid:.4f}{sigma_txt}, concurrence {conc:.4f}")
    return 0


def _cmd_sample(args) -> int:
    config = _load_config(args)
    state = apply_delay(build_two_pair_state(config.pair_phase_1, config.pair_phase_2))
    model = DistinguishabilityModel(config.overlap, config.white_noise)
    out = Path(args.out)
    tables = {}
    for i, label in enumerate(config.selected_outcomes()):
        projection = project_middle(state, OUTCOME_KINDS[label], model)
        tables[label] = sample_counts(
            projection.conditional_state,
            flux=config.flux,
            integration_time=config.integration_time,
            seed=config.seed + i,
            conditioning=label,
        )
    out.mkdir(parents=True, exist_ok=True)
    for label, table in tables.items():
        path = out / f"counts_{label}.json"
        _io.export_count_table(table, path)
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entswap",
        description="Simulate entanglement swapping between time-separated photon "
        "pairs and reconstruct the swapped state by tomography.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full pipeline: swap, sample, reconstruct, bootstrap")
    _add_config_flags(p_run)
    p_run.add_argument("--out", type=Path, required=True, help="output directory")
    p_run.set_defaults(handler=_cmd_run)

    p_dc = sub.add_parser("decompose-check", help="verify the four-term identity")
    _add_config_flags(p_dc)
    p_dc.set_defaults(handler=_cmd_decompose_check)

    p_tomo = sub.add_parser("tomography", help="reconstruct from an existing count file")
    p_tomo.add_argument("counts", type=Path, help="count table JSON")
    p_tomo.add_argument("--method", choices=("li", "ml"), default="ml")
    p_tomo.add_argument("--bootstrap", type=int, default=100)
    p_tomo.add_argument("--seed", type=int, default=0)
    p_tomo.add_argument("--target", choices=("phiplus", "phiminus"))
    p_tomo.add_argument("--out", type=Path)
    p_tomo.set_defaults(handler=_cmd_tomography)

    p_sample = sub.add_parser("sample", help="generate count tables only")
    _add_config_flags(p_sample)
    p_sample.add_argument("--out", type=Path, required=True, help="output directory")
    p_sample.set_defaults(handler=_cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
