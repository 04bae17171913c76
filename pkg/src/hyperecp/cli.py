"""Command-line front end.

Subcommands: ``run`` (weighted mixture of error cases), ``enumerate``
(exhaustive case table), ``sweep`` (parameter grids), ``monte-carlo``
(seeded channel sampling) and ``verify`` (dense-oracle comparison).
Reports are written atomically as CSV or JSON with a provenance header
and are byte-stable for a fixed (config, seed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, HyperEcpError, NormalizationError
from .optics import CouplingTable, coupling_from_dict
from .oracle import verify_all
from .protocols import (
    CasePair,
    ProtocolOutcome,
    SchemeParams,
    mixture_cases,
    run_mixed,
    scheme1_cases,
    scheme1_run,
    scheme2_cases,
    scheme2_run,
    success_law,
)

RNG_ALGORITHM = "philox4x64 (numpy Philox, per-trial jumped streams)"

_AMPLITUDE_KEYS = (
    "alpha",
    "beta",
    "gamma",
    "delta",
    "epsilon",
    "eta",
    "alpha_cd",
    "beta_cd",
    "gamma_cd",
    "delta_cd",
)
_PAIRS = (
    ("alpha", "beta"),
    ("gamma", "delta"),
    ("epsilon", "eta"),
    ("alpha_cd", "beta_cd"),
    ("gamma_cd", "delta_cd"),
)
_CONFIG_KEYS = _AMPLITUDE_KEYS + (
    "scheme",
    "pol_weights",
    "spatial_weights",
    "trials",
    "seed",
    "out",
    "format",
    "coupling_file",
    "sweep",
)


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    steps: int

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.steps - 1)
        return [self.start + i * step for i in range(self.steps)]

    def text(self) -> str:
        return f"{self.param}:{self.start:.17g}:{self.stop:.17g}:{self.steps}"


def _parse_complex(key: str, text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {text!r} as a complex number") from None


def _format_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.17g}"
    return f"{z.real:.17g}{z.imag:+.17g}j"


def _parse_weights(key: str, text: str) -> tuple[float, float, float, float]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 4:
        raise ConfigError(f"{key} needs four comma-separated probabilities")
    try:
        weights = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {text!r}") from None
    if any(w < 0 for w in weights):
        raise ConfigError(f"{key} entries must be nonnegative")
    if abs(math.fsum(weights) - 1.0) > 1e-12:
        raise ConfigError(f"{key} must sum to 1 (violated: sum={math.fsum(weights)!r})")
    return weights  # type: ignore[return-value]


def _parse_sweep(text: str) -> SweepSpec:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"sweep spec {text!r} must be param:start:stop:steps")
    param = parts[0].strip()
    if param not in ("alpha", "beta", "gamma", "delta", "epsilon", "eta"):
        raise ConfigError(f"unknown sweep parameter {param!r}")
    try:
        start, stop, steps = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise ConfigError(f"cannot parse sweep spec {text!r}") from None
    if steps < 1:
        raise ConfigError("sweep steps must be at least 1")
    for v in (start, stop):
        if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
            raise ConfigError(f"sweep range for {param} violates |{param}| <= 1")
    return SweepSpec(param, start, stop, steps)


def load_config_file(path: Path) -> dict[str, str]:
    """Flat ``key = value`` file; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def serialize_config(cfg: dict[str, str]) -> str:
    """Canonical text form used for round-tripping and the config hash."""
    lines = [f"{key} = {cfg[key]}" for key in sorted(cfg)]
    return "\n".join(lines) + "\n"


def config_hash(cfg: dict[str, str]) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()


@dataclass(frozen=True)
class RunConfig:
    command: str
    scheme: int
    params: SchemeParams
    trials: int
    seed: int
    out: Path | None
    format: str
    sweeps: tuple[SweepSpec, ...]
    qnd1_coupling: CouplingTable | None
    qnd2_couplings: tuple[CouplingTable, CouplingTable] | None
    canonical: dict[str, str]


def _complete_pair(
    raw: dict[str, complex | None], x_name: str, y_name: str, optional: bool
) -> tuple[complex | None, complex | None]:
    x, y = raw.get(x_name), raw.get(y_name)
    if x is None and y is None:
        if optional:
            return None, None
        default = 1.0 / math.sqrt(2.0)
        return complex(default), complex(default)
    if x is not None and y is not None:
        total = abs(x) ** 2 + abs(y) ** 2
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(
                f"|{x_name}|^2+|{y_name}|^2 = 1 violated (got {total!r}); "
                "give one amplitude of the pair to auto-complete the other"
            )
        return x, y
    given_name, given = (x_name, x) if x is not None else (y_name, y)
    mod_sq = abs(given) ** 2
    if mod_sq > 1.0 + 1e-12:
        raise ConfigError(f"|{given_name}| exceeds 1; cannot complete its partner")
    other = complex(math.sqrt(max(0.0, 1.0 - mod_sq)))
    return (x, other) if x is not None else (other, y)


def resolve_params(amplitudes: dict[str, complex | None],
                   pol_weights: tuple[float, ...],
                   spatial_weights: tuple[float, ...]) -> SchemeParams:
    alpha, beta = _complete_pair(amplitudes, "alpha", "beta", optional=False)
    gamma, delta = _complete_pair(amplitudes, "gamma", "delta", optional=False)
    epsilon, eta = _complete_pair(amplitudes, "epsilon", "eta", optional=False)
    alpha_cd, beta_cd = _complete_pair(amplitudes, "alpha_cd", "beta_cd", optional=True)
    gamma_cd, delta_cd = _complete_pair(amplitudes, "gamma_cd", "delta_cd", optional=True)
    try:
        return SchemeParams(
            alpha=alpha,
            beta=beta,
            gamma=gamma,
            delta=delta,
            epsilon=epsilon,
            eta=eta,
            pol_weights=pol_weights,  # type: ignore[arg-type]
            spatial_weights=spatial_weights,  # type: ignore[arg-type]
            alpha_cd=alpha_cd,
            beta_cd=beta_cd,
            gamma_cd=gamma_cd,
            delta_cd=delta_cd,
        )
    except NormalizationError as exc:
        raise ConfigError(str(exc)) from exc


def _load_couplings(path: Path | None) -> tuple[CouplingTable | None, tuple[CouplingTable, CouplingTable] | None]:
    if path is None:
        return None, None
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read coupling file {path}: {exc}") from exc
    qnd1_table = coupling_from_dict(data["qnd1"]) if "qnd1" in data else None
    qnd2_tables = None
    if "qnd2_alice" in data or "qnd2_bob" in data:
        if not ("qnd2_alice" in data and "qnd2_bob" in data):
            raise ConfigError("coupling file must define both qnd2_alice and qnd2_bob")
        qnd2_tables = (coupling_from_dict(data["qnd2_alice"]), coupling_from_dict(data["qnd2_bob"]))
    return qnd1_table, qnd2_tables


def build_config(command: str, args: argparse.Namespace) -> RunConfig:
    file_cfg: dict[str, str] = {}
    if args.config is not None:
        file_cfg = load_config_file(Path(args.config))

    merged: dict[str, str] = dict(file_cfg)
    for key in _AMPLITUDE_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    for key in ("pol_weights", "spatial_weights", "out", "format", "coupling_file"):
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = str(flag)
    for key in ("scheme", "trials", "seed"):
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = str(flag)
    sweep_flags = getattr(args, "sweep", None)
    if sweep_flags:
        merged["sweep"] = ",".join(sweep_flags)

    scheme = int(merged.get("scheme", "1"))
    if scheme not in (1, 2):
        raise ConfigError(f"scheme must be 1 or 2, got {scheme}")
    trials = int(merged.get("trials", "10000"))
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    seed = int(merged.get("seed", "0"))
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")

    amplitudes: dict[str, complex | None] = {
        key: _parse_complex(key, merged[key]) if key in merged else None
        for key in _AMPLITUDE_KEYS
    }
    sweeps: tuple[SweepSpec, ...] = ()
    if merged.get("sweep"):
        sweeps = tuple(_parse_sweep(s) for s in merged["sweep"].split(",") if s)
        if len(sweeps) > 2:
            raise ConfigError("at most two sweep parameters are supported")
        for spec in sweeps:
            if amplitudes.get(spec.param) is not None:
                raise ConfigError(f"sweep parameter {spec.param} also given explicitly")
            partner = _sweep_partner(spec.param)
            if amplitudes.get(partner) is not None:
                raise ConfigError(
                    f"explicit {partner} conflicts with sweeping {spec.param}; "
                    "the dependent amplitude is auto-completed"
                )

    pol_weights = _parse_weights("pol_weights", merged.get("pol_weights", "0.25,0.25,0.25,0.25"))
    spatial_weights = _parse_weights(
        "spatial_weights", merged.get("spatial_weights", "0.25,0.25,0.25,0.25")
    )
    params = resolve_params(amplitudes, pol_weights, spatial_weights)
    if scheme == 1 and params.gamma_cd is not None:
        raise ConfigError("scheme 1 shares spatial amplitudes between pairs; drop gamma_cd/delta_cd")

    coupling_file = merged.get("coupling_file")
    qnd1_table, qnd2_tables = _load_couplings(Path(coupling_file) if coupling_file else None)

    canonical = {
        "scheme": str(scheme),
        "trials": str(trials),
        "seed": str(seed),
        "format": merged.get("format", "csv"),
        "pol_weights": ",".join(f"{w:.17g}" for w in pol_weights),
        "spatial_weights": ",".join(f"{w:.17g}" for w in spatial_weights),
    }
    for key in _AMPLITUDE_KEYS:
        if amplitudes[key] is not None:
            canonical[key] = _format_complex(amplitudes[key])
    if sweeps:
        canonical["sweep"] = ",".join(s.text() for s in sweeps)
    if coupling_file:
        canonical["coupling_file"] = coupling_file

    fmt = canonical["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    out = Path(merged["out"]) if merged.get("out") else None
    return RunConfig(
        command=command,
        scheme=scheme,
        params=params,
        trials=trials,
        seed=seed,
        out=out,
        format=fmt,
        sweeps=sweeps,
        qnd1_coupling=qnd1_table,
        qnd2_couplings=qnd2_tables,
        canonical=canonical,
    )


def _sweep_partner(param: str) -> str:
    for x, y in _PAIRS:
        if param == x:
            return y
        if param == y:
            return x
    raise ConfigError(f"unknown sweep parameter {param!r}")


# ---------------------------------------------------------------------------
# Report writing.
# ---------------------------------------------------------------------------

def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


def _csv_quote(cell: str) -> str:
    if any(c in cell for c in ",\"\n"):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def render_csv(meta: dict, columns: Sequence[str], rows: Iterable[Sequence], aggregate: dict | None) -> str:
    lines = [f"# {key}={meta[key]}" for key in sorted(meta)]
    if aggregate:
        lines.extend(f"# aggregate.{key}={_fmt_cell(aggregate[key])}" for key in sorted(aggregate))
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_csv_quote(_fmt_cell(v)) for v in row))
    return "\n".join(lines) + "\n"


def render_json(meta: dict, columns: Sequence[str], rows: Iterable[Sequence], aggregate: dict | None) -> str:
    payload = {
        "meta": meta,
        "aggregate": aggregate or {},
        "columns": list(columns),
        "rows": [[(f"{v:.15g}" if isinstance(v, float) else v) for v in row] for row in rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_report(
    config: RunConfig,
    columns: Sequence[str],
    rows: Sequence[Sequence],
    aggregate: dict | None = None,
    extra_meta: dict | None = None,
) -> str:
    meta = {
        "command": config.command,
        "config_hash": config_hash(config.canonical),
        "rng": RNG_ALGORITHM,
        "seed": str(config.seed),
        "tool_version": __version__,
    }
    if extra_meta:
        meta.update(extra_meta)
    text = (
        render_csv(meta, columns, rows, aggregate)
        if config.format == "csv"
        else render_json(meta, columns, rows, aggregate)
    )
    if config.out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(config.out, text)
    return text


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def _case_columns(scheme: int) -> list[str]:
    if scheme == 1:
        return ["pol_ab", "pol_cd"]
    return ["pol_ab", "spatial_ab", "pol_cd", "spatial_cd"]


def _case_cells(case: CasePair) -> list:
    if case.has_spatial:
        return [case.pol_ab, case.spatial_ab, case.pol_cd, case.spatial_cd]
    return [case.pol_ab, case.pol_cd]


def _run_case(config: RunConfig, case: CasePair) -> ProtocolOutcome:
    if config.scheme == 1:
        return scheme1_run(config.params, case, config.qnd1_coupling)
    return scheme2_run(config.params, case, config.qnd2_couplings)


def _analytic(config: RunConfig) -> float:
    return success_law(config.params) if config.scheme == 1 else 1.0


def cmd_run(config: RunConfig) -> int:
    outcome = run_mixed(
        config.params,
        config.scheme,
        coupling=config.qnd1_coupling,
        couplings2=config.qnd2_couplings,
    )
    columns = _case_columns(config.scheme) + [
        "weight",
        "success_probability",
        "analytic_success",
        "mean_fidelity",
        "min_fidelity",
        "corrections_count",
    ]
    rows = []
    for case, weight in mixture_cases(config.params, config.scheme):
        case_outcome = _run_case(config, case)
        rows.append(
            _case_cells(case)
            + [
                weight,
                case_outcome.success_probability,
                _analytic(config),
                case_outcome.mean_fidelity(),
                case_outcome.min_fidelity(),
                case_outcome.corrections_count(),
            ]
        )
    aggregate = {
        "success_probability": outcome.success_probability,
        "analytic_success": _analytic(config),
        "mean_fidelity": outcome.mean_fidelity(),
        "branches": len(outcome.branches),
    }
    write_report(config, columns, rows, aggregate)
    return 0


def cmd_enumerate(config: RunConfig) -> int:
    if config.scheme == 1:
        cases = scheme1_cases()
        outcome_labels = ["success", "fail"]
    else:
        cases = scheme2_cases()
        outcome_labels = ["0,0", "0,2", "2,0", "2,2"]
    prob_columns = [f"p_{lbl.replace(',', '')}" for lbl in outcome_labels]
    columns = (
        _case_columns(config.scheme)
        + ["success_probability"]
        + prob_columns
        + ["mean_fidelity", "min_fidelity", "corrections_count", "analytic_success"]
    )
    rows = []
    for case in cases:
        outcome = _run_case(config, case)
        if config.scheme == 1:
            fail_p = math.fsum(f.probability for f in outcome.failures)
            probs = [outcome.success_probability, fail_p]
        else:
            by_label = {br.labels[0].removeprefix("qnd2="): br.probability for br in outcome.branches}
            probs = [by_label.get(lbl, 0.0) for lbl in outcome_labels]
        rows.append(
            _case_cells(case)
            + [outcome.success_probability]
            + probs
            + [
                outcome.mean_fidelity(),
                outcome.min_fidelity(),
                outcome.corrections_count(),
                _analytic(config),
            ]
        )
    write_report(config, columns, rows)
    return 0


def cmd_sweep(config: RunConfig) -> int:
    if not config.sweeps:
        raise ConfigError("sweep requires at least one --sweep param:start:stop:steps")
    grids = [spec.values() for spec in config.sweeps]
    points: list[tuple[float, ...]]
    if len(grids) == 1:
        points = [(v,) for v in grids[0]]
    else:
        points = [(v1, v2) for v1 in grids[0] for v2 in grids[1]]

    columns = [spec.param for spec in config.sweeps] + [
        "success_probability",
        "analytic_success",
        "mean_fidelity",
        "min_fidelity",
    ]
    rows = []
    base_amplitudes = {key: getattr(config.params, key) for key in _AMPLITUDE_KEYS}
    for point in points:
        amplitudes = dict(base_amplitudes)
        for spec, value in zip(config.sweeps, point):
            amplitudes[spec.param] = complex(value)
            amplitudes[_sweep_partner(spec.param)] = None
        params = resolve_params(amplitudes, config.params.pol_weights, config.params.spatial_weights)
        outcome = run_mixed(
            params, config.scheme, coupling=config.qnd1_coupling, couplings2=config.qnd2_couplings
        )
        analytic = success_law(params) if config.scheme == 1 else 1.0
        rows.append(
            list(point)
            + [outcome.success_probability, analytic, outcome.mean_fidelity(), outcome.min_fidelity()]
        )
    write_report(config, columns, rows)
    return 0


def _sample_index(rng: np.random.Generator, weights: Sequence[float]) -> int:
    u = rng.random()
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def cmd_monte_carlo(config: RunConfig) -> int:
    cache: dict[CasePair, ProtocolOutcome] = {}

    def outcome_for(case: CasePair) -> ProtocolOutcome:
        if case not in cache:
            cache[case] = _run_case(config, case)
        return cache[case]

    base = np.random.Philox(key=config.seed)
    columns = ["trial", "case", "outcome", "success", "fidelity"]
    rows = []
    successes = 0
    fidelity_sum = 0.0
    for trial in range(config.trials):
        rng = np.random.Generator(base.jumped(trial))
        i = _sample_index(rng, config.params.pol_weights) + 1
        j = _sample_index(rng, config.params.pol_weights) + 1
        if config.scheme == 1:
            case = CasePair(i, j)
        else:
            k = _sample_index(rng, config.params.spatial_weights) + 1
            l = _sample_index(rng, config.params.spatial_weights) + 1
            case = CasePair(i, j, k, l)
        outcome = outcome_for(case)
        labels = [br.labels[-1] for br in outcome.branches]
        probs = [br.probability for br in outcome.branches]
        fids = [br.fidelity for br in outcome.branches]
        for failure in outcome.failures:
            labels.append(failure.label)
            probs.append(failure.probability)
            fids.append(None)
        pick = _sample_index(rng, probs)
        success = fids[pick] is not None
        fid = fids[pick]
        if success:
            successes += 1
            fidelity_sum += fid
        rows.append([trial, case.label(), labels[pick], success, fid])
    rate = successes / config.trials
    aggregate = {
        "trials": config.trials,
        "successes": successes,
        "empirical_success_rate": rate,
        "std_error": math.sqrt(max(rate * (1.0 - rate), 0.0) / config.trials),
        "analytic_success": _analytic(config),
        "mean_fidelity": (fidelity_sum / successes) if successes else 0.0,
    }
    write_report(config, columns, rows, aggregate)
    return 0


def cmd_verify(config: RunConfig, schemes: Sequence[int]) -> int:
    report = verify_all(seed=config.seed or 20260809, tol=1e-9, schemes=schemes)
    meta = {
        "command": "verify",
        "config_hash": config_hash(config.canonical),
        "rng": RNG_ALGORITHM,
        "seed": str(config.seed),
        "tool_version": __version__,
    }
    payload = json.dumps({"meta": meta, **report}, indent=2, sort_keys=True) + "\n"
    if config.out is None:
        sys.stdout.write(payload)
    else:
        _atomic_write(config.out, payload)
    return 0 if report["passed"] else 3


# ---------------------------------------------------------------------------
# Argument parsing and entry point.
# ---------------------------------------------------------------------------

def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file; flags override it")
    parser.add_argument("--scheme", type=int, choices=(1, 2))
    for key in _AMPLITUDE_KEYS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar="Z")
    parser.add_argument("--pol-weights", dest="pol_weights", metavar="F1,F2,F3,F4")
    parser.add_argument("--spatial-weights", dest="spatial_weights", metavar="G1,G2,G3,G4")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", metavar="PATH")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--coupling-file", dest="coupling_file", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperecp",
        description="Simulate and verify two-photon hyperentanglement concentration/purification protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "run the weighted case mixture and report the aggregate"),
        ("enumerate", "exhaustive per-case table (16 or 256 rows)"),
        ("monte-carlo", "seeded channel sampling with empirical statistics"),
        ("verify", "compare the pipeline against the dense oracle"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common_flags(p)
    p = sub.add_parser("sweep", help="parameter grid of success probability and fidelity")
    _add_common_flags(p)
    p.add_argument("--sweep", action="append", metavar="PARAM:START:STOP:STEPS")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args.command, args)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "enumerate":
            return cmd_enumerate(config)
        if args.command == "sweep":
            return cmd_sweep(config)
        if args.command == "monte-carlo":
            return cmd_monte_carlo(config)
        if args.command == "verify":
            schemes = (config.scheme,) if getattr(args, "scheme", None) else (1, 2)
            return cmd_verify(config, schemes)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HyperEcpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:  # pragma: no cover - console script shim
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
