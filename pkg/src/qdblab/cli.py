"""Command-line interface.

Runs the built-in scenarios, verifies user-supplied models (JSON), sweeps a
named parameter, and writes machine-readable reports.  Reports are
byte-deterministic for a fixed configuration: floats are printed with 17
significant digits and rows are ordered by (tau, gap).

Exit codes: 0 success, 2 usage or configuration error, 3 model invariant
violation, 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .balance import TimeReversal, WeightedSpace, check_qdb1, check_qdb2
from .dynamics import (
    KrausChannel,
    LindbladGenerator,
    SuperOperator,
    evolve,
    heisenberg_dual,
    lindblad_superop,
    superop_from_channel,
)
from .errors import (
    ConfigError,
    DegenerateGround,
    DimensionMismatch,
    InconclusiveHorizon,
    InternalCheckError,
    KossakowskiNotPSD,
    NoConvergence,
    NotAState,
    NotCompletelyPositive,
    NotCPTP,
    NotHermitian,
    NotThermal,
    NotTracePreserving,
    ScheduleOutOfRange,
    SingularWeight,
    UnknownParameter,
    ZeroPopulation,
)
from .examples import (
    ExampleAParams,
    ExampleBParams,
    bloch4_to_superop,
    example_a_channel,
    example_a_f_factor,
    example_b_generator,
    example_c_generator,
    example_c_qdb_point,
)
from .fluctuation import classify, exchange_distribution, qfr_ratio
from .states import DensityMatrix, HamiltonianSpec, gibbs, infer_beta
from .matlin import dag, unvec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MODEL = 3
EXIT_INTERNAL = 4

QDB2_TAUS = (0.1, 0.5, 1.0, 5.0)

MODEL_ERRORS = (
    NotAState,
    NotHermitian,
    KossakowskiNotPSD,
    NotTracePreserving,
    NotCompletelyPositive,
    NotCPTP,
    ScheduleOutOfRange,
    DimensionMismatch,
    SingularWeight,
    DegenerateGround,
    NoConvergence,
)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    tau_grid: tuple
    s_grid: tuple
    beta_i: float
    beta_f: float
    tol_qdb: float
    tol_qfr: float
    tol_cptp: float
    out: Path
    fmt: str

    def __post_init__(self):
        for name, grid in (("tau-grid", self.tau_grid), ("s-grid", self.s_grid)):
            if not grid:
                raise ConfigError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        for name, tol in (
            ("tol-qdb", self.tol_qdb),
            ("tol-qfr", self.tol_qfr),
            ("tol-cptp", self.tol_cptp),
        ):
            if tol <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.beta_i < 0:
            raise ConfigError("beta-i must be nonnegative")


def parse_grid(spec: str) -> tuple:
    """Either ``log:LO:HI:N`` (log-spaced) or a comma-separated list."""
    try:
        if spec.startswith("log:"):
            _, lo, hi, n = spec.split(":")
            return tuple(float(x) for x in np.geomspace(float(lo), float(hi), int(n)))
        return tuple(float(x) for x in spec.split(",") if x.strip())
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse grid spec {spec!r}: {exc}") from exc


def parse_range(spec: str) -> tuple:
    """``START:STOP:COUNT``, linearly spaced; COUNT = 0 gives an empty range."""
    try:
        lo, hi, n = spec.split(":")
        return tuple(float(x) for x in np.linspace(float(lo), float(hi), int(n)))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse range spec {spec!r}: {exc}") from exc


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        tau_grid=parse_grid(args.tau_grid),
        s_grid=parse_grid(args.s_grid),
        beta_i=args.beta_i,
        beta_f=args.beta_f,
        tol_qdb=args.tol_qdb,
        tol_qfr=args.tol_qfr,
        tol_cptp=args.tol_cptp,
        out=Path(args.out),
        fmt=args.format,
    )


# ---------------------------------------------------------------------------
# dynamics sources


@dataclass
class SemigroupSource:
    label: str
    h: HamiltonianSpec
    generator: object  # LindbladGenerator or Schroedinger SuperOperator

    kind = "semigroup"

    def superop(self) -> SuperOperator:
        if isinstance(self.generator, LindbladGenerator):
            return lindblad_superop(self.generator)
        return self.generator

    def map_at(self, tau: float) -> SuperOperator:
        return evolve(self.superop(), tau)


@dataclass
class ChannelFamilySource:
    label: str
    h: HamiltonianSpec
    family: object  # callable tau -> KrausChannel

    kind = "channel_family"

    def map_at(self, tau: float) -> KrausChannel:
        return self.family(tau)


@dataclass
class SingleMapSource:
    label: str
    h: HamiltonianSpec
    channel: KrausChannel
    tau: float

    kind = "single_map"

    def map_at(self, tau: float) -> KrausChannel:
        return self.channel


def _as_schro_superop(m) -> SuperOperator:
    return superop_from_channel(m) if isinstance(m, KrausChannel) else m


# ---------------------------------------------------------------------------
# report pipeline


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return format(float(x), ".17g")


def _classification_dict(source) -> dict:
    if source.kind == "single_map":
        s = superop_from_channel(source.channel)
        w, v = np.linalg.eig(s.matrix)
        near_one = np.abs(w - 1.0) < 1e-8
        beta = None
        if int(np.sum(near_one)) == 1:
            col = v[:, int(np.argmax(near_one))]
            mat = unvec(col, source.h.dim, source.h.dim)
            mat = (mat + dag(mat)) / 2
            tr = float(np.real(np.trace(mat)))
            if abs(tr) > 1e-12:
                try:
                    beta = infer_beta(DensityMatrix(mat / tr), source.h)
                except (NotThermal, ZeroPopulation, NotAState):
                    beta = None
        return {"kind": "single_map", "beta_f": _json_float(beta), "gamma_min": None}
    if source.kind == "semigroup":
        cls = classify(
            source.generator if isinstance(source.generator, LindbladGenerator) else source.superop(),
            source.h,
        )
    else:
        cls = classify(source.family, source.h)
    return {
        "kind": cls.kind,
        "beta_f": _json_float(cls.beta_f),
        "gamma_min": _json_float(cls.gamma_min),
    }


def build_report(source, config: RunConfig, f_factor=None):
    """Rows and verdict for one dynamics source.

    Rows cover the tau grid with one entry per Bohr gap; the verdict
    aggregates classification, both balance checks (per point of the s
    grid) and the worst ratio-law deviation.
    """
    classification = _classification_dict(source)
    beta_raw = classification["beta_f"]
    beta_known = isinstance(beta_raw, float) and math.isfinite(beta_raw)
    beta_for_ratios = beta_raw if beta_known else config.beta_f

    qdb1 = None
    if source.kind == "semigroup" and beta_known:
        sigma = gibbs(source.h, beta_raw)
        try:
            per_s = {}
            for s_val in config.s_grid:
                space = WeightedSpace(sigma=sigma, s=s_val)
                rep = check_qdb1(space, source.generator, h=source.h, tol=config.tol_qdb)
                per_s[fmt_float(s_val)] = rep.residual
            worst = max(per_s.values())
            qdb1 = {
                "passes": bool(worst < config.tol_qdb),
                "max_residual": worst,
                "per_s": per_s,
            }
        except SingularWeight:
            qdb1 = None

    qdb2 = None
    if beta_known:
        sigma = gibbs(source.h, beta_raw)
        reversal = TimeReversal.conjugation(source.h.dim)
        taus = (source.tau,) if source.kind == "single_map" else QDB2_TAUS
        taus = tuple(t for t in taus if t is not None and math.isfinite(t))
        if taus:
            try:
                per_s = {}
                for s_val in config.s_grid:
                    space = WeightedSpace(sigma=sigma, s=s_val)
                    worst_tau = 0.0
                    for tau in taus:
                        heis = heisenberg_dual(_as_schro_superop(source.map_at(tau)))
                        rep = check_qdb2(space, heis, reversal, tol=config.tol_qdb)
                        worst_tau = max(worst_tau, rep.max_residual)
                    per_s[fmt_float(s_val)] = worst_tau
                worst = max(per_s.values())
                qdb2 = {
                    "passes": bool(worst < config.tol_qdb),
                    "max_residual": worst,
                    "per_s": per_s,
                    "taus": list(taus),
                }
            except SingularWeight:
                qdb2 = None

    header = ["tau", "E", "p_plus", "p_minus", "R", "predicted", "deviation"]
    if f_factor is not None:
        header.append("F_tau")
    rows = []
    qfr_max = None
    taus = (source.tau,) if source.kind == "single_map" else config.tau_grid
    for tau in taus:
        if tau is None:
            continue
        dist = exchange_distribution(
            source.map_at(tau), source.h, config.beta_i, beta_for_ratios, tau
        )
        ratios = {round(r.energy, 12): r for r in qfr_ratio(dist)}
        for gap in dist.gaps:
            rec = ratios.get(round(gap.energy, 12))
            row = [
                tau,
                gap.energy,
                gap.p_plus,
                gap.p_minus,
                rec.ratio if rec else None,
                rec.predicted if rec else None,
                rec.deviation if rec else None,
            ]
            if f_factor is not None:
                row.append(f_factor(tau))
            rows.append(row)
            if rec is not None:
                qfr_max = rec.deviation if qfr_max is None else max(qfr_max, rec.deviation)

    verdict = {
        "schema": 1,
        "source": source.label,
        "classification": classification,
        "qdb1": qdb1,
        "qdb2": qdb2,
        "qfr_max_deviation": _json_float(qfr_max),
        "qfr_passes": None if qfr_max is None else bool(qfr_max < config.tol_qfr),
        "config": {
            "tau_grid": list(config.tau_grid),
            "s_grid": list(config.s_grid),
            "beta_i": config.beta_i,
            "beta_f": config.beta_f,
            "tolerances": {
                "qdb_pass": config.tol_qdb,
                "qfr_pass": config.tol_qfr,
                "cptp": config.tol_cptp,
            },
        },
    }
    return header, rows, verdict


# ---------------------------------------------------------------------------
# output


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_rows(path: Path, header, rows, fmt: str) -> None:
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(fmt_float(x) if not isinstance(x, str) else x for x in row))
        _write_text(path, "\n".join(lines) + "\n")
    else:
        payload = {
            "schema": 1,
            "columns": list(header),
            "rows": [[_json_float(x) if not isinstance(x, str) else x for x in row] for row in rows],
        }
        _write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_verdict(path: Path, verdict: dict) -> None:
    _write_text(path, json.dumps(verdict, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# model files


def _complex_to_pairs(m: np.ndarray):
    m = np.asarray(m, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _pairs_to_complex(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"malformed matrix entry: {exc}") from exc
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ConfigError(f"matrix must be nested rows of numbers or [re, im] pairs, got shape {arr.shape}")


def save_model(gen: LindbladGenerator, path: Path) -> None:
    """Serialize a canonical-basis Lindblad generator to JSON."""
    obj = {
        "schema": 1,
        "kind": "lindblad",
        "hamiltonian": _complex_to_pairs(gen.hamiltonian.matrix),
        "kossakowski": _complex_to_pairs(gen.kossakowski),
    }
    _write_text(Path(path), json.dumps(obj, sort_keys=True, indent=2) + "\n")


def load_model(path: Path):
    """Parse a model file into a dynamics source (validating invariants)."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    if obj.get("schema") != 1:
        raise ConfigError(f"unsupported model schema {obj.get('schema')!r}")
    kind = obj.get("kind")
    label = f"check_{path.stem}"
    try:
        if kind == "lindblad":
            h = HamiltonianSpec.from_matrix(_pairs_to_complex(obj["hamiltonian"]))
            gen = LindbladGenerator.canonical(h, _pairs_to_complex(obj["kossakowski"]))
            return SemigroupSource(label, h, gen)
        if kind == "kraus":
            h = HamiltonianSpec.from_matrix(_pairs_to_complex(obj["hamiltonian"]))
            ops = tuple(_pairs_to_complex(g) for g in obj["kraus_ops"])
            channel = KrausChannel(ops)
            tau = float(obj.get("tau", float("nan")))
            return SingleMapSource(label, h, channel, tau)
        if kind == "bloch4":
            h = HamiltonianSpec.from_matrix(_pairs_to_complex(obj["hamiltonian"]))
            l4 = np.real(_pairs_to_complex(obj["generator"]))
            return SemigroupSource(label, h, bloch4_to_superop(l4))
    except KeyError as exc:
        raise ConfigError(f"model file misses required field {exc}") from exc
    raise ConfigError(f"unknown model kind {kind!r}")


# ---------------------------------------------------------------------------
# commands


def _emit(source_label, header, rows, verdict, config: RunConfig) -> None:
    suffix = "csv" if config.fmt == "csv" else "json"
    rows_path = config.out / f"{source_label}_rows.{suffix}"
    verdict_path = config.out / f"{source_label}_verdict.json"
    write_rows(rows_path, header, rows, config.fmt)
    write_verdict(verdict_path, verdict)
    cls = verdict["classification"]
    print(
        f"{source_label}: classification={cls['kind']}"
        f" qdb1={_verdict_flag(verdict['qdb1'])}"
        f" qdb2={_verdict_flag(verdict['qdb2'])}"
        f" qfr_max_deviation={verdict['qfr_max_deviation']}"
    )
    print(f"wrote {rows_path} and {verdict_path}")


def _verdict_flag(section) -> str:
    if section is None:
        return "n/a"
    return "pass" if section["passes"] else "fail"


def _example_source(args, config: RunConfig):
    name = args.name
    if name == "a":
        builder = ExampleAParams.fixed_point if args.q_schedule == "fpt" else ExampleAParams.default
        p = builder(args.omega, config.beta_f)
        return (
            ChannelFamilySource("example_a", p.hamiltonian(), lambda tau: example_a_channel(p, tau)),
            lambda tau: example_a_f_factor(p, tau),
        )
    if name == "b":
        pb = ExampleBParams(omega=args.omega, gamma=args.gamma, beta_f=config.beta_f)
        gen = example_b_generator(pb)
        if getattr(args, "save_model", None):
            save_model(gen, Path(args.save_model))
        return SemigroupSource("example_b", pb.hamiltonian(), gen), None
    if name == "c":
        base = example_c_qdb_point(args.mu, args.eta, args.omega, config.beta_f)
        params = dataclasses.replace(base, nu=base.nu * args.nu_scale)
        sup = example_c_generator(params, cptp_tol=config.tol_cptp)
        return SemigroupSource("example_c", params.hamiltonian(), sup), None
    raise ConfigError(f"unknown example {name!r}")


def cmd_example(args, config: RunConfig) -> int:
    source, f_factor = _example_source(args, config)
    header, rows, verdict = build_report(source, config, f_factor)
    verdict["example"] = args.name
    _emit(source.label, header, rows, verdict, config)
    return EXIT_OK


def cmd_check(args, config: RunConfig) -> int:
    source = load_model(args.model)
    header, rows, verdict = build_report(source, config)
    verdict["model"] = str(args.model)
    _emit(source.label, header, rows, verdict, config)
    return EXIT_OK


_SWEEPABLE = {
    "a": ("beta_i", "beta_f", "omega"),
    "b": ("beta_i", "beta_f", "omega", "gamma"),
    "c": ("beta_i", "beta_f", "omega", "mu", "eta", "nu", "alpha", "chi", "zeta"),
    "model": ("beta_i",),
}


def _sweep_source(target: str, param: str, value: float, args, config: RunConfig):
    """Build the swept source; returns (source, config) with overrides applied."""
    if target in ("a", "b", "c"):
        allowed = _SWEEPABLE[target]
    else:
        allowed = _SWEEPABLE["model"]
    if param not in allowed:
        raise UnknownParameter(
            f"parameter {param!r} is not sweepable for {target!r}; choose from {allowed}"
        )
    if param == "beta_i":
        config = dataclasses.replace(config, beta_i=value)
    ns = argparse.Namespace(**vars(args))
    ns.name = target
    if param in ("omega", "gamma", "mu", "eta"):
        setattr(ns, param, value)
    if param == "beta_f":
        config = dataclasses.replace(config, beta_f=value)
    if target in ("a", "b"):
        source, _ = _example_source(ns, config)
    elif target == "c":
        base = example_c_qdb_point(ns.mu, ns.eta, ns.omega, config.beta_f)
        params = dataclasses.replace(base, nu=base.nu * ns.nu_scale)
        if param in ("nu", "alpha", "chi", "zeta"):
            params = dataclasses.replace(params, **{param: value})
        sup = example_c_generator(params, cptp_tol=config.tol_cptp)
        source = SemigroupSource("example_c", params.hamiltonian(), sup)
    else:
        source = load_model(target)
    return source, config


def cmd_sweep(args, config: RunConfig) -> int:
    values = parse_range(args.range)
    header = [
        "parameter",
        "value",
        "classification",
        "beta_f",
        "qdb1_passes",
        "qdb1_max_residual",
        "qdb2_passes",
        "qdb2_max_residual",
        "qfr_max_deviation",
    ]
    rows = []
    for value in values:
        source, cfg = _sweep_source(args.target, args.parameter, float(value), args, config)
        _, _, verdict = build_report(source, cfg)
        q1, q2 = verdict["qdb1"], verdict["qdb2"]
        rows.append(
            [
                args.parameter,
                value,
                verdict["classification"]["kind"],
                verdict["classification"]["beta_f"],
                None if q1 is None else q1["passes"],
                None if q1 is None else q1["max_residual"],
                None if q2 is None else q2["passes"],
                None if q2 is None else q2["max_residual"],
                verdict["qfr_max_deviation"],
            ]
        )
    target_tag = Path(args.target).stem if args.target.endswith(".json") else args.target
    path = config.out / f"sweep_{target_tag}_{args.parameter}.csv"
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(x if isinstance(x, str) else fmt_float(x) for x in row))
    _write_text(path, "\n".join(lines) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau-grid", default="log:0.01:50:40", help="log:LO:HI:N or comma list")
    parser.add_argument("--s-grid", default="0,0.25,0.5,0.75,1", help="comma list in [0, 1]")
    parser.add_argument("--beta-i", type=float, default=2.0)
    parser.add_argument("--beta-f", type=float, default=1.0)
    parser.add_argument("--tol-qdb", type=float, default=1e-9)
    parser.add_argument("--tol-qfr", type=float, default=1e-9)
    parser.add_argument("--tol-cptp", type=float, default=1e-9)
    parser.add_argument("--out", default="reports")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_example_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega", type=float, default=1.0)
    parser.add_argument("--gamma", type=float, default=1.0, help="scenario b damping rate")
    parser.add_argument("--mu", type=float, default=0.5, help="scenario c base excitation rate")
    parser.add_argument("--eta", type=float, default=0.1, help="scenario c dephasing rate")
    parser.add_argument(
        "--nu-scale",
        type=float,
        default=1.1,
        help="scenario c: scale nu away from the balanced point",
    )
    parser.add_argument(
        "--q-schedule",
        choices=("default", "fpt"),
        default="default",
        help="scenario a: saturating or constant bias schedule",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdblab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_example = sub.add_parser("example", help="run a built-in scenario")
    p_example.add_argument("name", choices=("a", "b", "c"))
    p_example.add_argument("--save-model", default=None, help="also write the model as JSON")
    _add_example_params(p_example)
    _add_common(p_example)
    p_example.set_defaults(func=cmd_example)

    p_check = sub.add_parser("check", help="verify a model file")
    p_check.add_argument("model")
    _add_common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter of a scenario or model")
    p_sweep.add_argument("target", help="a, b, c, or a model file path")
    p_sweep.add_argument("--parameter", required=True)
    p_sweep.add_argument("--range", required=True, help="START:STOP:COUNT")
    _add_example_params(p_sweep)
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _config_from_args(args)
        return args.func(args, config)
    except (ConfigError, UnknownParameter) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MODEL_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (InternalCheckError, InconclusiveHorizon) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
