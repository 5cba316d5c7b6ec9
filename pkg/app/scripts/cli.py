"""
asymcalc: batch front end for the asymmetry calculus.

Results go to --out (or stdout); human-readable summaries go to stderr. Exit codes: 0 success,
1 unreadable input, 2 precondition violation, 3 certification failure.
"""

import argparse
import json
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from app.core.amajor import a_majorizes
from app.core.channels import build_conversion, completeness_defect, verify_covariant
from app.core.entbridge import correspondence_rows, entropy_rate_series
from app.core.errors import CertificationError, PreconditionError
from app.core.family_manager import FamilyManager
from app.core.logger import get_cli_logger
from app.core.qfi import f_max_mixed_upper, f_max_pure, f_min_pure, one_shot_convertible, qfi_mixed, qfi_pure
from app.core.settings import settings
from app.core.spectra import cbit_poisson_chain, iid_tp_certificate, smooth_f_max, smooth_f_min
from app.models.result_models import RateDirection
from app.models.sequence_models import Backend
from app.models.state_models import EnergyDistribution
from app.storage import json_codec
from app.storage.result_writer import write_csv, write_json
from app.utility.dists import coherence_bit

logger = get_cli_logger()
console = Console(stderr=True)

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_CERTIFICATION = 0, 1, 2, 3

RATE_COLUMNS = ["m", "raw_value", "per_m", "bound_kind"]
CERTIFICATE_COLUMNS = ["m", "d_tv", "bound"]
CHAIN_COLUMNS = ["m", "d_iid_tp", "d_tp_poisson", "comparison_bound", "unitary_distance_bound"]
CORRESPONDENCE_COLUMNS = ["index", "rta_convertible", "rta_oracle", "locc_convertible", "locc_oracle"]
ENTROPY_COLUMNS = ["m", "s_rate", "s_max_rate", "s_min_rate"]


class Command(str, Enum):
    QFI = "qfi"
    FMAX = "fmax"
    FMIN = "fmin"
    AMAJ = "amaj"
    CONVERT = "convert"
    CHANNEL_VERIFY = "channel-verify"
    SMOOTH = "smooth"
    RATES = "rates"
    BRIDGE = "bridge"
    CERTIFY_TP = "certify-tp"
    CHAIN = "chain"


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: Command
    backend: Backend = Field(default_factory=lambda: Backend(settings.default_backend))
    tol: float = Field(default_factory=lambda: settings.default_tol, gt=0.0)
    eps: float = Field(0.05, ge=0.0, lt=1.0)
    window: Optional[int] = Field(None, ge=1)
    trunc: Optional[int] = Field(None, ge=1)
    seed: int = Field(default_factory=lambda: settings.seed)
    out: Optional[Path] = None
    families: tuple[str, ...] = ()
    ms: tuple[int, ...] = ()
    direction: RateDirection = RateDirection.SUP
    budget: Optional[int] = Field(None, ge=1)
    workers: Optional[int] = Field(None, ge=1)
    anc_levels: int = Field(4, ge=1)
    restarts: int = Field(4, ge=0)
    demo: str = "correspondence"
    count: int = Field(40, ge=1)

    @field_validator("ms", mode="before")
    @classmethod
    def _parse_ms(cls, value: Any) -> tuple[int, ...]:
        if isinstance(value, str):
            return tuple(int(v) for v in value.split(",") if v.strip())
        return tuple(value or ())


# ---- input helpers ----------------------------------------------------------------------


def _with_trunc(obj: dict, config: RunConfig) -> dict:
    if config.trunc and "poisson" in obj and "trunc" not in obj:
        return {**obj, "trunc": config.trunc}
    return obj


def _state(path: str, config: RunConfig):
    return json_codec.decode_state(_with_trunc(json_codec.load_json(path), config))


def _distribution(path: str, config: RunConfig) -> EnergyDistribution:
    obj = _with_trunc(json_codec.load_json(path), config)
    if "distribution" in obj:
        return json_codec.decode_distribution(_with_trunc(obj["distribution"], config))
    if any(key in obj for key in ("amps", "vector", "basis", "coherence_bit")):
        return json_codec.decode_state(obj).energy_distribution(config.backend)
    return json_codec.decode_distribution(obj)


def _need(inputs: Sequence[str], count: int, command: Command) -> None:
    if len(inputs) < count:
        raise PreconditionError(f"{command.value} needs {count} input file(s), got {len(inputs)}")


def _summary(title: str, rows: dict) -> None:
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Field")
    table.add_column("Value", justify="right", style="green")
    for key, value in rows.items():
        table.add_row(key, str(value))
    console.print(Panel(table, title=title, border_style="cyan"))


# ---- commands ----------------------------------------------------------------------------


def _cmd_qfi(config: RunConfig, inputs: Sequence[str]) -> str:
    _need(inputs, 1, config.command)
    obj = json_codec.load_json(inputs[0])
    if "matrix" in obj:
        value = qfi_mixed(json_codec.decode_density(obj))
    else:
        value = qfi_pure(_state(inputs[0], config))
    _summary("QFI", {"value": f"{value:.12g}"})
    return write_json({"qfi": value}, config.out)


def _cmd_fmax(config: RunConfig, inputs: Sequence[str]) -> str:
    _need(inputs, 1, config.command)
    obj = json_codec.load_json(inputs[0])
    if "matrix" in obj:
        bracket = f_max_mixed_upper(
            json_codec.decode_density(obj), config.anc_levels, config.restarts, tol=config.tol, seed=config.seed
        )
    else:
        bracket = f_max_pure(_state(inputs[0], config), config.tol, config.backend)
    _summary("F_max", {"value": bracket.value, "kind": bracket.kind.value, "unbounded": bracket.unbounded})
    return write_json(bracket, config.out)


def _cmd_fmin(config: RunConfig, inputs: Sequence[str]) -> str:
    _need(inputs, 1, config.command)
    bracket = f_min_pure(_state(inputs[0], config), config.tol, config.backend)
    _summary("F_min", {"value": bracket.value, "kind": bracket.kind.value})
    return write_json(bracket, config.out)


def _cmd_amaj(config: RunConfig, inputs: Sequence[str]) -> str:
    _need(inputs, 2, config.command)
    verdict = a_majorizes(_distribution(inputs[0], config), _distribution(inputs[1], config), config.window, config.backend)
    _summary("a-majorization", {"holds": verdict.holds, "mode": verdict.mode.value, "marginal": verdict.marginal})
    if verdict.marginal:
        raise CertificationError("float verdict is marginal; rerun with --backend rational")
    return write_json(verdict, config.out)


def _cmd_convert(config: RunConfig, inputs: Sequence[str]) -> str:
    _need(inputs, 2, config.command)
    psi, phi = _state(inputs[0], config), _state(inputs[1], config)
    verdict = one_shot_convertible(psi, phi, config.window, config.backend)
    channel = None
    if verdict.holds and psi.has_zero_phases and phi.has_zero_phases:
        channel = json_codec.encode_channel(build_conversion(psi, phi, config.backend))
    _summary("Conversion", {"holds": verdict.holds, "channel": channel is not None})
    return write_json({"verdict": verdict, "channel": channel}, config.out)


def _cmd_channel_verify(config: RunConfig, inputs: Sequence[str]) -> str:
    _need(inputs, 1, config.command)
    channel = json_codec.load_channel(inputs[0])
    defect = completeness_defect(channel)
    covariant = verify_covariant(channel, seed=config.seed)
    _summary("Channel", {"covariant": covariant, "completeness_defect": f"{defect:.3e}"})
    return write_json({"covariant": covariant, "completeness_defect": defect}, config.out)


def _cmd_smooth(config: RunConfig, inputs: Sequence[str]) -> str:
    _need(inputs, 1, config.command)
    psi = _state(inputs[0], config)
    upper = smooth_f_max(psi, config.eps, config.budget)
    lower = smooth_f_min(psi, config.eps, config.budget)
    _summary(f"Smoothing eps={config.eps:g}", {"f_max (upper)": upper.value, "f_min (lower)": lower.value})
    return write_json({"eps": config.eps, "f_max": upper, "f_min": lower}, config.out)


def _cmd_rates(config: RunConfig, inputs: Sequence[str]) -> str:
    if not config.ms:
        raise PreconditionError("rates needs --ms")
    manager = FamilyManager()
    if config.families:
        manager.add_families(list(config.families))
    else:
        manager.add_configured_families()
    manager.add_ms(list(config.ms))
    estimates = manager.run_rates(config.eps, config.direction, config.budget, config.workers)

    single = len(estimates) == 1
    rows = []
    for name, estimate in estimates.items():
        for point in estimate.per_m:
            row = {"m": point.m, "raw_value": point.raw_value, "per_m": point.per_m, "bound_kind": point.bound_kind}
            rows.append(row if single else {"family": name, **row})

    table = Table(title=f"Spectral rates ({config.direction.value}, eps={config.eps:g})", header_style="bold magenta")
    table.add_column("Family")
    table.add_column("Rate", justify="right", style="green")
    table.add_column("Spread", justify="right")
    for name, estimate in estimates.items():
        table.add_row(name, f"{estimate.extrapolated:.6g}", f"{estimate.spread:.3g}")
    console.print(table)

    columns = RATE_COLUMNS if single else ["family"] + RATE_COLUMNS
    text = write_csv(rows, columns, config.out)
    if config.out is not None:
        sys.stdout.write(json_codec.dumps(manager.aggregate_results(estimates)) + "\n")
    return text


def _cmd_bridge(config: RunConfig, inputs: Sequence[str]) -> str:
    if config.demo == "correspondence":
        rows = correspondence_rows(config.count, config.seed)
        agree = sum(r.rta_convertible == r.rta_oracle and r.locc_convertible == r.locc_oracle for r in rows)
        _summary("Correspondence", {"rows": len(rows), "agreeing": agree})
        return write_csv(rows, CORRESPONDENCE_COLUMNS, config.out)
    if config.demo == "entropy-rates":
        rows = entropy_rate_series((0.5, 0.5), config.ms or (4, 8, 12, 16, 20), config.eps)
        return write_csv(rows, ENTROPY_COLUMNS, config.out)
    raise PreconditionError(f"unknown bridge demo {config.demo!r}")


def _cmd_certify_tp(config: RunConfig, inputs: Sequence[str]) -> str:
    p = _distribution(inputs[0], config) if inputs else coherence_bit().energy_distribution()
    rows = iid_tp_certificate(p, config.ms or (16, 64, 256, 1024))
    _summary("Translated Poisson", {f"m={r.m}": f"{r.d_tv:.6f} <= {r.bound:.6f}" for r in rows})
    return write_csv(rows, CERTIFICATE_COLUMNS, config.out)


def _cmd_chain(config: RunConfig, inputs: Sequence[str]) -> str:
    rows = cbit_poisson_chain(config.ms or (16, 64, 256))
    return write_csv(rows, CHAIN_COLUMNS, config.out)


COMMANDS = {
    Command.QFI: _cmd_qfi,
    Command.FMAX: _cmd_fmax,
    Command.FMIN: _cmd_fmin,
    Command.AMAJ: _cmd_amaj,
    Command.CONVERT: _cmd_convert,
    Command.CHANNEL_VERIFY: _cmd_channel_verify,
    Command.SMOOTH: _cmd_smooth,
    Command.RATES: _cmd_rates,
    Command.BRIDGE: _cmd_bridge,
    Command.CERTIFY_TP: _cmd_certify_tp,
    Command.CHAIN: _cmd_chain,
}


def run(config: RunConfig, inputs: Sequence[str]) -> int:
    """Dispatch one command; returns the process exit code."""
    previous_backend = settings.default_backend
    settings.default_backend = config.backend.value
    try:
        logger.info(f"🚀 RUN | command={config.command.value} backend={config.backend.value} inputs={list(inputs)}")
        text = COMMANDS[config.command](config, inputs)
        if config.out is None:
            sys.stdout.write(text)
        return EXIT_OK
    except json.JSONDecodeError as e:
        logger.error(f"❌ INPUT | malformed JSON at line {e.lineno} column {e.colno}: {e.msg}")
        console.print(f"[red]malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}[/red]")
        return EXIT_INPUT
    except (FileNotFoundError, KeyError, TypeError) as e:
        logger.error(f"❌ INPUT | {type(e).__name__}: {e}")
        console.print(f"[red]unreadable input: {e}[/red]")
        return EXIT_INPUT
    except (PreconditionError, ValidationError) as e:
        logger.error(f"❌ PRECONDITION | {e}")
        console.print(f"[red]precondition violated: {e}[/red]")
        return EXIT_PRECONDITION
    except CertificationError as e:
        logger.error(f"❌ CERTIFICATION | {e}")
        console.print(f"[red]certification failed: {e}[/red]")
        return EXIT_CERTIFICATION
    finally:
        settings.default_backend = previous_backend


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymcalc", description="Resource theory of asymmetry calculator")
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("inputs", nargs="*", help="state, distribution or channel JSON files")
    parser.add_argument("--backend", choices=[b.value for b in Backend], default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--eps", type=float, default=0.05)
    parser.add_argument("--window", type=int, default=None)
    parser.add_argument("--trunc", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--family", action="append", default=[], help="repeatable; defaults to settings.families")
    parser.add_argument("--ms", default="", help="comma separated, e.g. 8,16,32")
    parser.add_argument("--dir", dest="direction", choices=[d.value for d in RateDirection], default="sup")
    parser.add_argument("--budget", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--anc-levels", type=int, default=4)
    parser.add_argument("--restarts", type=int, default=4)
    parser.add_argument("--demo", choices=["correspondence", "entropy-rates"], default="correspondence")
    parser.add_argument("--count", type=int, default=40)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    options = {
        "command": args.command,
        "eps": args.eps,
        "window": args.window,
        "trunc": args.trunc,
        "out": args.out,
        "families": tuple(args.family),
        "ms": args.ms,
        "direction": args.direction,
        "budget": args.budget,
        "workers": args.workers,
        "anc_levels": args.anc_levels,
        "restarts": args.restarts,
        "demo": args.demo,
        "count": args.count,
    }
    for key in ("backend", "tol", "seed"):
        if getattr(args, key) is not None:
            options[key] = getattr(args, key)
    try:
        config = RunConfig(**options)
    except ValidationError as e:
        console.print(f"[red]invalid options: {e}[/red]")
        return EXIT_PRECONDITION
    return run(config, args.inputs)


if __name__ == "__main__":
    sys.exit(main())
