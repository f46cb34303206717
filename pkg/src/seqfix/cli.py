"""Config-driven batch front end.

Reads a JSON list of problems, runs each one (certify / solve / trace /
secelean / truncate / compare), writes one CSV table per problem plus a
config echo into the output directory, and prints one summary line per
problem. Exit status: 0 on success, 1 on a config error, 2 when a problem
that needs certification turns out uncertifiable, 3 when a certified bound
is violated during a run.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .maps import FiniteArityMap, LinearSeqMap, SeqMap, SupHalfMap, embed_finite, empirical_lip_lower_bound
from .sequences import BoundedSeq, ensure_finite
from .solver import (
    BoundViolationError,
    IterationTrace,
    UncertifiedMapError,
    find_p_certificate,
    find_sup_certificate,
    generalized_iterates,
    secelean_iterates,
    solve_fixed_point,
    truncation_study,
)

_MODES = ("certify", "solve", "trace", "secelean", "truncate", "compare")
_ID_PATTERN = re.compile(r"^[A-Za-z0-9._-]+$")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNCERTIFIED = 2
EXIT_BOUND_VIOLATION = 3


class ConfigError(ValueError):
    """Malformed or incomplete problem configuration."""


def _fmt(v: float | None) -> str:
    return "" if v is None else format(float(v), ".17g")


@dataclass(frozen=True)
class ProblemConfig:
    """One problem: a map, a starting sequence, a tolerance, and a mode."""

    id: str
    map_spec: dict
    initial_prefix: tuple[float, ...]
    initial_tail: float
    tolerance: float
    mode: str
    k_max: int | None = None
    n_max: int | None = None
    base: float | None = None
    q0: float | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> ProblemConfig:
        if not isinstance(raw, dict):
            raise ConfigError(f"problem entry must be an object, got {type(raw).__name__}")
        try:
            pid = raw["id"]
            map_spec = raw["map"]
            initial = raw["initial"]
            tolerance = float(raw["tolerance"])
            mode = raw["mode"]
        except KeyError as e:
            raise ConfigError(f"problem missing required field {e.args[0]!r}") from None
        if not isinstance(pid, str) or not _ID_PATTERN.match(pid):
            raise ConfigError(f"problem id must match {_ID_PATTERN.pattern}, got {pid!r}")
        if mode not in _MODES:
            raise ConfigError(f"unknown mode {mode!r} for problem {pid!r}")
        if not tolerance > 0.0:
            raise ConfigError(f"tolerance must be positive for problem {pid!r}")
        map_spec = _normalize_map_spec(pid, map_spec)
        if not isinstance(initial, dict):
            raise ConfigError(f"initial must be an object for problem {pid!r}")
        prefix = tuple(float(v) for v in initial.get("prefix", []))
        tail = float(initial.get("tail", 0.0))
        k_max = raw.get("k_max")
        n_max = raw.get("n_max")
        base = raw.get("base")
        q0 = raw.get("q0")
        if mode in ("trace", "secelean", "compare"):
            if k_max is None or int(k_max) < 1:
                raise ConfigError(f"mode {mode!r} needs a positive k_max for problem {pid!r}")
            k_max = int(k_max)
        if mode == "truncate":
            if n_max is None or int(n_max) < 1:
                raise ConfigError(f"mode 'truncate' needs a positive n_max for problem {pid!r}")
            if base is None:
                raise ConfigError(f"mode 'truncate' needs a base point for problem {pid!r}")
            n_max = int(n_max)
            base = ensure_finite(base, "base")
        if q0 is not None:
            q0 = float(q0)
            if not 0.0 < q0 < 1.0:
                raise ConfigError(f"q0 must lie in (0, 1) for problem {pid!r}")
        return cls(pid, map_spec, prefix, tail, tolerance, mode,
                   k_max=None if k_max is None else int(k_max),
                   n_max=None if n_max is None else int(n_max),
                   base=base, q0=q0)

    def to_dict(self) -> dict:
        out: dict = {
            "id": self.id,
            "map": self.map_spec,
            "initial": {"prefix": list(self.initial_prefix), "tail": self.initial_tail},
            "tolerance": self.tolerance,
            "mode": self.mode,
        }
        for key in ("k_max", "n_max", "base", "q0"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    def initial_seq(self) -> BoundedSeq:
        return BoundedSeq(self.initial_prefix, self.initial_tail)

    def build_map(self) -> SeqMap:
        kind, params = next(iter(self.map_spec.items()))
        if kind == "linear":
            return LinearSeqMap(
                head_coeffs=tuple(params["head_coeffs"]),
                tail_coeff=params["tail_coeff"],
                tail_ratio=params["tail_ratio"],
                offset=params["offset"],
            )
        if kind == "sup_half":
            return SupHalfMap()
        if kind == "presic":
            return embed_finite(_build_finite_map(params))
        raise ConfigError(f"unknown map kind {kind!r}")


def _normalize_map_spec(pid: str, spec: object) -> dict:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"map for problem {pid!r} must be an object with exactly one kind")
    kind, params = next(iter(spec.items()))
    if not isinstance(params, dict):
        raise ConfigError(f"map parameters for problem {pid!r} must be an object")
    if kind == "linear":
        norm = {
            "head_coeffs": [float(v) for v in params.get("head_coeffs", [])],
            "tail_coeff": float(params.get("tail_coeff", 0.0)),
            "tail_ratio": float(params.get("tail_ratio", 0.0)),
            "offset": float(params.get("offset", 0.0)),
        }
        if abs(norm["tail_ratio"]) >= 1.0:
            raise ConfigError(f"linear map for problem {pid!r} needs |tail_ratio| < 1")
        return {"linear": norm}
    if kind == "sup_half":
        if params:
            raise ConfigError(f"sup_half map for problem {pid!r} takes no parameters")
        return {"sup_half": {}}
    if kind == "presic":
        rule = params.get("rule")
        if rule != "affine":
            raise ConfigError(f"unknown presic rule {rule!r} for problem {pid!r} (supported: 'affine')")
        coeffs = [float(v) for v in params.get("coeffs", [])]
        if not coeffs:
            raise ConfigError(f"presic map for problem {pid!r} needs nonempty coeffs")
        arity = int(params.get("arity", len(coeffs)))
        if arity != len(coeffs):
            raise ConfigError(f"presic arity must match len(coeffs) for problem {pid!r}")
        return {"presic": {"rule": "affine", "arity": arity, "coeffs": coeffs,
                           "offset": float(params.get("offset", 0.0))}}
    raise ConfigError(f"unknown map kind {kind!r} for problem {pid!r}")


def _build_finite_map(params: dict) -> FiniteArityMap:
    coeffs = tuple(params["coeffs"])
    offset = params["offset"]

    def rule(*args: float) -> float:
        return sum(c * a for c, a in zip(coeffs, args)) + offset

    return FiniteArityMap(len(coeffs), rule, sum(abs(c) for c in coeffs))


def parse_config(text: str) -> list[ProblemConfig]:
    """Parse and validate a JSON config document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}") from None
    if not isinstance(raw, dict) or "problems" not in raw:
        raise ConfigError("config must be an object with a 'problems' list")
    problems = raw["problems"]
    if not isinstance(problems, list):
        raise ConfigError("'problems' must be a list")
    parsed = []
    for entry in problems:
        try:
            parsed.append(ProblemConfig.from_dict(entry))
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid problem entry: {e}") from None
    seen: set[str] = set()
    for p in parsed:
        if p.id in seen:
            raise ConfigError(f"duplicate problem id {p.id!r}")
        seen.add(p.id)
    return parsed


def config_to_dict(problems: list[ProblemConfig]) -> dict:
    """Normalized config document; reparsing it yields equal ProblemConfigs."""
    return {"problems": [p.to_dict() for p in problems]}


def emit_trace(trace: IterationTrace, path: Path | str) -> None:
    """Write an iteration trace as CSV: header k,x_k,bound,residual.

    Floats carry 17 significant digits so a reparse reproduces them exactly;
    the bound field is empty for uncertified traces.
    """
    lines = ["k,x_k,bound,residual"]
    for s in trace.steps:
        lines.append(f"{s.k},{_fmt(s.value)},{_fmt(s.bound)},{_fmt(s.residual)}")
    _write_lines(path, lines)


def _write_lines(path: Path | str, lines: list[str]) -> None:
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise OSError(f"cannot write output table {path}: {e}") from e


def _run_problem(p: ProblemConfig, out_dir: Path, seed: int) -> tuple[str, int]:
    f = p.build_map()
    table = out_dir / f"{p.id}.csv"

    if p.mode == "certify":
        cert = find_sup_certificate(f)
        lines = ["family,q,p,lip,empirical_lower_bound"]
        if cert is None:
            _write_lines(table, lines)
            return f"{p.id} certify UNCERTIFIED", EXIT_OK
        emp = empirical_lip_lower_bound(f, cert.q, trials=200, seed=seed)
        lines.append(f"sup,{_fmt(cert.q)},,{_fmt(cert.lip)},{_fmt(emp)}")
        if p.q0 is not None and isinstance(f, LinearSeqMap):
            pc = find_p_certificate(f, p.q0)
            if pc is not None:
                emp_p = empirical_lip_lower_bound(f, pc.q, p=pc.p, trials=200, seed=seed)
                lines.append(f"p,{_fmt(pc.q)},{_fmt(pc.p)},{_fmt(pc.lip)},{_fmt(emp_p)}")
        _write_lines(table, lines)
        return f"{p.id} certify OK q={cert.q:.12g} lip={cert.lip:.12g}", EXIT_OK

    if p.mode == "solve":
        cert = find_sup_certificate(f)
        if cert is None:
            return f"{p.id} solve FAILED uncertified", EXIT_UNCERTIFIED
        sol = solve_fixed_point(f, p.initial_seq(), cert, p.tolerance)
        emit_trace(sol.trace, table)
        return f"{p.id} solve x_star={sol.value:.12g} k_used={sol.k_used}", EXIT_OK

    if p.mode == "trace":
        cert = find_sup_certificate(f)
        trace = generalized_iterates(f, p.initial_seq(), p.k_max, cert)
        emit_trace(trace, table)
        return f"{p.id} trace x_final={trace.steps[-1].value:.12g} k_used={p.k_max}", EXIT_OK

    if p.mode == "secelean":
        rows = secelean_iterates(f, p.initial_seq(), p.k_max)
        lines = ["k,y_k,bound"]
        lines += [f"{r.k},{_fmt(r.value)},{_fmt(r.bound)}" for r in rows]
        _write_lines(table, lines)
        return f"{p.id} secelean y_final={rows[-1].value:.12g} k_used={p.k_max}", EXIT_OK

    if p.mode == "truncate":
        cert = find_sup_certificate(f)
        if cert is None:
            return f"{p.id} truncate FAILED uncertified", EXIT_UNCERTIFIED
        report = truncation_study(f, cert, p.base, p.n_max, p.tolerance)
        lines = ["n,x_n,error,bound"]
        lines += [f"{r.n},{_fmt(r.value)},{_fmt(r.error)},{_fmt(r.bound)}" for r in report.rows]
        _write_lines(table, lines)
        last = report.rows[-1]
        return f"{p.id} truncate x_star={report.reference:.12g} n_max={last.n} error={last.error:.12g}", EXIT_OK

    # compare: generalized iterates side by side with diagonal-map iterates
    gen = generalized_iterates(f, p.initial_seq(), p.k_max)
    sec = secelean_iterates(f, p.initial_seq(), p.k_max)
    lines = ["k,x_k,y_k"]
    lines.append(f"0,,{_fmt(sec[0].value)}")
    for step in gen.steps:
        lines.append(f"{step.k},{_fmt(step.value)},{_fmt(sec[step.k].value)}")
    _write_lines(table, lines)
    return (
        f"{p.id} compare x_final={gen.steps[-1].value:.12g} y_final={sec[-1].value:.12g}",
        EXIT_OK,
    )


def run(config_path: str, out_dir: str, seed: int = 0) -> int:
    """Execute every problem in the config; returns the process exit status."""
    try:
        text = Path(config_path).read_text()
    except OSError as e:
        print(f"error: cannot read config {config_path}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        problems = parse_config(text)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if problems:
        _write_lines(out / "config_echo.json",
                     [json.dumps(config_to_dict(problems), indent=2, sort_keys=True)])
    worst = EXIT_OK
    for p in problems:
        try:
            summary, status = _run_problem(p, out, seed)
        except BoundViolationError as e:
            summary, status = f"{p.id} {p.mode} FAILED bound-violation: {e}", EXIT_BOUND_VIOLATION
        except (UncertifiedMapError, ValueError) as e:
            summary, status = f"{p.id} {p.mode} FAILED {e}", EXIT_UNCERTIFIED
        print(summary)
        worst = max(worst, status)
    return worst


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="seqfix",
        description="Run fixed-point certification and iteration problems from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON problem list")
    parser.add_argument("--out", default=".", help="directory for output CSV tables")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")
    args = parser.parse_args(argv)
    sys.exit(run(args.config, args.out, args.seed))


if __name__ == "__main__":
    main()
