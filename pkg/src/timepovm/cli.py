"""Command-line surface: model builders, dilation and bound checks, and the
end-to-end certification of the positive-spectrum constants.

Every command prints one record per line as key=value fields, ends with a
summary record, and returns 0 when all checks pass, 1 when a mathematical
check fails, and 2 on usage or input errors.  All randomness is seeded, so
every published number is reproducible from the command line that made it.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import dilation as dila
from . import uncertainty as unc
from .formats import (
    PovmFormatError,
    atomic_write_text,
    bound_record,
    format_record,
    load_povm,
    save_povm,
    save_state_table,
    spectrum_table,
)
from .model import (
    EnergyGrid,
    build_halfline_povm,
    build_sharp_time_povm,
    default_fullline_model,
    default_halfline_model,
    gaussian_state,
    random_smooth_state,
    transported_minimal_state,
    validate_povm,
    vector_generated_povm,
)
from .special import airy_zero, universal_constant
from .variational import (
    DomainTooSmallError,
    airy_operator_spectrum,
    minimal_state,
    minimize_combined,
    minimize_product,
    verify_min_identity_chain,
)

__all__ = ["main", "entrypoint"]

# printed reference values the certification reports against
_PRINTED_LAMBDA1 = 2.338
_PRINTED_D = 1.376
_PRINTED_PRODUCT = 1.8935
_PRINTED_COMBINED = 2.25
_PRINTED_WEAKER = 2.1434


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (value > 0.0 and np.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timepovm",
        description="Covariant time observables: certification, dilation, bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0, help="base seed for all randomness")
        p.add_argument("--out", default=None, help="also write the report (or fixtures) here")
        p.add_argument(
            "--tolerance-scale",
            type=_positive_float,
            default=1.0,
            help="multiply every pass/fail tolerance by this factor",
        )

    p = sub.add_parser("airy-certify", help="end-to-end certification of the bound constants")
    p.add_argument("--h", type=_positive_float, default=1e-3, help="grid spacing")
    p.add_argument("--domain-l", type=_positive_float, default=20.0, help="domain length")
    common(p)

    p = sub.add_parser("dilate", help="dilate an observable file and check the axioms")
    p.add_argument("povm", help="observable file to read")
    common(p)

    p = sub.add_parser("bounds", help="certify uncertainty bounds on a model")
    p.add_argument("--model", choices=("fullline", "halfline"), default="fullline")
    p.add_argument(
        "--states",
        default="gaussian",
        help="state family: gaussian | minimal | random:SEED | random:FIRST..LAST",
    )
    p.add_argument(
        "--check",
        choices=("auto", "time-energy", "positive-energy", "combined", "all"),
        default="auto",
        help="which bound(s) to certify; auto picks the ones defined for the model",
    )
    p.add_argument("--n", type=_positive_int, default=None, help="energy grid size")
    p.add_argument("--de", type=_positive_float, default=None, help="energy grid spacing")
    common(p)

    p = sub.add_parser("emit-fixtures", help="write canonical observable files and tables")
    p.add_argument("--n", type=_positive_int, default=64, help="bins in the fixture observables")
    p.add_argument("--h", type=_positive_float, default=1e-3, help="spacing of the state table")
    p.add_argument("--domain-l", type=_positive_float, default=20.0, help="domain of the state table")
    common(p)
    return parser


# above this spacing the discrete functionals develop lattice-scale minima
# below the continuum infimum, and the two minimization routes stop
# describing the same object; agreement is then reported but not certified
_ROUTE_AGREEMENT_H_MAX = 5e-3


def _route_agreement(rep, name: str, spectral_value: float, descent_result, h: float, scale: float) -> None:
    rel = abs(descent_result.value - spectral_value) / spectral_value
    record = {"check": f"{name}-route-agreement", "relative": rel}
    if h <= _ROUTE_AGREEMENT_H_MAX:
        tol = 1e-6 * scale + 0.1 * h * h
        record["tolerance"] = tol
        record["pass"] = rel <= tol and descent_result.converged
    else:
        record["regime"] = "lattice-artifact"
    rep.emit(record)


class _Report:
    """Collects records, prints them as they arrive, tracks failures."""

    def __init__(self, command: str):
        self.command = command
        self.lines: list[str] = []
        self.checks = 0
        self.failures = 0

    def emit(self, record: dict) -> None:
        if "pass" in record:
            self.checks += 1
            if not record["pass"]:
                self.failures += 1
        line = format_record(record)
        self.lines.append(line)
        print(line)

    def close(self, out_path: str | None) -> int:
        summary = {
            "summary": self.command,
            "checks": self.checks,
            "failures": self.failures,
        }
        line = format_record(summary)
        self.lines.append(line)
        print(line)
        if out_path is not None:
            atomic_write_text(out_path, "\n".join(self.lines) + "\n")
        return 0 if self.failures == 0 else 1


def cmd_airy_certify(args: argparse.Namespace) -> int:
    rep = _Report("airy-certify")
    h, L, scale = args.h, args.domain_l, args.tolerance_scale
    # tolerances widen with h^2 so coarse grids still certify at their own
    # attainable precision; at the reference spacing 1e-3 the extra term is
    # far below the printed-precision targets
    eigs = airy_operator_spectrum(h, L, 1.0, 3)
    zeros = [airy_zero(i) for i in (1, 2, 3)]
    for i, (ev, ref) in enumerate(zip(eigs, zeros), start=1):
        rep.emit({"airy_level": i, "eigenvalue": float(ev), "airy_zero": ref, "error": float(ev - ref)})

    lam1 = float(eigs[0])
    tol = 1e-3 * scale + 2.0 * h * h
    rep.emit(
        {
            "check": "ground-eigenvalue",
            "value": lam1,
            "printed": _PRINTED_LAMBDA1,
            "error": abs(lam1 - _PRINTED_LAMBDA1),
            "tolerance": tol,
            "pass": abs(lam1 - _PRINTED_LAMBDA1) <= tol,
        }
    )
    tol = 1e-6 * scale + 0.2 * h * h
    rep.emit(
        {
            "check": "eigenvalue-vs-zero",
            "value": lam1,
            "reference": zeros[0],
            "error": abs(lam1 - zeros[0]),
            "tolerance": tol,
            "pass": abs(lam1 - zeros[0]) <= tol,
        }
    )
    d = universal_constant()
    tol = 1e-3 * scale + h * h
    rep.emit(
        {
            "check": "universal-constant",
            "value": d,
            "printed": _PRINTED_D,
            "error": abs(d - _PRINTED_D),
            "tolerance": tol,
            "pass": abs(d - _PRINTED_D) <= tol,
        }
    )

    # beyond the agreement regime the descent value is reported but not
    # certified, so a short iteration budget is enough there
    budget = 100000 if h <= _ROUTE_AGREEMENT_H_MAX else 4000
    spectral = minimize_product(h, L, method="spectral")
    descent = minimize_product(h, L, method="descent", seed=args.seed, max_iter=budget)
    rep.emit({"minimize": "product", "route": "spectral", "value": spectral.value})
    rep.emit(
        {
            "minimize": "product",
            "route": "descent",
            "value": descent.value,
            "iterations": descent.iterations,
            "converged": descent.converged,
        }
    )
    tol = 5e-4 * scale + h * h
    rep.emit(
        {
            "check": "product-infimum",
            "value": spectral.value,
            "printed": _PRINTED_PRODUCT,
            "error": abs(spectral.value - _PRINTED_PRODUCT),
            "tolerance": tol,
            "pass": abs(spectral.value - _PRINTED_PRODUCT) <= tol,
        }
    )
    _route_agreement(rep, "product", spectral.value, descent, h, scale)

    spectral_c = minimize_combined(h, L, method="spectral")
    descent_c = minimize_combined(h, L, method="descent", seed=args.seed, max_iter=budget)
    rep.emit({"minimize": "combined", "route": "spectral", "value": spectral_c.value})
    rep.emit(
        {
            "minimize": "combined",
            "route": "descent",
            "value": descent_c.value,
            "iterations": descent_c.iterations,
            "converged": descent_c.converged,
        }
    )
    tol = 1e-2 * scale + h * h
    rep.emit(
        {
            "check": "combined-infimum",
            "value": spectral_c.value,
            "printed": _PRINTED_COMBINED,
            "error": abs(spectral_c.value - _PRINTED_COMBINED),
            "tolerance": tol,
            "pass": abs(spectral_c.value - _PRINTED_COMBINED) <= tol,
        }
    )
    _route_agreement(rep, "combined", spectral_c.value, descent_c, h, scale)
    weaker = d * d + 0.25
    tol = 3e-3 * scale + h * h
    rep.emit(
        {
            "check": "weaker-combined-rhs",
            "value": weaker,
            "printed": _PRINTED_WEAKER,
            "error": abs(weaker - _PRINTED_WEAKER),
            "strictly_below_sharp": weaker < spectral_c.value,
            "tolerance": tol,
            "pass": abs(weaker - _PRINTED_WEAKER) <= tol and weaker < spectral_c.value,
        }
    )

    rng = np.random.default_rng(args.seed)
    pairs = 10**4
    a = 10.0 ** rng.uniform(-2.0, 2.0, pairs)
    b = 10.0 ** rng.uniform(-2.0, 2.0, pairs)
    chain = verify_min_identity_chain(a, b)
    rep.emit(
        {
            "check": "identity-chain",
            "pairs": chain.pairs,
            "worst_floor_violation": chain.worst_floor_violation,
            "worst_argmin_offset": chain.worst_argmin_offset,
            "grid_resolution": chain.grid_resolution,
            "pass": chain.passed,
        }
    )
    return rep.close(args.out)


def cmd_dilate(args: argparse.Namespace) -> int:
    povm = load_povm(args.povm)
    rep = _Report("dilate")
    scale = args.tolerance_scale
    rep.emit(
        {
            "povm": args.povm,
            "label": povm.label,
            "n_bins": povm.n_bins,
            "dim": povm.dim,
            "tau": float(povm.lattice.tau),
        }
    )
    verdict = validate_povm(povm, tol=1e-10 * scale, seed=args.seed)
    rep.emit(
        {
            "validation": "axioms",
            "completeness": verdict.completeness_residual,
            "covariance": verdict.covariance_residual,
            "min_effect_eigenvalue": verdict.min_effect_eigenvalue,
            "additivity": verdict.additivity_residual,
            "pass": verdict.passed,
        }
    )
    if not verdict.passed:
        for axiom, ok in (
            ("completeness", verdict.complete),
            ("covariance", verdict.covariant),
            ("positivity", verdict.positive),
            ("additivity", verdict.additive),
        ):
            if not ok:
                print(format_record({"error": "axiom-violated", "axiom": axiom}))
                break
        return 1

    built = dila.build_dilation(povm, validate_tol=1e-10 * scale)
    rep.emit({"dilation": "built", "rank": built.rank, "discarded": built.discarded_count})
    tol = 1e-10 * scale
    compression = dila.check_compression(built, count=100, seed=args.seed)
    rep.emit({"check": "compression", "residual": compression, "tolerance": tol, "pass": compression <= tol})
    imprimitivity = dila.check_imprimitivity(built)
    rep.emit({"check": "imprimitivity", "residual": imprimitivity, "tolerance": tol, "pass": imprimitivity <= tol})
    restriction = dila.check_restriction(built)
    rep.emit({"check": "restriction", "residual": restriction, "tolerance": tol, "pass": restriction <= tol})
    states = [random_smooth_state(povm.grid, args.seed + i) for i in range(5)]
    occurrence = dila.check_occurrence_consistency(built, states)
    otol = 1e-9 * scale
    rep.emit({"check": "occurrence", "residual": occurrence, "tolerance": otol, "pass": occurrence <= otol})
    shift_dev = dila.shift_power_deviation(built)
    rep.emit({"check": "shift-power", "residual": shift_dev, "tolerance": tol, "pass": shift_dev <= tol})
    return rep.close(args.out)


def _parse_states(spec: str, model: str):
    """Expand a --states value into (kind, seed-or-None) work items."""
    if spec == "gaussian":
        return [("gaussian", None)]
    if spec == "minimal":
        if model != "halfline":
            raise ValueError("--states minimal needs --model halfline")
        return [("minimal", None)]
    if spec.startswith("random:"):
        body = spec[len("random:") :]
        try:
            if ".." in body:
                first, last = body.split("..", 1)
                lo, hi = int(first), int(last)
                if hi < lo:
                    raise ValueError
                return [("random", s) for s in range(lo, hi + 1)]
            return [("random", int(body))]
        except ValueError:
            raise ValueError(f"bad --states value {spec!r}; use random:SEED or random:FIRST..LAST") from None
    raise ValueError(f"unknown --states value {spec!r}")


def cmd_bounds(args: argparse.Namespace) -> int:
    scale = args.tolerance_scale
    if args.model == "fullline":
        if args.n is None and args.de is None:
            povm = default_fullline_model()
        else:
            n = args.n or 512
            de = args.de or float(np.sqrt(2.0 * np.pi / n))
            povm = build_sharp_time_povm(EnergyGrid(n, de, offset=-de * (n // 2)))
    else:
        if args.n is None and args.de is None:
            povm = default_halfline_model()
        else:
            n = args.n or 2048
            de = args.de or 0.01
            cutoff = n // 2
            povm = build_halfline_povm(EnergyGrid(n, de, offset=-de * cutoff), cutoff)
    grid = povm.grid

    items = _parse_states(args.states, args.model)
    if args.check == "auto":
        checks = ("time-energy", "positive-energy", "combined") if args.model == "halfline" else ("time-energy",)
    elif args.check == "all":
        checks = ("time-energy", "positive-energy", "combined")
    else:
        checks = (args.check,)

    rep = _Report("bounds")
    rep.emit(
        {
            "model": args.model,
            "n_bins": povm.n_bins,
            "dim": povm.dim,
            "de": float(grid.de),
            "tau": float(povm.lattice.tau),
        }
    )
    runners = {
        "time-energy": lambda s: unc.check_time_energy_bound(povm, s, tolerance=1e-3 * scale),
        "positive-energy": lambda s: unc.check_positive_energy_bound(povm, s, tolerance=2e-3 * scale),
        "combined": lambda s: unc.check_combined_bound(povm, s, tolerance=5e-3 * scale),
    }
    for kind, seed in items:
        if kind == "gaussian":
            state = (
                gaussian_state(grid, 0.0, 1.0)
                if args.model == "fullline"
                else gaussian_state(grid, 3.0, 0.6)
            )
            tag = {"state": "gaussian"}
        elif kind == "minimal":
            state = transported_minimal_state(grid)
            tag = {"state": "minimal"}
        else:
            state = random_smooth_state(grid, seed)
            tag = {"state": "random", "seed": seed}
        for name in checks:
            try:
                report = runners[name](state)
            except ValueError as exc:
                print(format_record({"error": "bound-not-applicable", "detail": str(exc)}))
                return 1
            rec = dict(tag)
            rec.update(bound_record(report, n=povm.dim))
            rep.emit(rec)
            # the canonical states are expected to sit on the bound, not
            # merely above it; certify saturation for them
            saturating = (kind == "gaussian" and args.model == "fullline" and name == "time-energy") or (
                kind == "minimal" and name == "positive-energy"
            )
            if saturating:
                stol = (1e-4 if kind == "gaussian" else 2e-3) * scale
                err = abs(report.lhs - report.rhs)
                rep.emit(
                    {
                        "state": tag["state"],
                        "saturation": report.name,
                        "error": err,
                        "tolerance": stol,
                        "pass": err <= stol,
                    }
                )
    return rep.close(args.out)


def cmd_emit_fixtures(args: argparse.Namespace) -> int:
    from pathlib import Path

    out_dir = Path(args.out or "fixtures")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(format_record({"error": "io", "detail": str(exc)}))
        return 2
    n = args.n
    rep = _Report("emit-fixtures")

    de = float(np.sqrt(2.0 * np.pi / n))
    sharp = build_sharp_time_povm(EnergyGrid(n, de, offset=-de * (n // 2)))
    half_de = 0.3
    half = build_halfline_povm(EnergyGrid(n, half_de, offset=-half_de * (n // 2)), n // 2)
    rng = np.random.default_rng(args.seed)
    generator = np.exp(2j * np.pi * rng.random(n)) / np.sqrt(n)
    vector = vector_generated_povm(EnergyGrid(n, de, offset=-de * (n // 2)), generator)
    table_state = minimal_state(args.h, args.domain_l)

    try:
        for name, povm in (
            ("sharp-povm.json", sharp),
            ("halfline-povm.json", half),
            ("vector-povm.json", vector),
        ):
            path = out_dir / name
            save_povm(povm, path)
            rep.emit({"fixture": str(path), "n_bins": povm.n_bins, "dim": povm.dim})
        path = out_dir / "minimal-state.txt"
        save_state_table(table_state, path)
        rep.emit({"fixture": str(path), "rows": table_state.values.size})
    except OSError as exc:
        print(format_record({"error": "io", "detail": str(exc)}))
        return 2
    return rep.close(None)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    handlers = {
        "airy-certify": cmd_airy_certify,
        "dilate": cmd_dilate,
        "bounds": cmd_bounds,
        "emit-fixtures": cmd_emit_fixtures,
    }
    try:
        return handlers[args.command](args)
    except PovmFormatError as exc:
        print(format_record({"error": "input", "detail": str(exc)}))
        return 2
    except DomainTooSmallError as exc:
        print(format_record({"error": "domain", "detail": str(exc), "required_length": exc.required_length}))
        return 2
    except (ValueError, OSError) as exc:
        print(format_record({"error": "config", "detail": str(exc)}))
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))
