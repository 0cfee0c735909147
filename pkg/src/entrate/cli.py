"""Command-line front end: rate evaluation, optimizers, sweeps, verification.

Exit codes: 0 success, 1 numeric failure (tolerance breach or
non-convergence), 2 input failure (bad files, flags, or dimensions).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import ancilla as anc
from . import optimum as opt
from .oracle import FDConfig, direct_stats, fd_rate
from .qcore import (
    PureState,
    ValidationError,
    assemble_state,
    matrix_from_json,
    matrix_to_json,
    random_hermitian,
    random_state,
    schmidt_decompose,
    state_from_json,
    state_to_json,
)
from .rate import energy_stats, gamma_rate, mean_energy, schmidt_block

__all__ = ["main", "RunConfig"]

LN2 = math.log(2.0)


def _dim_cap() -> int:
    raw = os.environ.get("ENTRATE_DIM_CAP", "")
    try:
        return int(raw) if raw else anc.DEFAULT_DIM_CAP
    except ValueError:
        raise ValidationError(f"ENTRATE_DIM_CAP must be an integer, got {raw!r}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    d_a: int = 2
    d_b: int = 2
    d_ancilla_a: int = 1
    d_ancilla_b: int = 1
    seed: int = 0
    log_base: str = "nat"
    tolerance: float = 1e-5
    starts: int = 8
    max_iter: int = 300
    fd_step: float = 1e-5
    output_path: str | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        dims = (self.d_a, self.d_b, self.d_ancilla_a, self.d_ancilla_b)
        if any(d < 1 for d in dims):
            raise ValidationError("all dimensions must be >= 1")
        product = self.d_a * self.d_b * self.d_ancilla_a * self.d_ancilla_b
        cap = _dim_cap()
        if product > cap:
            raise ValidationError(f"product dimension {product} exceeds cap {cap}")
        if self.starts < 1:
            raise ValidationError("starts must be >= 1")
        if self.log_base not in ("nat", "2"):
            raise ValidationError("log base must be 'nat' or '2'")
        if self.format not in ("json", "csv"):
            raise ValidationError("format must be 'json' or 'csv'")


def _scale(cfg: RunConfig) -> float:
    return 1.0 / LN2 if cfg.log_base == "2" else 1.0


def _emit(report: dict, cfg: RunConfig, out) -> None:
    if cfg.format == "csv":
        for key, value in report.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            print(f"{key},{value}", file=out)
    else:
        print(json.dumps(report, indent=2, sort_keys=True), file=out)


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def cmd_rate(cfg: RunConfig, state_path: str, ham_path: str, out) -> int:
    psi = state_from_json(_load_json(state_path))
    h = matrix_from_json(_load_json(ham_path))
    product = psi.d_a * psi.d_b
    if product > _dim_cap():
        raise ValidationError(f"product dimension {product} exceeds cap {_dim_cap()}")

    state = schmidt_decompose(psi)
    block = schmidt_block(h, state)
    closed = gamma_rate(state, block)
    oracle = fd_rate(psi, h, FDConfig(step=cfg.fd_step, scheme="richardson"))
    stats = energy_stats(psi, h)
    scale = _scale(cfg)

    report = {
        "gamma_rate": closed * scale,
        "fd_rate": oracle * scale,
        "difference": (closed - oracle) * scale,
        "log_base": cfg.log_base,
        "tolerance": cfg.tolerance,
        "energy_stats": stats.as_dict(),
    }
    _emit(report, cfg, out)
    return 0 if abs(closed - oracle) < cfg.tolerance else 1


def cmd_optimize(cfg: RunConfig, out) -> int:
    if cfg.d_ancilla_a > 1 or cfg.command == "optimize-ancilla":
        result = anc.sup_search(
            cfg.d_a, cfg.d_ancilla_a, starts=cfg.starts, seed=cfg.seed,
            max_iter=cfg.max_iter,
        )
        _emit(result.as_dict(), cfg, out)
        return 0

    design = opt.optimal_design(cfg.d_a)
    report = {
        "gamma_star": design.gamma,
        "rate_nat": design.rate,
        "rate_bits": design.rate / LN2,
        "dim": design.d,
        "state": state_to_json(assemble_state(design.state)),
        "hamiltonian": matrix_to_json(design.hamiltonian),
    }
    if cfg.output_path:
        state_file = cfg.output_path + "_state.json"
        ham_file = cfg.output_path + "_hamiltonian.json"
        with open(state_file, "w", encoding="utf-8") as fh:
            json.dump(report["state"], fh, indent=2)
        with open(ham_file, "w", encoding="utf-8") as fh:
            json.dump(report["hamiltonian"], fh, indent=2)
        report["state"] = state_file
        report["hamiltonian"] = ham_file
    _emit(report, cfg, out)
    return 0


def _sweep_rows(cfg: RunConfig, dim_range: str | None, gamma_grid: int | None):
    if dim_range is not None:
        try:
            lo, hi = (int(part) for part in dim_range.split(".."))
        except ValueError:
            raise ValidationError(f"bad dimension range {dim_range!r}, want 'a..b'")
        if lo < 2 or hi < lo:
            raise ValidationError(f"empty or invalid dimension range {dim_range!r}")
        for d in range(lo, hi + 1):
            yield d, opt.optimal_gamma(d).rate
    else:
        if gamma_grid is None or gamma_grid < 1:
            raise ValidationError("gamma grid size must be >= 1")
        for i in range(gamma_grid):
            gamma = (i + 1) / (gamma_grid + 1)
            yield gamma, float(opt.gamma_curve(np.array([gamma]), cfg.d_a)[0])


def cmd_sweep(
    cfg: RunConfig, dim_range: str | None, gamma_grid: int | None, out
) -> int:
    rows = list(_sweep_rows(cfg, dim_range, gamma_grid))
    sink = open(cfg.output_path, "w", encoding="utf-8") if cfg.output_path else out
    try:
        if cfg.format == "json":
            payload = [
                {"param": p, "rate_nat": r, "rate_bits": r / LN2} for p, r in rows
            ]
            print(json.dumps(payload, indent=2), file=sink)
        else:
            print("param,rate_nat,rate_bits", file=sink)
            for param, rate in rows:
                print(f"{param:.12g},{rate:.12g},{rate / LN2:.12g}", file=sink)
    finally:
        if sink is not out:
            sink.close()
    return 0


def _verify_checks(cfg: RunConfig, trials: int, sign: float):
    rng_dims = np.random.default_rng((cfg.seed, 101))
    fd_cfg = FDConfig(step=cfg.fd_step, scheme="richardson")

    def instances():
        for t in range(trials):
            d_a = int(rng_dims.integers(2, 4))
            d_b = int(rng_dims.integers(2, 4))
            psi = random_state(d_a, d_b, (cfg.seed, t, 0))
            h = random_hermitian(d_a * d_b, (cfg.seed, t, 1))
            yield psi, h

    err_rate = 0.0
    err_var = 0.0
    err_mean = 0.0
    err_orth = 0.0
    err_bound = 0.0
    for psi, h in instances():
        state = schmidt_decompose(psi)
        block = schmidt_block(h, state)
        closed = sign * gamma_rate(state, block)
        err_rate = max(err_rate, abs(closed - fd_rate(psi, h, fd_cfg)))
        stats = energy_stats(psi, h)
        err_var = max(
            err_var,
            abs(stats.variance - stats.variance_real_part - stats.variance_imag_part),
        )
        mean_direct, _ = direct_stats(psi, h)
        err_mean = max(err_mean, abs(mean_energy(state, block) - mean_direct))
        k = block.m_i @ state.coefficients
        err_orth = max(err_orth, abs(float(state.coefficients @ k)))
        bound = opt.max_rate(state) * math.sqrt(max(stats.variance, 0.0))
        err_bound = max(err_bound, abs(closed) - bound)
    yield "rate_vs_oracle", err_rate, 2e-6
    yield "variance_decomposition", err_var, 1e-9
    yield "mean_energy_vs_direct", err_mean, 1e-10
    yield "auto_orthogonality", err_orth, 1e-12
    yield "rate_bound_excess", err_bound, 1e-9

    err_lu = 0.0
    for t in range(trials):
        psi = random_state(2, 3, (cfg.seed, t, 2))
        h = random_hermitian(6, (cfg.seed, t, 3))
        state = schmidt_decompose(psi)
        base = sign * gamma_rate(state, schmidt_block(h, state))
        ru = np.linalg.qr(
            np.random.default_rng((cfg.seed, t, 4)).normal(size=(2, 2))
            + 1j * np.random.default_rng((cfg.seed, t, 5)).normal(size=(2, 2))
        )[0]
        rv = np.linalg.qr(
            np.random.default_rng((cfg.seed, t, 6)).normal(size=(3, 3))
            + 1j * np.random.default_rng((cfg.seed, t, 7)).normal(size=(3, 3))
        )[0]
        u = np.kron(ru, rv)
        psi2 = PureState(d_a=2, d_b=3, amplitudes=u @ psi.amplitudes)
        h2 = u @ h @ u.conj().T
        state2 = schmidt_decompose(psi2)
        moved = sign * gamma_rate(state2, schmidt_block(h2, state2))
        err_lu = max(err_lu, abs(base - moved))
    yield "local_unitary_invariance", err_lu, 1e-9

    err_lagr = 0.0
    for t in range(trials):
        psi = random_state(3, 3, (cfg.seed, t, 8))
        state = schmidt_decompose(psi)
        err_lagr = max(
            err_lagr,
            abs(opt.max_rate(state) - opt.brute_force_max_k(state, 10, (cfg.seed, t))),
        )
    yield "lagrange_vs_bruteforce", err_lagr, 1e-6

    err_id = 0.0
    err_arb = 0.0
    for t in range(trials):
        rng = np.random.default_rng((cfg.seed, t, 9))
        coeffs = anc.AncillaCoeffs.normalized(np.abs(rng.normal(size=(2, 2))) + 0.05)
        raw = rng.normal(size=(2, 2))
        g = anc.GBlock.from_matrix(raw - raw.T)
        obj = anc.ancilla_objective(coeffs, g)
        index_form = 0.0
        c = coeffs.c
        for a in range(2):
            for b in range(2):
                for dd in range(2):
                    if c[a, b] > 0 and c[a, dd] > 0:
                        index_form += (
                            2.0
                            * c[a, b]
                            * c[a, dd]
                            * math.log(c[a, b] / c[a, dd])
                            * g.g[dd, b]
                        )
        err_id = max(err_id, abs(obj - index_form))
        err_arb = max(err_arb, abs(obj - anc.assemble_and_arbitrate(coeffs, g)))
    yield "ancilla_identities", err_id, 1e-12
    yield "ancilla_arbitration", err_arb, 2e-6


def cmd_verify(cfg: RunConfig, trials: int, inject_sign_flip: bool, out) -> int:
    sign = -1.0 if inject_sign_flip else 1.0
    failures = 0
    lines = []
    for name, err, tol in _verify_checks(cfg, trials, sign):
        ok = err < tol
        failures += 0 if ok else 1
        lines.append(
            f"{'PASS' if ok else 'FAIL'}  {name:<26} max_err={err: .3e}  tol={tol:.1e}"
        )
    for line in lines:
        print(line, file=out)
    print(
        f"{len(lines) - failures}/{len(lines)} checks passed "
        f"(seed={cfg.seed}, trials={trials})",
        file=out,
    )
    return 0 if failures == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--log-base", choices=("nat", "2"), default="nat")
    common.add_argument("--tol", type=float, default=1e-5)
    common.add_argument("--starts", type=int, default=8)
    common.add_argument("--max-iter", type=int, default=300)
    common.add_argument("--fd-step", type=float, default=1e-5)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(
        prog="entrate",
        description="Entanglement rates of bipartite dynamics at unit energy variance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rate = sub.add_parser("rate", parents=[common],
                            help="closed-form vs finite-difference rate of a pair")
    p_rate.add_argument("state", help="pure-state JSON file")
    p_rate.add_argument("hamiltonian", help="Hamiltonian JSON file")

    p_optimize = sub.add_parser("optimize", parents=[common],
                                help="optimal state and Hamiltonian for a dimension")
    p_optimize.add_argument("--dim", type=int, required=True)
    p_optimize.add_argument("--dim-b", type=int, default=None)
    p_optimize.add_argument("--ancilla", type=int, default=None)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="CSV sweep over dimension or gamma")
    p_sweep.add_argument("--dim", type=int, default=2)
    p_sweep.add_argument("--dim-range", default=None, help="inclusive range 'a..b'")
    p_sweep.add_argument("--gamma-grid", type=int, default=None)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="cross-module invariant suite")
    p_verify.add_argument("--trials", type=int, default=20)
    p_verify.add_argument("--inject-sign-flip", action="store_true",
                          help="negate the closed-form rate (mutation check)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        d_a = getattr(args, "dim", 2) or 2
        d_b = getattr(args, "dim_b", None) or d_a
        ancilla_dim = getattr(args, "ancilla", None) or 1
        default_format = "csv" if args.command == "sweep" else "json"
        cfg = RunConfig(
            command=args.command,
            d_a=d_a,
            d_b=d_b,
            d_ancilla_a=ancilla_dim,
            d_ancilla_b=ancilla_dim,
            seed=args.seed,
            log_base=args.log_base,
            tolerance=args.tol,
            starts=args.starts,
            max_iter=args.max_iter,
            fd_step=args.fd_step,
            output_path=args.out,
            format=args.format or default_format,
        )
        if args.command == "rate":
            return cmd_rate(cfg, args.state, args.hamiltonian, out)
        if args.command == "optimize":
            if args.dim_b is not None and args.dim_b != args.dim:
                raise ValidationError("the optimal construction needs --dim-b == --dim")
            if args.ancilla is not None:
                cfg = RunConfig(
                    **{**cfg.__dict__, "command": "optimize-ancilla"}
                )
            return cmd_optimize(cfg, out)
        if args.command == "sweep":
            if (args.dim_range is None) == (args.gamma_grid is None):
                raise ValidationError("pass exactly one of --dim-range/--gamma-grid")
            return cmd_sweep(cfg, args.dim_range, args.gamma_grid, out)
        return cmd_verify(cfg, args.trials, args.inject_sign_flip, out)
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except anc.ConvergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
