"""Command-line front end.

Every command except ``sweep`` writes one JSON document carrying
``schema_version``, the SHA-256 of the input file and a ``result``
payload. ``sweep`` writes CSV. Exit status: 0 on success, 1 for input or
validation problems, 2 for numerical or stability failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Any, Callable, Sequence

import numpy as np

from . import asymptotics, covariance, decay, interconnect, linalg, onemode
from .errors import OQHOError, ValidationError
from .io import SCHEMA_VERSION, dumps, model_from_dict, network_from_dict
from .model import build_state_space, spectral_structure, validate

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class _InputError(Exception):
    name = "input_error"


def _read_input(path: str) -> tuple[bytes, Any]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise _InputError(f"{path} is not valid JSON: {exc}") from exc
    return raw, doc


def _cmd_validate(args, doc) -> tuple[dict, int]:
    report = validate(model_from_dict(doc))
    return report.as_dict(), EXIT_OK if report.ok else EXIT_INPUT


def _cmd_spectrum(args, doc) -> tuple[dict, int]:
    model = model_from_dict(doc)
    spec = spectral_structure(model)
    eig = linalg.eig_general(build_state_space(model).A).eigenvalues
    return {
        "omegas": spec.omegas,
        "period": spec.period,
        "V": spec.V,
        "eigenvalues_A": eig,
    }, EXIT_OK


def _cmd_decoherence(args, doc) -> tuple[dict, int]:
    r = decay.decoherence_time(model_from_dict(doc), args.norm)
    return {
        "tau_star": r.tau_star,
        "norm": r.norm_kind,
        "bracket": list(r.bracket),
        "ratio": r.ratio,
        "step": r.step,
        "steps": r.steps,
    }, EXIT_OK


def _cmd_bound(args, doc) -> tuple[dict, int]:
    r = decay.optimize_bound(model_from_dict(doc), args.lambda_grid)
    return {
        "bound": r.bound,
        "lambda": r.lam,
        "N_kind": r.N_kind,
        "N": r.N,
        "Gamma": r.Gamma,
        "mu2_max_eigenvalue": r.mu2_max_eigenvalue,
    }, EXIT_OK


def _cmd_asymptotics(args, doc) -> tuple[dict, int]:
    model = model_from_dict(doc)
    spec = spectral_structure(model)
    mus = asymptotics.compute_mus(spec, model.coupling_shape, J=model.J)
    verdict = asymptotics.stability_verdict(mus)
    thr = asymptotics.thresholds(mus, spec.omegas)
    eps = model.coupling_strength
    h = len(mus) // 2
    return {
        "omegas": spec.omegas,
        "mus": mus,
        "omega_mu_products": spec.omegas[:h] * mus[:h],
        "stable_weak_coupling": verdict.stable,
        "margin": verdict.margin,
        "inconclusive": verdict.inconclusive,
        "lead_coefficient": thr.lead_coefficient,
        "epsilon": eps,
        "tau_hat": thr.tau_hat(eps),
        "eps_hat": thr.eps_hat,
        "eps_tilde": thr.eps_tilde,
        "eps_over_eps_hat": eps / thr.eps_hat,
    }, EXIT_OK


def _cmd_covariance(args, doc) -> tuple[dict, int]:
    model = model_from_dict(doc)
    res = covariance.steady_covariance(model)
    out: dict[str, Any] = {
        "P": res.P,
        "residual": res.residual,
        "psd_quantum": res.psd_quantum,
        "quantum_min_eigenvalue": res.quantum_min_eigenvalue,
        "energy_rate": covariance.energy_rate(model, res.P).value,
        "mean_energy": covariance.mean_energy(model, res.P),
    }
    try:
        lim = covariance.weak_coupling_limit(model)
    except OQHOError:
        lim = None
    if lim is not None:
        out["Pi"] = lim.Pi
        out["contributions"] = [
            {"k": c.k, "omega_mu": c.omega_mu, "drive": c.drive, "real_part": c.real_part}
            for c in lim.contributions
        ]
    if args.t_end is not None:
        traj = covariance.transient_covariance(model, np.zeros((model.n, model.n)), args.t_end, args.dt)
        out["transient"] = {
            "t_end": float(traj.times[-1]),
            "steps": len(traj.times) - 1,
            "P_final": traj.final,
            "distance_to_steady": linalg.frobenius_norm(traj.final - res.P),
        }
    return out, EXIT_OK


def _cmd_onemode(args, doc) -> tuple[dict, int]:
    model = model_from_dict(doc)
    p = onemode.extract_params(model)
    eps = model.coupling_strength
    out: dict[str, Any] = {
        "theta": p.theta,
        "gamma": p.gamma,
        "raw_gamma": p.raw_gamma,
        "omega": p.omega,
        "mu": p.mu,
        "transform": p.transform,
        "epsilon": eps,
        "spectrum": onemode.exact_spectrum(p, eps),
        "period": p.period,
    }
    if p.gamma > 0:
        wd = onemode.weighted_decay(p, eps, 0.0)
        out["tau_R"] = wd.tau_R
        out["eps_threshold"] = wd.eps_threshold
        if eps > 0:
            cov = onemode.exact_covariance(p, eps)
            out["P"] = cov.P
            out["Pi"] = cov.Pi
    return out, EXIT_OK


def _cmd_interconnect(args, doc) -> tuple[dict, int]:
    net = network_from_dict(doc)
    asy = interconnect.closed_loop_asymptotics(net)
    out: dict[str, Any] = {
        "epsilon": net.epsilon,
        "A": net.A,
        "B": net.B,
        "R0": net.R0,
        "sR": net.sR,
        "sM": net.sM,
        "omegas": asy.omegas,
        "mus": asy.mus,
        "sigmas": asy.sigmas,
        "K": asy.K,
        "stable_weak_coupling": asy.verdict.stable,
        "margin": asy.verdict.margin,
    }
    if linalg.is_hurwitz(net.A):
        rep = interconnect.analyze_closed_loop(net, args.lambda_grid)
        out["analysis"] = {
            "tau_star": rep.decoherence.tau_star,
            "bound": rep.bound.bound,
            "lead_coefficient": None if rep.thresholds is None else rep.thresholds.lead_coefficient,
            "eps_hat": None if rep.thresholds is None else rep.thresholds.eps_hat,
            "eps_tilde": None if rep.thresholds is None else rep.thresholds.eps_tilde,
            "P": rep.covariance.P,
            "psd_quantum": rep.covariance.psd_quantum,
        }
    else:
        out["analysis"] = None
    return out, EXIT_OK


def _cmd_sweep(args, doc) -> str:
    if not args.eps_min < args.eps_max:
        raise ValidationError("--eps-min must be smaller than --eps-max")
    if args.steps < 2:
        raise ValidationError("--steps must be at least 2")
    if args.eps_min < 0:
        raise ValidationError("--eps-min must be non-negative")
    model = model_from_dict(doc)
    grid = np.linspace(args.eps_min, args.eps_max, args.steps)
    return asymptotics.sweep_csv(asymptotics.lyapunov_exponent_sweep(model, grid))


_JSON_COMMANDS: dict[str, Callable[[argparse.Namespace, Any], tuple[dict, int]]] = {
    "validate": _cmd_validate,
    "spectrum": _cmd_spectrum,
    "decoherence": _cmd_decoherence,
    "bound": _cmd_bound,
    "asymptotics": _cmd_asymptotics,
    "covariance": _cmd_covariance,
    "onemode": _cmd_onemode,
    "interconnect": _cmd_interconnect,
}


def _positive(kind):
    def parse(text: str):
        val = kind(text)
        if not val > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oqho", description="Decoherence analysis of open quantum harmonic oscillators.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, metavar="PATH", help="model or network JSON")
    common.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="structural checks on a model")
    sub.add_parser("spectrum", parents=[common], help="eigenfrequencies and eigenvectors")
    p = sub.add_parser("decoherence", parents=[common], help="decoherence time")
    p.add_argument("--norm", choices=("frobenius", "weighted"), default="frobenius")
    for name in ("bound", "interconnect"):
        p = sub.add_parser(name, parents=[common], help="Lyapunov bound" if name == "bound" else "closed-loop network")
        p.add_argument("--lambda-grid", type=_positive(int), default=40, metavar="N")
    sub.add_parser("asymptotics", parents=[common], help="weak-coupling asymptotics and thresholds")
    p = sub.add_parser("covariance", parents=[common], help="invariant covariance")
    p.add_argument("--t-end", type=_positive(float), metavar="T", help="also integrate from P = 0 up to T")
    p.add_argument("--dt", type=_positive(float), metavar="DT", help="transient step (default 0.01/||A||_F)")
    p = sub.add_parser("sweep", parents=[common], help="CSV of exact vs asymptotic Lyapunov exponent")
    p.add_argument("--eps-min", type=float, default=0.0)
    p.add_argument("--eps-max", type=float, default=0.3)
    p.add_argument("--steps", type=int, default=61)
    sub.add_parser("onemode", parents=[common], help="closed forms for n = 2")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _fail(name: str, message: str) -> None:
    first = str(message).splitlines()[0] if str(message) else ""
    sys.stderr.write(f"oqho: {name}: {first}\n")


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw, doc = _read_input(args.input)
        if args.command == "sweep":
            text = _cmd_sweep(args, doc)
            status = EXIT_OK
        else:
            result, status = _JSON_COMMANDS[args.command](args, doc)
            text = dumps(
                {
                    "schema_version": SCHEMA_VERSION,
                    "command": args.command,
                    "input_sha256": hashlib.sha256(raw).hexdigest(),
                    "result": result,
                }
            )
        _emit(text, args.output)
    except _InputError as exc:
        _fail(exc.name, str(exc))
        return EXIT_INPUT
    except ValidationError as exc:
        _fail(exc.name, str(exc))
        return EXIT_INPUT
    except OQHOError as exc:
        _fail(exc.name, str(exc))
        return EXIT_NUMERIC
    except OSError as exc:
        _fail("input_error", f"cannot write output: {exc.strerror}")
        return EXIT_INPUT
    if status == EXIT_INPUT:
        _fail("validation_error", "model failed structural checks")
    return status


def main() -> None:
    sys.exit(run())
