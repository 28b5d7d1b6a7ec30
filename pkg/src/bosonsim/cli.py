"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data error (malformed files,
dimension mismatches), 4 numerical failure (non-convergence). Every command
is deterministic given its inputs and seed. The BOSONSIM_THREADS environment
variable caps internal parallelism of the permanent batch kernel.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import click
import numpy as np

from . import io as bio
from .exceptions import (BosonSimError, ConvergenceError, DimensionError,
                         UnderdeterminedPhaseSystemError)
from .noise import NoiseParams, PdcSource, build_p_mod, ideal_click_distribution
from .permanent import permanent_naive, permanent_ryser
from .sampling import distribution, l1_distance, sample
from .tomography import TransferMatrixEstimator

EXIT_DATA_ERROR = 3
EXIT_NUMERICAL_ERROR = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    try:
        return fn()
    except (ConvergenceError, UnderdeterminedPhaseSystemError) as exc:
        _fail(EXIT_NUMERICAL_ERROR, str(exc))
    except (BosonSimError, OSError) as exc:
        _fail(EXIT_DATA_ERROR, str(exc))


@click.group()
def main():
    """Boson sampling simulation and analysis toolkit."""


@main.command("distribution")
@click.option("--matrix", "matrix_path", required=True,
              type=click.Path(exists=True), help="Matrix JSON file.")
@click.option("--input", "input_str", required=True,
              help="Input occupation as a digit string, e.g. 011010.")
@click.option("--collision-free", is_flag=True,
              help="Restrict outcomes to at most one photon per mode.")
@click.option("--renormalize/--raw", default=True,
              help="Divide by the post-selected total (default) or keep raw "
                   "weights.")
@click.option("--clicks", is_flag=True,
              help="Report threshold-detector click patterns instead of "
                   "occupations.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def cmd_distribution(matrix_path, input_str, collision_free, renormalize,
                     clicks, out_path, fmt):
    """Exact output distribution for a transfer matrix and input state."""

    def run():
        lam = bio.read_matrix(matrix_path)
        t = bio.occupation_from_string(input_str)
        if len(t) != lam.shape[0]:
            raise DimensionError(
                f"input has {len(t)} modes but the matrix has {lam.shape[0]}"
            )
        dist = distribution(lam, t, renormalize=renormalize,
                            collision_free=collision_free)
        if clicks:
            from .noise import click_distribution
            dist = click_distribution(dist, sum(t), renormalize=renormalize)
        if fmt == "csv":
            bio.distribution_to_csv(dist, out_path)
        else:
            bio.distribution_to_json(dist, out_path)

    _guard(run)


@main.command("sample")
@click.option("--matrix", "matrix_path", required=True,
              type=click.Path(exists=True))
@click.option("--input", "input_str", required=True)
@click.option("--samples", "n_samples", required=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--collision-free", is_flag=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_sample(matrix_path, input_str, n_samples, seed, collision_free,
               out_path):
    """Draw reproducible samples from the exact distribution."""

    def run():
        if n_samples < 0:
            raise DimensionError("--samples must be non-negative")
        lam = bio.read_matrix(matrix_path)
        t = bio.occupation_from_string(input_str)
        if len(t) != lam.shape[0]:
            raise DimensionError(
                f"input has {len(t)} modes but the matrix has {lam.shape[0]}"
            )
        dist = distribution(lam, t, collision_free=collision_free)
        record = sample(dist, n_samples, seed)
        bio.sample_record_to_json(record, out_path,
                                  matrix_sha256=bio.matrix_digest(matrix_path))

    _guard(run)


@main.command("characterize")
@click.option("--one-photon", "one_path", required=True,
              type=click.Path(exists=True), help="One-photon CSV file.")
@click.option("--two-photon", "two_path", required=True,
              type=click.Path(exists=True), help="Two-photon visibility CSV.")
@click.option("--mask", "mask_path", type=click.Path(exists=True),
              help="Optional JSON phase mask {\"mask\": [[...]]}.")
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_characterize(one_path, two_path, mask_path, out_path):
    """Reconstruct a transfer matrix from measurement data."""

    def run():
        one = bio.one_photon_from_csv(one_path)
        two = bio.two_photon_from_csv(two_path)
        mask = bio.phase_mask_from_json(mask_path) if mask_path else None
        est = TransferMatrixEstimator(phase_mask=mask).fit(one, two)
        bio.reconstruction_to_json(est.tau_, est.phases_, est.residual_,
                                   out_path)

    _guard(run)


@main.command("noise-sweep")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True),
              help="JSON with matrix path, input string, and noise settings.")
@click.option("--sweep", "sweep_str", default=None,
              help="Comma-separated lambda^2 values applied to every source.")
@click.option("--alphas", "alphas_str", default=None,
              help="Comma-separated distinguishability values.")
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_noise_sweep(config_path, sweep_str, alphas_str, out_path):
    """Grid of L1 distances between the full model and the ideal
    distribution."""

    def run():
        cfg = bio._load_json(config_path)
        try:
            matrix_path = Path(config_path).parent / cfg["matrix"]
            t = bio.occupation_from_string(cfg["input"])
        except KeyError as exc:
            raise DimensionError(f"noise config missing key: {exc}") from exc
        lam = bio.read_matrix(matrix_path)
        base = bio.noise_params_from_json(config_path)
        n = base.postselect_n or sum(t)
        p_th = ideal_click_distribution(lam, t, n)
        lambda2s = ([float(x) for x in sweep_str.split(",")] if sweep_str
                    else [s.lambda2 for s in base.sources[:1]] or [0.0])
        alphas = ([float(x) for x in alphas_str.split(",")] if alphas_str
                  else [base.alpha])
        lines = ["lambda2,alpha,d"]
        for lambda2 in lambda2s:
            sources = tuple(PdcSource(lambda2, s.modes) for s in base.sources)
            for alpha in alphas:
                params = NoiseParams(sources=sources, alpha=alpha,
                                     dark_rate=base.dark_rate, postselect_n=n)
                p_mod = build_p_mod(params, lam, t)
                d = l1_distance(p_mod, p_th)
                lines.append(f"{repr(lambda2)},{repr(alpha)},{repr(d)}")
        Path(out_path).write_text("\n".join(lines) + "\n")

    _guard(run)


@main.command("bench")
@click.option("--sizes", "sizes_str", default="2,4,6,8",
              show_default=True, help="Comma-separated matrix sizes.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", type=click.Path(), default=None)
def cmd_bench(sizes_str, seed, out_path):
    """Time the permanent kernels and cross-check their agreement."""

    def run():
        rng = np.random.Generator(np.random.PCG64(seed))
        lines = ["n,naive_seconds,ryser_seconds,speedup"]
        permanent_ryser(np.eye(2))  # warm up the compiled kernel
        for n_str in sizes_str.split(","):
            n = int(n_str)
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            t0 = time.perf_counter()
            ryser = permanent_ryser(a)
            t_ryser = time.perf_counter() - t0
            if n <= 11:
                t0 = time.perf_counter()
                naive = permanent_naive(a)
                t_naive = time.perf_counter() - t0
                err = abs(ryser - naive) / max(1.0, abs(naive))
                if err > 1e-10:
                    raise ConvergenceError(
                        f"kernel disagreement at n={n}: relative error {err:.3g}"
                    )
                speedup = t_naive / t_ryser if t_ryser > 0 else float("inf")
                lines.append(f"{n},{t_naive:.6f},{t_ryser:.6f},{speedup:.2f}")
            else:
                lines.append(f"{n},,{t_ryser:.6f},")
        text = "\n".join(lines) + "\n"
        if out_path:
            Path(out_path).write_text(text)
        else:
            click.echo(text, nl=False)

    _guard(run)


if __name__ == "__main__":
    main()
