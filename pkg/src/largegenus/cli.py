"""Command line entry point ``largegenus``."""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click
import mpmath

from . import asymptotics, harness
from .correlators import correlator, extract_intersection, intersection_number
from .exact import Multiplicities, cyclo_embed, encode_scalar, rspin_genus
from .interp import InterpolationConfig
from .wave import AIRY, BESSEL, airy_coeffs, bessel_coeffs, rairy, rairy_coeffs


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise click.BadParameter(f"expected a comma list of integers, got {text!r}") from exc


def _q(x) -> str:
    """Exact rational as text; integers print without a denominator."""
    return str(Fraction(x))


def _model(name: str, r: int):
    if name == "airy":
        return AIRY
    if name == "bessel":
        return BESSEL
    if name in ("rairy", "rspin"):
        return rairy(r)
    raise click.BadParameter(f"unknown model {name!r}")


@click.group()
@click.option("--seed", type=int, default=None, help="Seed for randomised interpolation points.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="INI file of experiments.")
@click.pass_context
def main(ctx, seed, config_path):
    """Exact intersection numbers and their large-genus asymptotics."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["config"] = config_path


@main.command()
@click.option("--model", type=click.Choice(["airy", "bessel", "rairy"]), required=True)
@click.option("--r", type=int, default=2)
@click.option("--order", type=int, required=True)
def wave(model, r, order):
    """Dump the WKB coefficient table as JSON."""
    if model == "airy":
        tab = airy_coeffs(order)
    elif model == "bessel":
        tab = bessel_coeffs(order)
    else:
        tab = rairy_coeffs(r, order)
    click.echo(json.dumps(tab.to_json(), indent=1))


def _check_g(g, expected):
    if g is not None and g != expected:
        raise click.UsageError(f"degree constraint gives g = {expected}, not {g}")


@main.command()
@click.option("--g", type=int, default=None)
@click.option("--d", "d_text", required=True, help="Comma list d1,d2,...")
def psi(g, d_text):
    """<tau_d1 ... tau_dn> for psi-classes."""
    d = _ints(d_text)
    n = len(d)
    if (sum(d) - n) % 3:
        raise click.UsageError("|d| - n must be divisible by 3")
    _check_g(g, (sum(d) - n) // 3 + 1)
    click.echo(_q(intersection_number(AIRY, d, (1,) * n)))


@main.command()
@click.option("--g", type=int, default=None)
@click.option("--d", "d_text", required=True)
def theta(g, d_text):
    """<Theta tau_d1 ... tau_dn>."""
    d = _ints(d_text)
    _check_g(g, sum(d) + 1)
    click.echo(_q(intersection_number(BESSEL, d, (1,) * len(d))))


@main.command()
@click.option("--r", type=int, required=True)
@click.option("--g", type=int, default=None)
@click.option("--d", "d_text", required=True)
@click.option("--a", "a_text", required=True)
def rspin(r, g, d_text, a_text):
    """<tau_{d1,a1} ... > for the r-spin class."""
    d, a = _ints(d_text), _ints(a_text)
    try:
        genus = rspin_genus(r, d, a)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    _check_g(g, genus)
    click.echo(_q(intersection_number(rairy(r), d, a)))


@main.command(name="correlator")
@click.option("--model", type=click.Choice(["airy", "bessel", "rairy", "rspin"]), required=True)
@click.option("--r", type=int, default=2)
@click.option("--g", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def correlator_cmd(model, r, g, n, fmt):
    """Full coefficient table of W_{g,n}."""
    m = _model(model, r)
    poly = correlator(m, g, n)
    if fmt == "json":
        click.echo(json.dumps(poly.to_json(), indent=1))
        return
    click.echo("d,a,coefficient,intersection")
    for (d, a), c in sorted(poly.coeffs.items()):
        val = extract_intersection(poly, d, a)
        dd = " ".join(map(str, d))
        aa = " ".join(map(str, a))
        click.echo(f"{dd},{aa},{_scalar_text(c)},{_scalar_text(val)}")


def _scalar_text(x) -> str:
    enc = encode_scalar(x)
    return enc if isinstance(enc, str) else json.dumps(enc)


@main.command(name="asym-coeff")
@click.option("--model", type=click.Choice(["airy", "bessel", "rspin"]), required=True)
@click.option("--k", type=int, required=True)
@click.option("--n", type=int, default=None, help="Number of points (psi/Theta).")
@click.option("--p", "p_text", default="", help="Multiplicities p0,p1,... (psi/Theta).")
@click.option("--r", type=int, default=3)
@click.option("--alpha", type=int, default=1)
@click.option("--d", "d_text", default="", help="r-spin insertion d.")
@click.option("--a", "a_text", default="", help="r-spin insertion a.")
@click.pass_context
def asym_coeff(ctx, model, k, n, p_text, r, alpha, d_text, a_text):
    """Exact alpha_k, beta_k, or gamma_k."""
    cfg = _family_config(ctx)
    if model == "rspin":
        d, a = _ints(d_text), _ints(a_text)
        if not d:
            raise click.UsageError("r-spin needs --d and --a")
        try:
            if len(d) == 1:
                val = asymptotics.gamma_k_direct(r, alpha, k, d, a)
            else:
                val = asymptotics.gamma_k(r, alpha, k, d, a, cfg.interpolation)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
        click.echo(json.dumps({"exact": encode_scalar(val), "value": str(complex(cyclo_embed(val)))}))
        return
    if n is None:
        raise click.UsageError("--n is required for psi/Theta coefficients")
    try:
        p = Multiplicities.from_list(n, _ints(p_text))
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    fn = asymptotics.alpha_k if model == "airy" else asymptotics.beta_k
    try:
        click.echo(_q(fn(k, p, cfg)))
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _family_config(ctx) -> asymptotics.FamilyConfig:
    seed = ctx.obj.get("seed") if ctx.obj else None
    if seed is None:
        return asymptotics.DEFAULT_FAMILY
    return asymptotics.FamilyConfig(interpolation=InterpolationConfig(seed=seed))


@main.command()
@click.option("--model", type=click.Choice(["airy", "bessel", "rspin"]), required=True)
@click.option("--r", type=int, default=3)
@click.option("--g", type=int, required=True)
@click.option("--d", "d_text", required=True)
@click.option("--a", "a_text", default="")
@click.option("--K", "K", type=int, default=0)
@click.pass_context
def estimate(ctx, model, r, g, d_text, a_text, K):
    """Truncated large-genus estimate, with the per-sector breakdown."""
    m = _model(model, r)
    d = _ints(d_text)
    a = _ints(a_text) or None
    try:
        est = asymptotics.asymptotic_estimate(m, g, d, a, K, _family_config(ctx))
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    out = {"estimate": mpmath.nstr(est.value, 15), "sectors": {str(s): mpmath.nstr(v, 15) for s, v in est.sectors.items()}}
    click.echo(json.dumps(out, indent=1))


@main.command()
@click.argument("kind", type=click.Choice(list(harness.KINDS)), required=False)
@click.option("--model", type=click.Choice(["airy", "bessel", "rspin"]), default="airy")
@click.option("--r", type=int, default=2)
@click.option("--fixed", default="", help="Small entries: d1,d2 (psi/Theta) or d:a,... (r-spin).")
@click.option("--K", "K", type=int, default=0)
@click.option("--g-min", type=int, default=10)
@click.option("--g-max", type=int, default=60)
@click.option("--g-step", type=int, default=1)
@click.option("--precision", type=int, default=30)
@click.option("--grid", type=int, default=20)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--target", type=float, default=None, help="Also print the fitted log-log rate against this value.")
@click.pass_context
def experiment(ctx, kind, model, r, fixed, K, g_min, g_max, g_step, precision, grid, out, target):
    """Run a verification sequence (or all sections of --config) and write CSV."""
    specs = []
    if ctx.obj.get("config"):
        try:
            specs = harness.load_config(ctx.obj["config"])
        except harness.ConfigError as exc:
            raise click.UsageError(str(exc)) from exc
        if kind:
            specs = [s for s in specs if s.kind == kind]
    else:
        if not kind:
            raise click.UsageError("give a sequence kind or --config")
        try:
            specs = [
                harness.ExperimentSpec(
                    kind=kind,
                    model=model,
                    r=r,
                    fixed=harness._parse_fixed(fixed, model),
                    K=K,
                    g_min=g_min,
                    g_max=g_max,
                    g_step=g_step,
                    precision=precision,
                    grid=grid,
                    out=out,
                )
            ]
        except harness.ConfigError as exc:
            raise click.UsageError(str(exc)) from exc
    ok = True
    for spec in specs:
        try:
            table = harness.run_experiment(spec)
        except harness.ConfigError as exc:
            click.echo(f"error: {exc}", err=True)
            ok = False
            continue
        # internal assertions: the CSV must re-parse and g must increase
        again = harness.CsvTable.from_csv(table.to_csv())
        if again.rows != table.rows or not table.check_monotone():
            click.echo("error: CSV round-trip or ordering check failed", err=True)
            ok = False
        if spec.out is None:
            click.echo(table.to_csv(), nl=False)
        if target is not None:
            try:
                click.echo(f"# rate {harness.fit_rate(table, target):.4f}", err=True)
            except harness.DegenerateFit as exc:
                click.echo(f"error: {exc}", err=True)
                ok = False
    sys.exit(0 if ok else 1)


if __name__ == "__main__":  # pragma: no cover
    main()
