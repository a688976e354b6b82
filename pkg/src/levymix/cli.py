"""Command-line harness around the library.

Matrices and regions are exchanged as JSON files; see the README for the
schemas.  LEVYMIX_SEED and LEVYMIX_OUT override the seed and output
directory when the flags are absent.
"""

import json
import os
import sys

import click
import numpy as np

from . import noise as _noise
from . import shrinking as _shrinking
from .errors import LevymixError
from .experiments import run_all
from .gallery import ALIASES, named_matrix
from .matrices import (
    classify_noncompact_blocks,
    find_noncompact_witness,
    matrix_from_json,
    matrix_to_json,
    real_jordan_form,
    weyl_conjugator,
)
from .regions import Region, box_region


def _load_matrix(spec):
    """Matrix from an alias name or a JSON file path."""
    if spec in ALIASES:
        return named_matrix(spec)
    with open(spec) as fh:
        return matrix_from_json(json.load(fh))


def _load_matrices(spec):
    if spec in ALIASES:
        return [named_matrix(spec)]
    with open(spec) as fh:
        obj = json.load(fh)
    if isinstance(obj, list):
        return [matrix_from_json(o) for o in obj]
    return [matrix_from_json(obj)]


def _seed_option(value):
    if value is not None:
        return value
    env = os.environ.get("LEVYMIX_SEED")
    return int(env) if env else 0

def _out_option(value):
    if value is not None:
        return value
    return os.environ.get("LEVYMIX_OUT", "reports")


def _emit(obj, fmt):
    if fmt == "json":
        click.echo(json.dumps(obj, indent=2, sort_keys=True))
    else:
        if isinstance(obj, dict):
            for k, v in obj.items():
                click.echo(f"{k},{v}")
        else:
            click.echo(obj)


@click.group()
def main():
    """Matrix-group compactness analysis and noise mixing experiments."""


@main.command()
@click.option("--matrix", "matrix_spec", required=True,
              help="Matrix alias or JSON file.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
def jordan(matrix_spec, fmt):
    """Real Jordan decomposition of a matrix."""
    dec = real_jordan_form(_load_matrix(matrix_spec))
    _emit(dec.to_json(), fmt)


@main.command()
@click.option("--matrix", "matrix_spec", required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
def classify(matrix_spec, fmt):
    """Compactness classification of the cyclic group of a matrix."""
    dec = real_jordan_form(_load_matrix(matrix_spec))
    cert = classify_noncompact_blocks(dec)
    _emit({"compact": cert.compact,
           "case_tags": [[c, i] for c, i in cert.case_tags]}, fmt)


@main.command()
@click.option("--generators", "gen_spec", required=True,
              help="Alias or JSON file with a matrix or list of matrices.")
@click.option("--max-word-len", default=6, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
def witness(gen_spec, max_word_len, fmt):
    """Search for a word with non-compact cyclic closure."""
    w = find_noncompact_witness(_load_matrices(gen_spec),
                                max_word_len=max_word_len)
    if w is None:
        _emit({"found": False, "note": "inconclusive: no witness up to "
               f"word length {max_word_len}"}, fmt)
    else:
        _emit({"found": True, "witness": matrix_to_json(w)}, fmt)


@main.command()
@click.option("--generators", "gen_spec", required=True)
@click.option("--mode", type=click.Choice(["finite", "cesaro"]),
              default="finite", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
def weyl(gen_spec, mode, fmt):
    """Conjugator taking the generated compact group into the orthogonal group."""
    h = weyl_conjugator(_load_matrices(gen_spec), mode=mode)
    _emit(matrix_to_json(h), fmt)


@main.group()
def sets():
    """Shrinking-set family operations."""


@sets.command()
@click.option("--matrix", "matrix_spec", required=True)
@click.option("--t-grid", default="0.2,0.5,1,2,5", show_default=True)
@click.option("--n-samples", default=2000, show_default=True)
@click.option("--h-max", default=200, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=str, default=None)
def verify(matrix_spec, t_grid, n_samples, h_max, seed, out):
    """Verify absorption and null-boundary properties; emit a CSV report."""
    seed = _seed_option(seed)
    out_dir = _out_option(out)
    fam = _shrinking.build_family(_load_matrix(matrix_spec))
    grid = sorted(float(t) for t in t_grid.split(","))
    rows = ["t_small,t_large,h0,violations"]
    for i, t1 in enumerate(grid):
        for t2 in grid[i + 1:]:
            h0, bad = _shrinking.absorption_lag(
                fam, t1, t2, n_samples=n_samples, h_max=h_max, seed=seed)
            rows.append(f"{t1!r},{t2!r},{h0},{bad}")
    outside, inside = _shrinking.null_boundary_check(fam, seed=seed)
    rows.append(f"# frac_outside_union={outside!r} frac_in_intersection={inside!r}")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "sets_verify.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    click.echo(path)


@main.command()
@click.option("--spec", "spec_str", default="gaussian", show_default=True,
              help="gaussian, poisson:<intensity> or deterministic:<rate>.")
@click.option("--regions", "regions_path", required=True,
              help="JSON file with a list of region objects.")
@click.option("--n", default=100_000, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=str, default=None)
def simulate(spec_str, regions_path, n, seed, out):
    """Realize noise over a registered region family; dump JSON."""
    seed = _seed_option(seed)
    out_dir = _out_option(out)
    kind, _, param = spec_str.partition(":")
    spec = _noise.NoiseSpec(kind, float(param) if param else 1.0)
    with open(regions_path) as fh:
        objs = json.load(fh)
    regions = [Region.from_json(o) if "pieces" in o else
               box_region(np.asarray(o["box"], dtype=float)) for o in objs]
    real = _noise.realize(spec, regions, n_atom_samples=n, seed=seed)
    dump = real.to_json()
    dump["region_masses"] = [real.value(i) for i in range(len(regions))]
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "realization.json")
    with open(path, "w") as fh:
        json.dump(dump, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(path)


@main.group()
def experiment():
    """Experiment battery."""


@experiment.command()
@click.option("--config", "config_path", type=str, default=None,
              help="Experiment config JSON (defaults to the canonical battery).")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=str, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
def run(config_path, seed, out, fmt):
    """Run configured experiments; exit 0 iff every verdict is pass."""
    seed = _seed_option(seed)
    out_dir = _out_option(out)
    try:
        code, reports = run_all(config_path, seed_override=seed,
                                out_override=out_dir)
    except LevymixError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for name, report in reports.items():
        click.echo(f"{name}: {report.verdict}")
    sys.exit(code)


if __name__ == "__main__":
    main()
