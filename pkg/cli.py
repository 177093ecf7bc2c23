"""Command-line front end: `xpg validate|classify|explain|membership|bench|compile-dl|dump-xpg|generate`.

Exit statuses: 0 success, 1 domain error, 2 parse error, 3 internal
invariant violation, 4 file I/O error.
"""
import json
import logging
import sys
from functools import wraps
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
import numpy as np
import pandas as pd

from bench import render_table
from errors import DomainError, XpgError
from explanation_service import xpg_service
from models import dump_model, load_instances
from synthetic import random_dag, random_dataset, random_decision_list, random_features, random_graph
from xpg import build_xpg, to_dot
from xpg_config import get_config


def _handle_errors(command):
    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except XpgError as e:
            logging.debug(f"{type(e).__name__}: {e}")
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)
    return wrapper


def _emit(records: List[Dict[str, Any]], fmt: str) -> None:
    if fmt == "table":
        if records:
            frame = pd.DataFrame(records)
            for column in frame.columns:
                frame[column] = frame[column].map(
                    lambda cell: ",".join(str(c) for c in cell) if isinstance(cell, list) else cell)
            click.echo(frame.to_string(index=False))
        return
    for record in records:
        click.echo(json.dumps(record, ensure_ascii=False, default=str))


def _instance(model_path: str, row: Optional[int], values: Optional[str], instances: Optional[str]):
    """The instance picked by -v, or row -i of the --instances file."""
    if values is not None:
        return values
    if row is None:
        raise DomainError("give an instance with -v VALUES or -i ROW --instances FILE")
    if instances is None:
        raise DomainError("-i needs --instances FILE")
    dg = xpg_service.load_model(model_path)
    rows, _ = load_instances(instances, dg)
    if not 0 <= row < len(rows):
        raise DomainError(f"row {row} outside 0..{len(rows) - 1}")
    return list(rows[row])


instance_options = [
    click.option("-v", "values", help="Inline instance, e.g. O,L,Y,P"),
    click.option("-i", "row", type=int, help="Row index into --instances (0-based)"),
    click.option("--instances", type=click.Path(dir_okay=False), help="CSV or JSON instance file"),
]


def with_instance(command):
    for option in reversed(instance_options):
        command = option(command)
    return command


@click.group()
@click.option("--log-level", default=None, help="Overrides XPG_LOG_LEVEL")
def cli(log_level):
    """Formal explanations (AXps and CXps) for decision trees and decision graphs."""
    level = (log_level or get_config().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.argument("model_path")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "table"]), default=None,
              help="Structured report instead of the plain OK / error listing")
@_handle_errors
def validate(model_path, fmt):
    """Check a model file; exit 0 iff it has no errors."""
    report = xpg_service.validate(model_path)
    if fmt:
        _emit([report], fmt)
    elif report["ok"]:
        click.echo("OK")
    else:
        for msg in report["errors"]:
            click.echo(f"error: {msg}")
    for msg in report["warnings"]:
        click.echo(f"warning: {msg}", err=True)
    if not report["ok"]:
        sys.exit(DomainError.exit_code)


@cli.command()
@click.argument("model_path")
@with_instance
@_handle_errors
def classify(model_path, values, row, instances):
    """Predicted class and the path taken."""
    result = xpg_service.classify(model_path, _instance(model_path, row, values, instances))
    click.echo(json.dumps(result, ensure_ascii=False, default=str))


@cli.command()
@click.argument("model_path")
@with_instance
@click.option("--mode", type=click.Choice(["axp", "cxp", "enumerate", "cxps-tree"]), default="enumerate")
@click.option("--seed-axp", help="Fixed features to start AXp extraction from (1-based, comma separated)")
@click.option("--seed-cxp", help="Free features to start CXp extraction from (1-based, comma separated)")
@click.option("--order", default="asc", help="asc, desc or perm:<1-based list>")
@click.option("--limit", type=int, help="Stop after this many explanations")
@click.option("--budget", type=float, help="Soft time budget in seconds")
@click.option("--verify", is_flag=True, help="Cross-check the output against brute force")
@click.option("--dimacs", type=click.Path(dir_okay=False), help="Write the final clause set here")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "table"]), default="jsonl")
@_handle_errors
def explain(model_path, values, row, instances, mode, seed_axp, seed_cxp, order, limit, budget,
            verify, dimacs, fmt):
    """One AXp, one CXp, all of them, or all CXps of a tree."""
    result = xpg_service.explain(model_path, _instance(model_path, row, values, instances), mode=mode,
                                 seed_axp=seed_axp, seed_cxp=seed_cxp, order=order, limit=limit,
                                 budget=budget, verify=verify, dimacs=dimacs is not None)
    _emit(result["records"], fmt)
    if dimacs is not None:
        try:
            Path(dimacs).write_text(result["dimacs"], encoding="utf-8")
        except OSError as e:
            click.echo(f"error: cannot write {dimacs}: {e}", err=True)
            sys.exit(4)
    if "solve_calls" in result:
        logging.info(f"{len(result['records'])} explanations, {result['solve_calls']} oracle calls")


@cli.command()
@click.argument("model_path")
@click.argument("feature")
@with_instance
@click.option("--format", "fmt", type=click.Choice(["jsonl", "table"]), default="jsonl")
@_handle_errors
def membership(model_path, feature, values, row, instances, fmt):
    """Is FEATURE (1-based index or name) in some explanation?"""
    result = xpg_service.membership(model_path, _instance(model_path, row, values, instances), feature)
    _emit([result], fmt)


@cli.command()
@click.argument("model_path")
@click.argument("dataset_path")
@click.option("--label-column", default="class", show_default=True,
              help="Column holding the true class; accuracy is reported when present")
@click.option("--workers", type=int, help="Explain instances concurrently")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "table"]), default="table")
@_handle_errors
def bench(model_path, dataset_path, label_column, workers, fmt):
    """Explanation statistics of one model over a dataset."""
    rows = [xpg_service.bench(model_path, dataset_path, label_column=label_column, workers=workers)]
    if fmt == "table":
        click.echo(render_table(rows))
    else:
        _emit(rows, fmt)


@cli.command("compile-dl")
@click.argument("dl_path")
@click.argument("out_path")
@click.option("--order", help="Variable order, 1-based indices or names, comma separated")
@_handle_errors
def compile_dl(dl_path, out_path, order):
    """Compile a decision list into an OBDD model file."""
    document = xpg_service.compile_dl(Path(dl_path), order=order)
    try:
        Path(out_path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        click.echo(f"error: cannot write {out_path}: {e}", err=True)
        sys.exit(4)
    click.echo(f"{out_path}: {len(document['nodes'])} nodes")


@cli.command("dump-xpg")
@click.argument("model_path")
@with_instance
@_handle_errors
def dump_xpg(model_path, values, row, instances):
    """Graphviz DOT of the explanation graph for an instance."""
    dg = xpg_service.load_valid_model(model_path)
    v = xpg_service.resolve_instance(dg, _instance(model_path, row, values, instances))
    click.echo(to_dot(build_xpg(dg, v)), nl=False)


@cli.command()
@click.argument("kind", type=click.Choice(["tree", "dag", "graph", "dl"]))
@click.argument("out_path")
@click.option("--features", "m", type=int, default=6, show_default=True)
@click.option("--domain", "max_domain", type=int, default=3, show_default=True)
@click.option("--numeric", type=click.IntRange(min=0), default=0, show_default=True, help="How many features are real-valued")
@click.option("--nodes", "max_nodes", type=int, default=60, show_default=True)
@click.option("--rules", type=int, default=6, show_default=True, help="Decision lists only")
@click.option("--rows", type=int, default=0, help="Also write a labelled CSV dataset with this many rows")
@click.option("--seed", type=int, help="Overrides XPG_RANDOM_SEED")
@_handle_errors
def generate(kind, out_path, m, max_domain, numeric, max_nodes, rules, rows, seed):
    """Write a random model (or decision list) for bench runs.

    `graph` grows a decision graph whose subgraphs are shared and may retest features.
    """
    rng = np.random.default_rng(seed if seed is not None else get_config().random_seed)
    if kind == "dl":
        dl = random_decision_list(rng, n=m, num_rules=rules)
        document = {"features": list(dl.feature_names),
                    "rules": [{"literals": list(r.literals), "class": r.prediction} for r in dl.rules]}
        dg = None
    else:
        features = random_features(rng, m, max_domain, numeric=numeric)
        if kind == "dag":
            dg = random_dag(rng, max_domain=max_domain, max_nodes=max_nodes, features=features)
        else:
            dg = random_graph(rng, max_domain=max_domain, max_nodes=max_nodes, features=features,
                              share_probability=0.3 if kind == "graph" else 0.0)
        document = dump_model(dg)
    try:
        Path(out_path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
        if rows and dg is not None:
            data_path = Path(out_path).with_suffix(".csv")
            random_dataset(rng, dg, rows).to_csv(data_path, index=False)
            click.echo(f"{data_path}: {rows} rows")
    except OSError as e:
        click.echo(f"error: cannot write {out_path}: {e}", err=True)
        sys.exit(4)
    click.echo(f"{out_path}: written")


if __name__ == "__main__":
    cli()
