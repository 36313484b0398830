"""Command-line entry point.

Subcommands: extract, train, cv, analyze (correlate | grid | dist), inspect,
serve. Flags mirror the module defaults (single source of truth), can be
overridden by AFVA_-prefixed environment variables, and a key=value config
file (``section.option=value``) supplies defaults below both. Every run
prints its resolved configuration.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from afva import experiments, external, network, pipeline, service
from afva.errors import AfvaError

_TRAIN_DEFAULTS = network.TrainConfig()
_FEATURE_DEFAULTS = pipeline.FeatureConfig()

BLOCK_CHOICES = pipeline.BLOCK_ORDER + ("all",)


def _echo_config(command: str, params: dict) -> None:
    resolved = " ".join(f"{key}={params[key]}" for key in sorted(params))
    click.echo(f"[{command}] {resolved}")


def _parse_blocks(blocks: str) -> tuple[str, ...]:
    names = [b.strip() for b in blocks.split(",") if b.strip()]
    if "all" in names:
        return pipeline.BLOCK_ORDER
    return pipeline.canonical_selection(names)


def _parse_hidden(hidden: str) -> tuple[int, ...]:
    dims = tuple(int(d) for d in hidden.split(",") if d.strip())
    if not dims or any(d < 1 for d in dims):
        raise click.BadParameter(f"hidden widths must be positive ints: {hidden!r}")
    return dims


def _read_config_file(path: str) -> dict:
    """key=value lines, keys as section.option; '#' starts a comment."""
    default_map: dict = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"{path}:{line_no}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        target = default_map
        *sections, option = key.split(".")
        for section in sections:
            target = target.setdefault(section, {})
        target[option.replace("-", "_")] = value
    return default_map


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key=value defaults file, e.g. 'train.lr=0.001'.")
@click.pass_context
def main(ctx, config):
    """Valence-arousal image emotion toolkit."""
    if config is not None:
        ctx.default_map = _read_config_file(config)


def _extract_record(args):
    record_json, selection, config = args
    record = pipeline.DatasetRecord.from_json(record_json)
    vector = pipeline.assemble(record, selection, config)
    return vector.schema(), vector.concat()


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--blocks", default="all", show_default=True,
              help="comma-separated subset of color,gist,lbp,object,semantic or 'all'.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--gist-resolution", default=_FEATURE_DEFAULTS.gist_resolution,
              show_default=True)
@click.option("--object-source", default=_FEATURE_DEFAULTS.object_source,
              show_default=True, type=click.Choice(external.OBJECT_SOURCES))
@click.option("--jobs", default=1, show_default=True, help="parallel extraction workers.")
@click.pass_context
def extract(ctx, manifest, blocks, out, gist_resolution, object_source, jobs):
    """Assemble feature vectors for every manifest record into a cache."""
    _echo_config("extract", ctx.params)
    selection = _parse_blocks(blocks)
    config = pipeline.FeatureConfig(
        gist_resolution=gist_resolution, object_source=object_source
    )
    records = pipeline.read_manifest(manifest)
    if not records:
        raise click.ClickException(f"{manifest} holds no records")

    tasks = [(record.to_json(), selection, config) for record in records]
    results: list = [None] * len(records)
    failures: list[tuple[str, str]] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_extract_record, task): i
                       for i, task in enumerate(tasks)}
            for future, i in futures.items():
                try:
                    results[i] = future.result()
                except (AfvaError, OSError, ValueError) as exc:
                    failures.append((records[i].id, str(exc)))
        failures.sort(key=lambda item: item[0])
    else:
        for i, task in enumerate(tasks):
            try:
                results[i] = _extract_record(task)
            except (AfvaError, OSError, ValueError) as exc:
                failures.append((records[i].id, str(exc)))

    kept = [(records[i], results[i]) for i in range(len(records)) if results[i]]
    if kept:
        schema = kept[0][1][0]
        values = np.vstack([row for _, (_, row) in kept])
        values = values.astype(np.float32).astype(np.float64)
        labels = None
        if all(record.label is not None for record, _ in kept):
            labels = {
                "valence": np.array([r.label.valence for r, _ in kept]),
                "arousal": np.array([r.label.arousal for r, _ in kept]),
            }
        matrix = pipeline.FeatureMatrix(
            values=values,
            ids=tuple(record.id for record, _ in kept),
            schema=schema,
            labels=labels,
        )
        pipeline.cache_write(matrix, out)
        click.echo(f"wrote {matrix.n_rows} rows x {matrix.dim} dims to {out}")
    for record_id, message in failures:
        click.echo(f"error: {record_id}: {message}", err=True)
    if failures:
        raise SystemExit(1)


@main.command()
@click.option("--cache", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--axis", required=True, type=click.Choice(["valence", "arousal"]))
@click.option("--lr", default=_TRAIN_DEFAULTS.learning_rate, show_default=True)
@click.option("--momentum", default=_TRAIN_DEFAULTS.momentum, show_default=True)
@click.option("--batch", default=_TRAIN_DEFAULTS.batch_size, show_default=True)
@click.option("--epochs", default=_TRAIN_DEFAULTS.max_epochs, show_default=True)
@click.option("--patience", default=_TRAIN_DEFAULTS.patience, show_default=True)
@click.option("--hidden", default=",".join(map(str, network.DEFAULT_HIDDEN_DIMS)),
              show_default=True, help="comma-separated hidden layer widths.")
@click.option("--val-fraction", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--standardize/--no-standardize", default=True, show_default=True)
@click.option("--mean-loss/--sum-loss", default=_TRAIN_DEFAULTS.mean_loss,
              show_default=True,
              help="average the batch gradient instead of summing it.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--history", default=None, type=click.Path(dir_okay=False),
              help="loss-history CSV path [default: <out>.history.csv].")
@click.pass_context
def train(ctx, cache, axis, lr, momentum, batch, epochs, patience, hidden,
          val_fraction, seed, standardize, mean_loss, out, history):
    """Fit one network for one axis from a labeled feature cache."""
    _echo_config("train", ctx.params)
    matrix = pipeline.cache_read(cache)
    targets = matrix.targets(axis)
    values = matrix.values
    stats = None
    if standardize:
        standardized, stats = pipeline.standardize(matrix)
        values = standardized.values

    config = network.TrainConfig(
        learning_rate=lr, momentum=momentum, batch_size=batch,
        max_epochs=epochs, patience=patience, seed=seed, mean_loss=mean_loss,
    )
    net = network.init((values.shape[1], *_parse_hidden(hidden), 1),
                       seed=seed, axis=axis)
    try:
        net, epoch_history = network.train(net, values, targets, config, val_fraction)
    except AfvaError as exc:
        raise click.ClickException(str(exc)) from exc
    network.save_model(net, out)

    history_path = history or f"{out}.history.csv"
    with open(history_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,train_mse,val_mse\n")
        for entry in epoch_history:
            fh.write(f"{entry.epoch},{entry.train_mse!r},{entry.val_mse!r}\n")
    if stats is not None:
        mean, std = stats
        with open(f"{out}.stats.json", "w", encoding="utf-8") as fh:
            json.dump({"mean": mean.tolist(), "std": std.tolist()}, fh)
            fh.write("\n")
    click.echo(
        f"trained {axis} model ({len(epoch_history)} epochs) -> {out}"
    )


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--blocks", default="all", show_default=True)
@click.option("--axis", required=True, type=click.Choice(["valence", "arousal"]))
@click.option("--k", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--lr", default=_TRAIN_DEFAULTS.learning_rate, show_default=True)
@click.option("--momentum", default=_TRAIN_DEFAULTS.momentum, show_default=True)
@click.option("--batch", default=_TRAIN_DEFAULTS.batch_size, show_default=True)
@click.option("--epochs", default=_TRAIN_DEFAULTS.max_epochs, show_default=True)
@click.option("--patience", default=_TRAIN_DEFAULTS.patience, show_default=True)
@click.option("--hidden", default=",".join(map(str, network.DEFAULT_HIDDEN_DIMS)),
              show_default=True)
@click.option("--val-fraction", default=0.1, show_default=True)
@click.option("--standardize/--no-standardize", default=True, show_default=True)
@click.option("--mean-loss/--sum-loss", default=_TRAIN_DEFAULTS.mean_loss,
              show_default=True,
              help="average the batch gradient instead of summing it.")
@click.option("--gist-resolution", default=_FEATURE_DEFAULTS.gist_resolution,
              show_default=True)
@click.option("--object-source", default=_FEATURE_DEFAULTS.object_source,
              show_default=True, type=click.Choice(external.OBJECT_SOURCES))
@click.option("--report", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def cv(ctx, manifest, blocks, axis, k, seed, lr, momentum, batch, epochs,
       patience, hidden, val_fraction, standardize, mean_loss,
       gist_resolution, object_source, report):
    """K-fold cross-validation over a labeled manifest; JSON report out."""
    _echo_config("cv", ctx.params)
    records = pipeline.read_manifest(manifest)
    config = network.TrainConfig(
        learning_rate=lr, momentum=momentum, batch_size=batch,
        max_epochs=epochs, patience=patience, seed=seed, mean_loss=mean_loss,
    )
    try:
        result = experiments.run_cv(
            records,
            _parse_blocks(blocks),
            axis,
            config=config,
            k=k,
            seed=seed,
            feature_config=pipeline.FeatureConfig(
                gist_resolution=gist_resolution, object_source=object_source
            ),
            hidden_dims=_parse_hidden(hidden),
            standardize=standardize,
            val_fraction=val_fraction,
        )
    except (AfvaError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    experiments.write_report_json(result, report)
    click.echo(
        f"{axis} cv: avg train mse {result.avg_train_mse:.4f}, "
        f"avg test mse {result.avg_test_mse:.4f} -> {report}"
    )


@main.group()
def analyze():
    """Correlation, word-grid, and label-distribution analyses."""


@analyze.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dictionary", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="JSON output path [default: stdout].")
@click.pass_context
def correlate(ctx, manifest, dictionary, out):
    """Pearson correlation between word emotion and image emotion."""
    _echo_config("analyze correlate", ctx.params)
    records = pipeline.read_manifest(manifest)
    words = experiments.load_word_dictionary(dictionary)
    try:
        r_valence, r_arousal, n_matched = experiments.object_emotion_correlation(
            records, words
        )
    except AfvaError as exc:
        raise click.ClickException(str(exc)) from exc
    payload = json.dumps(
        {"r_valence": r_valence, "r_arousal": r_arousal, "n_matched": n_matched},
        sort_keys=True,
    )
    if out is None:
        click.echo(payload)
    else:
        Path(out).write_text(payload + "\n", encoding="utf-8")


@analyze.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--top", default=10, show_default=True,
              help="words listed per grid cell.")
@click.pass_context
def grid(ctx, manifest, out, top):
    """Most-used tag words per 4x4 valence-arousal cell, as CSV."""
    _echo_config("analyze grid", ctx.params)
    records = pipeline.read_manifest(manifest)
    experiments.write_grid_csv(experiments.va_grid_words(records), out, top=top)
    click.echo(f"wrote word grid -> {out}")


@analyze.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bins", default=8, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def dist(ctx, manifest, bins, out):
    """2-D histogram of labels over [1,9]^2, as CSV."""
    _echo_config("analyze dist", ctx.params)
    records = pipeline.read_manifest(manifest)
    table = experiments.export_va_distribution(records, bins=bins)
    experiments.write_distribution_csv(table, out)
    click.echo(f"wrote {int(table.sum())} label counts -> {out}")


@main.command()
@click.option("--model", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--cache", default=None, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def inspect(ctx, model, cache):
    """Print the shape and metadata of a model or feature cache file."""
    _echo_config("inspect", ctx.params)
    if model is None and cache is None:
        raise click.ClickException("give --model and/or --cache")
    if model is not None:
        net = network.load_model(model)
        n_params = sum(w.size + b.size for w, b in zip(net.weights, net.biases))
        click.echo(
            f"model {model}: axis={net.axis or '(unset)'} dims={list(net.dims)} "
            f"parameters={n_params}"
        )
    if cache is not None:
        matrix = pipeline.cache_read(cache)
        blocks = ", ".join(f"{name}:{length}" for name, length in matrix.schema)
        labeled = "labeled" if matrix.labels else "unlabeled"
        click.echo(
            f"cache {cache}: {matrix.n_rows} rows x {matrix.dim} dims "
            f"[{blocks}] {labeled}"
        )


@main.command()
@click.option("--listen", default="127.0.0.1:8000", show_default=True,
              help="host:port to bind.")
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--log", required=True, type=click.Path(dir_okay=False))
@click.option("--ui-dir", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--seed", default=0, show_default=True,
              help="server seed for per-worker sequence randomization.")
@click.pass_context
def serve(ctx, listen, images, log, ui_dir, seed):
    """Run the annotation collection service until interrupted."""
    import uvicorn

    _echo_config("serve", ctx.params)
    try:
        host, port_text = listen.rsplit(":", 1)
        port = int(port_text)
    except ValueError as exc:
        raise click.ClickException(f"--listen must be host:port, got {listen!r}") from exc
    try:
        image_paths = service.discover_images(images)
    except (FileNotFoundError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    if not image_paths:
        raise click.ClickException(f"no PNG/JPEG images found under {images}")

    store = service.AnnotationStore(
        image_ids=list(image_paths), log_path=log, server_seed=seed
    )
    app = service.make_app(store, image_paths, ui_dir=ui_dir)
    click.echo(f"serving {len(image_paths)} images on http://{host}:{port}")
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        raise click.ClickException(f"server failed to start: {exc}") from exc
    finally:
        store.close()


def entrypoint():
    main(auto_envvar_prefix="AFVA")


if __name__ == "__main__":
    entrypoint()
