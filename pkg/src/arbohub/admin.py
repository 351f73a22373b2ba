"""Server-side administration: run the service, issue keys, ingest files."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .datasets import DATASET_KINDS, IngestError, ingest_dataset
from .db import Database
from .registry import Registry
from .server import ServerConfig, create_app


def _config(data_dir: str | None, bind: str | None = None, **extra) -> ServerConfig:
    config = ServerConfig.from_env()
    overrides = dict(extra)
    if data_dir:
        overrides["data_dir"] = Path(data_dir)
    if bind:
        overrides["bind_addr"] = bind
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    return config


@click.group()
def main():
    """Administer a self-hosted arbovirus forecast hub."""


@main.command()
@click.option("--bind", default=None, help="host:port to listen on (ARBOHUB_BIND_ADDR).")
@click.option("--data-dir", default=None, help="Directory for the sqlite store (ARBOHUB_DATA_DIR).")
@click.option("--dashboard-dir", default=None, help="Static dashboard bundle to serve at /dashboard.")
def serve(bind, data_dir, dashboard_dir):
    """Run the HTTP service."""
    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    extra = {}
    if dashboard_dir:
        extra["dashboard_dir"] = Path(dashboard_dir)
    elif Path("frontend/dist").is_dir():
        extra["dashboard_dir"] = Path("frontend/dist")
    config = _config(data_dir, bind, **extra)
    uvicorn.run(create_app(config), host=config.host, port=config.port)


@main.command("create-account")
@click.option("--name", required=True, help="Display name for the account.")
@click.option("--data-dir", default=None)
def create_account(name, data_dir):
    """Issue a new account and print its API key (shown only once)."""
    config = _config(data_dir)
    account, token = Registry(Database(config.db_path)).create_account(name)
    click.echo(f"account id: {account.id}", err=True)
    click.echo(token)


@main.command("list-accounts")
@click.option("--data-dir", default=None)
def list_accounts(data_dir):
    """Print all accounts as JSON lines."""
    config = _config(data_dir)
    for account in Registry(Database(config.db_path)).list_accounts():
        click.echo(json.dumps(account.to_wire()))


@main.command()
@click.argument("kind", type=click.Choice(DATASET_KINDS))
@click.argument("file", type=click.Path(exists=True))
@click.option("--disease", default=None, help="Disease for infodengue files lacking a disease column.")
@click.option("--data-dir", default=None)
def ingest(kind, file, disease, data_dir):
    """Validate and upsert one observed-data CSV; prints the ingest report."""
    config = _config(data_dir)
    try:
        report = ingest_dataset(Database(config.db_path), kind, file, disease=disease)
    except IngestError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    click.echo(json.dumps(report.to_wire(), indent=2))
    if report.rejected:
        click.echo(f"warning: {report.rejected} rows rejected", err=True)


if __name__ == "__main__":
    main()
