"""Command-line interface.

`arcsim run` is a thin client of the experiment service layer: without
--server it calls the same function the POST /api/experiments endpoint uses;
with --server it sends the request to a running gateway over HTTP.
`arcsim broker` and `arcsim gateway` start the long-running processes.
"""

from __future__ import annotations

import json
import logging
import os
import signal
import sys
import threading
import urllib.request

import click

from . import __version__
from .config import DEFAULT_CONFIG_TEXT, load_config
from .service.models import ExperimentRequest, ExperimentResponse


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Serpentine-robot simulator: experiments, bus broker, teleop gateway."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Key-value config file overlaying the defaults.")
@click.option("--experiment", type=click.Choice(["config", "transparency", "pendulum"]),
              required=True)
@click.option("--preset", default="straight", show_default=True,
              help="Configuration preset (config experiment).")
@click.option("--vin", default="12,24,36", show_default=True,
              help="Comma-separated input voltages (pendulum experiment).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for states.jsonl and metrics.json.")
@click.option("--csv", "csv_export", is_flag=True, help="Also write states.csv.")
@click.option("--server", default=None,
              help="Gateway base URL; runs the experiment remotely.")
def run(config_path, experiment, preset, vin, seed, out_dir, csv_export, server):
    """Run one experiment and print its metrics."""
    req = ExperimentRequest(
        experiment=experiment,
        preset=preset,
        vin=[float(v) for v in vin.split(",") if v.strip()],
        seed=seed,
        config_path=config_path,
    )
    if server:
        body = req.model_dump_json().encode("utf-8")
        http_req = urllib.request.Request(
            server.rstrip("/") + "/api/experiments",
            data=body,
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(http_req) as resp:
            response = ExperimentResponse(**json.load(resp))
    else:
        from .service.runner import execute

        response = execute(req)

    click.echo(json.dumps(response.metrics, indent=2, sort_keys=True))
    if out_dir:
        from .harness.experiments import ExperimentRecord
        from .harness.logio import write_record

        record = ExperimentRecord(
            name=response.experiment,
            config_snapshot=response.config_snapshot,
            series=response.series or [],
            metrics=response.metrics,
        )
        write_record(record, out_dir, csv_export=csv_export)
        click.echo(f"wrote {out_dir}/states.jsonl and {out_dir}/metrics.json",
                   err=True)


@main.command()
@click.option("--port", default=7781, show_default=True, type=int)
@click.option("--max-frame", default=1024 * 1024, show_default=True, type=int)
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Append broker events to this file.")
def broker(port, max_frame, log_path):
    """Run the pub/sub broker."""
    from .bus import Broker

    handlers = [logging.StreamHandler()]
    if log_path:
        handlers.append(logging.FileHandler(log_path))
    logging.basicConfig(level=logging.INFO, handlers=handlers,
                        format="%(asctime)s %(name)s %(message)s")
    b = Broker(host="0.0.0.0", port=port, max_frame=max_frame)
    b.start()
    click.echo(f"broker listening on :{b.port}", err=True)
    _wait_forever()
    b.stop()


@main.command()
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--broker-url", default=None,
              help="host:port of an external broker; default starts one in-process.")
@click.option("--modules", default=4, show_default=True, type=int,
              help="Simulated modules for the embedded robot.")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Static console directory (defaults to ./frontend/dist).")
def gateway(port, config_path, broker_url, modules, ui_dir):
    """Serve the teleop gateway: WebSocket stream plus REST API."""
    import uvicorn

    from .bus import Broker
    from .harness.live import LiveRobot
    from .service.app import create_app
    from .service.bridge import GatewayBridge

    config = load_config(config_path)
    embedded_broker = None
    robot = None
    if broker_url:
        host, _, broker_port = broker_url.partition(":")
        broker_port = int(broker_port or config.bus.port)
    else:
        embedded_broker = Broker(port=config.bus.port,
                                 max_frame=config.bus.max_frame_bytes)
        embedded_broker.start()
        host, broker_port = "127.0.0.1", embedded_broker.port
        robot = LiveRobot(config, host, broker_port, n_modules=modules)
        robot.start()
        click.echo(f"embedded broker on :{broker_port}, {modules} modules", err=True)

    bridge = GatewayBridge(config, host, broker_port)
    bridge.start()
    if ui_dir is None:
        candidate = os.path.join(os.getcwd(), "frontend", "dist")
        ui_dir = candidate if os.path.isdir(candidate) else None
    app = create_app(bridge, frontend_dir=ui_dir)
    try:
        uvicorn.run(app, host="0.0.0.0", port=port, log_level="info")
    finally:
        bridge.stop()
        if robot is not None:
            robot.stop()
        if embedded_broker is not None:
            embedded_broker.stop()


@main.command("config-dump")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the default config here instead of stdout.")
def config_dump(out_path):
    """Print the built-in default configuration file."""
    if out_path:
        with open(out_path, "w") as f:
            f.write(DEFAULT_CONFIG_TEXT)
    else:
        click.echo(DEFAULT_CONFIG_TEXT, nl=False)


def _wait_forever() -> None:
    stop = threading.Event()

    def handler(signum, frame):
        stop.set()

    signal.signal(signal.SIGINT, handler)
    signal.signal(signal.SIGTERM, handler)
    stop.wait()


if __name__ == "__main__":
    main()
