"""Command line entry point: configure and serve the bridge."""

import json

import click

from .config import ATTENTION_METHODS, load_config
from .model import BridgeError, ClipBridge
from .server import build_app


@click.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file; flags override its values")
@click.option("--model", default=None, help="model id or local model directory")
@click.option("--device", default=None, help="torch device, e.g. cpu or cuda:0")
@click.option("--attention", type=click.Choice(ATTENTION_METHODS), default=None,
              help="heatmap derivation method")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--check", is_flag=True,
              help="load the model, print /info, and exit without serving")
def main(config_path, model, device, attention, host, port, check):
    """Serve a vision-language dual encoder over the encoder wire protocol."""
    try:
        config = load_config(
            config_path, model=model, device=device, attention=attention, host=host, port=port
        )
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(str(exc))

    try:
        bridge = ClipBridge(config)
    except BridgeError as exc:
        raise click.ClickException(str(exc))

    meta = bridge.info()
    click.echo(
        f"loaded {meta.name}: dim {meta.dim}, resolution {meta.input_resolution}, "
        f"attention grid {meta.attention_grid[0]}x{meta.attention_grid[1]} "
        f"({config.attention})"
    )
    if check:
        return
    import uvicorn

    uvicorn.run(build_app(bridge), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
