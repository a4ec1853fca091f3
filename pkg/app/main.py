"""
DCLED - Daemon Entry Point
"""

import asyncio
import logging
import signal

from app.api.server import ShareDaemon
from app.core.config import Settings, get_settings
from app.services.store_service import ShareStore

logger = logging.getLogger(__name__)


def configure_logging(level: str = "INFO") -> None:
    """Process-wide logging setup; call once at entry."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
    )


def create_daemon(settings: Settings) -> ShareDaemon:
    """Open this role's share log and wrap it in a daemon."""
    params = settings.scheme_params
    store = ShareStore(
        settings.log_path,
        settings.server_index,
        params,
        fsync=settings.fsync_writes,
    ).open()
    return ShareDaemon(store, params, settings.server_index, settings.protocol_version)


async def run_daemon(settings: Settings) -> None:
    """Serve until cancelled or signalled."""
    logger.info(f"Starting {settings.app_name} server {settings.server_index}...")
    daemon = create_daemon(settings)
    await daemon.start(settings.host, settings.port)

    loop = asyncio.get_running_loop()
    task = asyncio.current_task()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, task.cancel if task else lambda: None)
        except NotImplementedError:
            pass

    try:
        await daemon.serve_forever()
    except asyncio.CancelledError:
        pass
    finally:
        logger.info(f"Shutting down {settings.app_name} server {settings.server_index}...")
        await daemon.stop()


def main() -> None:
    settings = get_settings()
    configure_logging(settings.log_level)
    asyncio.run(run_daemon(settings))


if __name__ == "__main__":
    main()
