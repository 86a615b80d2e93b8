"""
GlitchTip Error Monitoring Utilities

Sentry-compatible error reporting for CLI runs. Everything here is a no-op
unless ``EPISODIC_GLITCHTIP_DSN`` is configured.
"""

import logging
from typing import Any, Dict, Optional

from episodic.config.settings import settings
from episodic.core.logger import setup_logger

logger = setup_logger(__name__)

_initialized = False


def init_monitoring() -> bool:
    """
    Initialize sentry-sdk when a DSN is configured.

    Returns:
        True if monitoring is active
    """
    global _initialized

    if _initialized:
        return True
    if not settings.glitchtip_dsn:
        return False

    try:
        import sentry_sdk
        from sentry_sdk.integrations.logging import LoggingIntegration

        sentry_sdk.init(
            dsn=settings.glitchtip_dsn,
            environment=settings.environment,
            integrations=[
                LoggingIntegration(
                    level=None,  # Capture all log levels as breadcrumbs
                    event_level=logging.ERROR,  # Send ERROR logs as events
                ),
            ],
            traces_sample_rate=0.0,
            send_default_pii=False,
        )
        _initialized = True
        logger.info("GlitchTip error monitoring initialized")
    except Exception as e:
        logger.error(f"Failed to initialize GlitchTip: {e}")

    return _initialized


def set_run_context(command: str, **extra_tags: Any) -> None:
    """
    Tag subsequent events with the CLI command being run.

    Args:
        command: Subcommand name (count, mine, bench, generate)
        **extra_tags: Additional tags (algo, strategy, workers, ...)
    """
    if not _initialized:
        return

    try:
        import sentry_sdk

        sentry_sdk.set_tag("episodic.command", command)
        for key, value in extra_tags.items():
            sentry_sdk.set_tag(f"episodic.{key}", value)
        sentry_sdk.set_context("run", {"command": command, **extra_tags})
    except Exception as e:
        logger.warning(f"Failed to set run context: {e}")


def capture_exception(
    error: Exception,
    context: Optional[Dict[str, Any]] = None,
    level: str = "error",
) -> None:
    """
    Capture an exception and send to GlitchTip.

    Args:
        error: The exception to capture
        context: Additional context data
        level: Error level (error, warning, info)
    """
    if not _initialized:
        return

    try:
        import sentry_sdk

        with sentry_sdk.push_scope() as scope:
            if context:
                scope.set_context("custom", context)
            scope.level = level
            sentry_sdk.capture_exception(error)
    except Exception as e:
        logger.warning(f"Failed to capture exception in GlitchTip: {e}")
