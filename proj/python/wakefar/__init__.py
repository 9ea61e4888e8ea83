"""Self-similar far-wake solver: similarity profiles, edge series, marching."""

from ._core import (
    BadConstants,
    ConfigError,
    MeshTooSmall,
    WakeError,
    edge,
    march,
    run_cli,
    solve,
    verify,
)

__all__ = [
    "BadConstants",
    "ConfigError",
    "MeshTooSmall",
    "WakeError",
    "edge",
    "march",
    "run_cli",
    "solve",
    "verify",
]
