"""Deterministic multicast routing simulator (PIM-SM, IGMP, static RIB)."""

from mcastsim._mcastsim import (
    Sim,
    broadcast_of,
    check_config,
    decode_message,
    internet_checksum,
    is_multicast,
    prefix_contains,
)

__all__ = [
    "Sim",
    "broadcast_of",
    "check_config",
    "decode_message",
    "internet_checksum",
    "is_multicast",
    "prefix_contains",
]
