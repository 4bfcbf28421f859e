"""Bike-share history analytics and data-offload simulator."""

from ._velomule import (
    ConfigError,
    Error,
    NoData,
    NoHistory,
    ParseError,
    Store,
    TraceError,
    UnknownStation,
    load,
    offload,
    parse_timestamp,
    simulate,
    weekday,
)

__all__ = [
    "ConfigError",
    "Error",
    "NoData",
    "NoHistory",
    "ParseError",
    "Store",
    "TraceError",
    "UnknownStation",
    "load",
    "offload",
    "parse_timestamp",
    "simulate",
    "weekday",
]
