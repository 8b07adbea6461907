"""Numerical curvature identities, reduced Ricci flows and soliton profiles."""

from ._weylflow import (
    bryant,
    catalog_document,
    catalog_names,
    check,
    curvature,
    flow,
    sample,
)

__all__ = [
    "bryant",
    "catalog_document",
    "catalog_names",
    "check",
    "curvature",
    "flow",
    "sample",
]
