"""Discrete-time simulator of recommender ecosystems with consumer-side
recommender choice: a shared catalog, competing content-based
recommenders, and utility accounting for consumers, providers, and the
recommenders themselves."""

__version__ = "0.1.0"

from .model import (
    Consumer,
    FeatureVector,
    FeeSchedule,
    Item,
    Population,
    PreferenceVector,
    Provider,
    SimConfig,
    normalize_preference,
    validate_config,
)

__all__ = [
    "Consumer",
    "FeatureVector",
    "FeeSchedule",
    "Item",
    "Population",
    "PreferenceVector",
    "Provider",
    "SimConfig",
    "normalize_preference",
    "validate_config",
    "__version__",
]
