"""Seizure detection from wearable EEG: EDF ingest, DWT features, class-weighted
classifiers, majority-vote smoothing, event-based evaluation and benchmarking."""

__version__ = "0.1.0"
