"""Privacy-preference prediction: synthetic data, privacy-preserving preprocessing,
classifiers, tabular Q-learning and a reproducible evaluation harness."""

__version__ = "0.1.0"
