"""Federated screening classifiers: linear SVC, CART and random forest silos."""

__version__ = "0.1.0"
