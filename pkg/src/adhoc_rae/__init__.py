"""Predicting stock direction after ad hoc disclosures from their headlines.

Two classifiers are compared on a chronological split: a random forest over
tf-idf features and a semi-supervised recursive autoencoder.
"""

__version__ = "0.1.0"
