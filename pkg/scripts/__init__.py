"""
Sequence-Labeling Polarity Toolkit Scripts Package
"""
__version__ = "0.2.0"
