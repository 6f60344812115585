"""
Sentiment Layer

Dictionary management and compositional polarity over dependency trees.
"""
