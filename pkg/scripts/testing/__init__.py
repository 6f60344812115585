"""
Testing and Validation Tools

Parsing/classification metrics, throughput benchmark, and the test suite.
"""
