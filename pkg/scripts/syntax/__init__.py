"""
Syntax Layer

Dependency trees as per-token label sequences:
- treebank_io: CoNLL-U reading/writing and the tree data model
- linearizer: absolute / relative / PoS-anchored encodings and the total decoder
- tagger: frequency-baseline label predictor
"""
