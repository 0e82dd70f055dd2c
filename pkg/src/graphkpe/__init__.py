"""Graph-enhanced keyphrase extraction toolkit.

Builds a per-document co-occurrence graph, embeds its nodes with a GCN
trained on self-supervised edge prediction, fuses those embeddings with
contextual word embeddings in a BIO sequence tagger, and evaluates
predictions with exact-match F1@K.
"""

__version__ = "0.1.0"
