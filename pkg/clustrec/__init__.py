"""
clustrec: clustering algorithm recommendation through graph meta-learning.

This package turns every dataset of a corpus into a similarity graph, embeds the
graphs with a supervised graph convolutional network and trains a pairwise ranking
model that orders clustering algorithms for previously unseen datasets.
"""

__version__ = "1.0.0"
