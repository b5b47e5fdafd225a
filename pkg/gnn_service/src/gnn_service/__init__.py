"""Relational GNN node-classification models served over HTTP.

One model per question pattern (KG, entity type, edge path); training runs
on task-oriented 1-hop subgraphs with benchmark entities excluded, and the
service returns top-k classes by log-likelihood.
"""

__version__ = "0.1.0"
