"""Language-conditioned traffic scenario generation toolkit.

Pipeline: natural-language text -> structured integer code -> retrieved
map region -> query-based transformer -> 5-second multi-agent scenario.
Also ships the training loop, scene-realism metrics, an HTTP service,
and a CLI.
"""

__version__ = "0.1.0"
