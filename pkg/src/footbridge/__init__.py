"""Design-space exploration engine for parametric pedestrian girder bridges.

Synthesizes a labeled design dataset with a reference beam simulator, trains
a conditional variational autoencoder as forward surrogate and inverse
generator, and exposes sensitivity analysis and inverse design through a CLI
and an HTTP service.
"""

__version__ = "0.1.0"
