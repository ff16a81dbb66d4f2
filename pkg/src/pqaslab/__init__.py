"""pqaslab: a numerical laboratory for keyed quantum-state authentication.

The package simulates a keyed encryption/authentication channel that pads a
message register with a tag register and a maximally mixed register before
scrambling, verifies its security and authentication behavior against exact
unitary-moment oracles and Monte Carlo, runs the attack games that separate
it from deterministic (pure-state) encryption, and builds the derived keyed
primitives (verifiable pseudorandom density matrices, one-way state
generators, noise-robust EFI pairs).
"""

from . import attacks, ensembles, harness, moments, pqas, primitives, qcore

__all__ = ["qcore", "moments", "ensembles", "pqas", "attacks", "primitives", "harness"]
__version__ = "0.1.0"
