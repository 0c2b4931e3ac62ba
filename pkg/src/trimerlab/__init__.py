"""Numerical engine for three-body spectra of attractive inverse-square pair potentials.

The package is organized around the adiabatic hyperspherical workflow:

- :mod:`trimerlab.model` defines units, pair potentials, and coordinates,
- :mod:`trimerlab.twobody` solves the radial two-body ladder,
- :mod:`trimerlab.hyperangular` solves the fixed-hyperradius eigenproblem and
  assembles effective-potential tables,
- :mod:`trimerlab.hyperradial` finds bound states of a single channel across
  tens of decades of binding energy,
- :mod:`trimerlab.analysis` fits asymptotic tails, parameter trends, and
  closed-form spectrum/ratio relations,
- :mod:`trimerlab.cli` orchestrates the pipelines and exports CSV/JSON
  artifacts through a content-addressed cache.
"""

__version__ = "0.1.0"
