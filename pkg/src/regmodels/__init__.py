"""Regular models of curves over discretely valued fields.

Chart-based arithmetic surfaces, blowup resolution, reduction-type
invariants, regular-differential lattices, and a perturbation harness
certifying local constancy of the computed invariants.
"""

__version__ = "0.1.0"
