"""Train-track unwinding and certified move sequences between surface
decompositions, built around an orbit-counting kernel for interval
pseudogroups."""

__version__ = "0.1.0"
