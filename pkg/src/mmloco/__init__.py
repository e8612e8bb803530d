"""Multi-modal (walking/flying) locomotion planning and reduced-order simulation."""

__version__ = "0.1.0"
