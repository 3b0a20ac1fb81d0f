"""Indoor robot navigation with NOMA downlink power allocation over a Lego-style radio map."""

__version__ = "0.1.0"
