"""WiFi probe-request crowd analytics: simulator, edge pipeline, density and
journey estimation services, and the operator API gateway."""

__version__ = "0.1.0"
