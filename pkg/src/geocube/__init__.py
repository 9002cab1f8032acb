"""geocube: spatiotemporal data cube and flow mapping over geotagged post
streams."""

__version__ = "0.1.0"
