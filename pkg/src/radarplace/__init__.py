"""radarplace: unsupervised place recognition learned from radar videos."""

__version__ = "0.1.0"
