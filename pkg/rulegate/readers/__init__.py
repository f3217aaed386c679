"""Readers for rule files, datasets, parameter blobs, configs and reports."""
