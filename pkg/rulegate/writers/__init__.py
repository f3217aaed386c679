"""Writers for rule files, datasets, parameter blobs and reports."""
