"""Training, scoring and evaluation routines; import the submodules directly."""
