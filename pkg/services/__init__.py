"""
Services package
================

Statevector simulation, training and evaluation, checkpoints and plots.
"""
