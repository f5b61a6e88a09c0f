"""
CLI package
===========

Argument parser construction and subcommand handlers.
"""
